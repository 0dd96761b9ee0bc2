#pragma once

#include <array>
#include <complex>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "pipenet/grid.hpp"
#include "pipenet/params.hpp"

namespace pipenet {

using cd = std::complex<double>;
using cvec = std::vector<cd>;

inline constexpr int kEdges = 3;

/// Displacement w and velocity v of one edge, sampled on an EdgeGrid.
struct EdgeField {
  cvec w;
  cvec v;
};

class StateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// State x = {(w_k, v_k)} of the three-edge star network. Edge k is
/// parametrised so that s = 0 is the inner vertex and s = 1 the pinned end.
class NetworkState {
 public:
  /// Tolerance factor for the pinned-end and vertex-continuity checks,
  /// relative to 1 + max|w|.
  static constexpr double kConstraintTol = 1e-10;

  /// Validates array sizes, w_k(1) = 0 and w_1(0) = w_2(0) = w_3(0).
  NetworkState(EdgeGrid grid, std::array<EdgeField, kEdges> edges);

  static NetworkState zero(const EdgeGrid& grid);

  /// Sets w_k(1) = 0 and replaces the vertex values by their mean. Returns
  /// the snapped state; `max_adjustment` receives the largest change.
  static NetworkState snapped(EdgeGrid grid, std::array<EdgeField, kEdges> edges,
                              double* max_adjustment = nullptr);

  const EdgeGrid& grid() const { return grid_; }
  const EdgeField& edge(int k) const { return edges_[static_cast<std::size_t>(k)]; }
  const std::array<EdgeField, kEdges>& edges() const { return edges_; }

  /// Common displacement at the inner vertex.
  cd vertex_value() const { return edges_[0].w.front(); }
  double max_abs() const;

  NetworkState scaled(cd factor) const;
  NetworkState conj() const;
  NetworkState real_part() const;
  NetworkState plus(const NetworkState& o, cd factor = 1.0) const;

 private:
  EdgeGrid grid_;
  std::array<EdgeField, kEdges> edges_;
};

/// (x, y)_X: the H^2-type energy form on the displacements plus the L2
/// product of the velocities. Derivatives use fourth-order differences and
/// the integrals composite Simpson.
cd energy_inner_product(const NetworkState& x, const NetworkState& y, const Params& p);

/// ||x||_X^2.
double energy_norm_sq(const NetworkState& x, const Params& p);

/// Displacement part of the energy product for single-edge arrays.
cd edge_stiffness_product(std::span<const cd> w, std::span<const cd> wt, double h,
                          const Params& p);

/// Smooth admissible state with random trigonometric content: on each edge
/// w_k = (1 - s)(c + s f_k(s)), v_k likewise, with a shared vertex value c.
NetworkState random_smooth_state(const EdgeGrid& grid, std::mt19937_64& rng, bool real_valued = false);

}  // namespace pipenet

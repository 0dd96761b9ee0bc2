#pragma once

// The inverse of the closed-loop generator at lambda = 0, built edge by edge
// from integrals of the data, and its split into the kappa-free part and the
// finite-rank feedback correction.

#include <Eigen/Dense>
#include <array>

#include "pipenet/params.hpp"
#include "pipenet/state.hpp"

namespace pipenet {

/// Intermediate quantities of one inverse application.
///
/// On edge k the displacement is  w_k = particular_k + linear[k] (1 - s)
///   + hyperbolic[k] sinh(q (1 - s)) / cosh(q),  q = sqrt(gamma - eta^2),
/// where particular_k has zero Cauchy data at s = 1.
struct InverseWork {
  std::array<cd, kEdges> linear{};
  std::array<cd, kEdges> hyperbolic{};
  /// w_k'''(0) - (gamma - eta^2) w_k'(0) + beta eta v_k(0); sums to zero.
  std::array<cd, kEdges> force{};
  cd vertex{};
};

/// x with T x = y. The velocity part of x is the displacement part of y.
NetworkState apply_inverse(const NetworkState& y, const Params& p, InverseWork* work = nullptr);

struct InverseSplit {
  /// Inverse of the kappa = 0 generator applied to y.
  NetworkState skew_part;
  /// Feedback correction; apply_inverse(y) = skew_part + kappa * feedback_part.
  NetworkState feedback_part;
};

InverseSplit split_inverse(const NetworkState& y, const Params& p);

/// The two displacement profiles spanning feedback_part on every edge:
/// 1 - s and sinh(q (1 - s)) / cosh(q).
std::array<cvec, 2> feedback_profiles(const EdgeGrid& grid, const Params& p);

/// T x by fourth-order finite differences: (v, -w'''' + (gamma - eta^2) w'' - 2 beta eta v').
/// Throws StateError when v violates the pinned end or vertex continuity.
NetworkState apply_generator(const NetworkState& x, const Params& p);

/// Largest violation of the domain conditions of the generator, each taken
/// relative to the size of the terms it balances: w_k''(1), the vertex
/// moment and the force balance.
double domain_residual(const NetworkState& x, const Params& p);

/// ||T(T^{-1} y) - y|| / ||y|| in the energy norm.
double round_trip_error(const NetworkState& y, const Params& p);

/// Singular values, descending, of the matrix whose columns are the feedback
/// parts (w and v stacked over the edges) for `samples` random smooth data.
Eigen::VectorXd feedback_singular_values(const Params& p, const EdgeGrid& grid, int samples,
                                         std::mt19937_64& rng);

}  // namespace pipenet

#pragma once

// Hermite-cubic Galerkin discretisation of the closed-loop network and
// implicit trapezoidal time stepping.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pipenet/params.hpp"
#include "pipenet/state.hpp"

namespace pipenet {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degree-of-freedom layout. Unknown 0 is the shared vertex displacement;
/// every edge carries interior node values and slopes at all of its nodes.
/// The pinned end value is eliminated.
struct DofMap {
  int n_elems = 0;
  int size = 0;
  /// value[k][j], -1 at the pinned node; node 0 maps to the vertex unknown.
  std::array<std::vector<int>, kEdges> value;
  std::array<std::vector<int>, kEdges> slope;
};

/// M w'' + G w' + K w = 0.
struct SemiDiscreteSystem {
  Params params;
  DofMap dofs;
  Eigen::SparseMatrix<double> mass, stiffness, coupling;
};

SemiDiscreteSystem assemble(const Params& p, int n_elems);

/// Displacement and velocity coefficient vectors.
struct FemState {
  Eigen::VectorXcd w, u;
};

/// Energy-orthogonal projection: displacement in the stiffness product,
/// velocity in the mass product.
FemState project(const SemiDiscreteSystem& sys, const NetworkState& x);

/// Nodal sampling of a discrete state on a grid.
NetworkState to_network_state(const SemiDiscreteSystem& sys, const FemState& z, const EdgeGrid& grid);

/// w^H K w + u^H M u, equal to the energy norm of the represented state.
double fem_energy(const SemiDiscreteSystem& sys, const FemState& z);

/// v_k'(0) for the three edges.
std::array<cd, kEdges> vertex_slope_rates(const SemiDiscreteSystem& sys, const FemState& z);

struct Trajectory {
  double dt = 0.0;
  std::vector<double> times;
  /// Squared energy norm at each time.
  std::vector<double> energy;
  std::vector<cd> vertex_displacement;
  std::vector<std::array<cd, kEdges>> boundary_obs;
  /// Every snapshot_stride-th state, when requested.
  std::vector<FemState> snapshots;
  std::vector<double> snapshot_times;
};

struct SimulateOptions {
  /// 0 stores no snapshots.
  int snapshot_stride = 0;
  /// Remove overdamped artifact modes from the initial state (see
  /// remove_overdamped_modes).
  bool filter_overdamped = true;
};

/// The vertex feedback term creates real modes near -kappa / h^3 with no
/// continuous counterpart. The trapezoidal rule maps them to a factor close
/// to -1, so any initial content rings from step to step. This removes the
/// components along real modes faster than the largest oscillation
/// frequency of the discrete spectrum; removed_energy receives their energy.
FemState remove_overdamped_modes(const SemiDiscreteSystem& sys, const FemState& z,
                                 double* removed_energy = nullptr);

Trajectory simulate(const SemiDiscreteSystem& sys, const FemState& z0, double t_final, double dt,
                    const SimulateOptions& opts = {});
Trajectory simulate(const SemiDiscreteSystem& sys, const NetworkState& x0, double t_final, double dt,
                    const SimulateOptions& opts = {});

/// dE/dt + 2 kappa sum_k |v_k'(0)|^2 at the interior times, dE/dt by
/// centred differences.
std::vector<double> dissipation_residual(const Trajectory& traj, const Params& p);

/// Eigenvalues of the pencil lambda^2 M + lambda G + K, sorted by |Im|
/// then by Re descending.
std::vector<cd> pencil_eigenvalues(const SemiDiscreteSystem& sys);

}  // namespace pipenet

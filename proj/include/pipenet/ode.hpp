#pragma once

// Integration of the fourth-order spectral equation on one edge,
//   direct:  phi'''' = a phi'' - 2 lambda beta eta phi' - lambda^2 phi,
//   adjoint: psi'''' = a psi'' + 2 mu beta eta psi' - mu^2 psi,
// with a = gamma - eta^2.

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pipenet/grid.hpp"
#include "pipenet/params.hpp"
#include "pipenet/state.hpp"

namespace pipenet {

/// lambda together with rho, lambda = i rho^2. For Im lambda >= 0 rho lies
/// in the sector 0 <= arg rho <= pi/4; otherwise rho is the reflection
/// i conj(rho(conj lambda)).
struct SpectralPoint {
  cd lambda;
  cd rho;

  static SpectralPoint from_lambda(cd lambda);
  /// Uses rho as given; lambda = i rho^2.
  static SpectralPoint from_rho(cd rho);
};

enum class Equation { direct, adjoint };

struct IntegratorOptions {
  double rtol = 1e-11;
  double atol = 1e-13;
  double min_step = 1e-12;
  std::size_t max_steps = 2'000'000;
};

/// Raised when the adaptive integrator cannot meet its tolerance.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Mat4 = Eigen::Matrix4cd;
using Mat42 = Eigen::Matrix<cd, 4, 2>;
using Vec4 = Eigen::Vector4cd;

/// Companion matrix of the first-order system in the scaled variables
/// (y, y'/sigma, y''/sigma^2, y'''/sigma^3).
Mat4 companion_matrix(const SpectralPoint& sp, const Params& p, Equation eq, double sigma);

/// Variable scaling used by the integrators: max(1, |rho|).
double derivative_scale(const SpectralPoint& sp);

/// Adaptive Dormand-Prince 5(4) integration of Y' = A Y from s0 to s1.
/// `after_step` is called on every accepted step and may rescale Y in place.
/// Returns the number of accepted steps.
using StepHook = std::function<void(Eigen::MatrixXcd&)>;
std::size_t integrate_linear(const Mat4& A, Eigen::MatrixXcd& Y, double s0, double s1, double& h,
                             const IntegratorOptions& opts, const StepHook& after_step = {});

/// Endpoint values of the canonical fundamental system phi_r^{(m)}(0) = delta_{m,r-1}.
struct FundamentalData {
  SpectralPoint point;
  /// at_zero(m, r) = phi_r^{(m)}(0) / scale[r], likewise at_one at s = 1.
  Mat4 at_zero;
  Mat4 at_one;
  /// Column normalisation: the maximum of |phi_r^{(m)}(s)| along the edge.
  std::array<double, 4> scale{};
  /// Normalised values at the grid nodes when a grid was supplied.
  std::optional<EdgeGrid> grid;
  std::vector<Mat4> trajectory;
};

FundamentalData integrate_fundamental_system(const SpectralPoint& sp, const Params& p, Equation eq,
                                             const EdgeGrid* grid = nullptr,
                                             const IntegratorOptions& opts = {});

/// phi, phi', phi'', phi''' of sum_r a_r phi_r on the stored grid.
std::array<cvec, 4> sample_solution(const std::array<cd, 4>& coeffs, const FundamentalData& fd);

/// Two-dimensional solution subspace carried from s = 0 to s = 1 with
/// orthonormalisation after every step. Solutions are X(s) = Q(s) d(s) in
/// scaled variables, and d changes between stored nodes by d_{j+1} = R_j d_j.
struct SubspaceShot {
  SpectralPoint point;
  double sigma = 1.0;
  std::vector<double> nodes;
  std::vector<Mat42> q;
  std::vector<Eigen::Matrix2cd> r;
  /// Start basis (scaled) = q[0] * r_start.
  Eigen::Matrix2cd r_start;
  /// Sum of log det over r_start and all r (each det is real positive).
  double log_scale = 0.0;
  std::size_t steps = 0;

  /// Unscaled derivative rows of the stored basis at node j.
  Mat42 unscaled(std::size_t j) const;
};

/// `start` holds two independent unscaled initial vectors (phi, phi', phi'', phi''')(0).
/// With a grid the basis is stored at every node, otherwise at s = 0 and 1 only.
SubspaceShot shoot_subspace(const SpectralPoint& sp, const Params& p, Equation eq, const Mat42& start,
                            const EdgeGrid* grid = nullptr, const IntegratorOptions& opts = {});

/// Solution with coefficients `d_end` in the final basis, back-substituted to
/// every stored node. Returns unscaled derivative arrays.
std::array<cvec, 4> sample_subspace(const SubspaceShot& shot, const Eigen::Vector2cd& d_end);

}  // namespace pipenet

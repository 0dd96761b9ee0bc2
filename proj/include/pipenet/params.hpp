#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pipenet {

/// Physical and control parameters of the pipe network.
///
/// alpha: rotational spring gain at the inner vertex, kappa: velocity feedback gain,
/// beta: mass ratio, eta: flow speed, gamma: tension.
struct Params {
  double alpha = 0.5;
  double kappa = 1.0;
  double beta = 0.5;
  double eta = 1.0;
  double gamma = 2.0;

  /// Effective stiffness gamma - eta^2 (strictly positive for admissible parameters).
  double tension() const { return gamma - eta * eta; }
  /// Gyroscopic coupling beta * eta.
  double gyro() const { return beta * eta; }
  /// beta^2 eta^2 / 2 + gamma - eta^2, the constant in the eigenvalue asymptotics.
  double asymptotic_shift() const { return 0.5 * beta * beta * eta * eta + tension(); }
};

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Every violated admissibility constraint, empty when the tuple is admissible.
std::vector<std::string> validate_params(const Params& p);

/// Throws ParameterError listing all violations.
void require_valid(const Params& p);

}  // namespace pipenet

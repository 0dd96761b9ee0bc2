#pragma once

// Post-processing: exponential decay fits, the spectral abscissa and
// conditioning of finite sections of the eigenvector family.

#include <optional>
#include <string>
#include <vector>

#include "pipenet/simulator.hpp"
#include "pipenet/spectral.hpp"

namespace pipenet {

class AnalysisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// log E(t) ~ 2 rate t + intercept on [t_begin, t_end].
struct DecayFit {
  double rate = 0.0;
  double intercept = 0.0;
  double t_begin = 0.0, t_end = 0.0;
  double r_squared = 0.0;
};

struct DecayFitOptions {
  /// Fraction of the horizon discarded before the first fit.
  double skip_fraction = 0.2;
  /// Samples with E below floor_ratio * E(0) are left out (roundoff floor).
  double floor_ratio = 1e-13;
};

/// Least-squares fit of log E(t) = 2 rate t + c. The window starts after the
/// first skip_fraction of the horizon; a second pass moves the start to at
/// least 2 / |rate| of the first estimate.
DecayFit estimate_decay_rate(const std::vector<double>& times, const std::vector<double>& energy,
                             const DecayFitOptions& opts = {});
DecayFit estimate_decay_rate(const Trajectory& traj, const DecayFitOptions& opts = {});

struct AbscissaReport {
  double value = 0.0;
  /// Position of the attaining record in the input.
  std::size_t attained_by = 0;
  /// Non-empty when the search cannot exclude roots further right.
  std::string warning;
};

AbscissaReport spectral_abscissa(const std::vector<EigenRecord>& records);
/// Adds a warning when the search left gaps or the low-mode sweep did not
/// reach the right half-plane.
AbscissaReport spectral_abscissa(const Spectrum& spectrum);

struct GramReport {
  std::size_t size = 0;
  double condition_number = 0.0;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
};

/// Gram matrix of the energy inner products of all eigenfunctions carried
/// by the records (two per BRANCH2 record).
GramReport gram_condition(const std::vector<EigenRecord>& records, const Params& p);

/// Coefficients of the best approximation of x in the energy norm by the
/// eigenfunctions of the records (normal equations with the Gram matrix),
/// in the order in which the records carry them.
std::vector<cd> section_coefficients(const std::vector<EigenRecord>& records, const NetworkState& x,
                                     const Params& p);

/// Kendall rank correlation (tau-a) of the pairs (x_i, y_i); tied pairs
/// count as neither concordant nor discordant.
double kendall_tau(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace pipenet

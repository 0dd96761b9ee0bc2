#pragma once

// Large-|rho| expansions: the two-term fundamental system in the sector
// 0 <= arg rho <= pi/4 and the leading eigenvalue asymptotics of both branches.

#include <array>
#include <vector>

#include "pipenet/branch.hpp"
#include "pipenet/ode.hpp"

namespace pipenet {

/// omega_r = i^r, r = 1..4: i, -1, -i, 1.
cd omega(int r);

/// Phi_r(s) = -1 + exp((-1)^{r+1} i beta eta s / 2).
cd phase_term(int r, double s, const Params& p);
cd phase_term_derivative(int r, double s, const Params& p);
/// Phi_{r1}(s) = (-i)^r c s exp((-1)^{r+1} i beta eta s / 2) / 4 with
/// c = beta^2 eta^2 / 2 + gamma - eta^2.
cd first_correction(int r, double s, const Params& p);

/// m-th derivative of the r-th solution of the expansion,
/// (omega rho)^m e^{omega rho s}(1 + Phi + (omega Phi_1 + m Phi') / (omega rho)).
cd asymptotic_solution(cd rho, double s, int r, int m, const Params& p);

/// Same as asymptotic_solution divided by (omega rho)^m e^{omega rho s}.
cd asymptotic_amplitude(cd rho, double s, int r, int m, const Params& p);

struct AsymptoticEigenvalue {
  cd lambda;
  /// tau_n + z_n, the corrected root of the asymptotic characteristic equation.
  cd rho;
  /// Set when kappa = 0: the real part is reported as 0 and the formula does
  /// not apply.
  bool kappa_zero = false;
};

/// tau_n = (n + 1/2) pi for BRANCH1, (n + 1/4) pi for BRANCH2.
double asymptotic_tau(int n, Branch b);

/// Closed-form eigenvalue for index n; negative n gives the conjugate.
AsymptoticEigenvalue asymptotic_eigenvalue(int n, Branch b, const Params& p);

/// Finite part of the asymptotic characteristic equation of the branch.
cd asymptotic_char_residual(cd rho, Branch b, const Params& p);

/// Relative deviation of the expansion from a shooting reference at |rho|,
/// maximised over r = 1..4, m = 0..3 and the sample points. Each entry is
/// measured relative to |(omega rho)^m e^{omega rho s}|.
struct ExpansionError {
  double max_rel = 0.0;
  /// per_solution[r-1][m]
  std::array<std::array<double, 4>, 4> per_solution{};
};

/// Solution r of the equation at rho, fixed by the expansion: the components
/// along solutions that do not grow faster than r are prescribed at s = 0,
/// the faster ones vanish at s = 1. Computed by multiple shooting with the
/// adaptive integrator on segments where |rho| times the length is at most 4.
/// Returns (phi, phi', phi'', phi''') at each sample point.
std::vector<Vec4> shooting_reference(cd rho, int r, const Params& p, const std::vector<double>& s,
                                     const IntegratorOptions& opts = {});

ExpansionError expansion_error(cd rho, const Params& p, const std::vector<double>& s,
                               const IntegratorOptions& opts = {});

}  // namespace pipenet

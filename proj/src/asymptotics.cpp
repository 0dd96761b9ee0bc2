#include "pipenet/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pipenet {

namespace {

constexpr cd I(0, 1);

double flow_sign(int r) { return r % 2 == 1 ? 1.0 : -1.0; }

void check_r(int r) {
  if (r < 1 || r > 4) throw std::invalid_argument("solution index r must be in 1..4");
}

// Unscaled transfer matrix of the equation over a segment of length L.
Mat4 transfer(const SpectralPoint& sp, const Params& p, double L, const IntegratorOptions& opts) {
  const double sigma = derivative_scale(sp);
  const Mat4 A = companion_matrix(sp, p, Equation::direct, sigma);
  Eigen::MatrixXcd Y = Mat4::Identity();
  double h = 0.0;
  integrate_linear(A, Y, 0.0, L, h, opts);
  Vec4 up(1, sigma, sigma * sigma, sigma * sigma * sigma);
  return up.asDiagonal() * Mat4(Y) * up.cwiseInverse().asDiagonal();
}

// Expansion matrix at s without the exponential factors:
// column q holds (omega_q rho)^m times the amplitude.
Mat4 expansion_directions(cd rho, double s, const Params& p) {
  Mat4 E;
  for (int q = 1; q <= 4; ++q)
    for (int m = 0; m < 4; ++m)
      E(m, q - 1) = std::pow(omega(q) * rho, m) * asymptotic_amplitude(rho, s, q, m, p);
  return E;
}

}  // namespace

cd omega(int r) {
  check_r(r);
  static const cd w[4] = {I, -1.0, -I, 1.0};
  return w[r - 1];
}

cd phase_term(int r, double s, const Params& p) {
  check_r(r);
  return -1.0 + std::exp(flow_sign(r) * I * p.gyro() * s / 2.0);
}

cd phase_term_derivative(int r, double s, const Params& p) {
  check_r(r);
  const cd k = flow_sign(r) * I * p.gyro() / 2.0;
  return k * std::exp(k * s);
}

cd first_correction(int r, double s, const Params& p) {
  check_r(r);
  const cd k = flow_sign(r) * I * p.gyro() / 2.0;
  return std::pow(-I, r) / 4.0 * p.asymptotic_shift() * s * std::exp(k * s);
}

cd asymptotic_amplitude(cd rho, double s, int r, int m, const Params& p) {
  const cd w = omega(r);
  return 1.0 + phase_term(r, s, p) +
         (w * first_correction(r, s, p) + static_cast<double>(m) * phase_term_derivative(r, s, p)) /
             (w * rho);
}

cd asymptotic_solution(cd rho, double s, int r, int m, const Params& p) {
  const cd w = omega(r);
  return std::pow(w * rho, m) * std::exp(w * rho * s) * asymptotic_amplitude(rho, s, r, m, p);
}

double asymptotic_tau(int n, Branch b) {
  return (std::abs(n) + (b == Branch::one ? 0.5 : 0.25)) * std::numbers::pi;
}

AsymptoticEigenvalue asymptotic_eigenvalue(int n, Branch b, const Params& p) {
  const double tau = asymptotic_tau(n, b);
  const double c = p.asymptotic_shift();
  AsymptoticEigenvalue out;
  out.kappa_zero = p.kappa == 0.0;
  const double m = b == Branch::one ? 1.0 : 2.0;
  const double re = out.kappa_zero ? 0.0 : -m / p.kappa;
  out.lambda = {re, tau * tau + c / 2.0};
  if (out.kappa_zero) {
    out.rho = tau + c / (4.0 * tau);
  } else {
    cd z = b == Branch::one ? (I / p.kappa + c / 2.0) / (2.0 * tau) : c / (4.0 * tau) + I / (p.kappa * tau);
    out.rho = tau + z;
  }
  if (n < 0) {
    out.lambda = std::conj(out.lambda);
    out.rho = I * std::conj(out.rho);
  }
  return out;
}

cd asymptotic_char_residual(cd rho, Branch b, const Params& p) {
  if (!(p.kappa > 0.0)) throw std::domain_error("asymptotic characteristic equation needs kappa > 0");
  const double c = p.asymptotic_shift();
  const cd cr = std::cos(rho), sr = std::sin(rho);
  if (b == Branch::one)
    return cr + c * (sr + cr) / (4.0 * rho) - I * (cr - sr) / (2.0 * p.kappa * rho);
  const double r2 = std::numbers::sqrt2;
  return std::cos(rho + std::numbers::pi / 4) + c * r2 * cr / (4.0 * rho) +
         2.0 * I * r2 * sr / (2.0 * p.kappa * rho);
}

std::vector<Vec4> shooting_reference(cd rho, int r, const Params& p, const std::vector<double>& s,
                                     const IntegratorOptions& opts) {
  check_r(r);
  require_valid(p);
  const SpectralPoint sp = SpectralPoint::from_rho(rho);
  const double sigma = derivative_scale(sp);
  const Vec4 up(1, sigma, sigma * sigma, sigma * sigma * sigma);

  std::vector<double> nodes;
  const int segments = std::max(1, static_cast<int>(std::ceil(std::abs(rho) / 4.0)));
  for (int j = 0; j <= segments; ++j) nodes.push_back(static_cast<double>(j) / segments);
  for (double x : s) {
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("shooting_reference: sample outside [0,1]");
    nodes.push_back(x);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end(), [](double a, double b) { return b - a < 1e-14; }),
              nodes.end());
  const std::size_t J = nodes.size() - 1;
  const Eigen::Index n = static_cast<Eigen::Index>(4 * (J + 1));

  // Unknowns are y_j = e^{-omega_r rho t_j} (phi, phi'/sigma, ...)(t_j), which
  // stay of unit size along the whole edge.
  const cd wr = omega(r) * rho;
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  for (std::size_t j = 0; j < J; ++j) {
    const double L = nodes[j + 1] - nodes[j];
    Mat4 T = std::exp(-wr * L) * up.cwiseInverse().asDiagonal() * transfer(sp, p, L, opts) *
             up.asDiagonal();
    auto row = static_cast<Eigen::Index>(4 * j);
    M.block(row, row, 4, 4) = -T;
    M.block(row, row + 4, 4, 4) = Mat4::Identity();
  }
  const double gr = wr.real();
  const double tie = 1e-12 * std::abs(rho);
  Mat4 C0 = (up.cwiseInverse().asDiagonal() * expansion_directions(rho, 0.0, p)).inverse();
  Mat4 C1 = (up.cwiseInverse().asDiagonal() * expansion_directions(rho, 1.0, p)).inverse();
  Eigen::Index row = static_cast<Eigen::Index>(4 * J);
  for (int q = 1; q <= 4; ++q) {
    const bool faster = (omega(q) * rho).real() > gr + tie;
    if (faster) {
      M.block(row, n - 4, 1, 4) = C1.row(q - 1);
    } else {
      M.block(row, 0, 1, 4) = C0.row(q - 1);
      rhs(row) = q == r ? 1.0 : 0.0;
    }
    ++row;
  }
  Eigen::VectorXcd y = M.fullPivLu().solve(rhs);

  std::vector<Vec4> out;
  for (double x : s) {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), x - 1e-14);
    auto j = static_cast<Eigen::Index>(it - nodes.begin());
    out.push_back(std::exp(wr * nodes[static_cast<std::size_t>(j)]) * (up.asDiagonal() * y.segment(4 * j, 4)));
  }
  return out;
}

ExpansionError expansion_error(cd rho, const Params& p, const std::vector<double>& s,
                               const IntegratorOptions& opts) {
  ExpansionError err;
  for (int r = 1; r <= 4; ++r) {
    auto ref = shooting_reference(rho, r, p, s, opts);
    const cd w = omega(r);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const cd base = std::exp(w * rho * s[i]);
      for (int m = 0; m < 4; ++m) {
        const cd exact = ref[i](m) / (std::pow(w * rho, m) * base);
        const double e = std::abs(exact - asymptotic_amplitude(rho, s[i], r, m, p));
        err.per_solution[r - 1][m] = std::max(err.per_solution[r - 1][m], e);
        err.max_rel = std::max(err.max_rel, e);
      }
    }
  }
  return err;
}

}  // namespace pipenet

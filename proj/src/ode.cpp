#include "pipenet/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pipenet {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

[[noreturn]] void underflow(double s, double h, const Mat4& A) {
  std::ostringstream msg;
  msg << "integrator step size underflow at s=" << s << " (h=" << h << ", |A|=" << A.norm()
      << "); |rho| is too large for the requested tolerance, use the asymptotic formulas";
  throw IntegrationError(msg.str());
}

// Orthonormalise the two columns in place; returns R with positive real diagonal.
Eigen::Matrix2cd gram_schmidt(Eigen::Ref<Eigen::MatrixXcd> Y) {
  Eigen::Matrix2cd R = Eigen::Matrix2cd::Zero();
  double n0 = Y.col(0).norm();
  if (!(n0 > 0) || !std::isfinite(n0)) throw IntegrationError("subspace shooting: degenerate basis");
  Y.col(0) /= n0;
  R(0, 0) = n0;
  cd proj = Y.col(0).dot(Y.col(1));
  Y.col(1) -= proj * Y.col(0);
  // second pass keeps orthogonality at roundoff level
  cd proj2 = Y.col(0).dot(Y.col(1));
  Y.col(1) -= proj2 * Y.col(0);
  double n1 = Y.col(1).norm();
  if (!(n1 > 0) || !std::isfinite(n1)) throw IntegrationError("subspace shooting: degenerate basis");
  Y.col(1) /= n1;
  R(0, 1) = proj + proj2;
  R(1, 1) = n1;
  return R;
}

Vec4 unscale_vector(double sigma) {
  return Vec4(1.0, sigma, sigma * sigma, sigma * sigma * sigma);
}

}  // namespace

SpectralPoint SpectralPoint::from_lambda(cd lambda) {
  // principal root: for Re lambda <= 0 <= Im lambda this is the sector arg in [0, pi/4]
  if (lambda.imag() >= 0) return {lambda, std::sqrt(cd(0, -1) * lambda)};
  return {lambda, cd(0, 1) * std::conj(std::sqrt(cd(0, -1) * std::conj(lambda)))};
}

SpectralPoint SpectralPoint::from_rho(cd rho) { return {cd(0, 1) * rho * rho, rho}; }

double derivative_scale(const SpectralPoint& sp) { return std::max(1.0, std::abs(sp.rho)); }

Mat4 companion_matrix(const SpectralPoint& sp, const Params& p, Equation eq, double sigma) {
  const cd lam = sp.lambda;
  const double sign = eq == Equation::direct ? -1.0 : 1.0;
  Mat4 A = Mat4::Zero();
  A(0, 1) = sigma;
  A(1, 2) = sigma;
  A(2, 3) = sigma;
  A(3, 0) = -lam * lam / (sigma * sigma * sigma);
  A(3, 1) = sign * 2.0 * lam * p.gyro() / (sigma * sigma);
  A(3, 2) = p.tension() / sigma;
  return A;
}

std::size_t integrate_linear(const Mat4& A, Eigen::MatrixXcd& Y, double s0, double s1, double& h,
                             const IntegratorOptions& opts, const StepHook& after_step) {
  const Eigen::Index cols = Y.cols();
  Eigen::MatrixXcd k1(4, cols), k2(4, cols), k3(4, cols), k4(4, cols), k5(4, cols), k6(4, cols),
      k7(4, cols), y5(4, cols), err(4, cols), tmp(4, cols);
  double s = s0;
  std::size_t accepted = 0, attempts = 0;
  if (!(h > 0)) h = 0.1 / std::max(1.0, A.cwiseAbs().maxCoeff());
  k1.noalias() = A * Y;
  while (s < s1) {
    if (++attempts > opts.max_steps) underflow(s, h, A);
    bool last = false;
    double step = h;
    if (s + step >= s1 - 1e-15) {
      step = s1 - s;
      last = true;
    }
    tmp = Y + step * a21 * k1;
    k2.noalias() = A * tmp;
    tmp = Y + step * (a31 * k1 + a32 * k2);
    k3.noalias() = A * tmp;
    tmp = Y + step * (a41 * k1 + a42 * k2 + a43 * k3);
    k4.noalias() = A * tmp;
    tmp = Y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    k5.noalias() = A * tmp;
    tmp = Y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    k6.noalias() = A * tmp;
    y5 = Y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    k7.noalias() = A * y5;
    err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double en = 0.0;
    for (Eigen::Index c = 0; c < cols; ++c) {
      // tolerance relative to the column size so that small components of a
      // large solution are not over-resolved
      double ref = std::max(Y.col(c).cwiseAbs().maxCoeff(), y5.col(c).cwiseAbs().maxCoeff());
      double tol = opts.atol + opts.rtol * ref;
      for (Eigen::Index m = 0; m < 4; ++m) en = std::max(en, std::abs(err(m, c)) / tol);
    }
    if (!std::isfinite(en)) underflow(s, step, A);
    if (en <= 1.0) {
      s = last ? s1 : s + step;
      Y = y5;
      ++accepted;
      if (after_step) {
        after_step(Y);
        k1.noalias() = A * Y;
      } else {
        k1 = k7;
      }
      double fac = en > 0 ? 0.9 * std::pow(en, -0.2) : 5.0;
      if (!last) h = step * std::clamp(fac, 0.2, 5.0);
    } else {
      h = step * std::max(0.2, 0.9 * std::pow(en, -0.2));
      if (h < opts.min_step) underflow(s, h, A);
    }
  }
  return accepted;
}

FundamentalData integrate_fundamental_system(const SpectralPoint& sp, const Params& p, Equation eq,
                                             const EdgeGrid* grid, const IntegratorOptions& opts) {
  require_valid(p);
  const double sigma = derivative_scale(sp);
  const Mat4 A = companion_matrix(sp, p, eq, sigma);
  const Vec4 unscale = unscale_vector(sigma);

  std::vector<double> stops = grid ? grid->nodes() : std::vector<double>{0.0, 1.0};
  Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(4, 4);
  for (int r = 0; r < 4; ++r) Y(r, r) = 1.0 / unscale(r);

  std::vector<Mat4> raw;
  raw.reserve(stops.size());
  auto record = [&] { raw.push_back(unscale.asDiagonal() * Y); };
  std::array<double, 4> peak{};
  auto update_peak = [&](const Eigen::MatrixXcd& y) {
    for (int r = 0; r < 4; ++r)
      for (int m = 0; m < 4; ++m)
        peak[r] = std::max(peak[r], std::abs(y(m, r) * unscale(m)));
  };
  record();
  update_peak(Y);
  double h = 0.0;
  for (std::size_t j = 0; j + 1 < stops.size(); ++j) {
    integrate_linear(A, Y, stops[j], stops[j + 1], h, opts, [&](Eigen::MatrixXcd& y) { update_peak(y); });
    record();
  }

  FundamentalData fd;
  fd.point = sp;
  fd.scale = peak;
  Eigen::Vector4cd inv;
  for (int r = 0; r < 4; ++r) inv(r) = 1.0 / peak[r];
  for (auto& M : raw) M = M * inv.asDiagonal();
  fd.at_zero = raw.front();
  fd.at_one = raw.back();
  if (grid) {
    fd.grid = *grid;
    fd.trajectory = std::move(raw);
  }
  return fd;
}

std::array<cvec, 4> sample_solution(const std::array<cd, 4>& coeffs, const FundamentalData& fd) {
  if (!fd.grid) throw std::invalid_argument("sample_solution: trajectories were not stored");
  Vec4 a;
  for (int r = 0; r < 4; ++r) a(r) = coeffs[r] * fd.scale[r];
  std::array<cvec, 4> out;
  for (auto& v : out) v.resize(fd.trajectory.size());
  for (std::size_t i = 0; i < fd.trajectory.size(); ++i) {
    Vec4 y = fd.trajectory[i] * a;
    for (int m = 0; m < 4; ++m) out[m][i] = y(m);
  }
  return out;
}

Mat42 SubspaceShot::unscaled(std::size_t j) const {
  return unscale_vector(sigma).asDiagonal() * q[j];
}

SubspaceShot shoot_subspace(const SpectralPoint& sp, const Params& p, Equation eq, const Mat42& start,
                            const EdgeGrid* grid, const IntegratorOptions& opts) {
  require_valid(p);
  SubspaceShot shot;
  shot.point = sp;
  shot.sigma = derivative_scale(sp);
  const Mat4 A = companion_matrix(sp, p, eq, shot.sigma);
  const Vec4 unscale = unscale_vector(shot.sigma);
  shot.nodes = grid ? grid->nodes() : std::vector<double>{0.0, 1.0};

  Eigen::MatrixXcd Y = unscale.cwiseInverse().asDiagonal() * start;
  shot.r_start = gram_schmidt(Y);
  shot.log_scale = std::log(shot.r_start(0, 0).real() * shot.r_start(1, 1).real());
  shot.q.push_back(Y);

  double h = 0.0;
  for (std::size_t j = 0; j + 1 < shot.nodes.size(); ++j) {
    Eigen::Matrix2cd Racc = Eigen::Matrix2cd::Identity();
    shot.steps += integrate_linear(A, Y, shot.nodes[j], shot.nodes[j + 1], h, opts,
                                   [&](Eigen::MatrixXcd& y) { Racc = gram_schmidt(y) * Racc; });
    shot.log_scale += std::log(Racc(0, 0).real()) + std::log(Racc(1, 1).real());
    shot.r.push_back(Racc);
    shot.q.push_back(Y);
  }
  return shot;
}

std::array<cvec, 4> sample_subspace(const SubspaceShot& shot, const Eigen::Vector2cd& d_end) {
  const std::size_t n = shot.q.size();
  std::array<cvec, 4> out;
  for (auto& v : out) v.resize(n);
  Eigen::Vector2cd d = d_end;
  for (std::size_t j = n; j-- > 0;) {
    Vec4 y = shot.unscaled(j) * d;
    for (int m = 0; m < 4; ++m) out[m][j] = y(m);
    if (j > 0) d = shot.r[j - 1].triangularView<Eigen::Upper>().solve(d);
  }
  return out;
}

}  // namespace pipenet

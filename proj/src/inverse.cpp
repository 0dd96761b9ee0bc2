#include "pipenet/inverse.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "pipenet/numerics.hpp"

namespace pipenet {

namespace {

using numerics::cumulative_integral_from_right;

struct EdgeParticular {
  cvec w;
  cd w0, dw0, d2w0, d3w0;
};

// Solution of w'''' - a w'' = -g with w, w', w'', w''' zero at s = 1.
// With z = w'' - a w:  z'' = -g  and  w'' - a w = z.
EdgeParticular particular(const cvec& g, const EdgeGrid& grid, double q) {
  const std::size_t n = grid.size();
  const double h = grid.spacing(), a = q * q;
  cvec rg(n);
  for (std::size_t i = 0; i < n; ++i) rg[i] = grid.node(i) * g[i];
  auto int_g = cumulative_integral_from_right<cd>(g, h);
  auto int_rg = cumulative_integral_from_right<cd>(rg, h);
  cvec z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = -(int_rg[i] - grid.node(i) * int_g[i]);

  // w(s) = (1/q) int_s^1 sinh(q (r - s)) z(r) dr, split into bounded exponentials
  cvec zp(n), zm(n);
  for (std::size_t i = 0; i < n; ++i) {
    zp[i] = std::exp(q * (grid.node(i) - 1.0)) * z[i];
    zm[i] = std::exp(-q * grid.node(i)) * z[i];
  }
  auto ip = cumulative_integral_from_right<cd>(zp, h);
  auto im = cumulative_integral_from_right<cd>(zm, h);
  EdgeParticular out;
  out.w.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = grid.node(i);
    out.w[i] = (std::exp(q * (1.0 - s)) * ip[i] - std::exp(q * s) * im[i]) / (2.0 * q);
  }
  out.w0 = out.w[0];
  // w'(s) = -(1/2) [e^{q(1-s)} ip + e^{qs} im]
  out.dw0 = -0.5 * (std::exp(q) * ip[0] + im[0]);
  out.d2w0 = z[0] + a * out.w0;
  out.d3w0 = int_g[0] + a * out.dw0;
  return out;
}

struct Coefficients {
  std::array<cd, kEdges> linear, hyperbolic;
};

// Homogeneous coefficients from the vertex conditions. moment_rhs[k] is the
// required value of w_k''(0) - alpha w_k'(0), force_rhs the required value of
// sum_k [w_k''' - a w_k'](0); vertex_offset[k] the particular value at 0.
Coefficients vertex_solve(const std::array<cd, kEdges>& moment_rhs, cd force_rhs,
                          const std::array<cd, kEdges>& vertex_offset, const Params& p) {
  const double a = p.tension(), q = std::sqrt(a), al = p.alpha, th = std::tanh(q);
  // profile values at s = 0: (1 - s) -> (1, -1, 0, 0); sinh(q(1-s))/cosh q -> (th, -q, a th, -q a)
  Eigen::Matrix<cd, 6, 6> M = Eigen::Matrix<cd, 6, 6>::Zero();
  Eigen::Matrix<cd, 6, 1> rhs;
  for (int k = 0; k < kEdges; ++k) {
    M(k, 2 * k) = al;
    M(k, 2 * k + 1) = a * th + al * q;
    rhs(k) = moment_rhs[static_cast<std::size_t>(k)];
    M(3, 2 * k) = a;  // the sinh profile carries no shear
  }
  rhs(3) = force_rhs;
  for (int r = 0; r < 2; ++r) {
    M(4 + r, 2 * r) = 1.0;
    M(4 + r, 2 * r + 1) = th;
    M(4 + r, 2 * r + 2) = -1.0;
    M(4 + r, 2 * r + 3) = -th;
    rhs(4 + r) = vertex_offset[static_cast<std::size_t>(r + 1)] - vertex_offset[static_cast<std::size_t>(r)];
  }
  Eigen::FullPivLU<Eigen::Matrix<cd, 6, 6>> lu(M);
  if (!lu.isInvertible()) throw std::logic_error("apply_inverse: singular vertex system");
  Eigen::Matrix<cd, 6, 1> c = lu.solve(rhs);
  Coefficients out;
  for (std::size_t k = 0; k < kEdges; ++k) {
    out.linear[k] = c(static_cast<Eigen::Index>(2 * k));
    out.hyperbolic[k] = c(static_cast<Eigen::Index>(2 * k + 1));
  }
  return out;
}

cd slope_at_zero(const cvec& f, double h) {
  return numerics::DerivativeStencil(f.size(), 1).apply_at<cd>(f, h, 0);
}

NetworkState solve(const NetworkState& y, const Params& p, double kappa, InverseWork* work) {
  require_valid(p);
  const EdgeGrid& grid = y.grid();
  const std::size_t n = grid.size();
  const double h = grid.spacing(), a = p.tension(), q = std::sqrt(a), be = p.gyro();
  auto profiles = feedback_profiles(grid, p);

  std::array<EdgeParticular, kEdges> part;
  std::array<cd, kEdges> moment, offset;
  cd force_rhs{};
  for (int k = 0; k < kEdges; ++k) {
    const auto& e = y.edge(k);
    auto dwt = numerics::differentiate<cd>(e.w, h, 1);
    cvec g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = e.v[i] + 2.0 * be * dwt[i];
    auto& pk = part[static_cast<std::size_t>(k)];
    pk = particular(g, grid, q);
    moment[static_cast<std::size_t>(k)] = kappa * dwt[0] - (pk.d2w0 - p.alpha * pk.dw0);
    offset[static_cast<std::size_t>(k)] = pk.w0;
    force_rhs -= be * e.w[0] + (pk.d3w0 - a * pk.dw0);
  }
  auto c = vertex_solve(moment, force_rhs, offset, p);

  std::array<EdgeField, kEdges> out;
  for (std::size_t k = 0; k < kEdges; ++k) {
    out[k].w.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      out[k].w[i] = part[k].w[i] + c.linear[k] * profiles[0][i] + c.hyperbolic[k] * profiles[1][i];
    out[k].v = y.edges()[k].w;
  }
  if (work) {
    const double th = std::tanh(q);
    work->linear = c.linear;
    work->hyperbolic = c.hyperbolic;
    for (std::size_t k = 0; k < kEdges; ++k) {
      cd dw = part[k].dw0 - c.linear[k] - q * c.hyperbolic[k];
      cd d3w = part[k].d3w0 - q * a * c.hyperbolic[k];
      work->force[k] = d3w - a * dw + be * y.edges()[k].w[0];
    }
    work->vertex = part[0].w0 + c.linear[0] + th * c.hyperbolic[0];
  }
  return NetworkState(grid, std::move(out));
}

}  // namespace

std::array<cvec, 2> feedback_profiles(const EdgeGrid& grid, const Params& p) {
  const double q = std::sqrt(p.tension());
  std::array<cvec, 2> out;
  for (auto& v : out) v.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = grid.node(i);
    out[0][i] = 1.0 - s;
    // sinh(q(1-s))/cosh(q) without overflow for large q
    out[1][i] = (std::exp(-q * s) - std::exp(-q * (2.0 - s))) / (1.0 + std::exp(-2.0 * q));
  }
  return out;
}

NetworkState apply_inverse(const NetworkState& y, const Params& p, InverseWork* work) {
  return solve(y, p, p.kappa, work);
}

InverseSplit split_inverse(const NetworkState& y, const Params& p) {
  require_valid(p);
  NetworkState skew = solve(y, p, 0.0, nullptr);
  // the kappa-dependent part only enters through the moment data w~_k'(0)
  const EdgeGrid& grid = y.grid();
  std::array<cd, kEdges> moment, offset{};
  for (int k = 0; k < kEdges; ++k) moment[static_cast<std::size_t>(k)] = slope_at_zero(y.edge(k).w, grid.spacing());
  auto c = vertex_solve(moment, 0.0, offset, p);
  auto profiles = feedback_profiles(grid, p);
  std::array<EdgeField, kEdges> out;
  for (std::size_t k = 0; k < kEdges; ++k) {
    out[k].w.resize(grid.size());
    out[k].v.assign(grid.size(), cd{});
    for (std::size_t i = 0; i < grid.size(); ++i)
      out[k].w[i] = c.linear[k] * profiles[0][i] + c.hyperbolic[k] * profiles[1][i];
  }
  return {std::move(skew), NetworkState(grid, std::move(out))};
}

NetworkState apply_generator(const NetworkState& x, const Params& p) {
  const EdgeGrid& grid = x.grid();
  const double h = grid.spacing(), a = p.tension(), be = p.gyro();
  numerics::DerivativeStencil d1(grid.size(), 1), d2(grid.size(), 2), d4(grid.size(), 4);
  std::array<EdgeField, kEdges> out;
  for (int k = 0; k < kEdges; ++k) {
    const auto& e = x.edge(k);
    auto w2 = d2.apply<cd>(e.w, h), w4 = d4.apply<cd>(e.w, h), v1 = d1.apply<cd>(e.v, h);
    auto& o = out[static_cast<std::size_t>(k)];
    o.w = e.v;
    o.v.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) o.v[i] = -w4[i] + a * w2[i] - 2.0 * be * v1[i];
  }
  return NetworkState(grid, std::move(out));
}

double domain_residual(const NetworkState& x, const Params& p) {
  const EdgeGrid& grid = x.grid();
  const std::size_t n = grid.size();
  const double h = grid.spacing(), a = p.tension(), be = p.gyro();
  numerics::DerivativeStencil d1(n, 1), d2(n, 2), d3(n, 3);
  double worst = 0.0;
  cd force{};
  double force_scale = 0.0;
  for (int k = 0; k < kEdges; ++k) {
    const auto& e = x.edge(k);
    cd w1 = d1.apply_at<cd>(e.w, h, 0), w2 = d2.apply_at<cd>(e.w, h, 0), w3 = d3.apply_at<cd>(e.w, h, 0);
    cd w2end = d2.apply_at<cd>(e.w, h, n - 1), v1 = d1.apply_at<cd>(e.v, h, 0);
    double ms = std::abs(w2) + p.alpha * std::abs(w1) + p.kappa * std::abs(v1) + 1e-300;
    worst = std::max(worst, std::abs(w2 - p.alpha * w1 - p.kappa * v1) / ms);
    double bend = 0.0;
    for (std::size_t i = 0; i < n; ++i) bend = std::max(bend, std::abs(d2.apply_at<cd>(e.w, h, i)));
    worst = std::max(worst, std::abs(w2end) / (bend + 1e-300));
    force += w3 - a * w1 + be * e.v[0];
    force_scale += std::abs(w3) + a * std::abs(w1) + be * std::abs(e.v[0]);
  }
  return std::max(worst, std::abs(force) / (force_scale + 1e-300));
}

double round_trip_error(const NetworkState& y, const Params& p) {
  NetworkState back = apply_generator(apply_inverse(y, p), p);
  return std::sqrt(energy_norm_sq(back.plus(y, -1.0), p) / energy_norm_sq(y, p));
}

Eigen::VectorXd feedback_singular_values(const Params& p, const EdgeGrid& grid, int samples,
                                         std::mt19937_64& rng) {
  if (samples < 1) throw std::invalid_argument("feedback_singular_values: samples must be positive");
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXcd cols(6 * n, samples);
  for (int j = 0; j < samples; ++j) {
    NetworkState f = split_inverse(random_smooth_state(grid, rng), p).feedback_part;
    for (int k = 0; k < kEdges; ++k)
      for (Eigen::Index i = 0; i < n; ++i) {
        cols(2 * k * n + i, j) = f.edge(k).w[static_cast<std::size_t>(i)];
        cols((2 * k + 1) * n + i, j) = f.edge(k).v[static_cast<std::size_t>(i)];
      }
  }
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(cols).singularValues();
}

}  // namespace pipenet

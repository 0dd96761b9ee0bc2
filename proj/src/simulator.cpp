#include "pipenet/simulator.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "pipenet/numerics.hpp"

namespace pipenet {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// five-point Gauss-Legendre on [0, 1]
constexpr std::array<double, 5> kGaussX{0.046910077030668, 0.230765344947158, 0.5, 0.769234655052842,
                                        0.953089922969332};
constexpr std::array<double, 5> kGaussW{0.118463442528095, 0.239314335249683, 0.284444444444444,
                                        0.239314335249683, 0.118463442528095};

// Hermite shape functions on an element of length h at local xi, derivative order d in s.
std::array<double, 4> shape(double xi, double h, int d) {
  switch (d) {
    case 0:
      return {1 - 3 * xi * xi + 2 * xi * xi * xi, h * (xi - 2 * xi * xi + xi * xi * xi), 3 * xi * xi - 2 * xi * xi * xi,
              h * (-xi * xi + xi * xi * xi)};
    case 1:
      return {(-6 * xi + 6 * xi * xi) / h, 1 - 4 * xi + 3 * xi * xi, (6 * xi - 6 * xi * xi) / h, -2 * xi + 3 * xi * xi};
    case 2:
      return {(-6 + 12 * xi) / (h * h), (-4 + 6 * xi) / h, (6 - 12 * xi) / (h * h), (-2 + 6 * xi) / h};
    default:
      return {12 / (h * h * h), 6 / (h * h), -12 / (h * h * h), 6 / (h * h)};
  }
}

std::array<int, 4> element_dofs(const DofMap& m, int k, int e) {
  const auto& v = m.value[static_cast<std::size_t>(k)];
  const auto& s = m.slope[static_cast<std::size_t>(k)];
  return {v[static_cast<std::size_t>(e)], s[static_cast<std::size_t>(e)], v[static_cast<std::size_t>(e + 1)],
          s[static_cast<std::size_t>(e + 1)]};
}

DofMap make_dofs(int n) {
  DofMap m;
  m.n_elems = n;
  int next = 1;
  for (int k = 0; k < kEdges; ++k) {
    auto& v = m.value[static_cast<std::size_t>(k)];
    auto& s = m.slope[static_cast<std::size_t>(k)];
    v.assign(static_cast<std::size_t>(n + 1), -1);
    s.assign(static_cast<std::size_t>(n + 1), -1);
    v[0] = 0;
    for (int j = 0; j <= n; ++j) {
      if (j > 0 && j < n) v[static_cast<std::size_t>(j)] = next++;
      s[static_cast<std::size_t>(j)] = next++;
    }
  }
  m.size = next;
  return m;
}

// Value of a grid array at s by local quintic interpolation.
cd interpolate(const cvec& f, const EdgeGrid& grid, double s) {
  const std::size_t n = grid.size();
  const double h = grid.spacing();
  auto centre = static_cast<std::ptrdiff_t>(std::floor(s / h)) - 2;
  std::size_t first = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(centre, 0, static_cast<std::ptrdiff_t>(n) - 6));
  cd acc{};
  for (std::size_t i = first; i < first + 6; ++i) {
    double l = 1.0;
    for (std::size_t j = first; j < first + 6; ++j)
      if (j != i) l *= (s - grid.node(j)) / (grid.node(i) - grid.node(j));
    acc += l * f[i];
  }
  return acc;
}

// Real factorisation applied to a complex right-hand side.
template <class Solver>
Eigen::VectorXcd solve_complex(const Solver& f, const Eigen::VectorXcd& b) {
  Eigen::VectorXd re = f.solve(Eigen::VectorXd(b.real())), im = f.solve(Eigen::VectorXd(b.imag()));
  Eigen::VectorXcd x(b.size());
  x.real() = re;
  x.imag() = im;
  return x;
}

Eigen::SparseMatrix<double> from_triplets(int n, const Triplets& t) {
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

SemiDiscreteSystem assemble(const Params& p, int n_elems) {
  require_valid(p);
  if (n_elems < 4) throw std::invalid_argument("assemble: need at least 4 elements per edge");
  SemiDiscreteSystem sys;
  sys.params = p;
  sys.dofs = make_dofs(n_elems);
  const double h = 1.0 / n_elems, a = p.tension(), be = p.gyro();

  std::array<std::array<double, 4>, 4> me{}, ke{}, ge{};
  for (std::size_t g = 0; g < kGaussX.size(); ++g) {
    auto n0 = shape(kGaussX[g], h, 0), n1 = shape(kGaussX[g], h, 1), n2 = shape(kGaussX[g], h, 2);
    const double wq = kGaussW[g] * h;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        me[i][j] += wq * n0[i] * n0[j];
        ke[i][j] += wq * (n2[i] * n2[j] + a * n1[i] * n1[j]);
        ge[i][j] += wq * 2.0 * be * n0[i] * n1[j];
      }
  }
  Triplets tm, tk, tg;
  for (int k = 0; k < kEdges; ++k) {
    for (int e = 0; e < n_elems; ++e) {
      auto d = element_dofs(sys.dofs, k, e);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          if (d[i] < 0 || d[j] < 0) continue;
          tm.emplace_back(d[i], d[j], me[i][j]);
          tk.emplace_back(d[i], d[j], ke[i][j]);
          tg.emplace_back(d[i], d[j], ge[i][j]);
        }
    }
    const int s0 = sys.dofs.slope[static_cast<std::size_t>(k)][0];
    tk.emplace_back(s0, s0, p.alpha);
    tg.emplace_back(s0, s0, p.kappa);
    tg.emplace_back(0, 0, be);
  }
  sys.mass = from_triplets(sys.dofs.size, tm);
  sys.stiffness = from_triplets(sys.dofs.size, tk);
  sys.coupling = from_triplets(sys.dofs.size, tg);
  return sys;
}

FemState project(const SemiDiscreteSystem& sys, const NetworkState& x) {
  const EdgeGrid& grid = x.grid();
  const int n = sys.dofs.n_elems;
  const double h = 1.0 / n, a = sys.params.tension();
  Eigen::VectorXcd bw = Eigen::VectorXcd::Zero(sys.dofs.size), bv = bw;
  for (int k = 0; k < kEdges; ++k) {
    const auto& f = x.edge(k);
    auto d1 = numerics::differentiate<cd>(f.w, grid.spacing(), 1);
    auto d2 = numerics::differentiate<cd>(f.w, grid.spacing(), 2);
    for (int e = 0; e < n; ++e) {
      auto d = element_dofs(sys.dofs, k, e);
      for (std::size_t g = 0; g < kGaussX.size(); ++g) {
        const double s = (e + kGaussX[g]) * h, wq = kGaussW[g] * h;
        auto n0 = shape(kGaussX[g], h, 0), n1 = shape(kGaussX[g], h, 1), n2 = shape(kGaussX[g], h, 2);
        cd w1 = interpolate(d1, grid, s), w2 = interpolate(d2, grid, s), v = interpolate(f.v, grid, s);
        for (int i = 0; i < 4; ++i) {
          if (d[i] < 0) continue;
          bw(d[i]) += wq * (w2 * n2[i] + a * w1 * n1[i]);
          bv(d[i]) += wq * v * n0[i];
        }
      }
    }
    bw(sys.dofs.slope[static_cast<std::size_t>(k)][0]) += sys.params.alpha * d1[0];
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> kf(sys.stiffness), mf(sys.mass);
  if (kf.info() != Eigen::Success || mf.info() != Eigen::Success)
    throw SimulationError("project: factorisation failed");
  FemState z;
  z.w = solve_complex(kf, bw);
  z.u = solve_complex(mf, bv);
  return z;
}

NetworkState to_network_state(const SemiDiscreteSystem& sys, const FemState& z, const EdgeGrid& grid) {
  const int n = sys.dofs.n_elems;
  const double h = 1.0 / n;
  std::array<EdgeField, kEdges> out;
  for (int k = 0; k < kEdges; ++k) {
    auto& o = out[static_cast<std::size_t>(k)];
    o.w.resize(grid.size());
    o.v.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double s = grid.node(i);
      int e = std::min(n - 1, static_cast<int>(std::floor(s / h)));
      auto d = element_dofs(sys.dofs, k, e);
      auto n0 = shape(s / h - e, h, 0);
      cd w{}, v{};
      for (int j = 0; j < 4; ++j) {
        if (d[j] < 0) continue;
        w += n0[j] * z.w(d[j]);
        v += n0[j] * z.u(d[j]);
      }
      o.w[i] = w;
      o.v[i] = v;
    }
  }
  return NetworkState(grid, std::move(out));
}

double fem_energy(const SemiDiscreteSystem& sys, const FemState& z) {
  return (z.w.dot(sys.stiffness * z.w) + z.u.dot(sys.mass * z.u)).real();
}

std::array<cd, kEdges> vertex_slope_rates(const SemiDiscreteSystem& sys, const FemState& z) {
  std::array<cd, kEdges> out;
  for (std::size_t k = 0; k < kEdges; ++k) out[k] = z.u(sys.dofs.slope[k][0]);
  return out;
}

Trajectory simulate(const SemiDiscreteSystem& sys, const FemState& z0, double t_final, double dt,
                    const SimulateOptions& opts) {
  if (!(dt > 0.0) || !(t_final >= 0.0)) throw std::invalid_argument("simulate: need dt > 0 and t_final >= 0");
  const auto steps = static_cast<long>(std::llround(t_final / dt));
  using SpMat = Eigen::SparseMatrix<double>;
  Eigen::SparseLU<SpMat> lu;
  SpMat lhs, rhs_u;
  for (int attempt = 0; attempt < 2; ++attempt) {
    lhs = sys.mass + (0.5 * dt) * sys.coupling + (0.25 * dt * dt) * sys.stiffness;
    lhs.makeCompressed();
    lu.compute(lhs);
    if (lu.info() == Eigen::Success) break;
    if (attempt == 1) throw SimulationError("simulate: singular step matrix");
    dt *= 1.0 + 1e-7;
  }
  rhs_u = sys.mass - (0.5 * dt) * sys.coupling - (0.25 * dt * dt) * sys.stiffness;

  Trajectory tr;
  tr.dt = dt;
  tr.times.reserve(static_cast<std::size_t>(steps + 1));
  tr.energy.reserve(static_cast<std::size_t>(steps + 1));
  FemState z = opts.filter_overdamped ? remove_overdamped_modes(sys, z0) : z0;
  auto record = [&](long i) {
    tr.times.push_back(static_cast<double>(i) * dt);
    tr.energy.push_back(fem_energy(sys, z));
    tr.vertex_displacement.push_back(z.w(0));
    tr.boundary_obs.push_back(vertex_slope_rates(sys, z));
    if (opts.snapshot_stride > 0 && i % opts.snapshot_stride == 0) {
      tr.snapshots.push_back(z);
      tr.snapshot_times.push_back(static_cast<double>(i) * dt);
    }
  };
  record(0);
  for (long i = 1; i <= steps; ++i) {
    Eigen::VectorXcd b = rhs_u * z.u - dt * (sys.stiffness * z.w);
    Eigen::VectorXcd u1 = solve_complex(lu, b);
    z.w += (0.5 * dt) * (z.u + u1);
    z.u = std::move(u1);
    record(i);
  }
  return tr;
}

Trajectory simulate(const SemiDiscreteSystem& sys, const NetworkState& x0, double t_final, double dt,
                    const SimulateOptions& opts) {
  return simulate(sys, project(sys, x0), t_final, dt, opts);
}

namespace {

Eigen::MatrixXd first_order_matrix(const SemiDiscreteSystem& sys) {
  const int n = sys.dofs.size;
  Eigen::MatrixXd M(sys.mass), G(sys.coupling), K(sys.stiffness);
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) throw SimulationError("mass matrix not SPD");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  A.topRightCorner(n, n).setIdentity();
  A.bottomLeftCorner(n, n) = -llt.solve(K);
  A.bottomRightCorner(n, n) = -llt.solve(G);
  return A;
}

}  // namespace

FemState remove_overdamped_modes(const SemiDiscreteSystem& sys, const FemState& z, double* removed_energy) {
  if (removed_energy) *removed_energy = 0.0;
  if (!(sys.params.kappa > 0.0)) return z;  // skew coupling: no real modes
  const int n = sys.dofs.size;
  Eigen::EigenSolver<Eigen::MatrixXd> es(first_order_matrix(sys), true);
  const auto& ev = es.eigenvalues();
  double top_frequency = 0.0;
  for (int i = 0; i < ev.size(); ++i) top_frequency = std::max(top_frequency, std::abs(ev(i).imag()));
  std::vector<int> ringing;
  for (int i = 0; i < ev.size(); ++i)
    if (ev(i).imag() == 0.0 && -ev(i).real() > top_frequency) ringing.push_back(i);
  if (ringing.empty()) return z;
  Eigen::MatrixXcd V = es.eigenvectors();
  Eigen::VectorXcd x(2 * n);
  x << z.w, z.u;
  Eigen::VectorXcd c = V.partialPivLu().solve(x);
  Eigen::VectorXcd part = Eigen::VectorXcd::Zero(2 * n);
  for (int i : ringing) part += c(i) * V.col(i);
  FemState removed{part.head(n), part.tail(n)};
  if (removed_energy) *removed_energy = fem_energy(sys, removed);
  return {z.w - removed.w, z.u - removed.u};
}

std::vector<double> dissipation_residual(const Trajectory& traj, const Params& p) {
  std::vector<double> r;
  if (traj.energy.size() < 3) return r;
  r.reserve(traj.energy.size() - 2);
  for (std::size_t i = 1; i + 1 < traj.energy.size(); ++i) {
    double flux = 0.0;
    for (cd v : traj.boundary_obs[i]) flux += std::norm(v);
    r.push_back((traj.energy[i + 1] - traj.energy[i - 1]) / (2.0 * traj.dt) + 2.0 * p.kappa * flux);
  }
  return r;
}

std::vector<cd> pencil_eigenvalues(const SemiDiscreteSystem& sys) {
  const int n = sys.dofs.size;
  Eigen::MatrixXd A = first_order_matrix(sys);
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  std::vector<cd> ev(es.eigenvalues().data(), es.eigenvalues().data() + 2 * n);
  std::sort(ev.begin(), ev.end(), [](cd x, cd y) {
    if (std::abs(std::abs(x.imag()) - std::abs(y.imag())) > 1e-9 * (1 + std::abs(x)))
      return std::abs(x.imag()) < std::abs(y.imag());
    return x.real() > y.real();
  });
  return ev;
}

}  // namespace pipenet

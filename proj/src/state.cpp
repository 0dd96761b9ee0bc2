#include "pipenet/state.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pipenet/numerics.hpp"

namespace pipenet {

namespace {

void check_sizes(const EdgeGrid& grid, const std::array<EdgeField, kEdges>& e) {
  for (int k = 0; k < kEdges; ++k) {
    const auto& f = e[static_cast<std::size_t>(k)];
    if (f.w.size() != grid.size() || f.v.size() != grid.size())
      throw StateError("NetworkState: edge " + std::to_string(k + 1) +
                       " arrays do not match the grid size");
  }
}

double max_w(const std::array<EdgeField, kEdges>& e) {
  double m = 0.0;
  for (const auto& f : e)
    for (const auto& z : f.w) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace

NetworkState::NetworkState(EdgeGrid grid, std::array<EdgeField, kEdges> edges)
    : grid_(std::move(grid)), edges_(std::move(edges)) {
  check_sizes(grid_, edges_);
  const double tol = kConstraintTol * (1.0 + max_w(edges_));
  for (int k = 0; k < kEdges; ++k) {
    const auto& w = edges_[static_cast<std::size_t>(k)].w;
    if (std::abs(w.back()) > tol) {
      std::ostringstream msg;
      msg << "NetworkState: w_" << k + 1 << "(1) = " << std::abs(w.back())
          << " violates the pinned end";
      throw StateError(msg.str());
    }
    if (std::abs(w.front() - edges_[0].w.front()) > tol) {
      std::ostringstream msg;
      msg << "NetworkState: vertex continuity violated on edge " << k + 1 << " by "
          << std::abs(w.front() - edges_[0].w.front());
      throw StateError(msg.str());
    }
  }
}

NetworkState NetworkState::zero(const EdgeGrid& grid) {
  std::array<EdgeField, kEdges> e;
  for (auto& f : e) {
    f.w.assign(grid.size(), cd{});
    f.v.assign(grid.size(), cd{});
  }
  return NetworkState(grid, std::move(e));
}

NetworkState NetworkState::snapped(EdgeGrid grid, std::array<EdgeField, kEdges> edges,
                                   double* max_adjustment) {
  check_sizes(grid, edges);
  cd mean{};
  for (const auto& f : edges) mean += f.w.front();
  mean /= static_cast<double>(kEdges);
  double adj = 0.0;
  for (auto& f : edges) {
    adj = std::max({adj, std::abs(f.w.front() - mean), std::abs(f.w.back())});
    f.w.front() = mean;
    f.w.back() = 0.0;
  }
  if (max_adjustment) *max_adjustment = adj;
  return NetworkState(std::move(grid), std::move(edges));
}

double NetworkState::max_abs() const {
  double m = 0.0;
  for (const auto& f : edges_) {
    for (const auto& z : f.w) m = std::max(m, std::abs(z));
    for (const auto& z : f.v) m = std::max(m, std::abs(z));
  }
  return m;
}

NetworkState NetworkState::scaled(cd factor) const {
  auto e = edges_;
  for (auto& f : e) {
    for (auto& z : f.w) z *= factor;
    for (auto& z : f.v) z *= factor;
  }
  return NetworkState(grid_, std::move(e));
}

NetworkState NetworkState::conj() const {
  auto e = edges_;
  for (auto& f : e) {
    for (auto& z : f.w) z = std::conj(z);
    for (auto& z : f.v) z = std::conj(z);
  }
  return NetworkState(grid_, std::move(e));
}

NetworkState NetworkState::real_part() const {
  auto e = edges_;
  for (auto& f : e) {
    for (auto& z : f.w) z = z.real();
    for (auto& z : f.v) z = z.real();
  }
  return NetworkState(grid_, std::move(e));
}

NetworkState NetworkState::plus(const NetworkState& o, cd factor) const {
  if (!(grid_ == o.grid_)) throw StateError("NetworkState::plus: grid mismatch");
  auto e = edges_;
  for (int k = 0; k < kEdges; ++k) {
    auto& f = e[static_cast<std::size_t>(k)];
    const auto& g = o.edge(k);
    for (std::size_t i = 0; i < f.w.size(); ++i) {
      f.w[i] += factor * g.w[i];
      f.v[i] += factor * g.v[i];
    }
  }
  return NetworkState(grid_, std::move(e));
}

cd edge_stiffness_product(std::span<const cd> w, std::span<const cd> wt, double h,
                          const Params& p) {
  const std::size_t n = w.size();
  numerics::DerivativeStencil d1(n, 1), d2(n, 2);
  auto w1 = d1.apply(w, h), w2 = d2.apply(w, h);
  auto t1 = d1.apply(wt, h), t2 = d2.apply(wt, h);
  cvec a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = w2[i] * std::conj(t2[i]);
    b[i] = w1[i] * std::conj(t1[i]);
  }
  return numerics::simpson<cd>(a, h) + p.tension() * numerics::simpson<cd>(b, h) +
         p.alpha * w1[0] * std::conj(t1[0]);
}

cd energy_inner_product(const NetworkState& x, const NetworkState& y, const Params& p) {
  if (!(x.grid() == y.grid())) throw StateError("energy_inner_product: grid mismatch");
  const double h = x.grid().spacing();
  const std::size_t n = x.grid().size();
  cd total{};
  cvec prod(n);
  for (int k = 0; k < kEdges; ++k) {
    const auto& a = x.edge(k);
    const auto& b = y.edge(k);
    total += edge_stiffness_product(a.w, b.w, h, p);
    for (std::size_t i = 0; i < n; ++i) prod[i] = a.v[i] * std::conj(b.v[i]);
    total += numerics::simpson<cd>(prod, h);
  }
  return total;
}

double energy_norm_sq(const NetworkState& x, const Params& p) {
  return energy_inner_product(x, x, p).real();
}

NetworkState random_smooth_state(const EdgeGrid& grid, std::mt19937_64& rng, bool real_valued) {
  std::normal_distribution<double> nd;
  auto draw = [&] { return real_valued ? cd(nd(rng), 0.0) : cd(nd(rng), nd(rng)); };
  constexpr int kModes = 4;
  auto field = [&](cd vertex) {
    std::array<cd, kModes> sc, cc;
    for (int j = 0; j < kModes; ++j) {
      sc[static_cast<std::size_t>(j)] = draw() / double(j + 1);
      cc[static_cast<std::size_t>(j)] = draw() / double(j + 1);
    }
    cvec f(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double s = grid.node(i);
      cd acc{};
      for (int j = 0; j < kModes; ++j)
        acc += sc[static_cast<std::size_t>(j)] * std::sin((j + 1) * s * 2.0) +
               cc[static_cast<std::size_t>(j)] * std::cos((j + 1) * s * 2.0);
      f[i] = (1.0 - s) * (vertex + s * acc);
    }
    return f;
  };
  const cd wv = draw(), vv = draw();
  std::array<EdgeField, kEdges> e;
  for (auto& f : e) {
    f.w = field(wv);
    f.v = field(vv);
    f.w.back() = 0.0;
    f.v.back() = 0.0;
  }
  return NetworkState(grid, std::move(e));
}

}  // namespace pipenet

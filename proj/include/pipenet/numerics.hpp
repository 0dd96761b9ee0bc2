#pragma once

// Grid calculus on uniform grids: finite-difference derivatives, composite
// quadrature and cumulative integration.

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace pipenet::numerics {

/// Fornberg weights for the `order`-th derivative at x0 from the nodes `x`.
std::vector<double> fd_weights(double x0, std::span<const double> x, int order);

/// Stencil table for a fourth-order accurate derivative on a uniform grid of
/// `n` points: centred stencils in the interior, one-sided near both ends.
class DerivativeStencil {
 public:
  DerivativeStencil(std::size_t n, int order);

  template <class T>
  std::vector<T> apply(std::span<const T> f, double h) const;

  /// Derivative at node i only.
  template <class T>
  T apply_at(std::span<const T> f, double h, std::size_t i) const;

 private:
  struct Row {
    std::size_t first;
    std::vector<double> w;
  };
  std::size_t n_;
  int order_;
  std::vector<Row> rows_;
};

template <class T>
std::vector<T> differentiate(std::span<const T> f, double h, int order) {
  return DerivativeStencil(f.size(), order).apply(f, h);
}

/// Composite Simpson rule (3/8 rule on the last three panels when the
/// number of intervals is odd).
template <class T>
T simpson(std::span<const T> f, double h);

/// C[i] = integral of f from node 0 to node i. Each interval uses the
/// integral of the quintic through six neighbouring nodes, so the error is
/// smooth in i (needed when the result is differentiated again).
template <class T>
std::vector<T> cumulative_integral(std::span<const T> f, double h);

/// R[i] = integral of f from node i to the last node.
template <class T>
std::vector<T> cumulative_integral_from_right(std::span<const T> f, double h) {
  auto c = cumulative_integral(f, h);
  T total = c.back();
  for (auto& v : c) v = total - v;
  return c;
}

namespace detail {
/// Integration weights of the quintic Lagrange basis on nodes 0..5 over [p, p+1].
const std::array<std::array<double, 6>, 5>& quintic_interval_weights();
}  // namespace detail

// ---------------------------------------------------------------------------

template <class T>
std::vector<T> DerivativeStencil::apply(std::span<const T> f, double h) const {
  if (f.size() != n_) throw std::invalid_argument("DerivativeStencil: size mismatch");
  std::vector<T> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = apply_at(f, h, i);
  return out;
}

template <class T>
T DerivativeStencil::apply_at(std::span<const T> f, double h, std::size_t i) const {
  const Row& r = rows_[i];
  T acc{};
  for (std::size_t j = 0; j < r.w.size(); ++j) acc += r.w[j] * f[r.first + j];
  double scale = 1.0;
  for (int k = 0; k < order_; ++k) scale /= h;
  return acc * scale;
}

template <class T>
T simpson(std::span<const T> f, double h) {
  const std::size_t n = f.size();
  if (n < 4) throw std::invalid_argument("simpson: need at least 4 nodes");
  std::size_t intervals = n - 1;
  std::size_t end = intervals % 2 == 0 ? intervals : intervals - 3;
  T acc{};
  for (std::size_t i = 0; i + 2 <= end; i += 2) acc += f[i] + 4.0 * f[i + 1] + f[i + 2];
  acc *= h / 3.0;
  if (end != intervals) {
    acc += (3.0 * h / 8.0) * (f[end] + 3.0 * f[end + 1] + 3.0 * f[end + 2] + f[end + 3]);
  }
  return acc;
}

template <class T>
std::vector<T> cumulative_integral(std::span<const T> f, double h) {
  const std::size_t n = f.size();
  if (n < 6) throw std::invalid_argument("cumulative_integral: need at least 6 nodes");
  const auto& W = detail::quintic_interval_weights();
  std::vector<T> c(n);
  c[0] = T{};
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t first = i >= 2 ? i - 2 : 0;
    if (first + 6 > n) first = n - 6;
    const auto& w = W[i - first];
    T seg{};
    for (std::size_t m = 0; m < 6; ++m) seg += w[m] * f[first + m];
    c[i + 1] = c[i] + h * seg;
  }
  return c;
}

}  // namespace pipenet::numerics

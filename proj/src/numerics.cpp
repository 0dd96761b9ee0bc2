#include "pipenet/numerics.hpp"

#include <cmath>

namespace pipenet::numerics {

std::vector<double> fd_weights(double x0, std::span<const double> x, int order) {
  // Fornberg (1988), Math. Comp. 51:699.
  const int n = static_cast<int>(x.size()) - 1;
  const int m = order;
  std::vector<std::vector<std::vector<double>>> d(
      m + 1, std::vector<std::vector<double>>(n + 1, std::vector<double>(n + 1, 0.0)));
  d[0][0][0] = 1.0;
  double c1 = 1.0;
  for (int i = 1; i <= n; ++i) {
    double c2 = 1.0;
    for (int j = 0; j < i; ++j) {
      double c3 = x[i] - x[j];
      c2 *= c3;
      for (int k = 0; k <= std::min(i, m); ++k) {
        double prev = k > 0 ? d[k - 1][i - 1][j] : 0.0;
        d[k][i][j] = ((x[i] - x0) * d[k][i - 1][j] - k * prev) / c3;
      }
    }
    for (int k = 0; k <= std::min(i, m); ++k) {
      double prev = k > 0 ? d[k - 1][i - 1][i - 1] : 0.0;
      d[k][i][i] = c1 / c2 * (k * prev - (x[i - 1] - x0) * d[k][i - 1][i - 1]);
    }
    c1 = c2;
  }
  return d[m][n];
}

DerivativeStencil::DerivativeStencil(std::size_t n, int order) : n_(n), order_(order) {
  if (order < 1 || order > 4) throw std::invalid_argument("DerivativeStencil: order must be 1..4");
  const std::size_t central = order <= 2 ? 5 : 7;
  const std::size_t one_sided = static_cast<std::size_t>(order) + 4;
  if (n < one_sided) throw std::invalid_argument("DerivativeStencil: grid too small");
  const std::size_t half = central / 2;
  rows_.resize(n);
  std::vector<double> xs;
  for (std::size_t i = 0; i < n; ++i) {
    Row r;
    std::size_t width;
    if (i >= half && i + half < n) {
      r.first = i - half;
      width = central;
    } else {
      width = one_sided;
      r.first = i < half ? 0 : n - width;
    }
    xs.resize(width);
    for (std::size_t j = 0; j < width; ++j) xs[j] = static_cast<double>(r.first + j);
    r.w = fd_weights(static_cast<double>(i), xs, order);
    rows_[i] = std::move(r);
  }
}

namespace detail {

const std::array<std::array<double, 6>, 5>& quintic_interval_weights() {
  static const auto table = [] {
    std::array<std::array<double, 6>, 5> t{};
    // 4-point Gauss-Legendre is exact for the degree-5 basis polynomials.
    const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                          0.8611363115940526};
    const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                          0.3478548451374538};
    for (int p = 0; p < 5; ++p) {
      for (int m = 0; m < 6; ++m) {
        double acc = 0.0;
        for (int q = 0; q < 4; ++q) {
          double x = p + 0.5 + 0.5 * gx[q];
          double l = 1.0;
          for (int j = 0; j < 6; ++j)
            if (j != m) l *= (x - j) / static_cast<double>(m - j);
          acc += 0.5 * gw[q] * l;
        }
        t[p][m] = acc;
      }
    }
    return t;
  }();
  return table;
}

}  // namespace detail
}  // namespace pipenet::numerics

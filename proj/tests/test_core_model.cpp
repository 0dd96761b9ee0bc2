#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pipenet/numerics.hpp"
#include "pipenet/params.hpp"
#include "pipenet/state.hpp"

using namespace pipenet;

namespace {

NetworkState profile_state(const EdgeGrid& g, auto w_of, auto v_of) {
  std::array<EdgeField, kEdges> e;
  for (int k = 0; k < kEdges; ++k) {
    auto& f = e[static_cast<std::size_t>(k)];
    for (double s : g.nodes()) {
      f.w.push_back(w_of(k, s));
      f.v.push_back(v_of(k, s));
    }
  }
  return NetworkState(g, std::move(e));
}

}  // namespace

TEST_CASE("validate_params reports violations") {
  CHECK(validate_params(Params{}).empty());
  Params bad{0.5, 1, 0.5, 2, 2};
  auto v = validate_params(bad);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("gamma") != std::string::npos);
  CHECK(validate_params(Params{0, 0, 0.999, 0, 0.1}).empty());
  CHECK(validate_params(Params{-1, -1, 1.0, -1, 0}).size() >= 4);
  CHECK_THROWS_AS(require_valid(bad), ParameterError);
}

TEST_CASE("edge grid") {
  EdgeGrid g(9);
  CHECK(g.node(0) == 0.0);
  CHECK(g.nodes().back() == doctest::Approx(1.0));
  CHECK_THROWS(EdgeGrid(8));
}

TEST_CASE("finite differences are fourth order") {
  auto err = [](std::size_t n, int order) {
    EdgeGrid g(n);
    std::vector<double> f;
    for (double s : g.nodes()) f.push_back(std::sin(2 * s) + s * s * s);
    auto d = numerics::differentiate<double>(f, g.spacing(), order);
    double e = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = g.node(i);
      double exact = 0;
      switch (order) {
        case 1: exact = 2 * std::cos(2 * s) + 3 * s * s; break;
        case 2: exact = -4 * std::sin(2 * s) + 6 * s; break;
        case 3: exact = -8 * std::cos(2 * s) + 6; break;
        case 4: exact = 16 * std::sin(2 * s); break;
      }
      e = std::max(e, std::abs(d[i] - exact));
    }
    return e;
  };
  for (int order = 1; order <= 4; ++order) {
    double ratio = err(65, order) / err(129, order);
    CAPTURE(order);
    CHECK(ratio > 12.0);
  }
}

TEST_CASE("quadrature") {
  EdgeGrid g(33);
  std::vector<double> f;
  for (double s : g.nodes()) f.push_back(std::exp(s));
  CHECK(numerics::simpson<double>(f, g.spacing()) == doctest::Approx(std::exp(1.0) - 1).epsilon(1e-8));
  EdgeGrid g2(34);
  std::vector<double> f2;
  for (double s : g2.nodes()) f2.push_back(std::exp(s));
  CHECK(numerics::simpson<double>(f2, g2.spacing()) == doctest::Approx(std::exp(1.0) - 1).epsilon(1e-8));
  auto c = numerics::cumulative_integral<double>(f, g.spacing());
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(std::abs(c[i] - (std::exp(g.node(i)) - 1)) < 1e-10);
  auto r = numerics::cumulative_integral_from_right<double>(f, g.spacing());
  CHECK(std::abs(r[0] - (std::exp(1.0) - 1)) < 1e-10);
  CHECK(r.back() == 0.0);
}

TEST_CASE("state invariants") {
  EdgeGrid g(17);
  auto ok = [](int, double s) { return cd(1 - s); };
  auto zero = [](int, double) { return cd(0); };
  CHECK_NOTHROW(profile_state(g, ok, zero));
  CHECK_THROWS_AS(profile_state(g, [](int, double) { return cd(1); }, zero), StateError);
  CHECK_THROWS_AS(profile_state(g, [](int k, double s) { return cd((1 + k) * (1 - s)); }, zero),
                  StateError);
  // roundoff-sized violations are tolerated
  CHECK_NOTHROW(profile_state(g, [](int k, double s) { return cd(1 - s + (s == 0 ? k * 1e-13 : 0)); },
                              zero));
  double adj = 0;
  std::array<EdgeField, kEdges> e;
  for (int k = 0; k < kEdges; ++k)
    for (double s : g.nodes()) {
      e[k].w.push_back(1.0 - s + 0.01 * k);
      e[k].v.push_back(0.0);
    }
  auto snapped = NetworkState::snapped(g, e, &adj);
  CHECK(adj == doctest::Approx(0.02));
  CHECK(snapped.edge(2).w.back() == cd(0));
}

TEST_CASE("energy inner product hand values") {
  Params p;
  EdgeGrid g(65);
  auto lin = profile_state(g, [](int, double s) { return cd(1 - s); }, [](int, double) { return cd(0); });
  CHECK(energy_norm_sq(lin, p) == doctest::Approx(4.5).epsilon(1e-10));
  auto vel = profile_state(g, [](int, double) { return cd(0); }, [](int, double) { return cd(1); });
  CHECK(energy_norm_sq(vel, p) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(energy_norm_sq(NetworkState::zero(g), p) == 0.0);
}

TEST_CASE("energy inner product is Hermitian, positive and converges at fourth order") {
  Params p;
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  auto random_state = [&](const EdgeGrid& g, std::array<cd, 12> c) {
    return profile_state(
        g,
        [&](int k, double s) {
          return c[k] * (1 - s) + c[3 + k] * std::sin(std::numbers::pi * s) * s +
                 c[9] * (1 - s) * (1 - s);
        },
        [&](int k, double s) { return c[6 + k] * std::cos(3 * s) + c[10] * s; });
  };
  for (int trial = 0; trial < 5; ++trial) {
    std::array<cd, 12> a, b;
    for (auto& z : a) z = {nd(rng), nd(rng)};
    for (auto& z : b) z = {nd(rng), nd(rng)};
    // shared vertex value requires the (1-s) coefficients to agree
    a[1] = a[2] = a[0];
    b[1] = b[2] = b[0];
    EdgeGrid g(129);
    auto x = random_state(g, a), y = random_state(g, b);
    cd xy = energy_inner_product(x, y, p), yx = energy_inner_product(y, x, p);
    CHECK(std::abs(xy - std::conj(yx)) < 1e-12 * std::abs(xy));
    cd xx = energy_inner_product(x, x, p);
    CHECK(std::abs(xx.imag()) < 1e-12 * xx.real());
    CHECK(xx.real() > 0);

    double n1 = energy_norm_sq(random_state(EdgeGrid(33), a), p);
    double n2 = energy_norm_sq(random_state(EdgeGrid(65), a), p);
    double n3 = energy_norm_sq(random_state(EdgeGrid(129), a), p);
    CHECK(std::abs(n1 - n2) / std::abs(n2 - n3) > 12.0);
  }
}

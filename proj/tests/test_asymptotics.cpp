#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "pipenet/asymptotics.hpp"

using namespace pipenet;
using std::numbers::pi;

TEST_CASE("closed-form eigenvalues, hand values") {
  Params p;
  // i(tau^2 + 2 tau z) with tau = pi/2, z = (i + 0.5625) / pi
  auto a = asymptotic_eigenvalue(0, Branch::one, p);
  CHECK(a.lambda.real() == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(a.lambda.imag() == doctest::Approx(pi * pi / 4 + 0.5625).epsilon(1e-14));
  auto b = asymptotic_eigenvalue(0, Branch::two, p);
  CHECK(b.lambda.real() == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(b.lambda.imag() == doctest::Approx(pi * pi / 16 + 0.5625).epsilon(1e-14));
  CHECK(asymptotic_tau(3, Branch::one) == doctest::Approx(3.5 * pi));
  CHECK(asymptotic_tau(3, Branch::two) == doctest::Approx(3.25 * pi));

  for (int n : {1, 5, 40}) {
    auto u = asymptotic_eigenvalue(n, Branch::two, p), l = asymptotic_eigenvalue(-n, Branch::two, p);
    CHECK(std::abs(l.lambda - std::conj(u.lambda)) < 1e-12 * std::abs(u.lambda));
  }

  Params k{0.5, 1e6, 0.5, 1, 2};
  CHECK(std::abs(asymptotic_eigenvalue(4, Branch::one, k).lambda.real()) < 1e-5);
  Params k0{0.5, 0, 0.5, 1, 2};
  auto z = asymptotic_eigenvalue(4, Branch::two, k0);
  CHECK(z.kappa_zero);
  CHECK(z.lambda.real() == 0.0);
  CHECK_THROWS_AS(asymptotic_char_residual(cd(10, 0), Branch::one, k0), std::domain_error);
}

TEST_CASE("expansion terms") {
  Params p;
  for (int r = 1; r <= 4; ++r) {
    CHECK(std::abs(phase_term(r, 0.0, p)) == 0.0);
    CHECK(std::abs(first_correction(r, 0.0, p)) == 0.0);
    const cd rho(30, 5);
    for (int m = 0; m < 4; ++m) {
      cd expect = 1.0 + double(m) * phase_term_derivative(r, 0.0, p) / (omega(r) * rho);
      CHECK(std::abs(asymptotic_amplitude(rho, 0.0, r, m, p) - expect) < 1e-15);
    }
    // derivative against a central difference
    const double h = 1e-5;
    cd fd = (phase_term(r, 0.6 + h, p) - phase_term(r, 0.6 - h, p)) / (2 * h);
    CHECK(std::abs(fd - phase_term_derivative(r, 0.6, p)) < 1e-9);
  }
  Params flat{0.5, 1, 0, 1, 2};
  for (int r = 1; r <= 4; ++r)
    for (double s : {0.2, 0.9}) CHECK(std::abs(phase_term(r, s, flat)) == 0.0);
  CHECK(std::abs(omega(1) - cd(0, 1)) == 0.0);
  CHECK(std::abs(omega(4) - 1.0) == 0.0);
}

TEST_CASE("asymptotic solutions nearly satisfy the equation") {
  // residual of the 4th-order equation, relative to rho^4, decays like 1/rho^2
  Params p;
  const double a = p.gamma - p.eta * p.eta, be = p.beta * p.eta;
  auto rel_residual = [&](cd rho) {
    cd lam = cd(0, 1) * rho * rho;
    double worst = 0.0;
    for (int r = 1; r <= 4; ++r)
      for (double s : {0.1, 0.5, 0.9}) {
        cd y[5];
        for (int m = 0; m < 4; ++m) y[m] = asymptotic_solution(rho, s, r, m, p);
        // fourth derivative by a central difference of the third
        const double h = 1e-4 / std::abs(rho);
        y[4] = (asymptotic_solution(rho, s + h, r, 3, p) - asymptotic_solution(rho, s - h, r, 3, p)) / (2 * h);
        cd res = y[4] - a * y[2] + 2.0 * lam * be * y[1] + lam * lam * y[0];
        cd scale = std::pow(omega(r) * rho, 4) * std::exp(omega(r) * rho * s);
        worst = std::max(worst, std::abs(res / scale));
      }
    return worst;
  };
  double e1 = rel_residual(cd(20, 3)), e2 = rel_residual(cd(40, 6));
  CHECK(e1 < 0.05);
  CHECK(e1 / e2 > 3.0);
}

TEST_CASE("asymptotic characteristic equation at the seeds") {
  Params p;
  for (Branch b : {Branch::one, Branch::two}) {
    double prev_seed = 0, prev_tau = 0;
    for (int n : {10, 20, 40, 80}) {
      auto e = asymptotic_eigenvalue(n, b, p);
      double at_seed = std::abs(asymptotic_char_residual(e.rho, b, p));
      double at_tau = std::abs(asymptotic_char_residual(asymptotic_tau(n, b), b, p));
      CHECK(at_seed < at_tau);
      if (prev_seed > 0) {
        CHECK(prev_seed / at_seed > 3.0);
        CHECK(prev_tau / at_tau > 1.6);
        CHECK(prev_tau / at_tau < 2.5);
      }
      prev_seed = at_seed;
      prev_tau = at_tau;
    }
  }
}

TEST_CASE("shooting reference is an exact solution with the prescribed data") {
  Params p;
  const cd rho(8, 2);
  const cd lam = cd(0, 1) * rho * rho;
  std::vector<double> s{0.0, 0.25, 0.5, 0.75, 1.0};
  for (int r = 1; r <= 4; ++r) {
    auto ref = shooting_reference(rho, r, p, s);
    REQUIRE(ref.size() == s.size());
    for (std::size_t j = 1; j < s.size(); ++j) {
      Eigen::Vector4cd prop = oracle::exact_fundamental(lam, p, false, s[j] - s[j - 1]) * ref[j - 1];
      double scale = std::abs(std::exp(omega(r) * rho * s[j])) * std::pow(std::abs(rho), 3);
      CHECK((prop - ref[j]).norm() / scale < 1e-8);
    }
  }
}

TEST_CASE("expansion error decays like 1/rho^2") {
  Params p;
  std::vector<double> s;
  for (int i = 0; i <= 10; ++i) s.push_back(0.1 * i);
  for (double arg : {0.0, pi / 8, pi / 4}) {
    double e1 = expansion_error(std::polar(20.0, arg), p, s).max_rel;
    double e2 = expansion_error(std::polar(40.0, arg), p, s).max_rel;
    CAPTURE(arg);
    CHECK(e1 < 0.05);
    CHECK(e1 / e2 > 3.0);
    CHECK(e1 / e2 < 5.5);
  }
}

#include <doctest.h>

#include <map>

#include "oracles.hpp"
#include "pipenet/asymptotics.hpp"
#include "pipenet/spectral.hpp"

using namespace pipenet;

namespace {

const Spectrum& default_spectrum() {
  static const Spectrum s = [] {
    SearchOptions o;
    o.grid_points = 257;
    return find_eigenvalues(Params{}, 14, o);
  }();
  return s;
}

}  // namespace

TEST_CASE("branch determinants equal the exact 4x4 determinant") {
  Params p;
  for (cd lam : {cd(-0.5, 3), cd(-2, 20), cd(-1, -40), cd(0.3, 100), cd(-3, 0.5)})
    for (Branch b : {Branch::one, Branch::two}) {
      cd ratio = char_det(SpectralPoint::from_lambda(lam), b, p).value() /
                 oracle::exact_char_det(lam, p, b == Branch::two);
      CAPTURE(lam);
      CHECK(std::abs(ratio - 1.0) < 1e-8);
    }
}

TEST_CASE("canonical matrix vanishes at a root of moderate size") {
  Params p;
  const auto& s = default_spectrum();
  for (const auto& r : s.records) {
    if (r.index < 1 || r.index > 6) continue;
    auto fd = integrate_fundamental_system({r.lambda, r.rho}, p, Equation::direct);
    Eigen::JacobiSVD<Mat4> svd(canonical_char_matrix(fd, r.branch, p));
    auto sv = svd.singularValues();
    CHECK(sv(3) / sv(0) < 1e-9);
    CHECK(sv(2) / sv(0) > 1e-6);
  }
}

TEST_CASE("determinant conjugation symmetry") {
  Params p;
  for (cd lam : {cd(-0.7, 13), cd(-1.3, 250)}) {
    auto a = char_det(SpectralPoint::from_lambda(lam), Branch::one, p);
    auto b = char_det(SpectralPoint::from_lambda(std::conj(lam)), Branch::one, p);
    CHECK(std::abs(b.value() / std::conj(a.value()) - 1.0) < 1e-9);
  }
}

TEST_CASE("kappa = 0: imaginary-axis brackets give purely imaginary roots") {
  Params p{0.5, 0, 0.5, 1, 2};
  for (Branch b : {Branch::one, Branch::two}) {
    auto g = [&](double t) { return char_det(SpectralPoint::from_lambda({0, t}), b, p).mantissa.real(); };
    int roots = 0;
    double t0 = 1.0, g0 = g(t0);
    for (double t1 = 1.05; t1 <= 200.0; t1 += 0.05) {
      double g1 = g(t1);
      if ((g0 < 0) != (g1 < 0)) {
        double lo = t0, hi = t1, glo = g0;
        for (int i = 0; i < 60; ++i) {
          double mid = 0.5 * (lo + hi), gm = g(mid);
          if ((gm < 0) == (glo < 0)) {
            lo = mid;
            glo = gm;
          } else {
            hi = mid;
          }
        }
        auto nr = refine_root(cd(0.05, 0.5 * (lo + hi)), b, p, NewtonVariable::lambda);
        REQUIRE(nr.converged);
        CHECK(std::abs(nr.lambda.real()) < 1e-9);
        CHECK(std::abs(nr.lambda.imag() - 0.5 * (lo + hi)) < 1e-6);
        ++roots;
      }
      t0 = t1;
      g0 = g1;
    }
    CHECK(roots >= 4);
  }
}

TEST_CASE("argument principle counts") {
  Params p;
  CHECK(count_roots_in_box({0.01, 5, -20, 40}, Branch::one, p) == 0);
  CHECK(count_roots_in_box({0.01, 5, -20, 40}, Branch::two, p) == 0);

  const auto& s = default_spectrum();
  int distinct = 0;
  for (const auto& r : s.records)
    if (r.branch == Branch::one && r.lambda.real() > -4 && r.lambda.real() < -0.01 && r.lambda.imag() > 2 &&
        r.lambda.imag() < 30)
      ++distinct;
  CHECK(distinct == 2);
  CHECK(count_roots_in_box({-4, -0.01, 2, 30}, Branch::one, p) == distinct);

  // the root near -0.567 + 2.527i leaves the box when the bottom edge moves up
  CHECK(count_roots_in_box({-4, -0.01, 2, 30}, Branch::one, p) -
            count_roots_in_box({-4, -0.01, 3, 30}, Branch::one, p) ==
        1);
  for (const auto& r : s.records)
    if (r.branch == Branch::one && std::abs(r.lambda - cd(-0.567348, 2.527)) < 1e-2)
      CHECK_THROWS_AS(winding_number({r.lambda.real(), 0.0, r.lambda.imag(), 30}, Branch::one, p), BoundaryTooClose);
}

TEST_CASE("double eigenvalues: the branch determinant has simple zeros, the network determinant double") {
  Params p;
  const auto& s = default_spectrum();
  int checked = 0;
  for (const auto& r : s.records) {
    if (r.index < 1 || std::abs(r.lambda) > 60) continue;
    const double rad = 0.3;
    Box box{r.lambda.real() - rad, r.lambda.real() + rad, r.lambda.imag() - rad, r.lambda.imag() + rad};
    CHECK(count_roots_in_box(box, r.branch, p) == r.multiplicity);
    CHECK(winding_number(box, r.branch, p) == 1);
    auto net = [&](cd z) { return oracle::network_det(z, p); };
    CHECK(oracle::circle_winding(net, r.lambda, rad) == r.multiplicity);
    ++checked;
  }
  CHECK(checked >= 6);
}

TEST_CASE("spectrum at default parameters") {
  Params p;
  const auto& s = default_spectrum();
  CHECK(s.gaps.empty());
  CHECK(s.records.size() >= 2 * 14);
  std::map<int, int> by_index;
  for (const auto& r : s.records) {
    CHECK(r.residual < 1e-10);
    CHECK(r.lambda.real() < -1e-6);
    CHECK(std::abs(r.lambda) > 1e-3);
    CHECK_FALSE(r.degenerate);
    CHECK(std::abs(cd(0, 1) * r.rho * r.rho - r.lambda) <= 1e-12 * (1 + std::abs(r.lambda)));
    by_index[r.index]++;
    if (std::abs(r.lambda.imag()) > 1e-9) {
      bool partner = std::any_of(s.records.begin(), s.records.end(), [&](const EigenRecord& q) {
        return q.index == -r.index && std::abs(q.lambda - std::conj(r.lambda)) < 1e-9 * std::abs(r.lambda);
      });
      CHECK(partner);
    }
  }
  for (auto [k, v] : by_index) CHECK(v == 1);

  // Re(lambda_n) approaches -m/kappa like C/n
  for (Branch b : {Branch::one, Branch::two}) {
    const double m = b == Branch::one ? 1.0 : 2.0;
    double worst = 0.0;
    for (const auto& r : s.records)
      if (r.mode && r.branch == b && r.index > 0)
        worst = std::max(worst, *r.mode * std::abs(r.lambda.real() + m / p.kappa));
    CHECK(worst > 0.0);
    CHECK(worst < 0.5);
  }
}

TEST_CASE("skew-adjoint case has an imaginary spectrum") {
  SearchOptions o;
  o.assemble = false;
  auto s = find_eigenvalues(Params{0.5, 0, 0.5, 1, 2}, 6, o);
  CHECK(s.records.size() >= 12);
  for (const auto& r : s.records) CHECK(std::abs(r.lambda.real()) < 1e-9);
}

TEST_CASE("eigenfunctions") {
  Params p;
  const auto& s = default_spectrum();
  for (const auto& r : s.records) {
    REQUIRE(r.eigenfunctions.size() == static_cast<std::size_t>(r.multiplicity));
    CHECK(r.moment_residual < 1e-7);
    CHECK(r.assembly_defect < 1e-8);
    for (const auto& x : r.eigenfunctions) {
      CHECK(energy_norm_sq(x, p) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(x.edge(0).w.back()) == 0.0);
    }
    if (r.branch == Branch::two) {
      Eigen::Matrix2cd G;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) G(i, j) = energy_inner_product(r.eigenfunctions[i], r.eigenfunctions[j], p);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(G);
      CHECK(es.eigenvalues()(1) / es.eigenvalues()(0) < 1e6);
      CHECK(std::abs(r.eigenfunctions[0].vertex_value()) < 1e-8);
    }
    // eigen relation on the velocity component: v = lambda w
    const auto& e = r.eigenfunctions[0].edge(0);
    CHECK(std::abs(e.v[7] - r.lambda * e.w[7]) <= 1e-12 * std::abs(e.v[7]) + 1e-300);
  }
}

TEST_CASE("bilinear form") {
  Params p;
  const auto& s = default_spectrum();
  for (const auto& r : s.records) CHECK(r.abs_bform > 1e-6);
  EdgeGrid g(257);
  EigenRecord a = s.records.front();
  for (const auto& r : s.records)
    if (r.index == 3) a = r;
  EigenRecord b = a;
  auto sp = SpectralPoint::from_lambda(std::conj(a.lambda));
  b.lambda = sp.lambda;
  b.rho = sp.rho;
  CHECK(std::abs(bform(b, p, g) - std::conj(bform(a, p, g))) < 1e-10);

  Params sym{0, 0, 0.5, 0, 2};
  SearchOptions o;
  o.grid_points = 257;
  auto ss = find_eigenvalues(sym, 5, o);
  int n = 0;
  for (const auto& r : ss.records)
    if (r.index >= 1 && r.index <= 5) {
      CHECK(r.abs_bform > 1e-3);
      ++n;
    }
  CHECK(n == 5);
}

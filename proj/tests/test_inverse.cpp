#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "pipenet/inverse.hpp"
#include "pipenet/spectral.hpp"

using namespace pipenet;

namespace {

// all edge displacement arrays of a state stacked into one column
Eigen::VectorXcd stack_w(const NetworkState& x) {
  const auto n = static_cast<Eigen::Index>(x.grid().size());
  Eigen::VectorXcd out(3 * n);
  for (int k = 0; k < kEdges; ++k)
    for (Eigen::Index i = 0; i < n; ++i) out(k * n + i) = x.edge(k).w[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace

TEST_CASE("zero data and the velocity copy") {
  Params p;
  EdgeGrid g(129);
  NetworkState x = apply_inverse(NetworkState::zero(g), p);
  CHECK(x.max_abs() == 0.0);

  std::mt19937_64 rng(7);
  NetworkState y = random_smooth_state(g, rng);
  x = apply_inverse(y, p);
  for (int k = 0; k < kEdges; ++k) CHECK(x.edge(k).v == y.edge(k).w);
}

TEST_CASE("the result lies in the generator domain") {
  std::mt19937_64 rng(11);
  for (Params p : {Params{}, Params{0, 3, 0.2, 0.3, 5}, Params{2, 0, 0.9, 0, 0.5}}) {
    NetworkState y = random_smooth_state(EdgeGrid(257), rng);
    InverseWork work;
    NetworkState x = apply_inverse(y, p, &work);
    CHECK(domain_residual(x, p) < 1e-6);
    cd sum = work.force[0] + work.force[1] + work.force[2];
    CHECK(std::abs(sum) < 1e-12 * (std::abs(work.force[0]) + std::abs(work.force[1]) + 1.0));
    CHECK(std::abs(work.vertex - x.vertex_value()) < 1e-12 * (1.0 + std::abs(work.vertex)));
  }
}

// Past ~257 nodes the fourth-difference roundoff (eps / h^4) takes over.
TEST_CASE("round trip converges under grid refinement") {
  Params p;
  for (unsigned seed : {1u, 2u, 3u}) {
    double prev = 0.0;
    for (std::size_t n : {33, 65, 129}) {
      std::mt19937_64 rng(seed);
      double e = round_trip_error(random_smooth_state(EdgeGrid(n), rng), p);
      if (prev > 0.0) {
        CAPTURE(n);
        CHECK(std::log2(prev / e) >= 3.0);
      }
      prev = e;
    }
    CHECK(prev < 1e-4);
  }
}

TEST_CASE("split into skew part and feedback part") {
  Params p;
  EdgeGrid g(257);
  std::mt19937_64 rng(5);
  NetworkState y = random_smooth_state(g, rng);
  auto sp = split_inverse(y, p);
  NetworkState full = apply_inverse(y, p);
  NetworkState recon = sp.skew_part.plus(sp.feedback_part, p.kappa);
  CHECK(recon.plus(full, -1.0).max_abs() < 1e-12 * full.max_abs());
  for (int k = 0; k < kEdges; ++k)
    for (cd v : sp.feedback_part.edge(k).v) CHECK(v == cd(0));

  Params k0 = p;
  k0.kappa = 0;
  CHECK(apply_inverse(y, k0).plus(sp.skew_part, -1.0).max_abs() < 1e-13 * full.max_abs());

  // realness
  NetworkState yr = random_smooth_state(g, rng, true);
  auto spr = split_inverse(yr, p);
  for (int k = 0; k < kEdges; ++k)
    for (cd w : spr.feedback_part.edge(k).w) CHECK(w.imag() == 0.0);
  for (int k = 0; k < kEdges; ++k)
    for (cd w : apply_inverse(yr, p).edge(k).w) CHECK(std::abs(w.imag()) < 1e-15);
}

TEST_CASE("feedback part: two profiles per edge, three dimensions on the network") {
  Params p;
  EdgeGrid g(129);
  std::mt19937_64 rng(9);
  const int samples = 10;
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXcd S(3 * n, samples);
  for (int j = 0; j < samples; ++j) S.col(j) = stack_w(split_inverse(random_smooth_state(g, rng), p).feedback_part);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(S);
  auto sv = svd.singularValues();
  Eigen::VectorXd lib = feedback_singular_values(p, g, samples, rng);
  CHECK(lib(2) / lib(0) > 1e-3);
  CHECK(lib(3) / lib(0) < 1e-12);
  CHECK(sv(2) / sv(0) > 1e-3);
  CHECK(sv(3) / sv(0) < 1e-12);

  // on a single edge the outputs span the two fixed profiles
  auto prof = feedback_profiles(g, p);
  Eigen::MatrixXcd P(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    P(i, 0) = prof[0][static_cast<std::size_t>(i)];
    P(i, 1) = prof[1][static_cast<std::size_t>(i)];
  }
  for (int k = 0; k < kEdges; ++k) {
    Eigen::MatrixXcd E = S.block(k * n, 0, n, samples);
    Eigen::JacobiSVD<Eigen::MatrixXcd> se(E);
    CHECK(se.singularValues()(2) / se.singularValues()(0) < 1e-12);
    Eigen::MatrixXcd resid = E - P * P.colPivHouseholderQr().solve(E);
    CHECK(resid.norm() < 1e-12 * E.norm());
  }
}

TEST_CASE("skew-adjointness at kappa = 0 and dissipativity") {
  EdgeGrid g(513);
  std::mt19937_64 rng(3);
  Params k0{0.5, 0, 0.5, 1, 2};
  for (int t = 0; t < 3; ++t) {
    NetworkState y = random_smooth_state(g, rng, true), z = random_smooth_state(g, rng, true);
    cd lhs = energy_inner_product(apply_inverse(y, k0), z, k0);
    cd rhs = -energy_inner_product(y, apply_inverse(z, k0), k0);
    CHECK(std::abs(lhs - rhs) < 1e-8 * std::abs(lhs));
  }
  Params p;
  for (int t = 0; t < 3; ++t) {
    NetworkState y = random_smooth_state(g, rng);
    auto sp = split_inverse(y, p);
    double re = energy_inner_product(apply_inverse(y, p), y, p).real();
    double fb = p.kappa * energy_inner_product(sp.feedback_part, y, p).real();
    CHECK(std::abs(re - fb) < 1e-8 * energy_norm_sq(y, p));
    CHECK(re < 0.0);
  }
}

TEST_CASE("eigenpairs: inverse of lambda x returns x") {
  Params p;
  SearchOptions o;
  o.grid_points = 513;
  auto s = find_eigenvalues(p, 4, o);
  int checked = 0;
  for (const auto& r : s.records) {
    if (std::abs(r.lambda) > 40) continue;
    for (const auto& x : r.eigenfunctions) {
      NetworkState back = apply_inverse(x.scaled(r.lambda), p);
      CHECK(std::sqrt(energy_norm_sq(back.plus(x, -1.0), p)) < 1e-6);
      ++checked;
    }
  }
  CHECK(checked >= 6);
}

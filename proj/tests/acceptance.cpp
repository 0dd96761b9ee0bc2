// Acceptance checks: one PASS/FAIL line per criterion. The process exits 0
// whenever every check ran to completion, whatever the verdicts; it exits 1
// only if a check could not be evaluated.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include "pipenet/analysis.hpp"
#include "pipenet/experiments.hpp"
#include "pipenet/inverse.hpp"

using namespace pipenet;

namespace {

// criterion 1
constexpr int kAsymNMin = 10, kAsymNMax = 30;
constexpr double kMaxKendallTau = 0.3;
constexpr int kRealPartFrom = 20;
constexpr double kRealPartTol = 0.05;
// criterion 2
constexpr int kSkewCount = 20;
constexpr double kSkewReTol = 1e-8;
constexpr double kDriftTol = 1e-8;
constexpr double kDriftHorizon = 20.0, kDriftDt = 1e-3;
// criterion 3
constexpr double kMinResidualRatio = 3.5;
constexpr double kResidualDt = 2e-3, kResidualHorizon = 4.0;
// criterion 4
constexpr int kDecayRuns = 5;
constexpr double kDecayRelTol = 0.1;
constexpr double kDecayDt = 2e-3, kDecayHorizon = 25.0;
constexpr double kMinSlowWeight = 1e-3;
// criterion 5
constexpr int kLowestPerBranch = 15;
constexpr double kMinAbsB = 1e-6;
constexpr double kMaxPairCondition = 1e6;
// criterion 6
constexpr double kMinRoundTripOrder = 3.0;
constexpr int kRoundTripSamples = 5;
constexpr int kRankSamples = 10;
constexpr double kMinRankGap = 1e9;
// criterion 7
constexpr double kConfinementMargin = 1e-6;
constexpr double kConjugateTol = 1e-9;
// criterion 8
constexpr double kMinExpansionRatio = 3.2, kMaxExpansionRatio = 4.8;

constexpr int kElems = 16;
constexpr std::size_t kGrid = 257;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

const Params kDefault{};

Spectrum spectrum(const Params& p, int n_max, bool assemble) {
  SearchOptions o;
  o.grid_points = kGrid;
  o.assemble = assemble;
  return find_eigenvalues(p, n_max, o);
}

Verdict asymptotics() {
  Spectrum spec = spectrum(kDefault, kAsymNMax + 1, false);
  AsymptoticTable t = asymptotic_table(spec, kDefault, kAsymNMin, kAsymNMax);
  Verdict v{t.missing.empty(), ""};
  if (!t.missing.empty()) v.detail = std::to_string(t.missing.size()) + " modes missing; ";
  for (Branch b : {Branch::one, Branch::two}) {
    const double m = b == Branch::one ? 1.0 : 2.0;
    std::vector<double> ns, scaled;
    double worst_re = 0.0;
    for (const auto& r : t.rows) {
      if (r.branch != b) continue;
      ns.push_back(r.n);
      scaled.push_back(r.scaled_error);
      if (r.n >= kRealPartFrom) worst_re = std::max(worst_re, std::abs(r.lambda.real() + m / kDefault.kappa));
    }
    double tau = kendall_tau(ns, scaled);
    auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
    v.pass = v.pass && tau <= kMaxKendallTau && worst_re <= kRealPartTol;
    v.detail += to_string(b) + ": n*err in [" + fmt(*lo) + ", " + fmt(*hi) + "], kendall tau " + fmt(tau) +
                ", max |Re+" + fmt(m) + "| (n>=20) " + fmt(worst_re) + "; ";
  }
  return v;
}

Verdict skew_case() {
  Params p = kDefault;
  p.kappa = 0.0;
  Spectrum spec = spectrum(p, 12, false);
  auto recs = spec.records;
  std::stable_sort(recs.begin(), recs.end(),
                   [](const auto& a, const auto& b) { return std::abs(a.lambda.imag()) < std::abs(b.lambda.imag()); });
  double worst_re = 0.0;
  for (int i = 0; i < kSkewCount && i < static_cast<int>(recs.size()); ++i)
    worst_re = std::max(worst_re, std::abs(recs[static_cast<std::size_t>(i)].lambda.real()));

  std::mt19937_64 rng(2);
  auto sys = assemble(p, kElems);
  Trajectory tr = simulate(sys, random_smooth_state(EdgeGrid(kGrid), rng, true), kDriftHorizon, kDriftDt);
  double drift = 0.0;
  for (double e : tr.energy) drift = std::max(drift, std::abs(e - tr.energy.front()) / tr.energy.front());
  return {recs.size() >= kSkewCount && worst_re < kSkewReTol && drift < kDriftTol,
          "max |Re| of " + std::to_string(kSkewCount) + " lowest: " + fmt(worst_re) + ", relative energy drift " +
              fmt(drift)};
}

Verdict dissipation() {
  auto sys = assemble(kDefault, kElems);
  Verdict v{true, "residual ratios"};
  for (unsigned seed : {1u, 2u, 3u}) {
    std::mt19937_64 rng(seed);
    NetworkState x0 = random_initial_state(InitialKind::domain, EdgeGrid(kGrid), rng, kDefault);
    double res[2];
    for (int k = 0; k < 2; ++k) {
      Trajectory tr = simulate(sys, x0, kResidualHorizon, kResidualDt / (1 << k));
      res[k] = 0.0;
      for (double r : dissipation_residual(tr, kDefault)) res[k] = std::max(res[k], std::abs(r));
    }
    double ratio = res[0] / res[1];
    v.pass = v.pass && ratio >= kMinResidualRatio;
    v.detail += " " + fmt(ratio);
  }
  return v;
}

Verdict decay() {
  Spectrum spec = spectrum(kDefault, 8, true);
  AbscissaReport ab = spectral_abscissa(spec);
  auto section = lowest_section(spec, 40);
  auto sys = assemble(kDefault, kElems);
  Verdict v{ab.warning.empty(), "abscissa " + fmt(ab.value, 8) + ", rates"};
  std::mt19937_64 rng(4);
  for (int run = 0; run < kDecayRuns; ++run) {
    NetworkState x0 = random_initial_state(InitialKind::domain, EdgeGrid(kGrid), rng, kDefault);
    while (slow_mode_weight(section, x0, kDefault) < kMinSlowWeight)
      x0 = random_initial_state(InitialKind::domain, EdgeGrid(kGrid), rng, kDefault);
    Trajectory tr = simulate(sys, x0, kDecayHorizon, kDecayDt);
    DecayFit f = estimate_decay_rate(tr);
    double gap = std::abs(f.rate - ab.value) / std::abs(ab.value);
    v.pass = v.pass && gap <= kDecayRelTol && tr.energy.back() < tr.energy.front();
    v.detail += " " + fmt(f.rate, 6) + " (gap " + fmt(gap, 2) + ")";
  }
  return v;
}

Verdict semisimplicity() {
  Spectrum spec = spectrum(kDefault, kLowestPerBranch + 2, true);
  Verdict v{true, ""};
  for (Branch b : {Branch::one, Branch::two}) {
    std::vector<const EigenRecord*> recs;
    for (const auto& r : spec.records)
      if (r.branch == b && r.lambda.imag() > 0) recs.push_back(&r);
    std::stable_sort(recs.begin(), recs.end(), [](auto a, auto c) { return a->lambda.imag() < c->lambda.imag(); });
    if (recs.size() > kLowestPerBranch) recs.resize(kLowestPerBranch);
    double min_b = 1e300;
    for (auto r : recs) min_b = std::min(min_b, r->abs_bform);
    v.pass = v.pass && recs.size() == kLowestPerBranch && min_b > kMinAbsB;
    v.detail += to_string(b) + " min |B| " + fmt(min_b) + "; ";
  }
  double worst_cond = 0.0;
  for (const auto& r : spec.records) {
    if (r.branch != Branch::two) continue;
    if (r.eigenfunctions.size() != 2) {
      v.pass = false;
      continue;
    }
    worst_cond = std::max(worst_cond, gram_condition({r}, kDefault).condition_number);
  }
  v.pass = v.pass && worst_cond < kMaxPairCondition;
  v.detail += "max BRANCH2 pair condition " + fmt(worst_cond);
  return v;
}

Verdict inverse() {
  Verdict v{true, "round-trip orders"};
  double min_order = 1e300;
  for (int k = 0; k < kRoundTripSamples; ++k) {
    double prev = 0.0;
    for (std::size_t n : {33, 65, 129}) {
      std::mt19937_64 rng(100 + k);
      double e = round_trip_error(random_smooth_state(EdgeGrid(n), rng), kDefault);
      if (prev > 0.0) min_order = std::min(min_order, std::log2(prev / e));
      prev = e;
    }
  }
  std::mt19937_64 rng(7);
  Eigen::VectorXd sv = feedback_singular_values(kDefault, EdgeGrid(kGrid), kRankSamples, rng);
  double gap23 = sv(1) / sv(2);
  v.pass = min_order >= kMinRoundTripOrder && gap23 >= kMinRankGap;
  v.detail += " min " + fmt(min_order) + "; singular values of S:";
  for (int i = 0; i < 4; ++i) v.detail += " " + fmt(sv(i), 3);
  v.detail += "; sigma2/sigma3 " + fmt(gap23) + " (need >= 1e9)";
  return v;
}

Verdict confinement() {
  Spectrum spec = spectrum(kDefault, 20, false);
  double max_re = -1e300, worst_conj = 0.0;
  for (const auto& r : spec.records) {
    max_re = std::max(max_re, r.lambda.real());
    double d = 1e300;
    for (const auto& q : spec.records)
      if (q.branch == r.branch) d = std::min(d, std::abs(q.lambda - std::conj(r.lambda)));
    worst_conj = std::max(worst_conj, d / (1.0 + std::abs(r.lambda)));
  }
  int count = 0;
  for (Branch b : {Branch::one, Branch::two})
    for (Box box : {Box{kConfinementMargin, 5, -400, 400}, Box{kConfinementMargin, 5, 400, 4000},
                    Box{kConfinementMargin, 5, -4000, -400}})
      count += count_roots_in_box(box, b, kDefault);
  return {max_re <= -kConfinementMargin && worst_conj < kConjugateTol && count == 0,
          std::to_string(spec.records.size()) + " eigenvalues, max Re " + fmt(max_re) +
              ", worst conjugate mismatch " + fmt(worst_conj) + ", right half-plane count " + std::to_string(count)};
}

Verdict expansion() {
  std::vector<double> s;
  for (int i = 0; i <= 10; ++i) s.push_back(i / 10.0);
  auto scan = expansion_scan(kDefault, {40.0, 80.0}, 5, s);
  Verdict v{true, "error ratio 40->80 by arg rho:"};
  const std::size_t half = scan.size() / 2;
  for (std::size_t j = 0; j < half; ++j) {
    double ratio = scan[j].error.max_rel / scan[j + half].error.max_rel;
    v.pass = v.pass && ratio >= kMinExpansionRatio && ratio <= kMaxExpansionRatio;
    v.detail += " " + fmt(ratio);
  }
  return v;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> checks[] = {
      {"asymptotics of both branches", asymptotics},
      {"skew-adjoint case", skew_case},
      {"dissipation identity", dissipation},
      {"spectrum determined growth", decay},
      {"semisimplicity", semisimplicity},
      {"inverse operator", inverse},
      {"symmetry and confinement", confinement},
      {"asymptotic fundamental system", expansion},
  };
  int errors = 0, passed = 0, k = 0;
  for (const auto& [name, fn] : checks) {
    ++k;
    auto t0 = std::chrono::steady_clock::now();
    try {
      Verdict v = fn();
      double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      passed += v.pass;
      std::cout << "criterion " << k << " " << (v.pass ? "PASS" : "FAIL") << " " << name << ": " << v.detail
                << " [" << fmt(sec, 3) << " s]" << std::endl;
    } catch (const std::exception& e) {
      ++errors;
      std::cout << "criterion " << k << " ERROR " << name << ": " << e.what() << std::endl;
    }
  }
  std::cout << passed << " of " << k << " criteria passed" << std::endl;
  return errors ? 1 : 0;
}

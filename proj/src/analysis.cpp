#include "pipenet/analysis.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace pipenet {

namespace {

DecayFit fit_window(const std::vector<double>& t, const std::vector<double>& e, double t0, double floor) {
  double n = 0, st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
  DecayFit f;
  f.t_begin = t0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0) continue;
    if (!(e[i] > floor)) break;
    const double y = std::log(e[i]);
    n += 1;
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
    syy += y * y;
    f.t_end = t[i];
  }
  if (n < 3) throw AnalysisError("estimate_decay_rate: fewer than 3 samples in the fit window");
  const double vt = stt - st * st / n, vy = syy - sy * sy / n, cty = sty - st * sy / n;
  if (!(vt > 0)) throw AnalysisError("estimate_decay_rate: degenerate time window");
  const double slope = cty / vt;
  f.rate = 0.5 * slope;
  f.intercept = (sy - slope * st) / n;
  f.r_squared = vy > 0 ? cty * cty / (vt * vy) : 1.0;
  return f;
}

}  // namespace

DecayFit estimate_decay_rate(const std::vector<double>& times, const std::vector<double>& energy,
                             const DecayFitOptions& opts) {
  if (times.size() != energy.size() || times.size() < 3)
    throw AnalysisError("estimate_decay_rate: need matching series of at least 3 samples");
  if (!(energy.front() > 0)) throw AnalysisError("estimate_decay_rate: initial energy must be positive");
  const double floor = opts.floor_ratio * energy.front();
  const double span = times.back() - times.front();
  const double t0 = times.front() + opts.skip_fraction * span;
  DecayFit first = fit_window(times, energy, t0, floor);
  if (first.rate == 0.0) return first;
  const double t1 = std::max(t0, times.front() + 2.0 / std::abs(first.rate));
  if (t1 <= t0) return first;
  try {
    return fit_window(times, energy, t1, floor);
  } catch (const AnalysisError&) {
    return first;  // the refined window would be empty; keep the first pass
  }
}

DecayFit estimate_decay_rate(const Trajectory& traj, const DecayFitOptions& opts) {
  return estimate_decay_rate(traj.times, traj.energy, opts);
}

AbscissaReport spectral_abscissa(const std::vector<EigenRecord>& records) {
  if (records.empty()) throw AnalysisError("spectral_abscissa: no records");
  AbscissaReport r;
  r.value = records.front().lambda.real();
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].lambda.real() > r.value) {
      r.value = records[i].lambda.real();
      r.attained_by = i;
    }
  return r;
}

AbscissaReport spectral_abscissa(const Spectrum& spectrum) {
  AbscissaReport r = spectral_abscissa(spectrum.records);
  if (!spectrum.gaps.empty())
    r.warning = std::to_string(spectrum.gaps.size()) + " asymptotic seed(s) did not converge";
  else if (spectrum.swept.re_max <= 0.0)
    r.warning = "low-mode sweep did not cover the right half-plane";
  return r;
}

namespace {

std::vector<const NetworkState*> eigenvectors(const std::vector<EigenRecord>& records, const char* who) {
  std::vector<const NetworkState*> vecs;
  for (const auto& r : records)
    for (const auto& x : r.eigenfunctions) vecs.push_back(&x);
  if (vecs.empty()) throw AnalysisError(std::string(who) + ": records carry no eigenfunctions");
  return vecs;
}

Eigen::MatrixXcd gram_matrix(const std::vector<const NetworkState*>& vecs, const Params& p) {
  const auto n = static_cast<Eigen::Index>(vecs.size());
  Eigen::MatrixXcd G(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      G(i, j) = energy_inner_product(*vecs[static_cast<std::size_t>(i)], *vecs[static_cast<std::size_t>(j)], p);
      G(j, i) = std::conj(G(i, j));
    }
  for (Eigen::Index i = 0; i < n; ++i) G(i, i) = G(i, i).real();
  return G;
}

}  // namespace

GramReport gram_condition(const std::vector<EigenRecord>& records, const Params& p) {
  auto vecs = eigenvectors(records, "gram_condition");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram_matrix(vecs, p), Eigen::EigenvaluesOnly);
  GramReport g;
  g.size = vecs.size();
  g.min_eigenvalue = es.eigenvalues()(0);
  g.max_eigenvalue = es.eigenvalues()(es.eigenvalues().size() - 1);
  g.condition_number = g.min_eigenvalue > 0 ? g.max_eigenvalue / g.min_eigenvalue
                                            : std::numeric_limits<double>::infinity();
  return g;
}

std::vector<cd> section_coefficients(const std::vector<EigenRecord>& records, const NetworkState& x,
                                     const Params& p) {
  auto vecs = eigenvectors(records, "section_coefficients");
  Eigen::VectorXcd b(static_cast<Eigen::Index>(vecs.size()));
  for (std::size_t i = 0; i < vecs.size(); ++i)
    b(static_cast<Eigen::Index>(i)) = energy_inner_product(x, *vecs[i], p);
  // (x, phi_i) = sum_j c_j (phi_j, phi_i)
  Eigen::MatrixXcd G = gram_matrix(vecs, p).conjugate();
  Eigen::VectorXcd c = G.ldlt().solve(b);
  return {c.data(), c.data() + c.size()};
}

double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw AnalysisError("kendall_tau: need two equally long series");
  const std::size_t n = x.size();
  double score = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = (x[j] - x[i]) * (y[j] - y[i]);
      score += (d > 0) - (d < 0);
    }
  return 2.0 * score / (double(n) * double(n - 1));
}

}  // namespace pipenet

#include "pipenet/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pipenet/analysis.hpp"
#include "pipenet/inverse.hpp"
#include "pipenet/parallel.hpp"

namespace pipenet {

AsymptoticTable asymptotic_table(const Spectrum& spec, const Params& p, int n_min, int n_max) {
  AsymptoticTable out;
  for (Branch b : {Branch::one, Branch::two})
    for (int n = n_min; n <= n_max; ++n) {
      const EigenRecord* hit = nullptr;
      for (const auto& r : spec.records)
        if (r.branch == b && r.mode == n && r.lambda.imag() > 0) hit = &r;
      if (!hit) {
        out.missing.emplace_back(b, n);
        continue;
      }
      AsymptoticRow row;
      row.branch = b;
      row.n = n;
      row.lambda = hit->lambda;
      row.predicted = asymptotic_eigenvalue(n, b, p).lambda;
      row.error = std::abs(row.lambda - row.predicted);
      row.scaled_error = n * row.error;
      out.rows.push_back(row);
    }
  return out;
}

std::vector<ExpansionSample> expansion_scan(const Params& p, const std::vector<double>& abs_rho,
                                            int sector_samples, const std::vector<double>& s, int workers) {
  if (sector_samples < 1) throw std::invalid_argument("expansion_scan: sector_samples must be positive");
  std::vector<ExpansionSample> out;
  for (double r : abs_rho)
    for (int j = 0; j < sector_samples; ++j) {
      ExpansionSample e;
      e.abs_rho = r;
      e.arg_rho = sector_samples == 1 ? 0.0 : j * (std::numbers::pi / 4) / (sector_samples - 1);
      out.push_back(e);
    }
  parallel_for(out.size(), workers, [&](std::size_t i) {
    out[i].error = expansion_error(std::polar(out[i].abs_rho, out[i].arg_rho), p, s);
  });
  return out;
}

InitialKind parse_initial_kind(const std::string& name) {
  if (name == "domain") return InitialKind::domain;
  if (name == "raw") return InitialKind::raw;
  if (name == "eigenfunction") return InitialKind::eigenfunction;
  throw std::invalid_argument("unknown initial condition '" + name + "' (domain, raw, eigenfunction)");
}

std::string to_string(InitialKind k) {
  switch (k) {
    case InitialKind::domain: return "domain";
    case InitialKind::raw: return "raw";
    case InitialKind::eigenfunction: return "eigenfunction";
  }
  return {};
}

NetworkState random_initial_state(InitialKind kind, const EdgeGrid& grid, std::mt19937_64& rng, const Params& p) {
  NetworkState y = random_smooth_state(grid, rng, true);
  switch (kind) {
    case InitialKind::raw: return y;
    case InitialKind::domain: return apply_inverse(apply_inverse(y, p), p);
    case InitialKind::eigenfunction: break;
  }
  throw std::invalid_argument("random_initial_state: eigenfunction data are not random");
}

const EigenRecord* slowest_branch_one(const Spectrum& spec) {
  const EigenRecord* best = nullptr;
  for (const auto& r : spec.records)
    if (r.branch == Branch::one && r.lambda.imag() > 0 && !r.eigenfunctions.empty() &&
        (!best || r.lambda.real() > best->lambda.real()))
      best = &r;
  return best;
}

std::vector<EigenRecord> lowest_section(const Spectrum& spec, std::size_t n_vectors) {
  auto sorted = spec.records;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return std::abs(a.lambda.imag()) < std::abs(b.lambda.imag()); });
  std::vector<EigenRecord> out;
  std::size_t count = 0;
  for (auto& r : sorted) {
    if (count >= n_vectors) break;
    count += r.eigenfunctions.size();
    out.push_back(std::move(r));
  }
  return out;
}

double slow_mode_weight(const std::vector<EigenRecord>& section, const NetworkState& x, const Params& p) {
  std::size_t slow = section.size();
  for (std::size_t i = 0; i < section.size(); ++i) {
    const auto& r = section[i];
    if (r.branch == Branch::one && r.lambda.imag() > 0 && !r.eigenfunctions.empty() &&
        (slow == section.size() || r.lambda.real() > section[slow].lambda.real()))
      slow = i;
  }
  if (slow == section.size()) return 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < slow; ++i) pos += section[i].eigenfunctions.size();
  auto c = section_coefficients(section, x, p);
  return std::abs(c[pos]) * std::sqrt(energy_norm_sq(section[slow].eigenfunctions[0], p) / energy_norm_sq(x, p));
}

}  // namespace pipenet

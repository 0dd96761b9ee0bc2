#pragma once

// Experiment building blocks shared by the command-line tool and the
// acceptance checks.

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pipenet/asymptotics.hpp"
#include "pipenet/spectral.hpp"

namespace pipenet {

struct AsymptoticRow {
  Branch branch = Branch::one;
  int n = 0;
  cd lambda;
  /// -m/kappa + i(tau_n^2 + c/2).
  cd predicted;
  double error = 0.0;
  /// n * error.
  double scaled_error = 0.0;
};

/// Compares the seeded roots with mode numbers n_min..n_max (upper half
/// plane) against the closed-form eigenvalues. Modes that the search did not
/// reach are listed in `missing` as (branch, n).
struct AsymptoticTable {
  std::vector<AsymptoticRow> rows;
  std::vector<std::pair<Branch, int>> missing;
};
AsymptoticTable asymptotic_table(const Spectrum& spec, const Params& p, int n_min, int n_max);

struct ExpansionSample {
  double abs_rho = 0.0;
  double arg_rho = 0.0;
  ExpansionError error;
};

/// expansion_error at |rho| in abs_rho and arg rho = j (pi/4) / (sector_samples - 1).
std::vector<ExpansionSample> expansion_scan(const Params& p, const std::vector<double>& abs_rho,
                                            int sector_samples, const std::vector<double>& s, int workers = 1);

enum class InitialKind {
  /// T^{-2} y for a random real smooth y: random data in the generator domain.
  domain,
  /// A random real smooth state, not in the domain.
  raw,
  /// Real part of the slowest BRANCH1 eigenfunction.
  eigenfunction,
};

InitialKind parse_initial_kind(const std::string& name);
std::string to_string(InitialKind k);

/// For domain and raw kinds; eigenfunction data come from slowest_branch_one.
NetworkState random_initial_state(InitialKind kind, const EdgeGrid& grid, std::mt19937_64& rng, const Params& p);

/// BRANCH1 record with Im lambda > 0 closest to the imaginary axis, or null.
const EigenRecord* slowest_branch_one(const Spectrum& spec);

/// Records with the smallest |Im lambda| until they carry at least
/// n_vectors eigenfunctions.
std::vector<EigenRecord> lowest_section(const Spectrum& spec, std::size_t n_vectors);

/// |coefficient| of the slowest BRANCH1 eigenfunction (Im lambda > 0) in the
/// Gram expansion of x over the section, divided by ||x||. Zero when the
/// section has no such record.
double slow_mode_weight(const std::vector<EigenRecord>& section, const NetworkState& x, const Params& p);

}  // namespace pipenet

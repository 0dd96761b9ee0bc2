// Batch front-end: pipenet <command> [--config PATH] [--out DIR] [--workers N] [--seed N]

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

#include "pipenet/analysis.hpp"
#include "pipenet/experiments.hpp"
#include "pipenet/inverse.hpp"
#include "pipenet/io.hpp"
#include "pipenet/parallel.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace pipenet;

namespace {

constexpr int kConfigError = 2;
constexpr int kNonconvergence = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Defaults for every section; user sections are merged key by key and unknown
// keys are rejected.
json default_config() {
  return {
      {"params", params_to_json(Params{})},
      {"seed", 1},
      {"workers", 1},
      {"spectrum", {{"n_max", 14}, {"grid_points", 513}, {"eigenfunctions", false}}},
      {"simulate",
       {{"n_elems", 16}, {"dt", 2e-3}, {"t_final", 25.0}, {"grid_points", 257}, {"initial_condition", "domain"}}},
      {"verify_asymptotics",
       {{"n_min", 10}, {"n_max", 30}, {"rho", {40.0, 80.0}}, {"sector_samples", 5}, {"s_samples", 11}}},
      {"decay", {{"runs", 5}, {"n_max", 14}, {"gram_sizes", {10, 20, 40}}}},
      {"inverse_check", {{"grids", {33, 65, 129}}, {"samples", 5}, {"rank_samples", 10}, {"rank_grid", 257}}},
  };
}

void merge(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) throw ConfigError(path.empty() ? "config must be a JSON object" : path + " must be an object");
  for (const auto& [key, value] : user.items()) {
    std::string where = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw ConfigError("unknown config key '" + where + "'");
    json& slot = base[key];
    if (slot.is_object() && key != "params") {
      merge(slot, value, where);
    } else if (key == "params") {
      slot = value;
    } else if (key == "initial_condition") {
      if (!value.is_string() && !(value.is_object() && value.size() == 1 && value.contains("csv") &&
                                  value["csv"].is_string()))
        throw ConfigError(where + " must be a name or {\"csv\": path}");
      slot = value;
    } else {
      bool same = (slot.is_number() && value.is_number()) || slot.type() == value.type();
      if (!same) throw ConfigError("config key '" + where + "' has the wrong type");
      if (slot.is_number_integer() && !value.is_number_integer())
        throw ConfigError("config key '" + where + "' must be an integer");
      slot = value;
    }
  }
}

template <class T>
T get(const json& j, const char* key, T lo, T hi, const std::string& section) {
  T v = j.at(key).get<T>();
  if (!(v >= lo && v <= hi)) {
    std::ostringstream os;
    os << section << '.' << key << " = " << v << " is outside [" << lo << ", " << hi << "]";
    throw ConfigError(os.str());
  }
  return v;
}

struct Job {
  std::string command;
  json config;
  Params params;
  int workers = 1;
  std::uint64_t seed = 1;
  fs::path out;
  std::optional<NetworkState> csv_initial;
};

void validate(Job& job) {
  const json& c = job.config;
  try {
    job.params = params_from_json(c["params"]);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  auto bad = validate_params(job.params);
  if (!bad.empty()) {
    std::string msg = "inadmissible parameters:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw ConfigError(msg);
  }
  job.workers = get<int>(c, "workers", 1, 256, "config");
  job.seed = get<std::uint64_t>(c, "seed", 0, std::numeric_limits<std::uint64_t>::max(), "config");

  const json& sp = c["spectrum"];
  get<int>(sp, "n_max", 1, 400, "spectrum");
  get<int>(sp, "grid_points", 33, 1 << 16, "spectrum");
  const json& sim = c["simulate"];
  get<int>(sim, "n_elems", 4, 512, "simulate");
  double dt = get<double>(sim, "dt", 1e-6, 1.0, "simulate");
  double tf = get<double>(sim, "t_final", dt, 1e5, "simulate");
  if (tf / dt > 5e7) throw ConfigError("simulate: t_final / dt exceeds 5e7 steps");
  get<int>(sim, "grid_points", 33, 1 << 16, "simulate");
  const json& ic = sim["initial_condition"];
  if (ic.is_string()) {
    try {
      parse_initial_kind(ic.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else {
    std::ifstream in(ic["csv"].get<std::string>());
    if (!in) throw ConfigError("cannot read initial condition file " + ic["csv"].get<std::string>());
    try {
      job.csv_initial = read_state_csv(in);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("initial condition file: ") + e.what());
    }
  }
  const json& va = c["verify_asymptotics"];
  int n_min = get<int>(va, "n_min", 1, 400, "verify_asymptotics");
  get<int>(va, "n_max", n_min, 400, "verify_asymptotics");
  get<int>(va, "sector_samples", 1, 64, "verify_asymptotics");
  get<int>(va, "s_samples", 2, 1001, "verify_asymptotics");
  for (const auto& r : va["rho"])
    if (!r.is_number() || r.get<double>() < 1.0 || r.get<double>() > 1000.0)
      throw ConfigError("verify_asymptotics.rho entries must lie in [1, 1000]");
  const json& de = c["decay"];
  get<int>(de, "runs", 1, 1000, "decay");
  get<int>(de, "n_max", 2, 400, "decay");
  for (const auto& g : de["gram_sizes"])
    if (!g.is_number_integer() || g.get<int>() < 1) throw ConfigError("decay.gram_sizes entries must be positive integers");
  const json& iv = c["inverse_check"];
  for (const auto& g : iv["grids"])
    if (!g.is_number_integer() || g.get<int>() < 33) throw ConfigError("inverse_check.grids entries must be integers >= 33");
  get<int>(iv, "samples", 1, 1000, "inverse_check");
  get<int>(iv, "rank_samples", 1, 1000, "inverse_check");
  get<int>(iv, "rank_grid", 33, 1 << 16, "inverse_check");

  if (fs::exists(job.out) && !fs::is_directory(job.out))
    throw ConfigError("output path " + job.out.string() + " exists and is not a directory");
}

// Everything a job produces, written only once the job has finished.
using Outputs = std::map<std::string, std::string>;

void write_outputs(const fs::path& dir, const Outputs& files) {
  fs::create_directories(dir);
  for (const auto& [name, text] : files) {
    std::ofstream os(dir / name, std::ios::binary);
    os << text;
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
  }
}

json header(const Job& job) { return {{"command", job.command}, {"config", job.config}}; }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// JSON numbers go through format_double so reports carry 17 digits as well.
json num(double x) { return json::parse(std::isfinite(x) ? format_double(x) : "null"); }

Spectrum compute_spectrum(const Job& job, int n_max, std::size_t grid_points, bool assemble) {
  SearchOptions o;
  o.workers = job.workers;
  o.grid_points = grid_points;
  o.assemble = assemble;
  return find_eigenvalues(job.params, n_max, o);
}

std::string gaps_csv(const Spectrum& spec) {
  std::ostringstream os;
  os << "branch,mode,Re(seed),Im(seed),reason\n";
  for (const auto& g : spec.gaps)
    os << to_string(g.branch) << ',' << g.mode << ',' << format_double(g.seed.real()) << ','
       << format_double(g.seed.imag()) << ",\"" << g.reason << "\"\n";
  return os.str();
}

int run_spectrum(const Job& job, Outputs& out) {
  const json& c = job.config["spectrum"];
  bool eig = c["eigenfunctions"].get<bool>();
  Spectrum spec = compute_spectrum(job, c["n_max"].get<int>(), c["grid_points"].get<std::size_t>(), true);
  std::ostringstream os;
  write_spectrum_csv(os, spec, header(job));
  out["spectrum.csv"] = os.str();
  if (eig)
    for (const auto& r : spec.records)
      for (std::size_t j = 0; j < r.eigenfunctions.size(); ++j) {
        std::ostringstream ef;
        json h = header(job);
        h["index"] = r.index;
        h["lambda"] = {num(r.lambda.real()), num(r.lambda.imag())};
        write_state_csv(ef, r.eigenfunctions[j], h);
        out["eigenfunction_" + std::to_string(r.index) + "_" + std::to_string(j + 1) + ".csv"] = ef.str();
      }
  if (!spec.gaps.empty()) {
    out["gaps.csv"] = gaps_csv(spec);
    throw NonConvergence(std::to_string(spec.gaps.size()) + " seeded roots did not converge (see gaps.csv)");
  }
  return 0;
}

NetworkState initial_state(const Job& job, const EdgeGrid& grid, std::mt19937_64& rng) {
  if (job.csv_initial) return *job.csv_initial;
  InitialKind kind = parse_initial_kind(job.config["simulate"]["initial_condition"].get<std::string>());
  if (kind != InitialKind::eigenfunction) return random_initial_state(kind, grid, rng, job.params);
  SearchOptions o;
  o.grid_points = grid.size();
  o.workers = job.workers;
  Spectrum spec = find_eigenvalues(job.params, 2, o);
  const EigenRecord* r = slowest_branch_one(spec);
  if (!r) throw NonConvergence("no BRANCH1 eigenfunction found for the initial condition");
  return r->eigenfunctions[0].real_part();
}

json fit_json(const DecayFit& f) {
  return {{"rate", num(f.rate)}, {"intercept", num(f.intercept)}, {"window", {num(f.t_begin), num(f.t_end)}},
          {"r_squared", num(f.r_squared)}};
}

int run_simulate(const Job& job, Outputs& out) {
  const json& c = job.config["simulate"];
  std::mt19937_64 rng(job.seed);
  NetworkState x0 = initial_state(job, EdgeGrid(c["grid_points"].get<std::size_t>()), rng);
  auto sys = assemble(job.params, c["n_elems"].get<int>());
  Trajectory tr = simulate(sys, x0, c["t_final"].get<double>(), c["dt"].get<double>());
  std::ostringstream os;
  write_trajectory_csv(os, tr, header(job));
  out["trajectory.csv"] = os.str();
  double worst = 0.0;
  for (double r : dissipation_residual(tr, job.params)) worst = std::max(worst, std::abs(r));
  json summary = header(job);
  summary["energy_initial"] = num(tr.energy.front());
  summary["energy_final"] = num(tr.energy.back());
  summary["max_dissipation_residual"] = num(worst);
  if (job.params.kappa > 0.0 && tr.energy.back() > 0.0) {
    try {
      summary["decay_fit"] = fit_json(estimate_decay_rate(tr));
    } catch (const AnalysisError& e) {
      summary["decay_fit"] = e.what();
    }
  }
  out["summary.json"] = dump(summary);
  return 0;
}

int run_verify_asymptotics(const Job& job, Outputs& out) {
  const json& c = job.config["verify_asymptotics"];
  const int n_min = c["n_min"].get<int>(), n_max = c["n_max"].get<int>();
  Spectrum spec = compute_spectrum(job, n_max + 1, 257, false);
  AsymptoticTable table = asymptotic_table(spec, job.params, n_min, n_max);

  std::ostringstream os;
  write_config_header(os, header(job));
  os << "branch,n,Re(lambda),Im(lambda),Re(lambda_asym),Im(lambda_asym),abs_err,n_abs_err\n";
  json summary = header(job);
  for (Branch b : {Branch::one, Branch::two}) {
    std::vector<double> ns, errs;
    for (const auto& r : table.rows) {
      if (r.branch != b) continue;
      os << to_string(b) << ',' << r.n << ',' << format_double(r.lambda.real()) << ','
         << format_double(r.lambda.imag()) << ',' << format_double(r.predicted.real()) << ','
         << format_double(r.predicted.imag()) << ',' << format_double(r.error) << ','
         << format_double(r.scaled_error) << '\n';
      ns.push_back(r.n);
      errs.push_back(r.scaled_error);
    }
    json s;
    s["rows"] = ns.size();
    if (ns.size() >= 2) s["kendall_tau_n_abs_err"] = num(kendall_tau(ns, errs));
    if (!errs.empty()) s["max_n_abs_err"] = num(*std::max_element(errs.begin(), errs.end()));
    summary[to_string(b)] = s;
  }
  out["asymptotics.csv"] = os.str();

  std::vector<double> s;
  const int ns = c["s_samples"].get<int>();
  for (int i = 0; i < ns; ++i) s.push_back(double(i) / (ns - 1));
  auto scan = expansion_scan(job.params, c["rho"].get<std::vector<double>>(), c["sector_samples"].get<int>(), s,
                             job.workers);
  std::ostringstream ex;
  write_config_header(ex, header(job));
  ex << "abs_rho,arg_rho,r,m,rel_err\n";
  for (const auto& e : scan)
    for (int r = 1; r <= 4; ++r)
      for (int m = 0; m <= 3; ++m)
        ex << format_double(e.abs_rho) << ',' << format_double(e.arg_rho) << ',' << r << ',' << m << ','
           << format_double(e.error.per_solution[static_cast<std::size_t>(r - 1)][static_cast<std::size_t>(m)])
           << '\n';
  out["expansion.csv"] = ex.str();
  json maxima = json::array();
  for (const auto& e : scan)
    maxima.push_back({{"abs_rho", num(e.abs_rho)}, {"arg_rho", num(e.arg_rho)}, {"max_rel", num(e.error.max_rel)}});
  summary["expansion"] = maxima;
  out["asymptotics.json"] = dump(summary);

  if (!table.missing.empty()) {
    std::ostringstream gs;
    gs << "branch,mode\n";
    for (const auto& [b, n] : table.missing) gs << to_string(b) << ',' << n << '\n';
    out["missing_modes.csv"] = gs.str();
    throw NonConvergence(std::to_string(table.missing.size()) + " modes were not found (see missing_modes.csv)");
  }
  return 0;
}

// Random data are redrawn while their slowest-mode content is below this.
constexpr double kMinSlowWeight = 1e-3;

int run_decay(const Job& job, Outputs& out) {
  const json& c = job.config["decay"];
  const json& sc = job.config["simulate"];
  const EdgeGrid grid(sc["grid_points"].get<std::size_t>());
  Spectrum spec = compute_spectrum(job, c["n_max"].get<int>(), grid.size(), true);
  AbscissaReport ab = spectral_abscissa(spec);
  const auto weight_section = lowest_section(spec, 40);

  const int runs = c["runs"].get<int>();
  std::mt19937_64 master(job.seed);
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(runs));
  for (auto& s : seeds) s = master();
  auto sys = assemble(job.params, sc["n_elems"].get<int>());
  struct Run {
    DecayFit fit;
    double e0 = 0, e1 = 0, weight = 0;
    int draws = 0;
  };
  std::vector<Run> res(seeds.size());
  parallel_for(seeds.size(), job.workers, [&](std::size_t i) {
    std::mt19937_64 rng(seeds[i]);
    Run& r = res[i];
    NetworkState x0 = initial_state(job, grid, rng);
    r.draws = 1;
    r.weight = slow_mode_weight(weight_section, x0, job.params);
    while (r.weight < kMinSlowWeight && r.draws < 10 && !job.csv_initial) {
      x0 = initial_state(job, grid, rng);
      r.weight = slow_mode_weight(weight_section, x0, job.params);
      ++r.draws;
    }
    Trajectory tr = simulate(sys, x0, sc["t_final"].get<double>(), sc["dt"].get<double>());
    r.fit = estimate_decay_rate(tr);
    r.e0 = tr.energy.front();
    r.e1 = tr.energy.back();
  });

  json report = header(job);
  report["abscissa"] = num(ab.value);
  if (!ab.warning.empty()) report["abscissa_warning"] = ab.warning;
  json runs_json = json::array();
  double slowest = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < res.size(); ++i) {
    json r = fit_json(res[i].fit);
    r["seed"] = seeds[i];
    r["draws"] = res[i].draws;
    r["slow_mode_weight"] = num(res[i].weight);
    r["energy_initial"] = num(res[i].e0);
    r["energy_final"] = num(res[i].e1);
    runs_json.push_back(r);
    slowest = std::max(slowest, res[i].fit.rate);
  }
  report["runs"] = runs_json;
  report["decay_rate"] = num(slowest);
  report["relative_gap"] = num(std::abs(slowest - ab.value) / std::abs(ab.value));

  json sections = json::array();
  for (const auto& g : c["gram_sizes"]) {
    GramReport gr = gram_condition(lowest_section(spec, g.get<std::size_t>()), job.params);
    sections.push_back({{"size", gr.size}, {"condition_number", num(gr.condition_number)},
                        {"min_eigenvalue", num(gr.min_eigenvalue)}, {"max_eigenvalue", num(gr.max_eigenvalue)}});
  }
  report["gram"] = sections;
  out["decay.json"] = dump(report);
  return 0;
}

int run_inverse_check(const Job& job, Outputs& out) {
  const json& c = job.config["inverse_check"];
  auto grids = c["grids"].get<std::vector<std::size_t>>();
  const int samples = c["samples"].get<int>();
  std::mt19937_64 master(job.seed);
  std::ostringstream os;
  write_config_header(os, header(job));
  os << "sample,n_points,rel_error,observed_order\n";
  for (int k = 0; k < samples; ++k) {
    std::uint64_t seed = master();
    double prev = 0.0;
    for (std::size_t n : grids) {
      std::mt19937_64 rng(seed);
      double e = round_trip_error(random_smooth_state(EdgeGrid(n), rng), job.params);
      os << k + 1 << ',' << n << ',' << format_double(e) << ','
         << (prev > 0.0 ? format_double(std::log2(prev / e)) : "") << '\n';
      prev = e;
    }
  }
  out["inverse.csv"] = os.str();
  Eigen::VectorXd sv = feedback_singular_values(job.params, EdgeGrid(c["rank_grid"].get<std::size_t>()),
                                                c["rank_samples"].get<int>(), master);
  json report = header(job);
  json svj = json::array();
  for (double x : sv) svj.push_back(num(x));
  report["feedback_singular_values"] = svj;
  out["inverse.json"] = dump(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral analysis and simulation of a star network of three fluid-conveying pipes"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::string config_path, out_dir = "out";
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON job configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--workers", workers, "worker threads (overrides the config)");
  app.add_option("--seed", seed, "random seed (overrides the config)");
  for (const char* name : {"spectrum", "simulate", "verify-asymptotics", "decay", "inverse-check"})
    app.add_subcommand(name);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  Job job;
  job.command = app.get_subcommands().front()->get_name();
  job.out = out_dir;
  Outputs outputs;
  try {
    job.config = default_config();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      json user;
      try {
        user = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
      }
      merge(job.config, user, "");
    }
    if (workers) job.config["workers"] = *workers;
    if (seed) job.config["seed"] = *seed;
    validate(job);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  int status = 0;
  try {
    if (job.command == "spectrum") status = run_spectrum(job, outputs);
    else if (job.command == "simulate") status = run_simulate(job, outputs);
    else if (job.command == "verify-asymptotics") status = run_verify_asymptotics(job, outputs);
    else if (job.command == "decay") status = run_decay(job, outputs);
    else status = run_inverse_check(job, outputs);
  } catch (const NonConvergence& e) {
    std::cerr << "nonconvergence: " << e.what() << '\n';
    status = kNonconvergence;
  } catch (const SimulationError& e) {
    outputs["diagnostics.json"] = dump({{"command", job.command}, {"error", e.what()}});
    std::cerr << "nonconvergence: " << e.what() << '\n';
    status = kNonconvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  try {
    write_outputs(job.out, outputs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return status;
}

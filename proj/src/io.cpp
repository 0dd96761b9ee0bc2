#include "pipenet/io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace pipenet {

std::string format_double(double x) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

nlohmann::json params_to_json(const Params& p) {
  return {{"alpha", p.alpha}, {"kappa", p.kappa}, {"beta", p.beta}, {"eta", p.eta}, {"gamma", p.gamma}};
}

Params params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("params must be a JSON object");
  Params p;
  for (const auto& [key, value] : j.items()) {
    double* slot = key == "alpha"   ? &p.alpha
                   : key == "kappa" ? &p.kappa
                   : key == "beta"  ? &p.beta
                   : key == "eta"   ? &p.eta
                   : key == "gamma" ? &p.gamma
                                    : nullptr;
    if (!slot) throw FormatError("unknown parameter '" + key + "'");
    if (!value.is_number()) throw FormatError("parameter '" + key + "' must be a number");
    *slot = value.get<double>();
  }
  return p;
}

void write_config_header(std::ostream& os, const nlohmann::json& config) {
  if (!config.is_null()) os << "# " << config.dump() << '\n';
}

void write_state_csv(std::ostream& os, const NetworkState& x, const nlohmann::json& config) {
  write_config_header(os, config);
  os << "edge,s,Re(w),Im(w),Re(v),Im(v)\n";
  const auto& g = x.grid();
  for (int k = 0; k < kEdges; ++k) {
    const auto& e = x.edge(k);
    for (std::size_t i = 0; i < g.size(); ++i)
      os << k + 1 << ',' << format_double(g.node(i)) << ',' << format_double(e.w[i].real()) << ','
         << format_double(e.w[i].imag()) << ',' << format_double(e.v[i].real()) << ','
         << format_double(e.v[i].imag()) << '\n';
  }
}

NetworkState read_state_csv(std::istream& is, double snap_tol) {
  std::array<EdgeField, kEdges> edges;
  std::array<std::vector<double>, kEdges> nodes;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("edge,s,", 0) != 0) throw FormatError("missing state CSV header");
      header = true;
      continue;
    }
    std::array<double, 6> f{};
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= f.size()) throw FormatError("too many columns on line " + std::to_string(lineno));
      auto r = std::from_chars(cell.data(), cell.data() + cell.size(), f[c]);
      if (r.ec != std::errc() || r.ptr != cell.data() + cell.size())
        throw FormatError("bad number on line " + std::to_string(lineno));
      ++c;
    }
    if (c != f.size()) throw FormatError("expected 6 columns on line " + std::to_string(lineno));
    int k = static_cast<int>(f[0]);
    if (k < 1 || k > kEdges || f[0] != k) throw FormatError("bad edge number on line " + std::to_string(lineno));
    auto& e = edges[static_cast<std::size_t>(k - 1)];
    nodes[static_cast<std::size_t>(k - 1)].push_back(f[1]);
    e.w.emplace_back(f[2], f[3]);
    e.v.emplace_back(f[4], f[5]);
  }
  if (!header) throw FormatError("empty state CSV");
  const std::size_t n = nodes[0].size();
  for (const auto& s : nodes)
    if (s.size() != n) throw FormatError("edges have different sample counts");
  if (n < EdgeGrid::kMinPoints) throw FormatError("too few samples per edge");
  EdgeGrid grid(n);
  for (const auto& s : nodes)
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(s[i] - grid.node(i)) > 1e-9) throw FormatError("samples are not on a uniform grid");
  try {
    return NetworkState(grid, edges);
  } catch (const StateError&) {
    double defect = 0.0;
    NetworkState snapped = NetworkState::snapped(grid, edges, &defect);
    if (defect > snap_tol * (1.0 + snapped.max_abs())) throw;
    return snapped;
  }
}

void write_spectrum_csv(std::ostream& os, const Spectrum& spec, const nlohmann::json& config) {
  write_config_header(os, config);
  os << "index,branch,Re(lambda),Im(lambda),residual,multiplicity,abs_B\n";
  for (const auto& r : spec.records)
    os << r.index << ',' << to_string(r.branch) << (r.degenerate ? "|DEGENERATE" : "") << ','
       << format_double(r.lambda.real()) << ',' << format_double(r.lambda.imag()) << ','
       << format_double(r.residual) << ',' << r.multiplicity << ',' << format_double(r.abs_bform) << '\n';
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const nlohmann::json& config) {
  write_config_header(os, config);
  os << "t,E,Re(w_vertex),v1p0,v2p0,v3p0\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    os << format_double(tr.times[i]) << ',' << format_double(tr.energy[i]) << ','
       << format_double(tr.vertex_displacement[i].real());
    for (cd b : tr.boundary_obs[i]) os << ',' << format_double(b.real());
    os << '\n';
  }
}

}  // namespace pipenet

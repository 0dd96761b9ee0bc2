#pragma once

// Text serialization: CSV for states, spectra and trajectories, flat JSON for
// parameters. Floats are written with 17 significant digits.

#include <iosfwd>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "pipenet/simulator.hpp"
#include "pipenet/spectral.hpp"

namespace pipenet {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_double(double x);

nlohmann::json params_to_json(const Params& p);
/// Missing keys keep their defaults; unknown keys and non-numeric values
/// throw FormatError. The result is not validated.
Params params_from_json(const nlohmann::json& j);

/// Writes "# " followed by the compact JSON on one line. Every CSV file
/// starts with such a line so the producing configuration travels with it.
void write_config_header(std::ostream& os, const nlohmann::json& config);

/// Columns edge,s,Re(w),Im(w),Re(v),Im(v); edges numbered 1..3.
void write_state_csv(std::ostream& os, const NetworkState& x, const nlohmann::json& config = {});
/// Inverse of write_state_csv; lines starting with '#' are skipped. Samples
/// violating the constraints by less than snap_tol (relative) are snapped
/// onto them, larger violations throw StateError.
NetworkState read_state_csv(std::istream& is, double snap_tol = 1e-8);

/// Columns index,branch,Re(lambda),Im(lambda),residual,multiplicity,abs_B.
void write_spectrum_csv(std::ostream& os, const Spectrum& spec, const nlohmann::json& config = {});

/// Columns t,E,Re(w_vertex),v1p0,v2p0,v3p0 where vkp0 = Re v_k'(0).
void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const nlohmann::json& config = {});

}  // namespace pipenet

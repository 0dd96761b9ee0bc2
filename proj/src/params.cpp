#include "pipenet/params.hpp"

#include <cmath>
#include <sstream>

namespace pipenet {

std::vector<std::string> validate_params(const Params& p) {
  std::vector<std::string> out;
  auto finite = [&](double v, const char* name) {
    if (!std::isfinite(v)) out.push_back(std::string(name) + " is not finite");
    return std::isfinite(v);
  };
  bool ok = finite(p.alpha, "alpha") & finite(p.kappa, "kappa") & finite(p.beta, "beta") &
            finite(p.eta, "eta") & finite(p.gamma, "gamma");
  if (!ok) return out;
  if (p.alpha < 0) out.push_back("alpha < 0");
  if (p.kappa < 0) out.push_back("kappa < 0");
  if (!(p.beta > 0 && p.beta < 1)) out.push_back("beta outside (0,1)");
  if (p.eta < 0) out.push_back("eta < 0");
  if (!(p.gamma > 0)) out.push_back("gamma <= 0");
  if (!(p.gamma > p.eta * p.eta)) out.push_back("gamma <= eta^2");
  return out;
}

void require_valid(const Params& p) {
  auto v = validate_params(p);
  if (v.empty()) return;
  std::ostringstream msg;
  msg << "inadmissible parameters:";
  for (const auto& s : v) msg << ' ' << s << ';';
  throw ParameterError(msg.str());
}

}  // namespace pipenet

#include "pipenet/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pipenet/asymptotics.hpp"
#include "pipenet/numerics.hpp"
#include "pipenet/parallel.hpp"

namespace pipenet {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double a) {
  while (a > kPi) a -= 2 * kPi;
  while (a <= -kPi) a += 2 * kPi;
  return a;
}

// Delta(z1) / Delta(z0) without forming either value.
cd ratio(const CharDet& num, const CharDet& den) {
  return num.mantissa / den.mantissa * std::exp(num.log_scale - den.log_scale);
}

Eigen::Matrix2cd pinned_block(const SubspaceShot& shot) {
  const Mat42& Q = shot.q.back();
  Eigen::Matrix2cd K;
  K.row(0) = Q.row(0);
  K.row(1) = Q.row(2);
  return K;
}

double normalised_residual(const Eigen::Matrix2cd& K) {
  const double n0 = K.row(0).norm(), n1 = K.row(1).norm();
  if (n0 == 0.0 || n1 == 0.0) return 0.0;
  return std::abs(K.determinant()) / (n0 * n1);
}

Branch other(Branch b) { return b == Branch::one ? Branch::two : Branch::one; }

double rho_length(cd z0, cd z1) {
  // |d rho| = |d lambda| / (2 |rho|); bound |rho| from below on the segment
  const cd d = z1 - z0;
  double t = d == cd(0) ? 0.0 : std::clamp(-(std::conj(d) * z0).real() / std::norm(d), 0.0, 1.0);
  const double closest = std::abs(z0 + t * d);
  return std::abs(d) / (2.0 * std::sqrt(std::max(1.0, closest)));
}

struct ContourWalker {
  Branch branch;
  const Params& p;
  const ContourOptions& opts;
  int side = 0;

  double phase(cd z) const {
    CharDet d = char_det(SpectralPoint::from_lambda(z), branch, p, opts.integrator);
    if (d.residual < opts.boundary_residual || d.mantissa == cd(0)) throw_close(z);
    return std::arg(d.mantissa);
  }

  [[noreturn]] void throw_close(cd z) const {
    std::ostringstream msg;
    msg << "root on or near the contour at lambda=" << z.real() << (z.imag() < 0 ? "" : "+") << z.imag()
        << "i (side " << side << "); use a jittered rectangle";
    throw BoundaryTooClose(msg.str());
  }

  double increment(cd a, double pa, cd b, double pb, int depth) const {
    double d = wrap_angle(pb - pa);
    if (std::abs(d) < kPi / 2) return d;
    if (depth >= opts.max_depth) throw_close(0.5 * (a + b));
    cd m = 0.5 * (a + b);
    double pm = phase(m);
    return increment(a, pa, m, pm, depth + 1) + increment(m, pm, b, pb, depth + 1);
  }

  double edge(cd a, cd b) {
    const int n = std::max(2, static_cast<int>(std::ceil(rho_length(a, b) / opts.rho_spacing)));
    double total = 0.0;
    cd prev = a;
    double pprev = phase(a);
    for (int i = 1; i <= n; ++i) {
      cd z = a + (b - a) * (static_cast<double>(i) / n);
      double pz = phase(z);
      total += increment(prev, pprev, z, pz, 0);
      prev = z;
      pprev = pz;
    }
    return total;
  }
};

}  // namespace

Mat42 vertex_basis(const SpectralPoint& sp, Branch b, const Params& p, Equation eq) {
  const cd lam = sp.lambda;
  const cd moment = p.alpha + p.kappa * lam;
  Mat42 U = Mat42::Zero();
  if (b == Branch::one) {
    // phi''' = a phi' - beta eta lambda phi (direct), + for the adjoint
    const double sign = eq == Equation::direct ? -1.0 : 1.0;
    U(0, 0) = 1.0;
    U(3, 0) = sign * p.gyro() * lam;
    U(1, 1) = 1.0;
    U(2, 1) = moment;
    U(3, 1) = p.tension();
  } else {
    U(1, 0) = 1.0;
    U(2, 0) = moment;
    U(3, 1) = 1.0;
  }
  return U;
}

CharDet char_det(const SpectralPoint& sp, Branch b, const Params& p, const IntegratorOptions& opts) {
  SubspaceShot shot = shoot_subspace(sp, p, Equation::direct, vertex_basis(sp, b, p, Equation::direct),
                                     nullptr, opts);
  Eigen::Matrix2cd K = pinned_block(shot);
  CharDet out;
  out.mantissa = K.determinant();
  out.log_scale = shot.log_scale + 2.0 * std::log(shot.sigma);
  out.residual = normalised_residual(K);
  return out;
}

Mat4 canonical_char_matrix(const FundamentalData& fd, Branch b, const Params& p) {
  const cd lam = fd.point.lambda;
  Mat4 D;
  for (int r = 0; r < 4; ++r) {
    D(0, r) = fd.at_one(0, r);
    D(1, r) = fd.at_one(2, r);
    D(2, r) = fd.at_zero(2, r) - (p.alpha + p.kappa * lam) * fd.at_zero(1, r);
    D(3, r) = b == Branch::one
                  ? fd.at_zero(3, r) - p.tension() * fd.at_zero(1, r) + p.gyro() * lam * fd.at_zero(0, r)
                  : fd.at_zero(0, r);
  }
  return D;
}

int winding_number(const Box& box, Branch b, const Params& p, const ContourOptions& opts) {
  if (!(box.re_min < box.re_max && box.im_min < box.im_max))
    throw std::invalid_argument("winding_number: empty rectangle");
  require_valid(p);
  ContourWalker w{b, p, opts};
  const cd c0(box.re_min, box.im_min), c1(box.re_max, box.im_min), c2(box.re_max, box.im_max),
      c3(box.re_min, box.im_max);
  double total = 0.0;
  w.side = 0;
  total += w.edge(c0, c1);
  w.side = 1;
  total += w.edge(c1, c2);
  w.side = 2;
  total += w.edge(c2, c3);
  w.side = 3;
  total += w.edge(c3, c0);
  const double turns = total / (2 * kPi);
  const long k = std::lround(turns);
  if (std::abs(turns - static_cast<double>(k)) > 0.05)
    throw BoundaryTooClose("winding_number: non-integer winding " + std::to_string(turns));
  return static_cast<int>(k);
}

int count_roots_in_box(const Box& box, Branch b, const Params& p, const ContourOptions& opts) {
  const int w = winding_number(box, b, p, opts);
  return b == Branch::two ? 2 * w : w;
}

NewtonResult refine_root(cd start, Branch b, const Params& p, NewtonVariable var,
                         const IntegratorOptions& opts, int max_iter) {
  auto to_lambda = [&](cd z) { return var == NewtonVariable::rho ? cd(0, 1) * z * z : z; };
  auto eval = [&](cd z) {
    cd lam = to_lambda(z);
    SpectralPoint sp = var == NewtonVariable::rho ? SpectralPoint{lam, z} : SpectralPoint::from_lambda(lam);
    return char_det(sp, b, p, opts);
  };
  auto scale_of = [&](cd z) {
    // natural length scale of the determinant's variation in z
    return var == NewtonVariable::rho ? 1.0 : std::max(1.0, std::sqrt(std::abs(z)));
  };

  NewtonResult res;
  cd z = start;
  CharDet fz = eval(z);
  cd z_prev{};
  CharDet f_prev{};
  bool have_prev = false;
  for (int it = 1; it <= max_iter; ++it) {
    res.iterations = it;
    const double L = scale_of(z);
    const double h = 1e-6 * L;
    cd dlog;  // Delta'/Delta
    {
      CharDet fp = eval(z + h), fm = eval(z - h);
      dlog = (ratio(fp, fz) - ratio(fm, fz)) / (2.0 * h);
    }
    if (!std::isfinite(std::abs(dlog)) || dlog == cd(0)) {
      if (!have_prev) break;
      // secant on Delta: slope (Delta(z) - Delta(z_prev)) / (z - z_prev) / Delta(z)
      dlog = (1.0 - ratio(f_prev, fz)) / (z - z_prev);
      if (!std::isfinite(std::abs(dlog)) || dlog == cd(0)) break;
    }
    cd step = -1.0 / dlog;
    if (std::abs(step) > L) step *= L / std::abs(step);
    z_prev = z;
    f_prev = fz;
    have_prev = true;
    z += step;
    fz = eval(z);
    if (std::abs(step) < 1e-12 * std::max(1.0, std::abs(z))) {
      res.converged = true;
      break;
    }
  }
  res.lambda = to_lambda(z);
  res.residual = fz.residual;
  if (!res.converged && fz.residual < 1e-10) res.converged = true;
  return res;
}

EdgeProfile edge_profile(const SpectralPoint& sp, Branch b, const Params& p, Equation eq,
                         const EdgeGrid& grid, const IntegratorOptions& opts) {
  SubspaceShot shot = shoot_subspace(sp, p, eq, vertex_basis(sp, b, p, eq), &grid, opts);
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(pinned_block(shot), Eigen::ComputeFullV);
  Eigen::Vector2cd d = svd.matrixV().col(1);
  EdgeProfile prof{grid, sample_subspace(shot, d), {}};
  Vec4 a;
  for (int m = 0; m < 4; ++m) a(m) = prof.d[m][0];
  // fix the phase: the largest initial value becomes real positive
  Eigen::Index k;
  a.cwiseAbs().maxCoeff(&k);
  const cd phase = std::abs(a(k)) / a(k) / a.norm();
  for (auto& arr : prof.d)
    for (auto& z : arr) z *= phase;
  for (int m = 0; m < 4; ++m) prof.at_zero[m] = a(m) * phase;
  return prof;
}

double edge_energy(const EdgeProfile& prof, cd lambda, const Params& p) {
  const std::size_t n = prof.grid.size();
  const double h = prof.grid.spacing();
  std::vector<double> e2(n), e1(n), e0(n);
  for (std::size_t i = 0; i < n; ++i) {
    e2[i] = std::norm(prof.d[2][i]);
    e1[i] = std::norm(prof.d[1][i]);
    e0[i] = std::norm(prof.d[0][i]);
  }
  return numerics::simpson<double>(e2, h) + p.tension() * numerics::simpson<double>(e1, h) +
         p.alpha * std::norm(prof.d[1][0]) + std::norm(lambda) * numerics::simpson<double>(e0, h);
}

void assemble_eigenfunction(EigenRecord& rec, const Params& p, const EdgeGrid& grid,
                            const IntegratorOptions& opts) {
  const SpectralPoint sp{rec.lambda, rec.rho};
  EdgeProfile prof = edge_profile(sp, rec.branch, p, Equation::direct, grid, opts);
  rec.null_coeffs = prof.at_zero;
  double peak2 = 0.0;
  for (auto z : prof.d[2]) peak2 = std::max(peak2, std::abs(z));
  rec.moment_residual =
      std::abs(prof.d[2][0] - (p.alpha + p.kappa * rec.lambda) * prof.d[1][0]) / std::max(peak2, 1e-300);

  std::vector<std::array<double, kEdges>> weights;
  if (rec.branch == Branch::one)
    weights.push_back({1.0, 1.0, 1.0});
  else {
    weights.push_back({1.0, -0.5, -0.5});
    weights.push_back({0.0, 1.0, -1.0});
  }
  const double e_edge = edge_energy(prof, rec.lambda, p);
  rec.eigenfunctions.clear();
  rec.assembly_defect = 0.0;
  for (const auto& c : weights) {
    double wsum = 0.0;
    for (double x : c) wsum += x * x;
    const double scale = 1.0 / std::sqrt(wsum * e_edge);
    std::array<EdgeField, kEdges> e;
    for (int k = 0; k < kEdges; ++k) {
      auto& f = e[static_cast<std::size_t>(k)];
      f.w.resize(grid.size());
      f.v.resize(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) {
        f.w[i] = c[static_cast<std::size_t>(k)] * scale * prof.d[0][i];
        f.v[i] = rec.lambda * f.w[i];
      }
    }
    double defect = 0.0;
    NetworkState x = NetworkState::snapped(grid, std::move(e), &defect);
    rec.assembly_defect = std::max(rec.assembly_defect, defect);
    x = x.scaled(1.0 / std::sqrt(energy_norm_sq(x, p)));
    rec.eigenfunctions.push_back(std::move(x));
  }
}

cd bform(EigenRecord& rec, const Params& p, const EdgeGrid& grid, const IntegratorOptions& opts) {
  const SpectralPoint sp{rec.lambda, rec.rho};
  EdgeProfile phi = edge_profile(sp, rec.branch, p, Equation::direct, grid, opts);
  EdgeProfile psi = edge_profile(sp, rec.branch, p, Equation::adjoint, grid, opts);
  const double nphi = std::sqrt(edge_energy(phi, rec.lambda, p));
  const double npsi = std::sqrt(edge_energy(psi, rec.lambda, p));
  const std::size_t n = grid.size();
  const double h = grid.spacing();
  cvec t2(n), t1(n), t0(n);
  for (std::size_t i = 0; i < n; ++i) {
    t2[i] = phi.d[2][i] * psi.d[2][i];
    t1[i] = phi.d[1][i] * psi.d[1][i];
    t0[i] = phi.d[0][i] * psi.d[0][i];
  }
  cd B = numerics::simpson<cd>(t2, h) + p.tension() * numerics::simpson<cd>(t1, h) +
         p.alpha * phi.d[1][0] * psi.d[1][0] - rec.lambda * rec.lambda * numerics::simpson<cd>(t0, h);
  B /= nphi * npsi;
  rec.bform = B;
  rec.abs_bform = std::abs(B);
  return B;
}

void enumerate_records(std::vector<EigenRecord>& records) {
  std::sort(records.begin(), records.end(), [](const EigenRecord& a, const EigenRecord& b) {
    if (a.lambda.imag() != b.lambda.imag()) return a.lambda.imag() < b.lambda.imag();
    return a.lambda.real() > b.lambda.real();
  });
  std::vector<EigenRecord*> upper;
  for (auto& r : records)
    if (r.lambda.imag() >= 0) upper.push_back(&r);
  for (std::size_t i = 0; i < upper.size(); ++i) upper[i]->index = static_cast<int>(i + 1);
  // conjugates mirror the index of their partner
  for (auto& r : records) {
    if (r.lambda.imag() >= 0) continue;
    const cd target = std::conj(r.lambda);
    double best = std::numeric_limits<double>::infinity();
    for (auto* u : upper) {
      const double d = std::abs(u->lambda - target);
      if (d < best && u->branch == r.branch) {
        best = d;
        r.index = -u->index;
      }
    }
  }
}

namespace {

struct Root {
  cd lambda;
  std::optional<int> mode;
  std::optional<cd> seed;
};

class LowModeSweep {
 public:
  LowModeSweep(Branch b, const Params& p, const SearchOptions& opts) : b_(b), p_(p), opts_(opts) {}

  std::vector<Root> run(Box region) {
    const double height = 2 * kPi * std::max(10.0, std::sqrt(p_.gamma));
    double bottom = region.im_min;
    while (bottom < region.im_max) {
      double top = std::min(bottom + height, region.im_max);
      for (int attempt = 0;; ++attempt) {
        Box box{region.re_min, region.re_max, bottom, top};
        try {
          const int count = winding_number(box, b_, p_, opts_.contour);
          isolate(box, count, 0);
          break;
        } catch (const BoundaryTooClose&) {
          if (attempt >= 6 || top >= region.im_max) throw;
          top += 0.173 * (attempt + 1);
        }
      }
      bottom = top;
    }
    return roots_;
  }

 private:
  void isolate(const Box& box, int count, int depth) {
    if (count <= 0) {
      if (count < 0) throw std::runtime_error("low-mode sweep: negative winding number");
      return;
    }
    if (count == 1) {
      const cd centre(0.5 * (box.re_min + box.re_max), 0.5 * (box.im_min + box.im_max));
      NewtonResult nr = refine_root(centre, b_, p_, NewtonVariable::lambda, opts_.contour.integrator);
      const double sx = 0.05 * (box.re_max - box.re_min), sy = 0.05 * (box.im_max - box.im_min);
      if (nr.converged && nr.lambda.real() >= box.re_min - sx && nr.lambda.real() <= box.re_max + sx &&
          nr.lambda.imag() >= box.im_min - sy && nr.lambda.imag() <= box.im_max + sy) {
        roots_.push_back({nr.lambda, std::nullopt, std::nullopt});
        return;
      }
    }
    if (depth > 40) throw std::runtime_error("low-mode sweep: could not isolate roots");
    // split across the longer side measured in rho
    const cd c0(box.re_min, box.im_min);
    const double lx = rho_length(c0, cd(box.re_max, box.im_min));
    const double ly = rho_length(c0, cd(box.re_min, box.im_max));
    const bool vertical_cut = lx >= ly;
    for (double frac : {0.5, 0.46, 0.55, 0.38, 0.63}) {
      Box a = box, b = box;
      if (vertical_cut) {
        a.re_max = b.re_min = box.re_min + frac * (box.re_max - box.re_min);
      } else {
        a.im_max = b.im_min = box.im_min + frac * (box.im_max - box.im_min);
      }
      try {
        const int ca = winding_number(a, b_, p_, opts_.contour);
        const int cb = winding_number(b, b_, p_, opts_.contour);
        if (ca + cb != count) continue;
        isolate(a, ca, depth + 1);
        isolate(b, cb, depth + 1);
        return;
      } catch (const BoundaryTooClose&) {
      }
    }
    throw std::runtime_error("low-mode sweep: no admissible split of a box");
  }

  Branch b_;
  const Params& p_;
  const SearchOptions& opts_;
  std::vector<Root> roots_;
};

double sweep_ceiling(Branch b, const Params& p, int n_max, const SearchOptions& opts) {
  const int k = p.kappa > 0 ? std::max(opts.n_low + 1, 0) : n_max;
  const double lo = asymptotic_eigenvalue(k, b, p).lambda.imag();
  const double hi = asymptotic_eigenvalue(k + 1, b, p).lambda.imag();
  return 0.5 * (lo + hi);
}

}  // namespace

Spectrum find_eigenvalues(const Params& p, int n_max, const SearchOptions& opts) {
  require_valid(p);
  if (n_max < 1) throw std::invalid_argument("find_eigenvalues: n_max must be >= 1");
  Spectrum out;
  const double re_min =
      std::isnan(opts.re_min) ? -(std::max(5.0, p.kappa > 0 ? 5.0 / p.kappa : 5.0) + 1.0) : opts.re_min;
  const IntegratorOptions& iopt = opts.contour.integrator;

  std::vector<std::pair<Branch, Root>> found;
  for (Branch b : {Branch::one, Branch::two}) {
    const double ceiling = sweep_ceiling(b, p, n_max, opts);
    out.sweep_ceiling[static_cast<int>(b) - 1] = ceiling;
    Box region{re_min, opts.re_max, opts.im_floor, ceiling};
    out.swept = {re_min, opts.re_max, opts.im_floor, std::max(out.swept.im_max, ceiling)};
    for (auto& r : LowModeSweep(b, p, opts).run(region)) found.push_back({b, r});

    if (p.kappa > 0 && n_max >= opts.n_low) {
      const std::size_t nseeds = static_cast<std::size_t>(n_max - opts.n_low + 1);
      std::vector<std::optional<Root>> seeded(nseeds);
      std::vector<std::optional<SearchGap>> gaps(nseeds);
      parallel_for(nseeds, opts.workers, [&](std::size_t i) {
        const int n = opts.n_low + static_cast<int>(i);
        const cd seed = asymptotic_eigenvalue(n, b, p).rho;
        try {
          NewtonResult nr = refine_root(seed, b, p, NewtonVariable::rho, iopt);
          const cd rho = SpectralPoint::from_lambda(nr.lambda).rho;
          if (!nr.converged) {
            gaps[i] = SearchGap{b, n, seed, "Newton iteration did not converge"};
          } else if (std::abs(rho - seed) > 0.5) {
            gaps[i] = SearchGap{b, n, seed, "Newton iteration left the seed neighbourhood"};
          } else {
            seeded[i] = Root{nr.lambda, n, cd(0, 1) * seed * seed};
          }
        } catch (const IntegrationError& e) {
          gaps[i] = SearchGap{b, n, seed, e.what()};
        }
      });
      for (std::size_t i = 0; i < nseeds; ++i) {
        if (seeded[i]) found.push_back({b, *seeded[i]});
        if (gaps[i]) out.gaps.push_back(*gaps[i]);
      }
    }
  }

  // fold the lower strip onto the upper half plane and merge duplicates
  std::vector<std::pair<Branch, Root>> unique;
  for (auto& [b, r] : found) {
    if (r.lambda.imag() < 0) r.lambda = std::conj(r.lambda);
    const cd rho = SpectralPoint::from_lambda(r.lambda).rho;
    auto dup = std::find_if(unique.begin(), unique.end(), [&](const auto& u) {
      return u.first == b && std::abs(SpectralPoint::from_lambda(u.second.lambda).rho - rho) < 1e-6;
    });
    if (dup == unique.end()) {
      unique.push_back({b, r});
    } else if (r.mode && !dup->second.mode) {
      dup->second.mode = r.mode;
      dup->second.seed = r.seed;
    }
  }

  std::vector<EigenRecord> upper(unique.size());
  const EdgeGrid grid(opts.grid_points);
  parallel_for(unique.size(), opts.workers, [&](std::size_t i) {
    const auto& [b, r] = unique[i];
    EigenRecord& rec = upper[i];
    const SpectralPoint sp = SpectralPoint::from_lambda(r.lambda);
    rec.lambda = sp.lambda;
    rec.rho = sp.rho;
    rec.branch = b;
    rec.multiplicity = b == Branch::one ? 1 : 2;
    rec.mode = r.mode;
    rec.seed = r.seed;
    rec.residual = char_det(sp, b, p, iopt).residual;
    rec.other_residual = char_det(sp, other(b), p, iopt).residual;
    rec.degenerate = rec.other_residual < 1e-8;
    if (opts.assemble) {
      assemble_eigenfunction(rec, p, grid, iopt);
      bform(rec, p, grid, iopt);
    }
  });

  const double real_tol = 1e-9;
  for (auto& rec : upper) {
    const bool real_root = std::abs(rec.lambda.imag()) <= real_tol * (1.0 + std::abs(rec.lambda));
    out.records.push_back(rec);
    if (real_root) continue;
    EigenRecord c = rec;
    const SpectralPoint sp = SpectralPoint::from_lambda(std::conj(rec.lambda));
    c.lambda = sp.lambda;
    c.rho = sp.rho;
    c.residual = char_det(sp, c.branch, p, iopt).residual;
    if (c.seed) c.seed = std::conj(*c.seed);
    for (auto& a : c.null_coeffs) a = std::conj(a);
    for (auto& x : c.eigenfunctions) x = x.conj();
    c.bform = std::conj(c.bform);
    out.records.push_back(std::move(c));
  }
  enumerate_records(out.records);
  return out;
}

}  // namespace pipenet

#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pipenet/branch.hpp"
#include "pipenet/ode.hpp"
#include "pipenet/state.hpp"

namespace pipenet {



/// Characteristic determinant of a branch, value = mantissa * exp(log_scale).
struct CharDet {
  cd mantissa;
  double log_scale = 0.0;
  /// |det| of the boundary block built from the orthonormal solution basis,
  /// divided by its row norms. Zero exactly at an eigenvalue.
  double residual = 0.0;

  cd value() const { return mantissa * std::exp(log_scale); }
};

/// Two unscaled initial vectors spanning the solutions of the vertex rows of
/// the branch (direct problem at lambda, or adjoint problem at mu = lambda).
Mat42 vertex_basis(const SpectralPoint& sp, Branch b, const Params& p, Equation eq);

/// Shoots the vertex-condition subspace across the edge and evaluates the
/// determinant of the pinned-end rows phi(1), phi''(1). This equals the 4x4
/// determinant of the canonical fundamental system with rows
///   phi(1), phi''(1), phi''(0) - (alpha + kappa lambda) phi'(0),
///   phi'''(0) - a phi'(0) + beta eta lambda phi(0)   (BRANCH1) or phi(0) (BRANCH2)
/// without the cancellation that the canonical matrix suffers for large |rho|.
CharDet char_det(const SpectralPoint& sp, Branch b, const Params& p, const IntegratorOptions& opts = {});

/// The 4x4 matrix above assembled from canonical fundamental data, with the
/// stored column normalisation. Only its zero set is meaningful.
Mat4 canonical_char_matrix(const FundamentalData& fd, Branch b, const Params& p);

struct Box {
  double re_min, re_max, im_min, im_max;
};

/// A root lies on or too near the contour.
class BoundaryTooClose : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ContourOptions {
  /// Initial sample spacing along the contour measured in rho.
  double rho_spacing = 0.25;
  /// Maximal number of bisections of one initial contour piece.
  int max_depth = 24;
  /// Normalised residual below which a contour point counts as a root.
  double boundary_residual = 1e-9;
  IntegratorOptions integrator;
};

/// Winding number of the branch determinant around the box boundary.
int winding_number(const Box& box, Branch b, const Params& p, const ContourOptions& opts = {});

/// Number of eigenvalues of the branch in the box, counted with algebraic
/// multiplicity. Zeros of the BRANCH2 determinant are eigenvalues of double
/// multiplicity, so that count is twice the winding number.
int count_roots_in_box(const Box& box, Branch b, const Params& p, const ContourOptions& opts = {});

struct NewtonResult {
  bool converged = false;
  cd lambda;
  int iterations = 0;
  double residual = 0.0;
};

enum class NewtonVariable { lambda, rho };

/// Newton iteration on the branch determinant with central-difference
/// derivatives, in lambda or in rho = sqrt(-i lambda); falls back to secant
/// steps when the difference quotient degenerates.
NewtonResult refine_root(cd start, Branch b, const Params& p, NewtonVariable var,
                         const IntegratorOptions& opts = {}, int max_iter = 40);

struct EigenRecord {
  cd lambda;
  cd rho;
  Branch branch = Branch::one;
  /// Normalised determinant residual at the root.
  double residual = 0.0;
  /// Residual of the other branch's determinant; both small means the
  /// record is degenerate.
  double other_residual = 1.0;
  bool degenerate = false;
  int multiplicity = 1;
  /// (phi, phi', phi'', phi''')(0) of the edge profile, unit length.
  std::array<cd, 4> null_coeffs{};
  std::vector<NetworkState> eigenfunctions;
  /// Largest jump removed when snapping the assembled states onto the
  /// pinned-end and continuity constraints.
  double assembly_defect = 0.0;
  /// |phi''(0) - (alpha + kappa lambda) phi'(0)| relative to max |phi''|.
  double moment_residual = 0.0;
  cd bform;
  double abs_bform = 0.0;
  /// Enumeration index: 1, 2, ... by increasing Im among Im >= 0, negative
  /// for conjugate partners.
  int index = 0;
  /// Asymptotic mode number when the root was reached from a seed.
  std::optional<int> mode;
  std::optional<cd> seed;
};

/// Edge profile of an eigenfunction together with its derivatives.
struct EdgeProfile {
  EdgeGrid grid;
  std::array<cvec, 4> d;
  std::array<cd, 4> at_zero;
};

/// phi for the direct problem or psi (adjoint, mu = lambda) at a root, with the
/// branch vertex rows imposed. Normalised to unit length of (phi..phi''')(0).
EdgeProfile edge_profile(const SpectralPoint& sp, Branch b, const Params& p, Equation eq,
                         const EdgeGrid& grid, const IntegratorOptions& opts = {});

/// Single-edge energy with the kinetic term |lambda|^2 int |phi|^2.
double edge_energy(const EdgeProfile& prof, cd lambda, const Params& p);

/// Fills null_coeffs, eigenfunctions, moment_residual and assembly_defect.
void assemble_eigenfunction(EigenRecord& rec, const Params& p, const EdgeGrid& grid,
                            const IntegratorOptions& opts = {});

/// Bilinear pairing B(lambda) of the direct and adjoint edge profiles, both
/// scaled to unit edge energy. Stores bform and abs_bform.
cd bform(EigenRecord& rec, const Params& p, const EdgeGrid& grid, const IntegratorOptions& opts = {});

struct SearchOptions {
  /// First mode number seeded from the asymptotic formulas.
  int n_low = 8;
  /// Left edge of the low-mode sweep; NaN selects -max(5, 5/kappa) - 1.
  double re_min = std::numeric_limits<double>::quiet_NaN();
  double re_max = 0.5;
  double im_floor = -0.37;
  std::size_t grid_points = 513;
  int workers = 1;
  bool assemble = true;
  ContourOptions contour;
};

struct SearchGap {
  Branch branch;
  int mode;
  cd seed;
  std::string reason;
};

struct Spectrum {
  std::vector<EigenRecord> records;
  std::vector<SearchGap> gaps;
  /// Rectangle swept by contour counting (upper half only).
  Box swept{};
  /// Imaginary part up to which BRANCH1/BRANCH2 roots were swept.
  double sweep_ceiling[2] = {0, 0};
};

/// Eigenvalues of both branches up to asymptotic mode n_max, conjugate
/// partners included, sorted by Im lambda.
Spectrum find_eigenvalues(const Params& p, int n_max, const SearchOptions& opts = {});

/// Sort and assign enumeration indices (ascending Im, ties by Re descending).
void enumerate_records(std::vector<EigenRecord>& records);

}  // namespace pipenet

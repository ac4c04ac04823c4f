#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "otkit/exact1d.hpp"
#include "otkit/measures.hpp"
#include "otkit/sliced.hpp"

namespace otkit {

/// CDT of a 1-D density against a reference I0: values are
/// (f - Id) * sqrt(I0) at the reference cell centers, f = F_signal^-1 o F_0.
struct CdtSignal {
  GridDensity reference;
  std::vector<double> values;
};

/// Normalizes a raw signal for the transform: adds eps_rel * max(value) to
/// every cell and rescales to unit mass.
GridDensity cdt_prepare(const GridDensity& raw, double eps_rel = 1e-8);

/// Both inputs must be strictly positive 1-D densities on the same grid
/// (ZeroDensity / DimensionMismatch otherwise); they are rescaled to unit mass.
CdtSignal cdt_forward(const GridDensity& signal, const GridDensity& reference);

/// The map f = Id + values / sqrt(I0) at the reference cell centers.
MonotoneMap1D cdt_map(const CdtSignal& transformed);

/// Recovers the density on the reference grid. Cell k receives
/// F_s(right edge) - F_s(left edge) with F_s = F_0 o f^-1. The edge values
/// are fitted to the exact samples F_s(f(x_k)) = F_0(x_k); edges that no
/// sample constrains fall back on a monotone cubic for f^-1. Throws
/// NonMonotoneMap when f decreases.
GridDensity cdt_inverse(const CdtSignal& transformed);

/// sqrt(sum_k (a_k - b_k)^2 h). Throws ReferenceMismatch unless both were
/// computed against the same reference.
double cdt_distance(const CdtSignal& a, const CdtSignal& b);

struct RadonCdtImage {
  Sinogram reference_sinogram;
  std::vector<CdtSignal> values;  // one per angle
};

/// Radon transform of both images, each profile floored at
/// eps_rel * max(profile), then the CDT of every image profile against the
/// matching template profile.
RadonCdtImage radon_cdt_forward(const GridDensity& image, const GridDensity& templ,
                                std::size_t n_angles, double eps_rel = 1e-8);
/// Per-angle inverse; returns the recovered projections.
Sinogram radon_cdt_inverse(const RadonCdtImage& transformed);
/// sqrt of the angle-averaged squared CDT distances.
double radon_cdt_distance(const RadonCdtImage& a, const RadonCdtImage& b);

/// Euclidean mean of the normalized inputs, renormalized. All inputs must
/// share one grid.
GridDensity average_reference(const std::vector<GridDensity>& inputs);

struct SeparabilityViolation {
  std::string condition;  // "inverse", "convex", "composition" or "density"
  std::size_t first = 0;
  std::size_t second = 0;
  double residual = 0.0;
  std::string detail;
};

struct SeparabilityReport {
  bool inverse_closed = true;      // i
  bool convex_closed = true;       // ii
  bool composition_closed = true;  // iii
  bool densities_distinct = true;  // iv
  std::vector<SeparabilityViolation> violations;

  bool all_pass() const noexcept {
    return inverse_closed && convex_closed && composition_closed && densities_distinct;
  }
};

/// Checks closure of a finite family of monotone maps sampled on a common
/// grid. Membership of a derived map g is tested against the affine hull of
/// the family: g is accepted when its least-squares residual against that
/// hull is at most tol * (1 + |g|), measured in the RMS norm over the
/// interior knots (the outer `margin` fraction of knots on each side is
/// ignored, since inverses and compositions extrapolate there).
/// Condition iv needs the mother densities; pass them (on one grid) to check
/// that no density of one class is a pushforward of the other under the
/// family, i.e. that the two classes share no member. That check runs on the
/// knots inside the [margin, 1 - margin] quantile range of mother_q.
/// Every map must be strictly increasing (InvalidArgument otherwise).
SeparabilityReport check_separability_conditions(const std::vector<MonotoneMap1D>& maps,
                                                 double tol = 1e-6, double margin = 0.1);
SeparabilityReport check_separability_conditions(
    const std::vector<MonotoneMap1D>& maps, const GridDensity& mother_p,
    const GridDensity& mother_q, double tol = 1e-6, double margin = 0.1);

enum class LotSolver { Lp, Entropic };

struct LotOptions {
  LotSolver solver = LotSolver::Entropic;
  double rel_lambda = 0.05;  // entropic lambda as a fraction of max cost
};

/// Linear optimal transport embedding of each target about a template.
/// d = 1: the CDT values (flattened, weighted so that the Euclidean norm of
/// embed(a) - embed(b) approximates W2). d = 2: barycentric projection
/// v_i = sum_j gamma_ij (y_j - x_i) / p_i for each template pixel with
/// positive mass, scaled by sqrt(p_i). Entropic embeddings subtract the
/// embedding of the template itself so that embed(template) = 0.
std::vector<std::vector<double>> lot_embed(const std::vector<GridDensity>& targets,
                                           const GridDensity& templ,
                                           const LotOptions& options = {});

/// Euclidean distance between two embedding vectors.
double lot_distance(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace otkit

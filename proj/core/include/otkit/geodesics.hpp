#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "otkit/image.hpp"
#include "otkit/measures.hpp"
#include "otkit/plan.hpp"

namespace otkit {

/// Push the plan through F_t(x, y) = (1 - t) x + t y: one atom per coupling,
/// atoms landing on the same point merged. Throws PlanMismatch when the plan
/// does not couple the two measures.
DiscreteMeasure interpolate(const TransportPlan& plan, const DiscreteMeasure& source,
                            const DiscreteMeasure& target, double t);

/// Deposits each atom on the grid by linear (d = 1) or bilinear (d = 2)
/// splatting onto the nearest cell centers. Atoms between the outer cell
/// centers and the grid edge go to the edge cell; atoms beyond the edge throw
/// OutOfBounds. The result stores densities (mass / cell volume).
GridDensity render(const DiscreteMeasure& measure, const GridDensity& grid);

enum class MorphSolver { Exact1d, Lp, Entropic };

struct MorphOptions {
  MorphSolver solver = MorphSolver::Lp;  // ignored for d = 1 unless Lp/Entropic is forced
  bool force_solver = false;             // use `solver` even on 1-D inputs
  double rel_lambda = 0.01;              // entropic lambda as a fraction of max cost
  std::size_t max_atoms = 4096;          // per side, for d = 2
};

struct GeodesicFrame {
  double t = 0.0;
  DiscreteMeasure measure;
  GridDensity density;
};

struct GeodesicPath {
  DiscreteMeasure source;
  DiscreteMeasure target;
  TransportPlan plan;
  std::string solver;
  std::vector<GeodesicFrame> samples;
};

/// Atoms at the cell centers of a density, keeping the `max_atoms` heaviest
/// cells (ties by index) and renormalizing.
DiscreteMeasure grid_atoms(const GridDensity& density, std::size_t max_atoms);

/// n_frames rendered interpolants at t = k / (n_frames - 1) on the source
/// grid. 1-D inputs use the monotone (exact1d) plan between cell-center atoms
/// unless options.force_solver is set.
GeodesicPath morph(const GridDensity& source, const GridDensity& target, std::size_t n_frames,
                   const MorphOptions& options = {});

enum class Dequantize {
  None,    // map each value as given
  Spread,  // pixels sharing a histogram cell are spread evenly over it in index order
};

/// Grayvalue transfer: F_target^-1 o F_source applied to each value. Values
/// must lie inside the source histogram's range (RangeError otherwise).
/// With Spread, a value is read as a sample of its histogram cell, so the
/// output histogram follows the target even where the target is wider.
std::vector<double> transfer_1d(const GridDensity& source_hist, const GridDensity& target_hist,
                                const std::vector<double>& values,
                                Dequantize mode = Dequantize::Spread);

/// 256-bin histogram of 8-bit values on cells centered at 0..255.
GridDensity gray_histogram(const std::vector<double>& values);

struct ColorTransferOptions {
  std::size_t n_directions = 3;  // per sweep, grouped into orthonormal triples
  std::size_t n_sweeps = 10;
  bool smooth = false;           // box-filter the displacement field
  std::size_t smooth_radius = 2;
  std::uint64_t seed = 42;
};

/// Sliced color transfer: every sweep projects both color clouds on random
/// orthonormal directions, matches each projection by its 1-D optimal map and
/// moves the source colors by the averaged displacement.
RgbImage transfer_color(const RgbImage& source, const RgbImage& target,
                        const ColorTransferOptions& options = {});

/// The working color cloud after each sweep, before rounding; entry 0 is the
/// input. Exposed for convergence diagnostics.
std::vector<std::vector<double>> transfer_color_trace(const RgbImage& source,
                                                      const RgbImage& target,
                                                      const ColorTransferOptions& options = {});

}  // namespace otkit

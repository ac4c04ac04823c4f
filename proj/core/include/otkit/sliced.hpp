#pragma once

#include <cstddef>
#include <vector>

#include "otkit/measures.hpp"

namespace otkit {

/// Projections R I(t, theta_k) of a 2-D density, one 1-D profile per angle.
/// Profile k lives on the offset axis t = <x, theta_k> in absolute image
/// coordinates, so two images on the same grid share every t-grid.
struct Sinogram {
  std::vector<double> angles;
  std::vector<GridDensity> profiles;
};

/// Discrete Radon transform at theta_k = k pi / n_angles. Each pixel is
/// treated as a uniform square and its exact projected footprint (a
/// trapezoid in t) is integrated over the t-bins. The t-grid has odd length
/// covering the image diagonal with the image spacing, centered on the image
/// center. Profiles are renormalized to unit mass.
Sinogram radon(const GridDensity& image, std::size_t n_angles);

/// Mass of each profile before renormalization, relative to the image mass.
std::vector<double> radon_mass_ratios(const GridDensity& image, std::size_t n_angles);

/// SW_p = ( (1/n) sum_k W_p^p(a^theta_k, b^theta_k) )^(1/p).
double sliced_wasserstein(const GridDensity& a, const GridDensity& b, double p,
                          std::size_t n_angles, std::size_t n_quantiles = 1000);
double sliced_wasserstein(const Sinogram& a, const Sinogram& b, double p,
                          std::size_t n_quantiles = 1000);

}  // namespace otkit

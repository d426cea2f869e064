#pragma once

// Procedural light maps for tests, demos and the mechanism checks.

#include "glossmap/envmap.hpp"

#include <string>
#include <vector>

namespace glossmap::synthetic {

/// Soft-edged disk of constant radiance.
struct Source {
    double theta_deg;
    double phi_deg;
    double radius_deg;
    double radiance;
};

/// A handful of small bright sources over a dim floor: light from a narrow
/// range of directions.
envmap::EquirectMap sparse(int width, const std::vector<Source>& sources, double ambient = 0.01);
envmap::EquirectMap sparse(int width);

/// Overcast-style sky: bright upper hemisphere with a smooth horizon falloff and
/// a moderately bright ground. Light arrives from a wide range of directions.
envmap::EquirectMap broad(int width);

/// Black map with one texel set to `radiance` on all channels.
envmap::EquirectMap single_texel(int width, int row, int col, double radiance);

/// Deterministic pseudo-random non-negative map (uniform in [lo, hi)).
envmap::EquirectMap noise(int width, unsigned seed, double lo = 0.0, double hi = 1.0);

/// Named generator used by the CLI: "sparse", "broad", "constant", "noise".
envmap::EquirectMap by_name(const std::string& kind, int width, unsigned seed = 1);

}  // namespace glossmap::synthetic

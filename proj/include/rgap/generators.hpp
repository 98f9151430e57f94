#pragma once

#include <functional>
#include <random>

#include "rgap/mms.hpp"
#include "rgap/model_space.hpp"

namespace rgap {

using Rng = std::mt19937_64;

struct BumpParams {
  int min_bumps = 3;
  int max_bumps = 8;
  double min_radius = 0.15;  ///< as a fraction of the space diameter
  double max_radius = 0.6;
  double epsilon = 0.05;     ///< weight of the distance term that removes flat regions
  double boundary_slope = 2;  ///< ramp at the boundary of a proper domain, in units of 1 / (min_radius * diameter)
};

/// Sum of random Lipschitz bumps h max(0, rho - d(x, c)) / rho plus epsilon times the graph distance
/// to the complement of omega (or epsilon (D - d(x, anchor)) when omega is the whole space), so the
/// result has no flat regions. On a proper domain the result is capped by a linear ramp in the distance
/// to the complement, so it vanishes on the boundary. Zero outside omega.
SampledFunction random_lipschitz(const DiscreteMMS& X, const Subset& omega, Rng& rng, const BumpParams& bp = {});

/// Independent uniform values in [lo, hi] at every point.
SampledFunction random_values(const DiscreteMMS& X, Rng& rng, double lo = -1, double hi = 1);

/// u(x) = profile(t(x)) from the first coordinate of the builder.
SampledFunction radial_function(const DiscreteMMS& X, const std::function<double(double)>& profile);

/// Model-space diameter of the builder (pi sqrt((N-1)/K)), or the longest edge path bound for custom spaces.
double builder_diameter(const DiscreteMMS& X);

/// Points whose first coordinate lies below r(v) of the builder's model; whole rings on suspensions.
Subset cap(const DiscreteMMS& X, double v);
/// Whole rings symmetric about the equator of a suspension, total mass closest to v.
Subset equatorial_band(const DiscreteMMS& X, double v);
/// Points nearest in geodesic distance to the point (t = alpha, s = 0), accumulated until mass v.
Subset shifted_cap(const DiscreteMMS& X, double v, double alpha);
/// Random breadth-first growth from a random seed point until mass v is reached.
Subset random_connected_domain(const DiscreteMMS& X, double v, Rng& rng);

}  // namespace rgap

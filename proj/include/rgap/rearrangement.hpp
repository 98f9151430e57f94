#pragma once

#include <Eigen/Core>
#include <vector>

#include "rgap/mms.hpp"
#include "rgap/model_space.hpp"

namespace rgap {

/// The distribution function mu(t) = m({|u| > t}) of a sampled function, as an exact step function.
///
/// thresholds holds the distinct values of |u| in increasing order and masses[k] = mu(thresholds[k]).
/// Between thresholds mu is constant; below the smallest threshold it equals domain_mass.
struct DistributionFunction {
  std::vector<double> thresholds;
  std::vector<double> masses;
  double domain_mass = 0;

  double operator()(double t) const;
  /// Largest threshold (discrete ess sup); 0 for an empty function.
  double ess_sup() const { return thresholds.empty() ? 0.0 : thresholds.back(); }
};

enum class RearrangeGrid { uniform_x, uniform_volume };

/// Samples of the monotone rearrangement u* on [0, r].
///
/// grid[0..J-1] are cell centers (uniform in x, or in model volume); grid[J] = r closes the
/// interval. When the rearranged function comes from a proper subdomain the value at r is pinned
/// to zero (the Dirichlet datum), otherwise it is u#(m(Omega)) = min |u|.
struct RearrangedFunction {
  ModelSpaced model;
  double r = 0;
  double domain_mass = 0;
  bool dirichlet = false;
  Eigen::VectorXd grid;
  Eigen::VectorXd values;
};

/// Distribution of |u| over omega. Values are merged only when exactly equal.
DistributionFunction distribution(const SampledFunction& u, const Subset& omega);
/// Distribution of arbitrary values with arbitrary positive masses.
DistributionFunction distribution(const Eigen::Ref<const Eigen::VectorXd>& values,
                                  const Eigen::Ref<const Eigen::VectorXd>& masses);

/// u#(0) = ess sup, u#(s) = inf { t >= 0 : mu(t) < s } for s > 0.
double generalized_inverse(const DistributionFunction& df, double s);

/// u*(x) = u#(m_{K,N}([0, x])) sampled on J cells of [0, r], m_{K,N}([0, r]) = m(omega).
RearrangedFunction rearrange(const SampledFunction& u, const Subset& omega, const ModelSpaced& ms, Index J,
                             RearrangeGrid kind = RearrangeGrid::uniform_x);
RearrangedFunction rearrange(const DistributionFunction& df, const ModelSpaced& ms, Index J, bool dirichlet,
                             RearrangeGrid kind = RearrangeGrid::uniform_x);
/// Rearranges a rearranged function again, reading its samples as a step function on the model.
RearrangedFunction rearrange(const RearrangedFunction& w, Index J, RearrangeGrid kind = RearrangeGrid::uniform_x);

/// Cell masses of the sample cells of w (boundaries at midpoints between grid points).
Eigen::VectorXd sample_cell_masses(const RearrangedFunction& w);

/// ||u||_p from the layer-cake formula, exact on step data.
double lp_norm_df(const DistributionFunction& df, double p);
/// (sum_{i in omega} m_i |u_i|^p)^(1/p).
double lp_norm(const SampledFunction& u, const Subset& omega, double p);
/// ||u*||_p on ([0, r], m_{K,N}) integrating the exact step function u# o m_{K,N}([0, .]).
double lp_norm_rearranged(const DistributionFunction& df, const ModelSpaced& ms, double p);

/// Distribution of the exact step function u* measured with the model measure. Its breakpoints
/// are the radii r(mu_k), so this is m_{K,N}([0, r(mu_k)]) for every threshold.
DistributionFunction model_distribution(const DistributionFunction& df, const ModelSpaced& ms);

/// Max edge difference quotient.
double lipschitz_constant(const SampledFunction& u);
/// Max consecutive difference quotient of the samples.
double lipschitz_constant(const RearrangedFunction& w);

}  // namespace rgap

#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "rgap/mms.hpp"
#include "rgap/rearrangement.hpp"

namespace rgap {

struct LevelEntry {
  double t = 0;
  double perimeter = 0;    ///< Per({u > t}) in the discrete space
  double iso_profile = 0;  ///< I_{K,N}(mu(t))
  double f_u = 0;          ///< |(u*)'|^(p-1) h at the level crossing of u*
};

/// Both sides of an audited energy inequality. deficit = energy_in - energy_model.
struct DeficitReport {
  double energy_in = 0;
  double energy_model = 0;
  double deficit = 0;
  std::vector<LevelEntry> per_level;
  std::map<std::string, std::string> metadata;
};

/// Edge-scheme energy of the samples on the model: sum_j h(x_{j+1/2}) |(w_{j+1} - w_j)/dx_j|^p dx_j.
double model_energy(const RearrangedFunction& w, double p);

/// Grid size used when J = 0 is passed to the audits: the data pitch carried over to [0, r].
Index default_rearrangement_cells(const DiscreteMMS& X, double r);

/// Plain Polya-Szego audit: energy_in is the energy of u (zero outside omega) over the whole space,
/// energy_model the energy of its monotone rearrangement.
DeficitReport polya_szego_report(const SampledFunction& u, const Subset& omega, double p, const ModelSpaced& ms,
                                 Index J = 0, bool with_levels = false,
                                 EnergyScheme scheme = EnergyScheme::isotropic);

/// |sum_e sigma_e |u_i - u_j| - integral over t of Per({u > t})|, u taken as zero outside omega.
double coarea_residual(const SampledFunction& u, const Subset& omega);

struct LevelResidual {
  double t = 0;
  double minus_mu_prime = 0;  ///< central difference -(mu(t + d) - mu(t - d)) / 2d
  double cut_sum = 0;         ///< sum over edges cut by {u > t} of sigma / |grad_e u|
  double residual = 0;
  bool flagged = false;       ///< gradient vanishes at the level or the stencil leaves the range of u
};

/// Compares finite differences of mu with the discrete cut integral of 1/|grad u|.
/// half_width = 0 picks half the spacing of t_grid.
std::vector<LevelResidual> distribution_derivative_residual(const SampledFunction& u, const Subset& omega,
                                                            const std::vector<double>& t_grid,
                                                            double half_width = 0);

/// f_u(t) = |(u*)'|^(p-1) h at the unique crossing of the level t by the samples of u*.
std::vector<double> f_u_levels(const RearrangedFunction& w, double p, const std::vector<double>& t_grid);
/// Integral of f_u over t, exact for the piecewise-constant f_u of sampled data.
double integrate_f_u(const RearrangedFunction& w, double p);

enum class ImprovedVariant { perimeter, profile };

/// Improved Polya-Szego audit. The perimeter variant weights f_u by (Per({u > t}) / I_{K,N}(mu(t)))^p;
/// the profile variant uses I_{K,N} itself as the lower bound for the profile of the space, which
/// reduces the weight to one.
DeficitReport improved_ps_report(const SampledFunction& u, const Subset& omega, double p, const ModelSpaced& ms,
                                 ImprovedVariant variant = ImprovedVariant::perimeter, Index J = 0,
                                 EnergyScheme scheme = EnergyScheme::isotropic);

/// Per(E) - I_{K,N}(m(E)) for a nonempty proper subset E.
double levy_gromov_deficit(const DiscreteMMS& X, const Subset& E, const ModelSpaced& ms);

}  // namespace rgap

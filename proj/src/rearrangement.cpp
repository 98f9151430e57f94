#include "rgap/rearrangement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rgap {

double DistributionFunction::operator()(double t) const {
  // last threshold <= t
  const auto it = std::upper_bound(thresholds.begin(), thresholds.end(), t);
  if (it == thresholds.begin()) return domain_mass;
  return masses[static_cast<std::size_t>(std::distance(thresholds.begin(), it)) - 1];
}

DistributionFunction distribution(const Eigen::Ref<const Eigen::VectorXd>& values,
                                  const Eigen::Ref<const Eigen::VectorXd>& masses) {
  const Index n = values.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return values[a] < values[b]; });

  DistributionFunction df;
  long double total = 0;
  for (Index i = 0; i < n; ++i) total += masses[i];
  df.domain_mass = static_cast<double>(total);

  // accumulate from the top so that mu(t_k) = sum of masses strictly above t_k
  long double above = 0;
  std::vector<double> thresholds;
  std::vector<double> mus;
  for (Index k = n - 1; k >= 0;) {
    const double v = values[order[static_cast<std::size_t>(k)]];
    thresholds.push_back(v);
    mus.push_back(static_cast<double>(above));
    while (k >= 0 && values[order[static_cast<std::size_t>(k)]] == v) {
      above += masses[order[static_cast<std::size_t>(k)]];
      --k;
    }
  }
  df.thresholds.assign(thresholds.rbegin(), thresholds.rend());
  df.masses.assign(mus.rbegin(), mus.rend());
  return df;
}

DistributionFunction distribution(const SampledFunction& u, const Subset& omega) {
  const DiscreteMMS& X = u.space();
  if (omega.size() != X.size()) throw DomainError("domain mask does not match the space");
  const std::vector<Index> members = omega.indices();
  if (members.empty()) throw DomainError("distribution needs a nonempty domain");
  Eigen::VectorXd values(static_cast<Index>(members.size()));
  Eigen::VectorXd masses(static_cast<Index>(members.size()));
  for (std::size_t k = 0; k < members.size(); ++k) {
    values[static_cast<Index>(k)] = std::abs(u[members[k]]);
    masses[static_cast<Index>(k)] = X.masses()[members[k]];
  }
  return distribution(values, masses);
}

double generalized_inverse(const DistributionFunction& df, double s) {
  if (s < 0) throw DomainError("generalized inverse needs s >= 0");
  if (df.thresholds.empty()) return 0;
  if (s == 0) return df.ess_sup();
  if (df.domain_mass < s) return 0;
  // masses are non-increasing: first k with mu_k < s
  const auto it = std::partition_point(df.masses.begin(), df.masses.end(), [s](double m) { return !(m < s); });
  if (it == df.masses.end()) return df.ess_sup();
  const double t = df.thresholds[static_cast<std::size_t>(std::distance(df.masses.begin(), it))];
  return std::max(t, 0.0);
}

RearrangedFunction rearrange(const DistributionFunction& df, const ModelSpaced& ms, Index J, bool dirichlet,
                             RearrangeGrid kind) {
  if (!(df.domain_mass > 0)) throw DomainError("cannot rearrange over a domain of zero measure");
  if (J < 1) throw DomainError("rearrangement grid needs at least one cell");
  const double v = std::min(df.domain_mass, 1.0);
  RearrangedFunction w{ms, ms.radius_for_volume(v), df.domain_mass, dirichlet, Eigen::VectorXd(J + 1),
                       Eigen::VectorXd(J + 1)};
  for (Index j = 0; j < J; ++j) {
    const double frac = (static_cast<double>(j) + 0.5) / static_cast<double>(J);
    double x = 0;
    double s = 0;
    if (kind == RearrangeGrid::uniform_x) {
      x = frac * w.r;
      s = ms.cumulative(x);
    } else {
      s = frac * v;
      x = ms.radius_for_volume(s);
    }
    w.grid[j] = x;
    w.values[j] = generalized_inverse(df, std::min(s, df.domain_mass));
  }
  w.grid[J] = w.r;
  w.values[J] = dirichlet ? 0.0 : generalized_inverse(df, df.domain_mass);
  return w;
}

RearrangedFunction rearrange(const SampledFunction& u, const Subset& omega, const ModelSpaced& ms, Index J,
                             RearrangeGrid kind) {
  const DistributionFunction df = distribution(u, omega);
  return rearrange(df, ms, J, omega.count() < u.space().size(), kind);
}

Eigen::VectorXd sample_cell_masses(const RearrangedFunction& w) {
  const Index J = w.grid.size() - 1;
  Eigen::VectorXd masses(J);
  double F_left = 0;
  for (Index j = 0; j < J; ++j) {
    const double right = j + 1 < J ? (w.grid[j] + w.grid[j + 1]) / 2 : w.r;
    const double F_right = w.model.cumulative(right);
    masses[j] = F_right - F_left;
    F_left = F_right;
  }
  return masses;
}

RearrangedFunction rearrange(const RearrangedFunction& w, Index J, RearrangeGrid kind) {
  const Index cells = w.grid.size() - 1;
  const DistributionFunction df = distribution(w.values.head(cells).cwiseAbs(), sample_cell_masses(w));
  return rearrange(df, w.model, J, w.dirichlet, kind);
}

double lp_norm_df(const DistributionFunction& df, double p) {
  if (!(p >= 1)) throw DomainError("L^p norm needs p >= 1");
  if (df.thresholds.empty()) return 0;
  long double integral = static_cast<long double>(df.domain_mass) * std::pow(df.thresholds.front(), p);
  for (std::size_t k = 0; k + 1 < df.thresholds.size(); ++k)
    integral += static_cast<long double>(df.masses[k]) *
                (std::pow(static_cast<long double>(df.thresholds[k + 1]), p) -
                 std::pow(static_cast<long double>(df.thresholds[k]), p));
  return std::pow(static_cast<double>(integral), 1 / p);
}

double lp_norm(const SampledFunction& u, const Subset& omega, double p) {
  if (!(p >= 1)) throw DomainError("L^p norm needs p >= 1");
  long double sum = 0;
  for (Index i = 0; i < u.space().size(); ++i)
    if (omega.contains(i)) sum += u.space().masses()[i] * std::pow(static_cast<long double>(std::abs(u[i])), p);
  return std::pow(static_cast<double>(sum), 1 / p);
}

DistributionFunction model_distribution(const DistributionFunction& df, const ModelSpaced& ms) {
  DistributionFunction out = df;
  for (double& m : out.masses) m = ms.cumulative(ms.radius_for_volume(std::min(m, 1.0)));
  out.domain_mass = ms.cumulative(ms.radius_for_volume(std::min(df.domain_mass, 1.0)));
  return out;
}

double lp_norm_rearranged(const DistributionFunction& df, const ModelSpaced& ms, double p) {
  if (!(p >= 1)) throw DomainError("L^p norm needs p >= 1");
  // u* equals thresholds[k] on (r(mu_k), r(mu_{k-1})], with mu_{-1} = m(Omega)
  const DistributionFunction model = model_distribution(df, ms);
  long double integral = 0;
  double upper = model.domain_mass;
  for (std::size_t k = 0; k < df.thresholds.size(); ++k) {
    integral += std::pow(static_cast<long double>(df.thresholds[k]), p) * (upper - model.masses[k]);
    upper = model.masses[k];
  }
  return std::pow(static_cast<double>(integral), 1 / p);
}

double lipschitz_constant(const SampledFunction& u) {
  const Eigen::VectorXd g = edge_gradient(u);
  return g.size() == 0 ? 0.0 : g.maxCoeff();
}

double lipschitz_constant(const RearrangedFunction& w) {
  double lip = 0;
  for (Index j = 0; j + 1 < w.grid.size(); ++j)
    lip = std::max(lip, std::abs(w.values[j + 1] - w.values[j]) / (w.grid[j + 1] - w.grid[j]));
  return lip;
}

}  // namespace rgap

#include "rgap/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rgap/errors.hpp"

namespace rgap {

namespace {

void check_p(double p) {
  if (!(p > 1) || !std::isfinite(p)) throw DomainError("energy exponent p must lie in (1, inf)");
}

// |u| on omega, zero elsewhere
Eigen::VectorXd restricted_abs(const SampledFunction& u, const Subset& omega) {
  const Index n = u.space().size();
  if (omega.size() != n) throw DomainError("subset does not match the space");
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  for (Index i = 0; i < n; ++i)
    if (omega.contains(i)) a[i] = std::abs(u[i]);
  return a;
}

// Points sorted by decreasing value.
std::vector<Index> descending_order(const Eigen::VectorXd& values) {
  std::vector<Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return values[a] > values[b]; });
  return order;
}

// Maintains Per and m of a growing superlevel set {v >= level}.
class SuperlevelSweep {
 public:
  SuperlevelSweep(const DiscreteMMS& X, const Eigen::VectorXd& values)
      : X_(X), values_(values), order_(descending_order(values)), inside_(static_cast<std::size_t>(X.size()), false) {}

  /// Adds every point with value >= level.
  void include_down_to(double level) {
    while (next_ < order_.size() && values_[order_[next_]] >= level) {
      const Index i = order_[next_++];
      inside_[static_cast<std::size_t>(i)] = true;
      mass_ += X_.masses()[i];
      for (Index e : X_.incident(i)) {
        const Index j = X_.neighbor(e, i);
        const double sigma = X_.edges()[static_cast<std::size_t>(e)].sigma;
        cut_ += inside_[static_cast<std::size_t>(j)] ? -sigma : sigma;
      }
    }
  }

  long double perimeter() const { return cut_; }
  long double mass() const { return mass_; }
  bool contains(Index i) const { return inside_[static_cast<std::size_t>(i)]; }

 private:
  const DiscreteMMS& X_;
  const Eigen::VectorXd& values_;
  std::vector<Index> order_;
  std::vector<bool> inside_;
  std::size_t next_ = 0;
  long double cut_ = 0;
  long double mass_ = 0;
};

std::vector<double> distinct_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool is_non_increasing(const RearrangedFunction& w) {
  for (Index j = 0; j + 1 < w.values.size(); ++j)
    if (w.values[j + 1] > w.values[j]) return false;
  return true;
}

// f_u on the open level band (values[j+1], values[j]).
double segment_f(const RearrangedFunction& w, Index j, double p) {
  const double dv = w.values[j] - w.values[j + 1];
  const double dx = w.grid[j + 1] - w.grid[j];
  if (dv <= 0) return 0;
  return std::pow(dv / dx, p - 1) * w.model.density((w.grid[j] + w.grid[j + 1]) / 2);
}

std::map<std::string, std::string> report_metadata(const DiscreteMMS& X, double p, Index J) {
  return {{"space", to_string(X.tag())},
          {"p", std::to_string(p)},
          {"points", std::to_string(X.size())},
          {"edges", std::to_string(X.edges().size())},
          {"rearranged_cells", std::to_string(J)}};
}

}  // namespace

double model_energy(const RearrangedFunction& w, double p) {
  check_p(p);
  long double energy = 0;
  for (Index j = 0; j + 1 < w.grid.size(); ++j) {
    const double dv = std::abs(w.values[j + 1] - w.values[j]);
    if (dv == 0) continue;
    const double dx = w.grid[j + 1] - w.grid[j];
    energy += w.model.density((w.grid[j] + w.grid[j + 1]) / 2) * std::pow(dv, p) / std::pow(dx, p - 1);
  }
  return static_cast<double>(energy);
}

Index default_rearrangement_cells(const DiscreteMMS& X, double r) {
  const double pitch = X.pitch();
  if (pitch > 0) return std::max<Index>(1, static_cast<Index>(std::lround(r / pitch)));
  return std::max<Index>(16, X.size());
}

DeficitReport polya_szego_report(const SampledFunction& u, const Subset& omega, double p, const ModelSpaced& ms,
                                 Index J, bool with_levels, EnergyScheme scheme) {
  check_p(p);
  const DiscreteMMS& X = u.space();
  const Eigen::VectorXd zeroed = [&] {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(X.size());
    for (Index i = 0; i < X.size(); ++i)
      if (omega.contains(i)) z[i] = u[i];
    return z;
  }();
  const DistributionFunction df = distribution(u, omega);
  if (J == 0) J = default_rearrangement_cells(X, ms.radius_for_volume(std::min(df.domain_mass, 1.0)));
  const RearrangedFunction w = rearrange(df, ms, J, omega.count() < X.size());

  DeficitReport report;
  report.energy_in = dirichlet_energy(SampledFunction(X, zeroed), p, scheme);
  report.energy_model = model_energy(w, p);
  report.deficit = report.energy_in - report.energy_model;
  report.metadata = report_metadata(X, p, J);

  if (with_levels) {
    const Eigen::VectorXd a = restricted_abs(u, omega);
    std::vector<double> levels(a.data(), a.data() + a.size());
    levels.push_back(0);
    levels = distinct_sorted(std::move(levels));
    std::vector<double> mids;
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) mids.push_back((levels[k] + levels[k + 1]) / 2);
    const std::vector<double> f = f_u_levels(w, p, mids);
    SuperlevelSweep sweep(X, a);
    report.per_level.resize(mids.size());
    for (std::size_t k = mids.size(); k-- > 0;) {
      sweep.include_down_to(levels[k + 1]);
      const double mu = static_cast<double>(sweep.mass());
      report.per_level[k] = {mids[k], static_cast<double>(sweep.perimeter()), ms.iso_profile(std::min(mu, 1.0)), f[k]};
    }
  }
  return report;
}

double coarea_residual(const SampledFunction& u, const Subset& omega) {
  const DiscreteMMS& X = u.space();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(X.size());
  for (Index i = 0; i < X.size(); ++i)
    if (omega.contains(i)) z[i] = u[i];

  long double total_variation = 0;
  for (const Edge& e : X.edges()) total_variation += e.sigma * std::abs(static_cast<long double>(z[e.i]) - z[e.j]);

  // Per({z > t}) is constant between consecutive distinct values
  const std::vector<double> levels = distinct_sorted(std::vector<double>(z.data(), z.data() + z.size()));
  SuperlevelSweep sweep(X, z);
  long double integral = 0;
  for (std::size_t k = levels.size(); k-- > 1;) {
    sweep.include_down_to(levels[k]);
    integral += sweep.perimeter() * (static_cast<long double>(levels[k]) - levels[k - 1]);
  }
  return static_cast<double>(std::abs(total_variation - integral));
}

std::vector<LevelResidual> distribution_derivative_residual(const SampledFunction& u, const Subset& omega,
                                                            const std::vector<double>& t_grid, double half_width) {
  const DiscreteMMS& X = u.space();
  const Eigen::VectorXd a = restricted_abs(u, omega);
  const DistributionFunction df = distribution(u, omega);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Index i = 0; i < X.size(); ++i)
    if (omega.contains(i)) {
      lo = std::min(lo, a[i]);
      hi = std::max(hi, a[i]);
    }

  std::vector<LevelResidual> out;
  out.reserve(t_grid.size());
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const double t = t_grid[k];
    double d = half_width;
    if (d <= 0) {
      double gap = std::numeric_limits<double>::infinity();
      if (k > 0) gap = std::min(gap, std::abs(t - t_grid[k - 1]));
      if (k + 1 < t_grid.size()) gap = std::min(gap, std::abs(t_grid[k + 1] - t));
      d = std::isfinite(gap) && gap > 0 ? gap / 2 : (hi - lo) / 100;
    }
    LevelResidual lr;
    lr.t = t;
    lr.flagged = !(d > 0) || t - d < lo || t + d > hi;
    if (d > 0) lr.minus_mu_prime = (df(t - d) - df(t + d)) / (2 * d);

    long double cut = 0;
    bool any_cut = false;
    for (const Edge& e : X.edges()) {
      const bool in_i = a[e.i] > t;
      if (in_i == (a[e.j] > t)) continue;
      const double g = std::abs(a[e.i] - a[e.j]) / e.length;
      if (g == 0) {
        lr.flagged = true;
        continue;
      }
      any_cut = true;
      cut += e.sigma / g;
    }
    if (!any_cut) lr.flagged = true;
    lr.cut_sum = static_cast<double>(cut);
    lr.residual = std::abs(lr.minus_mu_prime - lr.cut_sum);
    out.push_back(lr);
  }
  return out;
}

std::vector<double> f_u_levels(const RearrangedFunction& w, double p, const std::vector<double>& t_grid) {
  check_p(p);
  if (!is_non_increasing(w)) throw PreconditionError("f_u needs a non-increasing rearranged function");
  const Index last = w.values.size() - 1;
  std::vector<double> f(t_grid.size(), 0.0);
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const double t = t_grid[k];
    // segment j with values[j+1] <= t < values[j]
    for (Index j = 0; j < last; ++j)
      if (w.values[j + 1] <= t && t < w.values[j]) {
        f[k] = segment_f(w, j, p);
        break;
      }
  }
  return f;
}

double integrate_f_u(const RearrangedFunction& w, double p) {
  check_p(p);
  if (!is_non_increasing(w)) throw PreconditionError("f_u needs a non-increasing rearranged function");
  long double integral = 0;
  for (Index j = 0; j + 1 < w.values.size(); ++j)
    integral += static_cast<long double>(segment_f(w, j, p)) * (w.values[j] - w.values[j + 1]);
  return static_cast<double>(integral);
}

DeficitReport improved_ps_report(const SampledFunction& u, const Subset& omega, double p, const ModelSpaced& ms,
                                 ImprovedVariant variant, Index J, EnergyScheme scheme) {
  check_p(p);
  const DiscreteMMS& X = u.space();
  const DistributionFunction df = distribution(u, omega);
  if (J == 0) J = default_rearrangement_cells(X, ms.radius_for_volume(std::min(df.domain_mass, 1.0)));
  const bool dirichlet = omega.count() < X.size();
  const RearrangedFunction w = rearrange(df, ms, J, dirichlet);

  // a flat piece of u* away from the terminal minimum plateau breaks the hypothesis
  const Index checked = dirichlet ? J : J - 1;
  for (Index j = 0; j < checked; ++j)
    if (!(w.values[j] > w.values[j + 1]))
      throw PreconditionError("improved Polya-Szego needs u* with non vanishing derivative; flat step at cell " +
                              std::to_string(j));

  const Eigen::VectorXd a = restricted_abs(u, omega);
  std::vector<double> breaks(a.data(), a.data() + a.size());
  breaks.insert(breaks.end(), w.values.data(), w.values.data() + w.values.size());
  breaks.push_back(0);
  breaks = distinct_sorted(std::move(breaks));

  DeficitReport report;
  report.energy_in = dirichlet_energy(SampledFunction(X, a), p, scheme);
  report.metadata = report_metadata(X, p, J);
  report.metadata["variant"] = variant == ImprovedVariant::perimeter ? "perimeter" : "profile";

  SuperlevelSweep sweep(X, a);
  Index seg = 0;  // segment of u* crossing the current band, scanned from the top
  long double integral = 0;
  report.per_level.resize(breaks.size() > 0 ? breaks.size() - 1 : 0);
  for (std::size_t k = breaks.size(); k-- > 1;) {
    const double lo = breaks[k - 1];
    const double hi = breaks[k];
    sweep.include_down_to(hi);
    while (seg + 1 < w.values.size() && w.values[seg + 1] >= hi) ++seg;
    const double f = (seg + 1 < w.values.size() && w.values[seg] >= hi && w.values[seg + 1] <= lo)
                         ? segment_f(w, seg, p)
                         : 0.0;
    const double per = static_cast<double>(sweep.perimeter());
    const double mu = std::min(static_cast<double>(sweep.mass()), 1.0);
    const double iso = ms.iso_profile(mu);
    report.per_level[k - 1] = {(lo + hi) / 2, per, iso, f};
    if (f == 0) continue;
    double weight = 1;
    if (variant == ImprovedVariant::perimeter) {
      if (!(iso > 0)) throw PreconditionError("level set of full or zero measure carries energy");
      weight = std::pow(per / iso, p);
    }
    integral += static_cast<long double>(weight) * f * (hi - lo);
  }
  report.energy_model = static_cast<double>(integral);
  report.deficit = report.energy_in - report.energy_model;
  return report;
}

double levy_gromov_deficit(const DiscreteMMS& X, const Subset& E, const ModelSpaced& ms) {
  const Index c = E.count();
  if (c == 0 || c == X.size()) throw PreconditionError("Levy-Gromov deficit needs a nonempty proper subset");
  return perimeter(X, E) - ms.iso_profile(std::min(measure(X, E), 1.0));
}

}  // namespace rgap

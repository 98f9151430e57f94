#include "rgap/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rgap/errors.hpp"

namespace rgap {

namespace {

void check_volume(double v) {
  if (!(v > 0) || !(v < 1)) throw DomainError("domain volume must lie in (0, 1)");
}

ModelSpaced builder_model(const DiscreteMMS& X) {
  if (X.tag() == BuilderTag::custom) throw DomainError("operation needs a builder-made space");
  return ModelSpaced(X.param("K"), X.param("N"));
}

}  // namespace

double builder_diameter(const DiscreteMMS& X) {
  switch (X.tag()) {
    case BuilderTag::model_interval: return ModelSpaced(X.param("K"), X.param("N")).diameter();
    case BuilderTag::truncated_model: return X.param("L");
    case BuilderTag::suspension: return std::numbers::pi;
    case BuilderTag::custom: break;
  }
  double total = 0;
  for (const Edge& e : X.edges()) total += e.length;
  return total;
}

SampledFunction random_lipschitz(const DiscreteMMS& X, const Subset& omega, Rng& rng, const BumpParams& bp) {
  const std::vector<Index> members = omega.indices();
  if (members.empty()) throw DomainError("random function needs a nonempty domain");
  const double diam = builder_diameter(X);
  std::uniform_int_distribution<int> count(bp.min_bumps, bp.max_bumps);
  std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
  std::uniform_real_distribution<double> height(0.2, 1.0);
  std::uniform_real_distribution<double> radius(bp.min_radius * diam, bp.max_radius * diam);

  Eigen::VectorXd u = Eigen::VectorXd::Zero(X.size());
  const int bumps = count(rng);
  for (int b = 0; b < bumps; ++b) {
    const Index center = members[pick(rng)];
    const double h = height(rng);
    const double rho = radius(rng);
    const Eigen::VectorXd d = geodesic_distances(X, center);
    u.array() += h * ((rho - d.array()).max(0.0)) / rho;
  }
  if (omega.count() < X.size()) {
    // ramp down to zero at the boundary so the zero extension stays Lipschitz
    const Eigen::VectorXd d = graph_distances(X, omega.complement());
    const double slope = bp.boundary_slope / (bp.min_radius * diam);
    u = (u + bp.epsilon * d).cwiseMin(slope * d);
  } else {
    const Eigen::VectorXd d = geodesic_distances(X, members[pick(rng)]);
    u.array() += bp.epsilon * (diam - d.array());
  }
  for (Index i = 0; i < X.size(); ++i)
    if (!omega.contains(i)) u[i] = 0;
  return SampledFunction(X, std::move(u));
}

SampledFunction random_values(const DiscreteMMS& X, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> unif(lo, hi);
  Eigen::VectorXd u(X.size());
  for (Index i = 0; i < X.size(); ++i) u[i] = unif(rng);
  return SampledFunction(X, std::move(u));
}

SampledFunction radial_function(const DiscreteMMS& X, const std::function<double(double)>& profile) {
  if (X.coordinates().cols() < 1) throw DomainError("radial function needs coordinates");
  Eigen::VectorXd u(X.size());
  for (Index i = 0; i < X.size(); ++i) u[i] = profile(X.coordinates()(i, 0));
  return SampledFunction(X, std::move(u));
}

Subset cap(const DiscreteMMS& X, double v) {
  check_volume(v);
  const ModelSpaced ms = builder_model(X);
  // builder masses are normalized by the mass of [0, L]
  const double scale = X.tag() == BuilderTag::truncated_model ? ms.cumulative(X.param("L")) : 1.0;
  const double r = ms.radius_for_volume(std::min(v * scale, 1.0));
  Subset E = Subset::none(X.size());
  for (Index i = 0; i < X.size(); ++i)
    if (X.coordinates()(i, 0) < r) E.insert(i);
  if (E.count() == 0 || E.is_full()) throw DomainError("cap volume too close to 0 or 1 for this grid");
  return E;
}

Subset equatorial_band(const DiscreteMMS& X, double v) {
  check_volume(v);
  if (X.tag() != BuilderTag::suspension) throw DomainError("equatorial band needs a suspension");
  const double half = std::numbers::pi / 2;
  // include points by distance of their ring to the equator, whole rings at a time
  std::vector<Index> order(static_cast<std::size_t>(X.size()));
  std::iota(order.begin(), order.end(), Index{0});
  const auto& c = X.coordinates();
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(c(a, 0) - half) < std::abs(c(b, 0) - half); });
  Subset E = Subset::none(X.size());
  double mass = 0;
  std::size_t k = 0;
  while (k < order.size()) {
    const double level = std::abs(c(order[k], 0) - half);
    double ring = 0;
    std::size_t end = k;
    while (end < order.size() && std::abs(c(order[end], 0) - half) <= level + 1e-12) ring += X.masses()[order[end++]];
    if (mass > 0 && std::abs(mass + ring - v) >= std::abs(mass - v)) break;
    for (; k < end; ++k) E.insert(order[k]);
    mass += ring;
  }
  if (E.is_full()) throw DomainError("band covers the whole space");
  return E;
}

Subset shifted_cap(const DiscreteMMS& X, double v, double alpha) {
  check_volume(v);
  if (X.tag() != BuilderTag::suspension) throw DomainError("shifted cap needs a suspension");
  const auto& c = X.coordinates();
  const double fiber = X.param("fiber");
  std::vector<double> d(static_cast<std::size_t>(X.size()));
  for (Index i = 0; i < X.size(); ++i) d[static_cast<std::size_t>(i)] = suspension_distance(alpha, 0, c(i, 0), c(i, 1), fiber);
  std::vector<Index> order(static_cast<std::size_t>(X.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return d[static_cast<std::size_t>(a)] < d[static_cast<std::size_t>(b)]; });
  Subset E = Subset::none(X.size());
  double mass = 0;
  for (Index i : order) {
    if (mass >= v) break;
    E.insert(i);
    mass += X.masses()[i];
  }
  if (E.is_full()) throw DomainError("shifted cap covers the whole space");
  return E;
}

Subset random_connected_domain(const DiscreteMMS& X, double v, Rng& rng) {
  check_volume(v);
  std::uniform_int_distribution<Index> pick_seed(0, X.size() - 1);
  Subset E = Subset::none(X.size());
  std::vector<Index> frontier{pick_seed(rng)};
  std::vector<bool> queued(static_cast<std::size_t>(X.size()), false);
  queued[static_cast<std::size_t>(frontier.front())] = true;
  double mass = 0;
  while (mass < v && !frontier.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, frontier.size() - 1);
    const std::size_t k = pick(rng);
    const Index i = frontier[k];
    frontier[k] = frontier.back();
    frontier.pop_back();
    E.insert(i);
    mass += X.masses()[i];
    for (Index e : X.incident(i)) {
      const Index j = X.neighbor(e, i);
      if (!queued[static_cast<std::size_t>(j)]) {
        queued[static_cast<std::size_t>(j)] = true;
        frontier.push_back(j);
      }
    }
  }
  if (E.is_full()) throw DomainError("random domain covers the whole space");
  return E;
}

}  // namespace rgap

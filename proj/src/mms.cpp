#include "rgap/mms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

namespace rgap {

std::string to_string(BuilderTag tag) {
  switch (tag) {
    case BuilderTag::model_interval: return "model_interval";
    case BuilderTag::truncated_model: return "truncated_model";
    case BuilderTag::suspension: return "suspension";
    case BuilderTag::custom: return "custom";
  }
  return "custom";
}

BuilderTag builder_tag_from_string(const std::string& name) {
  if (name == "model_interval") return BuilderTag::model_interval;
  if (name == "truncated_model") return BuilderTag::truncated_model;
  if (name == "suspension") return BuilderTag::suspension;
  if (name == "custom") return BuilderTag::custom;
  throw DomainError("unknown builder tag '" + name + "'");
}

DiscreteMMS::DiscreteMMS(Eigen::VectorXd masses, std::vector<Edge> edges, BuilderTag tag,
                         std::map<std::string, double> params, Eigen::MatrixXd coordinates)
    : masses_(std::move(masses)),
      edges_(std::move(edges)),
      tag_(tag),
      params_(std::move(params)),
      coordinates_(std::move(coordinates)) {
  const Index n = masses_.size();
  if (n == 0) throw DomainError("space needs at least one point");
  if (!(masses_.array() > 0).all() || !masses_.allFinite())
    throw DomainError("point masses must be finite and positive");
  if (std::abs(masses_.sum() - 1) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "point masses must sum to 1 (got " << masses_.sum() << ")";
    throw DomainError(os.str());
  }
  if (coordinates_.size() > 0 && coordinates_.rows() != n)
    throw DomainError("coordinate rows must match the point count");

  offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const Edge& e : edges_) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n || e.i == e.j)
      throw DomainError("edge endpoints must be distinct valid point indices");
    if (!std::isfinite(e.length) || !(e.length > 0))
      throw DomainError("edge lengths must be finite and positive");
    if (!std::isfinite(e.sigma) || e.sigma < 0) throw DomainError("cut weights must be finite and >= 0");
    ++offsets_[static_cast<std::size_t>(e.i) + 1];
    ++offsets_[static_cast<std::size_t>(e.j) + 1];
  }
  for (std::size_t k = 1; k < offsets_.size(); ++k) offsets_[k] += offsets_[k - 1];
  incidence_.resize(static_cast<std::size_t>(offsets_.back()));
  std::vector<Index> fill(offsets_.begin(), offsets_.end() - 1);
  for (Index e = 0; e < static_cast<Index>(edges_.size()); ++e) {
    incidence_[static_cast<std::size_t>(fill[static_cast<std::size_t>(edges_[e].i)]++)] = e;
    incidence_[static_cast<std::size_t>(fill[static_cast<std::size_t>(edges_[e].j)]++)] = e;
  }
  if (!is_connected(*this, Subset::all(n))) throw DomainError("space graph must be connected");
}

double DiscreteMMS::param(const std::string& key) const {
  const auto it = params_.find(key);
  if (it == params_.end()) throw DomainError("space has no parameter '" + key + "'");
  return it->second;
}

double DiscreteMMS::pitch() const {
  switch (tag_) {
    case BuilderTag::model_interval:
    case BuilderTag::truncated_model: return param("L") / param("n_cells");
    case BuilderTag::suspension: return std::numbers::pi / param("n_t");
    case BuilderTag::custom: break;
  }
  return 0;
}

Subset Subset::from_indices(Index n, std::span<const Index> indices) {
  Subset s = none(n);
  for (Index i : indices) {
    if (i < 0 || i >= n) throw DomainError("subset index out of range");
    s.insert(i);
  }
  return s;
}

Index Subset::count() const { return static_cast<Index>(std::count(mask_.begin(), mask_.end(), true)); }

std::vector<Index> Subset::indices() const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < mask_.size(); ++i)
    if (mask_[i]) out.push_back(static_cast<Index>(i));
  return out;
}

Subset Subset::complement() const {
  std::vector<bool> m(mask_.size());
  for (std::size_t i = 0; i < mask_.size(); ++i) m[i] = !mask_[i];
  return Subset(std::move(m));
}

SampledFunction::SampledFunction(const DiscreteMMS& space, Eigen::VectorXd values)
    : space_(&space), values_(std::move(values)) {
  if (values_.size() != space.size()) throw DomainError("function length must match the point count");
  if (!values_.allFinite()) throw DomainError("function values must be finite");
}

namespace {

void check_cells(Index n) {
  if (n < 2) throw DomainError("interval builders need at least 2 cells");
}

DiscreteMMS build_interval(const ModelSpaced& ms, double L, Index n, BuilderTag tag) {
  check_cells(n);
  const double pitch = L / static_cast<double>(n);
  std::vector<double> F(static_cast<std::size_t>(n) + 1);
  for (Index k = 0; k <= n; ++k) F[static_cast<std::size_t>(k)] = ms.cumulative(k == n ? L : pitch * k);
  const double total = F.back();

  Eigen::VectorXd masses(n);
  Eigen::MatrixXd coords(n, 1);
  for (Index k = 0; k < n; ++k) {
    masses[k] = (F[static_cast<std::size_t>(k) + 1] - F[static_cast<std::size_t>(k)]) / total;
    coords(k, 0) = pitch * (static_cast<double>(k) + 0.5);
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) - 1);
  for (Index k = 0; k + 1 < n; ++k)
    edges.push_back({k, k + 1, pitch, ms.density(pitch * static_cast<double>(k + 1)) / total,
                     EdgeFamily::radial});

  std::map<std::string, double> params{{"K", ms.K()},
                                       {"N", ms.N()},
                                       {"L", L},
                                       {"n_cells", static_cast<double>(n)},
                                       {"mass_scale", total}};
  return DiscreteMMS(std::move(masses), std::move(edges), tag, std::move(params), std::move(coords));
}

}  // namespace

DiscreteMMS build_model_interval(double K, double N, Index n_cells) {
  const ModelSpaced ms(K, N);
  return build_interval(ms, ms.diameter(), n_cells, BuilderTag::model_interval);
}

DiscreteMMS build_truncated_model(double K, double N, double L, Index n_cells) {
  const ModelSpaced ms(K, N);
  if (!(L > 0) || !(L <= ms.diameter())) {
    std::ostringstream os;
    os << "truncation length " << L << " outside (0, " << ms.diameter() << "]";
    throw DomainError(os.str());
  }
  return build_interval(ms, L, n_cells, BuilderTag::truncated_model);
}

DiscreteMMS build_suspension(double N, double fiber, Index n_t, Index n_theta) {
  if (n_t < 2 || n_theta < 3) throw DomainError("suspension grid needs n_t >= 2 and n_theta >= 3");
  if (!(fiber > 0) || fiber > 2 * std::numbers::pi + 1e-12)
    throw DomainError("fiber circumference must lie in (0, 2 pi]");
  const ModelSpaced ms(N - 1, N);
  const double dt = std::numbers::pi / static_cast<double>(n_t);
  const double ds = fiber / static_cast<double>(n_theta);
  const Index n = n_t * n_theta;
  const auto id = [n_theta](Index i, Index k) { return i * n_theta + k; };

  std::vector<double> F(static_cast<std::size_t>(n_t) + 1);
  for (Index i = 0; i <= n_t; ++i)
    F[static_cast<std::size_t>(i)] = ms.cumulative(i == n_t ? ms.diameter() : dt * static_cast<double>(i));

  Eigen::VectorXd masses(n);
  Eigen::MatrixXd coords(n, 2);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(2 * n));
  for (Index i = 0; i < n_t; ++i) {
    const double t = dt * (static_cast<double>(i) + 0.5);
    const double ring = F[static_cast<std::size_t>(i) + 1] - F[static_cast<std::size_t>(i)];
    const double point_mass = ring / static_cast<double>(n_theta);
    const double parallel_length = std::sin(t) * ds;
    for (Index k = 0; k < n_theta; ++k) {
      masses[id(i, k)] = point_mass;
      coords(id(i, k), 0) = t;
      coords(id(i, k), 1) = ds * static_cast<double>(k);
      edges.push_back({id(i, k), id(i, (k + 1) % n_theta), parallel_length, point_mass / parallel_length,
                       EdgeFamily::transversal});
      if (i + 1 < n_t) {
        const double boundary = dt * static_cast<double>(i + 1);
        edges.push_back({id(i, k), id(i + 1, k), dt, ms.density(boundary) / static_cast<double>(n_theta),
                         EdgeFamily::radial});
      }
    }
  }
  std::map<std::string, double> params{{"K", N - 1},
                                       {"N", N},
                                       {"fiber", fiber},
                                       {"n_t", static_cast<double>(n_t)},
                                       {"n_theta", static_cast<double>(n_theta)}};
  return DiscreteMMS(std::move(masses), std::move(edges), BuilderTag::suspension, std::move(params),
                     std::move(coords));
}

double measure(const DiscreteMMS& X, const Subset& E) {
  double m = 0;
  for (Index i = 0; i < X.size(); ++i)
    if (E.contains(i)) m += X.masses()[i];
  return m;
}

double perimeter(const DiscreteMMS& X, const Subset& E) {
  double per = 0;
  for (const Edge& e : X.edges())
    if (E.contains(e.i) != E.contains(e.j)) per += e.sigma;
  return per;
}

Eigen::VectorXd slope(const SampledFunction& u) {
  const DiscreteMMS& X = u.space();
  Eigen::VectorXd s = Eigen::VectorXd::Zero(X.size());
  for (const Edge& e : X.edges()) {
    const double g = std::abs(u[e.i] - u[e.j]) / e.length;
    s[e.i] = std::max(s[e.i], g);
    s[e.j] = std::max(s[e.j], g);
  }
  return s;
}

Eigen::VectorXd edge_gradient(const SampledFunction& u) {
  const auto& edges = u.space().edges();
  Eigen::VectorXd g(static_cast<Index>(edges.size()));
  for (std::size_t k = 0; k < edges.size(); ++k)
    g[static_cast<Index>(k)] = std::abs(u[edges[k].i] - u[edges[k].j]) / edges[k].length;
  return g;
}

namespace {
void check_exponent(double p) {
  if (!(p > 1) || !std::isfinite(p)) throw DomainError("energy exponent p must lie in (1, inf)");
}

// One cell per meridian edge: the radial difference quotient is combined with the mean square of
// the four adjacent parallel difference quotients, weighted by the cell area sigma * d.
double isotropic_energy(const SampledFunction& u, double p) {
  const DiscreteMMS& X = u.space();
  const Index n_theta = static_cast<Index>(X.param("n_theta"));
  const double ds = X.param("fiber") / static_cast<double>(n_theta);
  const auto parallel_sq = [&](Index point) {
    const Index ring = point / n_theta;
    const Index k = point % n_theta;
    const double len = std::sin(X.coordinates()(point, 0)) * ds;
    const double ahead = u[ring * n_theta + (k + 1) % n_theta] - u[point];
    const double behind = u[point] - u[ring * n_theta + (k + n_theta - 1) % n_theta];
    return (ahead * ahead + behind * behind) / (len * len);
  };
  long double energy = 0;
  for (const Edge& e : X.edges()) {
    if (e.family != EdgeFamily::radial) continue;
    const double g = (u[e.j] - u[e.i]) / e.length;
    const double q2 = (parallel_sq(e.i) + parallel_sq(e.j)) / 4;
    const double s = g * g + q2;
    if (s > 0) energy += e.sigma * e.length * std::pow(s, p / 2);
  }
  return static_cast<double>(energy);
}
}  // namespace

double dirichlet_energy(const SampledFunction& u, double p, EnergyScheme scheme) {
  check_exponent(p);
  const DiscreteMMS& X = u.space();
  if (scheme == EnergyScheme::isotropic && X.tag() == BuilderTag::suspension) return isotropic_energy(u, p);
  if (scheme == EnergyScheme::point) {
    const Eigen::VectorXd s = slope(u);
    return X.masses().dot(s.array().pow(p).matrix());
  }
  double energy = 0;
  for (const Edge& e : X.edges()) {
    const double diff = std::abs(u[e.i] - u[e.j]);
    if (diff == 0) continue;
    energy += e.sigma * std::pow(diff, p) / std::pow(e.length, p - 1);
  }
  return energy;
}

double dirichlet_energy(const SampledFunction& u, const Subset& omega, double p) {
  check_exponent(p);
  double energy = 0;
  for (const Edge& e : u.space().edges()) {
    const bool in_i = omega.contains(e.i);
    const bool in_j = omega.contains(e.j);
    if (in_i && in_j) {
      const double diff = std::abs(u[e.i] - u[e.j]);
      if (diff > 0) energy += e.sigma * std::pow(diff, p) / std::pow(e.length, p - 1);
    } else if (in_i || in_j) {
      const double value = std::abs(in_i ? u[e.i] : u[e.j]);
      if (value > 0) energy += e.sigma * std::pow(value, p) / std::pow(e.length / 2, p - 1);
    }
  }
  return energy;
}

double suspension_distance(double t1, double s1, double t2, double s2, double fiber) {
  double ds = std::fmod(std::abs(s1 - s2), fiber);
  ds = std::min(ds, fiber - ds);
  const double angle = std::min(ds, std::numbers::pi);
  const double c = std::cos(t1) * std::cos(t2) + std::sin(t1) * std::sin(t2) * std::cos(angle);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

Eigen::VectorXd graph_distances(const DiscreteMMS& X, const Subset& sources) {
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::VectorXd dist = Eigen::VectorXd::Constant(X.size(), inf);
  using Item = std::pair<double, Index>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (Index i = 0; i < X.size(); ++i)
    if (sources.contains(i)) {
      dist[i] = 0;
      heap.emplace(0.0, i);
    }
  while (!heap.empty()) {
    const auto [d, i] = heap.top();
    heap.pop();
    if (d > dist[i]) continue;
    for (Index e : X.incident(i)) {
      const Index j = X.neighbor(e, i);
      const double nd = d + X.edges()[static_cast<std::size_t>(e)].length;
      if (nd < dist[j]) {
        dist[j] = nd;
        heap.emplace(nd, j);
      }
    }
  }
  return dist;
}

Eigen::VectorXd geodesic_distances(const DiscreteMMS& X, Index i) {
  const auto& c = X.coordinates();
  switch (X.tag()) {
    case BuilderTag::model_interval:
    case BuilderTag::truncated_model: return (c.col(0).array() - c(i, 0)).abs().matrix();
    case BuilderTag::suspension: {
      const double fiber = X.param("fiber");
      Eigen::VectorXd d(X.size());
      for (Index j = 0; j < X.size(); ++j) d[j] = suspension_distance(c(i, 0), c(i, 1), c(j, 0), c(j, 1), fiber);
      return d;
    }
    case BuilderTag::custom: break;
  }
  const std::array<Index, 1> src{i};
  return graph_distances(X, Subset::from_indices(X.size(), src));
}

bool is_connected(const DiscreteMMS& X, const Subset& E) {
  const std::vector<Index> members = E.indices();
  if (members.empty()) return true;
  std::vector<bool> seen(static_cast<std::size_t>(X.size()), false);
  std::vector<Index> stack{members.front()};
  seen[static_cast<std::size_t>(members.front())] = true;
  Index reached = 0;
  while (!stack.empty()) {
    const Index i = stack.back();
    stack.pop_back();
    ++reached;
    for (Index e : X.incident(i)) {
      const Index j = X.neighbor(e, i);
      if (E.contains(j) && !seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = true;
        stack.push_back(j);
      }
    }
  }
  return reached == static_cast<Index>(members.size());
}

}  // namespace rgap

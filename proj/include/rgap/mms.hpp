#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rgap/model_space.hpp"

namespace rgap {

using Index = Eigen::Index;

enum class BuilderTag { model_interval, truncated_model, suspension, custom };

std::string to_string(BuilderTag tag);
BuilderTag builder_tag_from_string(const std::string& name);

/// Transversal edges only occur on suspensions (edges along the fiber).
enum class EdgeFamily { radial = 0, transversal = 1 };

struct Edge {
  Index i = 0;
  Index j = 0;
  double length = 0;  ///< metric length d_ij > 0
  double sigma = 0;   ///< perimeter cut weight; also the cross-section used by the edge energy
  EdgeFamily family = EdgeFamily::radial;
};

/// A finite weighted graph standing in for a compact metric measure space of total mass one.
///
/// Points carry masses, edges carry metric lengths and cut weights. Coordinates are optional:
/// one column (t) for interval builders, two columns (t, fiber arclength) for suspensions.
class DiscreteMMS {
 public:
  DiscreteMMS(Eigen::VectorXd masses, std::vector<Edge> edges, BuilderTag tag = BuilderTag::custom,
              std::map<std::string, double> params = {}, Eigen::MatrixXd coordinates = {});

  Index size() const noexcept { return masses_.size(); }
  const Eigen::VectorXd& masses() const noexcept { return masses_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  BuilderTag tag() const noexcept { return tag_; }
  const std::map<std::string, double>& params() const noexcept { return params_; }
  double param(const std::string& key) const;
  const Eigen::MatrixXd& coordinates() const noexcept { return coordinates_; }

  /// Edge ids incident to point i.
  std::span<const Index> incident(Index i) const {
    return {incidence_.data() + offsets_[i], incidence_.data() + offsets_[i + 1]};
  }

  /// Other endpoint of edge e seen from point i.
  Index neighbor(Index e, Index i) const {
    const Edge& ed = edges_[e];
    return ed.i == i ? ed.j : ed.i;
  }

  /// Typical grid pitch of the builder (cell width in t); 0 for custom spaces.
  double pitch() const;

 private:
  Eigen::VectorXd masses_;
  std::vector<Edge> edges_;
  BuilderTag tag_;
  std::map<std::string, double> params_;
  Eigen::MatrixXd coordinates_;
  std::vector<Index> offsets_;
  std::vector<Index> incidence_;
};

/// Membership mask over the points of a space.
class Subset {
 public:
  Subset() = default;
  explicit Subset(std::vector<bool> mask) : mask_(std::move(mask)) {}

  static Subset all(Index n) { return Subset(std::vector<bool>(static_cast<std::size_t>(n), true)); }
  static Subset none(Index n) { return Subset(std::vector<bool>(static_cast<std::size_t>(n), false)); }
  static Subset from_indices(Index n, std::span<const Index> indices);

  Index size() const noexcept { return static_cast<Index>(mask_.size()); }
  bool contains(Index i) const { return mask_[static_cast<std::size_t>(i)]; }
  void insert(Index i) { mask_[static_cast<std::size_t>(i)] = true; }
  void erase(Index i) { mask_[static_cast<std::size_t>(i)] = false; }
  Index count() const;
  bool is_full() const { return count() == size(); }
  std::vector<Index> indices() const;
  Subset complement() const;
  const std::vector<bool>& mask() const noexcept { return mask_; }

 private:
  std::vector<bool> mask_;
};

/// Real values attached to the points of a DiscreteMMS. The space must outlive the function.
class SampledFunction {
 public:
  SampledFunction(const DiscreteMMS& space, Eigen::VectorXd values);

  const DiscreteMMS& space() const noexcept { return *space_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  Eigen::VectorXd& values() noexcept { return values_; }
  double operator[](Index i) const { return values_[i]; }

 private:
  const DiscreteMMS* space_;
  Eigen::VectorXd values_;
};

/// point: sum_i m_i slope_i^p. edge: sum_e sigma_e |grad_e u|^p d_e. isotropic: on suspensions, one
/// cell per meridian edge with |grad u|^2 = radial quotient^2 + mean square of the adjacent parallel
/// quotients; identical to the edge scheme elsewhere and on radial data.
enum class EnergyScheme { point, edge, isotropic };

DiscreteMMS build_model_interval(double K, double N, Index n_cells);
DiscreteMMS build_truncated_model(double K, double N, double L, Index n_cells);
/// Spherical suspension [0, pi] x_sin^(N-1) S^1(l) with K = N - 1, fiber of circumference l.
DiscreteMMS build_suspension(double N, double fiber_circumference, Index n_t, Index n_theta);

double measure(const DiscreteMMS& X, const Subset& E);
double perimeter(const DiscreteMMS& X, const Subset& E);

/// Per point: max over neighbors of |u_i - u_j| / d_ij.
Eigen::VectorXd slope(const SampledFunction& u);
/// Per edge: |u_i - u_j| / d_ij.
Eigen::VectorXd edge_gradient(const SampledFunction& u);

/// Dirichlet p-energy of u over the whole space.
///   point scheme: sum_i m_i slope_i^p
///   edge scheme:  sum_e sigma_e |grad_e u|^p d_e
double dirichlet_energy(const SampledFunction& u, double p, EnergyScheme scheme = EnergyScheme::edge);

/// Edge-scheme energy of u as an element of W_0^{1,p}(omega): values outside omega are treated
/// as zero and the boundary of omega sits at the midpoint of every edge leaving omega, so those
/// edges contribute with half their length. This is the energy minimized by the eigensolvers.
double dirichlet_energy(const SampledFunction& u, const Subset& omega, double p);

/// Geodesic distances from point i, using the builder geometry when known (interval, suspension)
/// and shortest paths in the graph otherwise.
Eigen::VectorXd geodesic_distances(const DiscreteMMS& X, Index i);
/// Shortest-path distances in the graph from a set of sources (multi-source Dijkstra).
Eigen::VectorXd graph_distances(const DiscreteMMS& X, const Subset& sources);

/// Geodesic distance on the suspension between (t1, s1) and (t2, s2) (fiber arclengths s).
double suspension_distance(double t1, double s1, double t2, double s2, double fiber_circumference);

bool is_connected(const DiscreteMMS& X, const Subset& E);

}  // namespace rgap

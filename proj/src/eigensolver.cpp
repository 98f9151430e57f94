#include "rgap/eigensolver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "rgap/errors.hpp"
#include "rgap/rearrangement.hpp"

namespace rgap {

std::string to_string(EigenMethod method) {
  switch (method) {
    case EigenMethod::exact_p2: return "exact_p2";
    case EigenMethod::descent: return "descent";
    case EigenMethod::shooting: return "shooting";
  }
  return "unknown";
}

RayleighProblem model_problem(const ModelSpaced& ms, double v, Index n) {
  const double r = ms.radius_for_volume(v);
  const double dx = r / static_cast<double>(n);
  RayleighProblem P;
  P.masses.resize(n);
  P.abscissae.resize(n);
  P.banded = true;
  double F_left = 0;
  for (Index i = 0; i < n; ++i) {
    const double right = i + 1 < n ? static_cast<double>(i + 1) * dx : r;
    const double F_right = ms.cumulative(right);
    P.masses[i] = F_right - F_left;
    F_left = F_right;
    P.abscissae[i] = (static_cast<double>(i) + 0.5) * dx;
  }
  P.links.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i + 1 < n; ++i) P.links.push_back({i, i + 1, ms.density(static_cast<double>(i + 1) * dx), dx});
  P.links.push_back({n - 1, -1, ms.density(r), dx / 2});
  return P;
}

RayleighProblem domain_problem(const DiscreteMMS& X, const Subset& omega) {
  if (omega.size() != X.size()) throw DomainError("subset does not match the space");
  const Index count = omega.count();
  if (count == 0) throw DomainError("domain is empty");
  if (count == X.size()) throw DomainError("domain is the whole space: no Dirichlet constraint");
  std::vector<Index> local(static_cast<std::size_t>(X.size()), -1);
  RayleighProblem P;
  P.masses.resize(count);
  P.abscissae.resize(count);
  Index next = 0;
  for (Index i = 0; i < X.size(); ++i)
    if (omega.contains(i)) {
      local[static_cast<std::size_t>(i)] = next;
      P.masses[next] = X.masses()[i];
      P.abscissae[next] = static_cast<double>(i);
      P.global.push_back(i);
      ++next;
    }
  for (const Edge& e : X.edges()) {
    const Index a = local[static_cast<std::size_t>(e.i)];
    const Index b = local[static_cast<std::size_t>(e.j)];
    if (a >= 0 && b >= 0)
      P.links.push_back({a, b, e.sigma, e.length});
    else if (a >= 0 || b >= 0)
      P.links.push_back({std::max(a, b), -1, e.sigma, e.length / 2});
  }
  return P;
}

namespace {

double link_difference(const RayleighProblem::Link& l, const Eigen::Ref<const Eigen::VectorXd>& u) {
  return l.b >= 0 ? u[l.a] - u[l.b] : u[l.a];
}

}  // namespace

double problem_energy(const RayleighProblem& P, const Eigen::Ref<const Eigen::VectorXd>& u, double p) {
  long double energy = 0;
  for (const auto& l : P.links) {
    const double g = std::abs(link_difference(l, u));
    if (g > 0) energy += l.sigma * std::pow(g, p) / std::pow(l.length, p - 1);
  }
  return static_cast<double>(energy);
}

double problem_mass(const RayleighProblem& P, const Eigen::Ref<const Eigen::VectorXd>& u, double p) {
  long double mass = 0;
  for (Index i = 0; i < P.size(); ++i) mass += P.masses[i] * std::pow(std::abs(u[i]), p);
  return static_cast<double>(mass);
}

double rayleigh_quotient(const RayleighProblem& P, const Eigen::Ref<const Eigen::VectorXd>& u, double p) {
  const double mass = problem_mass(P, u, p);
  if (!(mass > 0)) throw DomainError("Rayleigh quotient of the zero function");
  return problem_energy(P, u, p) / mass;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Solver = Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>>;

void check_exponent(double p) {
  if (!(p > 1) || !std::isfinite(p)) throw DomainError("exponent p must lie in (1, inf)");
}

void normalize(Eigen::VectorXd& u, const RayleighProblem& P, double p) {
  const double mass = problem_mass(P, u, p);
  if (!(mass > 0) || !std::isfinite(mass)) throw SolverError("iterate collapsed to zero", "");
  u /= std::pow(mass, 1 / p);
}

// sum_k c_k w_k (e_a - e_b)(e_a - e_b)^T with c_k = sigma / length^(p-1)
SpMat weighted_laplacian(const RayleighProblem& P, const Eigen::VectorXd& weights, double p) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(P.links.size() * 4);
  for (std::size_t k = 0; k < P.links.size(); ++k) {
    const auto& l = P.links[k];
    const double c = l.sigma / std::pow(l.length, p - 1) * weights[static_cast<Index>(k)];
    triplets.emplace_back(l.a, l.a, c);
    if (l.b >= 0) {
      triplets.emplace_back(l.b, l.b, c);
      triplets.emplace_back(l.a, l.b, -c);
      triplets.emplace_back(l.b, l.a, -c);
    }
  }
  SpMat A(P.size(), P.size());
  A.setFromTriplets(triplets.begin(), triplets.end());
  return A;
}

struct Gradient {
  Eigen::VectorXd energy;  // gradient of E
  Eigen::VectorXd mass;    // gradient of M
};

Gradient gradients(const RayleighProblem& P, const Eigen::VectorXd& u, double p) {
  Gradient g{Eigen::VectorXd::Zero(P.size()), Eigen::VectorXd::Zero(P.size())};
  for (const auto& l : P.links) {
    const double d = link_difference(l, u);
    if (d == 0) continue;
    const double c = p * l.sigma / std::pow(l.length, p - 1) * std::pow(std::abs(d), p - 1) * (d > 0 ? 1 : -1);
    g.energy[l.a] += c;
    if (l.b >= 0) g.energy[l.b] -= c;
  }
  for (Index i = 0; i < P.size(); ++i)
    if (u[i] != 0) g.mass[i] = p * P.masses[i] * std::pow(std::abs(u[i]), p - 1) * (u[i] > 0 ? 1 : -1);
  return g;
}

// ||grad R||_{M^-1} / (p R) for a normalized iterate
double relative_residual(const RayleighProblem& P, const Eigen::VectorXd& grad_R, double p, double R) {
  long double s = 0;
  for (Index i = 0; i < P.size(); ++i) s += grad_R[i] * grad_R[i] / P.masses[i];
  return std::sqrt(static_cast<double>(s)) / (p * R);
}

struct Iterate {
  Eigen::VectorXd u;
  double R = 0;
  Index iterations = 0;
  double residual = 0;
  int projections_accepted = 0;
  int projections_rejected = 0;
  bool stagnated = false;
};

Iterate inverse_iteration(const RayleighProblem& P, Eigen::VectorXd u, double tol, Index max_iterations) {
  const SpMat A = weighted_laplacian(P, Eigen::VectorXd::Ones(static_cast<Index>(P.links.size())), 2);
  Solver solver(A);
  if (solver.info() != Eigen::Success) throw SolverError("stiffness matrix factorization failed", "");
  normalize(u, P, 2);
  Iterate it;
  double R = rayleigh_quotient(P, u, 2);
  for (Index k = 1; k <= max_iterations; ++k) {
    Eigen::VectorXd y = solver.solve(P.masses.cwiseProduct(u));
    normalize(y, P, 2);
    const double R_new = rayleigh_quotient(P, y, 2);
    const double change = std::abs(R - R_new);
    u = std::move(y);
    R = R_new;
    if (k >= 3 && change <= tol * R) {
      it.iterations = k;
      break;
    }
    if (k == max_iterations) {
      std::ostringstream os;
      os << "inverse iteration stalled after " << k << " steps, last change " << change / R;
      throw SolverError("eigenvalue iteration did not converge", os.str());
    }
  }
  if (u.sum() < 0) u = -u;
  u = u.cwiseAbs();
  it.u = u;
  it.R = rayleigh_quotient(P, u, 2);
  const Eigen::VectorXd Au = A * u;
  it.residual = relative_residual(P, 2 * (Au - it.R * P.masses.cwiseProduct(u)), 2, it.R);
  return it;
}

// Preconditioned descent on the Rayleigh quotient. The preconditioner is p times the Laplacian with
// edge weights |du|^(p-2) (floored); a unit step is one step of the inverse power method.
Iterate descend(const RayleighProblem& P, Eigen::VectorXd u, double p, double tol, Index max_iterations,
                const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& projector, int project_every) {
  constexpr double armijo = 1e-4;
  constexpr int window = 25;
  const double floor_ratio = p < 2 ? 1e-6 : 1e-3;

  u = u.cwiseAbs();
  normalize(u, P, p);
  double R = rayleigh_quotient(P, u, p);
  std::vector<double> history{R};
  Iterate it;
  Solver solver;
  bool analyzed = false;
  Eigen::VectorXd weights(static_cast<Index>(P.links.size()));

  for (Index k = 1; k <= max_iterations; ++k) {
    double gmax = 0;
    for (std::size_t e = 0; e < P.links.size(); ++e) gmax = std::max(gmax, std::abs(link_difference(P.links[e], u)));
    const double floor = std::max(gmax * floor_ratio, std::numeric_limits<double>::min());
    for (std::size_t e = 0; e < P.links.size(); ++e)
      weights[static_cast<Index>(e)] = std::pow(std::max(std::abs(link_difference(P.links[e], u)), floor), p - 2);
    const SpMat L = weighted_laplacian(P, weights, p);
    if (!analyzed) {
      solver.analyzePattern(L);
      analyzed = true;
    }
    solver.factorize(L);
    if (solver.info() != Eigen::Success) throw SolverError("preconditioner factorization failed", "");

    const Gradient g = gradients(P, u, p);
    const Eigen::VectorXd grad_R = g.energy - R * g.mass;  // M(u) = 1
    const Eigen::VectorXd d = -solver.solve(grad_R) / p;
    const double slope = grad_R.dot(d);

    double step = 1;
    bool accepted = false;
    Eigen::VectorXd trial;
    double R_trial = R;
    if (slope < 0) {
      for (int shrink = 0; shrink < 60; ++shrink, step *= 0.5) {
        trial = (u + step * d).cwiseAbs();
        const double mass = problem_mass(P, trial, p);
        if (!(mass > 0)) continue;
        trial /= std::pow(mass, 1 / p);
        R_trial = rayleigh_quotient(P, trial, p);
        if (R_trial <= R + armijo * step * slope) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      it.stagnated = true;
      it.iterations = k;
      break;
    }
    u = std::move(trial);
    R = R_trial;

    if (projector && project_every > 0 && k % project_every == 0) {
      Eigen::VectorXd proj = projector(u);
      const double mass = problem_mass(P, proj, p);
      if (mass > 0) {
        proj /= std::pow(mass, 1 / p);
        const double R_proj = rayleigh_quotient(P, proj, p);
        if (R_proj <= R) {
          u = std::move(proj);
          R = R_proj;
          ++it.projections_accepted;
        } else {
          ++it.projections_rejected;
        }
      }
    }

    history.push_back(R);
    if (history.size() > window && (history[history.size() - 1 - window] - R) <= tol * R) {
      it.iterations = k;
      break;
    }
    if (k == max_iterations) {
      std::ostringstream os;
      os << "descent stalled after " << k << " steps, R = " << R << ", decrease over window "
         << (history[history.size() - 1 - window] - R) / R;
      throw SolverError("Rayleigh descent did not converge", os.str());
    }
  }
  it.u = u;
  it.R = R;
  const Gradient g = gradients(P, u, p);
  it.residual = relative_residual(P, g.energy - R * g.mass, p, R);
  return it;
}

constexpr Index max_descent_iterations = 20000;
constexpr Index max_inverse_iterations = 10000;

}  // namespace

EigenResult lambda_model(double K, double N, double v, double p, Index n, double tol) {
  check_exponent(p);
  if (!(v > 0) || !(v <= 1 - 1e-3)) throw DomainError("volume must lie in (0, 1 - 1e-3]");
  if (n < 64) throw DomainError("model eigenproblem needs at least 64 cells");
  if (!(tol > 0)) throw DomainError("tolerance must be positive");
  const ModelSpaced ms(K, N);
  const RayleighProblem P = model_problem(ms, v, n);

  // start from the cosine-like profile vanishing at r
  const double r = ms.radius_for_volume(v);
  Eigen::VectorXd u0(n);
  for (Index i = 0; i < n; ++i) u0[i] = std::cos(std::numbers::pi / 2 * P.abscissae[i] / r);

  Iterate it;
  EigenResult res;
  std::ostringstream diag;
  if (p == 2) {
    it = inverse_iteration(P, u0, tol, max_inverse_iterations);
    res.method = EigenMethod::exact_p2;
  } else {
    // warm start from the linear problem, then rearrange every 10 steps
    u0 = inverse_iteration(P, u0, std::max(tol, 1e-8), max_inverse_iterations).u;
    const auto projector = [&](const Eigen::VectorXd& u) {
      const DistributionFunction df = distribution(u.cwiseAbs(), P.masses);
      const RearrangedFunction w = rearrange(df, ms, n, true);
      return Eigen::VectorXd(w.values.head(n));
    };
    it = descend(P, u0, p, tol, max_descent_iterations, projector, 10);
    res.method = EigenMethod::descent;
    diag << "projections accepted " << it.projections_accepted << ", rejected " << it.projections_rejected
         << (it.stagnated ? ", line search stagnated" : "") << "; ";
  }
  diag << "cells " << n << ", r " << r;
  res.lambda = it.R;
  res.eigenfunction.resize(n + 1);
  res.eigenfunction.head(n) = it.u;
  res.eigenfunction[n] = 0;
  res.grid.resize(n + 1);
  res.grid.head(n) = P.abscissae;
  res.grid[n] = r;
  res.iterations = it.iterations;
  res.residual = it.residual;
  res.diagnostics = diag.str();
  return res;
}

EigenResult lambda_domain(const DiscreteMMS& X, const Subset& omega, double p, double tol, int n_starts,
                          std::uint64_t seed) {
  check_exponent(p);
  if (!(tol > 0)) throw DomainError("tolerance must be positive");
  const RayleighProblem P = domain_problem(X, omega);
  const Index n = P.size();

  Iterate best = inverse_iteration(P, Eigen::VectorXd::Ones(n), p == 2 ? tol : std::max(tol, 1e-8),
                                   max_inverse_iterations);
  EigenResult res;
  std::ostringstream diag;
  if (p == 2) {
    res.method = EigenMethod::exact_p2;
  } else {
    res.method = EigenMethod::descent;
    best = descend(P, best.u, p, tol, max_descent_iterations, nullptr, 0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    int failures = 0;
    for (int s = 1; s < n_starts; ++s) {
      Eigen::VectorXd u0(n);
      for (Index i = 0; i < n; ++i) u0[i] = unif(rng);
      try {
        Iterate candidate = descend(P, u0, p, tol, max_descent_iterations, nullptr, 0);
        if (candidate.R < best.R) best = std::move(candidate);
      } catch (const SolverError&) {
        ++failures;
      }
    }
    diag << "starts " << std::max(n_starts, 1) << ", failed " << failures << "; ";
  }
  diag << "unknowns " << n << ", links " << P.links.size();
  res.lambda = best.R;
  res.eigenfunction = Eigen::VectorXd::Zero(X.size());
  for (Index k = 0; k < n; ++k) res.eigenfunction[P.global[static_cast<std::size_t>(k)]] = best.u[k];
  res.grid = Eigen::VectorXd::LinSpaced(X.size(), 0, static_cast<double>(X.size() - 1));
  res.iterations = best.iterations;
  res.residual = best.residual;
  res.diagnostics = diag.str();
  return res;
}

UniquenessReport uniqueness_probe(const DiscreteMMS& X, const Subset& omega, double p, int n_starts,
                                  std::uint64_t seed, double tol) {
  check_exponent(p);
  const RayleighProblem P = domain_problem(X, omega);
  const Index n = P.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  UniquenessReport rep;
  std::vector<Eigen::VectorXd> solutions;
  for (int s = 0; s < n_starts; ++s) {
    Eigen::VectorXd u0(n);
    for (Index i = 0; i < n; ++i) u0[i] = unif(rng);
    try {
      Iterate it = p == 2 ? inverse_iteration(P, u0, tol, max_inverse_iterations)
                          : descend(P, u0, p, tol, max_descent_iterations, nullptr, 0);
      rep.lambdas.push_back(it.R);
      solutions.push_back(std::move(it.u));
      ++rep.successes;
    } catch (const SolverError& e) {
      ++rep.failures;
      rep.failure_messages.push_back(std::string(e.what()) + ": " + e.diagnostics());
    }
  }
  for (std::size_t a = 0; a < solutions.size(); ++a)
    for (std::size_t b = a + 1; b < solutions.size(); ++b)
      rep.max_distance =
          std::max(rep.max_distance, std::pow(problem_mass(P, solutions[a] - solutions[b], p), 1 / p));
  return rep;
}

}  // namespace rgap

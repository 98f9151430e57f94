#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "rgap/mms.hpp"
#include "rgap/model_space.hpp"

namespace rgap {

enum class EigenMethod { exact_p2, descent, shooting };
std::string to_string(EigenMethod method);

struct EigenResult {
  double lambda = 0;
  Eigen::VectorXd eigenfunction;  ///< non-negative, unit L^p norm, zero at the Dirichlet point / outside omega
  Eigen::VectorXd grid;           ///< abscissae for model problems; point ids for domain problems
  Index iterations = 0;
  double residual = 0;            ///< relative eigen-equation residual (Rayleigh residual for shooting)
  EigenMethod method = EigenMethod::exact_p2;
  std::string diagnostics;
};

/// The discrete W_0^{1,p} Rayleigh quotient on a finite set of unknowns.
///
/// Each link joins two unknowns, or one unknown and the Dirichlet boundary (b = -1), and
/// contributes sigma |u_a - u_b|^p / length^(p-1) to the energy. The denominator is sum m_i |u_i|^p.
struct RayleighProblem {
  struct Link {
    Index a = 0;
    Index b = -1;
    double sigma = 0;
    double length = 0;
  };
  Eigen::VectorXd masses;
  std::vector<Link> links;
  Eigen::VectorXd abscissae;  ///< cell centers (model) or point ids (domain)
  std::vector<Index> global;  ///< point id of each unknown (domain problems)
  bool banded = false;        ///< links only join neighbours in index order

  Index size() const { return masses.size(); }
};

/// Cell-centered discretization of [0, r(v)]: n cells, free at 0, Dirichlet at r(v) through a
/// half-cell link.
RayleighProblem model_problem(const ModelSpaced& ms, double v, Index n);
/// Unknowns are the points of omega; edges leaving omega become half-length boundary links.
RayleighProblem domain_problem(const DiscreteMMS& X, const Subset& omega);

double problem_energy(const RayleighProblem& P, const Eigen::Ref<const Eigen::VectorXd>& u, double p);
double problem_mass(const RayleighProblem& P, const Eigen::Ref<const Eigen::VectorXd>& u, double p);
double rayleigh_quotient(const RayleighProblem& P, const Eigen::Ref<const Eigen::VectorXd>& u, double p);

/// lambda^p_{K,N,v} on n cells of [0, r(v)]. p = 2 uses inverse iteration on the tridiagonal pencil,
/// other p a preconditioned descent on the Rayleigh quotient with periodic monotone rearrangement.
/// The eigenfunction has n + 1 entries: the cell values and the zero at r(v).
EigenResult lambda_model(double K, double N, double v, double p, Index n = 1024, double tol = 1e-10);

/// Same quantity from the Euler-Lagrange ODE, integrated with adaptive Runge-Kutta and
/// bisection on lambda until the first zero of u sits at r(v).
EigenResult lambda_shooting(double K, double N, double v, double p, double tol = 1e-10);

/// lambda^p_X(omega). p = 2 is solved by sparse inverse iteration; other p by descent started from
/// the p = 2 eigenfunction and n_starts - 1 random positive functions, keeping the best. The
/// eigenfunction is indexed by the points of X and vanishes outside omega.
EigenResult lambda_domain(const DiscreteMMS& X, const Subset& omega, double p, double tol = 1e-10,
                          int n_starts = 1, std::uint64_t seed = 0);

struct UniquenessReport {
  double max_distance = 0;  ///< max over pairs of ||u_i - u_j||_p after normalization
  int successes = 0;
  int failures = 0;
  std::vector<double> lambdas;
  std::vector<std::string> failure_messages;
};

/// Independent descents from random positive starts on omega.
UniquenessReport uniqueness_probe(const DiscreteMMS& X, const Subset& omega, double p, int n_starts,
                                  std::uint64_t seed, double tol = 1e-10);

}  // namespace rgap

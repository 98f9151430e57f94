#include <doctest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "rgap/eigensolver.hpp"
#include "rgap/generators.hpp"
#include "rgap/serialization.hpp"

using namespace rgap;
constexpr double pi = std::numbers::pi;

namespace {

// Dense pencil of the cell-centered model discretization, assembled from the oracle density.
double dense_model_lambda(double K, double N, double v, int n) {
  const ModelSpaced ms(K, N);  // only the inverse of the cumulative is taken from the library
  const double r = ms.radius_for_volume(v);
  const double dx = r / n;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    M(i, i) = static_cast<double>(oracle::simpson(
        [&](long double t) { return static_cast<long double>(oracle::model_density(K, N, static_cast<double>(t))); },
        static_cast<long double>(i * dx), static_cast<long double>((i + 1) * dx), 1e-18L));
  for (int i = 0; i + 1 < n; ++i) {
    const double w = oracle::model_density(K, N, (i + 1) * dx) / dx;
    A(i, i) += w;
    A(i + 1, i + 1) += w;
    A(i, i + 1) -= w;
    A(i + 1, i) -= w;
  }
  A(n - 1, n - 1) += oracle::model_density(K, N, r) / (dx / 2);
  return oracle::smallest_generalized_eigenvalue(A, M);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

TEST_CASE("p = 2 model eigenvalue agrees with the dense generalized eigensolver") {
  for (auto [K, N, v] : {std::tuple{1.0, 2.0, 0.5}, {2.0, 3.0, 0.3}, {1.0, 2.5, 0.8}, {0.5, 6.0, 0.1}}) {
    const auto res = lambda_model(K, N, v, 2, 200, 1e-12);
    CHECK(res.method == EigenMethod::exact_p2);
    CHECK(res.lambda == doctest::Approx(dense_model_lambda(K, N, v, 200)).epsilon(1e-9));
  }
}

TEST_CASE("hemisphere eigenvalues") {
  // first Dirichlet eigenvalue of the hemisphere of S^n is n
  CHECK(lambda_model(1, 2, 0.5, 2, 4096).lambda == doctest::Approx(2).epsilon(1e-6));
  CHECK(lambda_model(2, 3, 0.5, 2, 4096).lambda == doctest::Approx(3).epsilon(1e-6));
  CHECK(lambda_shooting(1, 2, 0.5, 2).lambda == doctest::Approx(2).epsilon(1e-8));
  CHECK(lambda_shooting(2, 3, 0.5, 2).lambda == doctest::Approx(3).epsilon(1e-8));
}

TEST_CASE("p = 2 grid convergence is second order") {
  const double e1 = std::abs(lambda_model(1, 2, 0.5, 2, 128).lambda - 2);
  const double e2 = std::abs(lambda_model(1, 2, 0.5, 2, 256).lambda - 2);
  const double e3 = std::abs(lambda_model(1, 2, 0.5, 2, 512).lambda - 2);
  CHECK(std::log2(e1 / e2) >= 1.8);
  CHECK(std::log2(e2 / e3) >= 1.8);
}

TEST_CASE("descent and shooting agree for p != 2") {
  for (double p : {1.5, 3.0}) {
    for (auto [K, N, v] : {std::tuple{1.0, 2.0, 0.5}, {2.0, 3.0, 0.25}}) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto d = lambda_model(K, N, v, p, 2048);
      CHECK(seconds_since(t0) < 5);
      const auto s = lambda_shooting(K, N, v, p);
      CHECK(d.method == EigenMethod::descent);
      CHECK(s.method == EigenMethod::shooting);
      CHECK(d.lambda == doctest::Approx(s.lambda).epsilon(1e-5));
      CHECK(s.residual < 1e-6);
    }
  }
}

TEST_CASE("model eigenvalue decreases with volume") {
  for (double p : {1.5, 2.0, 3.0}) {
    double prev = INFINITY;
    for (double v : {0.05, 0.1, 0.3, 0.5, 0.8, 0.95}) {
      const double l = lambda_model(1, 2.5, v, p, 512).lambda;
      CHECK(l < prev);
      prev = l;
    }
  }
}

TEST_CASE("model eigenfunction properties and Rayleigh consistency") {
  const ModelSpaced ms(1, 2);
  for (double p : {1.5, 2.0, 3.0}) {
    const Index n = 256;
    const auto res = lambda_model(1, 2, 0.4, p, n);
    REQUIRE(res.eigenfunction.size() == n + 1);
    CHECK(res.eigenfunction[n] == 0);
    CHECK(res.eigenfunction.minCoeff() >= 0);
    CHECK(res.grid[n] == doctest::Approx(ms.radius_for_volume(0.4)).epsilon(1e-14));
    for (Index j = 0; j + 1 < n; ++j) CHECK(res.eigenfunction[j] >= res.eigenfunction[j + 1] - 1e-12);
    const auto P = model_problem(ms, 0.4, n);
    const Eigen::VectorXd u = res.eigenfunction.head(n);
    CHECK(rayleigh_quotient(P, u, p) == doctest::Approx(res.lambda).epsilon(1e-9));
    CHECK(problem_mass(P, u, p) == doctest::Approx(1).epsilon(1e-9));
    CHECK(res.residual < 1e-5);
  }
}

TEST_CASE("initial segments of the model interval reproduce the model problem") {
  const Index n = 400;
  const auto X = build_model_interval(1, 2.5, n);
  const ModelSpaced ms(1, 2.5);
  for (Index k : {80, 200, 320}) {
    std::vector<bool> mask(static_cast<std::size_t>(n), false);
    for (Index i = 0; i < k; ++i) mask[static_cast<std::size_t>(i)] = true;
    const Subset omega(mask);
    const double v = ms.cumulative(X.pitch() * static_cast<double>(k));
    for (double p : {2.0, 3.0}) {
      const double dom = lambda_domain(X, omega, p).lambda;
      const double mod = lambda_model(1, 2.5, v, p, k).lambda;
      CHECK(dom == doctest::Approx(mod).epsilon(1e-6));
    }
  }
}

TEST_CASE("domain eigenfunctions vanish outside the domain and have unit norm") {
  const auto X = build_suspension(2, 2 * pi, 32, 16);
  Rng rng(5);
  const Subset omega = random_connected_domain(X, 0.3, rng);
  for (double p : {1.5, 2.0, 3.0}) {
    const auto res = lambda_domain(X, omega, p, 1e-10, 2, 9);
    REQUIRE(res.eigenfunction.size() == X.size());
    double mass = 0;
    for (Index i = 0; i < X.size(); ++i) {
      if (!omega.contains(i)) CHECK(res.eigenfunction[i] == 0);
      CHECK(res.eigenfunction[i] >= 0);
      mass += X.masses()[i] * std::pow(res.eigenfunction[i], p);
    }
    CHECK(mass == doctest::Approx(1).epsilon(1e-9));
    const auto P = domain_problem(X, omega);
    Eigen::VectorXd u(P.size());
    for (Index a = 0; a < P.size(); ++a) u[a] = res.eigenfunction[P.global[static_cast<std::size_t>(a)]];
    CHECK(rayleigh_quotient(P, u, p) == doctest::Approx(res.lambda).epsilon(1e-9));
    CHECK(dirichlet_energy(SampledFunction(X, res.eigenfunction), omega, p) == doctest::Approx(res.lambda).epsilon(1e-9));
  }
}

TEST_CASE("p = 2 domain eigenvalue agrees with a dense solve") {
  const auto X = build_suspension(2, 2 * pi, 12, 8);
  Rng rng(77);
  const Subset omega = random_connected_domain(X, 0.4, rng);
  const auto P = domain_problem(X, omega);
  const Index n = P.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd M = P.masses.asDiagonal();
  // rebuild stiffness from the graph directly
  std::vector<Index> local(static_cast<std::size_t>(X.size()), -1);
  for (Index a = 0; a < n; ++a) local[static_cast<std::size_t>(P.global[static_cast<std::size_t>(a)])] = a;
  for (const auto& e : X.edges()) {
    const Index a = local[static_cast<std::size_t>(e.i)];
    const Index b = local[static_cast<std::size_t>(e.j)];
    if (a < 0 && b < 0) continue;
    if (a >= 0 && b >= 0) {
      const double w = e.sigma / e.length;
      A(a, a) += w;
      A(b, b) += w;
      A(a, b) -= w;
      A(b, a) -= w;
    } else {
      A(std::max(a, b), std::max(a, b)) += e.sigma / (e.length / 2);
    }
  }
  CHECK(lambda_domain(X, omega, 2, 1e-12).lambda == doctest::Approx(oracle::smallest_generalized_eigenvalue(A, M)).epsilon(1e-9));
}

TEST_CASE("caps beat bands and the cap reproduces the model") {
  const auto X = build_suspension(2, 2 * pi, 128, 32);
  const Subset c = cap(X, 0.5);
  const Subset b = equatorial_band(X, 0.5);
  const double lc = lambda_domain(X, c, 2).lambda;
  const double lb = lambda_domain(X, b, 2).lambda;
  CHECK(lb > lc);
  CHECK(lc == doctest::Approx(lambda_model(1, 2, measure(X, c), 2, 64).lambda).epsilon(1e-8));
}

TEST_CASE("uniqueness probe") {
  const auto X = build_suspension(2, 2 * pi, 24, 12);
  Rng rng(8);
  const Subset omega = random_connected_domain(X, 0.4, rng);
  const auto single = uniqueness_probe(X, omega, 2, 1, 3);
  CHECK(single.max_distance == 0);
  CHECK(single.successes == 1);
  const auto many = uniqueness_probe(X, omega, 2, 4, 3, 1e-13);
  CHECK(many.successes == 4);
  CHECK(many.failures == 0);
  CHECK(many.max_distance <= 1e-5);
  for (double l : many.lambdas) CHECK(l == doctest::Approx(many.lambdas.front()).epsilon(1e-10));
  const auto p3 = uniqueness_probe(X, omega, 3, 3, 4);
  CHECK(p3.successes == 3);
  CHECK(p3.max_distance <= 1e-3);
}

TEST_CASE("invalid eigenproblems are rejected") {
  const auto X = build_suspension(2, 2 * pi, 8, 6);
  CHECK_THROWS_AS(lambda_domain(X, Subset::none(X.size()), 2), DomainError);
  CHECK_THROWS_AS(lambda_domain(X, Subset::all(X.size()), 2), DomainError);
  CHECK_THROWS_AS(lambda_domain(X, Subset::all(3), 2), DomainError);
  CHECK_THROWS_AS(lambda_model(1, 2, 0.0, 2), DomainError);
  CHECK_THROWS_AS(lambda_model(1, 2, 1.0, 2), DomainError);
  CHECK_THROWS_AS(lambda_model(1, 2, 0.5, 2, 16), DomainError);
  CHECK_THROWS_AS(lambda_model(1, 2, 0.5, 0.9), DomainError);
}

TEST_CASE("eigen result serialization") {
  const auto res = lambda_model(1, 2, 0.5, 2, 64);
  const auto j = to_json(res);
  CHECK(j.at("lambda").get<double>() == res.lambda);
  CHECK(j.at("method").get<std::string>() == "exact_p2");
  const std::string csv = eigenfunction_csv(res);
  CHECK(csv.rfind("x,u\n", 0) == 0);
  CHECK(static_cast<Index>(std::count(csv.begin(), csv.end(), '\n')) == res.grid.size() + 1);
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rgap/generators.hpp"
#include "rgap/rearrangement.hpp"
#include "rgap/serialization.hpp"

using namespace rgap;
constexpr double pi = std::numbers::pi;

namespace {

// Exact integral of |f#(s) - g#(s)|^p over s in [0, m], both decreasing step functions.
double decreasing_lp_distance(const DistributionFunction& f, const DistributionFunction& g, double p) {
  std::vector<double> cuts{0.0, f.domain_mass};
  cuts.insert(cuts.end(), f.masses.begin(), f.masses.end());
  cuts.insert(cuts.end(), g.masses.begin(), g.masses.end());
  std::sort(cuts.begin(), cuts.end());
  double acc = 0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = cuts[k + 1];
    if (b <= a) continue;
    const double mid = (a + b) / 2;
    acc += (b - a) * std::pow(std::abs(generalized_inverse(f, mid) - generalized_inverse(g, mid)), p);
  }
  return std::pow(acc, 1 / p);
}

}  // namespace

TEST_CASE("distribution and generalized inverse on a three point example") {
  Eigen::VectorXd v(3), m(3);
  v << 3, -1, 2;
  m << 0.2, 0.5, 0.3;
  const DiscreteMMS X(m, {{0, 1, 1.0, 1.0}, {1, 2, 1.0, 1.0}});
  const auto df = distribution(SampledFunction(X, v), Subset::all(3));
  CHECK(df.thresholds == std::vector<double>{1, 2, 3});
  CHECK(df.masses[0] == doctest::Approx(0.5));
  CHECK(df.masses[1] == doctest::Approx(0.2));
  CHECK(df.masses[2] == 0);
  CHECK(df(0) == doctest::Approx(1));
  CHECK(df(1.5) == doctest::Approx(0.5));
  CHECK(df(2.5) == doctest::Approx(0.2));
  CHECK(df(3) == 0);
  CHECK(generalized_inverse(df, 0) == 3);
  CHECK(generalized_inverse(df, 0.1) == 3);
  CHECK(generalized_inverse(df, 0.3) == 2);
  CHECK(generalized_inverse(df, 0.9) == 1);
  CHECK(generalized_inverse(df, 1.0) == 1);
  CHECK(lp_norm_df(df, 2) == doctest::Approx(std::sqrt(0.2 * 9 + 0.5 + 0.3 * 4)).epsilon(1e-14));
}

TEST_CASE("equimeasurability: the rearranged function has the same distribution") {
  const auto X = build_suspension(2, 2 * pi, 32, 16);
  Rng rng(12);
  for (int sample = 0; sample < 10; ++sample) {
    const Subset omega = sample % 2 ? Subset::all(X.size()) : random_connected_domain(X, 0.4, rng);
    const auto u = random_lipschitz(X, omega, rng);
    const auto df = distribution(u, omega);
    for (double N : {2.0, 3.5}) {
      const ModelSpaced ms(1.0, N);
      const auto dm = model_distribution(df, ms);
      REQUIRE(dm.thresholds.size() == df.thresholds.size());
      CHECK(dm.domain_mass == doctest::Approx(df.domain_mass).epsilon(1e-13));
      for (std::size_t k = 0; k < df.masses.size(); ++k) CHECK(std::abs(dm.masses[k] - df.masses[k]) < 1e-12);
    }
  }
}

TEST_CASE("L^p norms are preserved") {
  const auto X = build_suspension(3, 2 * pi, 24, 12);
  Rng rng(3);
  for (int sample = 0; sample < 8; ++sample) {
    const Subset omega = random_connected_domain(X, 0.2 + 0.1 * sample, rng);
    const auto u = random_values(X, rng);
    const auto df = distribution(u, omega);
    const ModelSpaced ms(2, 3);
    for (double p : {1.0, 1.5, 2.0, 3.0, 7.0}) {
      const double a = lp_norm(u, omega, p);
      CHECK(lp_norm_rearranged(df, ms, p) == doctest::Approx(a).epsilon(1e-12));
      CHECK(lp_norm_df(df, p) == doctest::Approx(a).epsilon(1e-12));
    }
  }
}

TEST_CASE("rearranged samples are non-increasing, non-negative and pinned by the boundary datum") {
  const auto X = build_suspension(2, 2 * pi, 32, 16);
  Rng rng(21);
  const ModelSpaced ms(1, 2);
  const Subset omega = random_connected_domain(X, 0.35, rng);
  const auto u = random_lipschitz(X, omega, rng);
  for (auto kind : {RearrangeGrid::uniform_x, RearrangeGrid::uniform_volume}) {
    const auto w = rearrange(u, omega, ms, 200, kind);
    REQUIRE(w.values.size() == 201);
    CHECK(w.dirichlet);
    CHECK(w.values[200] == 0);
    CHECK(w.r == doctest::Approx(ms.radius_for_volume(measure(X, omega))).epsilon(1e-13));
    CHECK(w.grid[200] == w.r);
    for (Index j = 0; j + 1 < w.values.size(); ++j) {
      CHECK(w.values[j] >= w.values[j + 1]);
      CHECK(w.grid[j] < w.grid[j + 1]);
    }
    CHECK(w.values.minCoeff() >= 0);
    CHECK(w.values[0] == doctest::Approx(u.values().cwiseAbs().maxCoeff()));
    CHECK(sample_cell_masses(w).sum() == doctest::Approx(measure(X, omega)).epsilon(1e-12));
  }
  const auto full = rearrange(u, Subset::all(X.size()), ms, 64);
  CHECK_FALSE(full.dirichlet);
  CHECK(full.r == doctest::Approx(pi).epsilon(1e-14));
  CHECK(full.values[64] == doctest::Approx(u.values().cwiseAbs().minCoeff()));
}

TEST_CASE("a decreasing function on the model interval is its own rearrangement") {
  const Index n = 128;
  const auto X = build_model_interval(1, 3, n);
  const auto u = radial_function(X, [](double t) { return 2 + std::cos(t / std::sqrt(2.0)); });
  const ModelSpaced ms(1, 3);
  const auto w = rearrange(u, Subset::all(X.size()), ms, n);
  for (Index j = 0; j < n; ++j) CHECK(w.values[j] == doctest::Approx(u[j]).epsilon(1e-12));
}

TEST_CASE("rearrangement is idempotent") {
  const auto X = build_suspension(2, 2 * pi, 24, 12);
  Rng rng(31);
  const ModelSpaced ms(1, 2);
  const Subset omega = random_connected_domain(X, 0.5, rng);
  const auto u = random_values(X, rng, 0, 1);
  const auto w = rearrange(u, omega, ms, 96, RearrangeGrid::uniform_volume);
  const auto w2 = rearrange(w, 96, RearrangeGrid::uniform_volume);
  CHECK((w2.values - w.values).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((w2.grid - w.grid).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("rearrangement commutes with non-decreasing maps fixing zero") {
  const auto X = build_suspension(2.5, 2 * pi, 20, 10);
  Rng rng(44);
  const ModelSpaced ms(1.5, 2.5);
  const Subset omega = random_connected_domain(X, 0.6, rng);
  const auto u = random_lipschitz(X, omega, rng);
  const auto phi = [](double s) { return s * s * s + std::atan(s); };
  Eigen::VectorXd mapped = u.values().unaryExpr(phi);
  const SampledFunction pu(X, mapped);
  const auto w = rearrange(u, omega, ms, 100);
  const auto pw = rearrange(pu, omega, ms, 100);
  for (Index j = 0; j < w.values.size(); ++j) CHECK(pw.values[j] == doctest::Approx(phi(w.values[j])).epsilon(1e-13));
}

TEST_CASE("rearrangement is an L^p contraction") {
  const auto X = build_suspension(2, 2 * pi, 20, 10);
  Rng rng(55);
  for (int sample = 0; sample < 20; ++sample) {
    const Subset omega = random_connected_domain(X, 0.3 + 0.03 * sample, rng);
    const auto u = random_values(X, rng);
    const auto v = random_lipschitz(X, omega, rng);
    const SampledFunction diff(X, u.values().cwiseAbs() - v.values().cwiseAbs());
    for (double p : {1.0, 2.0, 4.0}) {
      const double lhs = decreasing_lp_distance(distribution(u, omega), distribution(v, omega), p);
      CHECK(lhs <= lp_norm(diff, omega, p) * (1 + 1e-12));
    }
  }
}

TEST_CASE("Lipschitz constant does not grow under rearrangement of radial data") {
  const Index n_t = 64;
  const auto X = build_suspension(2, 2 * pi, n_t, 16);
  const ModelSpaced ms(1, 2);
  const auto u = radial_function(X, [](double t) { return std::exp(-t); });
  const auto w = rearrange(u, Subset::all(X.size()), ms, n_t);
  CHECK(lipschitz_constant(w) <= lipschitz_constant(u) * (1 + 1e-12));
  CHECK(lipschitz_constant(w) == doctest::Approx(lipschitz_constant(u)).epsilon(1e-12));
}

TEST_CASE("rearrangement does not raise the all-pairs Lipschitz constant beyond grid error") {
  // Lipschitz constant of the samples with respect to great-circle distance on the round sphere.
  const auto pairwise = [](const SampledFunction& u) {
    const auto& c = u.space().coordinates();
    double L = 0;
    for (Index i = 0; i < c.rows(); ++i)
      for (Index j = 0; j < i; ++j) {
        const double cosd = std::cos(c(i, 0)) * std::cos(c(j, 0)) +
                            std::sin(c(i, 0)) * std::sin(c(j, 0)) * std::cos(c(i, 1) - c(j, 1));
        const double d = std::acos(std::clamp(cosd, -1.0, 1.0));
        if (d > 1e-12) L = std::max(L, std::abs(u[i] - u[j]) / d);
      }
    return L;
  };
  const ModelSpaced ms(1, 2);
  std::vector<double> worst;
  for (Index n : {16, 32}) {
    const auto X = build_suspension(2, 2 * pi, n, 2 * n);
    Rng rng(66);
    double w_ratio = 0;
    for (int sample = 0; sample < 6; ++sample) {
      const auto u = random_lipschitz(X, Subset::all(X.size()), rng);
      const auto w = rearrange(u, Subset::all(X.size()), ms, n);
      w_ratio = std::max(w_ratio, lipschitz_constant(w) / pairwise(u));
    }
    worst.push_back(w_ratio);
  }
  CHECK(worst[0] <= 1.2);
  CHECK(worst[1] <= 1.1);
}

TEST_CASE("JSON round trip of distribution and rearranged function") {
  const auto X = build_suspension(2, 2 * pi, 8, 6);
  Rng rng(2);
  const auto u = random_values(X, rng);
  const auto df = distribution(u, Subset::all(X.size()));
  const auto df2 = distribution_from_json(to_json(df));
  CHECK(df2.thresholds == df.thresholds);
  CHECK(df2.masses == df.masses);
  const auto w = rearrange(df, ModelSpaced(1, 2), 16, false);
  const auto w2 = rearranged_from_json(to_json(w));
  CHECK(w2.values == w.values);
  CHECK(w2.grid == w.grid);
  CHECK(w2.model.N() == 2);
}

TEST_CASE("invalid input is rejected") {
  const auto X = build_suspension(2, 2 * pi, 8, 6);
  const auto u = SampledFunction(X, Eigen::VectorXd::Ones(X.size()));
  const ModelSpaced ms(1, 2);
  CHECK_THROWS_AS(rearrange(u, Subset::all(X.size()), ms, 0), DomainError);
  CHECK_THROWS_AS(rearrange(u, Subset::all(3), ms, 10), DomainError);
  Eigen::VectorXd nan_values = Eigen::VectorXd::Ones(X.size());
  nan_values[0] = std::nan("");
  CHECK_THROWS_AS(distribution(SampledFunction(X, nan_values), Subset::all(X.size())), DomainError);
}

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "rgap/model_space.hpp"

using rgap::ModelSpaced;
constexpr double pi = std::numbers::pi;

TEST_CASE("density at reference points") {
  const ModelSpaced s12(1, 2);
  const ModelSpaced s23(2, 3);
  CHECK(s12.density(pi / 2) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(s12.density(0) == 0);
  CHECK(s12.density(pi) == doctest::Approx(0).epsilon(1e-15));
  CHECK(s23.density(pi / 2) == doctest::Approx(2 / pi).epsilon(1e-13));
}

TEST_CASE("density is symmetric about the midpoint") {
  for (double N : {1.5, 2.0, 3.7, 9.0}) {
    const ModelSpaced ms(2.0, N);
    const double D = ms.diameter();
    for (double f : {0.05, 0.2, 0.4, 0.49}) CHECK(ms.density(f * D) == doctest::Approx(ms.density((1 - f) * D)).epsilon(1e-12));
  }
}

TEST_CASE("normalization against the Beta-function closed form") {
  CHECK(rgap::normalization(1.0, 2.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(rgap::normalization(2.0, 3.0) == doctest::Approx(pi / 2).epsilon(1e-14));
  for (double N : {1.25, 1.5, 2.5, 4.0, 7.3, 16.0, 33.5, 64.0}) {
    for (double K : {0.5, 1.0, 3.0}) {
      const double expected = oracle::sine_power_integral(N - 1) / std::sqrt(K / (N - 1));
      CHECK(rgap::normalization(K, N) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("diameter") {
  CHECK(ModelSpaced(1, 2).diameter() == pi);
  CHECK(ModelSpaced(4, 5).diameter() == pi * std::sqrt(4.0 / 4.0));
  CHECK(ModelSpaced(1, 3).diameter() == doctest::Approx(pi * std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("cumulative at reference points") {
  const ModelSpaced s12(1, 2);
  const ModelSpaced s23(2, 3);
  CHECK(s12.cumulative(pi / 2) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(s12.cumulative(pi) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s12.cumulative(0) == 0);
  CHECK(s23.cumulative(pi / 4) == doctest::Approx((pi / 4 - 0.5) / pi).epsilon(1e-13));
  // closed form for N = 2: (1 - cos x) / 2
  for (double x : {0.1, 0.7, 1.3, 2.2, 3.0}) CHECK(s12.cumulative(x) == doctest::Approx((1 - std::cos(x)) / 2).epsilon(1e-13));
}

TEST_CASE("cumulative against adaptive quadrature for fractional dimension") {
  std::mt19937_64 rng(5);
  for (double N : {1.5, 2.5, 5.75}) {
    const double K = 1.3;
    const ModelSpaced ms(K, N);
    std::uniform_real_distribution<double> pos(0, ms.diameter());
    for (int k = 0; k < 6; ++k) {
      const double x = pos(rng);
      CHECK(ms.cumulative(x) == doctest::Approx(oracle::model_cumulative(K, N, x)).epsilon(1e-11));
    }
  }
}

TEST_CASE("cumulative is increasing and reaches one") {
  for (double N : {1.2, 2.0, 3.5, 12.0}) {
    const ModelSpaced ms(1.0, N);
    double prev = 0;
    for (int k = 1; k <= 400; ++k) {
      const double c = ms.cumulative(ms.diameter() * k / 400.0);
      if (k <= 300) CHECK(c > prev); else CHECK(c >= prev);
      prev = c;
    }
    CHECK(std::abs(prev - 1) < 1e-12);
  }
}

TEST_CASE("radius_for_volume inverts cumulative") {
  const ModelSpaced s12(1, 2);
  CHECK(s12.radius_for_volume(0.5) == doctest::Approx(pi / 2).epsilon(1e-13));
  CHECK(s12.radius_for_volume(0) == 0);
  CHECK(s12.radius_for_volume(1) == doctest::Approx(pi).epsilon(1e-15));
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> vol(0, 1);
  for (double N : {1.4, 2.0, 3.0, 6.5, 40.0}) {
    const ModelSpaced ms(0.7, N);
    for (int k = 0; k < 25; ++k) {
      const double v = vol(rng);
      CHECK(std::abs(ms.cumulative(ms.radius_for_volume(v)) - v) < 1e-13);
    }
    for (double v : {1e-12, 1e-6, 1 - 1e-6, 1 - 1e-12}) CHECK(std::abs(ms.cumulative(ms.radius_for_volume(v)) - v) < 1e-13);
  }
}

TEST_CASE("isoperimetric profile") {
  CHECK(ModelSpaced(1, 2).iso_profile(0.5) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(ModelSpaced(2, 3).iso_profile(0.5) == doctest::Approx(2 / pi).epsilon(1e-13));
  CHECK(ModelSpaced(1, 2).iso_profile(0) == 0);
  CHECK(ModelSpaced(1, 2).iso_profile(1) == 0);
  // closed form for N = 2: I(v) = sqrt(v (1 - v))
  for (double v : {0.01, 0.2, 0.6, 0.93}) CHECK(ModelSpaced(1, 2).iso_profile(v) == doctest::Approx(std::sqrt(v * (1 - v))).epsilon(1e-12));
  for (double N : {1.7, 3.0, 8.0}) {
    const ModelSpaced ms(2.0, N);
    for (double v : {0.05, 0.3, 0.45}) CHECK(ms.iso_profile(v) == doctest::Approx(ms.iso_profile(1 - v)).epsilon(1e-12));
  }
}

TEST_CASE("invalid arguments are rejected") {
  CHECK_THROWS_AS(ModelSpaced(0, 2), rgap::DomainError);
  CHECK_THROWS_AS(ModelSpaced(-1, 2), rgap::DomainError);
  CHECK_THROWS_AS(ModelSpaced(1, 1), rgap::DomainError);
  CHECK_THROWS_AS(ModelSpaced(1, std::nan("")), rgap::DomainError);
  CHECK_THROWS_AS(ModelSpaced(1, INFINITY), rgap::DomainError);
  const ModelSpaced ms(1, 2);
  CHECK_THROWS_AS(ms.density(-0.1), rgap::DomainError);
  CHECK_THROWS_AS(ms.density(pi + 0.1), rgap::DomainError);
  CHECK_THROWS_AS(ms.cumulative(4.0), rgap::DomainError);
  CHECK_THROWS_AS(ms.radius_for_volume(1.5), rgap::DomainError);
  CHECK_THROWS_AS(ms.iso_profile(-0.2), rgap::DomainError);
}

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "rgap/errors.hpp"
#include "rgap/gauss_legendre.hpp"

namespace rgap {

/// The one-dimensional model space for curvature bound K > 0 and dimension bound N > 1:
/// the interval [0, D], D = pi sqrt((N-1)/K), with the probability density
///
///     h(t) = sin(t sqrt(K/(N-1)))^(N-1) / c,
///
/// where c normalizes the total mass to one.
///
/// All arithmetic is done in the rescaled variable s = t sqrt(K/(N-1)) in [0, pi], where the
/// unnormalized density is sin(s)^(N-1). Only the half interval [0, pi/2] is integrated; the
/// other half follows from the reflection s -> pi - s. The primitive of sin(s)^(N-1) is cached
/// at the boundaries of a uniform panel mesh, and every query integrates the last partial panel
/// with the same 16-point Gauss-Legendre rule, so cumulative() is exact to quadrature accuracy.
///
/// Immutable after construction.
template <typename Scalar = double>
class ModelSpace {
 public:
  static constexpr std::size_t kDefaultPanels = 256;

  ModelSpace(Scalar K, Scalar N, std::size_t panels = kDefaultPanels) : K_(K), N_(N) {
    if (!std::isfinite(K) || !std::isfinite(N) || !(K > 0) || !(N > 1)) {
      std::ostringstream os;
      os << "model space requires finite K > 0 and N > 1 (got K=" << K << ", N=" << N << ")";
      throw DomainError(os.str());
    }
    if (panels < 2) throw DomainError("model space quadrature needs at least 2 panels");
    exponent_ = N - 1;
    scale_ = std::sqrt(K / (N - 1));
    diameter_ = std::numbers::pi_v<Scalar> * std::sqrt((N - 1) / K);
    smooth_ = std::abs(exponent_ - std::round(exponent_)) < Scalar(1e-14);

    const std::size_t half_panels = std::max<std::size_t>(panels / 2, 1);
    panel_width_ = std::numbers::pi_v<Scalar> / 2 / Scalar(half_panels);
    primitive_.assign(half_panels + 1, Scalar(0));
    for (std::size_t k = 0; k < half_panels; ++k) {
      const Scalar a = Scalar(k) * panel_width_;
      primitive_[k + 1] = primitive_[k] + integrate(a, a + panel_width_);
    }
    half_mass_ = primitive_.back();
    normalization_ = 2 * half_mass_ / scale_;
  }

  Scalar K() const noexcept { return K_; }
  Scalar N() const noexcept { return N_; }
  Scalar diameter() const noexcept { return diameter_; }
  /// c_{K,N} = integral of sin(t sqrt(K/(N-1)))^(N-1) over [0, D].
  Scalar normalization() const noexcept { return normalization_; }

  Scalar density(Scalar t) const {
    check_position(t);
    return unnormalized(reflect(scale_ * t)) / normalization_;
  }

  /// Model measure of [0, x].
  Scalar cumulative(Scalar x) const {
    check_position(x);
    const Scalar s = scale_ * x;
    const Scalar half_pi = std::numbers::pi_v<Scalar> / 2;
    if (s <= half_pi) return primitive(s) / (2 * half_mass_);
    return 1 - primitive(std::max(Scalar(0), std::numbers::pi_v<Scalar> - s)) / (2 * half_mass_);
  }

  /// The radius r with cumulative(r) = v.
  Scalar radius_for_volume(Scalar v) const {
    check_volume(v);
    if (v == 0) return 0;
    if (v == 1) return diameter_;
    if (v > Scalar(0.5)) return diameter_ - half_radius(1 - v) / scale_;
    return half_radius(v) / scale_;
  }

  /// The isoperimetric profile I_{K,N}(v) = h(r(v)); zero at v = 0 and v = 1.
  Scalar iso_profile(Scalar v) const {
    check_volume(v);
    if (v == 0 || v == 1) return 0;
    if (v > Scalar(0.5)) {
      const Scalar s = half_radius(1 - v);
      return unnormalized(s) / normalization_;
    }
    return unnormalized(half_radius(v)) / normalization_;
  }

 private:
  Scalar unnormalized(Scalar s) const { return std::pow(std::sin(s), exponent_); }

  Scalar reflect(Scalar s) const {
    const Scalar pi = std::numbers::pi_v<Scalar>;
    return s > pi / 2 ? std::max(Scalar(0), pi - s) : s;
  }

  void check_position(Scalar t) const {
    const Scalar slack = 64 * std::numeric_limits<Scalar>::epsilon() * diameter_;
    if (!(t >= -slack && t <= diameter_ + slack)) {
      std::ostringstream os;
      os << "position " << t << " outside [0, " << diameter_ << "]";
      throw DomainError(os.str());
    }
  }

  static void check_volume(Scalar v) {
    if (!(v >= 0 && v <= 1)) {
      std::ostringstream os;
      os << "volume " << v << " outside [0, 1]";
      throw DomainError(os.str());
    }
  }

  Scalar integrate(Scalar a, Scalar b) const {
    const auto f = [this](Scalar s) { return unnormalized(s); };
    if (a > 0 || smooth_) return rule_.integrate(f, a, b);
    // sin(s)^(N-1) ~ s^(N-1) has a branch point at 0 for non-integer N: geometric grading.
    constexpr Scalar ratio = Scalar(0.2);
    Scalar sum = 0;
    Scalar hi = b;
    for (int level = 0; level < 48; ++level) {
      const Scalar lo = hi * ratio;
      sum += rule_.integrate(f, lo, hi);
      hi = lo;
    }
    return sum;
  }

  /// Integral of sin^(N-1) over [0, s] for s in [0, pi/2].
  Scalar primitive(Scalar s) const {
    if (s <= 0) return 0;
    const std::size_t last = primitive_.size() - 1;
    std::size_t k = static_cast<std::size_t>(s / panel_width_);
    if (k >= last) k = last - 1;
    const Scalar a = Scalar(k) * panel_width_;
    return primitive_[k] + integrate(a, s);
  }

  /// Solves primitive(s) = 2 v half_mass_ for s in [0, pi/2], v in (0, 1/2].
  Scalar half_radius(Scalar v) const {
    const Scalar target = 2 * v * half_mass_;
    Scalar lo = 0;
    Scalar hi = std::numbers::pi_v<Scalar> / 2;
    if (target >= half_mass_) return hi;
    // near the tip the primitive behaves like s^N / N
    Scalar s = std::pow(N_ * target, 1 / N_);
    if (!(s > lo && s < hi)) s = (lo + hi) / 2;
    const Scalar ftol = 4 * std::numeric_limits<Scalar>::epsilon() * half_mass_;
    for (int it = 0; it < 200; ++it) {
      const Scalar f = primitive(s) - target;
      if (std::abs(f) <= ftol) return s;
      if (f > 0)
        hi = s;
      else
        lo = s;
      const Scalar df = unnormalized(s);
      Scalar next = df > 0 ? s - f / df : (lo + hi) / 2;
      if (!(next > lo && next < hi)) next = (lo + hi) / 2;
      if (hi - lo <= 4 * std::numeric_limits<Scalar>::epsilon() * hi) return next;
      s = next;
    }
    return s;
  }

  Scalar K_;
  Scalar N_;
  Scalar exponent_{};
  Scalar scale_{};
  Scalar diameter_{};
  Scalar panel_width_{};
  Scalar half_mass_{};
  Scalar normalization_{};
  bool smooth_ = true;
  std::vector<Scalar> primitive_;
  GaussLegendre<Scalar, 16> rule_;
};

using ModelSpaced = ModelSpace<double>;

template <typename Scalar>
Scalar density(const ModelSpace<Scalar>& ms, Scalar t) {
  return ms.density(t);
}

template <typename Scalar>
Scalar cumulative(const ModelSpace<Scalar>& ms, Scalar x) {
  return ms.cumulative(x);
}

template <typename Scalar>
Scalar radius_for_volume(const ModelSpace<Scalar>& ms, Scalar v) {
  return ms.radius_for_volume(v);
}

template <typename Scalar>
Scalar iso_profile(const ModelSpace<Scalar>& ms, Scalar v) {
  return ms.iso_profile(v);
}

/// c_{K,N} computed with the given number of quadrature panels.
template <typename Scalar>
Scalar normalization(Scalar K, Scalar N, std::size_t panels = ModelSpace<Scalar>::kDefaultPanels) {
  return ModelSpace<Scalar>(K, N, panels).normalization();
}

}  // namespace rgap

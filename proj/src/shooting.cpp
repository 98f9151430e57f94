#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <sstream>

#include "rgap/eigensolver.hpp"
#include "rgap/errors.hpp"

namespace rgap {

namespace {

namespace odeint = boost::numeric::odeint;

// (u, phi, int h |u'|^p, int h |u|^p) with phi = h |u'|^(p-2) u'
using State = std::array<double, 4>;

struct Flux {
  const ModelSpaced* ms;
  double p;
  double lambda;

  void operator()(const State& y, State& dy, double t) const {
    const double h = ms->density(std::min(t, ms->diameter()));
    const double phi = y[1];
    const double du = h > 0 ? std::copysign(std::pow(std::abs(phi) / h, 1 / (p - 1)), phi) : 0.0;
    const double au = std::abs(y[0]);
    dy[0] = du;
    dy[1] = -lambda * h * std::pow(au, p - 1) * (y[0] >= 0 ? 1 : -1);
    dy[2] = h * std::pow(std::abs(du), p);
    dy[3] = h * std::pow(au, p);
  }
};

struct Shot {
  bool crossed = false;  // u reached zero before r
  double zero = 0;       // first zero (when crossed)
  State end{};           // state at r, or at the zero
};

State startup(const ModelSpaced& ms, double lambda, double delta) {
  // h ~ c t^(N-1) near the tip gives u' ~ -(lambda t / N)^(1/(p-1)), phi ~ -lambda h t / N
  const double N = ms.N();
  const double h = ms.density(delta);
  const double phi = -lambda * h * delta / N;
  return {1.0, phi, 0.0, h * delta / N};
}

Shot shoot(const ModelSpaced& ms, double p, double lambda, double r, double delta, double rtol) {
  Flux rhs{&ms, p, lambda};
  auto stepper = odeint::make_dense_output(rtol * 1e-2, rtol, odeint::runge_kutta_dopri5<State>());
  stepper.initialize(startup(ms, lambda, delta), delta, (r - delta) * 1e-4);
  Shot shot;
  while (stepper.current_time() < r) {
    if (stepper.current_time() + stepper.current_time_step() > r)
      stepper.initialize(stepper.current_state(), stepper.current_time(), r - stepper.current_time());
    const auto [t0, t1] = stepper.do_step(rhs);
    if (stepper.current_state()[0] <= 0) {
      // locate the first zero inside the last step
      double a = t0;
      double b = t1;
      State y{};
      for (int k = 0; k < 80 && b - a > 1e-15 * r; ++k) {
        const double m = (a + b) / 2;
        stepper.calc_state(m, y);
        (y[0] > 0 ? a : b) = m;
      }
      stepper.calc_state(b, y);
      shot.crossed = true;
      shot.zero = b;
      shot.end = y;
      return shot;
    }
    if (t1 >= r * (1 - 1e-15)) break;
  }
  shot.end = stepper.current_state();
  return shot;
}

// lambda in the bracket whose first zero lands at r
double bisect(const ModelSpaced& ms, double p, double r, double delta, double tol, double rtol, int& steps) {
  double lo = 1e-6;
  double hi = 1e6;
  if (shoot(ms, p, lo, r, delta, rtol).crossed || !shoot(ms, p, hi, r, delta, rtol).crossed)
    throw SolverError("no eigenvalue bracket in [1e-6, 1e6]", "");
  // tighten geometrically before bisecting arithmetically
  double probe = 1;
  while (probe < hi) {
    if (shoot(ms, p, probe, r, delta, rtol).crossed) {
      hi = probe;
      break;
    }
    lo = probe;
    probe *= 2;
  }
  steps = 0;
  while (hi - lo > tol * lo) {
    const double mid = (lo + hi) / 2;
    (shoot(ms, p, mid, r, delta, rtol).crossed ? hi : lo) = mid;
    if (++steps > 200) throw SolverError("shooting bisection did not converge", "");
  }
  return (lo + hi) / 2;
}

}  // namespace

EigenResult lambda_shooting(double K, double N, double v, double p, double tol) {
  if (!(p > 1) || !std::isfinite(p)) throw DomainError("exponent p must lie in (1, inf)");
  if (!(v > 0) || !(v <= 1 - 1e-3)) throw DomainError("volume must lie in (0, 1 - 1e-3]");
  if (!(tol > 0)) throw DomainError("tolerance must be positive");
  const ModelSpaced ms(K, N);
  const double r = ms.radius_for_volume(v);
  const double delta = 1e-6 * ms.diameter();
  const double rtol = std::clamp(tol * 1e-2, 1e-13, 1e-8);

  int steps = 0;
  const double lambda = bisect(ms, p, r, delta, tol, rtol, steps);
  int steps_alt = 0;
  const double lambda_alt = bisect(ms, p, r, 10 * delta, tol, rtol, steps_alt);

  // eigenfunction samples on a uniform grid of [delta, r]
  constexpr Index samples = 256;
  EigenResult res;
  res.method = EigenMethod::shooting;
  res.lambda = lambda;
  res.iterations = steps;
  res.grid = Eigen::VectorXd::LinSpaced(samples + 1, delta, r);
  res.eigenfunction.resize(samples + 1);
  {
    Flux rhs{&ms, p, lambda};
    State y = startup(ms, lambda, delta);
    res.eigenfunction[0] = y[0];
    auto stepper = odeint::make_controlled(rtol * 1e-2, rtol, odeint::runge_kutta_dopri5<State>());
    for (Index k = 1; k <= samples; ++k) {
      odeint::integrate_adaptive(stepper, rhs, y, res.grid[k - 1], res.grid[k], (r - delta) * 1e-4);
      res.eigenfunction[k] = std::max(y[0], 0.0);
    }
    const double E = y[2];
    const double M = y[3];
    res.residual = std::abs(E / M - lambda) / lambda;
    res.eigenfunction /= std::pow(M, 1 / p);
  }
  res.eigenfunction[samples] = 0;
  std::ostringstream diag;
  diag.precision(3);
  diag << "delta " << delta << ", relative change with 10 delta " << std::abs(lambda_alt - lambda) / lambda
       << ", bisection steps " << steps;
  res.diagnostics = diag.str();
  return res;
}

}  // namespace rgap

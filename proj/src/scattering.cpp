#include "grazing/scattering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "grazing/error.hpp"

namespace grazing {

namespace {

constexpr double kPi = std::numbers::pi;

void check_inputs(double rho, double kappa) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw DomainError("rho must be >= 0");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw DomainError("kappa must be >= 0");
}

// Upper bracket for an increasing fn with fn(lo) <= 0: the support edge for
// compact potentials, otherwise doubling.
double upper_bracket(const Potential& p, const quad::Fn1& fn, double lo) {
  if (p.compact()) return p.support();
  double hi = std::max(2.0 * lo, 1e-300);
  for (int i = 0; i < 2000 && !(fn(hi) > 0.0); ++i) hi *= 2.0;
  return hi;
}

}  // namespace

TurningPoint r_min(const Potential& p, double rho, double kappa) {
  check_inputs(rho, kappa);
  if (rho == 0.0) {
    if (kappa == 0.0) throw DomainError("r_min: rho and kappa cannot both be 0");
    const double f0 = p.f_at_zero();
    if (p.s() == 0.0 && 2.0 * kappa * f0 < 1.0) return {0.0, true};
    // Turning point where 2 kappa phi(r) = 1.
    auto fn = [&](double r) { return 1.0 - 2.0 * kappa * p.phi(r); };
    double lo = p.compact() ? p.support() : 1.0;
    while (!(fn(lo) < 0.0)) {
      lo *= 0.5;
      if (lo < 1e-300) return {0.0, true};
    }
    const double hi = upper_bracket(p, fn, lo);
    return {quad::find_root_increasing(fn, lo, hi, 1e-15), false};
  }
  if (rho >= p.support() || kappa == 0.0) return {rho, false};
  auto fn = [&](double r) {
    const double t = rho / r;
    return 1.0 - 2.0 * kappa * p.phi(r) - t * t;
  };
  if (!(fn(rho) < 0.0)) return {rho, false};
  const double hi = upper_bracket(p, fn, rho);
  return {quad::find_root_increasing(fn, rho, hi, 1e-15), false};
}

AngleResult deflection_angle(const Potential& p, double rho, double kappa, const quad::QuadSpec& spec) {
  check_inputs(rho, kappa);
  if (rho >= p.support() || kappa == 0.0) return {0.0, 0.0, rho};
  if (rho == 0.0) {
    const TurningPoint tp = r_min(p, rho, kappa);
    return {tp.at_origin ? 0.0 : kPi, 0.0, tp.r};
  }
  const double rm = r_min(p, rho, kappa).r;
  const double phi_m = p.phi(rm);
  const double scale = 2.0 * kappa * (rm / rho) * (rm / rho);
  auto g = [&](double chi) {
    const double tau = std::sin(chi);
    const double c = std::cos(chi);
    double drop = phi_m;
    if (tau > 0.0) {
      const double h = std::sin(0.5 * (0.5 * kPi - chi));
      drop = p.phi_drop(rm, rm * 2.0 * h * h / tau);  // r - r_min = r_min (1 - tau) / tau
    }
    const double a = std::max(0.0, scale * drop);
    const double root = std::sqrt(c * c + a);
    if (a == 0.0) return 0.0;
    return a / (root * (c + root));
  };
  std::vector<double> breaks{0.0};
  if (p.compact()) {
    const double chi_l = std::asin(std::min(1.0, rm / p.support()));
    if (chi_l > 0.0 && chi_l < 0.5 * kPi) breaks.push_back(chi_l);
    for (double x : p.kinks())
      if (x > rm) breaks.push_back(std::asin(rm / x));
  }
  // Boundary layer of width ~ chi_L above chi_L when r_min << L.
  const double chi0 = breaks.size() > 1 ? breaks[1] : 0.0;
  if (chi0 > 0.0)
    for (double c = 4.0 * chi0; c < 0.5; c *= 4.0) breaks.push_back(c);
  breaks.push_back(0.5 * kPi);
  std::sort(breaks.begin(), breaks.end());
  double theta = 0.0, err = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    const auto r = quad::integrate_1d(g, breaks[i], breaks[i + 1], quad::Singularity::none(), spec);
    theta += r.value;
    err += r.error;
  }
  return {std::clamp(2.0 * theta, 0.0, kPi), 2.0 * err, rm};
}

double deflection_angle_u_form(const Potential& p, double rho, double kappa, const quad::QuadSpec& spec) {
  check_inputs(rho, kappa);
  if (rho >= p.support() || kappa == 0.0) return 0.0;
  if (rho == 0.0) return deflection_angle(p, rho, kappa, spec).theta;
  const double rm = r_min(p, rho, kappa).r;
  auto h = [&](double r) { return r * std::sqrt(std::max(0.0, 1.0 - 2.0 * kappa * p.phi(r))); };
  auto g = [&](double u) {
    if (u >= 1.0) return 0.0;
    const double target = rho / u;
    auto fn = [&](double r) { return h(r) - target; };
    double r;
    if (fn(rm) >= 0.0) {
      r = rm;
    } else {
      double hi = p.compact() ? std::max(p.support(), target) : 2.0 * target;
      while (!(fn(hi) > 0.0)) hi *= 2.0;
      if (fn(hi) == 0.0) r = hi;
      else r = quad::find_root_increasing(fn, rm, hi, 1e-15);
    }
    const double rd = p.r_dphi(r);
    return -kappa * rd / ((1.0 - 2.0 * kappa * p.phi(r) - kappa * rd) * std::sqrt((1.0 - u) * (1.0 + u)));
  };
  const double lo = p.compact() ? std::min(1.0, rho / p.support()) : 0.0;
  if (!(lo < 1.0)) return 0.0;
  return 2.0 * quad::integrate_1d(g, lo, 1.0, quad::Singularity::inverse_sqrt_right(), spec).value;
}

OdeAngle deflection_angle_ode(const Potential& p, double rho, double kappa, double ode_tol) {
  check_inputs(rho, kappa);
  if (!(ode_tol > 0.0)) throw DomainError("ode_tol must be > 0");
  if (rho >= p.support() || kappa == 0.0) return {};
  if (rho == 0.0) throw DomainError("deflection_angle_ode needs rho > 0");
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 4>;
  constexpr long kMaxSteps = 20'000'000;

  if (p.compact()) {
    const double L = p.support();
    auto rhs = [&](const State& x, State& dx, double) {
      const double r = std::hypot(x[0], x[1]);
      const double a = r > 0.0 ? -kappa * p.dphi(r) / r : 0.0;
      dx[0] = x[2];
      dx[1] = x[3];
      dx[2] = a * x[0];
      dx[3] = a * x[1];
    };
    auto energy = [&](const State& x) {
      return 0.5 * (x[2] * x[2] + x[3] * x[3]) + kappa * p.phi(std::hypot(x[0], x[1]));
    };
    State x{-std::sqrt(L * L - rho * rho), rho, 1.0, 0.0};
    auto stepper = ode::make_dense_output(ode_tol, ode_tol, ode::runge_kutta_dopri5<State>());
    stepper.initialize(x, 0.0, 1e-3 * L);
    OdeAngle out;
    double rmin_seen = L;
    while (true) {
      stepper.do_step(rhs);
      ++out.steps;
      const State& s = stepper.current_state();
      const double r = std::hypot(s[0], s[1]);
      rmin_seen = std::min(rmin_seen, r);
      out.energy_drift = std::max(out.energy_drift, std::abs(energy(s) - 0.5) / 0.5);
      if (r >= L && s[0] * s[2] + s[1] * s[3] > 0.0) {
        out.theta = std::atan2(s[3], s[2]);
        if (out.theta < 0.0) out.theta = -out.theta;
        return out;
      }
      if (out.steps > kMaxSteps || stepper.current_time_step() < 1e-300)
        throw NonConvergence("deflection_angle_ode: step limit near r = " + std::to_string(rmin_seen),
                             rmin_seen, 0.0);
    }
  }

  // Orbit equation for w = 1/r in the swept angle psi; starts at w = 0.
  const double s = p.s();
  if (s < 1.0) throw DomainError("deflection_angle_ode: non-compact potentials need s >= 1");
  const double f0 = p.f0();
  const double c = kappa / (rho * rho);
  using State2 = std::array<double, 2>;
  auto force = [&](double w) { return -s * f0 * std::pow(std::max(w, 0.0), s - 1.0); };
  auto rhs = [&](const State2& x, State2& dx, double) {
    dx[0] = x[1];
    dx[1] = -x[0] + c * force(x[0]);
  };
  auto energy = [&](const State2& x) {
    const double w = std::max(x[0], 0.0);
    return 0.5 * (x[1] * x[1] + x[0] * x[0]) + c * f0 * std::pow(w, s);
  };
  const double e0 = 0.5 / (rho * rho);
  State2 x{0.0, 1.0 / rho};
  auto stepper = ode::make_dense_output(ode_tol, ode_tol, ode::runge_kutta_dopri5<State2>());
  stepper.initialize(x, 0.0, 1e-3);
  OdeAngle out;
  while (true) {
    stepper.do_step(rhs);
    ++out.steps;
    const State2& st = stepper.current_state();
    out.energy_drift = std::max(out.energy_drift, std::abs(energy(st) - e0) / e0);
    if (st[0] <= 0.0 && st[1] < 0.0) {
      double a = stepper.previous_time(), b = stepper.current_time();
      State2 tmp;
      for (int i = 0; i < 200 && b - a > 1e-16 * b; ++i) {
        const double m = 0.5 * (a + b);
        stepper.calc_state(m, tmp);
        (tmp[0] > 0.0 ? a : b) = m;
      }
      out.theta = std::clamp(kPi - 0.5 * (a + b), 0.0, kPi);
      return out;
    }
    if (out.steps > kMaxSteps) throw NonConvergence("deflection_angle_ode: orbit step limit", 0.0, 0.0);
  }
}

double born_integral(const Potential& p, double rho, const quad::QuadSpec& spec) {
  if (!(rho > 0.0)) throw DomainError("born_integral needs rho > 0");
  if (rho >= p.support()) return 0.0;
  // u = 1 - t^2 removes the endpoint singularity exactly: du / sqrt(1 - u^2) = 2 dt / sqrt(2 - t^2).
  auto g = [&](double t) {
    const double u = 1.0 - t * t;
    if (u <= 0.0) return 0.0;
    return 2.0 * p.r_dphi(rho / u) / std::sqrt(2.0 - t * t);
  };
  const double lo = p.compact() ? rho / p.support() : 0.0;
  std::vector<double> breaks{0.0};
  for (double k : p.kinks())
    if (k > rho && k < p.support()) breaks.push_back(std::sqrt(1.0 - rho / k));
  breaks.push_back(std::sqrt(1.0 - lo));
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> parts;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    if (breaks[i] < breaks[i + 1])
      parts.push_back(quad::integrate_1d(g, breaks[i], breaks[i + 1], quad::Singularity::none(), spec).value);
  return quad::pairwise_sum(parts);
}

BornAngle born_angle(const Potential& p, double rho, double kappa, const quad::QuadSpec& spec) {
  check_inputs(rho, kappa);
  if (rho >= p.support()) return {0.0, true};
  BornAngle out;
  out.in_validity_region = kappa < std::pow(rho, p.s()) / (4.0 * p.f_at_zero());
  out.theta = kappa == 0.0 ? 0.0 : -2.0 * kappa * born_integral(p, rho, spec);
  return out;
}

double CollisionGeometry::kappa() const {
  const double v = v_rel();
  if (!(v > 0.0)) throw DomainError("collision geometry needs v1 != v2");
  return 2.0 * epsilon / (v * v);
}

Vec3 CollisionGeometry::eta() const {
  const double v = v_rel();
  if (!(v > 0.0)) throw DomainError("collision geometry needs v1 != v2");
  return (v1 - v2) / v;
}

void orthonormal_frame(const Vec3& n, Vec3& e1, Vec3& e2) {
  // Axis least aligned with n; ties resolved by index order.
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(n[i]) < std::abs(n[k])) k = i;
  Vec3 a = Vec3::Zero();
  a[k] = 1.0;
  e1 = (a - a.dot(n) * n).normalized();
  e2 = n.cross(e1);
}

Vec3 CollisionGeometry::eta_perp() const {
  Vec3 e1, e2;
  orthonormal_frame(eta(), e1, e2);
  return std::cos(azimuth) * e1 + std::sin(azimuth) * e2;
}

CollisionOutcome outgoing_velocities(const CollisionGeometry& g, double theta) {
  if (!(theta >= 0.0 && theta <= kPi)) throw DomainError("theta must lie in [0, pi]");
  const Vec3 center = 0.5 * (g.v1 + g.v2);
  const double half = 0.5 * g.v_rel();
  const Vec3 dir = std::cos(theta) * g.eta() + std::sin(theta) * g.eta_perp();
  CollisionOutcome out;
  out.theta = theta;
  out.v1p = center + half * dir;
  out.v2p = center - half * dir;
  return out;
}

AngleComparison angle_comparison(const Potential& profile, double eps, double rho, double v_rel,
                                 const quad::QuadSpec& spec) {
  const double s = profile.s();
  if (!(s > 1.0)) throw DomainError("angle_comparison needs s > 1");
  if (!profile.compact()) throw DomainError("angle_comparison needs a compact profile");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("angle_comparison needs eps in (0, 1)");
  if (!(v_rel > 3.0 * std::pow(eps, s / 20.0)))
    throw DomainError("outside region: |v1 - v2| > 3 eps^(s/20) violated");
  if (!(rho < 0.5 * std::pow(eps, -0.1))) throw DomainError("outside region: rho < eps^(-1/10) / 2 violated");
  if (!(rho > 0.0)) throw DomainError("angle_comparison needs rho > 0");
  const double kappa = 2.0 / (v_rel * v_rel);
  const Potential stretched = profile.with_range(profile.range() / eps);
  const Potential hom = Potential::pure_power(s, profile.f_at_zero());
  AngleComparison out;
  out.theta_eps = deflection_angle(stretched, rho, kappa, spec).theta;
  out.theta_hom = deflection_angle(hom, rho, kappa, spec).theta;
  out.bound = std::pow(eps, 0.3) + std::min(1.0, std::pow(eps, 0.4) / std::pow(rho, s - 1.0));
  return out;
}

}  // namespace grazing

#include "doctest.h"

#include <cmath>
#include <numbers>

#include "grazing/error.hpp"
#include "grazing/scattering.hpp"

using namespace grazing;

namespace {

constexpr double kPi = std::numbers::pi;

// Rutherford: tan(theta / 2) = kappa f0 / rho.
double coulomb_theta(double rho, double kappa, double f0) { return 2 * std::atan(kappa * f0 / rho); }

// Inverse square: theta = pi (1 - rho / sqrt(rho^2 + 2 kappa f0)).
double inverse_square_theta(double rho, double kappa, double f0) {
  return kPi * (1 - rho / std::sqrt(rho * rho + 2 * kappa * f0));
}

}  // namespace

TEST_CASE("Coulomb closed forms") {
  const quad::QuadSpec spec;
  for (double f0 : {1.0, 2.5}) {
    const Potential p = Potential::pure_power(1.0, f0);
    for (double rho : {0.01, 0.3, 1.0, 7.0}) {
      for (double kappa : {1e-4, 0.05, 0.8}) {
        const double k = kappa * f0;
        CHECK(std::abs(r_min(p, rho, kappa).r - (k + std::sqrt(k * k + rho * rho))) <= 1e-10);
        CHECK(std::abs(born_angle(p, rho, kappa, spec).theta - 2 * k / rho) <= 1e-10);
        CHECK(deflection_angle(p, rho, kappa, spec).theta ==
              doctest::Approx(coulomb_theta(rho, kappa, f0)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("inverse-square closed form and scale invariance") {
  const quad::QuadSpec spec;
  const Potential p = Potential::pure_power(2.0);
  for (double rho : {0.05, 0.5, 3.0})
    for (double kappa : {1e-3, 0.1, 2.0})
      CHECK(deflection_angle(p, rho, kappa, spec).theta ==
            doctest::Approx(inverse_square_theta(rho, kappa, 1.0)).epsilon(1e-10));
  // theta(rho, kappa) = theta(rho kappa^{-1/s}, 1) for f0 / r^s.
  for (double s : {1.3, 2.0, 3.5}) {
    const Potential h = Potential::pure_power(s);
    for (double rho : {0.2, 1.0})
      for (double kappa : {1e-3, 0.3}) {
        const double a = deflection_angle(h, rho, kappa, spec).theta;
        const double b = deflection_angle(h, rho * std::pow(kappa, -1 / s), 1.0, spec).theta;
        CHECK(std::abs(a - b) <= 1e-8);
      }
  }
}

TEST_CASE("quadrature angle matches the trajectory ODE on compact profiles") {
  const quad::QuadSpec spec;
  for (double s : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    const Potential p = Potential::poly_bump(s);
    for (double rho : {0.1, 0.5, 0.9})
      for (double kappa : {1e-3, 1e-1}) {
        const double q = deflection_angle(p, rho, kappa, spec).theta;
        const OdeAngle o = deflection_angle_ode(p, rho, kappa, 1e-12);
        CHECK(std::abs(q - o.theta) <= 1e-8);
        CHECK(o.energy_drift < 1e-8);
      }
  }
  const Potential f = Potential::flat_taper(0.5);
  CHECK(deflection_angle(f, 0.3, 0.05, spec).theta == doctest::Approx(deflection_angle_u_form(f, 0.3, 0.05, spec)).epsilon(1e-8));
}

TEST_CASE("theta is monotone in rho and kappa and lies in [0, pi]") {
  const quad::QuadSpec spec;
  const Potential p = Potential::poly_bump(1.0);
  double prev = kPi;
  for (double rho = 0.02; rho < 1.0; rho += 0.07) {
    const double t = deflection_angle(p, rho, 0.05, spec).theta;
    CHECK(t >= 0.0);
    CHECK(t <= prev + 1e-14);
    prev = t;
  }
  prev = 0.0;
  for (double kappa : {1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0}) {
    const double t = deflection_angle(p, 0.3, kappa, spec).theta;
    CHECK(t >= prev);
    CHECK(t <= kPi);
    prev = t;
  }
  CHECK(deflection_angle(p, 1.0, 0.1, spec).theta == 0.0);
  CHECK(deflection_angle(p, 2.0, 0.1, spec).theta == 0.0);
  CHECK(deflection_angle(p, 0.0, 0.1, spec).theta == doctest::Approx(kPi));
  CHECK_THROWS_AS(deflection_angle(p, -0.1, 0.1, spec), DomainError);
}

TEST_CASE("Born approximation is first order in kappa") {
  const quad::QuadSpec spec;
  const Potential p = Potential::poly_bump(0.5);
  const double rho = 0.4;
  double prev = 0;
  for (double kappa : {1e-3, 1e-4, 1e-5}) {
    const double diff = deflection_angle(p, rho, kappa, spec).theta - born_angle(p, rho, kappa, spec).theta;
    const double scaled = diff / (kappa * kappa);
    if (prev != 0) CHECK(scaled == doctest::Approx(prev).epsilon(2e-2));
    prev = scaled;
  }
  CHECK(born_angle(p, rho, 1e-3, spec).in_validity_region);
  CHECK_FALSE(born_angle(p, rho, 1.0, spec).in_validity_region);
}

TEST_CASE("collision rule conserves momentum and energy") {
  CollisionGeometry g;
  g.v1 = Vec3(0.3, -1.2, 0.5);
  g.v2 = Vec3(-0.4, 0.1, 2.0);
  g.azimuth = 1.1;
  g.epsilon = 0.01;
  Vec3 e1, e2;
  orthonormal_frame(g.eta(), e1, e2);
  CHECK(std::abs(e1.dot(g.eta())) < 1e-15);
  CHECK(std::abs(e2.dot(e1)) < 1e-15);
  CHECK(e2.norm() == doctest::Approx(1.0));
  CHECK(g.kappa() == doctest::Approx(2 * 0.01 / (g.v1 - g.v2).squaredNorm()));
  for (double theta : {0.0, 0.3, 2.0, kPi}) {
    const auto o = outgoing_velocities(g, theta);
    CHECK((o.v1p + o.v2p - g.v1 - g.v2).norm() < 1e-14);
    CHECK(o.v1p.squaredNorm() + o.v2p.squaredNorm() ==
          doctest::Approx(g.v1.squaredNorm() + g.v2.squaredNorm()));
    const Vec3 out = (o.v1p - o.v2p).normalized();
    CHECK(std::acos(std::clamp(out.dot(g.eta()), -1.0, 1.0)) == doctest::Approx(theta).epsilon(1e-7));
  }
  CHECK_THROWS_AS(outgoing_velocities(g, 4.0), DomainError);
  CollisionGeometry same;
  CHECK_THROWS_AS(same.eta(), DomainError);
}

TEST_CASE("angle comparison bound and admissible region") {
  const quad::QuadSpec spec;
  const Potential p = Potential::poly_bump(2.0);
  double prev = 1e300;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const auto c = angle_comparison(p, eps, 0.3, 3.0, spec);
    CHECK(std::abs(c.theta_eps - c.theta_hom) <= c.bound);
    CHECK(std::abs(c.theta_eps - c.theta_hom) < prev);
    prev = std::abs(c.theta_eps - c.theta_hom);
  }
  CHECK_THROWS_AS(angle_comparison(p, 0.1, 5.0, 3.0, spec), DomainError);   // rho too large
  CHECK_THROWS_AS(angle_comparison(p, 0.1, 0.3, 0.5, spec), DomainError);   // too slow
  CHECK_THROWS_AS(angle_comparison(Potential::poly_bump(0.5), 0.1, 0.3, 3.0, spec), DomainError);
}

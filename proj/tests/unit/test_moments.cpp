#include "doctest.h"

#include <cmath>
#include <numbers>

#include "grazing/constants.hpp"
#include "grazing/error.hpp"
#include "grazing/moments.hpp"
#include "grazing/scattering.hpp"

using namespace grazing;

namespace {

constexpr double kPi = std::numbers::pi;

// \int_0^1 g(theta(rho)) rho d rho by composite Gauss-Legendre on uniform panels.
double brute_rho_moment(const Potential& p, double kappa, double (*g)(double), int panels) {
  const quad::QuadSpec spec;
  double total = 0;
  for (int i = 0; i < panels; ++i) {
    const auto rule = quad::gauss_legendre(12, double(i) / panels, double(i + 1) / panels);
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      const double rho = rule.nodes[j];
      total += rule.weights[j] * rho * g(deflection_angle(p, rho, kappa, spec).theta);
    }
  }
  return total;
}

double sin2_half(double t) { return std::pow(std::sin(t / 2), 2); }

}  // namespace

TEST_CASE("rho breakpoints descend geometrically and scale with the range") {
  const Potential p = Potential::poly_bump(0.5);
  const auto b = rho_breakpoints(p, 1e-3);
  REQUIRE(b.size() > 3);
  CHECK(b.front() == 1.0);
  CHECK(b.back() == 0.0);
  for (std::size_t i = 1; i < b.size(); ++i) CHECK(b[i] < b[i - 1]);
  const auto s = rho_breakpoints(p.with_range(8.0), 1e-3 * std::pow(8.0, 0.5));
  REQUIRE(s.size() == b.size());
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(s[i] == doctest::Approx(8.0 * b[i]).epsilon(1e-14));
  const auto rule = rho_rule(p, 1e-3, 21);
  double w = 0;
  for (double x : rule.kronrod_weights) w += x;
  CHECK(w == doctest::Approx(1.0));
}

TEST_CASE("sin^2 moment against a brute-force impact-parameter sum") {
  const quad::QuadSpec spec;
  for (double s : {0.0, 0.5, 1.0}) {
    const Potential p = Potential::poly_bump(s);
    const double kappa = 0.1;
    const double brute = brute_rho_moment(p, kappa, sin2_half, 400);
    CHECK(sin2_moment(p, kappa, spec) == doctest::Approx(brute).epsilon(1e-6));
  }
  const Potential p = Potential::poly_bump(0.5);
  const double cube = brute_rho_moment(p, 0.1, [](double t) { return t * t * t; }, 400);
  CHECK(cube_moment(p, 0.1, spec) == doctest::Approx(cube).epsilon(1e-6));
}

TEST_CASE("small-kappa sin^2 moment approaches the diffusion constant") {
  const quad::QuadSpec spec;
  const Potential p = Potential::poly_bump(0.5);
  const double c = c_phi_radial(p, spec).value;
  const double kappa = 1e-5;
  CHECK(sin2_moment(p, kappa, spec) / (kappa * kappa) == doctest::Approx(c).epsilon(1e-3));
  // third moment is o(kappa^2)
  const double k1 = 1e-3, k2 = 1e-4;
  CHECK(cube_moment(p, k2, spec) / (k2 * k2) < cube_moment(p, k1, spec) / (k1 * k1));
}

TEST_CASE("vhat moments against direct quadrature over the impact disc") {
  const quad::QuadSpec spec;
  const Potential p = Potential::poly_bump(1.0);
  const Vec3 v1(0.4, -0.2, 0.9), v2(-0.5, 0.3, 0.1);
  const double eps = 0.05;
  const MomentSet m = vhat_moments(v1, v2, eps, p, spec);

  CollisionGeometry g;
  g.v1 = v1;
  g.v2 = v2;
  g.epsilon = eps;
  const double V = g.v_rel();
  Vec3 first = Vec3::Zero();
  Mat3 second = Mat3::Zero();
  double third = 0;
  const int panels = 200, n_az = 16;
  for (int i = 0; i < panels; ++i) {
    // cluster panels near rho = 0 where theta varies fastest
    const double a = std::pow(double(i) / panels, 2), b = std::pow(double(i + 1) / panels, 2);
    const auto rule = quad::gauss_legendre(10, a, b);
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      const double rho = rule.nodes[j];
      const double theta = deflection_angle(p, rho, g.kappa(), spec).theta;
      for (int k = 0; k < n_az; ++k) {
        g.azimuth = 2 * kPi * (k + 0.5) / n_az;
        const Vec3 d = outgoing_velocities(g, theta).v1p - v1;
        const double w = rule.weights[j] * rho * (2 * kPi / n_az) * V;
        first += w * d;
        second += w * d * d.transpose();
        third += w * std::pow(d.norm(), 3);
      }
    }
  }
  CHECK((m.first - first).norm() <= 1e-7 * first.norm());
  CHECK((m.second - second).norm() <= 1e-7 * second.norm());
  CHECK(m.third_abs == doctest::Approx(third).epsilon(1e-7));
  CHECK(m.v_rel == doctest::Approx(V));
  // first moment points against eta
  CHECK(m.first.dot(g.eta()) < 0);
}

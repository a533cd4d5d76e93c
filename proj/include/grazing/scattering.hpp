#pragma once

// Two-body scattering in a repulsive radial potential: turning point,
// deflection angle, Born approximation and the collision rule.

#include "grazing/potential.hpp"
#include "grazing/quad.hpp"

namespace grazing {

struct TurningPoint {
  double r = 0.0;
  bool at_origin = false;  // rho = 0 and no classical turning point (s = 0, 2 kappa f0 < 1)
};

/// Unique root of F(r) = 1 - 2 kappa phi(r) - rho^2 / r^2.
TurningPoint r_min(const Potential& p, double rho, double kappa);

struct AngleResult {
  double theta = 0.0;
  double error = 0.0;
  double r_min = 0.0;
};

/// Deflection angle in [0, pi]. Uses the turning point and a cancellation-free
/// integrand on chi in [0, pi/2] (u = r_min / r = sin chi).
AngleResult deflection_angle(const Potential& p, double rho, double kappa, const quad::QuadSpec& spec);

/// The same angle through the u = rho / h(r) form, h(r) = r sqrt(1 - 2 kappa phi).
/// Slower; kept for cross-checks.
double deflection_angle_u_form(const Potential& p, double rho, double kappa, const quad::QuadSpec& spec);

struct OdeAngle {
  double theta = 0.0;
  double energy_drift = 0.0;  // max relative deviation of the reduced energy
  long steps = 0;
};

/// Independent oracle: integrates the relative motion x'' = -kappa grad phi
/// (unit incoming speed) across the support with dense-output DOPRI5.
/// Non-compact potentials with s >= 1 use the orbit equation for 1/r instead.
OdeAngle deflection_angle_ode(const Potential& p, double rho, double kappa, double ode_tol);

/// I(rho) = \int_0^1 (rho/u) phi'(rho/u) du / sqrt(1 - u^2); negative for repulsive phi.
double born_integral(const Potential& p, double rho, const quad::QuadSpec& spec);

struct BornAngle {
  double theta = 0.0;
  bool in_validity_region = true;  // kappa < rho^s / (4 f(0))
};

/// First-order angle -2 kappa I(rho).
BornAngle born_angle(const Potential& p, double rho, double kappa, const quad::QuadSpec& spec);

struct CollisionGeometry {
  Vec3 v1 = Vec3::Zero();
  Vec3 v2 = Vec3::Zero();
  double rho = 0.0;
  double azimuth = 0.0;
  double epsilon = 0.0;

  double v_rel() const { return (v1 - v2).norm(); }
  double kappa() const;
  Vec3 eta() const;
  /// Unit vector orthogonal to eta at the given azimuth.
  Vec3 eta_perp() const;
};

/// Fixed orthonormal pair (e1, e2) spanning the plane orthogonal to a unit n.
void orthonormal_frame(const Vec3& n, Vec3& e1, Vec3& e2);

struct CollisionOutcome {
  double theta = 0.0;
  Vec3 v1p = Vec3::Zero();
  Vec3 v2p = Vec3::Zero();
  double r_min = 0.0;
  double error = 0.0;
};

CollisionOutcome outgoing_velocities(const CollisionGeometry& g, double theta);

struct AngleComparison {
  double theta_eps = 0.0;  // with f(eps r) / r^s
  double theta_hom = 0.0;  // with f(0) / r^s
  double bound = 0.0;      // eps^{3/10} + min(1, eps^{4/10} / rho^{s-1}), without the constant
};

/// Compares the angle of the stretched profile f(eps r)/r^s with that of the
/// homogeneous potential f(0)/r^s at unit coupling and relative speed v_rel.
/// Rejects inputs outside v_rel > 3 eps^{s/20}, rho < eps^{-1/10} / 2.
AngleComparison angle_comparison(const Potential& profile, double eps, double rho, double v_rel,
                                 const quad::QuadSpec& spec);

}  // namespace grazing

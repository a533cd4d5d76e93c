#pragma once

// Linearized Boltzmann (impact-parameter form), linearized Landau and the
// truncated non-cutoff Boltzmann operator applied to test functions.

#include <cstdint>

#include "grazing/potential.hpp"
#include "grazing/quad.hpp"
#include "grazing/test_functions.hpp"

namespace grazing {

struct OperatorValue {
  double value = 0.0;
  double error_estimate = 0.0;
  double near = 0.0;  // |v1 - v2| < 1
  double far = 0.0;   // |v1 - v2| >= 1
  double tail_bound = 0.0;  // non-cutoff only: bound on the rho > rho_max part
  long theta_evaluations = 0;
};

struct OperatorOptions {
  // Azimuth offset of the eta_perp circle nodes, in units of the node spacing.
  double circle_offset = 0.5;
};

/// \int M(v2) |v1 - v2| \int_0^L rho \int_{S^1} (psi(v1') + psi(v2') - psi(v1) - psi(v2))
/// for the potential `coupling * phi`. kappa = 2 coupling / |v1 - v2|^2.
/// rho runs over the support, or (0, rho_max) for the pure power law.
OperatorValue apply_boltzmann(const TestFunction& psi, const Vec3& v1, double coupling, const Potential& p,
                              const quad::QuadSpec& spec, double rho_max = 0.0,
                              const OperatorOptions& opt = {});

/// L_eps psi(v1) for eps * phi.
OperatorValue apply_linearized_boltzmann(const TestFunction& psi, const Vec3& v1, double epsilon,
                                         const Potential& p, const quad::QuadSpec& spec,
                                         const OperatorOptions& opt = {});

/// L_0 psi(v1) = \int [4 eta.(grad psi(v2) - grad psi(v1)) / V^2
///                     + P_perp : (hess psi(v1) + hess psi(v2)) / V] M(v2) dv2.
OperatorValue apply_linearized_landau(const TestFunction& psi, const Vec3& v1, const quad::QuadSpec& spec);

/// Boltzmann operator of the homogeneous potential f0 / r^s (s > 1) at unit
/// coupling, rho in (0, rho_max). tail_bound = C kappa^2 rho_max^{2-2s}
/// integrated over v2 is included in error_estimate.
OperatorValue apply_noncutoff_boltzmann(const TestFunction& psi, const Vec3& v1, const Potential& p_hom,
                                        double rho_max, const quad::QuadSpec& spec);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long samples = 0;
};

/// Seeded Monte-Carlo estimate of L_eps psi(v1): v2 ~ M, rho ~ 2 rho / L^2,
/// antithetic eta_perp pairs.
McEstimate boltzmann_monte_carlo(const TestFunction& psi, const Vec3& v1, double epsilon, const Potential& p,
                                 const quad::QuadSpec& spec);

/// (L_eps psi, psi)_{L^2_M} through the symmetrized form
/// -1/4 \int\int\int (psi1' + psi2' - psi1 - psi2)^2 M1 M2 (v1 - v2).nu, by Monte-Carlo.
McEstimate quadratic_form(const TestFunction& psi, double epsilon, const Potential& p,
                          const quad::QuadSpec& spec);

/// (L_eps psi, psi)_{L^2_M} = \int L_eps psi(v) psi(v) M(v) dv for radial psi,
/// with Gauss-Legendre nodes in |v|.
double quadratic_form_direct(const TestFunction& psi, double epsilon, const Potential& p,
                             const quad::QuadSpec& spec, int radial_points = 16);

/// Drops every cached angular response table.
void clear_operator_cache();

}  // namespace grazing

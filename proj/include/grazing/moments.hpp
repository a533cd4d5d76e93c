#pragma once

// Impact-parameter moments of the deflection angle.

#include <functional>
#include <vector>

#include "grazing/potential.hpp"
#include "grazing/quad.hpp"

namespace grazing {

/// Geometric breakpoints in rho, descending from the support edge (ratio 2)
/// down to 1e-3 times the interaction length (kappa f0)^{1/s}, then 0.
/// For s = 0 and for the pure power law the length is clamped to the support
/// (pure power: to 1). Breakpoints scale with the range, so stretched
/// profiles share the same relative layout.
std::vector<double> rho_breakpoints(const Potential& p, double kappa);
/// Same with an explicit upper end (used for rho_max with the pure power law).
std::vector<double> rho_breakpoints(const Potential& p, double kappa, double top);

/// Fixed product rule on rho_breakpoints: a Kronrod rule per panel.
struct RhoRule {
  std::vector<double> nodes;
  std::vector<double> kronrod_weights;
  std::vector<double> gauss_weights;
};
RhoRule rho_rule(const Potential& p, double kappa, int kronrod_nodes);
RhoRule rho_rule(const std::vector<double>& breakpoints, int kronrod_nodes);

/// \int_0^support g(theta(rho)) rho d rho, adaptive on each geometric panel.
quad::QuadResult rho_moment(const Potential& p, double kappa, const std::function<double(double)>& g,
                            const quad::QuadSpec& spec);

/// \int sin^2(theta/2) rho d rho
double sin2_moment(const Potential& p, double kappa, const quad::QuadSpec& spec);
/// \int theta^3 rho d rho
double cube_moment(const Potential& p, double kappa, const quad::QuadSpec& spec);

struct MomentSet {
  Vec3 first = Vec3::Zero();
  Mat3 second = Mat3::Zero();
  double third_abs = 0.0;
  double kappa = 0.0;
  double v_rel = 0.0;
  // The rho integrals behind the tensors.
  double sin2 = 0.0;       // \int sin^2(theta/2) rho
  double sin4 = 0.0;       // \int sin^4(theta/2) rho
  double sin2cos2 = 0.0;   // \int sin^2 cos^2 (theta/2) rho
  double sin3_abs = 0.0;   // \int |sin(theta/2)|^3 rho
};

/// Moments of vhat = v1' - v1 against the kernel (v1 - v2).nu d nu:
/// first = -2 pi V^2 S2 eta, second = V^3 (2 pi S4 eta eta^T + pi SC P_perp),
/// third = 2 pi V^4 S3, with V = |v1 - v2|.
MomentSet vhat_moments(const Vec3& v1, const Vec3& v2, double epsilon, const Potential& p,
                       const quad::QuadSpec& spec);

}  // namespace grazing

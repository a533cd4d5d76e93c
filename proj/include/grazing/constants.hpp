#pragma once

// The Landau diffusion constant c_Phi and the diffusive timescale.

#include <string>
#include <vector>

#include "grazing/potential.hpp"
#include "grazing/quad.hpp"

namespace grazing {

enum class CPhiMethod { radial, fourier, measured };
std::string to_string(CPhiMethod m);

struct DiffusionConstant {
  double value = 0.0;
  CPhiMethod method = CPhiMethod::radial;
  double s = 0.0;
  double error = 0.0;
  bool converged = true;
  // s = 1 only: the two candidate constants f(0) and f(0)^2.
  double f0_linear = 0.0;
  double f0_squared = 0.0;
  // Fourier route: cutoff reached and the partial integrals per cutoff.
  double cutoff = 0.0;
  std::vector<double> cutoffs;
  std::vector<double> partials;
};

/// s < 1: \int_0^1 I(rho)^2 rho d rho with I = born_integral.
/// s = 1: value = f(0)^2; f0_linear / f0_squared hold both candidates.
DiffusionConstant c_phi_radial(const Potential& p, const quad::QuadSpec& spec);

/// s < 1: (1/16 pi^2) \int_0^K k^3 Phihat(k)^2 dk plus the large-k tail of the
/// small-r series, K doubling from 64 until the change is below 1e-9 relative.
/// s = 1: least-squares slope of the partial integral against log K.
DiffusionConstant c_phi_fourier(const Potential& p, const quad::QuadSpec& spec);

/// Coefficient read off sin2_moment(kappa) / (kappa^2 L(kappa)), L = 1 for
/// s < 1 and |log kappa| for s = 1, extrapolated to kappa -> 0.
DiffusionConstant c_phi_measured(const Potential& p, const quad::QuadSpec& spec);

/// eps^2 for s < 1, eps^2 |log eps| for s = 1.
double timescale(double epsilon, double s);

}  // namespace grazing

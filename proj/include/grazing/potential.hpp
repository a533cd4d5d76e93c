#pragma once

// Repulsive radial potentials phi(r) = f(r/L) / r^s with support [0, L].

#include <limits>
#include <string>
#include <vector>

#include "grazing/quad.hpp"

namespace grazing {

enum class FKind {
  poly_bump,   // f0 (1 - x^2)^q
  flat_taper,  // f0 on [0, r_flat], C^2 quintic taper to 0 at x = 1
  pure_power,  // f0 everywhere; infinite range, idealized
  polynomial,  // sum_i coeffs[i] x^i, user supplied
};

std::string to_string(FKind kind);
FKind fkind_from_string(const std::string& name);

struct PhiDerivatives {
  double d1 = 0.0;
  double d2 = 0.0;
};

class Potential {
 public:
  static Potential poly_bump(double s, double f0 = 1.0, double q = 2.0);
  static Potential flat_taper(double s, double f0 = 1.0, double r_flat = 0.5);
  static Potential pure_power(double s, double f0 = 1.0);
  static Potential polynomial(double s, std::vector<double> coeffs);

  /// Same profile stretched to support L: f(r / L) / r^s.
  Potential with_range(double L) const;
  /// a * f.
  Potential scaled(double a) const;

  double s() const { return s_; }
  FKind kind() const { return kind_; }
  double f0() const { return f0_; }
  double q() const { return q_; }
  double r_flat() const { return r_flat_; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double range() const { return range_; }
  bool compact() const { return kind_ != FKind::pure_power; }
  /// Support radius; +inf for the pure power law.
  double support() const {
    return compact() ? range_ : std::numeric_limits<double>::infinity();
  }
  /// lim_{r->0} r^s phi(r).
  double f_at_zero() const;
  /// Points inside the support where f is only C^2 (taper joints).
  std::vector<double> kinks() const;
  /// Coefficients of f(r / L) = c0 + c1 r + c2 r^2 + O(r^3) near r = 0.
  std::vector<double> small_r_series() const;

  /// Unchecked evaluators: zero beyond the support, r > 0 assumed.
  double phi(double r) const;
  double dphi(double r) const;
  double d2phi(double r) const;
  /// r phi'(r), finite down to r ~ 1e-300 where phi' itself overflows.
  double r_dphi(double r) const;

  /// phi(r) - phi(r + dr) for dr >= 0 without cancellation.
  double phi_drop(double r, double dr) const;

  /// Profile f and its derivatives in the scaled variable x = r / L.
  double f(double x) const;
  double df(double x) const;
  double d2f(double x) const;

 private:
  Potential() = default;
  void validate() const;

  double s_ = 0.0;
  FKind kind_ = FKind::poly_bump;
  double f0_ = 1.0;
  double q_ = 2.0;
  double r_flat_ = 0.5;
  std::vector<double> coeffs_;
  double range_ = 1.0;
};

/// phi(r); exactly 0 beyond the support. Throws DomainError for r <= 0.
double eval_phi(const Potential& p, double r);

/// (phi', phi'') on (0, support). Throws DomainError outside.
PhiDerivatives eval_phi_derivatives(const Potential& p, double r);

/// K(rho) = sup_{r in (rho, support)} max(|phi|, r|phi'|, r^2|phi''|).
/// At rho = support the left limit is returned.
double envelope_K(const Potential& p, double rho);

/// 3D Fourier transform of the radial potential restricted to the unit ball
/// (all of the support for compact profiles of range <= 1):
/// (4 pi / k) \int_0^U r phi(r) sin(kr) dr. Requires s < 2, k > 0.
double fourier_transform(const Potential& p, double k, const quad::QuadSpec& spec);

/// Leading large-k behaviour of fourier_transform from the small-r series of f.
double fourier_asymptotic(const Potential& p, double k);

}  // namespace grazing

#pragma once

// Deterministic quadrature and root-finding shared by every other module.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace grazing {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

namespace quad {

struct QuadSpec {
  double rel_tol = 1e-11;
  double abs_tol = 1e-14;
  int max_panels = 4000;
  int circle_nodes = 24;   // uniform rule on the azimuth circle of eta_perp
  int radial_nodes = 15;   // Kronrod nodes per speed panel (7 or 15 or 21)
  int sphere_nodes = 16;   // Gauss-Legendre nodes in cos(polar); azimuth uses twice as many
  int angle_nodes = 24;    // Chebyshev nodes for the deflection-angle response table
  int rho_nodes = 21;      // Kronrod nodes per impact-parameter panel (15 or 21)
  int radial_levels = 6;   // geometric speed panels below |v1-v2| = 1 (ratio 4)
  long mc_samples = 200000;
  std::uint64_t rng_seed = 20240611;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Tail cutoff for Maxwellian integrals: sqrt(2 ln(1/abs_tol)) + 5.
  double gaussian_radius() const;
};

struct Singularity {
  enum class Kind { none, inverse_sqrt_left, inverse_sqrt_right, power_left };
  Kind kind = Kind::none;
  double alpha = 0.0;  // exponent for power_left: integrand ~ (x-a)^alpha

  static Singularity none() { return {}; }
  static Singularity inverse_sqrt_left() { return {Kind::inverse_sqrt_left, -0.5}; }
  static Singularity inverse_sqrt_right() { return {Kind::inverse_sqrt_right, -0.5}; }
  static Singularity power_left(double a) { return {Kind::power_left, a}; }
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
};

using Fn1 = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (10/21) bisection. Panels are refined largest
/// error first, ties broken by position, so results are reproducible.
/// Throws NonConvergence when max_panels is reached.
QuadResult integrate_1d(const Fn1& fn, double a, double b, Singularity sing,
                        const QuadSpec& spec);

/// Same, but returns the best estimate instead of throwing; `converged`
/// reports whether the tolerance was met.
QuadResult integrate_1d_nothrow(const Fn1& fn, double a, double b, Singularity sing,
                                const QuadSpec& spec, bool& converged);

/// Root of a strictly increasing fn on [lo, hi] with fn(lo) < 0 < fn(hi).
/// The returned point lies in a bracket of width <= tol * |root|.
double find_root_increasing(const Fn1& fn, double lo, double hi, double tol);

/// Fixed rules --------------------------------------------------------------

struct Rule1d {
  std::vector<double> nodes;
  std::vector<double> weights;
};

Rule1d gauss_legendre(int n, double a, double b);

/// Kronrod rule on [a, b] with the embedded Gauss weights (zero at the
/// Kronrod-only nodes). n is 15 or 21.
struct KronrodRule {
  std::vector<double> nodes;
  std::vector<double> kronrod_weights;
  std::vector<double> gauss_weights;
};
KronrodRule gauss_kronrod(int n, double a, double b);

/// Product rule on S^2: Gauss-Legendre in cos(polar) times a uniform azimuth
/// rule. Weights sum to 4*pi. `coarse_weights` is the half-azimuth subrule
/// (every other azimuth node, doubled), used for error estimates.
struct SphereRule {
  std::vector<Vec3> directions;
  std::vector<double> weights;
  std::vector<double> coarse_weights;
};
SphereRule sphere_rule(int n_polar);

/// Speeds |v1 - v2| for Maxwellian integrals centred at v1: geometric panels
/// (ratio 4) below 1 down to 4^-levels, a bottom panel [0, 4^-levels], then
/// unit panels up to `radius`. Gauss weights are the embedded subrule.
struct SpeedRule {
  std::vector<double> speeds;
  std::vector<double> kronrod_weights;
  std::vector<double> gauss_weights;
};
SpeedRule speed_rule(int kronrod_nodes, int levels, double radius);

/// Maxwellian density e^{-|v|^2/2} / (2 pi)^{3/2}.
double maxwellian(const Vec3& v);

/// \int fn(v) M(v) dv with a spherical product rule centred at `center`, so
/// an |v - center|^-2 singularity is cancelled by the Jacobian.
double integrate_maxwellian_3d(const std::function<double(const Vec3&)>& fn,
                               const QuadSpec& spec, const Vec3& center);

/// Pairwise (tree) summation in index order.
double pairwise_sum(std::span<const double> terms);

}  // namespace quad
}  // namespace grazing

#include "grazing/constants.hpp"

#include <cmath>
#include <numbers>

#include "grazing/error.hpp"
#include "grazing/moments.hpp"
#include "grazing/scattering.hpp"

namespace grazing {

namespace {

constexpr double kPi = std::numbers::pi;

// \int_K^inf k^3 A(k)^2 dk for A = fourier_asymptotic.
double asymptotic_tail(const Potential& p, double K) {
  const double s = p.s();
  const auto c = p.small_r_series();
  std::vector<double> amp(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double e = 2.0 - s + double(j);
    amp[j] = 4.0 * kPi * c[j] * std::tgamma(e) * std::sin(0.5 * kPi * e);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < amp.size(); ++i)
    for (std::size_t j = 0; j < amp.size(); ++j) {
      if (amp[i] == 0.0 || amp[j] == 0.0) continue;
      const double e = 2.0 - 2.0 * s + double(i + j);  // k^{3 - 2(3 - s) - i - j} integrates to K^{-e} / e
      sum += amp[i] * amp[j] * std::pow(K, -e) / e;
    }
  return sum;
}

}  // namespace

std::string to_string(CPhiMethod m) {
  switch (m) {
    case CPhiMethod::radial: return "radial";
    case CPhiMethod::fourier: return "fourier";
    case CPhiMethod::measured: return "measured";
  }
  return "?";
}

DiffusionConstant c_phi_radial(const Potential& p, const quad::QuadSpec& spec) {
  const double s = p.s();
  if (!(s <= 1.0)) throw DomainError("c_phi is defined for s in [0, 1]");
  DiffusionConstant d;
  d.method = CPhiMethod::radial;
  d.s = s;
  const double f0 = p.f_at_zero();
  if (s == 1.0) {
    d.f0_linear = f0;
    d.f0_squared = f0 * f0;
    d.value = f0 * f0;
    return d;
  }
  const double top = p.compact() ? p.support() : 1.0;
  auto g = [&](double rho) {
    if (rho <= 0.0) return 0.0;
    const double I = born_integral(p, rho, spec);
    return I * (I * rho);
  };
  const auto r = quad::integrate_1d(g, 0.0, top, quad::Singularity::power_left(1.0 - 2.0 * s), spec);
  d.value = r.value;
  d.error = r.error;
  return d;
}

DiffusionConstant c_phi_fourier(const Potential& p, const quad::QuadSpec& spec) {
  const double s = p.s();
  if (!(s <= 1.0)) throw DomainError("c_phi is defined for s in [0, 1]");
  DiffusionConstant d;
  d.method = CPhiMethod::fourier;
  d.s = s;
  quad::QuadSpec inner = spec;
  inner.rel_tol = std::max(spec.rel_tol, 1e-12);
  inner.abs_tol = 1e-300;
  auto integrand = [&](double k) {
    if (k <= 0.0) return 0.0;
    const double f = fourier_transform(p, k, inner);
    return k * k * k * f * f;
  };
  quad::QuadSpec outer = spec;
  outer.rel_tol = std::max(spec.rel_tol, 1e-10);
  outer.abs_tol = 1e-300;
  outer.max_panels = std::max(spec.max_panels, 20000);
  const double norm = 1.0 / (16.0 * kPi * kPi);
  double K = 64.0;
  double partial = norm * quad::integrate_1d(integrand, 0.0, K, quad::Singularity::none(), outer).value;
  d.cutoffs.push_back(K);
  d.partials.push_back(partial);
  const double kmax = s == 1.0 ? 4096.0 : 65536.0;
  double prev = partial + norm * asymptotic_tail(p, K);
  d.converged = false;
  while (K < kmax) {
    outer.abs_tol = 1e-13 * std::abs(partial) / norm;
    partial += norm * quad::integrate_1d(integrand, K, 2.0 * K, quad::Singularity::none(), outer).value;
    K *= 2.0;
    d.cutoffs.push_back(K);
    d.partials.push_back(partial);
    if (s < 1.0) {
      const double total = partial + norm * asymptotic_tail(p, K);
      d.value = total;
      d.error = std::abs(total - prev);
      prev = total;
      if (d.error <= 1e-9 * std::abs(total)) {
        d.converged = true;
        break;
      }
    }
  }
  d.cutoff = K;
  if (s == 1.0) {
    // Slope against log K over the last four cutoffs.
    const std::size_t n = d.cutoffs.size();
    const std::size_t m = std::min<std::size_t>(4, n);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = n - m; i < n; ++i) {
      const double x = std::log(d.cutoffs[i]);
      const double y = d.partials[i];
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    d.value = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double last = (d.partials[n - 1] - d.partials[n - 2]) / std::log(2.0);
    d.error = std::abs(last - d.value);
    d.converged = true;
    d.f0_linear = p.f_at_zero();
    d.f0_squared = d.f0_linear * d.f0_linear;
  }
  return d;
}

DiffusionConstant c_phi_measured(const Potential& p, const quad::QuadSpec& spec) {
  const double s = p.s();
  if (!(s <= 1.0)) throw DomainError("c_phi is defined for s in [0, 1]");
  DiffusionConstant d;
  d.method = CPhiMethod::measured;
  d.s = s;
  if (s == 1.0) {
    // R(kappa) = c + A / |log kappa| + ...; linear extrapolation in 1/|log kappa|.
    const double k1 = 1e-6, k2 = 1e-8;
    const double l1 = std::abs(std::log(k1)), l2 = std::abs(std::log(k2));
    const double r1 = sin2_moment(p, k1, spec) / (k1 * k1 * l1);
    const double r2 = sin2_moment(p, k2, spec) / (k2 * k2 * l2);
    const double x1 = 1.0 / l1, x2 = 1.0 / l2;
    d.value = r2 - (r1 - r2) / (x1 - x2) * x2;
    d.error = std::abs(d.value - r2);
    d.f0_linear = p.f_at_zero();
    d.f0_squared = d.f0_linear * d.f0_linear;
    return d;
  }
  // R(kappa) = c + B kappa^{2/s - 2} + ...; Richardson on kappa and kappa/2.
  const double k1 = 1e-4, k2 = 5e-5;
  const double r1 = sin2_moment(p, k1, spec) / (k1 * k1);
  const double r2 = sin2_moment(p, k2, spec) / (k2 * k2);
  const double e = s > 0.0 ? 2.0 / s - 2.0 : 2.0;
  const double q = std::pow(2.0, -std::min(e, 2.0));
  d.value = (r2 - q * r1) / (1.0 - q);
  d.error = std::abs(d.value - r2);
  return d;
}

double timescale(double epsilon, double s) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("timescale needs eps in (0, 1)");
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("timescale needs s in [0, 1]");
  return s < 1.0 ? epsilon * epsilon : epsilon * epsilon * std::abs(std::log(epsilon));
}

}  // namespace grazing

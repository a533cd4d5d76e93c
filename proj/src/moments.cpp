#include "grazing/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "grazing/error.hpp"
#include "grazing/scattering.hpp"

namespace grazing {

std::vector<double> rho_breakpoints(const Potential& p, double kappa) {
  return rho_breakpoints(p, kappa, p.compact() ? p.support() : 1.0);
}

std::vector<double> rho_breakpoints(const Potential& p, double kappa, double top) {
  if (!(top > 0.0)) throw DomainError("rho range must be positive");
  double ell = top;
  if (p.s() > 0.0 && kappa > 0.0) ell = std::min(top, std::pow(kappa * p.f_at_zero(), 1.0 / p.s()));
  const double lo = 1e-3 * ell;
  std::vector<double> b{top};
  double r = top;
  while (r * 0.5 > lo * (1.0 + 1e-12)) {
    r *= 0.5;
    b.push_back(r);
  }
  b.push_back(0.0);
  return b;
}

RhoRule rho_rule(const std::vector<double>& breaks, int kronrod_nodes) {
  RhoRule rule;
  for (std::size_t i = breaks.size() - 1; i-- > 0;) {
    const auto k = quad::gauss_kronrod(kronrod_nodes, breaks[i + 1], breaks[i]);
    rule.nodes.insert(rule.nodes.end(), k.nodes.begin(), k.nodes.end());
    rule.kronrod_weights.insert(rule.kronrod_weights.end(), k.kronrod_weights.begin(), k.kronrod_weights.end());
    rule.gauss_weights.insert(rule.gauss_weights.end(), k.gauss_weights.begin(), k.gauss_weights.end());
  }
  return rule;
}

RhoRule rho_rule(const Potential& p, double kappa, int kronrod_nodes) {
  return rho_rule(rho_breakpoints(p, kappa), kronrod_nodes);
}

quad::QuadResult rho_moment(const Potential& p, double kappa, const std::function<double(double)>& g,
                            const quad::QuadSpec& spec) {
  if (!(kappa >= 0.0)) throw DomainError("kappa must be >= 0");
  if (kappa == 0.0) return {0.0, 0.0, 0};
  const auto b = rho_breakpoints(p, kappa);
  auto integrand = [&](double rho) {
    const double th = deflection_angle(p, rho, kappa, spec).theta;
    return g(th) * rho;
  };
  std::vector<double> vals, errs;
  int panels = 0;
  for (std::size_t i = b.size() - 1; i-- > 0;) {
    const auto r = quad::integrate_1d(integrand, b[i + 1], b[i], quad::Singularity::none(), spec);
    vals.push_back(r.value);
    errs.push_back(r.error);
    panels += r.panels;
  }
  return {quad::pairwise_sum(vals), quad::pairwise_sum(errs), panels};
}

double sin2_moment(const Potential& p, double kappa, const quad::QuadSpec& spec) {
  return rho_moment(p, kappa, [](double t) { const double h = std::sin(0.5 * t); return h * h; }, spec).value;
}

double cube_moment(const Potential& p, double kappa, const quad::QuadSpec& spec) {
  return rho_moment(p, kappa, [](double t) { return t * t * t; }, spec).value;
}

MomentSet vhat_moments(const Vec3& v1, const Vec3& v2, double epsilon, const Potential& p,
                       const quad::QuadSpec& spec) {
  const double V = (v1 - v2).norm();
  if (!(V > 0.0)) throw DomainError("vhat_moments needs v1 != v2");
  if (!(epsilon >= 0.0)) throw DomainError("epsilon must be >= 0");
  MomentSet m;
  m.v_rel = V;
  m.kappa = 2.0 * epsilon / (V * V);
  if (epsilon == 0.0) return m;
  auto sh = [](double t) { return std::sin(0.5 * t); };
  auto ch = [](double t) { return std::cos(0.5 * t); };
  m.sin2 = rho_moment(p, m.kappa, [&](double t) { return std::pow(sh(t), 2); }, spec).value;
  m.sin4 = rho_moment(p, m.kappa, [&](double t) { return std::pow(sh(t), 4); }, spec).value;
  m.sin2cos2 = rho_moment(p, m.kappa, [&](double t) { return std::pow(sh(t) * ch(t), 2); }, spec).value;
  m.sin3_abs = rho_moment(p, m.kappa, [&](double t) { return std::pow(std::abs(sh(t)), 3); }, spec).value;
  const double pi = std::numbers::pi;
  const Vec3 eta = (v1 - v2) / V;
  const Mat3 perp = Mat3::Identity() - eta * eta.transpose();
  m.first = -2.0 * pi * V * V * m.sin2 * eta;
  m.second = V * V * V * (2.0 * pi * m.sin4 * eta * eta.transpose() + pi * m.sin2cos2 * perp);
  m.third_abs = 2.0 * pi * std::pow(V, 4) * m.sin3_abs;
  return m;
}

}  // namespace grazing

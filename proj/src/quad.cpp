#include "grazing/quad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <tuple>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <gsl/gsl_integration.h>

#include "grazing/error.hpp"

namespace grazing::quad {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Symmetric half-tables (non-negative abscissae) for a Kronrod rule and its
// embedded Gauss weights aligned to the same abscissae.
struct HalfTable {
  std::vector<double> x;
  std::vector<double> wk;
  std::vector<double> wg;
};

template <unsigned N>
HalfTable make_half_table() {
  using GK = boost::math::quadrature::gauss_kronrod<double, N>;
  using G = boost::math::quadrature::gauss<double, (N - 1) / 2>;
  HalfTable t;
  const auto& ka = GK::abscissa();
  const auto& kw = GK::weights();
  const auto& ga = G::abscissa();
  const auto& gw = G::weights();
  for (std::size_t i = 0; i < ka.size(); ++i) {
    t.x.push_back(ka[i]);
    t.wk.push_back(kw[i]);
    double w = 0.0;
    for (std::size_t j = 0; j < ga.size(); ++j)
      if (std::abs(ga[j] - ka[i]) < 1e-14) w = gw[j];
    t.wg.push_back(w);
  }
  return t;
}

const HalfTable& half_table(int n) {
  static const HalfTable t7 = make_half_table<7>();
  static const HalfTable t15 = make_half_table<15>();
  static const HalfTable t21 = make_half_table<21>();
  switch (n) {
    case 7: return t7;
    case 15: return t15;
    case 21: return t21;
    default: throw DomainError("Kronrod rule size must be 7, 15 or 21, got " + std::to_string(n));
  }
}

struct Panel {
  double a, b, value, error;
};

// One GK21 panel with the QUADPACK error heuristic.
Panel gk21_panel(const Fn1& g, double a, double b) {
  const HalfTable& t = half_table(21);
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fc = g(c);
  double rk = t.wk[0] * fc;
  double rg = t.wg[0] * fc;
  double resabs = std::abs(rk);
  std::vector<double> fvals(t.x.size() * 2);
  fvals[0] = fc;
  for (std::size_t i = 1; i < t.x.size(); ++i) {
    const double f1 = g(c - h * t.x[i]);
    const double f2 = g(c + h * t.x[i]);
    fvals[2 * i] = f1;
    fvals[2 * i + 1] = f2;
    rk += t.wk[i] * (f1 + f2);
    rg += t.wg[i] * (f1 + f2);
    resabs += t.wk[i] * (std::abs(f1) + std::abs(f2));
  }
  const double mean = 0.5 * rk;
  double resasc = t.wk[0] * std::abs(fc - mean);
  for (std::size_t i = 1; i < t.x.size(); ++i)
    resasc += t.wk[i] * (std::abs(fvals[2 * i] - mean) + std::abs(fvals[2 * i + 1] - mean));
  rk *= h;
  rg *= h;
  resabs *= std::abs(h);
  resasc *= std::abs(h);
  double err = std::abs(rk - rg);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > std::numeric_limits<double>::min() / (50 * kEps))
    err = std::max(50 * kEps * resabs, err);
  if (!std::isfinite(rk)) throw DomainError("integrand not finite on panel");
  return {a, b, rk, err};
}

// Maps the singular integrand onto a smooth one on a new interval.
struct Transformed {
  Fn1 g;
  double lo, hi;
};

Transformed transform(const Fn1& fn, double a, double b, Singularity sing) {
  using K = Singularity::Kind;
  switch (sing.kind) {
    case K::none:
      return {fn, a, b};
    case K::inverse_sqrt_left:
      return {[fn, a](double t) { return t == 0.0 ? 0.0 : 2.0 * t * fn(a + t * t); }, 0.0,
              std::sqrt(b - a)};
    case K::inverse_sqrt_right:
      return {[fn, b](double t) { return t == 0.0 ? 0.0 : 2.0 * t * fn(b - t * t); }, 0.0,
              std::sqrt(b - a)};
    case K::power_left: {
      if (!(sing.alpha > -1.0)) throw DomainError("power_left exponent must exceed -1");
      const double p = 1.0 / (1.0 + sing.alpha);
      const double len = b - a;
      return {[fn, a, len, p](double t) {
                if (t <= 0.0) return 0.0;
                const double tp = std::pow(t, p);
                return fn(a + len * tp) * len * p * tp / t;
              },
              0.0, 1.0};
    }
  }
  return {fn, a, b};
}

}  // namespace

void QuadSpec::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(rel_tol > 0.0, "quad.rel_tol must be > 0");
  require(abs_tol > 0.0, "quad.abs_tol must be > 0");
  require(max_panels >= 4, "quad.max_panels must be >= 4");
  require(circle_nodes >= 4 && circle_nodes % 2 == 0, "quad.circle_nodes must be even and >= 4");
  require(radial_nodes == 7 || radial_nodes == 15 || radial_nodes == 21,
          "quad.radial_nodes must be 7, 15 or 21");
  require(sphere_nodes >= 4, "quad.sphere_nodes must be >= 4");
  require(angle_nodes >= 4, "quad.angle_nodes must be >= 4");
  require(rho_nodes == 15 || rho_nodes == 21, "quad.rho_nodes must be 15 or 21");
  require(radial_levels >= 0 && radial_levels <= 20, "quad.radial_levels must be in [0, 20]");
  require(mc_samples >= 4, "quad.mc_samples must be >= 4");
}

double QuadSpec::gaussian_radius() const { return std::sqrt(2.0 * std::log(1.0 / abs_tol)) + 5.0; }

QuadResult integrate_1d_nothrow(const Fn1& fn, double a, double b, Singularity sing,
                                const QuadSpec& spec, bool& converged) {
  if (!(a < b)) throw DomainError("integrate_1d requires a < b");
  const Transformed tr = transform(fn, a, b, sing);
  std::vector<Panel> panels{gk21_panel(tr.g, tr.lo, tr.hi)};
  auto totals = [&] {
    std::vector<double> v, e;
    for (const auto& p : panels) {
      v.push_back(p.value);
      e.push_back(p.error);
    }
    return std::pair{pairwise_sum(v), pairwise_sum(e)};
  };
  auto [value, error] = totals();
  converged = error <= spec.rel_tol * std::abs(value) + spec.abs_tol;
  while (!converged && static_cast<int>(panels.size()) < spec.max_panels) {
    auto worst = std::max_element(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) {
      return x.error < y.error || (x.error == y.error && x.a > y.a);
    });
    const Panel p = *worst;
    const double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b)) break;  // cannot bisect further
    *worst = gk21_panel(tr.g, p.a, mid);
    panels.push_back(gk21_panel(tr.g, mid, p.b));
    std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    std::tie(value, error) = totals();
    converged = error <= spec.rel_tol * std::abs(value) + spec.abs_tol;
  }
  return {value, error, static_cast<int>(panels.size())};
}

QuadResult integrate_1d(const Fn1& fn, double a, double b, Singularity sing, const QuadSpec& spec) {
  bool ok = false;
  QuadResult r = integrate_1d_nothrow(fn, a, b, sing, spec, ok);
  if (!ok)
    throw NonConvergence("integrate_1d: tolerance not met after " + std::to_string(r.panels) + " panels",
                         r.value, r.error);
  return r;
}

double find_root_increasing(const Fn1& fn, double lo, double hi, double tol) {
  if (!(lo < hi)) throw DomainError("find_root_increasing: empty bracket");
  const double flo = fn(lo);
  const double fhi = fn(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (!(flo < 0.0)) throw DomainError("find_root_increasing: fn(lo) >= 0 at lo = " + std::to_string(lo));
  if (!(fhi > 0.0)) throw DomainError("find_root_increasing: fn(hi) <= 0 at hi = " + std::to_string(hi));
  const double rtol = std::max(tol, 4 * kEps);
  auto done = [rtol](double x, double y) { return std::abs(y - x) <= rtol * std::min(std::abs(x), std::abs(y)); };
  std::uintmax_t iters = 200;
  auto [x0, x1] = boost::math::tools::toms748_solve(fn, lo, hi, flo, fhi, done, iters);
  // Prefer the endpoint with the smaller residual.
  return std::abs(fn(x0)) <= std::abs(fn(x1)) ? x0 : x1;
}

Rule1d gauss_legendre(int n, double a, double b) {
  if (n < 1) throw DomainError("gauss_legendre needs n >= 1");
  gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(static_cast<size_t>(n));
  Rule1d r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) gsl_integration_glfixed_point(a, b, i, &r.nodes[i], &r.weights[i], t);
  gsl_integration_glfixed_table_free(t);
  return r;
}

KronrodRule gauss_kronrod(int n, double a, double b) {
  const HalfTable& t = half_table(n);
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  KronrodRule r;
  for (std::size_t i = t.x.size(); i-- > 1;) {
    r.nodes.push_back(c - h * t.x[i]);
    r.kronrod_weights.push_back(h * t.wk[i]);
    r.gauss_weights.push_back(h * t.wg[i]);
  }
  for (std::size_t i = 0; i < t.x.size(); ++i) {
    r.nodes.push_back(c + h * t.x[i]);
    r.kronrod_weights.push_back(h * t.wk[i]);
    r.gauss_weights.push_back(h * t.wg[i]);
  }
  return r;
}

SphereRule sphere_rule(int n_polar) {
  const Rule1d polar = gauss_legendre(n_polar, -1.0, 1.0);
  const int n_az = 2 * n_polar;
  SphereRule s;
  for (int i = 0; i < n_polar; ++i) {
    const double ct = polar.nodes[i];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int j = 0; j < n_az; ++j) {
      const double az = 2.0 * std::numbers::pi * (j + 0.5) / n_az;
      s.directions.emplace_back(st * std::cos(az), st * std::sin(az), ct);
      const double w = polar.weights[i] * 2.0 * std::numbers::pi / n_az;
      s.weights.push_back(w);
      s.coarse_weights.push_back(j % 2 == 0 ? 2.0 * w : 0.0);
    }
  }
  return s;
}

SpeedRule speed_rule(int kronrod_nodes, int levels, double radius) {
  std::vector<double> breaks{0.0};
  for (int k = levels; k >= 1; --k) breaks.push_back(std::pow(4.0, -k));
  breaks.push_back(1.0);
  const int unit_panels = static_cast<int>(std::ceil(radius - 1.0));
  for (int k = 1; k <= unit_panels; ++k) breaks.push_back(std::min(radius, 1.0 + k));
  SpeedRule r;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    if (!(breaks[p + 1] > breaks[p])) continue;
    const KronrodRule k = gauss_kronrod(kronrod_nodes, breaks[p], breaks[p + 1]);
    r.speeds.insert(r.speeds.end(), k.nodes.begin(), k.nodes.end());
    r.kronrod_weights.insert(r.kronrod_weights.end(), k.kronrod_weights.begin(), k.kronrod_weights.end());
    r.gauss_weights.insert(r.gauss_weights.end(), k.gauss_weights.begin(), k.gauss_weights.end());
  }
  return r;
}

double maxwellian(const Vec3& v) {
  static const double norm = std::pow(2.0 * std::numbers::pi, -1.5);
  return norm * std::exp(-0.5 * v.squaredNorm());
}

double integrate_maxwellian_3d(const std::function<double(const Vec3&)>& fn, const QuadSpec& spec,
                               const Vec3& center) {
  const double radius = spec.gaussian_radius() + center.norm();
  const SpeedRule speeds = speed_rule(spec.radial_nodes, spec.radial_levels, radius);
  const SphereRule sphere = sphere_rule(spec.sphere_nodes);
  std::vector<double> shell(speeds.speeds.size());
  for (std::size_t i = 0; i < speeds.speeds.size(); ++i) {
    const double r = speeds.speeds[i];
    std::vector<double> terms(sphere.directions.size());
    for (std::size_t j = 0; j < sphere.directions.size(); ++j) {
      const Vec3 v = center + r * sphere.directions[j];
      terms[j] = sphere.weights[j] * fn(v) * maxwellian(v);
    }
    shell[i] = speeds.kronrod_weights[i] * r * r * pairwise_sum(terms);
  }
  return pairwise_sum(shell);
}

double pairwise_sum(std::span<const double> terms) {
  if (terms.size() <= 8) {
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
  }
  const std::size_t half = terms.size() / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

}  // namespace grazing::quad

#include "grazing/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <tuple>

#include "grazing/error.hpp"
#include "grazing/moments.hpp"
#include "grazing/parallel.hpp"
#include "grazing/scattering.hpp"

namespace grazing {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Barycentric interpolation on Chebyshev points of the first kind.
struct Chebyshev {
  std::vector<double> x;
  std::vector<double> w;

  explicit Chebyshev(int n) : x(n), w(n) {
    // Mirror pairs are exact negatives so that reflected directions coincide.
    for (int j = 0; j < n; ++j) {
      const double a = (2.0 * j + 1.0) * kPi / (2.0 * n);
      x[j] = j < n / 2 ? std::cos(a) : (2 * j + 1 == n ? 0.0 : -x[n - 1 - j]);
      w[j] = (j % 2 == 0 ? 1.0 : -1.0) * std::sin(a);
    }
  }

  double eval(const std::vector<double>& f, double t) const {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double d = t - x[j];
      if (d == 0.0) return f[j];
      const double q = w[j] / d;
      num += q * f[j];
      den += q;
    }
    return num / den;
  }

  // Sum of the magnitudes of the two highest Chebyshev coefficients.
  double tail(const std::vector<double>& f) const {
    const std::size_t n = x.size();
    double out = 0.0;
    for (std::size_t k = n - 2; k < n; ++k) {
      double a = 0.0;
      for (std::size_t j = 0; j < n; ++j) a += f[j] * std::cos(k * (2.0 * j + 1.0) * kPi / (2.0 * n));
      out += std::abs(2.0 * a / n);
    }
    return out;
  }
};

// Angular response of one speed shell: G(cos theta) = \int_{S^2} M(v2)
// \int_{S^1} (psi(v1') + psi(v2') - psi(v1) - psi(v2)) stored as
// H = G / (1 - cos theta) at the Chebyshev nodes.
struct Shell {
  double speed = 0.0;
  double w_kronrod = 0.0;
  double w_gauss = 0.0;
  std::vector<double> h;
  std::vector<double> h_coarse;
  double h_max = 0.0;
  double interp_error = 0.0;  // Chebyshev tail, bound on |H - interpolant|
  double round_error = 0.0;   // rounding level of H
};

struct ResponseTable {
  std::shared_ptr<const Chebyshev> cheb;
  std::vector<Shell> shells;
};

using CacheKey = std::tuple<std::string, std::uint64_t, std::uint64_t, std::uint64_t, int, int, int, int, int,
                            std::uint64_t, std::uint64_t>;

std::uint64_t bits(double x) {
  std::uint64_t u;
  std::memcpy(&u, &x, sizeof u);
  return u;
}

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

std::map<CacheKey, std::shared_ptr<const ResponseTable>>& cache() {
  static std::map<CacheKey, std::shared_ptr<const ResponseTable>> c;
  return c;
}

double speed_radius(const quad::QuadSpec& spec, const Vec3& v1) { return spec.gaussian_radius() + v1.norm(); }

std::shared_ptr<const ResponseTable> build_table(const TestFunction& psi, const Vec3& v1, const quad::QuadSpec& spec,
                                                 const OperatorOptions& opt) {
  auto table = std::make_shared<ResponseTable>();
  table->cheb = std::make_shared<const Chebyshev>(spec.angle_nodes);
  const Chebyshev& cheb = *table->cheb;
  const auto speeds = quad::speed_rule(spec.radial_nodes, spec.radial_levels, speed_radius(spec, v1));
  const auto sphere = quad::sphere_rule(spec.sphere_nodes);
  const int nc = spec.circle_nodes;
  const int na = spec.angle_nodes;
  std::vector<double> cos_a(nc), sin_a(nc);
  for (int k = 0; k < nc / 2; ++k) {
    const double a = 2.0 * kPi * (k + opt.circle_offset) / nc;
    cos_a[k] = std::cos(a);
    sin_a[k] = std::sin(a);
    cos_a[k + nc / 2] = -cos_a[k];
    sin_a[k + nc / 2] = -sin_a[k];
  }
  const double psi1 = psi.value(v1);
  table->shells.resize(speeds.speeds.size());
  parallel_for(speeds.speeds.size(), [&](std::size_t i) {
    Shell& sh = table->shells[i];
    const double V = speeds.speeds[i];
    sh.speed = V;
    sh.w_kronrod = speeds.kronrod_weights[i];
    sh.w_gauss = speeds.gauss_weights[i];
    std::vector<std::vector<double>> fine(na, std::vector<double>(sphere.directions.size()));
    std::vector<std::vector<double>> coarse = fine;
    std::vector<std::vector<double>> absval = fine;
    std::vector<double> outgoing(static_cast<std::size_t>(na) * nc);
    for (std::size_t d = 0; d < sphere.directions.size(); ++d) {
      const Vec3 omega = sphere.directions[d];
      const Vec3 v2 = v1 + V * omega;
      const double m = quad::maxwellian(v2);
      const Vec3 eta = -omega;
      Vec3 e1, e2;
      orthonormal_frame(eta, e1, e2);
      const Vec3 center = 0.5 * (v1 + v2);
      const double psi2 = psi.value(v2);
      const double base = psi1 + psi2;
      // psi at center + V/2 dir(j, k); the partner point center - V/2 dir(j, k)
      // is dir(na - 1 - j, k + nc/2).
      for (int j = 0; j < na; ++j) {
        const double c = cheb.x[j];
        const double s = std::sqrt((1.0 - c) * (1.0 + c));
        for (int k = 0; k < nc; ++k)
          outgoing[j * nc + k] = psi.value(center + (0.5 * V) * (c * eta + s * (cos_a[k] * e1 + sin_a[k] * e2)));
      }
      for (int j = 0; j < na; ++j) {
        double sum = 0.0, sum_coarse = 0.0, sum_abs = 0.0;
        for (int k = 0; k < nc; ++k) {
          const double a = outgoing[j * nc + k];
          const double b = outgoing[(na - 1 - j) * nc + (k + nc / 2) % nc];
          const double delta = a + b - base;
          sum += delta;
          if (k % 2 == 0) sum_coarse += delta;
          sum_abs += std::abs(a) + std::abs(b) + std::abs(base);
        }
        fine[j][d] = m * sum * (2.0 * kPi / nc);
        coarse[j][d] = m * sum_coarse * (4.0 * kPi / nc);
        absval[j][d] = m * sum_abs * (2.0 * kPi / nc);
      }
    }
    sh.h.resize(na);
    sh.h_coarse.resize(na);
    for (int j = 0; j < na; ++j) {
      std::vector<double> tf(sphere.directions.size()), tc(tf.size()), ta(tf.size());
      for (std::size_t d = 0; d < tf.size(); ++d) {
        tf[d] = sphere.weights[d] * fine[j][d];
        tc[d] = sphere.coarse_weights[d] * coarse[j][d];
        ta[d] = sphere.weights[d] * absval[j][d];
      }
      const double one_minus_c = 1.0 - cheb.x[j];
      sh.h[j] = quad::pairwise_sum(tf) / one_minus_c;
      sh.h_coarse[j] = quad::pairwise_sum(tc) / one_minus_c;
      sh.round_error = std::max(sh.round_error, 16.0 * kEps * quad::pairwise_sum(ta) / one_minus_c);
      sh.h_max = std::max(sh.h_max, std::abs(sh.h[j]));
    }
    // Lebesgue constant of first-kind Chebyshev interpolation.
    const double lebesgue = 2.0 / kPi * std::log(double(na)) + 1.0;
    sh.round_error *= lebesgue;
    sh.interp_error = cheb.tail(sh.h);
  });
  return table;
}

std::shared_ptr<const ResponseTable> response_table(const TestFunction& psi, const Vec3& v1,
                                                    const quad::QuadSpec& spec, const OperatorOptions& opt) {
  const CacheKey key{psi.name,         bits(v1[0]),        bits(v1[1]),       bits(v1[2]),
                     spec.sphere_nodes, spec.circle_nodes, spec.angle_nodes, spec.radial_nodes,
                     spec.radial_levels, bits(spec.abs_tol), bits(opt.circle_offset)};
  {
    std::lock_guard lock(cache_mutex());
    auto it = cache().find(key);
    if (it != cache().end()) return it->second;
  }
  auto table = build_table(psi, v1, spec, opt);
  std::lock_guard lock(cache_mutex());
  cache()[key] = table;
  return table;
}

std::string hex(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a,", x);
  return buf;
}

std::string potential_key(const Potential& p) {
  std::string k = to_string(p.kind()) + ":" + hex(p.s()) + hex(p.f0()) + hex(p.q()) + hex(p.r_flat()) + hex(p.range());
  for (double c : p.coeffs()) k += hex(c);
  return k;
}

// Deflection angles on the rho rule of one shell, shared across test
// functions and v1 points with the same speed.
using AngleKey = std::tuple<std::string, std::uint64_t>;
using AngleList = std::vector<AngleResult>;

std::mutex& angle_mutex() {
  static std::mutex m;
  return m;
}

std::map<AngleKey, std::shared_ptr<const AngleList>>& angle_cache() {
  static std::map<AngleKey, std::shared_ptr<const AngleList>> c;
  return c;
}

constexpr std::size_t kAngleCacheLimit = 20000;

std::shared_ptr<const AngleList> shell_angles(const std::string& prefix, const Potential& p, double kappa,
                                              double V, const RhoRule& rule, const quad::QuadSpec& spec) {
  const AngleKey key{prefix, bits(V)};
  {
    std::lock_guard lock(angle_mutex());
    auto it = angle_cache().find(key);
    if (it != angle_cache().end()) return it->second;
  }
  auto list = std::make_shared<AngleList>(rule.nodes.size());
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) (*list)[j] = deflection_angle(p, rule.nodes[j], kappa, spec);
  std::lock_guard lock(angle_mutex());
  if (angle_cache().size() >= kAngleCacheLimit) angle_cache().clear();
  angle_cache()[key] = list;
  return list;
}

struct ShellSum {
  double value = 0.0;
  double error = 0.0;  // rho rule + table errors
  double floor = 0.0;  // rounding
  double abs_sum = 0.0;
  long thetas = 0;
};

}  // namespace

void clear_operator_cache() {
  {
    std::lock_guard lock(cache_mutex());
    cache().clear();
  }
  std::lock_guard lock(angle_mutex());
  angle_cache().clear();
}

OperatorValue apply_boltzmann(const TestFunction& psi, const Vec3& v1, double coupling, const Potential& p,
                              const quad::QuadSpec& spec, double rho_max, const OperatorOptions& opt) {
  spec.validate();
  if (!(coupling >= 0.0)) throw DomainError("coupling must be >= 0");
  if (!p.compact() && !(rho_max > 0.0)) throw DomainError("pure power law needs rho_max > 0");
  OperatorValue out;
  if (coupling == 0.0) return out;
  const double top = p.compact() ? p.support() : rho_max;
  const auto table = response_table(psi, v1, spec, opt);
  const Chebyshev& cheb = *table->cheb;
  const std::size_t ns = table->shells.size();
  std::vector<ShellSum> sums(ns);
  const std::string prefix = potential_key(p) + hex(coupling) + hex(top) + std::to_string(spec.rho_nodes) + ":" +
                             hex(spec.rel_tol) + hex(spec.abs_tol) + std::to_string(spec.max_panels);
  parallel_for(ns, [&](std::size_t i) {
    const Shell& sh = table->shells[i];
    const double V = sh.speed;
    const double kappa = 2.0 * coupling / (V * V);
    const RhoRule rule = rho_rule(rho_breakpoints(p, kappa, top), spec.rho_nodes);
    const auto angles = shell_angles(prefix, p, kappa, V, rule, spec);
    std::vector<double> tk(rule.nodes.size()), tg(tk.size()), te(tk.size()), tr(tk.size()), ta(tk.size());
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      const double rho = rule.nodes[j];
      const AngleResult& th = (*angles)[j];
      const double half = std::sin(0.5 * th.theta);
      const double one_minus_c = 2.0 * half * half;
      const double c = 1.0 - one_minus_c;
      const double h = cheb.eval(sh.h, c);
      const double g = one_minus_c * h;
      const double g_coarse = one_minus_c * cheb.eval(sh.h_coarse, c);
      tk[j] = rule.kronrod_weights[j] * rho * g;
      tg[j] = rule.gauss_weights[j] * rho * g;
      // Table errors, plus the angle quadrature error propagated through dG/dtheta.
      const double dg = std::abs(std::sin(th.theta)) * std::abs(h) + one_minus_c * sh.h_max;
      te[j] = rule.kronrod_weights[j] * rho *
              (std::abs(g - g_coarse) + one_minus_c * sh.interp_error + dg * th.error);
      tr[j] = rule.kronrod_weights[j] * rho * one_minus_c * sh.round_error;
      ta[j] = std::abs(tk[j]);
    }
    ShellSum& s = sums[i];
    s.value = quad::pairwise_sum(tk);
    s.error = std::abs(s.value - quad::pairwise_sum(tg)) + quad::pairwise_sum(te);
    s.floor = quad::pairwise_sum(tr);
    s.abs_sum = quad::pairwise_sum(ta);
    s.thetas = static_cast<long>(rule.nodes.size());
  });
  std::vector<double> vk(ns), vg(ns), ve(ns), vf(ns), near(ns, 0.0), far(ns, 0.0);
  for (std::size_t i = 0; i < ns; ++i) {
    const Shell& sh = table->shells[i];
    const double j3 = sh.speed * sh.speed * sh.speed;
    vk[i] = sh.w_kronrod * j3 * sums[i].value;
    vg[i] = sh.w_gauss * j3 * sums[i].value;
    ve[i] = sh.w_kronrod * j3 * sums[i].error;
    vf[i] = sh.w_kronrod * j3 * (sums[i].floor + 64.0 * kEps * sums[i].abs_sum);
    (sh.speed < 1.0 ? near[i] : far[i]) = vk[i];
    out.theta_evaluations += sums[i].thetas;
  }
  out.value = quad::pairwise_sum(vk);
  out.near = quad::pairwise_sum(near);
  out.far = quad::pairwise_sum(far);
  out.error_estimate = std::abs(out.value - quad::pairwise_sum(vg)) + quad::pairwise_sum(ve) + quad::pairwise_sum(vf);
  return out;
}

OperatorValue apply_linearized_boltzmann(const TestFunction& psi, const Vec3& v1, double epsilon,
                                         const Potential& p, const quad::QuadSpec& spec,
                                         const OperatorOptions& opt) {
  if (!(epsilon >= 0.0)) throw DomainError("epsilon must be >= 0");
  return apply_boltzmann(psi, v1, epsilon, p, spec, 0.0, opt);
}

OperatorValue apply_noncutoff_boltzmann(const TestFunction& psi, const Vec3& v1, const Potential& p_hom,
                                        double rho_max, const quad::QuadSpec& spec) {
  if (p_hom.kind() != FKind::pure_power) throw DomainError("non-cutoff operator needs the pure power law");
  const double s = p_hom.s();
  if (!(s > 1.0)) throw DomainError("non-cutoff operator needs s > 1");
  if (!(rho_max >= 10.0)) throw DomainError("rho_max must be >= 10");
  OperatorValue out = apply_boltzmann(psi, v1, 1.0, p_hom, spec, rho_max);
  // Born angle of f0 / r^s is b kappa / rho^s; 2 sin^2(theta/2) <= theta^2 / 2.
  const double b = s * p_hom.f_at_zero() * std::sqrt(kPi) * std::tgamma(0.5 * (s + 1.0)) / std::tgamma(0.5 * s + 1.0);
  const auto table = response_table(psi, v1, spec, {});
  std::vector<double> t(table->shells.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Shell& sh = table->shells[i];
    const double V = sh.speed;
    const double kappa = 2.0 / (V * V);
    const double rho_part = 0.5 * (b * kappa) * (b * kappa) * std::pow(rho_max, 2.0 - 2.0 * s) / (2.0 * s - 2.0);
    t[i] = sh.w_kronrod * V * V * V * sh.h_max * rho_part;
  }
  out.tail_bound = quad::pairwise_sum(t);
  out.error_estimate += out.tail_bound;
  return out;
}

OperatorValue apply_linearized_landau(const TestFunction& psi, const Vec3& v1, const quad::QuadSpec& spec) {
  spec.validate();
  const auto speeds = quad::speed_rule(spec.radial_nodes, spec.radial_levels, speed_radius(spec, v1));
  const auto sphere = quad::sphere_rule(spec.sphere_nodes);
  const Vec3 g1 = psi.gradient(v1);
  const Mat3 h1 = psi.hessian(v1);
  const std::size_t ns = speeds.speeds.size();
  std::vector<double> fine(ns), coarse(ns), absval(ns);
  parallel_for(ns, [&](std::size_t i) {
    const double V = speeds.speeds[i];
    std::vector<double> tf(sphere.directions.size()), tc(tf.size()), ta(tf.size());
    for (std::size_t d = 0; d < tf.size(); ++d) {
      const Vec3 v2 = v1 + V * sphere.directions[d];
      const Vec3 eta = -sphere.directions[d];
      const Mat3 hs = h1 + psi.hessian(v2);
      const double drift = 4.0 * eta.dot(psi.gradient(v2) - g1);        // times V^2 / V^2
      const double diffusion = V * (hs.trace() - eta.dot(hs * eta));     // times V^2 / V
      const double m = quad::maxwellian(v2);
      tf[d] = sphere.weights[d] * m * (drift + diffusion);
      tc[d] = sphere.coarse_weights[d] * m * (drift + diffusion);
      ta[d] = sphere.weights[d] * m * (std::abs(drift) + std::abs(diffusion) + V * hs.norm());
    }
    fine[i] = quad::pairwise_sum(tf);
    coarse[i] = quad::pairwise_sum(tc);
    absval[i] = quad::pairwise_sum(ta);
  });
  std::vector<double> vk(ns), vg(ns), vc(ns), va(ns), near(ns, 0.0), far(ns, 0.0);
  for (std::size_t i = 0; i < ns; ++i) {
    vk[i] = speeds.kronrod_weights[i] * fine[i];
    vg[i] = speeds.gauss_weights[i] * fine[i];
    vc[i] = speeds.kronrod_weights[i] * std::abs(fine[i] - coarse[i]);
    va[i] = speeds.kronrod_weights[i] * absval[i];
    (speeds.speeds[i] < 1.0 ? near[i] : far[i]) = vk[i];
  }
  OperatorValue out;
  out.value = quad::pairwise_sum(vk);
  out.near = quad::pairwise_sum(near);
  out.far = quad::pairwise_sum(far);
  out.error_estimate = std::abs(out.value - quad::pairwise_sum(vg)) + quad::pairwise_sum(vc) +
                       64.0 * kEps * quad::pairwise_sum(va);
  return out;
}

namespace {

constexpr long kMcChunk = 10000;

Vec3 normal3(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  const double a = n(rng), b = n(rng), c = n(rng);
  return Vec3(a, b, c);
}

// Delta psi for the collision (v1, v2, rho, azimuth) and its antithetic partner.
std::pair<double, double> collision_deltas(const TestFunction& psi, const Vec3& v1, const Vec3& v2, double theta,
                                           double azimuth) {
  const double V = (v1 - v2).norm();
  const Vec3 eta = (v1 - v2) / V;
  Vec3 e1, e2;
  orthonormal_frame(eta, e1, e2);
  const Vec3 center = 0.5 * (v1 + v2);
  const Vec3 perp = std::cos(azimuth) * e1 + std::sin(azimuth) * e2;
  const double base = psi.value(v1) + psi.value(v2);
  auto delta = [&](const Vec3& dir) {
    return psi.value(center + 0.5 * V * dir) + psi.value(center - 0.5 * V * dir) - base;
  };
  return {delta(std::cos(theta) * eta + std::sin(theta) * perp), delta(std::cos(theta) * eta - std::sin(theta) * perp)};
}

template <class Sample>
McEstimate run_monte_carlo(long n, std::uint64_t seed, Sample&& sample) {
  const long chunks = (n + kMcChunk - 1) / kMcChunk;
  std::vector<double> sum(chunks), sum2(chunks);
  parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
    std::seed_seq seq{seed, static_cast<std::uint64_t>(c)};
    std::mt19937_64 rng(seq);
    const long begin = static_cast<long>(c) * kMcChunk;
    const long end = std::min(n, begin + kMcChunk);
    double s = 0.0, s2 = 0.0;
    for (long i = begin; i < end; ++i) {
      const double x = sample(rng);
      s += x;
      s2 += x * x;
    }
    sum[c] = s;
    sum2[c] = s2;
  });
  const double mean = quad::pairwise_sum(sum) / n;
  const double var = std::max(0.0, quad::pairwise_sum(sum2) / n - mean * mean);
  return {mean, std::sqrt(var / (n - 1)), n};
}

}  // namespace

McEstimate boltzmann_monte_carlo(const TestFunction& psi, const Vec3& v1, double epsilon, const Potential& p,
                                 const quad::QuadSpec& spec) {
  spec.validate();
  if (!p.compact()) throw DomainError("Monte-Carlo path needs a compact potential");
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be > 0");
  const double L = p.support();
  return run_monte_carlo(spec.mc_samples, spec.rng_seed, [&](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Vec3 v2 = normal3(rng);
    const double rho = L * std::sqrt(u(rng));
    const double az = 2.0 * kPi * u(rng);
    const double V = (v1 - v2).norm();
    if (!(V > 0.0)) return 0.0;
    const double theta = deflection_angle(p, rho, 2.0 * epsilon / (V * V), spec).theta;
    const auto [a, b] = collision_deltas(psi, v1, v2, theta, az);
    return kPi * L * L * V * 0.5 * (a + b);
  });
}

McEstimate quadratic_form(const TestFunction& psi, double epsilon, const Potential& p, const quad::QuadSpec& spec) {
  spec.validate();
  if (!p.compact()) throw DomainError("Monte-Carlo path needs a compact potential");
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be > 0");
  const double L = p.support();
  return run_monte_carlo(spec.mc_samples, spec.rng_seed, [&](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Vec3 v1 = normal3(rng);
    const Vec3 v2 = normal3(rng);
    const double rho = L * std::sqrt(u(rng));
    const double az = 2.0 * kPi * u(rng);
    const double V = (v1 - v2).norm();
    if (!(V > 0.0)) return 0.0;
    const double theta = deflection_angle(p, rho, 2.0 * epsilon / (V * V), spec).theta;
    const auto [a, b] = collision_deltas(psi, v1, v2, theta, az);
    return -0.25 * kPi * L * L * V * 0.5 * (a * a + b * b);
  });
}

double quadratic_form_direct(const TestFunction& psi, double epsilon, const Potential& p,
                             const quad::QuadSpec& spec, int radial_points) {
  if (!psi.radial) throw DomainError("quadratic_form_direct needs a radial test function");
  const auto rule = quad::gauss_legendre(radial_points, 0.0, 8.0);
  std::vector<double> t(rule.nodes.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Vec3 v(0.0, 0.0, rule.nodes[i]);
    const double l = apply_linearized_boltzmann(psi, v, epsilon, p, spec).value;
    t[i] = rule.weights[i] * 4.0 * kPi * v.squaredNorm() * quad::maxwellian(v) * psi.value(v) * l;
  }
  return quad::pairwise_sum(t);
}

}  // namespace grazing

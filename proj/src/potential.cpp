#include "grazing/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/tools/minima.hpp>

#include "grazing/error.hpp"

namespace grazing {

namespace {

double taper(double t) { return 1.0 + t * t * t * (-10.0 + t * (15.0 - 6.0 * t)); }
double taper_d1(double t) { return -30.0 * t * t * (1.0 - t) * (1.0 - t); }
double taper_d2(double t) { return -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t); }

// sum_n c_n (a^n - b^n), factored through (a - b).
double poly_drop(const std::vector<double>& c, double a, double b) {
  double total = 0.0;
  for (std::size_t n = 1; n < c.size(); ++n) {
    double q = 0.0, ap = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      q += ap * std::pow(b, double(n - 1 - i));
      ap *= a;
    }
    total += c[n] * q;
  }
  return (a - b) * total;
}

const std::vector<double> kTaperCoeffs{1.0, 0.0, 0.0, -10.0, 15.0, -6.0};

}  // namespace

std::string to_string(FKind kind) {
  switch (kind) {
    case FKind::poly_bump: return "poly_bump";
    case FKind::flat_taper: return "flat_taper";
    case FKind::pure_power: return "pure_power";
    case FKind::polynomial: return "polynomial";
  }
  return "?";
}

FKind fkind_from_string(const std::string& name) {
  if (name == "poly_bump") return FKind::poly_bump;
  if (name == "flat_taper") return FKind::flat_taper;
  if (name == "pure_power") return FKind::pure_power;
  if (name == "polynomial") return FKind::polynomial;
  throw ConfigError("f.kind must be one of poly_bump, flat_taper, pure_power, polynomial; got '" +
                    name + "'");
}

Potential Potential::poly_bump(double s, double f0, double q) {
  Potential p;
  p.s_ = s;
  p.kind_ = FKind::poly_bump;
  p.f0_ = f0;
  p.q_ = q;
  p.validate();
  return p;
}

Potential Potential::flat_taper(double s, double f0, double r_flat) {
  Potential p;
  p.s_ = s;
  p.kind_ = FKind::flat_taper;
  p.f0_ = f0;
  p.r_flat_ = r_flat;
  p.validate();
  return p;
}

Potential Potential::pure_power(double s, double f0) {
  Potential p;
  p.s_ = s;
  p.kind_ = FKind::pure_power;
  p.f0_ = f0;
  p.validate();
  return p;
}

Potential Potential::polynomial(double s, std::vector<double> coeffs) {
  Potential p;
  p.s_ = s;
  p.kind_ = FKind::polynomial;
  p.coeffs_ = std::move(coeffs);
  p.f0_ = p.coeffs_.empty() ? 0.0 : p.coeffs_[0];
  p.validate();
  return p;
}

Potential Potential::with_range(double L) const {
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("range must be positive and finite");
  Potential p = *this;
  p.range_ = L;
  return p;
}

Potential Potential::scaled(double a) const {
  if (!(a > 0.0)) throw DomainError("amplitude factor must be > 0");
  Potential p = *this;
  p.f0_ *= a;
  for (double& c : p.coeffs_) c *= a;
  return p;
}

void Potential::validate() const {
  if (!(s_ >= 0.0) || !std::isfinite(s_)) throw ConfigError("s must be ≥ 0");
  if (!(f0_ > 0.0)) throw ConfigError("f.f0 must be > 0");
  switch (kind_) {
    case FKind::poly_bump:
      if (!(q_ >= 2.0)) throw ConfigError("f.q must be >= 2");
      break;
    case FKind::flat_taper:
      if (!(r_flat_ > 0.0 && r_flat_ < 1.0)) throw ConfigError("f.r_flat must lie in (0, 1)");
      break;
    case FKind::pure_power:
      break;
    case FKind::polynomial: {
      if (coeffs_.size() < 2) throw ConfigError("f.coeffs needs at least two entries");
      double at_one = 0.0, scale = 0.0;
      for (double c : coeffs_) {
        at_one += c;
        scale += std::abs(c);
      }
      if (std::abs(at_one) > 1e-12 * scale) throw ConfigError("f.coeffs must satisfy f(1) = 0");
      // Nonincreasing on [0, 1].
      for (int i = 0; i <= 1000; ++i)
        if (df(i / 1000.0) > 1e-12 * scale)
          throw ConfigError("f.coeffs must give a nonincreasing f on [0, 1]");
      break;
    }
  }
}

double Potential::f_at_zero() const { return f(0.0); }

std::vector<double> Potential::kinks() const {
  if (kind_ == FKind::flat_taper) return {r_flat_ * range_};
  return {};
}

std::vector<double> Potential::small_r_series() const {
  const double L = range_;
  switch (kind_) {
    case FKind::poly_bump: return {f0_, 0.0, -q_ * f0_ / (L * L)};
    case FKind::flat_taper:
    case FKind::pure_power: return {f0_, 0.0, 0.0};
    case FKind::polynomial: {
      std::vector<double> c(3, 0.0);
      for (std::size_t i = 0; i < 3 && i < coeffs_.size(); ++i) c[i] = coeffs_[i] / std::pow(L, double(i));
      return c;
    }
  }
  return {f0_, 0.0, 0.0};
}

double Potential::f(double x) const {
  switch (kind_) {
    case FKind::poly_bump: return x >= 1.0 ? 0.0 : f0_ * std::pow((1.0 - x) * (1.0 + x), q_);
    case FKind::flat_taper:
      if (x <= r_flat_) return f0_;
      if (x >= 1.0) return 0.0;
      return f0_ * taper((x - r_flat_) / (1.0 - r_flat_));
    case FKind::pure_power: return f0_;
    case FKind::polynomial: {
      if (x >= 1.0) return 0.0;
      double v = 0.0;
      for (std::size_t i = coeffs_.size(); i-- > 0;) v = v * x + coeffs_[i];
      return v;
    }
  }
  return 0.0;
}

double Potential::df(double x) const {
  switch (kind_) {
    case FKind::poly_bump:
      return x >= 1.0 ? 0.0 : -2.0 * q_ * x * f0_ * std::pow((1.0 - x) * (1.0 + x), q_ - 1.0);
    case FKind::flat_taper: {
      if (x <= r_flat_ || x >= 1.0) return 0.0;
      const double w = 1.0 - r_flat_;
      return f0_ * taper_d1((x - r_flat_) / w) / w;
    }
    case FKind::pure_power: return 0.0;
    case FKind::polynomial: {
      if (x >= 1.0) return 0.0;
      double v = 0.0;
      for (std::size_t i = coeffs_.size(); i-- > 1;) v = v * x + double(i) * coeffs_[i];
      return v;
    }
  }
  return 0.0;
}

double Potential::d2f(double x) const {
  switch (kind_) {
    case FKind::poly_bump: {
      if (x >= 1.0) return 0.0;
      const double u = (1.0 - x) * (1.0 + x);
      return f0_ * (-2.0 * q_ * std::pow(u, q_ - 1.0) + 4.0 * q_ * (q_ - 1.0) * x * x * std::pow(u, q_ - 2.0));
    }
    case FKind::flat_taper: {
      if (x <= r_flat_ || x >= 1.0) return 0.0;
      const double w = 1.0 - r_flat_;
      return f0_ * taper_d2((x - r_flat_) / w) / (w * w);
    }
    case FKind::pure_power: return 0.0;
    case FKind::polynomial: {
      if (x >= 1.0) return 0.0;
      double v = 0.0;
      for (std::size_t i = coeffs_.size(); i-- > 2;) v = v * x + double(i) * double(i - 1) * coeffs_[i];
      return v;
    }
  }
  return 0.0;
}

double Potential::phi(double r) const {
  if (r >= support()) return 0.0;
  const double g = f(r / range_);
  return s_ == 0.0 ? g : g / std::pow(r, s_);
}

double Potential::dphi(double r) const {
  if (r >= support()) return 0.0;
  const double L = range_;
  const double x = r / L;
  const double rs = std::pow(r, s_);
  return df(x) / L / rs - s_ * f(x) / rs / r;
}

double Potential::r_dphi(double r) const {
  if (r >= support()) return 0.0;
  const double x = r / range_;
  return (x * df(x) - s_ * f(x)) / std::pow(r, s_);
}

double Potential::d2phi(double r) const {
  if (r >= support()) return 0.0;
  const double L = range_;
  const double x = r / L;
  const double rs = std::pow(r, s_);
  return d2f(x) / (L * L * rs) - 2.0 * s_ * df(x) / (L * rs * r) + s_ * (s_ + 1.0) * f(x) / rs / r / r;
}

double Potential::phi_drop(double r, double dr) const {
  if (dr <= 0.0) return 0.0;
  const double r2 = r + dr;
  if (r2 >= support()) return phi(r);
  const double L = range_;
  const double x = r / L, x2 = r2 / L, dx = dr / L;
  double fdrop = 0.0;  // f(x) - f(x2)
  switch (kind_) {
    case FKind::poly_bump: {
      const double u2 = (1.0 - x2) * (1.0 + x2);
      const double du = dx * (x + x2);  // u(x) - u(x2)
      fdrop = f0_ * std::pow(u2, q_) * std::expm1(q_ * std::log1p(du / u2));
      break;
    }
    case FKind::flat_taper: {
      const double w = 1.0 - r_flat_;
      const double t1 = std::max(0.0, (x - r_flat_) / w);
      const double t2 = std::max(0.0, (x2 - r_flat_) / w);
      fdrop = f0_ * poly_drop(kTaperCoeffs, t1, t2);
      break;
    }
    case FKind::pure_power: fdrop = 0.0; break;
    case FKind::polynomial: fdrop = poly_drop(coeffs_, x, x2); break;
  }
  if (s_ == 0.0) return fdrop;
  const double rs = std::pow(r, s_);
  // f(x2) (r^-s - r2^-s) = f(x2) r^-s (1 - (r / r2)^s)
  const double ratio_term = -std::expm1(-s_ * std::log1p(dr / r));
  return fdrop / rs + f(x2) * ratio_term / rs;
}

double eval_phi(const Potential& p, double r) {
  if (!(r > 0.0)) throw DomainError("eval_phi: r must be > 0");
  return p.phi(r);
}

PhiDerivatives eval_phi_derivatives(const Potential& p, double r) {
  if (!(r > 0.0 && r < p.support())) throw DomainError("eval_phi_derivatives: r must lie in (0, support)");
  return {p.dphi(r), p.d2phi(r)};
}

double envelope_K(const Potential& p, double rho) {
  if (!(rho > 0.0 && rho <= p.support())) throw DomainError("envelope_K: rho must lie in (0, support]");
  auto h = [&p](double r) {
    if (r >= p.support()) {
      // Left limit at the support edge.
      const double x = r * (1.0 - 1e-15);
      r = x;
    }
    return std::max({std::abs(p.phi(r)), r * std::abs(p.dphi(r)), r * r * std::abs(p.d2phi(r))});
  };
  if (!p.compact()) return h(rho);  // every term is r^{-s} times a constant
  const double top = p.support();
  if (rho >= top) return h(top);
  // Log-spaced grid, then a local maximization around the best node.
  const int n = 400;
  const double lr = std::log(top / rho);
  double best = h(rho);
  int best_i = 0;
  for (int i = 1; i <= n; ++i) {
    const double v = h(rho * std::exp(lr * i / n));
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  if (best_i > 0) {
    const double a = std::log(rho) + lr * (best_i - 1) / n;
    const double b = std::log(rho) + lr * std::min(best_i + 1, n) / n;
    auto neg = [&h](double t) { return -h(std::exp(t)); };
    const auto r = boost::math::tools::brent_find_minima(neg, a, b, 50);
    best = std::max(best, -r.second);
  }
  return best;
}

double fourier_asymptotic(const Potential& p, double k) {
  const double s = p.s();
  const auto c = p.small_r_series();
  double sum = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (c[j] == 0.0) continue;
    const double e = 2.0 - s + double(j);
    sum += c[j] * std::tgamma(e) * std::sin(0.5 * std::numbers::pi * e) / std::pow(k, e);
  }
  return 4.0 * std::numbers::pi / k * sum;
}

double fourier_transform(const Potential& p, double k, const quad::QuadSpec& spec) {
  const double s = p.s();
  if (!(s < 2.0)) throw DomainError("fourier_transform requires s < 2");
  if (!(k > 0.0)) throw DomainError("fourier_transform requires k > 0");
  const double U = std::min(p.support(), p.compact() ? p.support() : 1.0);
  using quad::Singularity;
  if (k * U < 1e-3) {
    auto g = [&p, k](double r) { return r * r * p.phi(r) * (1.0 - k * k * r * r / 6.0); };
    return 4.0 * std::numbers::pi * quad::integrate_1d(g, 0.0, U, Singularity::power_left(2.0 - s), spec).value;
  }
  auto g = [&p, k](double r) { return r * p.phi(r) * std::sin(k * r); };
  std::vector<double> breaks{0.0};
  const double w = std::numbers::pi / k;
  for (int i = 1; i * w < U - 0.5 * w; ++i) breaks.push_back(i * w);
  for (double x : p.kinks())
    if (x > 0.0 && x < U) breaks.push_back(x);
  breaks.push_back(U);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [](double a, double b) { return std::abs(a - b) <= 1e-14 * std::max(1.0, b); }),
               breaks.end());
  std::vector<double> parts;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const Singularity sing = i == 0 ? Singularity::power_left(1.0 - s) : Singularity::none();
    parts.push_back(quad::integrate_1d(g, breaks[i], breaks[i + 1], sing, spec).value);
  }
  return 4.0 * std::numbers::pi / k * quad::pairwise_sum(parts);
}

}  // namespace grazing

#include "grazing/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "grazing/error.hpp"
#include "grazing/test_functions.hpp"

namespace grazing {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
}

double get_number(const json& obj, const char* key, const std::string& path, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(path + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path + " must be finite");
  return x;
}

long long get_integer(const json& obj, const char* key, const std::string& path, long long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9e15) return static_cast<long long>(x);
  }
  throw ConfigError(path + " must be an integer");
}

std::vector<double> get_numbers(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) return {};
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(path + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(path + " must be an array of numbers");
    out.push_back(x.get<double>());
    if (!std::isfinite(out.back())) throw ConfigError(path + " entries must be finite");
  }
  return out;
}

void require_decreasing(const std::vector<double>& v, const std::string& path, bool unit_interval) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) throw ConfigError(path + " entries must be > 0");
    if (unit_interval && !(v[i] < 1.0)) throw ConfigError(path + " entries must be < 1");
    if (i > 0 && !(v[i] < v[i - 1])) throw ConfigError(path + " must be strictly decreasing");
  }
}

PotentialConfig parse_potential(const json& root) {
  PotentialConfig p;
  p.s = get_number(root, "s", "s", p.s);
  if (!(p.s >= 0.0)) throw ConfigError("s must be ≥ 0");
  if (!root.contains("f")) return p;
  const json& f = root.at("f");
  if (!f.is_object()) throw ConfigError("f must be an object");
  if (!f.contains("kind")) throw ConfigError("f.kind is required");
  if (!f.at("kind").is_string()) throw ConfigError("f.kind must be a string");
  try {
    p.kind = fkind_from_string(f.at("kind").get<std::string>());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("f.kind: ") + e.what());
  }
  switch (p.kind) {
    case FKind::poly_bump:
      reject_unknown(f, {"kind", "f0", "q"}, "f");
      p.q = static_cast<double>(get_integer(f, "q", "f.q", 2));
      break;
    case FKind::flat_taper:
      reject_unknown(f, {"kind", "f0", "r_flat"}, "f");
      p.r_flat = get_number(f, "r_flat", "f.r_flat", p.r_flat);
      break;
    case FKind::pure_power:
      reject_unknown(f, {"kind", "f0"}, "f");
      break;
    case FKind::polynomial:
      reject_unknown(f, {"kind", "coeffs"}, "f");
      p.coeffs = get_numbers(f, "coeffs", "f.coeffs");
      break;
  }
  if (p.kind != FKind::polynomial) p.f0 = get_number(f, "f0", "f.f0", p.f0);
  return p;
}

quad::QuadSpec parse_quad(const json& root) {
  quad::QuadSpec q;
  if (!root.contains("quad")) return q;
  const json& j = root.at("quad");
  reject_unknown(j,
                 {"rel_tol", "abs_tol", "max_panels", "circle_nodes", "radial_nodes", "sphere_nodes", "angle_nodes",
                  "rho_nodes", "radial_levels", "mc_samples", "rng_seed"},
                 "quad");
  q.rel_tol = get_number(j, "rel_tol", "quad.rel_tol", q.rel_tol);
  q.abs_tol = get_number(j, "abs_tol", "quad.abs_tol", q.abs_tol);
  auto small = [&](const char* key, int fallback) {
    const long long v = get_integer(j, key, std::string("quad.") + key, fallback);
    if (v < 0 || v > 1'000'000'000) throw ConfigError(std::string("quad.") + key + " is out of range");
    return static_cast<int>(v);
  };
  q.max_panels = small("max_panels", q.max_panels);
  q.circle_nodes = small("circle_nodes", q.circle_nodes);
  q.radial_nodes = small("radial_nodes", q.radial_nodes);
  q.sphere_nodes = small("sphere_nodes", q.sphere_nodes);
  q.angle_nodes = small("angle_nodes", q.angle_nodes);
  q.rho_nodes = small("rho_nodes", q.rho_nodes);
  q.radial_levels = small("radial_levels", q.radial_levels);
  q.mc_samples = get_integer(j, "mc_samples", "quad.mc_samples", q.mc_samples);
  if (j.contains("rng_seed")) {
    const json& v = j.at("rng_seed");
    if (!v.is_number_unsigned()) throw ConfigError("quad.rng_seed must be a non-negative integer");
    q.rng_seed = v.get<std::uint64_t>();
  }
  q.validate();
  return q;
}

StudyConfig parse_study(const json& root) {
  StudyConfig s;
  if (!root.contains("study")) return s;
  const json& j = root.at("study");
  reject_unknown(j, {"psi", "v1", "eps", "kappa", "rho", "v_rel", "rho_max"}, "study");
  if (j.contains("psi")) {
    if (!j.at("psi").is_string()) throw ConfigError("study.psi must be a string");
    s.psi = j.at("psi").get<std::string>();
  }
  const auto names = test_function_names();
  if (std::find(names.begin(), names.end(), s.psi) == names.end())
    throw ConfigError("study.psi: unknown test function '" + s.psi + "'");
  if (j.contains("v1")) {
    const json& v = j.at("v1");
    if (!v.is_array()) throw ConfigError("study.v1 must be an array of [x, y, z]");
    for (const auto& e : v) {
      if (!e.is_array() || e.size() != 3) throw ConfigError("study.v1 must be an array of [x, y, z]");
      Vec3 x;
      for (int i = 0; i < 3; ++i) {
        if (!e[i].is_number()) throw ConfigError("study.v1 entries must be numbers");
        x[i] = e[i].get<double>();
      }
      if (!x.allFinite()) throw ConfigError("study.v1 entries must be finite");
      s.v1.push_back(x);
    }
  }
  s.eps = get_numbers(j, "eps", "study.eps");
  s.kappa = get_numbers(j, "kappa", "study.kappa");
  s.rho = get_numbers(j, "rho", "study.rho");
  s.v_rel = get_numbers(j, "v_rel", "study.v_rel");
  s.rho_max = get_number(j, "rho_max", "study.rho_max", s.rho_max);
  require_decreasing(s.eps, "study.eps", true);
  require_decreasing(s.kappa, "study.kappa", true);
  for (double r : s.rho)
    if (!(r > 0.0)) throw ConfigError("study.rho entries must be > 0");
  for (double v : s.v_rel)
    if (!(v > 0.0)) throw ConfigError("study.v_rel entries must be > 0");
  if (!(s.rho_max >= 10.0)) throw ConfigError("study.rho_max must be >= 10");
  return s;
}

OutputConfig parse_output(const json& root) {
  OutputConfig o;
  if (!root.contains("output")) return o;
  const json& j = root.at("output");
  reject_unknown(j, {"dir", "stem"}, "output");
  for (const char* key : {"dir", "stem"}) {
    if (!j.contains(key)) continue;
    if (!j.at(key).is_string()) throw ConfigError(std::string("output.") + key + " must be a string");
    (std::string(key) == "dir" ? o.dir : o.stem) = j.at(key).get<std::string>();
  }
  if (o.dir.empty()) throw ConfigError("output.dir must not be empty");
  if (o.stem.find('/') != std::string::npos) throw ConfigError("output.stem must not contain '/'");
  return o;
}

json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

}  // namespace

Potential PotentialConfig::build() const {
  switch (kind) {
    case FKind::poly_bump: return Potential::poly_bump(s, f0, q);
    case FKind::flat_taper: return Potential::flat_taper(s, f0, r_flat);
    case FKind::pure_power: return Potential::pure_power(s, f0);
    case FKind::polynomial: return Potential::polynomial(s, coeffs);
  }
  throw ConfigError("f.kind is not supported");
}

bool RunConfig::operator==(const RunConfig& o) const {
  const quad::QuadSpec &a = quad, &b = o.quad;
  return potential == o.potential && study == o.study && output == o.output && a.rel_tol == b.rel_tol &&
         a.abs_tol == b.abs_tol && a.max_panels == b.max_panels && a.circle_nodes == b.circle_nodes &&
         a.radial_nodes == b.radial_nodes && a.sphere_nodes == b.sphere_nodes && a.angle_nodes == b.angle_nodes &&
         a.rho_nodes == b.rho_nodes && a.radial_levels == b.radial_levels && a.mc_samples == b.mc_samples &&
         a.rng_seed == b.rng_seed;
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(root, {"s", "f", "quad", "study", "output"}, "");
  RunConfig c;
  c.potential = parse_potential(root);
  c.quad = parse_quad(root);
  c.study = parse_study(root);
  c.output = parse_output(root);
  try {
    (void)c.potential.build();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

json to_json(const RunConfig& c) {
  json j;
  j["s"] = c.potential.s;
  json f;
  f["kind"] = to_string(c.potential.kind);
  switch (c.potential.kind) {
    case FKind::poly_bump:
      f["f0"] = c.potential.f0;
      f["q"] = static_cast<long long>(c.potential.q);
      break;
    case FKind::flat_taper:
      f["f0"] = c.potential.f0;
      f["r_flat"] = c.potential.r_flat;
      break;
    case FKind::pure_power: f["f0"] = c.potential.f0; break;
    case FKind::polynomial: f["coeffs"] = numbers(c.potential.coeffs); break;
  }
  j["f"] = f;
  const quad::QuadSpec& q = c.quad;
  j["quad"] = {{"rel_tol", q.rel_tol},           {"abs_tol", q.abs_tol},
               {"max_panels", q.max_panels},     {"circle_nodes", q.circle_nodes},
               {"radial_nodes", q.radial_nodes}, {"sphere_nodes", q.sphere_nodes},
               {"angle_nodes", q.angle_nodes},   {"rho_nodes", q.rho_nodes},
               {"radial_levels", q.radial_levels}, {"mc_samples", q.mc_samples},
               {"rng_seed", q.rng_seed}};
  json st;
  st["psi"] = c.study.psi;
  st["rho_max"] = c.study.rho_max;
  if (!c.study.v1.empty()) {
    json v = json::array();
    for (const Vec3& x : c.study.v1) v.push_back({x[0], x[1], x[2]});
    st["v1"] = v;
  }
  if (!c.study.eps.empty()) st["eps"] = numbers(c.study.eps);
  if (!c.study.kappa.empty()) st["kappa"] = numbers(c.study.kappa);
  if (!c.study.rho.empty()) st["rho"] = numbers(c.study.rho);
  if (!c.study.v_rel.empty()) st["v_rel"] = numbers(c.study.v_rel);
  j["study"] = st;
  j["output"] = {{"dir", c.output.dir}, {"stem", c.output.stem}};
  return j;
}

std::string serialize_config(const RunConfig& c) { return to_json(c).dump(); }

std::string config_hash(const RunConfig& c) {
  const std::string text = serialize_config(c);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hexdig = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hexdig[md[i] >> 4];
    out += hexdig[md[i] & 15];
  }
  return out;
}

void apply_study_defaults(RunConfig& c, StudyKind kind) {
  StudyConfig& s = c.study;
  if (s.v1.empty()) s.v1 = {Vec3::Zero(), Vec3(1.0, 0.0, 0.0), Vec3::Ones() / std::sqrt(3.0)};
  switch (kind) {
    case StudyKind::grazing:
      if (s.eps.empty()) s.eps = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
      break;
    case StudyKind::hard:
      if (s.eps.empty()) s.eps = {1e-2, 1e-3, 1e-4, 1e-5};
      break;
    case StudyKind::coulomb_log:
      if (s.kappa.empty()) s.kappa = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
      break;
    case StudyKind::angle_bound:
      if (s.eps.empty()) s.eps = {1e-1, 1e-2, 1e-3, 1e-4};
      if (s.rho.empty()) s.rho = {0.05, 0.1, 0.2, 0.4, 0.6, 1.0};
      if (s.v_rel.empty()) s.v_rel = {3.0, 5.0};
      break;
  }
}

}  // namespace grazing

#include "grazing/test_functions.hpp"

#include <cmath>

#include "grazing/error.hpp"

namespace grazing {

namespace {

TestFunction linear(int axis, const std::string& name) {
  Vec3 e = Vec3::Zero();
  e[axis] = 1.0;
  TestFunction t;
  t.name = name;
  t.value = [axis](const Vec3& v) { return v[axis]; };
  t.gradient = [e](const Vec3&) { return e; };
  t.hessian = [](const Vec3&) { return Mat3::Zero().eval(); };
  t.collision_invariant = true;
  return t;
}

}  // namespace

TestFunction gaussian_test_function(double a, const Vec3& c, const std::string& name) {
  TestFunction t;
  t.name = name;
  t.value = [a, c](const Vec3& v) { return std::exp(-a * (v - c).squaredNorm()); };
  t.gradient = [a, c](const Vec3& v) {
    const Vec3 d = v - c;
    return (-2.0 * a * std::exp(-a * d.squaredNorm()) * d).eval();
  };
  t.hessian = [a, c](const Vec3& v) {
    const Vec3 d = v - c;
    const double g = std::exp(-a * d.squaredNorm());
    return (g * (4.0 * a * a * d * d.transpose() - 2.0 * a * Mat3::Identity())).eval();
  };
  // Third derivatives of e^{-a x^2} stay below ~ 5 a^{3/2}.
  t.c3_bound = std::max(1.0, 5.0 * std::pow(a, 1.5));
  t.radial = c.isZero();
  return t;
}

TestFunction sine_test_function(const Vec3& k, const std::string& name) {
  TestFunction t;
  t.name = name;
  t.value = [k](const Vec3& v) { return std::sin(k.dot(v)); };
  t.gradient = [k](const Vec3& v) { return (std::cos(k.dot(v)) * k).eval(); };
  t.hessian = [k](const Vec3& v) { return (-std::sin(k.dot(v)) * k * k.transpose()).eval(); };
  const double n = k.norm();
  t.c3_bound = std::max({1.0, n, n * n, n * n * n});
  return t;
}

TestFunction make_test_function(const std::string& name) {
  if (name == "const") {
    TestFunction t;
    t.name = name;
    t.value = [](const Vec3&) { return 1.0; };
    t.gradient = [](const Vec3&) { return Vec3::Zero().eval(); };
    t.hessian = [](const Vec3&) { return Mat3::Zero().eval(); };
    t.c3_bound = 1.0;
    t.collision_invariant = true;
    t.radial = true;
    return t;
  }
  if (name == "vx") return linear(0, name);
  if (name == "vy") return linear(1, name);
  if (name == "vz") return linear(2, name);
  if (name == "energy") {
    TestFunction t;
    t.name = name;
    t.value = [](const Vec3& v) { return v.squaredNorm(); };
    t.gradient = [](const Vec3& v) { return (2.0 * v).eval(); };
    t.hessian = [](const Vec3&) { return (2.0 * Mat3::Identity()).eval(); };
    t.collision_invariant = true;
    t.radial = true;
    return t;
  }
  if (name == "gauss") return gaussian_test_function(1.0, Vec3::Zero(), name);
  if (name == "gauss_shift") return gaussian_test_function(1.0, Vec3(0.5, -0.25, 0.0), name);
  if (name == "gauss_narrow") return gaussian_test_function(2.0, Vec3::Zero(), name);
  if (name == "sin_x") return sine_test_function(Vec3(1.0, 0.0, 0.0), name);
  if (name == "sin_diag") return sine_test_function(Vec3(0.6, 0.8, 0.5), name);
  throw ConfigError("unknown test function '" + name + "'");
}

std::vector<std::string> test_function_names() {
  return {"const", "vx", "vy", "vz", "energy", "gauss", "gauss_shift", "gauss_narrow", "sin_x", "sin_diag"};
}

}  // namespace grazing

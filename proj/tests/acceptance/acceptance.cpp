// Acceptance suite: one PASS/FAIL line per criterion.
// usage: acceptance <path-to-grazing>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "grazing/constants.hpp"
#include "grazing/error.hpp"
#include "grazing/moments.hpp"
#include "grazing/operators.hpp"
#include "grazing/parallel.hpp"
#include "grazing/scattering.hpp"
#include "grazing/studies.hpp"

using namespace grazing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int run_criterion(int id, const std::string& title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string detail = o.detail + "; " + fmt("%.0f s", dt);
  if (dt > budget_s) detail += fmt(" (over the %.0f s budget)", budget_s);
  std::cout << (o.passed ? "PASS" : "FAIL") << " [" << id << "] " << title << ": " << detail << std::endl;
  return o.passed ? 0 : 1;
}

// 1. quadrature angle against the trajectory integration
Outcome scattering_oracle() {
  const quad::QuadSpec spec;
  double worst = 0;
  int cells = 0;
  for (double s : {0.0, 0.5, 1.0, 1.5, 2.0})
    for (double rho : {0.1, 0.3, 0.5, 0.7, 0.9})
      for (double kappa : {1e-3, 1e-2, 1e-1}) {
        const Potential p = Potential::poly_bump(s);
        const double q = deflection_angle(p, rho, kappa, spec).theta;
        const double o = deflection_angle_ode(p, rho, kappa, 1e-12).theta;
        worst = std::max(worst, std::abs(q - o));
        ++cells;
      }
  return {worst <= 1e-6, std::to_string(cells) + " cells, max |theta_quad - theta_ode| = " + fmt("%.2e", worst)};
}

// 2. Coulomb closed forms
Outcome coulomb_closed_forms() {
  const quad::QuadSpec spec;
  double worst_r = 0, worst_b = 0;
  for (double f0 : {1.0, 2.5}) {
    const Potential p = Potential::pure_power(1.0, f0);
    for (double rho : {0.01, 0.1, 0.5, 1.0, 3.0})
      for (double kappa : {1e-4, 1e-2, 0.3, 2.0}) {
        const double k = kappa * f0;
        const double r = r_min(p, rho, kappa).r;
        worst_r = std::max(worst_r, std::abs(r - (k + std::sqrt(k * k + rho * rho))) / r);
        const double b = born_angle(p, rho, kappa, spec).theta;
        const double ref = 2 * kappa * f0 / rho;
        worst_b = std::max(worst_b, std::abs(b - ref) / ref);
      }
  }
  return {worst_r <= 1e-10 && worst_b <= 1e-10,
          "r_min rel " + fmt("%.1e", worst_r) + ", born rel " + fmt("%.1e", worst_b)};
}

// 3. radial and Fourier constants
Outcome constant_identity() {
  const quad::QuadSpec spec;
  double worst = 0;
  std::string values;
  for (double s : {0.0, 0.25, 0.5, 0.75}) {
    const Potential p = Potential::poly_bump(s);
    const double r = c_phi_radial(p, spec).value;
    const auto f = c_phi_fourier(p, spec);
    if (!f.converged) return {false, "Fourier route did not converge at s=" + fmt("%g", s)};
    worst = std::max(worst, std::abs(r - f.value) / r);
    values += fmt(" %.6g", r);
  }
  return {worst <= 1e-4, "c =" + values + ", max rel diff " + fmt("%.1e", worst)};
}

// 4. onset of the Coulomb logarithm
Outcome coulomb_log_onset() {
  const quad::QuadSpec spec;
  const std::vector<double> kappas{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  const Potential p = Potential::poly_bump(1.0);
  std::vector<double> R;
  for (double k : kappas) R.push_back(sin2_moment(p, k, spec) / (k * k * std::abs(std::log(k))));
  double min_shrink = INFINITY;
  std::string shrinks;
  for (std::size_t i = 2; i < R.size(); ++i) {
    const double ratio = std::abs(R[i - 1] - R[i - 2]) / std::abs(R[i] - R[i - 1]);
    min_shrink = std::min(min_shrink, ratio);
    shrinks += fmt(" %.3f", ratio);
  }
  const StudyReport rep = coulomb_log_study(p, kappas, spec);
  double coef_ratio = NAN;
  for (const auto& [k, v] : rep.summary)
    if (k == "coefficient_ratio") coef_ratio = v;
  const bool decisive = std::abs(coef_ratio - 2) <= 0.2 || std::abs(coef_ratio - 4) <= 0.4;
  return {min_shrink >= 1.5 && decisive,
          "difference shrink ratios" + shrinks + " (need >= 1.5), f0=2 coefficient ratio " + fmt("%.5f", coef_ratio)};
}

// 5. collision invariants
Outcome invariants() {
  const quad::QuadSpec spec;
  const Potential p = Potential::poly_bump(0.5);
  double worst = 0;  // |value| / error estimate
  int cells = 0;
  for (const char* name : {"const", "vx", "vy", "vz", "energy"}) {
    const TestFunction psi = make_test_function(name);
    for (const Vec3& v1 : std::vector<Vec3>{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 1) / std::sqrt(3.0)}) {
      auto account = [&](const OperatorValue& r) {
        ++cells;
        if (r.value == 0) return;
        worst = std::max(worst, std::abs(r.value) / r.error_estimate);
      };
      for (double eps : {1e-1, 1e-3}) account(apply_linearized_boltzmann(psi, v1, eps, p, spec));
      account(apply_linearized_landau(psi, v1, spec));
    }
  }
  return {worst <= 10, std::to_string(cells) + " evaluations, max |value| / error estimate = " + fmt("%.3g", worst)};
}

// 6. grazing limit at desk scale
Outcome grazing_limit() {
  const quad::QuadSpec spec;
  const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
  const TestFunction psi = make_test_function("gauss");
  bool ok = true;
  std::string detail;
  for (double s : {0.5, 1.0}) {
    const StudyReport r = grazing_study(Potential::poly_bump(s), psi, {Vec3::Zero()}, eps, spec);
    std::vector<double> err, abl;
    for (const auto& rec : r.records) {
      if (rec.failed) return {false, "cell failed at s=" + fmt("%g", s)};
      err.push_back(rec.error);
    }
    bool decreasing = true;
    for (std::size_t k = 1; k < err.size(); ++k) decreasing = decreasing && err[k] < err[k - 1];
    const bool reduced = err.back() <= err.front() / 3;
    ok = ok && decreasing && reduced;
    detail += fmt("s=%g err", s);
    for (double e : err) detail += fmt(" %.3g", e);
    if (s == 1.0) {
      std::size_t col = 0;
      while (col < r.extra_columns.size() && r.extra_columns[col] != "ablation_error") ++col;
      if (col == r.extra_columns.size()) return {false, "ablation column missing"};
      for (const auto& rec : r.records) abl.push_back(rec.extra[col]);
      bool increasing = true;
      for (std::size_t k = 1; k < abl.size(); ++k) increasing = increasing && abl[k] > abl[k - 1];
      ok = ok && increasing;
      detail += "; ablation";
      for (double e : abl) detail += fmt(" %.3g", e);
    } else {
      detail += "; ";
    }
  }
  return {ok, detail};
}

// 7. inverse-square rescaling identity
Outcome scale_identity() {
  const quad::QuadSpec spec;
  const Potential p = Potential::poly_bump(2.0);
  double worst = 0;
  for (const char* name : {"gauss", "gauss_shift", "sin_diag"})
    for (const Vec3& v1 : std::vector<Vec3>{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.3, -0.5, 0.8)})
      for (double eps : {1e-2, 1e-4}) {
        const TestFunction psi = make_test_function(name);
        const double lhs = apply_linearized_boltzmann(psi, v1, eps, p, spec).value / eps;
        const double rhs = apply_boltzmann(psi, v1, 1.0, p.with_range(1 / std::sqrt(eps)), spec).value;
        worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
      }
  return {worst <= 1e-8, "max relative mismatch " + fmt("%.2e", worst)};
}

// 8. convergence to the non-cutoff operator
Outcome hard_convergence() {
  const quad::QuadSpec spec;
  const StudyReport r = hard_potential_study(Potential::poly_bump(2.0), make_test_function("gauss"), {Vec3::Zero()},
                                             {1e-2, 1e-3, 1e-4, 1e-5}, 1e5, spec);
  std::string detail = "err";
  bool ok = true;
  for (std::size_t k = 0; k < r.records.size(); ++k) {
    if (r.records[k].failed) return {false, "cell failed"};
    detail += fmt(" %.3g", r.records[k].error);
    if (k > 0) ok = ok && r.records[k].error < r.records[k - 1].error;
  }
  return {ok, detail};
}

// 9. sign of the quadratic form
Outcome quadratic_form_sign() {
  const quad::QuadSpec spec;
  const Potential p = Potential::poly_bump(0.5);
  bool ok = true;
  std::string detail;
  for (const char* name : {"gauss", "gauss_shift", "gauss_narrow", "sin_x", "sin_diag"}) {
    const auto q = quadratic_form(make_test_function(name), 0.1, p, spec);
    ok = ok && q.mean <= 3 * q.std_error;
    detail += std::string(detail.empty() ? "" : ", ") + name + fmt(" %.2f sigma", q.mean / q.std_error);
  }
  return {ok, detail};
}

// 10. byte-identical reruns of the CLI
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism(const std::string& exe) {
  const fs::path root = fs::temp_directory_path() / "grazing_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::pair<std::string, std::string>> runs{
      {"theta.csv", "theta --s 0.5 --rho 0.1,0.5,0.9 --kappa 0.001,0.1"},
      {"moments.csv", "moments --s 1"},
      {"cphi.json", "cphi --s 0.25"},
      {"apply.json", "apply --s 0.5 --op boltzmann --psi sin_diag --v1 0.2,0.1,-0.3 --eps 0.01"},
      {"coulomb-log.csv", "study --kind coulomb-log --config CFG1"},
      {"angle-bound.csv", "study --kind angle-bound --config CFG2"},
  };
  std::vector<std::string> outputs[2];
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path dir = root / ("run" + std::to_string(pass));
    fs::create_directories(dir);
    std::ofstream(dir / "c1.json") << R"({"s":1})";
    std::ofstream(dir / "c2.json") << R"({"s":2})";
    for (const auto& [file, args] : runs) {
      std::string a = args;
      if (auto at = a.find("CFG1"); at != std::string::npos) a.replace(at, 4, (dir / "c1.json").string());
      if (auto at = a.find("CFG2"); at != std::string::npos) a.replace(at, 4, (dir / "c2.json").string());
      std::string cmd = exe + " --threads 1 " + a;
      if (a.rfind("study", 0) == 0) cmd += " --out-dir " + dir.string() + " > /dev/null";
      else cmd += " --out " + (dir / file).string();
      const int status = std::system(cmd.c_str());
      if (status != 0) return {false, "command failed: " + cmd};
    }
  }
  int files = 0;
  for (const auto& e : fs::directory_iterator(root / "run0")) {
    const std::string name = e.path().filename().string();
    if (name == "c1.json" || name == "c2.json") continue;
    ++files;
    if (slurp(e.path()) != slurp(root / "run1" / name)) return {false, name + " differs between runs"};
  }
  return {files >= 8, std::to_string(files) + " output files byte-identical across two runs"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <grazing_cli>\n";
    return 2;
  }
  const std::string exe = fs::absolute(argv[1]).string();
  int failures = 0;
  failures += run_criterion(1, "scattering angle vs trajectory integration", 120, scattering_oracle);
  failures += run_criterion(2, "Coulomb closed forms", 10, coulomb_closed_forms);
  failures += run_criterion(3, "radial vs Fourier diffusion constant", 60, constant_identity);
  failures += run_criterion(4, "Coulomb logarithm onset", 600, coulomb_log_onset);
  failures += run_criterion(5, "collision invariants", 300, invariants);
  failures += run_criterion(6, "grazing limit, s=0.5 and s=1", 1800, grazing_limit);
  failures += run_criterion(7, "inverse-square rescaling identity", 300, scale_identity);
  failures += run_criterion(8, "convergence to the non-cutoff operator", 1200, hard_convergence);
  failures += run_criterion(9, "non-positive quadratic form", 300, quadratic_form_sign);
  failures += run_criterion(10, "determinism with --threads 1", 600, [&] { return determinism(exe); });
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}

#include "grazing/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>
#include <unistd.h>

#include "grazing/config.hpp"
#include "grazing/constants.hpp"
#include "grazing/error.hpp"
#include "grazing/moments.hpp"
#include "grazing/operators.hpp"
#include "grazing/parallel.hpp"
#include "grazing/scattering.hpp"
#include "grazing/studies.hpp"

namespace grazing {

using nlohmann::json;
namespace fs = std::filesystem;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + target.parent_path().string() + "': " + ec.message());
  }
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + tmp.string() + "' for writing");
    f << content;
    f.flush();
    if (!f) {
      fs::remove(tmp, ec);
      throw IoError("write failed for '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename onto '" + path + "'");
  }
}

namespace {

// Potential and quadrature settings shared by the one-shot subcommands.
struct PotentialFlags {
  std::string config;
  double s = 0.0;
  std::string f;
  double f0 = 1.0;
  int q = 2;
  CLI::Option* s_opt = nullptr;
  CLI::Option* f_opt = nullptr;
  CLI::Option* f0_opt = nullptr;
  CLI::Option* q_opt = nullptr;

  void add(CLI::App* sub, bool require_s) {
    sub->add_option("--config", config, "JSON config supplying the potential and quadrature");
    s_opt = sub->add_option("--s", s, "singularity order");
    if (require_s) s_opt->required();
    f_opt = sub->add_option("--f", f, "profile kind: poly_bump, flat_taper, pure_power, polynomial");
    f0_opt = sub->add_option("--f0", f0, "profile value at the origin");
    q_opt = sub->add_option("--q", q, "poly_bump exponent");
  }

  RunConfig resolve() const {
    RunConfig c = config.empty() ? RunConfig{} : load_config(config);
    if (s_opt->count()) {
      if (!(s >= 0.0)) throw ConfigError("s must be ≥ 0");
      c.potential.s = s;
    }
    if (f_opt->count()) {
      PotentialConfig p;
      p.s = c.potential.s;
      try {
        p.kind = fkind_from_string(f);
      } catch (const DomainError& e) {
        throw ConfigError(std::string("--f: ") + e.what());
      }
      if (p.kind != c.potential.kind) c.potential = p;
    }
    if (f0_opt->count()) c.potential.f0 = f0;
    if (q_opt->count()) c.potential.q = q;
    try {
      (void)c.potential.build();
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    return c;
  }
};

std::string hash_line(const RunConfig& c) { return "# config_sha256=" + config_hash(c) + "\n"; }

Vec3 parse_v1(const std::string& text) {
  std::stringstream ss(text);
  std::string item;
  std::vector<double> xs;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      xs.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--v1 must be x,y,z; got '" + text + "'");
    }
  }
  if (xs.size() != 3) throw ConfigError("--v1 must be x,y,z; got '" + text + "'");
  return {xs[0], xs[1], xs[2]};
}

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

struct Emitter {
  std::string out_path;
  std::ostream& out;

  void emit(const std::string& content, const std::string& summary) const {
    if (out_path.empty()) {
      out << content;
    } else {
      write_atomic(out_path, content);
      out << summary << " -> " << out_path << "\n";
    }
  }
};

int cmd_theta(const PotentialFlags& pf, const std::vector<double>& rhos, const std::vector<double>& kappas,
              double ode_tol, const Emitter& em) {
  const RunConfig c = pf.resolve();
  const Potential p = c.potential.build();
  std::string csv = hash_line(c) + "s,f_kind,rho,kappa,theta_quad,theta_ode,theta_born,r_min,err_est\n";
  for (double rho : rhos) {
    for (double kappa : kappas) {
      const AngleResult a = deflection_angle(p, rho, kappa, c.quad);
      double ode = std::nan("");
      if (rho > 0.0) {
        try {
          ode = deflection_angle_ode(p, rho, kappa, ode_tol).theta;
        } catch (const DomainError&) {
        }
      }
      const double born = rho > 0.0 ? born_angle(p, rho, kappa, c.quad).theta : std::nan("");
      csv += csv_number(p.s()) + "," + to_string(p.kind()) + "," + csv_number(rho) + "," + csv_number(kappa) + "," +
             csv_number(a.theta) + "," + csv_number(ode) + "," + csv_number(born) + "," + csv_number(a.r_min) + "," +
             csv_number(a.error) + "\n";
    }
  }
  em.emit(csv, "theta: " + std::to_string(rhos.size() * kappas.size()) + " rows");
  return exit_code::ok;
}

int cmd_moments(const PotentialFlags& pf, const std::vector<double>& kappas, const Emitter& em) {
  const RunConfig c = pf.resolve();
  const Potential p = c.potential.build();
  const double s = p.s();
  // Leading coefficient of sin2_moment in kappa^2 (s < 1) or kappa^2 |log kappa| (s = 1).
  double coef = std::nan("");
  if (s < 1.0 && p.compact()) coef = c_phi_radial(p, c.quad).value;
  if (s == 1.0) coef = p.f_at_zero() * p.f_at_zero();
  std::string csv = hash_line(c) + "s,kappa,sin2_moment,cube_moment,ratio_to_asymptotic,coulomb_log_ratio\n";
  for (double kappa : kappas) {
    if (!(kappa > 0.0 && kappa < 1.0)) throw ConfigError("--kappa entries must lie in (0, 1)");
    const double m2 = sin2_moment(p, kappa, c.quad);
    const double m3 = cube_moment(p, kappa, c.quad);
    const double lk = std::abs(std::log(kappa));
    const double asym = s < 1.0 ? coef * kappa * kappa : coef * kappa * kappa * lk;
    csv += csv_number(s) + "," + csv_number(kappa) + "," + csv_number(m2) + "," + csv_number(m3) + "," +
           csv_number(m2 / asym) + "," + csv_number(m2 / (kappa * kappa * lk)) + "\n";
  }
  em.emit(csv, "moments: " + std::to_string(kappas.size()) + " rows");
  return exit_code::ok;
}

int cmd_cphi(const PotentialFlags& pf, const Emitter& em) {
  const RunConfig c = pf.resolve();
  const Potential p = c.potential.build();
  if (!(p.s() <= 1.0)) throw ConfigError("cphi needs s ≤ 1");
  if (!p.compact()) throw ConfigError("cphi needs a compact profile");
  const DiffusionConstant radial = c_phi_radial(p, c.quad);
  const DiffusionConstant fourier = c_phi_fourier(p, c.quad);
  const DiffusionConstant measured = c_phi_measured(p, c.quad);
  json j;
  j["s"] = p.s();
  j["f_kind"] = to_string(p.kind());
  j["radial"] = radial.value;
  j["fourier"] = fourier.value;
  j["fourier_converged"] = fourier.converged;
  j["measured_coefficient"] = measured.value;
  j["agreement"] = std::abs(radial.value - fourier.value) / std::abs(radial.value);
  if (p.s() == 1.0) {
    j["candidate_f0"] = radial.f0_linear;
    j["candidate_f0_squared"] = radial.f0_squared;
  }
  j["config_sha256"] = config_hash(c);
  std::ostringstream summary;
  summary << "cphi: radial " << csv_number(radial.value) << ", fourier " << csv_number(fourier.value);
  em.emit(j.dump(2) + "\n", summary.str());
  return exit_code::ok;
}

int cmd_apply(const PotentialFlags& pf, const std::string& op, const std::string& psi_name, const std::string& v1s,
              double eps, double rho_max, const Emitter& em) {
  const RunConfig c = pf.resolve();
  const TestFunction psi = [&] {
    try {
      return make_test_function(psi_name);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("--psi: ") + e.what());
    }
  }();
  const Vec3 v1 = parse_v1(v1s);
  OperatorValue v;
  if (op == "boltzmann") {
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("--eps must lie in (0, 1)");
    v = apply_linearized_boltzmann(psi, v1, eps, c.potential.build(), c.quad);
  } else if (op == "landau") {
    v = apply_linearized_landau(psi, v1, c.quad);
  } else {
    v = apply_noncutoff_boltzmann(psi, v1, Potential::pure_power(c.potential.s, c.potential.f0), rho_max, c.quad);
  }
  json j;
  j["op"] = op;
  j["psi"] = psi.name;
  j["v1"] = vec_json(v1);
  if (op == "boltzmann") j["eps"] = eps;
  if (op != "landau") j["s"] = c.potential.s;
  if (op == "noncutoff") j["rho_max"] = rho_max;
  j["value"] = v.value;
  j["error_estimate"] = v.error_estimate;
  j["breakdown"] = {{"near", v.near}, {"far", v.far}, {"tail_bound", v.tail_bound},
                    {"theta_evaluations", v.theta_evaluations}};
  j["config_sha256"] = config_hash(c);
  em.emit(j.dump(2) + "\n", "apply " + op + ": " + csv_number(v.value));
  return exit_code::ok;
}

std::string study_csv(const StudyReport& r, const RunConfig& c) {
  std::string csv = hash_line(c);
  csv += r.kind == StudyKind::coulomb_log ? "kappa" : "eps";
  csv += ",v1_x,v1_y,v1_z,rho,value,reference,error,timescale,error_estimate";
  for (const auto& name : r.extra_columns) csv += "," + name;
  csv += ",status\n";
  for (const auto& rec : r.records) {
    csv += csv_number(rec.eps);
    for (int i = 0; i < 3; ++i) csv += "," + csv_number(rec.v1[i]);
    for (double x : {rec.rho, rec.value, rec.reference, rec.error, rec.timescale, rec.error_estimate})
      csv += "," + csv_number(x);
    for (double x : rec.extra) csv += "," + csv_number(x);
    csv += rec.failed ? ",failed" : rec.note.empty() ? ",ok" : ",skipped";
    csv += "\n";
  }
  return csv;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json study_json(const StudyReport& r, const RunConfig& c, bool timing) {
  json j;
  j["kind"] = to_string(r.kind);
  j["config"] = to_json(c);
  j["config_sha256"] = config_hash(c);
  j["potential"] = r.potential;
  j["psi"] = r.psi;
  json grid = json::array();
  for (const Vec3& v : r.v1_grid) grid.push_back(vec_json(v));
  j["v1_grid"] = grid;
  j["schedule"] = r.schedule;
  json recs = json::array();
  for (const auto& rec : r.records) {
    json x;
    x[r.kind == StudyKind::coulomb_log ? "kappa" : "eps"] = rec.eps;
    x["v1"] = vec_json(rec.v1);
    if (r.kind == StudyKind::angle_bound) x["rho"] = rec.rho;
    x["value"] = number_or_null(rec.value);
    x["reference"] = number_or_null(rec.reference);
    x["error"] = number_or_null(rec.error);
    x["timescale"] = number_or_null(rec.timescale);
    x["error_estimate"] = number_or_null(rec.error_estimate);
    for (std::size_t i = 0; i < r.extra_columns.size() && i < rec.extra.size(); ++i)
      x[r.extra_columns[i]] = number_or_null(rec.extra[i]);
    x["status"] = rec.failed ? "failed" : rec.note.empty() ? "ok" : "skipped";
    if (!rec.note.empty()) x["note"] = rec.note;
    recs.push_back(x);
  }
  j["records"] = recs;
  j["fit"] = {{"model", r.fit_model}, {"rate", number_or_null(r.fitted_rate)},
              {"residual", number_or_null(r.fit_residual)}};
  json summary = json::object();
  for (const auto& [k, v] : r.summary) summary[k] = number_or_null(v);
  j["summary"] = summary;
  json checks = json::array();
  for (const auto& ch : r.checks) checks.push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
  j["checks"] = checks;
  j["passed"] = r.passed();
  j["diagnostics"] = {{"cells", r.cells}, {"theta_evaluations", r.theta_evaluations}};
  if (timing) j["diagnostics"]["wall_seconds"] = r.wall_seconds;
  return j;
}

int cmd_study(const std::string& kind_name, const std::string& config_path, const std::string& out_dir,
              bool timing, std::ostream& out) {
  StudyKind kind;
  try {
    kind = study_kind_from_string(kind_name);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
  apply_study_defaults(c, kind);
  const Potential p = c.potential.build();
  const StudyConfig& st = c.study;
  StudyReport r;
  try {
    switch (kind) {
      case StudyKind::grazing:
        r = grazing_study(p, make_test_function(st.psi), st.v1, st.eps, c.quad);
        break;
      case StudyKind::hard:
        r = hard_potential_study(p, make_test_function(st.psi), st.v1, st.eps, st.rho_max, c.quad);
        break;
      case StudyKind::coulomb_log:
        r = coulomb_log_study(p, st.kappa, c.quad);
        break;
      case StudyKind::angle_bound:
        r = angle_bound_study(p, st.eps, st.rho, st.v_rel, c.quad);
        break;
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("study ") + kind_name + ": " + e.what());
  }
  const std::string stem = c.output.stem.empty() ? to_string(kind) : c.output.stem;
  const fs::path base = fs::path(out_dir.empty() ? c.output.dir : out_dir) / stem;
  const std::string csv_path = base.string() + ".csv", json_path = base.string() + ".json";
  write_atomic(csv_path, study_csv(r, c));
  write_atomic(json_path, study_json(r, c, timing).dump(2) + "\n");
  out << "study " << to_string(kind) << ": " << (r.passed() ? "PASS" : "FAIL") << " (" << r.cells << " cells)";
  if (!r.passed()) out << " " << r.first_failure();
  out << " -> " << csv_path << ", " << json_path << "\n";
  return r.passed() ? exit_code::ok : exit_code::study_fail;
}

unsigned default_threads() {
  if (const char* env = std::getenv("GRAZING_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) return static_cast<unsigned>(n);
    throw ConfigError("GRAZING_THREADS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grazing-collision scattering, collision operators and convergence studies"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (default: GRAZING_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  std::string out_path;
  double ode_tol = 1e-12;
  std::vector<double> rhos, kappas;
  std::string op, psi_name = "gauss", v1s = "0,0,0", kind, study_config, out_dir;
  double eps = 1e-2, rho_max = 1e5;
  bool timing = false;

  PotentialFlags theta_flags, moments_flags, cphi_flags, apply_flags;
  auto* theta = app.add_subcommand("theta", "deflection angle by quadrature, ODE and Born approximation");
  theta_flags.add(theta, false);
  theta->add_option("--rho", rhos, "impact parameters")->required()->delimiter(',');
  theta->add_option("--kappa", kappas, "couplings")->required()->delimiter(',');
  theta->add_option("--ode-tol", ode_tol, "ODE tolerance")->check(CLI::PositiveNumber);
  theta->add_option("--out", out_path, "CSV output path (default: stdout)");

  auto* moments = app.add_subcommand("moments", "impact-parameter moments of the deflection angle");
  moments_flags.add(moments, false);
  moments->add_option("--kappa", kappas, "couplings")->delimiter(',');
  moments->add_option("--out", out_path, "CSV output path (default: stdout)");

  auto* cphi = app.add_subcommand("cphi", "diffusion constant by the radial and Fourier routes");
  cphi_flags.add(cphi, false);
  cphi->add_option("--out", out_path, "JSON output path (default: stdout)");

  auto* apply = app.add_subcommand("apply", "apply a collision operator to a test function");
  apply_flags.add(apply, false);
  apply->add_option("--op", op, "boltzmann, landau or noncutoff")
      ->required()
      ->check(CLI::IsMember({"boltzmann", "landau", "noncutoff"}));
  apply->add_option("--psi", psi_name, "test function");
  apply->add_option("--v1", v1s, "velocity x,y,z");
  apply->add_option("--eps", eps, "potential strength");
  apply->add_option("--rho-max", rho_max, "impact parameter cutoff for noncutoff");
  apply->add_option("--out", out_path, "JSON output path (default: stdout)");

  auto* study = app.add_subcommand("study", "convergence study: CSV table and JSON report");
  study->add_option("--kind", kind, "grazing, hard, coulomb-log or angle-bound")->required();
  study->add_option("--config", study_config, "JSON config");
  study->add_option("--out-dir", out_dir, "output directory (overrides output.dir)");
  study->add_flag("--timing", timing, "record wall-clock time in the report");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::config_error;
  }

  try {
    set_thread_count(threads > 0 ? threads : default_threads());
    const Emitter em{out_path, out};
    if (*theta) return cmd_theta(theta_flags, rhos, kappas, ode_tol, em);
    if (*moments) {
      if (kappas.empty()) kappas = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
      return cmd_moments(moments_flags, kappas, em);
    }
    if (*cphi) return cmd_cphi(cphi_flags, em);
    if (*apply) return cmd_apply(apply_flags, op, psi_name, v1s, eps, rho_max, em);
    if (*study) return cmd_study(kind, study_config, out_dir, timing, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_code::config_error;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return exit_code::config_error;
  } catch (const NonConvergence& e) {
    err << "numerical failure: " << e.what() << " (best value " << csv_number(e.value) << ", error "
        << csv_number(e.error) << ")\n";
    return exit_code::numerical_failure;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return exit_code::io_failure;
  }
  return exit_code::config_error;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace grazing

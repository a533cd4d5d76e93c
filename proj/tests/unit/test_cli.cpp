#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "grazing/cli.hpp"
#include "grazing/config.hpp"
#include "grazing/error.hpp"

using namespace grazing;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("grazing_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream s(text);
  std::string l;
  while (std::getline(s, l)) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("minimal config takes defaults") {
  const RunConfig c = parse_config(R"({"s":1,"f":{"kind":"poly_bump","f0":1,"q":2}})");
  CHECK(c.potential.s == 1.0);
  CHECK(c.potential.kind == FKind::poly_bump);
  CHECK(c.quad.rel_tol == quad::QuadSpec{}.rel_tol);
  CHECK(c.study.psi == "gauss");
  CHECK(c.output.dir == ".");
  CHECK(parse_config("{}") == RunConfig{});
}

TEST_CASE("config errors name the key and constraint") {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("accepted");
  };
  CHECK(message(R"({"s":-1,"f":{"kind":"poly_bump","f0":1,"q":2}})").find("s must be ≥ 0") != std::string::npos);
  CHECK(message(R"({"s":1,"colour":"red"})").find("'colour'") != std::string::npos);
  CHECK(message(R"({"s":1,"quad":{"rel_tol":0}})").find("quad.rel_tol") != std::string::npos);
  CHECK(message(R"({"s":1,"quad":{"abs_tol":-1e-3}})").find("quad.abs_tol") != std::string::npos);
  CHECK(message(R"({"s":1,"quad":{"tolerance":1}})").find("'quad.tolerance'") != std::string::npos);
  CHECK(message(R"({"s":1,"f":{"kind":"poly_bump","r_flat":0.3}})").find("'f.r_flat'") != std::string::npos);
  CHECK(message(R"({"s":1,"f":{"kind":"blob"}})").find("f.kind") != std::string::npos);
  CHECK(message(R"({"s":1,"f":{"kind":"poly_bump","q":2.5}})").find("f.q") != std::string::npos);
  CHECK(message(R"({"s":1,"study":{"eps":[0.01,0.1]}})").find("study.eps") != std::string::npos);
  CHECK(message(R"({"s":1,"study":{"psi":"cosh"}})").find("study.psi") != std::string::npos);
  CHECK(message("{\"s\":1,").find("not valid JSON") != std::string::npos);
}

TEST_CASE("serialize then parse round-trips") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<std::string> kinds{"poly_bump", "flat_taper", "pure_power", "polynomial"};
  for (int trial = 0; trial < 50; ++trial) {
    nlohmann::json j;
    j["s"] = 2.5 * u(rng);
    const std::string kind = kinds[trial % kinds.size()];
    if (kind == "poly_bump") j["f"] = {{"kind", kind}, {"f0", 0.1 + u(rng)}, {"q", 2 + trial % 3}};
    if (kind == "flat_taper") j["f"] = {{"kind", kind}, {"f0", 0.1 + u(rng)}, {"r_flat", 0.1 + 0.8 * u(rng)}};
    if (kind == "pure_power") j["f"] = {{"kind", kind}, {"f0", 0.1 + u(rng)}};
    if (kind == "polynomial") j["f"] = {{"kind", kind}, {"coeffs", {1.0, 0.0, -3.0, 2.0}}};
    j["quad"] = {{"rel_tol", 1e-12 + u(rng) * 1e-6}, {"circle_nodes", 4 + 2 * (trial % 10)}, {"rng_seed", trial}};
    j["study"] = {{"psi", "sin_x"}, {"eps", {0.3 * u(rng) + 0.1, 0.05, 1e-3 * u(rng) + 1e-5}},
                  {"v1", {{u(rng), -u(rng), 0.0}}}};
    const RunConfig a = parse_config(j.dump());
    const RunConfig b = parse_config(serialize_config(a));
    CHECK(a == b);
    CHECK(config_hash(a) == config_hash(b));
    CHECK(serialize_config(a) == serialize_config(b));
  }
}

TEST_CASE("config hash tracks content") {
  RunConfig a;
  RunConfig b = a;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 64);
  b.quad.rng_seed += 1;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("study defaults depend on the kind") {
  RunConfig c;
  apply_study_defaults(c, StudyKind::grazing);
  CHECK(c.study.v1.size() == 3);
  CHECK(c.study.eps.size() == 5);
  RunConfig d;
  d.study.eps = {0.5, 0.1};
  apply_study_defaults(d, StudyKind::angle_bound);
  CHECK(d.study.eps == std::vector<double>{0.5, 0.1});
  CHECK_FALSE(d.study.rho.empty());
}

TEST_CASE("theta emits a commented CSV row") {
  const Run r = run({"theta", "--s", "1", "--rho", "0.5", "--kappa", "0.01"});
  REQUIRE(r.code == exit_code::ok);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 3);
  CHECK(l[0].rfind("# config_sha256=", 0) == 0);
  CHECK(l[1] == "s,f_kind,rho,kappa,theta_quad,theta_ode,theta_born,r_min,err_est");
  std::stringstream row(l[2]);
  std::string cell;
  std::vector<std::string> cells;
  while (std::getline(row, cell, ',')) cells.push_back(cell);
  REQUIRE(cells.size() == 9);
  CHECK(cells[1] == "poly_bump");
  const double q = std::stod(cells[4]), o = std::stod(cells[5]);
  CHECK(std::abs(q - o) < 1e-8);
}

TEST_CASE("cphi and apply emit JSON") {
  const Run c = run({"cphi", "--s", "0.5"});
  REQUIRE(c.code == exit_code::ok);
  const auto j = nlohmann::json::parse(c.out);
  for (const char* key : {"s", "radial", "fourier", "measured_coefficient", "agreement"}) CHECK(j.contains(key));
  CHECK(j["agreement"].get<double>() < 1e-4);

  const Run a = run({"apply", "--op", "landau", "--psi", "gauss", "--v1", "0,0,0"});
  REQUIRE(a.code == exit_code::ok);
  const auto k = nlohmann::json::parse(a.out);
  CHECK(k["value"].get<double>() < 0);
  CHECK(k.contains("error_estimate"));
  CHECK(k["breakdown"].contains("near"));
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == exit_code::config_error);
  CHECK(run({"frobnicate"}).code == exit_code::config_error);
  CHECK(run({"theta", "--rho", "0.5"}).code == exit_code::config_error);
  CHECK(run({"apply", "--op", "landau", "--v1", "1,2"}).code == exit_code::config_error);
  CHECK(run({"apply", "--op", "boltzmann", "--psi", "nope"}).code == exit_code::config_error);
  CHECK(run({"study", "--kind", "sideways"}).code == exit_code::config_error);
  const fs::path d = scratch("codes");
  std::ofstream(d / "bad.json") << R"({"s":-1})";
  const Run bad = run({"cphi", "--config", (d / "bad.json").string()});
  CHECK(bad.code == exit_code::config_error);
  CHECK(bad.err.find("s must be ≥ 0") != std::string::npos);
  // every sample outside the admissible region: the study fails
  std::ofstream(d / "fail.json") << R"({"s":2,"study":{"rho":[5.0],"eps":[0.1,0.01]}})";
  const Run fail = run({"study", "--kind", "angle-bound", "--config", (d / "fail.json").string(), "--out-dir",
                        (d / "out").string()});
  CHECK(fail.code == exit_code::study_fail);
  CHECK(fs::exists(d / "out" / "angle-bound.json"));
}

TEST_CASE("study writes CSV and JSON reproducibly") {
  const fs::path d = scratch("study");
  std::ofstream(d / "c.json") << R"({"s":1,"f":{"kind":"poly_bump","f0":1,"q":2}})";
  std::string first_csv, first_json;
  for (int pass = 0; pass < 2; ++pass) {
    const Run r = run({"--threads", "1", "study", "--kind", "coulomb-log", "--config", (d / "c.json").string(),
                       "--out-dir", (d / "out").string()});
    REQUIRE(r.code == exit_code::ok);
    CHECK(r.out.find("PASS") != std::string::npos);
    const std::string csv = slurp(d / "out" / "coulomb-log.csv");
    const std::string js = slurp(d / "out" / "coulomb-log.json");
    if (pass == 0) {
      first_csv = csv;
      first_json = js;
    } else {
      CHECK(csv == first_csv);
      CHECK(js == first_json);
    }
  }
  const auto report = nlohmann::json::parse(first_json);
  CHECK(first_csv.rfind("# config_sha256=" + report["config_sha256"].get<std::string>() + "\n", 0) == 0);
  CHECK(report["passed"].get<bool>());
  CHECK_FALSE(report["diagnostics"].contains("wall_seconds"));
  // the report's config reproduces the run
  std::ofstream(d / "again.json") << report["config"].dump();
  const Run again = run({"--threads", "1", "study", "--kind", "coulomb-log", "--config", (d / "again.json").string(),
                         "--out-dir", (d / "out2").string()});
  REQUIRE(again.code == exit_code::ok);
  CHECK(slurp(d / "out2" / "coulomb-log.csv") == first_csv);
  for (const auto& e : fs::directory_iterator(d / "out"))
    CHECK(e.path().string().find(".tmp.") == std::string::npos);
}

TEST_CASE("atomic writes replace the target") {
  const fs::path d = scratch("atomic");
  const fs::path f = d / "nested" / "x.txt";
  write_atomic(f.string(), "one");
  write_atomic(f.string(), "two");
  CHECK(slurp(f) == "two");
  int entries = 0;
  for (const auto& e : fs::directory_iterator(f.parent_path())) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 1);
  CHECK_THROWS(write_atomic("/proc/definitely/not/writable", "x"));
}

TEST_CASE("number formatting") {
  CHECK(csv_number(0.1) == "0.10000000000000001");
  CHECK(csv_number(std::nan("")) == "nan");
  CHECK(csv_number(-1.0 / 0.0) == "-inf");
}

TEST_CASE("the built binary honours GRAZING_THREADS and exit codes") {
  const char* exe = std::getenv("GRAZING_CLI");
  if (!exe) {
    MESSAGE("GRAZING_CLI not set; skipping subprocess checks");
    return;
  }
  const fs::path d = scratch("binary");
  const std::string out = (d / "theta.csv").string();
  const std::string cmd = std::string("GRAZING_THREADS=2 ") + exe + " theta --s 0.5 --rho 0.3 --kappa 0.1 --out " + out +
                          " > " + (d / "log").string();
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(lines(slurp(out)).size() == 3);
  const std::string bad = std::string("GRAZING_THREADS=zero ") + exe + " theta --rho 0.3 --kappa 0.1 2> /dev/null";
  const int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == exit_code::config_error);
}

#pragma once

// JSON run configuration: potential, quadrature, study parameters, outputs.

#include <string>
#include <vector>

#include <json.hpp>

#include "grazing/potential.hpp"
#include "grazing/quad.hpp"
#include "grazing/studies.hpp"

namespace grazing {

struct PotentialConfig {
  double s = 1.0;
  FKind kind = FKind::poly_bump;
  double f0 = 1.0;
  double q = 2.0;
  double r_flat = 0.5;
  std::vector<double> coeffs;

  Potential build() const;
  bool operator==(const PotentialConfig&) const = default;
};

// Empty schedules and grids mean "use the default of the study kind".
struct StudyConfig {
  std::string psi = "gauss";
  std::vector<Vec3> v1;
  std::vector<double> eps;
  std::vector<double> kappa;
  std::vector<double> rho;
  std::vector<double> v_rel;
  double rho_max = 1e5;

  bool operator==(const StudyConfig&) const = default;
};

struct OutputConfig {
  std::string dir = ".";
  std::string stem;  // file stem; the study kind when empty

  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  PotentialConfig potential;
  quad::QuadSpec quad;
  StudyConfig study;
  OutputConfig output;

  bool operator==(const RunConfig& o) const;
};

/// Parses and validates; unknown keys and out-of-range values throw
/// ConfigError naming the key. Missing keys take their defaults.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

nlohmann::json to_json(const RunConfig& c);
/// Canonical text: sorted keys, shortest round-trip numbers.
std::string serialize_config(const RunConfig& c);
/// SHA-256 of serialize_config, hex.
std::string config_hash(const RunConfig& c);

/// Fills empty schedules and grids with the defaults of `kind`.
void apply_study_defaults(RunConfig& c, StudyKind kind);

}  // namespace grazing

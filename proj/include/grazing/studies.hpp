#pragma once

// Convergence sweeps in epsilon (or kappa) with rate fits and pass/fail checks.

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "grazing/potential.hpp"
#include "grazing/quad.hpp"
#include "grazing/test_functions.hpp"

namespace grazing {

enum class StudyKind { grazing, hard, coulomb_log, angle_bound };

std::string to_string(StudyKind kind);
/// "grazing", "hard", "coulomb-log", "angle-bound".
StudyKind study_kind_from_string(const std::string& name);

/// Short human readable descriptor, e.g. poly_bump(s=0.5,f0=1,q=2,L=1).
std::string describe(const Potential& p);

struct StudyCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct StudyRecord {
  double eps = 0.0;  // kappa for the coulomb-log study
  Vec3 v1 = Vec3::Zero();
  double rho = 0.0;  // angle-bound only
  double value = 0.0;
  double reference = 0.0;
  double error = 0.0;
  double timescale = 0.0;
  double error_estimate = 0.0;
  std::vector<double> extra;  // named by StudyReport::extra_columns
  bool failed = false;
  std::string note;
};

struct StudyReport {
  StudyKind kind = StudyKind::grazing;
  std::string potential;
  std::string psi;
  std::vector<Vec3> v1_grid;
  std::vector<double> schedule;
  std::vector<std::string> extra_columns;
  std::vector<StudyRecord> records;

  std::string fit_model;
  double fitted_rate = std::numeric_limits<double>::quiet_NaN();
  double fit_residual = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<std::string, double>> summary;
  std::vector<StudyCheck> checks;

  double wall_seconds = 0.0;
  long theta_evaluations = 0;
  long cells = 0;

  bool passed() const;
  /// First failing check, or empty.
  std::string first_failure() const;
};

/// err = |L_eps psi(v1) / d_eps - 2 pi c K psi(v1)| over the schedule, with c
/// the radial constant for s < 1 and the measured coefficient at s = 1.
/// Needs s in [0, 1] and at least 4 decreasing eps spanning two decades.
StudyReport grazing_study(const Potential& p, const TestFunction& psi, const std::vector<Vec3>& v1_grid,
                          const std::vector<double>& eps_schedule, const quad::QuadSpec& spec);

/// Rescaling identity eps^{-2/s} L_{eps Phi} = L_{Lambda_delta}, delta = eps^{1/s},
/// and convergence of eps^{-2/s} L_{eps Phi} psi(v1) to the non-cutoff operator
/// truncated at rho_max.
StudyReport hard_potential_study(const Potential& p, const TestFunction& psi, const std::vector<Vec3>& v1_grid,
                                 const std::vector<double>& eps_schedule, double rho_max,
                                 const quad::QuadSpec& spec);

/// sin2_moment(kappa) / (kappa^2 |log kappa|) for s = 1, the same profile at
/// twice the strength, and an s = 0.5 control.
StudyReport coulomb_log_study(const Potential& p, const std::vector<double>& kappa_schedule,
                              const quad::QuadSpec& spec);

/// |theta_eps - theta| against eps^{3/10} + min(1, eps^{4/10} / rho^{s-1}) over
/// the admissible (rho, |v1 - v2|) samples; the ratio's maximum per eps must
/// not grow by more than 2x along the schedule.
StudyReport angle_bound_study(const Potential& profile, const std::vector<double>& eps_schedule,
                              const std::vector<double>& rho_grid, const std::vector<double>& v_rel_grid,
                              const quad::QuadSpec& spec);

/// Least squares slope of y = a x through the origin and the rms residual.
std::pair<double, double> fit_through_origin(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace grazing

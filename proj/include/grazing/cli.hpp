#pragma once

// Command-line front end: theta, moments, cphi, apply, study.

#include <ostream>
#include <string>
#include <vector>

namespace grazing {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int io_failure = 1;
inline constexpr int config_error = 2;
inline constexpr int numerical_failure = 3;
inline constexpr int study_fail = 4;
}  // namespace exit_code

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

/// Writes through a temporary file in the same directory and renames it over
/// `path`. Creates missing parent directories.
void write_atomic(const std::string& path, const std::string& content);

/// "%.17g", with nan/inf spelled out.
std::string csv_number(double x);

}  // namespace grazing

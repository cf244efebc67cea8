#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace bellint::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kUsage = 1, kNumerical = 2 };

/// Runs the tool on `args` (without the program name).  Normal output goes to
/// `out`, the one-line diagnostic of a failure to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses `key = value` lines; '#' starts a comment.  Throws std::runtime_error
/// on a malformed line.
std::map<std::string, std::string> parse_config_text(const std::string& text);

/// 17 significant digits, enough to round-trip any double.
std::string format_exact(double x);
/// Display rounding: 6 digits after the decimal point.
std::string format_display(double x);

}  // namespace bellint::cli

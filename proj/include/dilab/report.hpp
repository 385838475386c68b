#pragma once

// Command pipelines of the batch front end and their reports. The JSON
// document is deterministic (no timings); the text form adds timings.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dilab/problem.hpp"

namespace dilab {

enum class Command { Certify, Dilate, Model, Blh, Quotient, Srkh };

/// Throws Error(InvalidArgument) for unknown names.
Command parse_command(const std::string& name);
std::string to_string(Command c);

enum ExitStatus : int { kExitPass = 0, kExitVerdictFalse = 1, kExitInputError = 2, kExitTruncation = 3 };

/// Exit status a library error maps to.
int exit_status_for(ErrorCode code);

struct IdentityCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  double tail_slack = 0.0;   // part of the threshold owed to truncation
  bool lower_bound = false;  // pass iff value >= threshold (else value <= threshold)
  bool pass = false;
};

struct RunOptions {
  std::optional<std::string> degree;  // integer or "auto"
  std::optional<double> epsilon;
  std::optional<double> tol_residual;
};

struct Report {
  std::string command;
  int exit_code = kExitPass;
  std::optional<std::string> error_code;
  std::optional<std::string> error_message;
  nlohmann::json details = nlohmann::json::object();
  std::vector<IdentityCheck> identities;
  std::vector<std::pair<std::string, double>> timings;  // seconds

  void check(std::string name, double value, double threshold, double tail_slack = 0.0);
  void check_lower(std::string name, double value, double threshold);
  bool all_pass() const;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Never throws for library errors: they are folded into the report and its
/// exit code.
Report run(Command command, const ProblemFile& problem, const RunOptions& options = {});

}  // namespace dilab

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dilab/report.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dilations and models for Bergman-type operator tuples"};
  std::string command;
  std::string input;
  std::optional<std::string> out;
  dilab::RunOptions opts;
  app.add_option("command", command, "certify | dilate | model | blh | quotient | srkh")->required();
  app.add_option("--input", input, "problem file (JSON)")->required();
  app.add_option("--out", out, "write the JSON report here");
  app.add_option("--degree", opts.degree, "truncation degree N, or 'auto'");
  app.add_option("--epsilon", opts.epsilon, "tail target for --degree auto");
  app.add_option("--tol-residual", opts.tol_residual, "residual tolerance override");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dilab::kExitInputError;
  }

  dilab::Report report;
  try {
    const dilab::Command cmd = dilab::parse_command(command);
    const dilab::ProblemFile problem = dilab::load_problem(input);
    if (problem.command && *problem.command != command) {
      std::cerr << "note: problem file names command '" << *problem.command << "', running '" << command << "'\n";
    }
    report = dilab::run(cmd, problem, opts);
  } catch (const dilab::Error& e) {
    report.command = command;
    report.exit_code = dilab::exit_status_for(e.code());
    report.error_code = std::string(dilab::to_string(e.code()));
    report.error_message = e.what();
  }

  std::cout << report.to_text();
  if (out) {
    std::ofstream f(*out);
    if (!f) {
      std::cerr << "cannot write " << *out << "\n";
      return dilab::kExitInputError;
    }
    f << report.to_json().dump(2) << "\n";
  }
  return report.exit_code;
}

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace rcpa::cli {

// Every flag shared by the subcommands, with its default.
struct Options {
  std::string manifold = "sphere2";
  std::string solver = "lrcpa";
  double alpha = 5.0;
  double sigma = 0.5;
  double tau = 0.5;
  double gamma = 0.0;
  double theta = 1.0;
  int iters = 500;
  int q = 1;
  std::string base_point = "auto";
  std::uint64_t seed = 42;
  std::string trace;
  std::string out;
  std::string reference;
  std::string input;
  std::string kind = "quadrants";
  int d1 = 8;
  int d2 = 8;
  int length = 30;
  double noise = 0.0;
  std::string cppa_trace;
  int cppa_iters = 1000;
  double cppa_lambda = 4.0;
  std::string stop = "iters";
  std::string differential = "closed";
  bool no_timing = false;
  bool allow_step_violation = false;
  // conjugate-check
  double radius = 2.0;
  int resolution = 21;
  int samples = 100;
  // True when --manifold was given on the command line or in the config file.
  bool manifold_given = false;
};

struct Command {
  std::string name;
  Options options;
};

// Parses the command line (and a --config file). On --help or a parse error
// prints to out or err, stores the exit status and returns nothing.
std::optional<Command> parse(int argc, const char* const* argv,
                             std::ostream& out, std::ostream& err,
                             int& status);

// Parses the command line, runs the selected subcommand and returns the
// process exit status: 0 success, 1 solver guard or failed check, 2 I/O,
// 3 invalid configuration.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace rcpa::cli

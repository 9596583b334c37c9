#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "rcpa/duality.hpp"
#include "rcpa/grid.hpp"
#include "rcpa/solvers.hpp"

namespace rcpa {

// Piecewise constant signal: the first length/2 samples are p1, the rest p2.
struct SignalSpec {
  Manifold manifold;
  Vec p1;
  Vec p2;
  int length = 30;
  double alpha = 5.0;
};

// The two-plateau test signal for euclidean3, sphere2 and spd3:
//   R^3 and S^2: p1 = (1,1,0)/sqrt2, p2 = (1,-1,0)/sqrt2;
//   SPD(3): p1,2 = exp_I(+-2X/|X|) with X = 1/2 [[1,2,2],[2,2,0],[2,0,6]].
SignalSpec standard_signal(const Manifold& M, double alpha = 5.0,
                           int length = 30);

ManifoldGrid gen_signal(const SignalSpec& spec);

struct AnalyticMinimizer {
  ManifoldGrid grid;
  double delta;
};

// Plateaus at gamma_{p1->p2}(delta) and gamma_{p2->p1}(delta) with
// delta = min(alpha / ((length/2) d(p1,p2)), 1/2).
AnalyticMinimizer analytic_minimizer(const SignalSpec& spec);

// Geodesic midpoint of p1 and p2 broadcast over the signal.
ManifoldGrid signal_midpoint(const SignalSpec& spec);

enum class ImageKind { Quadrants, SmoothBump };

ImageKind parse_image_kind(const std::string& name);

// Deterministic synthetic images. Quadrants has four constant regions with
// distinct values; SmoothBump varies smoothly. `noise` > 0 perturbs every
// pixel by a seeded random tangent vector of that scale.
ManifoldGrid gen_image(ImageKind kind, int d1, int d2, const Manifold& M,
                       std::uint64_t seed, double noise = 0.0);

// CSV data files: a header `# manifold=<name> d1=<rows> d2=<cols>` followed
// by one pixel per line in row-major order, chart coordinates separated by
// commas. Reading validates every pixel and reports the line number of the
// first bad one as an IoError.
void write_grid(std::ostream& out, const ManifoldGrid& grid);
ManifoldGrid read_grid(std::istream& in);
ManifoldGrid read_grid_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);
// Throws IoError when the directory that would hold `path` does not exist.
void require_writable_location(const std::string& path);

enum class DataSource { Signal, Image, File };

struct ExperimentConfig {
  Manifold manifold = Manifold::sphere2();
  SolverConfig solver;
  DataSource source = DataSource::Signal;
  int length = 30;
  ImageKind image_kind = ImageKind::Quadrants;
  int d1 = 8;
  int d2 = 8;
  double noise = 0.0;
  std::string input_path;
  std::string trace_path;
  std::string out_path;
  std::string reference_path;
  // "auto" (signal midpoint for signals, mean otherwise), "mean", "track",
  // "midpoint", or chart coordinates "v1,v2,..." of a point broadcast to
  // every pixel. Empty keeps solver.base_point.
  std::string base_point = "auto";
  // Second solver for `compare`.
  std::string cppa_trace_path;
  int cppa_iters = 1000;
  double cppa_lambda0 = 4.0;
};

struct RunSummary {
  double final_cost = 0.0;
  int iterations = 0;
  double elapsed_ms = 0.0;
  double operator_norm = 0.0;
  std::optional<double> reference_distance;
  std::optional<double> min_ck;
  std::optional<double> max_abs_ck;
};

ManifoldGrid load_data(const ExperimentConfig& config);

// Turns config.base_point into a policy for the given data.
BasePointPolicy resolve_base_point(const ExperimentConfig& config,
                                   const ManifoldGrid& data);

// Runs one solver on the configured data and writes the requested files.
RunSummary run(const ExperimentConfig& config);

struct CompareSummary {
  RunSummary rcpa;
  RunSummary cppa;
};

// Runs the linearized solver and CPPA on the same data.
CompareSummary run_compare(const ExperimentConfig& config);

struct ConjugateCheckConfig {
  Manifold manifold = Manifold::spd(2);
  double radius = 2.0;
  int resolution = 21;
  int samples = 100;
  std::uint64_t seed = 42;
};

// Oracle checks for F = 1/2 d(., m)^2 at the canonical base point: each
// count is the number of random samples violating the reported tolerance,
// each worst value is the largest violation margin (<= 0 when all pass).
struct ConjugateCheckReport {
  int samples = 0;
  int fenchel_young_violations = 0;
  double fenchel_young_worst = 0.0;
  int biconjugate_violations = 0;
  double biconjugate_worst = 0.0;
  int triconjugate_violations = 0;
  double triconjugate_worst = 0.0;
  int closed_form_violations = 0;
  double closed_form_worst = 0.0;

  bool passed() const {
    return fenchel_young_violations == 0 && biconjugate_violations == 0 &&
           triconjugate_violations == 0 && closed_form_violations == 0;
  }
};

ConjugateCheckReport conjugate_check(const ConjugateCheckConfig& config);
std::string format_conjugate_report(const ConjugateCheckReport& r);

std::string format_summary(const std::string& label, const RunSummary& s);

// Exit status for an exception escaping the harness: 1 solver guard or
// solver failure, 2 I/O, 3 invalid configuration.
int exit_code_for(const std::exception& e);

}  // namespace rcpa

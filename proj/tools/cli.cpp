#include "cli.hpp"

#include <CLI11.hpp>

#include <string>

#include "rcpa/errors.hpp"
#include "rcpa/experiment.hpp"

namespace rcpa::cli {

namespace {

Variant parse_variant(const std::string& name) {
  if (name == "lrcpa") return Variant::LinearizedDualRelaxed;
  if (name == "ercpa") return Variant::ExactPrimalRelaxed;
  if (name == "cppa") return Variant::Cppa;
  throw ConfigError("unknown solver '" + name +
                    "' (expected lrcpa, ercpa or cppa)");
}

// "iters", "cost:<value>" or "change:<eps>".
StopRule parse_stop(const std::string& text) {
  if (text == "iters") return {};
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (colon == std::string::npos || (kind != "cost" && kind != "change"))
    throw ConfigError("stop rule must be iters, cost:<v> or change:<eps>");
  double value = 0.0;
  try {
    value = std::stod(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("stop rule: bad threshold in '" + text + "'");
  }
  return {kind == "cost" ? StopKind::CostBelow : StopKind::ChangeBelow, value};
}

LogDifferential parse_differential(const std::string& name) {
  if (name == "closed") return LogDifferential::ClosedForm;
  if (name == "fd") return LogDifferential::FiniteDifference;
  throw ConfigError("differential must be closed or fd");
}

ExperimentConfig build_config(const Options& o, DataSource source) {
  ExperimentConfig c;
  c.manifold = Manifold::parse(o.manifold);
  c.source = o.input.empty() ? source : DataSource::File;
  c.length = o.length;
  c.image_kind = parse_image_kind(o.kind);
  c.d1 = o.d1;
  c.d2 = o.d2;
  c.noise = o.noise;
  c.input_path = o.input;
  c.trace_path = o.trace;
  c.out_path = o.out;
  c.reference_path = o.reference;
  c.base_point = o.base_point;
  c.cppa_trace_path = o.cppa_trace;
  c.cppa_iters = o.cppa_iters;
  c.cppa_lambda0 = o.cppa_lambda;

  SolverConfig& s = c.solver;
  s.variant = parse_variant(o.solver);
  s.alpha = o.alpha;
  s.sigma0 = o.sigma;
  s.tau0 = o.tau;
  s.gamma = o.gamma;
  s.theta0 = o.theta;
  s.max_iter = o.iters;
  s.q = o.q;
  s.seed = o.seed;
  s.stop = parse_stop(o.stop);
  s.differential = parse_differential(o.differential);
  s.record_time = !o.no_timing;
  s.allow_step_violation = o.allow_step_violation;
  s.cppa_lambda0 = o.cppa_lambda;
  return c;
}

void add_options(CLI::App& app, Options& o) {
  app.add_option("--manifold", o.manifold,
                 "euclidean<d>, sphere2 or spd<n>")->capture_default_str();
  app.add_option("--solver", o.solver, "lrcpa, ercpa or cppa")
      ->capture_default_str();
  app.add_option("--alpha", o.alpha, "fidelity weight")->capture_default_str();
  app.add_option("--sigma", o.sigma, "dual step")->capture_default_str();
  app.add_option("--tau", o.tau, "primal step")->capture_default_str();
  app.add_option("--gamma", o.gamma, "acceleration")->capture_default_str();
  app.add_option("--theta", o.theta, "relaxation")->capture_default_str();
  app.add_option("--iters", o.iters, "iteration budget")->capture_default_str();
  app.add_option("--q", o.q, "1 anisotropic, 2 isotropic TV")
      ->capture_default_str();
  app.add_option("--base-point", o.base_point,
                 "auto, mean, track, midpoint or chart coordinates v1,v2,...")
      ->capture_default_str();
  app.add_option("--seed", o.seed, "random seed")->capture_default_str();
  app.add_option("--trace", o.trace, "trace CSV output path");
  app.add_option("--out", o.out, "result data output path");
  app.add_option("--reference", o.reference,
                 "data file with a reference minimizer");
  app.add_option("--input", o.input, "read the data from this file");
  app.add_option("--kind", o.kind, "image kind: quadrants or bump")
      ->capture_default_str();
  app.add_option("--d1", o.d1, "image rows")->capture_default_str();
  app.add_option("--d2", o.d2, "image columns")->capture_default_str();
  app.add_option("--length", o.length, "signal length")->capture_default_str();
  app.add_option("--noise", o.noise, "image noise scale")->capture_default_str();
  app.add_option("--cppa-trace", o.cppa_trace, "CPPA trace path (compare)");
  app.add_option("--cppa-iters", o.cppa_iters, "CPPA cycles (compare)")
      ->capture_default_str();
  app.add_option("--cppa-lambda", o.cppa_lambda, "CPPA step numerator")
      ->capture_default_str();
  app.add_option("--stop", o.stop, "iters, cost:<v> or change:<eps>")
      ->capture_default_str();
  app.add_option("--differential", o.differential,
                 "closed or fd differentials of log")
      ->capture_default_str();
  app.add_flag("--no-timing", o.no_timing, "write 0 for elapsed times");
  app.add_flag("--allow-step-violation", o.allow_step_violation,
               "run even when sigma*tau*L^2 >= 1");
  app.add_option("--radius", o.radius, "oracle grid radius (conjugate-check)")
      ->capture_default_str();
  app.add_option("--resolution", o.resolution,
                 "oracle points per axis (conjugate-check)")
      ->capture_default_str();
  app.add_option("--samples", o.samples,
                 "random samples (conjugate-check)")
      ->capture_default_str();
}

}  // namespace

std::optional<Command> parse(int argc, const char* const* argv,
                             std::ostream& out, std::ostream& err,
                             int& status) {
  CLI::App app{"Riemannian Chambolle-Pock solvers for l2-TV denoising"};
  Options o;
  add_options(app, o);
  app.set_config("--config", "", "flat key = value configuration file");
  auto* signal = app.add_subcommand("signal", "denoise the two-plateau signal");
  auto* image = app.add_subcommand("image", "denoise a synthetic image");
  auto* compare =
      app.add_subcommand("compare", "run lrcpa and CPPA on the same image");
  auto* conj = app.add_subcommand("conjugate-check",
                                  "brute-force conjugate oracle report");
  for (auto* sub : {signal, image, compare, conj}) sub->fallthrough();
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    status = 0;
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    status = 3;
    return std::nullopt;
  }
  o.manifold_given = app.get_option("--manifold")->count() > 0;
  status = 0;
  return Command{app.get_subcommands().front()->get_name(), o};
}

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  int status = 0;
  const auto command = parse(argc, argv, out, err, status);
  if (!command) return status;
  const Options& o = command->options;

  try {
    if (command->name == "conjugate-check") {
      ConjugateCheckConfig cc;
      // The oracle needs a Hadamard manifold, so the default here is spd2.
      cc.manifold = Manifold::parse(o.manifold_given ? o.manifold : "spd2");
      cc.radius = o.radius;
      cc.resolution = o.resolution;
      cc.samples = o.samples;
      cc.seed = o.seed;
      const ConjugateCheckReport r = conjugate_check(cc);
      out << "conjugate-check on " << cc.manifold.name() << '\n'
          << format_conjugate_report(r);
      return r.passed() ? 0 : 1;
    }
    if (command->name == "compare") {
      const ExperimentConfig c = build_config(o, DataSource::Image);
      const CompareSummary s = run_compare(c);
      out << format_summary("lrcpa", s.rcpa) << '\n'
          << format_summary("cppa", s.cppa) << '\n';
      return 0;
    }
    const ExperimentConfig c = build_config(
        o, command->name == "signal" ? DataSource::Signal : DataSource::Image);
    const RunSummary s = run(c);
    out << format_summary(o.solver, s) << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace rcpa::cli

#include "rcpa/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <locale>
#include <random>
#include <sstream>

#include "rcpa/errors.hpp"

namespace rcpa {

namespace {

Vec sphere_point(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v / v.norm();
}

Mat spd_signal_direction() {
  Mat X(3, 3);
  X << 1, 2, 2, 2, 2, 0, 2, 0, 6;
  return 0.5 * X;
}

// Four distinct constant values for the quadrant image.
Vec quadrant_value(const Manifold& M, int c) {
  const int n = M.parameter();
  switch (M.kind()) {
    case ManifoldKind::Euclidean:
      return Vec::Constant(n, static_cast<double>(c));
    case ManifoldKind::Sphere2: {
      const Vec values[4] = {sphere_point(1, 0, 0), sphere_point(0, 1, 0),
                             sphere_point(0, 0, 1), sphere_point(1, 1, 1)};
      return values[c];
    }
    case ManifoldKind::Spd: {
      Mat B = Mat::Zero(n, n);
      if (c == 1) {
        for (int i = 0; i < n; ++i) B(i, i) = 1.0 - 2.0 * i / std::max(1, n - 1);
      } else if (c == 2) {
        B = Mat::Constant(n, n, 0.5);
      } else if (c == 3) {
        for (int i = 0; i < n; ++i) B(i, i) = -0.5;
        for (int i = 0; i + 1 < n; ++i) B(i, i + 1) = B(i + 1, i) = 0.4;
      }
      const Vec I = detail::as_vector(Mat::Identity(n, n));
      return M.exp(I, detail::as_vector(B));
    }
  }
  throw ContractError("quadrant_value: unknown manifold");
}

// Base point and two tangent directions used by the smooth image.
struct BumpFrame {
  Vec base;
  Vec u;
  Vec v;
};

BumpFrame bump_frame(const Manifold& M) {
  const int n = M.parameter();
  Vec base;
  switch (M.kind()) {
    case ManifoldKind::Euclidean: base = Vec::Zero(n); break;
    case ManifoldKind::Sphere2: base = sphere_point(0, 0, 1); break;
    case ManifoldKind::Spd: base = detail::as_vector(Mat::Identity(n, n)); break;
  }
  const auto basis = M.tangent_basis(base);
  return {base, basis[0], basis.size() > 1 ? basis[1] : basis[0]};
}

std::string parent_dir(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  return parent.empty() ? "." : parent.string();
}

template <class T>
T parse_field(const std::string& header, const std::string& key) {
  const auto pos = header.find(key + "=");
  if (pos == std::string::npos)
    throw IoError("data header lacks '" + key + "='");
  std::istringstream s(header.substr(pos + key.size() + 1));
  s.imbue(std::locale::classic());
  T value{};
  if (!(s >> value)) throw IoError("data header: bad value for " + key);
  return value;
}

RunSummary summarize(const SolverResult& r,
                     const std::optional<ManifoldGrid>& reference) {
  RunSummary s;
  s.final_cost = r.trace.rows.back().cost;
  s.iterations = r.iterations;
  s.elapsed_ms = r.trace.rows.back().elapsed_ms;
  s.operator_norm = r.operator_norm;
  if (reference) s.reference_distance = grid_dist(r.p, *reference);
  for (const auto& row : r.trace.rows) {
    if (std::isnan(row.ck)) continue;
    s.min_ck = std::min(s.min_ck.value_or(row.ck), row.ck);
    s.max_abs_ck = std::max(s.max_abs_ck.value_or(0.0), std::abs(row.ck));
  }
  return s;
}

std::string trace_text(const IterationTrace& t) {
  std::ostringstream s;
  t.write_csv(s);
  return s.str();
}

std::string grid_text(const ManifoldGrid& g) {
  std::ostringstream s;
  write_grid(s, g);
  return s.str();
}

std::optional<ManifoldGrid> load_reference(const ExperimentConfig& config,
                                           const ManifoldGrid& data) {
  if (!config.reference_path.empty()) {
    ManifoldGrid ref = read_grid_file(config.reference_path);
    if (!ref.same_shape(data))
      throw ConfigError("reference grid does not match the data");
    return ref;
  }
  if (config.source == DataSource::Signal)
    return analytic_minimizer(standard_signal(config.manifold,
                                              config.solver.alpha,
                                              config.length))
        .grid;
  return std::nullopt;
}

}  // namespace

SignalSpec standard_signal(const Manifold& M, double alpha, int length) {
  SignalSpec spec{M, Vec(), Vec(), length, alpha};
  switch (M.kind()) {
    case ManifoldKind::Sphere2:
      spec.p1 = sphere_point(1, 1, 0);
      spec.p2 = sphere_point(1, -1, 0);
      break;
    case ManifoldKind::Euclidean:
      if (M.parameter() != 3)
        throw ConfigError("the standard signal needs euclidean3");
      spec.p1 = sphere_point(1, 1, 0);
      spec.p2 = sphere_point(1, -1, 0);
      break;
    case ManifoldKind::Spd: {
      if (M.parameter() != 3) throw ConfigError("the standard signal needs spd3");
      const Mat X = spd_signal_direction();
      const Vec I = detail::as_vector(Mat::Identity(3, 3));
      const Vec dir = detail::as_vector(2.0 * X / X.norm());
      spec.p1 = M.exp(I, dir);
      spec.p2 = M.exp(I, -dir);
      break;
    }
  }
  return spec;
}

ManifoldGrid gen_signal(const SignalSpec& spec) {
  if (spec.length < 2 || spec.length % 2 != 0)
    throw ConfigError("signal length must be even and at least 2");
  spec.manifold.check_point(spec.p1);
  spec.manifold.check_point(spec.p2);
  if ((spec.p1.array() == spec.p2.array()).all())
    throw ConfigError("signal endpoints must differ");
  std::vector<Vec> pts;
  for (int i = 0; i < spec.length; ++i)
    pts.push_back(i < spec.length / 2 ? spec.p1 : spec.p2);
  return ManifoldGrid(spec.manifold, spec.length, 1, std::move(pts));
}

AnalyticMinimizer analytic_minimizer(const SignalSpec& spec) {
  const Manifold& M = spec.manifold;
  const double d = M.dist(spec.p1, spec.p2);
  const double half = spec.length / 2;
  const double delta = std::min(spec.alpha / (half * d), 0.5);
  const Vec a = M.geodesic(spec.p1, spec.p2, delta);
  const Vec b = M.geodesic(spec.p2, spec.p1, delta);
  std::vector<Vec> pts;
  for (int i = 0; i < spec.length; ++i)
    pts.push_back(i < spec.length / 2 ? a : b);
  return {ManifoldGrid(M, spec.length, 1, std::move(pts)), delta};
}

ManifoldGrid signal_midpoint(const SignalSpec& spec) {
  return ManifoldGrid::constant(spec.manifold, spec.length, 1,
                                spec.manifold.geodesic(spec.p1, spec.p2, 0.5));
}

ImageKind parse_image_kind(const std::string& name) {
  if (name == "quadrants") return ImageKind::Quadrants;
  if (name == "bump") return ImageKind::SmoothBump;
  throw ConfigError("unknown image kind '" + name +
                    "' (expected quadrants or bump)");
}

ManifoldGrid gen_image(ImageKind kind, int d1, int d2, const Manifold& M,
                       std::uint64_t seed, double noise) {
  if (d1 < 2 || d2 < 2) throw ConfigError("image size must be at least 2x2");
  if (!(noise >= 0.0)) throw ConfigError("noise must be nonnegative");
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(d1) * d2);
  const BumpFrame frame = bump_frame(M);
  for (int i = 0; i < d1; ++i)
    for (int j = 0; j < d2; ++j) {
      if (kind == ImageKind::Quadrants) {
        const int c = (i < d1 / 2 ? 0 : 2) + (j < d2 / 2 ? 0 : 1);
        pts.push_back(quadrant_value(M, c));
      } else {
        const double x = static_cast<double>(i) / (d1 - 1) - 0.5;
        const double y = static_cast<double>(j) / (d2 - 1) - 0.5;
        const double h = std::exp(-(x * x + y * y) / 0.1);
        pts.push_back(M.exp(frame.base, 1.2 * h * frame.u + 0.8 * x * frame.v));
      }
    }
  if (noise > 0.0) {
    std::mt19937_64 rng(seed);
    for (auto& p : pts) p = M.exp(p, M.random_tangent(p, rng, noise));
  }
  return ManifoldGrid(M, d1, d2, std::move(pts));
}

void write_grid(std::ostream& out, const ManifoldGrid& grid) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::setprecision(17);
  s << "# manifold=" << grid.manifold().name() << " d1=" << grid.rows()
    << " d2=" << grid.cols() << '\n';
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const auto chart = grid.manifold().to_chart(grid[n]);
    for (std::size_t c = 0; c < chart.size(); ++c)
      s << (c ? "," : "") << chart[c];
    s << '\n';
  }
  out << s.str();
}

ManifoldGrid read_grid(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("# ", 0) != 0)
    throw IoError("line 1: expected '# manifold=<name> d1=<> d2=<>'");
  const auto name = parse_field<std::string>(header, "manifold");
  const int d1 = parse_field<int>(header, "d1");
  const int d2 = parse_field<int>(header, "d2");
  if (d1 < 1 || d2 < 1) throw IoError("line 1: grid size must be positive");
  Manifold M = Manifold::euclidean(1);
  try {
    M = Manifold::parse(name);
  } catch (const std::exception& e) {
    throw IoError(std::string("line 1: ") + e.what());
  }

  std::vector<Vec> pts;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> values;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      std::istringstream cs(cell);
      cs.imbue(std::locale::classic());
      double v = 0.0;
      if (!(cs >> v) || !(cs >> std::ws).eof())
        throw IoError("line " + std::to_string(lineno) + ": bad number '" +
                      cell + "'");
      values.push_back(v);
    }
    try {
      Vec p = M.from_chart(values);
      M.check_point(p);
      pts.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw IoError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (pts.size() != static_cast<std::size_t>(d1) * d2)
    throw IoError("expected " + std::to_string(d1 * d2) + " pixels, found " +
                  std::to_string(pts.size()));
  return ManifoldGrid(M, d1, d2, std::move(pts));
}

ManifoldGrid read_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return read_grid(in);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

void require_writable_location(const std::string& path) {
  namespace fs = std::filesystem;
  const std::string dir = parent_dir(path);
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw IoError("output directory '" + dir + "' does not exist");
  if (fs::is_directory(path, ec))
    throw IoError("output path '" + path + "' is a directory");
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw IoError("write failed for '" + path + "'");
}

ManifoldGrid load_data(const ExperimentConfig& config) {
  switch (config.source) {
    case DataSource::Signal:
      return gen_signal(standard_signal(config.manifold, config.solver.alpha,
                                        config.length));
    case DataSource::Image:
      return gen_image(config.image_kind, config.d1, config.d2,
                       config.manifold, config.solver.seed, config.noise);
    case DataSource::File: {
      ManifoldGrid g = read_grid_file(config.input_path);
      if (g.manifold() != config.manifold)
        throw ConfigError("input file holds " + g.manifold().name() +
                          " data but the manifold is " +
                          config.manifold.name());
      return g;
    }
  }
  throw ConfigError("unknown data source");
}

BasePointPolicy resolve_base_point(const ExperimentConfig& config,
                                   const ManifoldGrid& data) {
  const std::string& choice = config.base_point;
  if (choice.empty()) return config.solver.base_point;
  const bool signal = config.source == DataSource::Signal;
  if (choice == "mean" || (choice == "auto" && !signal))
    return BasePointPolicy::mean();
  if (choice == "track") return BasePointPolicy::track();
  if (choice == "midpoint" || choice == "auto") {
    if (!signal) throw ConfigError("base point 'midpoint' needs signal data");
    return BasePointPolicy::fixed(signal_midpoint(
        standard_signal(config.manifold, config.solver.alpha, config.length)));
  }
  std::vector<double> values;
  std::istringstream s(choice);
  s.imbue(std::locale::classic());
  std::string cell;
  while (std::getline(s, cell, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ConfigError("base point: expected mean, track, midpoint or chart "
                        "coordinates, got '" + choice + "'");
    }
  }
  const Manifold& M = data.manifold();
  Vec point;
  try {
    point = M.from_chart(values);
    M.check_point(point);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("base point: ") + e.what());
  }
  return BasePointPolicy::fixed(
      ManifoldGrid::constant(M, data.rows(), data.cols(), point));
}

RunSummary run(const ExperimentConfig& config) {
  config.solver.validate();
  for (const auto* path : {&config.trace_path, &config.out_path})
    if (!path->empty()) require_writable_location(*path);

  const ManifoldGrid data = load_data(config);
  const auto reference = load_reference(config, data);
  SolverConfig sc = config.solver;
  sc.base_point = resolve_base_point(config, data);
  if (reference && sc.variant != Variant::Cppa) sc.reference = reference;
  const SolverResult result = solve(data, sc);

  const RunSummary summary = summarize(result, reference);
  const std::string trace = trace_text(result.trace);
  const std::string out = grid_text(result.p);
  if (!config.trace_path.empty()) write_text_file(config.trace_path, trace);
  if (!config.out_path.empty()) write_text_file(config.out_path, out);
  return summary;
}

CompareSummary run_compare(const ExperimentConfig& config) {
  config.solver.validate();
  for (const auto* path :
       {&config.trace_path, &config.out_path, &config.cppa_trace_path})
    if (!path->empty()) require_writable_location(*path);

  const ManifoldGrid data = load_data(config);
  const auto reference = load_reference(config, data);

  SolverConfig rc = config.solver;
  rc.variant = Variant::LinearizedDualRelaxed;
  rc.base_point = resolve_base_point(config, data);
  if (reference) rc.reference = reference;
  SolverConfig cc = config.solver;
  cc.variant = Variant::Cppa;
  cc.q = 1;
  cc.max_iter = config.cppa_iters;
  cc.cppa_lambda0 = config.cppa_lambda0;
  cc.validate();

  const SolverResult r1 = solve(data, rc);
  const SolverResult r2 = solve(data, cc);
  CompareSummary s{summarize(r1, reference), summarize(r2, reference)};
  const std::string t1 = trace_text(r1.trace);
  const std::string t2 = trace_text(r2.trace);
  const std::string out = grid_text(r1.p);
  if (!config.trace_path.empty()) write_text_file(config.trace_path, t1);
  if (!config.cppa_trace_path.empty())
    write_text_file(config.cppa_trace_path, t2);
  if (!config.out_path.empty()) write_text_file(config.out_path, out);
  return s;
}

namespace {

Vec canonical_point(const Manifold& M) {
  switch (M.kind()) {
    case ManifoldKind::Euclidean: return Vec::Zero(M.parameter());
    case ManifoldKind::Sphere2: return sphere_point(0, 0, 1);
    case ManifoldKind::Spd:
      return detail::as_vector(Mat::Identity(M.parameter(), M.parameter()));
  }
  throw ContractError("canonical_point: unknown manifold");
}

Vec uniform_coefficients(int d, double half_width, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-half_width, half_width);
  Vec a(d);
  for (int i = 0; i < d; ++i) a(i) = u(rng);
  return a;
}

}  // namespace

ConjugateCheckReport conjugate_check(const ConjugateCheckConfig& config) {
  const Manifold& M = config.manifold;
  if (!M.is_hadamard())
    throw ConfigError("conjugate-check needs a Hadamard manifold");
  if (config.samples < 1) throw ConfigError("samples must be positive");
  const Vec m = canonical_point(M);
  const ExampleFunction ex = example_sqdist(M, m);
  const TangentGrid grid(M, m, config.radius, config.resolution);
  const SampledPullback f = sample_pullback(ex.function, grid);
  const ConjugateTable table = tabulate_conjugate(f, grid);
  const std::vector<double> fbb = biconjugate_at_samples(table, grid);

  ConjugateCheckReport r;
  r.samples = config.samples;
  r.fenchel_young_worst = r.biconjugate_worst = r.triconjugate_worst =
      r.closed_form_worst = -std::numeric_limits<double>::infinity();
  auto record = [](int& count, double& worst, double excess) {
    worst = std::max(worst, excess);
    if (excess > 0.0) ++count;
  };
  std::mt19937_64 rng(config.seed);
  // Samples stay inside half the grid radius so that the suprema are
  // attained inside the sampled cube.
  const double half = config.radius / 2.0;
  for (int s = 0; s < config.samples; ++s) {
    const Vec a = uniform_coefficients(grid.dimension(), half, rng);
    const Vec c = uniform_coefficients(grid.dimension(), half, rng);
    const Vec p = M.exp(m, grid.from_coefficients(a));
    const Vec xi = grid.cotangent_from_coefficients(c);

    const OracleValue conj = conjugate_on_grid(f, c);
    const double gap = fenchel_young_gap(M, m, ex.function.evaluate(p),
                                         conj.value, p, xi);
    record(r.fenchel_young_violations, r.fenchel_young_worst,
           -gap - conj.tolerance);

    const OracleValue bi = biconjugate_on_grid(table, a);
    record(r.biconjugate_violations, r.biconjugate_worst,
           bi.value - ex.function.evaluate(p) - bi.tolerance);

    const TriconjugateReport tri = triconjugate_from_tables(f, table, fbb, c);
    record(r.triconjugate_violations, r.triconjugate_worst,
           tri.gap - tri.tolerance);

    record(r.closed_form_violations, r.closed_form_worst,
           std::abs(conj.value - conjugate_sqdist_closed_form(M, m, xi)) -
               conj.tolerance);
  }
  return r;
}

std::string format_conjugate_report(const ConjugateCheckReport& r) {
  std::ostringstream o;
  o.imbue(std::locale::classic());
  o << std::setprecision(6);
  auto line = [&](const char* name, int count, double worst) {
    o << name << ": " << count << " of " << r.samples
      << " samples outside tolerance (worst margin " << worst << ")\n";
  };
  line("fenchel-young", r.fenchel_young_violations, r.fenchel_young_worst);
  line("biconjugate", r.biconjugate_violations, r.biconjugate_worst);
  line("triconjugate", r.triconjugate_violations, r.triconjugate_worst);
  line("sqdist closed form", r.closed_form_violations, r.closed_form_worst);
  o << (r.passed() ? "all checks passed" : "some checks failed") << '\n';
  return o.str();
}

std::string format_summary(const std::string& label, const RunSummary& s) {
  std::ostringstream o;
  o.imbue(std::locale::classic());
  o << std::setprecision(10);
  o << label << ": final cost " << s.final_cost << ", iterations "
    << s.iterations << ", elapsed " << s.elapsed_ms << " ms";
  if (s.operator_norm > 0.0) o << ", L " << s.operator_norm;
  if (s.reference_distance)
    o << ", distance to reference " << *s.reference_distance;
  if (s.min_ck) o << ", min C(k) " << *s.min_ck << ", max |C(k)| " << *s.max_abs_ck;
  return o.str();
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const StepConditionError*>(&e) ||
      dynamic_cast<const SolverError*>(&e))
    return 1;
  if (dynamic_cast<const IoError*>(&e)) return 2;
  if (dynamic_cast<const ConfigError*>(&e) ||
      dynamic_cast<const ContractError*>(&e) ||
      dynamic_cast<const DomainError*>(&e))
    return 3;
  return 1;
}

}  // namespace rcpa

// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "cophase/antenna_scenario.hpp"
#include "cophase/cplx_io.hpp"
#include "cophase/csv.hpp"
#include "cophase/experiments.hpp"
#include "cophase/random.hpp"

namespace cophase::cli {

namespace fs = std::filesystem;

namespace {

void check_output_path(const RunConfig& config, const std::string& key) {
  if (!config.has(key)) return;
  const fs::path path(config.get_string(key));
  if (path.empty()) throw ConfigError("empty path for key '" + key + "'");
  const fs::path parent = path.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw ConfigError("directory of '" + key + "' does not exist: " + parent.string());
  }
  if (fs::is_directory(path)) throw ConfigError("'" + key + "' names a directory: " + path.string());
}

void check_input_path(const RunConfig& config, const std::string& key) {
  if (!config.has(key)) return;
  const fs::path path(config.get_string(key));
  if (!fs::is_regular_file(path)) throw ConfigError("file for key '" + key + "' not found: " + path.string());
}

Index positive(const RunConfig& config, const std::string& key) {
  const long long v = config.get_int(key);
  if (v < 1) throw ConfigError("key '" + key + "' must be >= 1, got " + std::to_string(v));
  return static_cast<Index>(v);
}

Index positive_or(const RunConfig& config, const std::string& key, Index fallback) {
  return config.has(key) ? positive(config, key) : fallback;
}

double noise_level(const RunConfig& config, double fallback) {
  const double n = config.get_double_or("noise.n", fallback);
  if (n < 0.0) throw ConfigError("key 'noise.n' must be >= 0");
  return n;
}

std::vector<SolverId> solvers(const RunConfig& config, const std::string& fallback) {
  const RunConfig* source = &config;
  RunConfig defaults;
  if (!config.has("solver.list")) {
    defaults.set("solver.list", fallback);
    source = &defaults;
  }
  std::vector<SolverId> ids;
  for (const auto& name : source->get_list("solver.list")) {
    if (name == "all") {
      for (SolverId id : all_solvers()) ids.push_back(id);
      continue;
    }
    const auto id = parse_solver(name);
    if (!id) throw ConfigError("unknown solver '" + name + "' in key 'solver.list'");
    ids.push_back(*id);
  }
  return ids;
}

RunOptions run_options(const RunConfig& config) {
  RunOptions options;
  options.threads = resolve_threads(config);
  options.record_time = config.get_bool_or("run.record_time", false);
  if (config.has("solver.max_iterations")) {
    options.minimizer.max_iterations = static_cast<int>(positive(config, "solver.max_iterations"));
  }
  return options;
}

CoherenceLayout layout_for_rows(Index rows, Index coherent) {
  if (rows % coherent != 0) {
    throw ConfigError("operator rows (" + std::to_string(rows) + ") not divisible by grid.C = " +
                      std::to_string(coherent));
  }
  return CoherenceLayout(rows / coherent, coherent);
}

CVector load_vector(const RunConfig& config, const std::string& key, Index expected) {
  const CMatrix m = load_cplx1(config.get_string(key));
  if (m.cols() != 1 || m.rows() != expected) {
    throw ConfigError("file for key '" + key + "' must hold a " + std::to_string(expected) + "x1 vector");
  }
  return m.col(0);
}

/// CSV sink: the configured file, or the stream passed in.
class Sink {
 public:
  Sink(const RunConfig& config, const std::string& key, std::ostream& fallback) : stream_(&fallback) {
    if (config.has(key)) {
      file_.open(config.get_string(key), std::ios::binary | std::ios::trunc);
      if (!file_) throw ConfigError("cannot write file for key '" + key + "'");
      stream_ = &file_;
    }
  }
  std::ostream& stream() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

void write_meta(const std::string& command, const RunConfig& config) {
  if (!config.has("output.path")) return;
  std::ofstream meta(config.get_string("output.path") + ".meta", std::ios::binary | std::ios::trunc);
  if (!meta) throw ConfigError("cannot write metadata next to 'output.path'");
  meta << "command = " << command << '\n';
  for (const auto& [key, value] : config.entries()) meta << key << " = " << value << '\n';
  if (config.has("grid.reference_N") && config.has("grid.N")) {
    meta << "desk_scale.N = " << format_double(config.get_double("grid.reference_N") / config.get_double("grid.N"))
         << '\n';
  }
  if (config.has("run.reference_trials") && config.has("run.trials")) {
    meta << "desk_scale.trials = "
         << format_double(config.get_double("run.reference_trials") / config.get_double("run.trials")) << '\n';
  }
}

void report_failures(const std::vector<TrialRecord>& records, std::ostream& err) {
  for (const auto& r : records) {
    if (r.error.empty()) continue;
    err << "failed trial: solver=" << solver_name(r.solver) << " N=" << r.unknowns << " M=" << r.groups
        << " C=" << r.coherent << " seed=" << r.seed << ": " << r.error << '\n';
  }
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err) {
  config.require({"grid.N", "grid.C", "grid.ratios", "noise.n", "run.trials", "solver.list"});
  check_output_path(config, "output.path");
  check_output_path(config, "output.trials");

  ExperimentGrid grid;
  grid.unknowns = positive(config, "grid.N");
  grid.coherent = positive(config, "grid.C");
  grid.groups = ExperimentGrid::groups_for_ratios(grid.unknowns, grid.coherent,
                                                  parse_ratio_range(config.get_string("grid.ratios")));
  grid.noise = noise_level(config, 0.0);
  grid.trials = positive(config, "run.trials");
  grid.master_seed = config.has("run.seed") ? config.get_seed("run.seed") : 0;
  grid.solvers = solvers(config, "svd-r");
  const RunOptions options = run_options(config);

  const SweepResult result = sweep_success(grid, options);
  Sink sink(config, "output.path", out);
  write_sweep_csv(sink.stream(), result.rows);
  if (config.has("output.trials")) {
    Sink trials(config, "output.trials", out);
    write_trials_csv(trials.stream(), result.trials);
  }
  write_meta("sweep", config);
  report_failures(result.trials, err);
  return 0;
}

int cmd_trial(const RunConfig& config, std::ostream& out, std::ostream& err) {
  check_input_path(config, "input.operator");
  check_input_path(config, "input.solution");
  check_output_path(config, "output.path");
  const std::uint64_t seed = config.has("run.seed") ? config.get_seed("run.seed") : 0;
  const double noise = noise_level(config, 0.0);
  const std::vector<SolverId> ids = solvers(config, "svd-r");
  const RunOptions options = run_options(config);

  ProblemInstance instance = [&] {
    if (config.has("input.operator")) {
      config.require({"grid.C"});
      CMatrix a = load_cplx1(config.get_string("input.operator"));
      const CoherenceLayout layout = layout_for_rows(a.rows(), positive(config, "grid.C"));
      ForwardOperator op(std::move(a), layout);
      CVector xi;
      if (config.has("input.solution")) {
        xi = load_vector(config, "input.solution", op.unknowns());
      } else {
        Rng rng(derive_seed(seed, 2));
        xi = complex_gaussian_vector(op.unknowns(), rng);
      }
      return make_instance(std::move(op), std::move(xi), noise, derive_seed(seed, 3));
    }
    config.require({"grid.N", "grid.M", "grid.C", "noise.n", "solver.list"});
    const GridPoint point{positive(config, "grid.N"), positive(config, "grid.M"), positive(config, "grid.C"), noise};
    return draw_gaussian_instance(point, seed);
  }();

  std::vector<TrialRecord> records;
  for (SolverId id : ids) {
    TrialRecord record = score_trial(id, instance, seed, options);
    record.noise = noise;
    record.success = record.error.empty() && trial_success(record.rd, noise);
    records.push_back(std::move(record));
  }
  Sink sink(config, "output.path", out);
  write_trials_csv(sink.stream(), records);
  write_meta("trial", config);
  report_failures(records, err);
  return 0;
}

int cmd_spectrum(const RunConfig& config, std::ostream& out, std::ostream&) {
  config.require({"solver.kind"});
  check_input_path(config, "input.operator");
  check_input_path(config, "input.observations");
  check_output_path(config, "output.path");
  const std::string kind = config.get_string("solver.kind");
  if (kind != "Q" && kind != "R") throw ConfigError("key 'solver.kind' must be Q or R, got '" + kind + "'");
  const std::uint64_t seed = config.has("run.seed") ? config.get_seed("run.seed") : 0;
  const double noise = noise_level(config, 0.0);

  ForwardOperator op = [&] {
    if (config.has("input.operator")) {
      config.require({"grid.C"});
      CMatrix a = load_cplx1(config.get_string("input.operator"));
      const CoherenceLayout layout = layout_for_rows(a.rows(), positive(config, "grid.C"));
      return ForwardOperator(std::move(a), layout);
    }
    config.require({"grid.N", "grid.M", "grid.C"});
    const CoherenceLayout layout(positive(config, "grid.M"), positive(config, "grid.C"));
    Rng rng(derive_seed(seed, 1));
    return ForwardOperator(complex_gaussian_matrix(layout.observations(), positive(config, "grid.N"), rng), layout);
  }();

  CVector b;
  if (config.has("input.observations")) {
    b = load_vector(config, "input.observations", op.observations());
  } else {
    Rng rng(derive_seed(seed, 2));
    b = add_noise(forward_apply(op, complex_gaussian_vector(op.unknowns(), rng)), NoiseSpec{noise, derive_seed(seed, 3)});
  }
  const PartialObservations obs = observe_partial(op, b);
  const NullSpaceSystem sys = kind == "Q" ? build_q(op, obs) : build_r(op, obs);

  Sink sink(config, "output.path", out);
  write_spectrum_csv(sink.stream(), spectrum_dump(sys));
  write_meta("spectrum", config);
  return 0;
}

int cmd_noise_bound(const RunConfig& config, std::ostream& out, std::ostream& err) {
  check_output_path(config, "output.path");
  NoiseBoundConfig study;
  study.unknowns = positive_or(config, "grid.N", study.unknowns);
  study.observations = positive_or(config, "bound.observations", study.observations);
  study.coherent = positive_or(config, "grid.C", study.coherent);
  if (config.has("noise.levels")) study.noise_levels = config.get_doubles("noise.levels");
  study.trials = positive_or(config, "run.trials", study.trials);
  if (config.has("run.seed")) study.master_seed = config.get_seed("run.seed");
  study.pin_group = static_cast<Index>(config.get_int_or("solver.pin", 0));
  if (study.coherent < 2 || study.observations % study.coherent != 0) {
    throw ConfigError("key 'bound.observations' must be a multiple of grid.C >= 2");
  }
  if (study.pin_group < 0 || study.pin_group >= study.observations / study.coherent) {
    throw ConfigError("key 'solver.pin' must be a 0-based group index below M");
  }

  const auto rows = noise_bound_study(study, run_options(config));
  Sink sink(config, "output.path", out);
  write_noise_bound_csv(sink.stream(), rows);
  write_meta("noise-bound", config);

  const auto trials = static_cast<std::size_t>(study.trials);
  for (std::size_t level = 0; level < study.noise_levels.size(); ++level) {
    std::size_t satisfied = 0;
    std::size_t failed = 0;
    std::vector<double> errors;
    for (std::size_t t = 0; t < trials; ++t) {
      const auto& row = rows[level * trials + t];
      satisfied += row.satisfied ? 1 : 0;
      failed += row.failed ? 1 : 0;
      errors.push_back(row.rel_error);
    }
    err << "n=" << format_double(study.noise_levels[level]) << " satisfied=" << satisfied << "/" << trials
        << " degenerate=" << failed << " median_error=" << format_double(median(errors)) << '\n';
  }
  return 0;
}

int cmd_antenna(const RunConfig& config, std::ostream& out, std::ostream& err) {
  check_output_path(config, "output.path");
  check_output_path(config, "output.operator");
  AntennaConfig scenario;
  scenario.unknowns = positive_or(config, "grid.N", scenario.unknowns);
  scenario.coherent = positive_or(config, "grid.C", scenario.coherent);
  scenario.ratio = config.get_double_or("antenna.ratio", scenario.ratio);
  scenario.noise = noise_level(config, scenario.noise);
  scenario.trials = positive_or(config, "run.trials", scenario.trials);
  if (config.has("run.seed")) scenario.seed = config.get_seed("run.seed");
  scenario.source_diameter = config.get_double_or("antenna.source_diameter", scenario.source_diameter);
  scenario.measurement_diameter = config.get_double_or("antenna.measurement_diameter", scenario.measurement_diameter);
  scenario.probe_spacing = config.get_double_or("antenna.spacing", scenario.probe_spacing);
  scenario.solvers = solvers(config, "svd-r");
  if (scenario.coherent != 2 && scenario.coherent != 3) throw ConfigError("key 'grid.C' must be 2 or 3 for antenna");
  if (scenario.unknowns % 2 != 0) throw ConfigError("key 'grid.N' must be even for antenna");
  if (!(scenario.ratio > 0.0)) throw ConfigError("key 'antenna.ratio' must be positive");

  const AntennaScenarioResult result = run_antenna_scenario(scenario, run_options(config));
  if (config.has("output.operator")) save_cplx1(config.get_string("output.operator"), result.op.matrix());
  Sink sink(config, "output.path", out);
  write_trials_csv(sink.stream(), result.trials);
  write_meta("antenna", config);

  for (SolverId id : scenario.solvers) {
    std::vector<double> rd;
    std::vector<double> gaps;
    for (const auto& r : result.trials) {
      if (r.solver != id) continue;
      rd.push_back(r.rd);
      gaps.push_back(r.gap);
    }
    double mean = 0.0;
    for (double v : rd) mean += v / static_cast<double>(rd.size());
    err << solver_name(id) << ": mean_rd=" << format_double(mean) << " median_gap=" << format_double(median(gaps))
        << '\n';
  }
  report_failures(result.trials, err);
  return 0;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"sweep", "trial", "spectrum", "noise-bound", "antenna"};
  return names;
}

unsigned resolve_threads(const RunConfig& config) {
  if (config.has("run.threads")) {
    const long long t = config.get_int("run.threads");
    if (t < 1) throw ConfigError("key 'run.threads' must be >= 1");
    return static_cast<unsigned>(t);
  }
  if (const char* env = std::getenv("COPHASE_THREADS"); env != nullptr && *env != '\0') {
    RunConfig from_env;
    from_env.set("run.threads", env);
    return resolve_threads(from_env);
  }
  return 1;
}

int run_command(const std::string& name, const RunConfig& config, std::ostream& out, std::ostream& err) {
  static const std::map<std::string, std::function<int(const RunConfig&, std::ostream&, std::ostream&)>> table{
      {"sweep", cmd_sweep},
      {"trial", cmd_trial},
      {"spectrum", cmd_spectrum},
      {"noise-bound", cmd_noise_bound},
      {"antenna", cmd_antenna},
  };
  const auto it = table.find(name);
  if (it == table.end()) throw UsageError("unknown command '" + name + "'");
  return it->second(config, out, err);
}

}  // namespace cophase::cli

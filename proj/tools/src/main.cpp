#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "config_file.hpp"
#include "torusperc/digest.hpp"
#include "torusperc/errors.hpp"
#include "torusperc/events.hpp"
#include "torusperc/experiments.hpp"
#include "torusperc/kernel.hpp"
#include "torusperc/rng.hpp"
#include "torusperc/threshold.hpp"

namespace {

using namespace torusperc;
using cli::ConfigFile;

constexpr const char* kArtifactVersion = "1.0.0";

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

KernelFamily family_from_string(const std::string& s) {
  if (s == "bargmann_fock") return KernelFamily::bargmann_fock;
  if (s == "oscillatory") return KernelFamily::oscillatory;
  if (s == "truncated_polynomial_decay") return KernelFamily::truncated_polynomial_decay;
  if (s == "constant") return KernelFamily::constant;
  if (s == "custom_table") {
    throw Error("config-invalid", "custom_table kernels are only reachable through a preset");
  }
  throw Error("config-invalid", "unknown kernel family: " + s);
}

std::string family_to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::bargmann_fock: return "bargmann_fock";
    case KernelFamily::oscillatory: return "oscillatory";
    case KernelFamily::truncated_polynomial_decay: return "truncated_polynomial_decay";
    case KernelFamily::constant: return "constant";
    case KernelFamily::custom_table: return "custom_table";
  }
  return "unknown";
}

EventKind kind_from_string(const std::string& s) {
  if (s == "loop") return EventKind::loop;
  if (s == "cross") return EventKind::cross;
  if (s == "cross_dagger") return EventKind::cross_dagger;
  if (s == "circuit") return EventKind::circuit;
  throw Error("config-invalid", "unknown event kind: " + s);
}

// Everything a run needs, resolved from config file plus flag overrides.
struct RunConfig {
  MCConfig mc;
  EventSpec event = loop_event(0);
  std::vector<double> eps_list;
  std::string preset;  // kept in the echo when the kernel came from a preset
  bool debug_constant_field = false;
  double debug_constant_value = 1.0;
  std::string out_dir = ".";
};

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"kernel",
       {"preset", "family", "width", "osc_a", "beta", "r_cut", "constant_value",
        "normalize_sigma"}},
      {"grid", {"d", "n", "side_factor", "R"}},
      {"event",
       {"kind", "axis", "corner_x", "corner_y", "rotation_quarter", "r1", "r2", "slot_left",
        "slot_right"}},
      {"experiment",
       {"samples", "seed", "jobs", "route", "levels", "sides", "R_list", "r_list", "L_list",
        "eps_list", "gluing_L"}},
  };
  return keys;
}

void reject_unknown_keys(const ConfigFile& cfg) {
  const auto& known = known_keys();
  for (const auto& [section, kv] : cfg.sections) {
    auto it = known.find(section);
    if (it == known.end()) {
      throw Error("config-invalid", "unknown section [" + section + "]");
    }
    for (const auto& [key, value] : kv) {
      (void)value;
      if (!it->second.count(key)) {
        throw Error("config-invalid", "unknown key " + key + " in [" + section + "]");
      }
    }
  }
}

RunConfig resolve_config(const ConfigFile& cfg) {
  reject_unknown_keys(cfg);
  RunConfig run;

  if (cfg.has("kernel", "family") && cfg.get("kernel", "family") == "debug_constant_field") {
    run.debug_constant_field = true;
    if (cfg.has("kernel", "constant_value")) {
      run.debug_constant_value =
          cli::parse_double(cfg.get("kernel", "constant_value"), "kernel.constant_value");
    }
  } else {
    KernelSpec spec;
    if (cfg.has("kernel", "preset")) {
      run.preset = cfg.get("kernel", "preset");
      spec = kernel_preset(run.preset);
    }
    if (cfg.has("kernel", "family")) {
      spec.family = family_from_string(cfg.get("kernel", "family"));
    }
    if (cfg.has("kernel", "width")) {
      spec.width = cli::parse_double(cfg.get("kernel", "width"), "kernel.width");
    }
    if (cfg.has("kernel", "osc_a")) {
      spec.osc_a = cli::parse_double(cfg.get("kernel", "osc_a"), "kernel.osc_a");
    }
    if (cfg.has("kernel", "beta")) {
      spec.beta = cli::parse_double(cfg.get("kernel", "beta"), "kernel.beta");
    }
    if (cfg.has("kernel", "r_cut")) {
      spec.r_cut = cli::parse_double(cfg.get("kernel", "r_cut"), "kernel.r_cut");
    }
    if (cfg.has("kernel", "constant_value")) {
      spec.constant_value =
          cli::parse_double(cfg.get("kernel", "constant_value"), "kernel.constant_value");
    }
    if (cfg.has("kernel", "normalize_sigma")) {
      spec.normalize_sigma =
          cli::parse_bool(cfg.get("kernel", "normalize_sigma"), "kernel.normalize_sigma");
    }
    if (spec.family == KernelFamily::custom_table && run.preset.empty()) {
      throw Error("config-invalid", "custom_table kernels are only reachable through a preset");
    }
    run.mc.kernel_spec = spec;
  }

  run.mc.d = static_cast<int>(cli::parse_int(cfg.get_or("grid", "d", "2"), "grid.d"));
  run.mc.n = static_cast<int>(cli::parse_int(cfg.get_or("grid", "n", "0"), "grid.n"));
  run.mc.side_factor =
      cli::parse_double(cfg.get_or("grid", "side_factor", "10"), "grid.side_factor");
  run.mc.R = cli::parse_double(cfg.get_or("grid", "R", "1"), "grid.R");

  const std::string kind = cfg.get_or("event", "kind", "loop");
  const double R = run.mc.R;
  std::array<double, 3> corner{
      cli::parse_double(cfg.get_or("event", "corner_x", "0"), "event.corner_x"),
      cli::parse_double(cfg.get_or("event", "corner_y", "0"), "event.corner_y"), 0.0};
  const int rot = static_cast<int>(
      cli::parse_int(cfg.get_or("event", "rotation_quarter", "0"), "event.rotation_quarter"));
  switch (kind_from_string(kind)) {
    case EventKind::loop:
      run.event =
          loop_event(static_cast<int>(cli::parse_int(cfg.get_or("event", "axis", "0"), "event.axis")));
      break;
    case EventKind::cross:
      run.event = cross_event(R, corner, rot);
      break;
    case EventKind::cross_dagger:
      run.event = dagger_event(R, corner, rot);
      run.event.slot_left = static_cast<int>(
          cli::parse_int(cfg.get_or("event", "slot_left", "-1"), "event.slot_left"));
      run.event.slot_right = static_cast<int>(
          cli::parse_int(cfg.get_or("event", "slot_right", "-1"), "event.slot_right"));
      break;
    case EventKind::circuit:
      run.event = circuit_event(corner,
                                cli::parse_double(cfg.get_or("event", "r1", "1"), "event.r1"),
                                cli::parse_double(cfg.get_or("event", "r2", "2"), "event.r2"));
      break;
  }

  run.mc.n_samples = static_cast<std::size_t>(
      cli::parse_int(cfg.get_or("experiment", "samples", "1000"), "experiment.samples"));
  run.mc.master_seed = static_cast<std::uint64_t>(
      cli::parse_int(cfg.get_or("experiment", "seed", "1"), "experiment.seed"));
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  run.mc.jobs = static_cast<int>(
      cli::parse_int(cfg.get_or("experiment", "jobs", std::to_string(hw)), "experiment.jobs"));
  const std::string route = cfg.get_or("experiment", "route", "white_noise");
  if (route == "white_noise") {
    run.mc.route = SampleRoute::white_noise;
  } else if (route == "spectral_oracle") {
    run.mc.route = SampleRoute::spectral_oracle;
  } else {
    throw Error("config-invalid", "unknown sample route: " + route);
  }
  if (cfg.has("experiment", "levels")) {
    run.mc.levels = cli::parse_double_list(cfg.get("experiment", "levels"), "experiment.levels");
  }
  if (cfg.has("experiment", "sides")) {
    run.mc.sides = cli::parse_double_list(cfg.get("experiment", "sides"), "experiment.sides");
  }
  if (cfg.has("experiment", "R_list")) {
    run.mc.R_list = cli::parse_double_list(cfg.get("experiment", "R_list"), "experiment.R_list");
  }
  if (cfg.has("experiment", "r_list")) {
    run.mc.r_list = cli::parse_double_list(cfg.get("experiment", "r_list"), "experiment.r_list");
  }
  if (cfg.has("experiment", "L_list")) {
    for (long long v : cli::parse_int_list(cfg.get("experiment", "L_list"), "experiment.L_list")) {
      run.mc.L_list.push_back(static_cast<int>(v));
    }
  }
  if (cfg.has("experiment", "eps_list")) {
    run.eps_list = cli::parse_double_list(cfg.get("experiment", "eps_list"), "experiment.eps_list");
  }
  run.mc.gluing_L = static_cast<int>(
      cli::parse_int(cfg.get_or("experiment", "gluing_L", "3"), "experiment.gluing_L"));
  return run;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt_g(v[i]);
  }
  return out;
}

// Fully resolved config in the same format the parser reads, so a rerun from
// the echo reproduces the outputs byte for byte.
std::string echo_ini(const RunConfig& run) {
  std::string out = "# torusperc resolved config v";
  out += kArtifactVersion;
  out += "\n[kernel]\n";
  if (run.debug_constant_field) {
    out += "family = debug_constant_field\n";
    out += "constant_value = " + fmt_g(run.debug_constant_value) + "\n";
  } else {
    const KernelSpec& k = run.mc.kernel_spec;
    if (!run.preset.empty()) out += "preset = " + run.preset + "\n";
    out += "family = " + family_to_string(k.family) + "\n";
    out += "width = " + fmt_g(k.width) + "\n";
    out += "osc_a = " + fmt_g(k.osc_a) + "\n";
    out += "beta = " + fmt_g(k.beta) + "\n";
    out += "r_cut = " + fmt_g(k.r_cut) + "\n";
    out += "constant_value = " + fmt_g(k.constant_value) + "\n";
    out += std::string("normalize_sigma = ") + (k.normalize_sigma ? "true" : "false") + "\n";
  }
  out += "\n[grid]\n";
  out += "d = " + std::to_string(run.mc.d) + "\n";
  out += "n = " + std::to_string(run.mc.n) + "\n";
  out += "side_factor = " + fmt_g(run.mc.side_factor) + "\n";
  out += "R = " + fmt_g(run.mc.R) + "\n";
  out += "\n[event]\n";
  out += "kind = " + event_name(run.event.kind) + "\n";
  switch (run.event.kind) {
    case EventKind::loop:
      out += "axis = " + std::to_string(run.event.placement.rotation_quarter) + "\n";
      break;
    case EventKind::cross:
    case EventKind::cross_dagger:
      out += "corner_x = " + fmt_g(run.event.placement.translation[0]) + "\n";
      out += "corner_y = " + fmt_g(run.event.placement.translation[1]) + "\n";
      out += "rotation_quarter = " + std::to_string(run.event.placement.rotation_quarter) + "\n";
      if (run.event.kind == EventKind::cross_dagger) {
        out += "slot_left = " + std::to_string(run.event.slot_left) + "\n";
        out += "slot_right = " + std::to_string(run.event.slot_right) + "\n";
      }
      break;
    case EventKind::circuit:
      out += "corner_x = " + fmt_g(run.event.placement.translation[0]) + "\n";
      out += "corner_y = " + fmt_g(run.event.placement.translation[1]) + "\n";
      out += "r1 = " + fmt_g(run.event.r1) + "\n";
      out += "r2 = " + fmt_g(run.event.r2) + "\n";
      break;
  }
  out += "\n[experiment]\n";
  out += "samples = " + std::to_string(run.mc.n_samples) + "\n";
  out += "seed = " + std::to_string(run.mc.master_seed) + "\n";
  out += "jobs = " + std::to_string(run.mc.jobs) + "\n";
  out += std::string("route = ") +
         (run.mc.route == SampleRoute::white_noise ? "white_noise" : "spectral_oracle") + "\n";
  if (!run.mc.levels.empty()) out += "levels = " + join_doubles(run.mc.levels) + "\n";
  if (!run.mc.sides.empty()) out += "sides = " + join_doubles(run.mc.sides) + "\n";
  if (!run.mc.R_list.empty()) out += "R_list = " + join_doubles(run.mc.R_list) + "\n";
  if (!run.mc.r_list.empty()) out += "r_list = " + join_doubles(run.mc.r_list) + "\n";
  if (!run.mc.L_list.empty()) {
    out += "L_list = ";
    for (std::size_t i = 0; i < run.mc.L_list.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(run.mc.L_list[i]);
    }
    out += "\n";
  }
  if (!run.eps_list.empty()) out += "eps_list = " + join_doubles(run.eps_list) + "\n";
  out += "gluing_L = " + std::to_string(run.mc.gluing_L) + "\n";
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io-failure", "cannot write " + path.string());
  out << content;
  if (!out) throw Error("io-failure", "short write to " + path.string());
}

std::filesystem::path prepare_out_dir(const RunConfig& run) {
  std::filesystem::path dir(run.out_dir);
  std::filesystem::create_directories(dir);
  write_file(dir / "config_resolved.ini", echo_ini(run));
  return dir;
}

// simple work-stealing loop for the threshold command; experiment harnesses
// carry their own pool inside the library
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
  int workers = std::min<int>(jobs, static_cast<int>(count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto drain = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) pool.emplace_back(drain);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

int cmd_validate_kernel(const RunConfig& run) {
  if (run.debug_constant_field) {
    throw Error("config-invalid", "the debug constant field has no kernel to validate");
  }
  const double side = run.mc.side_factor * run.mc.R;
  const TorusGrid grid(run.mc.d, resolve_grid_n(run.mc, side), side);
  const Kernel kernel = make_kernel(run.mc.kernel_spec, grid);
  const ConditionReport report = validate_conditions(kernel);
  const std::string json = condition_report_json(report);

  const auto dir = prepare_out_dir(run);
  write_file(dir / "condition_report.json", json + "\n");
  std::printf("%s\n", json.c_str());
  if (!report.all_pass()) {
    std::fprintf(stderr, "kernel failed validation:");
    if (!report.weak_positivity.pass) std::fprintf(stderr, " weak_positivity");
    if (!report.strong_positivity.pass) std::fprintf(stderr, " strong_positivity");
    if (!report.symmetry.pass) std::fprintf(stderr, " symmetry");
    if (!report.decay.pass) std::fprintf(stderr, " decay");
    if (!report.nondegeneracy.pass) std::fprintf(stderr, " nondegeneracy");
    std::fprintf(stderr, "\n");
    return 1;
  }
  return 0;
}

int cmd_threshold(const RunConfig& run) {
  const double side = run.mc.side_factor * run.mc.R;
  const auto dir = prepare_out_dir(run);

  std::string csv =
      "# torusperc threshold v1\n"
      "seed,kernel_id,n,side,event,t_value,saddle_x,saddle_y,class_1,class_2\n";

  if (run.debug_constant_field) {
    // deterministic field f == c, evaluated without any kernel machinery
    TorusGrid grid(run.mc.d, resolve_grid_n(run.mc, side), side);
    FieldSample f;
    f.grid = grid;
    f.values.assign(grid.cell_count(), run.debug_constant_value);
    f.kernel_id = "debug_constant_field";
    for (std::size_t i = 0; i < run.mc.n_samples; ++i) {
      const std::uint64_t seed = rng::derive_seed(run.mc.master_seed, i);
      f.seed = seed;
      const ThresholdResult r = threshold_sweep(f, run.event);
      csv += std::to_string(seed) + "," + f.kernel_id + "," + std::to_string(grid.n) + "," +
             fmt_g(side) + "," + event_name(run.event.kind) + "," + fmt_g(r.t_value) + ",nan,nan," +
             std::to_string(r.realizing_class[0]) + "," + std::to_string(r.realizing_class[1]) +
             "\n";
    }
    write_file(dir / "threshold.csv", csv);
    std::printf("wrote %s\n", (dir / "threshold.csv").c_str());
    return 0;
  }

  const TorusGrid grid(run.mc.d, resolve_grid_n(run.mc, side), side);
  const Kernel kernel = make_kernel(run.mc.kernel_spec, grid);
  std::vector<ThresholdResult> results(run.mc.n_samples);
  std::vector<std::uint64_t> seeds(run.mc.n_samples);
  parallel_for(run.mc.n_samples, run.mc.jobs, [&](std::size_t i) {
    seeds[i] = rng::derive_seed(run.mc.master_seed, i);
    const FieldSample f = draw_field(kernel, seeds[i], run.mc.route);
    results[i] = threshold_sweep(f, run.event);
  });
  for (std::size_t i = 0; i < run.mc.n_samples; ++i) {
    const ThresholdResult& r = results[i];
    std::string sx = "nan";
    std::string sy = "nan";
    if (r.saddle_cell[0] >= 0) {
      sx = fmt_g(grid.point(r.saddle_cell[0]));
      sy = fmt_g(grid.point(r.saddle_cell[1]));
    }
    csv += std::to_string(seeds[i]) + "," + kernel.id + "," + std::to_string(grid.n) + "," +
           fmt_g(side) + "," + event_name(run.event.kind) + "," + fmt_g(r.t_value) + "," + sx +
           "," + sy + "," + std::to_string(r.realizing_class[0]) + "," +
           std::to_string(r.realizing_class[1]) + "\n";
  }
  write_file(dir / "threshold.csv", csv);
  std::printf("wrote %s\n", (dir / "threshold.csv").c_str());
  return 0;
}

int cmd_experiment(const std::string& name, const RunConfig& run) {
  if (run.debug_constant_field) {
    throw Error("config-invalid", "the debug constant field only supports the threshold command");
  }
  MCResult res;
  if (name == "variance-scan") {
    res = variance_scan(run.mc);
  } else if (name == "quarter-bound") {
    res = quarter_bound_test(run.mc);
  } else if (name == "tails") {
    std::vector<double> eps = run.eps_list;
    if (eps.empty()) eps = {3.0, 4.0, 6.0};
    res = concentration_tail_test(run.mc, eps);
  } else if (name == "crossing-curve") {
    res = crossing_curve(run.mc);
  } else if (name == "fkg") {
    const double R = run.mc.R;
    const EventSpec a = dagger_event(R, {0.0, 3.0 * R, 0.0}, 0);
    const EventSpec b = dagger_event(R, {5.0 * R, 3.0 * R, 0.0}, 0);
    res = fkg_test(run.mc, a, b);
  } else if (name == "audit") {
    res = implication_audit(run.mc);
  } else if (name == "circuit-scan") {
    res = circuit_scan(run.mc);
  } else {
    throw CLI::ValidationError("experiment",
                               "unknown experiment: " + name +
                                   " (expected variance-scan, quarter-bound, tails, "
                                   "crossing-curve, fkg, audit, circuit-scan)");
  }

  const auto dir = prepare_out_dir(run);
  const std::string ini = echo_ini(run);
  write_file(dir / (res.experiment + ".csv"), res.csv);

  nlohmann::json j = nlohmann::json::parse(mc_result_json(res));
  j["artifact_version"] = kArtifactVersion;
  Digest d;
  d.str(ini);
  j["config_digest"] = hex_digest(d.value());
  j["config"] = ini;
  write_file(dir / "summary.json", j.dump(2) + "\n");

  const std::size_t violations =
      res.loop_to_cross_violations + res.gluing_violations + res.coupling_violations;
  std::printf("wrote %s and summary.json; checks %s\n",
              (res.experiment + ".csv").c_str(), res.all_pass() ? "pass" : "FAIL");
  if (violations > 0) {
    std::fprintf(stderr, "deterministic audit failed: %zu violation(s)\n", violations);
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian field percolation toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  long long seed = -1;
  long long samples = -1;
  long long jobs = -1;
  std::string event_kind;
  std::string experiment_name;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (key = value sections)");
    cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
    cmd->add_option("--seed", seed, "master seed override");
    cmd->add_option("--samples", samples, "sample count override");
    cmd->add_option("--jobs", jobs, "worker thread override");
  };

  CLI::App* validate = app.add_subcommand("validate-kernel", "check kernel admissibility");
  add_common(validate);
  CLI::App* threshold = app.add_subcommand("threshold", "per-sample threshold levels to CSV");
  add_common(threshold);
  threshold->add_option("--event", event_kind, "event kind (loop, cross, cross_dagger, circuit)");
  CLI::App* experiment = app.add_subcommand("experiment", "run a Monte Carlo experiment");
  add_common(experiment);
  experiment->add_option("name", experiment_name, "experiment name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    ConfigFile file;
    if (!config_path.empty()) file = cli::parse_config_file(config_path);
    RunConfig run = resolve_config(file);
    run.out_dir = out_dir;
    if (seed >= 0) run.mc.master_seed = static_cast<std::uint64_t>(seed);
    if (samples >= 0) run.mc.n_samples = static_cast<std::size_t>(samples);
    if (jobs >= 1) run.mc.jobs = static_cast<int>(jobs);
    if (!event_kind.empty()) {
      ConfigFile ev;
      ev.sections["event"]["kind"] = event_kind;
      for (const auto& [k, v] : file.sections["event"]) {
        if (k != "kind") ev.sections["event"][k] = v;
      }
      ConfigFile merged = file;
      merged.sections["event"] = ev.sections["event"];
      RunConfig rerun = resolve_config(merged);
      run.event = rerun.event;
    }

    if (validate->parsed()) return cmd_validate_kernel(run);
    if (threshold->parsed()) return cmd_threshold(run);
    if (experiment->parsed()) return cmd_experiment(experiment_name, run);
  } catch (const torusperc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    const std::string code = e.code();
    return (code == "config-invalid" || code == "io-failure") ? 2 : 1;
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

#include "torusperc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "torusperc/digest.hpp"
#include "torusperc/errors.hpp"
#include "torusperc/fft.hpp"
#include "torusperc/rng.hpp"
#include "torusperc/threshold.hpp"

namespace torusperc {

namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// short form for estimate and check labels; csv numeric fields use fmt_g
std::string fmt_label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

class Timer {
 public:
  explicit Timer(double* out) : out_(out), start_(std::chrono::steady_clock::now()) {}
  ~Timer() {
    *out_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  double* out_;
  std::chrono::steady_clock::time_point start_;
};

void require_samples(const MCConfig& cfg) {
  if (cfg.n_samples < 100) {
    throw Error("config-invalid", "n_samples must be at least 100 for confidence-bearing output");
  }
}

void require_plane(const MCConfig& cfg, const char* op) {
  if (cfg.d != 2) {
    throw Error("unsupported-dimension", std::string(op) + " is defined for d = 2");
  }
}

// Work-stealing over sample indices. Results land in caller-owned per-sample
// slots, so any reduction done afterwards is independent of the job count.
void for_each_sample(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
  int workers = jobs;
  if (workers > static_cast<int>(count)) workers = static_cast<int>(count);
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
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(drain);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Sampler with the kernel transform precomputed, saving one of the three FFTs
// convolve_field spends per draw. The remaining arithmetic is the same, so
// fields match the plain route exactly.
class FieldFactory {
 public:
  FieldFactory(const Kernel& k, SampleRoute route) : kernel_(&k), route_(route) {
    if (route_ == SampleRoute::white_noise) q_hat_ = fft_real(k.grid, k.values);
  }

  FieldSample draw(std::uint64_t seed) const {
    if (route_ != SampleRoute::white_noise) return draw_field(*kernel_, seed, route_);
    WhiteNoiseEps w = draw_white_noise(kernel_->grid, seed);
    std::vector<std::complex<double>> hat = fft_real(kernel_->grid, w.coeffs);
    for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= q_hat_[i];
    FieldSample f;
    f.grid = kernel_->grid;
    f.values = ifft_real(kernel_->grid, hat);
    f.kernel_id = kernel_->id;
    f.seed = seed;
    return f;
  }

  const Kernel& kernel() const { return *kernel_; }

 private:
  const Kernel* kernel_;
  SampleRoute route_;
  std::vector<std::complex<double>> q_hat_;
};

const char* family_name(KernelFamily f) {
  switch (f) {
    case KernelFamily::bargmann_fock: return "bargmann_fock";
    case KernelFamily::oscillatory: return "oscillatory";
    case KernelFamily::truncated_polynomial_decay: return "truncated_polynomial_decay";
    case KernelFamily::constant: return "constant";
    case KernelFamily::custom_table: return "custom_table";
  }
  return "unknown";
}

void append_kv(std::string& out, const char* key, const std::string& value) {
  out += key;
  out += '=';
  out += value;
  out += '\n';
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt_g(v[i]);
  }
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::string event_echo(const EventSpec& e) {
  std::string out = event_name(e.kind);
  out += ',' + fmt_g(e.R);
  out += ',' + fmt_g(e.placement.translation[0]);
  out += ',' + fmt_g(e.placement.translation[1]);
  out += ',' + fmt_g(e.placement.translation[2]);
  out += ',' + std::to_string(e.placement.rotation_quarter);
  out += ',' + fmt_g(e.r1);
  out += ',' + fmt_g(e.r2);
  out += ',' + std::to_string(e.slot_left);
  out += ',' + std::to_string(e.slot_right);
  out += ',' + std::to_string(e.slots_per_side);
  return out;
}

void check_increasing(const std::vector<double>& v, const char* what) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) {
      throw Error("config-invalid", std::string(what) + " must be strictly increasing");
    }
  }
}

void push_estimate(MCResult& res, std::string name, const MeanSe& m) {
  res.estimates.push_back(Estimate{std::move(name), m.value, m.se, m.n});
}

double combined_se(double a, double b) { return std::hypot(a, b); }

}  // namespace

bool MCResult::all_pass() const {
  if (loop_to_cross_violations || gluing_violations || coupling_violations) return false;
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

int resolve_grid_n(const MCConfig& cfg, double side) {
  if (cfg.n > 0) return cfg.n;
  if (!(side > 0.0) || !std::isfinite(side)) {
    throw Error("config-invalid", "torus side must be positive and finite");
  }
  int n = 1;
  while (static_cast<double>(n) < 4.0 * side) n <<= 1;
  return n;
}

std::string mc_config_echo(const MCConfig& cfg) {
  std::string out;
  append_kv(out, "kernel.family", family_name(cfg.kernel_spec.family));
  append_kv(out, "kernel.width", fmt_g(cfg.kernel_spec.width));
  append_kv(out, "kernel.osc_a", fmt_g(cfg.kernel_spec.osc_a));
  append_kv(out, "kernel.beta", fmt_g(cfg.kernel_spec.beta));
  append_kv(out, "kernel.r_cut", fmt_g(cfg.kernel_spec.r_cut));
  append_kv(out, "kernel.constant_value", fmt_g(cfg.kernel_spec.constant_value));
  append_kv(out, "kernel.normalize_sigma", cfg.kernel_spec.normalize_sigma ? "1" : "0");
  if (!cfg.kernel_spec.table.empty()) {
    Digest d;
    d.f64s(cfg.kernel_spec.table);
    append_kv(out, "kernel.table_size", std::to_string(cfg.kernel_spec.table.size()));
    append_kv(out, "kernel.table_digest", hex_digest(d.value()));
  }
  if (cfg.kernel_spec.analytic) append_kv(out, "kernel.analytic", "1");
  append_kv(out, "grid.d", std::to_string(cfg.d));
  append_kv(out, "grid.n", std::to_string(cfg.n));
  append_kv(out, "grid.side_factor", fmt_g(cfg.side_factor));
  append_kv(out, "grid.R", fmt_g(cfg.R));
  std::string events;
  for (std::size_t i = 0; i < cfg.events.size(); ++i) {
    if (i) events += ';';
    events += event_echo(cfg.events[i]);
  }
  append_kv(out, "events", events);
  append_kv(out, "levels", join_doubles(cfg.levels));
  append_kv(out, "samples", std::to_string(cfg.n_samples));
  append_kv(out, "seed", std::to_string(cfg.master_seed));
  append_kv(out, "route",
            cfg.route == SampleRoute::white_noise ? "white_noise" : "spectral_oracle");
  append_kv(out, "jobs", std::to_string(cfg.jobs));
  append_kv(out, "sides", join_doubles(cfg.sides));
  append_kv(out, "R_list", join_doubles(cfg.R_list));
  append_kv(out, "r_list", join_doubles(cfg.r_list));
  append_kv(out, "L_list", join_ints(cfg.L_list));
  append_kv(out, "gluing_L", std::to_string(cfg.gluing_L));
  return out;
}

std::string mc_result_json(const MCResult& r) {
  nlohmann::json j;
  j["experiment"] = r.experiment;
  nlohmann::json estimates = nlohmann::json::array();
  for (const auto& e : r.estimates) {
    estimates.push_back({{"name", e.name}, {"value", e.value}, {"se", e.se}, {"n", e.n}});
  }
  j["estimates"] = estimates;
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"lhs", c.lhs},
                      {"rhs", c.rhs},
                      {"slack", c.slack},
                      {"se", c.se},
                      {"multiplier", c.multiplier},
                      {"pass", c.pass}});
  }
  j["checks"] = checks;
  j["loop_to_cross_violations"] = r.loop_to_cross_violations;
  j["gluing_violations"] = r.gluing_violations;
  j["coupling_violations"] = r.coupling_violations;
  j["artifacts_digest"] = hex_digest(r.artifacts_digest);
  j["all_pass"] = r.all_pass();
  return j.dump();
}

MCResult variance_scan(const MCConfig& cfg) {
  require_samples(cfg);
  if (cfg.sides.empty()) {
    throw Error("config-invalid", "variance_scan needs at least one torus side");
  }
  check_increasing(cfg.sides, "sides");
  if (cfg.n > 0 && cfg.sides.size() > 1) {
    throw Error("config-invalid", "explicit grid n only combines with a single side");
  }
  if (!cfg.kernel_spec.normalize_sigma) {
    throw Error("config-invalid", "variance_scan requires a unit-sigma kernel");
  }

  MCResult res;
  Timer timer(&res.wall_clock_seconds);
  res.experiment = "variance_scan";
  res.config_echo = mc_config_echo(cfg);
  res.csv =
      "# torusperc variance_scan v1\n"
      "side,volume,n,n_samples,mean_t,mean_t_se,var,var_se,alpha_sq,product,product_se\n";

  struct Row {
    double side = 0.0;
    MeanSe var;
    double alpha_sq = 0.0;
    double product = 0.0;
    double product_se = 0.0;
  };
  std::vector<Row> rows;
  Digest digest;
  digest.str("variance_scan");
  const EventSpec loop = loop_event(0);

  for (std::size_t si = 0; si < cfg.sides.size(); ++si) {
    const double side = cfg.sides[si];
    const TorusGrid grid(cfg.d, resolve_grid_n(cfg, side), side);
    const Kernel kernel = make_kernel(cfg.kernel_spec, grid);
    const FieldFactory factory(kernel, cfg.route);

    std::vector<double> t(cfg.n_samples, 0.0);
    for_each_sample(cfg.n_samples, cfg.jobs, [&](std::size_t i) {
      const std::uint64_t seed = rng::derive_seed(cfg.master_seed, si * cfg.n_samples + i);
      t[i] = threshold_sweep(factory.draw(seed), loop).t_value;
    });
    digest.f64(side);
    digest.f64s(t);

    const MeanSe mean = mean_with_se(t);
    const MeanSe var = variance_with_jackknife_se(t);
    Row row;
    row.side = side;
    row.var = var;
    row.alpha_sq = kernel.alpha * kernel.alpha;
    row.product = var.value / row.alpha_sq;
    row.product_se = var.se / row.alpha_sq;
    rows.push_back(row);

    const std::string tag = "[side=" + fmt_label(side) + "]";
    push_estimate(res, "mean_t" + tag, mean);
    push_estimate(res, "var" + tag, var);
    res.estimates.push_back(Estimate{"product" + tag, row.product, row.product_se, var.n});

    res.csv += fmt_g(side) + "," + fmt_g(grid.cell_volume() * grid.cell_count()) + "," +
               std::to_string(grid.n) + "," + std::to_string(cfg.n_samples) + "," +
               fmt_g(mean.value) + "," + fmt_g(mean.se) + "," + fmt_g(var.value) + "," +
               fmt_g(var.se) + "," + fmt_g(row.alpha_sq) + "," + fmt_g(row.product) + "," +
               fmt_g(row.product_se) + "\n";
  }

  for (std::size_t i = 1; i < rows.size(); ++i) {
    const Row& a = rows[i - 1];
    const Row& b = rows[i];
    const std::string span = "[" + fmt_label(a.side) + "->" + fmt_label(b.side) + "]";
    res.checks.push_back(make_bound_check("product_no_growth" + span, b.product, a.product,
                                          combined_se(a.product_se, b.product_se), 3));
    res.checks.push_back(make_bound_check("var_strict_decrease" + span, b.var.value, a.var.value,
                                          combined_se(a.var.se, b.var.se), -3));
  }
  res.artifacts_digest = digest.value();
  return res;
}

MCResult quarter_bound_test(const MCConfig& cfg) {
  require_samples(cfg);
  require_plane(cfg, "quarter_bound_test");

  const double side = cfg.side_factor * cfg.R;
  const TorusGrid grid(cfg.d, resolve_grid_n(cfg, side), side);
  const Kernel kernel = make_kernel(cfg.kernel_spec, grid);
  const ConditionReport report = validate_conditions(kernel);
  if (!report.symmetry.pass) {
    throw Error("kernel-invalid",
                "quarter_bound_test needs a reflection and quarter-rotation symmetric kernel");
  }
  const FieldFactory factory(kernel, cfg.route);

  MCResult res;
  Timer timer(&res.wall_clock_seconds);
  res.experiment = "quarter_bound";
  res.config_echo = mc_config_echo(cfg);

  std::vector<double> t(cfg.n_samples, 0.0);
  const EventSpec loop = loop_event(0);
  for_each_sample(cfg.n_samples, cfg.jobs, [&](std::size_t i) {
    const std::uint64_t seed = rng::derive_seed(cfg.master_seed, i);
    t[i] = threshold_sweep(factory.draw(seed), loop).t_value;
  });

  Digest digest;
  digest.str("quarter_bound");
  digest.f64s(t);
  res.artifacts_digest = digest.value();

  std::size_t n_le = 0;
  std::size_t n_ge = 0;
  for (double v : t) {
    if (v <= 0.0) ++n_le;
    if (v >= 0.0) ++n_ge;
  }
  const MeanSe p_le = binomial_estimate(n_le, cfg.n_samples);
  const MeanSe p_ge = binomial_estimate(n_ge, cfg.n_samples);
  const MeanSe mean = mean_with_se(t);
  const MeanSe var = variance_with_jackknife_se(t);

  push_estimate(res, "p_le_zero", p_le);
  push_estimate(res, "p_ge_zero", p_ge);
  push_estimate(res, "mean_t", mean);
  push_estimate(res, "var", var);

  res.checks.push_back(make_bound_check("quarter_le_zero", 0.25, p_le.value, p_le.se, 3));
  res.checks.push_back(make_bound_check("quarter_ge_zero", 0.25, p_ge.value, p_ge.se, 3));
  const double sum = p_le.value + p_ge.value;
  const double sum_se = combined_se(p_le.se, p_ge.se);
  res.checks.push_back(make_bound_check("complementarity_upper", sum, 1.0, sum_se, 3));
  res.checks.push_back(make_bound_check("complementarity_lower", 1.0, sum, sum_se, 3));

  res.csv =
      "# torusperc quarter_bound v1\n"
      "side,n,n_samples,p_le_zero,p_le_zero_se,p_ge_zero,p_ge_zero_se\n" +
      fmt_g(side) + "," + std::to_string(grid.n) + "," + std::to_string(cfg.n_samples) + "," +
      fmt_g(p_le.value) + "," + fmt_g(p_le.se) + "," + fmt_g(p_ge.value) + "," + fmt_g(p_ge.se) +
      "\n";
  return res;
}

MCResult concentration_tail_test(const MCConfig& cfg, const std::vector<double>& eps_list) {
  require_samples(cfg);
  if (eps_list.empty()) throw Error("config-invalid", "eps_list is empty");
  for (double e : eps_list) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      throw Error("config-invalid", "eps values must be positive and finite");
    }
  }
  check_increasing(eps_list, "eps_list");

  const double side = cfg.side_factor * cfg.R;
  const TorusGrid grid(cfg.d, resolve_grid_n(cfg, side), side);
  const Kernel kernel = make_kernel(cfg.kernel_spec, grid);
  const FieldFactory factory(kernel, cfg.route);

  MCResult res;
  Timer timer(&res.wall_clock_seconds);
  res.experiment = "tails";
  res.config_echo = mc_config_echo(cfg);

  std::vector<double> t(cfg.n_samples, 0.0);
  const EventSpec loop = loop_event(0);
  for_each_sample(cfg.n_samples, cfg.jobs, [&](std::size_t i) {
    const std::uint64_t seed = rng::derive_seed(cfg.master_seed, i);
    t[i] = threshold_sweep(factory.draw(seed), loop).t_value;
  });

  Digest digest;
  digest.str("tails");
  digest.f64s(t);
  res.artifacts_digest = digest.value();

  std::size_t n_le0 = 0;
  for (double v : t) {
    if (v <= 0.0) ++n_le0;
  }
  const MeanSe p_le0 = binomial_estimate(n_le0, cfg.n_samples);
  const MeanSe var = variance_with_jackknife_se(t);
  push_estimate(res, "var", var);
  push_estimate(res, "p_le_zero", p_le0);

  res.csv =
      "# torusperc tails v1\n"
      "eps,level,p_upper,p_upper_se,p_lower,p_lower_se,envelope,var,var_se\n";

  double prev_up = 0.0;
  double prev_lo = 0.0;
  for (std::size_t ei = 0; ei < eps_list.size(); ++ei) {
    const double eps = eps_list[ei];
    const double level = kernel.sigma * eps;
    const ChebyshevBound cb = chebyshev_tail_bound(var.value, p_le0.value, level);
    if (!cb.applicable) {
      throw Error("config-invalid", "eps " + fmt_label(eps) +
                                        " sits below the applicability floor " +
                                        fmt_label(cb.level_floor / kernel.sigma) +
                                        " measured from these samples");
    }
    std::size_t n_up = 0;
    std::size_t n_lo = 0;
    for (double v : t) {
      if (v >= level) ++n_up;
      if (v <= -level) ++n_lo;
    }
    const MeanSe p_up = binomial_estimate(n_up, cfg.n_samples);
    const MeanSe p_lo = binomial_estimate(n_lo, cfg.n_samples);
    const double env_se = 4.0 * var.se / (level * level);
    const std::string tag = "[eps=" + fmt_label(eps) + "]";
    push_estimate(res, "p_upper" + tag, p_up);
    push_estimate(res, "p_lower" + tag, p_lo);
    res.checks.push_back(make_bound_check("upper_tail" + tag, p_up.value, cb.bound,
                                          combined_se(p_up.se, env_se), 3));
    res.checks.push_back(make_bound_check("lower_tail" + tag, p_lo.value, cb.bound,
                                          combined_se(p_lo.se, env_se), 3));
    if (ei > 0) {
      const std::string span =
          "[" + fmt_label(eps_list[ei - 1]) + "->" + fmt_label(eps) + "]";
      res.checks.push_back(
          make_bound_check("upper_tail_nested" + span, p_up.value, prev_up, 0.0, 0));
      res.checks.push_back(
          make_bound_check("lower_tail_nested" + span, p_lo.value, prev_lo, 0.0, 0));
    }
    prev_up = p_up.value;
    prev_lo = p_lo.value;

    res.csv += fmt_g(eps) + "," + fmt_g(level) + "," + fmt_g(p_up.value) + "," + fmt_g(p_up.se) +
               "," + fmt_g(p_lo.value) + "," + fmt_g(p_lo.se) + "," + fmt_g(cb.bound) + "," +
               fmt_g(var.value) + "," + fmt_g(var.se) + "\n";
  }
  return res;
}

MCResult crossing_curve(const MCConfig& cfg) {
  require_samples(cfg);
  require_plane(cfg, "crossing_curve");
  std::vector<double> r_list = cfg.R_list;
  if (r_list.empty()) r_list = {4.0, 8.0, 16.0, 32.0};
  check_increasing(r_list, "R_list");
  if (cfg.n > 0 && r_list.size() > 1) {
    throw Error("config-invalid", "explicit grid n only combines with a single R");
  }
  std::vector<double> levels = cfg.levels;
  if (levels.empty()) levels = {-0.2, 0.0, 0.2};
  check_increasing(levels, "levels");

  MCResult res;
  Timer timer(&res.wall_clock_seconds);
  res.experiment = "crossing_curve";
  res.config_echo = mc_config_echo(cfg);
  res.csv =
      "# torusperc crossing_curve v1\n"
      "R,side,n,level,n_samples,p,p_se\n";

  Digest digest;
  digest.str("crossing_curve");
  std::atomic<std::size_t> coupling_violations{0};
  // p[ri][li]
  std::vector<std::vector<MeanSe>> p(r_list.size(), std::vector<MeanSe>(levels.size()));

  for (std::size_t ri = 0; ri < r_list.size(); ++ri) {
    const double R = r_list[ri];
    const double side = cfg.side_factor * R;
    const TorusGrid grid(cfg.d, resolve_grid_n(cfg, side), side);
    const Kernel kernel = make_kernel(cfg.kernel_spec, grid);
    const FieldFactory factory(kernel, cfg.route);
    const EventSpec cross = cross_event(R);

    std::vector<std::uint64_t> hits(cfg.n_samples, 0);  // level bitmask per sample
    for_each_sample(cfg.n_samples, cfg.jobs, [&](std::size_t i) {
      const std::uint64_t seed = rng::derive_seed(cfg.master_seed, ri * cfg.n_samples + i);
      const FieldSample f = factory.draw(seed);
      std::uint64_t mask = 0;
      bool prev = false;
      for (std::size_t li = 0; li < levels.size(); ++li) {
        const bool hit = evaluate_event(f, levels[li], cross, 4);
        if (prev && !hit) coupling_violations.fetch_add(1, std::memory_order_relaxed);
        if (hit) mask |= std::uint64_t{1} << li;
        prev = hit;
      }
      hits[i] = mask;
    });
    digest.f64(R);
    for (std::uint64_t m : hits) digest.u64(m);

    for (std::size_t li = 0; li < levels.size(); ++li) {
      std::size_t count = 0;
      for (std::uint64_t m : hits) count += (m >> li) & 1u;
      p[ri][li] = binomial_estimate(count, cfg.n_samples);
      const std::string tag =
          "[R=" + fmt_label(R) + ",l=" + fmt_label(levels[li]) + "]";
      push_estimate(res, "cross" + tag, p[ri][li]);
      res.csv += fmt_g(R) + "," + fmt_g(side) + "," + std::to_string(grid.n) + "," +
                 fmt_g(levels[li]) + "," + std::to_string(cfg.n_samples) + "," +
                 fmt_g(p[ri][li].value) + "," + fmt_g(p[ri][li].se) + "\n";
    }
  }

  for (std::size_t li = 0; li < levels.size(); ++li) {
    const double l = levels[li];
    const std::string ltag = "[l=" + fmt_label(l) + "]";
    if (l > 0.0) {
      for (std::size_t ri = 1; ri < r_list.size(); ++ri) {
        const std::string span = "[" + fmt_label(r_list[ri - 1]) + "->" +
                                 fmt_label(r_list[ri]) + ",l=" + fmt_label(l) + "]";
        res.checks.push_back(make_bound_check("cross_increasing" + span, p[ri - 1][li].value,
                                              p[ri][li].value,
                                              combined_se(p[ri - 1][li].se, p[ri][li].se), 3));
      }
      res.checks.push_back(
          make_bound_check("cross_reaches_0.9" + ltag, 0.9, p.back()[li].value, 0.0, 0));
    } else if (l == 0.0) {
      for (std::size_t ri = 0; ri < r_list.size(); ++ri) {
        const std::string tag = "[R=" + fmt_label(r_list[ri]) + ",l=0]";
        res.checks.push_back(make_bound_check("band_low" + tag, 0.05, p[ri][li].value, 0.0, 0));
        res.checks.push_back(make_bound_check("band_high" + tag, p[ri][li].value, 0.95, 0.0, 0));
      }
    } else {
      for (std::size_t ri = 1; ri < r_list.size(); ++ri) {
        const std::string span = "[" + fmt_label(r_list[ri - 1]) + "->" +
                                 fmt_label(r_list[ri]) + ",l=" + fmt_label(l) + "]";
        res.checks.push_back(make_bound_check("cross_decreasing" + span, p[ri][li].value,
                                              p[ri - 1][li].value,
                                              combined_se(p[ri - 1][li].se, p[ri][li].se), 3));
      }
    }
  }
  res.coupling_violations = coupling_violations.load();
  res.artifacts_digest = digest.value();
  return res;
}

MCResult fkg_test(const MCConfig& cfg, const EventSpec& a, const EventSpec& b,
                  bool a_is_increasing, bool b_is_increasing) {
  require_samples(cfg);
  if (!a_is_increasing || !b_is_increasing) {
    throw Error("config-invalid",
                "fkg_test requires increasing events; complemented events are excluded");
  }

  const double side = cfg.side_factor * cfg.R;
  const TorusGrid grid(cfg.d, resolve_grid_n(cfg, side), side);
  const Kernel kernel = make_kernel(cfg.kernel_spec, grid);
  const ConditionReport report = validate_conditions(kernel);
  if (!report.weak_positivity.pass) {
    throw Error("kernel-invalid", "fkg_test needs a weakly positive kernel (kappa >= 0)");
  }
  const FieldFactory factory(kernel, cfg.route);
  const double level = cfg.levels.empty() ? 0.0 : cfg.levels.front();

  MCResult res;
  Timer timer(&res.wall_clock_seconds);
  res.experiment = "fkg";
  res.config_echo = mc_config_echo(cfg);

  std::vector<std::uint8_t> code(cfg.n_samples, 0);  // bit 0: A, bit 1: B
  for_each_sample(cfg.n_samples, cfg.jobs, [&](std::size_t i) {
    const std::uint64_t seed = rng::derive_seed(cfg.master_seed, i);
    const FieldSample f = factory.draw(seed);
    std::uint8_t c = 0;
    if (evaluate_event(f, level, a, 4)) c |= 1;
    if (evaluate_event(f, level, b, 4)) c |= 2;
    code[i] = c;
  });

  Digest digest;
  digest.str("fkg");
  for (std::uint8_t c : code) digest.u64(c);
  res.artifacts_digest = digest.value();

  std::size_t n_a = 0;
  std::size_t n_b = 0;
  std::size_t n_ab = 0;
  for (std::uint8_t c : code) {
    if (c & 1) ++n_a;
    if (c & 2) ++n_b;
    if (c == 3) ++n_ab;
  }
  const MeanSe p_a = binomial_estimate(n_a, cfg.n_samples);
  const MeanSe p_b = binomial_estimate(n_b, cfg.n_samples);
  const MeanSe p_ab = binomial_estimate(n_ab, cfg.n_samples);
  const double cov = p_ab.value - p_a.value * p_b.value;

  // delta method for p_ab - p_a p_b over the sample multinomial: gradient
  // (1, -p_b, -p_a), moment covariances from shared indicators
  const double n = static_cast<double>(cfg.n_samples);
  const double x = p_ab.value;
  const double y = p_a.value;
  const double z = p_b.value;
  const double var_x = x * (1.0 - x) / n;
  const double var_y = y * (1.0 - y) / n;
  const double var_z = z * (1.0 - z) / n;
  const double cov_xy = (x - x * y) / n;
  const double cov_xz = (x - x * z) / n;
  const double cov_yz = (x - y * z) / n;
  const double se_sq = var_x + z * z * var_y + y * y * var_z - 2.0 * z * cov_xy -
                       2.0 * y * cov_xz + 2.0 * y * z * cov_yz;
  const double cov_se = std::sqrt(std::max(se_sq, 0.0));

  push_estimate(res, "p_a", p_a);
  push_estimate(res, "p_b", p_b);
  push_estimate(res, "p_ab", p_ab);
  res.estimates.push_back(Estimate{"cov", cov, cov_se, cfg.n_samples});
  res.checks.push_back(make_bound_check("fkg_nonneg", 0.0, cov, cov_se, 3));

  res.csv =
      "# torusperc fkg v1\n"
      "level,n_samples,p_a,p_a_se,p_b,p_b_se,p_ab,p_ab_se,cov,cov_se\n" +
      fmt_g(level) + "," + std::to_string(cfg.n_samples) + "," + fmt_g(p_a.value) + "," +
      fmt_g(p_a.se) + "," + fmt_g(p_b.value) + "," + fmt_g(p_b.se) + "," + fmt_g(p_ab.value) +
      "," + fmt_g(p_ab.se) + "," + fmt_g(cov) + "," + fmt_g(cov_se) + "\n";
  return res;
}

MCResult implication_audit(const MCConfig& cfg) {
  require_samples(cfg);
  require_plane(cfg, "implication_audit");
  // daggers are 4R tall, so a side of 4R cannot host them; 5 is the smallest
  // integer side factor with room
  if (!(cfg.side_factor >= 5.0)) {
    throw Error("config-invalid", "implication_audit needs side_factor >= 5");
  }
  const double sf_rounded = std::round(cfg.side_factor);
  if (std::fabs(cfg.side_factor - sf_rounded) > 1e-9) {
    throw Error("config-invalid",
                "side_factor must be an integer so dagger placements tile the torus");
  }
  const int sf = static_cast<int>(sf_rounded);
  if (cfg.gluing_L < 2) throw Error("config-invalid", "gluing scale factor must be at least 2");

  // test hook: one forced bogus violation lets packaging tests see the
  // failure path end to end
  const bool fault = std::getenv("TORUSPERC_AUDIT_FAULT") != nullptr;

  MCResult res;
  Timer timer(&res.wall_clock_seconds);
  res.experiment = "audit";
  res.config_echo = mc_config_echo(cfg);

  Digest digest;
  digest.str("audit");

  // part 1: every winding loop must cross one of the 2 sf^2 placed daggers
  const double loop_level = cfg.levels.empty() ? 0.0 : cfg.levels.front();
  std::atomic<std::size_t> loop_violations{0};
  MeanSe p_loop;
  MeanSe p_dagger;
  {
    const double R = cfg.R;
    const double side = cfg.side_factor * R;
    const TorusGrid grid(cfg.d, resolve_grid_n(cfg, side), side);
    const Kernel kernel = make_kernel(cfg.kernel_spec, grid);
    const FieldFactory factory(kernel, cfg.route);

    std::vector<EventSpec> placements;
    placements.reserve(static_cast<std::size_t>(2 * sf * sf));
    for (int rot = 0; rot < 2; ++rot) {
      for (int i = 0; i < sf; ++i) {
        for (int j = 0; j < sf; ++j) {
          placements.push_back(dagger_event(R, {i * R, j * R, 0.0}, rot));
        }
      }
    }
    const EventSpec loop = loop_event(0);

    std::vector<std::uint8_t> loop_hit(cfg.n_samples, 0);
    std::vector<std::uint8_t> dagger_hit(cfg.n_samples, 0);
    for_each_sample(cfg.n_samples, cfg.jobs, [&](std::size_t i) {
      const std::uint64_t seed = rng::derive_seed(cfg.master_seed, i);
      const FieldSample f = factory.draw(seed);
      bool has_loop = evaluate_event(f, loop_level, loop, 4);
      dagger_hit[i] = evaluate_event(f, loop_level, placements[0], 4) ? 1 : 0;
      if (fault && i == 0) {
        has_loop = true;
        loop_violations.fetch_add(1, std::memory_order_relaxed);
      } else if (has_loop) {
        bool found = false;
        for (const EventSpec& e : placements) {
          if (evaluate_event(f, loop_level, e, 4)) {
            found = true;
            break;
          }
        }
        if (!found) loop_violations.fetch_add(1, std::memory_order_relaxed);
      }
      loop_hit[i] = has_loop ? 1 : 0;
    });
    for (std::size_t i = 0; i < cfg.n_samples; ++i) {
      digest.u64(static_cast<std::uint64_t>(loop_hit[i]) | (std::uint64_t{2} * dagger_hit[i]));
    }

    std::size_t n_loop = 0;
    std::size_t n_dagger = 0;
    for (std::size_t i = 0; i < cfg.n_samples; ++i) {
      n_loop += loop_hit[i];
      n_dagger += dagger_hit[i];
    }
    p_loop = binomial_estimate(n_loop, cfg.n_samples);
    p_dagger = binomial_estimate(n_dagger, cfg.n_samples);

    const std::uint64_t n_placements = static_cast<std::uint64_t>(placements.size());
    const double phi = phi_n(p_loop.value, n_placements);
    // slope of p -> 1 - (1-p)^(1/N) for the delta-method SE
    const double dphi = p_loop.value < 1.0
                            ? std::pow(1.0 - p_loop.value,
                                       1.0 / static_cast<double>(n_placements) - 1.0) /
                                  static_cast<double>(n_placements)
                            : 0.0;
    push_estimate(res, "p_loop", p_loop);
    push_estimate(res, "p_dagger", p_dagger);
    res.estimates.push_back(Estimate{"phi_lower_bound", phi, dphi * p_loop.se, cfg.n_samples});
    res.checks.push_back(make_bound_check("dagger_above_phi", phi, p_dagger.value,
                                          combined_se(dphi * p_loop.se, p_dagger.se), 3));
  }
  res.loop_to_cross_violations = loop_violations.load();

  // part 2: slotted daggers meeting at the center slot, glued by a circuit
  // around the meeting point, must yield the long crossing
  const double glue_level = cfg.levels.size() >= 2 ? cfg.levels[1] : 0.3;
  std::atomic<std::size_t> glue_violations{0};
  MeanSe p_co;
  double glue_side = 0.0;
  {
    const double LR = static_cast<double>(cfg.gluing_L) * cfg.R;
    glue_side = 6.0 * LR + 2.0 * cfg.R;
    MCConfig derived = cfg;
    derived.n = 0;  // the gluing stage sizes its own grid
    const TorusGrid grid(cfg.d, resolve_grid_n(derived, glue_side), glue_side);
    const Kernel kernel = make_kernel(cfg.kernel_spec, grid);
    const FieldFactory factory(kernel, cfg.route);
    const double h = grid.spacing();

    EventSpec left = dagger_event(LR, {0.0, 0.0, 0.0}, 0);
    const int slot = left.slots_per_side / 2;  // center slot keeps the annulus inside
    left.slot_left = slot;
    left.slot_right = slot;
    EventSpec right = dagger_event(LR, {3.0 * LR, 0.0, 0.0}, 0);
    right.slot_left = slot;
    right.slot_right = slot;
    const double slot_w = 4.0 * LR / left.slots_per_side;
    const std::array<double, 3> center{3.0 * LR, slot * slot_w, 0.0};
    // inner radius covers the slot window plus cell rounding, so the meeting
    // cells sit strictly inside the hole the circuit winds around
    const double r1 = std::hypot(slot_w, h) + h;
    const EventSpec circ = circuit_event(center, r1, LR);
    const EventSpec big = cross_event(LR);

    std::vector<std::uint8_t> co(cfg.n_samples, 0);
    for_each_sample(cfg.n_samples, cfg.jobs, [&](std::size_t i) {
      const std::uint64_t seed =
          rng::derive_seed(cfg.master_seed, (std::uint64_t{1} << 32) + i);
      const FieldSample f = factory.draw(seed);
      const bool together = evaluate_event(f, glue_level, left, 4) &&
                            evaluate_event(f, glue_level, right, 4) &&
                            evaluate_event(f, glue_level, circ, 4);
      co[i] = together ? 1 : 0;
      if (together && !evaluate_event(f, glue_level, big, 4)) {
        glue_violations.fetch_add(1, std::memory_order_relaxed);
      }
    });
    for (std::uint8_t c : co) digest.u64(c);

    std::size_t n_co = 0;
    for (std::uint8_t c : co) n_co += c;
    p_co = binomial_estimate(n_co, cfg.n_samples);
    push_estimate(res, "p_gluing_cooccur", p_co);
    res.checks.push_back(
        make_bound_check("gluing_cooccurrence_floor", 0.1, p_co.value, p_co.se, 3));
  }
  res.gluing_violations = glue_violations.load();
  res.artifacts_digest = digest.value();

  res.csv =
      "# torusperc audit v1\n"
      "part,level,n_samples,n_conditioned,violations\n"
      "loop_to_cross," +
      fmt_g(loop_level) + "," + std::to_string(cfg.n_samples) + "," +
      fmt_g(p_loop.value * static_cast<double>(cfg.n_samples)) + "," +
      std::to_string(res.loop_to_cross_violations) + "\ngluing," + fmt_g(glue_level) + "," +
      std::to_string(cfg.n_samples) + "," +
      fmt_g(p_co.value * static_cast<double>(cfg.n_samples)) + "," +
      std::to_string(res.gluing_violations) + "\n";
  return res;
}

MCResult circuit_scan(const MCConfig& cfg) {
  require_samples(cfg);
  require_plane(cfg, "circuit_scan");
  std::vector<double> r_list = cfg.r_list;
  if (r_list.empty()) r_list = {1.0};
  check_increasing(r_list, "r_list");
  std::vector<int> L_list = cfg.L_list;
  if (L_list.empty()) L_list = {2, 4, 8};
  for (std::size_t i = 0; i < L_list.size(); ++i) {
    if (L_list[i] < 2) {
      throw Error("config-invalid",
                  "degenerate annulus: scale factor below 2 pinches r1 against r2");
    }
    if (i > 0 && L_list[i] <= L_list[i - 1]) {
      throw Error("config-invalid", "L_list must be strictly increasing");
    }
  }
  for (double r : r_list) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw Error("config-invalid", "annulus radii must be positive and finite");
    }
  }
  std::vector<double> levels = cfg.levels;
  if (levels.empty()) levels = {0.3};
  check_increasing(levels, "levels");

  const double side = cfg.side_factor * cfg.R;
  const double r2_max = static_cast<double>(L_list.back()) * r_list.back();
  if (!(r2_max < 0.5 * side)) {
    throw Error("geometry-out-of-bounds", "outer radius " + fmt_label(r2_max) +
                                              " does not fit inside half the torus side " +
                                              fmt_label(0.5 * side));
  }
  const TorusGrid grid(cfg.d, resolve_grid_n(cfg, side), side);
  const Kernel kernel = make_kernel(cfg.kernel_spec, grid);
  const FieldFactory factory(kernel, cfg.route);

  MCResult res;
  Timer timer(&res.wall_clock_seconds);
  res.experiment = "circuit_scan";
  res.config_echo = mc_config_echo(cfg);
  res.csv =
      "# torusperc circuit_scan v1\n"
      "r,L,r2,level,n_samples,p,p_se\n";

  std::vector<EventSpec> annuli;
  struct Key {
    double r;
    int L;
    double level;
  };
  std::vector<Key> keys;
  for (double r : r_list) {
    for (int L : L_list) {
      for (double level : levels) {
        annuli.push_back(circuit_event({0.0, 0.0, 0.0}, r, static_cast<double>(L) * r));
        keys.push_back(Key{r, L, level});
      }
    }
  }

  std::vector<std::uint64_t> hits(cfg.n_samples, 0);
  for_each_sample(cfg.n_samples, cfg.jobs, [&](std::size_t i) {
    const std::uint64_t seed = rng::derive_seed(cfg.master_seed, i);
    const FieldSample f = factory.draw(seed);
    std::uint64_t mask = 0;
    for (std::size_t k = 0; k < annuli.size(); ++k) {
      if (evaluate_event(f, keys[k].level, annuli[k], 4)) mask |= std::uint64_t{1} << k;
    }
    hits[i] = mask;
  });

  Digest digest;
  digest.str("circuit_scan");
  for (std::uint64_t m : hits) digest.u64(m);
  res.artifacts_digest = digest.value();

  std::vector<MeanSe> p(keys.size());
  for (std::size_t k = 0; k < keys.size(); ++k) {
    std::size_t count = 0;
    for (std::uint64_t m : hits) count += (m >> k) & 1u;
    p[k] = binomial_estimate(count, cfg.n_samples);
    const std::string tag = "[r=" + fmt_label(keys[k].r) + ",L=" + std::to_string(keys[k].L) +
                            ",l=" + fmt_label(keys[k].level) + "]";
    push_estimate(res, "circ" + tag, p[k]);
    res.csv += fmt_g(keys[k].r) + "," + std::to_string(keys[k].L) + "," +
               fmt_g(static_cast<double>(keys[k].L) * keys[k].r) + "," + fmt_g(keys[k].level) +
               "," + std::to_string(cfg.n_samples) + "," + fmt_g(p[k].value) + "," +
               fmt_g(p[k].se) + "\n";
  }

  // nondecreasing in L at fixed (r, level)
  for (std::size_t a = 0; a < keys.size(); ++a) {
    for (std::size_t b = 0; b < keys.size(); ++b) {
      if (keys[a].r == keys[b].r && keys[a].level == keys[b].level) {
        auto it = std::find(L_list.begin(), L_list.end(), keys[a].L);
        if (it + 1 != L_list.end() && *(it + 1) == keys[b].L) {
          const std::string span = "[r=" + fmt_label(keys[a].r) + "," +
                                   std::to_string(keys[a].L) + "->" +
                                   std::to_string(keys[b].L) +
                                   ",l=" + fmt_label(keys[a].level) + "]";
          res.checks.push_back(make_bound_check("circ_increasing" + span, p[a].value, p[b].value,
                                                combined_se(p[a].se, p[b].se), 3));
        }
      }
    }
  }
  return res;
}

double phi_n(double p, std::uint64_t n_events) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error("config-invalid", "probability outside [0,1]");
  }
  if (n_events < 1) throw Error("config-invalid", "event count must be at least 1");
  if (p >= 1.0) return 1.0;
  // 1 - (1-p)^(1/N), via log1p/expm1 so small p does not cancel
  return -std::expm1(std::log1p(-p) / static_cast<double>(n_events));
}

double psi_l(double p, std::uint64_t l_factor) {
  if (l_factor < 1) throw Error("config-invalid", "scale factor must be at least 1");
  return phi_n(p, 16 * l_factor * l_factor);
}

}  // namespace torusperc

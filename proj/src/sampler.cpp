#include "crbmgen/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace crbmgen {

namespace {

constexpr double kTemperatureFloor = 1e-6;
constexpr double kStdFloor = 1e-9;
constexpr std::uint64_t kCalibrationStream = ~std::uint64_t{0};

struct Scores {
  double fe = 0.0;
  double cost = 0.0;
  double std_fe = 0.0;
  double std_cost = 0.0;
  double combined() const { return 0.5 * (std_fe + std_cost); }
};

Scores score(const PianoRoll& v, const CrbmParams& model, const StructureTemplate& tmpl, const Standardizer& s) {
  Scores out;
  out.fe = free_energy(v, model);
  out.cost = total_cost(tmpl, v.data()).total;
  out.std_fe = s.free_energy(out.fe);
  out.std_cost = s.cost(out.cost);
  return out;
}

void check_inputs(const CrbmParams& model, const StructureTemplate& tmpl) {
  if (model.pitch_count() != tmpl.pitch_count) {
    throw DimensionError("model has " + std::to_string(model.pitch_count()) + " pitches, template has " +
                         std::to_string(tmpl.pitch_count));
  }
  model.hidden_length(tmpl.t_steps);
}

}  // namespace

void SamplerConfig::validate() const {
  if (outer_iters < 1) throw ConfigError("outer_iters must be at least 1");
  if (inner_iters < 0 || gd_phase_steps < 0 || gs_block_steps < 0 || warmup_iters < 0) {
    throw ConfigError("sampler step counts must be >= 0");
  }
  if (!std::isfinite(gd_phase_lr) || !std::isfinite(interleaved_gd_lr)) {
    throw ConfigError("sampler learning rates must be finite");
  }
}

Standardizer Standardizer::fit(const std::vector<double>& free_energies, const std::vector<double>& costs) {
  auto moments = [](const std::vector<double>& xs, double& mean, double& sd) {
    if (xs.empty()) throw Error("standardizer needs at least one observation");
    mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    sd = std::max(std::sqrt(var / static_cast<double>(xs.size())), kStdFloor);
  };
  Standardizer s;
  moments(free_energies, s.fe_mean, s.fe_std);
  moments(costs, s.cost_mean, s.cost_std);
  s.calibrated = true;
  return s;
}

double temperature(int iteration, int total) {
  return std::max(1.0 - static_cast<double>(iteration) / static_cast<double>(total), kTemperatureFloor);
}

double sa_keep_probability(double f_new, double f_old, double temp) {
  const double exponent = -(f_new - f_old) / temp;
  if (exponent >= 0.0) return 1.0;
  return std::exp(exponent);
}

bool sa_accept(double fe_new, double fe_old, double cost_new, double cost_old, double temp, Rng& rng) {
  const double r_e = rng.uniform();
  const double r_c = rng.uniform();
  return r_e < sa_keep_probability(fe_new, fe_old, temp) && r_c < sa_keep_probability(cost_new, cost_old, temp);
}

PianoRoll uniform_noise(int t_steps, int pitch_count, int pitch_base, Rng& rng) {
  Matrix m(t_steps, pitch_count);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform();
  return PianoRoll(std::move(m), pitch_base);
}

PianoRoll run_schedule_iteration(const PianoRoll& v, const CrbmParams& model, const StructureTemplate& tmpl,
                                 const SamplerConfig& cfg, Rng& rng) {
  PianoRoll current = v;
  for (int s = 0; s < cfg.gd_phase_steps; ++s) current = gd_step(current, tmpl, cfg.gd_phase_lr);
  for (int block = 0; block < cfg.inner_iters; ++block) {
    for (int s = 0; s < cfg.gs_block_steps; ++s) current = gibbs_step(current, model, rng);
    current = gd_step(current, tmpl, cfg.interleaved_gd_lr);
  }
  return current;
}

Standardizer calibrate_standardizer(const CrbmParams& model, const StructureTemplate& tmpl,
                                    const SamplerConfig& cfg, int pitch_base, Rng& rng) {
  cfg.validate();
  check_inputs(model, tmpl);
  PianoRoll v = uniform_noise(tmpl.t_steps, tmpl.pitch_count, pitch_base, rng);
  std::vector<double> fes;
  std::vector<double> costs;
  auto observe = [&](const PianoRoll& roll) {
    fes.push_back(free_energy(roll, model));
    costs.push_back(total_cost(tmpl, roll.data()).total);
  };
  if (cfg.warmup_iters == 0) observe(v);
  for (int i = 0; i < cfg.warmup_iters; ++i) {
    v = run_schedule_iteration(v, model, tmpl, cfg, rng);
    observe(v);
  }
  return Standardizer::fit(fes, costs);
}

SampleResult constrained_sample(const CrbmParams& model, const StructureTemplate& tmpl, const SamplerConfig& cfg,
                                const Standardizer& standardizer, int pitch_base) {
  cfg.validate();
  check_inputs(model, tmpl);
  if (!standardizer.calibrated) throw Error("constrained sampling needs a calibrated standardizer");

  Rng rng(cfg.rng_seed);
  PianoRoll v = uniform_noise(tmpl.t_steps, tmpl.pitch_count, pitch_base, rng);
  Scores current = score(v, model, tmpl, standardizer);

  SampleResult result{v, current.combined(), {}};
  result.trace.reserve(static_cast<std::size_t>(cfg.outer_iters) + 1);
  result.trace.push_back({0, current.fe, current.cost, current.std_fe, current.std_cost, true, result.best_score});

  for (int i = 1; i <= cfg.outer_iters; ++i) {
    PianoRoll candidate = run_schedule_iteration(v, model, tmpl, cfg, rng);
    const Scores next = score(candidate, model, tmpl, standardizer);
    const bool keep = sa_accept(next.std_fe, current.std_fe, next.std_cost, current.std_cost,
                                temperature(i, cfg.outer_iters), rng);
    if (keep) {
      v = std::move(candidate);
      current = next;
    }
    if (current.combined() < result.best_score) {
      result.best = v;
      result.best_score = current.combined();
    }
    result.trace.push_back(
        {i, current.fe, current.cost, current.std_fe, current.std_cost, keep, result.best_score});
  }
  return result;
}

SampleResult constrained_sample(const CrbmParams& model, const StructureTemplate& tmpl, const SamplerConfig& cfg,
                                int pitch_base) {
  Rng calibration = Rng(cfg.rng_seed).split(kCalibrationStream);
  const Standardizer s = calibrate_standardizer(model, tmpl, cfg, pitch_base, calibration);
  return constrained_sample(model, tmpl, cfg, s, pitch_base);
}

BatchResult batch_sample(const CrbmParams& model, const StructureTemplate& tmpl, const SamplerConfig& cfg,
                         int n_solutions, int select_k, int pitch_base, int threads) {
  if (n_solutions < 1) throw ConfigError("n_solutions must be at least 1");
  if (select_k < 1 || select_k > n_solutions) throw ConfigError("select must lie in [1, n_solutions]");
  cfg.validate();
  check_inputs(model, tmpl);

  const Rng root(cfg.rng_seed);
  Rng calibration = root.split(kCalibrationStream);
  BatchResult batch;
  batch.standardizer = calibrate_standardizer(model, tmpl, cfg, pitch_base, calibration);
  batch.chains.resize(static_cast<std::size_t>(n_solutions));

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int c = next++; c < n_solutions; c = next++) {
      try {
        SamplerConfig chain_cfg = cfg;
        chain_cfg.rng_seed = root.split(static_cast<std::uint64_t>(c)).seed();
        batch.chains[static_cast<std::size_t>(c)] = {
            c, chain_cfg.rng_seed, constrained_sample(model, tmpl, chain_cfg, batch.standardizer, pitch_base)};
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int workers = std::clamp(threads, 1, n_solutions);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  batch.selected = batch.chains;
  std::stable_sort(batch.selected.begin(), batch.selected.end(), [](const BatchSample& a, const BatchSample& b) {
    return a.result.best_score < b.result.best_score;
  });
  batch.selected.resize(static_cast<std::size_t>(select_k));
  return batch;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::string out = "iter,free_energy,cost,std_free_energy,std_cost,accepted,best_score\n";
  char line[256];
  for (const TraceRow& row : trace) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g,%.17g,%d,%.17g\n", row.iter, row.free_energy, row.cost,
                  row.std_free_energy, row.std_cost, row.accepted ? 1 : 0, row.best_score);
    out += line;
  }
  return out;
}

}  // namespace crbmgen

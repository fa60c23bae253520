#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crbmgen/constraints.hpp"
#include "crbmgen/crbm.hpp"
#include "crbmgen/pianoroll.hpp"
#include "crbmgen/rng.hpp"

namespace crbmgen {

struct SamplerConfig {
  int outer_iters = 250;
  int inner_iters = 15;
  int gd_phase_steps = 20;
  double gd_phase_lr = 10.0;
  int gs_block_steps = 100;
  double interleaved_gd_lr = 5.0;
  /// Outer iterations observed (without annealing) to calibrate the standardizer.
  int warmup_iters = 30;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Scales free energy and cost to roughly zero mean, unit variance.
struct Standardizer {
  double fe_mean = 0.0;
  double fe_std = 1.0;
  double cost_mean = 0.0;
  double cost_std = 1.0;
  bool calibrated = false;

  double free_energy(double f) const { return (f - fe_mean) / fe_std; }
  double cost(double c) const { return (c - cost_mean) / cost_std; }

  /// Mean and population standard deviation of the observations; standard
  /// deviations are floored at 1e-9.
  static Standardizer fit(const std::vector<double>& free_energies, const std::vector<double>& costs);
};

/// Annealing temperature 1 - i/N, floored at 1e-6.
double temperature(int iteration, int total);

/// exp(-(f_new - f_old) / temp), capped at 1.
double sa_keep_probability(double f_new, double f_old, double temp);

/// Draws r_e then r_c uniformly from [0,1); keeps the candidate iff both fall
/// below their keep probabilities.
bool sa_accept(double fe_new, double fe_old, double cost_new, double cost_old, double temp, Rng& rng);

struct TraceRow {
  int iter = 0;
  double free_energy = 0.0;
  double cost = 0.0;
  double std_free_energy = 0.0;
  double std_cost = 0.0;
  bool accepted = true;
  double best_score = 0.0;
};

/// One outer iteration of the schedule: the GD phase, then inner_iters blocks
/// of Gibbs steps each followed by one GD step.
PianoRoll run_schedule_iteration(const PianoRoll& v, const CrbmParams& model, const StructureTemplate& tmpl,
                                 const SamplerConfig& cfg, Rng& rng);

/// Uniform [0,1) noise of the template's shape.
PianoRoll uniform_noise(int t_steps, int pitch_count, int pitch_base, Rng& rng);

/// Runs `cfg.warmup_iters` outer iterations from noise, keeping every
/// candidate, and fits the standardizer to the observed F and phi.
Standardizer calibrate_standardizer(const CrbmParams& model, const StructureTemplate& tmpl,
                                    const SamplerConfig& cfg, int pitch_base, Rng& rng);

struct SampleResult {
  PianoRoll best;
  double best_score = 0.0;
  /// Row 0 is the initial noise; row i the state after outer iteration i.
  std::vector<TraceRow> trace;
};

/// Constrained sampling from noise, seeded by `cfg.rng_seed`. Returns the
/// state with the lowest (F' + phi') / 2 seen over the run.
SampleResult constrained_sample(const CrbmParams& model, const StructureTemplate& tmpl, const SamplerConfig& cfg,
                                const Standardizer& standardizer, int pitch_base = kDefaultPitchBase);

/// Calibrates a standardizer from a stream split off `cfg.rng_seed`, then samples.
SampleResult constrained_sample(const CrbmParams& model, const StructureTemplate& tmpl, const SamplerConfig& cfg,
                                int pitch_base = kDefaultPitchBase);

struct BatchSample {
  int chain = 0;
  std::uint64_t seed = 0;
  SampleResult result;
};

struct BatchResult {
  Standardizer standardizer;
  std::vector<BatchSample> chains;    ///< every chain, in chain order
  std::vector<BatchSample> selected;  ///< best `select_k`, ascending by score
};

/// Independent chains with seeds derived from `cfg.rng_seed` and the chain
/// index, sharing one standardizer. `threads` caps concurrent chains.
BatchResult batch_sample(const CrbmParams& model, const StructureTemplate& tmpl, const SamplerConfig& cfg,
                         int n_solutions, int select_k, int pitch_base = kDefaultPitchBase, int threads = 1);

std::string trace_csv(const std::vector<TraceRow>& trace);

}  // namespace crbmgen

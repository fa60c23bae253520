#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "crbmgen/crbm.hpp"
#include "crbmgen/pianoroll.hpp"
#include "crbmgen/rng.hpp"

namespace crbmgen {

struct CrbmArchitecture {
  int filters = 2048;
  int filter_width = 17;
  int stride = 4;
};

struct TrainConfig {
  double learning_rate = 15e-4;
  int particles = 10;
  double l1 = 8e-4;
  double l2 = 1e-2;
  /// Per-filter Euclidean norm cap; <= 0 disables it.
  double max_norm = 4.0;
  double sparsity_target = 0.05;
  double sparsity_strength = 0.1;
  double reset_threshold = 0.85;
  /// Rolls used for the per-epoch dead-unit check and the epoch log.
  int reset_sample = 64;
  int epochs = 100;
  int batch_size = 1;
  /// Length of one training instance; pieces are cut into chunks of this
  /// many steps (the last chunk zero-padded). 0 keeps whole pieces, which
  /// must then share one length.
  int instance_steps = kDefaultSteps;
  double init_std = 0.01;
  std::uint64_t rng_seed = 0;

  /// Throws ConfigError on negative strengths or out-of-range values.
  void validate() const;
};

/// Data-vs-model correlations for one phase, averaged over the rolls and
/// summed over hidden positions.
struct PhaseStatistics {
  Matrix weights;          ///< K x (R*P): sum_j h(k,j) * window_j(v)
  Vector visible;          ///< P: sum_t v_t
  Vector hidden;           ///< K: sum_j h(k,j)
  Vector mean_activation;  ///< K: mean of h(k,·) over positions and rolls
};

PhaseStatistics phase_statistics(std::span<const PianoRoll> rolls, const CrbmParams& params);

struct PcdState {
  std::vector<PianoRoll> fantasy;
  Rng rng{0};
};

/// Particles drawn uniformly from [0,1].
PcdState init_pcd_state(const CrbmParams& params, int particles, int t_steps, int pitch_base, Rng rng);

/// Gradient step from the two phases, sparsity pull on the hidden biases,
/// then weight regularizers in the order L2 decay, L1 shrinkage, max-norm.
CrbmParams apply_update(const CrbmParams& params, const PhaseStatistics& positive,
                        const PhaseStatistics& negative, const TrainConfig& cfg);

/// One PCD update: positive phase on `batch`, each fantasy particle
/// advanced by one Gibbs step for the negative phase.
CrbmParams pcd_update(const CrbmParams& params, std::span<const PianoRoll> batch, PcdState& state,
                      const TrainConfig& cfg);

CrbmParams max_norm_rescale(CrbmParams params, double max_norm);

/// strength * (q_k - target); subtracted (times the learning rate) from the
/// hidden bias update.
Vector sparsity_penalty_grad(const Vector& mean_activation, double target, double strength);

struct ResetResult {
  CrbmParams params;
  std::vector<int> reset_units;
};

/// Re-draws the filter and zeroes the bias of every unit whose mean
/// activation over `data_sample` exceeds `threshold`.
ResetResult dead_unit_reset(const CrbmParams& params, std::span<const PianoRoll> data_sample, double threshold,
                            double init_std, Rng& rng);

/// Chunks of `instance_steps` (zero-padded at the end); see TrainConfig.
std::vector<PianoRoll> make_training_instances(const Corpus& corpus, int instance_steps);

struct TrainLogRow {
  int epoch = 0;
  double mean_free_energy = 0.0;
  double mean_hidden_activation = 0.0;
  int reset_units = 0;
};

struct TrainResult {
  CrbmParams params;
  std::vector<TrainLogRow> log;
};

TrainResult train_crbm(const Corpus& corpus, const CrbmArchitecture& arch, const TrainConfig& cfg,
                       const std::function<void(const TrainLogRow&)>& on_epoch = {});

}  // namespace crbmgen

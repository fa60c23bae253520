#include "crbmgen/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace crbmgen {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (particles < 1) throw ConfigError("particles must be at least 1");
  if (l1 < 0.0 || l2 < 0.0 || sparsity_strength < 0.0) throw ConfigError("regularizer strengths must be >= 0");
  if (!(sparsity_target >= 0.0 && sparsity_target <= 1.0)) throw ConfigError("sparsity_target must lie in [0,1]");
  if (!(reset_threshold > 0.0 && reset_threshold < 1.0)) throw ConfigError("reset_threshold must lie in (0,1)");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (reset_sample < 1) throw ConfigError("reset_sample must be at least 1");
  if (instance_steps < 0) throw ConfigError("instance_steps must be >= 0");
  if (init_std < 0.0) throw ConfigError("init_std must be >= 0");
}

PhaseStatistics phase_statistics(std::span<const PianoRoll> rolls, const CrbmParams& params) {
  if (rolls.empty()) throw DimensionError("phase statistics need at least one roll");
  PhaseStatistics stats{Matrix::Zero(params.filters(), params.weights.cols()),
                        Vector::Zero(params.pitch_count()), Vector::Zero(params.filters()),
                        Vector::Zero(params.filters())};
  for (const PianoRoll& v : rolls) {
    const Matrix h = hidden_probs(v, params).values;
    stats.weights.noalias() += h * input_windows(v, params);
    stats.visible += v.data().colwise().sum().transpose();
    stats.hidden += h.rowwise().sum();
    stats.mean_activation += h.rowwise().mean();
  }
  const double n = static_cast<double>(rolls.size());
  stats.weights /= n;
  stats.visible /= n;
  stats.hidden /= n;
  stats.mean_activation /= n;
  return stats;
}

PcdState init_pcd_state(const CrbmParams& params, int particles, int t_steps, int pitch_base, Rng rng) {
  params.hidden_length(t_steps);
  PcdState state{{}, rng};
  state.fantasy.reserve(static_cast<std::size_t>(particles));
  for (int i = 0; i < particles; ++i) {
    Matrix m(t_steps, params.pitch_count());
    for (Eigen::Index c = 0; c < m.size(); ++c) m.data()[c] = state.rng.uniform();
    state.fantasy.emplace_back(std::move(m), pitch_base);
  }
  return state;
}

Vector sparsity_penalty_grad(const Vector& mean_activation, double target, double strength) {
  return strength * (mean_activation.array() - target).matrix();
}

CrbmParams max_norm_rescale(CrbmParams params, double max_norm) {
  if (max_norm <= 0.0) return params;
  for (int k = 0; k < params.filters(); ++k) {
    const double norm = params.weights.row(k).norm();
    if (norm > max_norm) params.weights.row(k) *= max_norm / norm;
  }
  return params;
}

CrbmParams apply_update(const CrbmParams& params, const PhaseStatistics& positive,
                        const PhaseStatistics& negative, const TrainConfig& cfg) {
  const double lr = cfg.learning_rate;
  CrbmParams next = params;
  next.weights += lr * (positive.weights - negative.weights);
  next.visible_bias += lr * (positive.visible - negative.visible);
  next.hidden_bias += lr * (positive.hidden - negative.hidden);
  next.hidden_bias -=
      lr * sparsity_penalty_grad(positive.mean_activation, cfg.sparsity_target, cfg.sparsity_strength);

  next.weights *= 1.0 - lr * cfg.l2;
  const double shrink = lr * cfg.l1;
  if (shrink > 0.0) {
    next.weights = next.weights.unaryExpr([shrink](double w) {
      return w > shrink ? w - shrink : (w < -shrink ? w + shrink : 0.0);
    });
  }
  return max_norm_rescale(std::move(next), cfg.max_norm);
}

CrbmParams pcd_update(const CrbmParams& params, std::span<const PianoRoll> batch, PcdState& state,
                      const TrainConfig& cfg) {
  if (batch.empty()) throw DimensionError("PCD update needs a nonempty batch");
  if (state.fantasy.empty()) throw DimensionError("PCD state has no fantasy particles");
  for (const PianoRoll& v : batch) params.check_roll(v);

  const PhaseStatistics positive = phase_statistics(batch, params);
  for (PianoRoll& particle : state.fantasy) particle = gibbs_step(particle, params, state.rng);
  const PhaseStatistics negative = phase_statistics(state.fantasy, params);
  return apply_update(params, positive, negative, cfg);
}

ResetResult dead_unit_reset(const CrbmParams& params, std::span<const PianoRoll> data_sample, double threshold,
                            double init_std, Rng& rng) {
  ResetResult result{params, {}};
  if (data_sample.empty()) return result;
  Vector mean = Vector::Zero(params.filters());
  for (const PianoRoll& v : data_sample) mean += hidden_probs(v, params).values.rowwise().mean();
  mean /= static_cast<double>(data_sample.size());
  for (int k = 0; k < params.filters(); ++k) {
    if (mean(k) <= threshold) continue;
    for (Eigen::Index c = 0; c < result.params.weights.cols(); ++c) {
      result.params.weights(k, c) = init_std * rng.normal();
    }
    result.params.hidden_bias(k) = 0.0;
    result.reset_units.push_back(k);
  }
  return result;
}

std::vector<PianoRoll> make_training_instances(const Corpus& corpus, int instance_steps) {
  std::vector<PianoRoll> out;
  if (instance_steps <= 0) {
    for (const PianoRoll& piece : corpus.pieces) {
      if (piece.t_steps() != corpus.pieces.front().t_steps()) {
        throw DimensionError("whole-piece training needs pieces of equal length");
      }
      out.push_back(piece);
    }
    return out;
  }
  for (const PianoRoll& piece : corpus.pieces) {
    for (int begin = 0; begin < piece.t_steps(); begin += instance_steps) {
      PianoRoll chunk(instance_steps, piece.pitch_count(), piece.pitch_base());
      const int rows = std::min(instance_steps, piece.t_steps() - begin);
      chunk.mutable_data().topRows(rows) = piece.data().middleRows(begin, rows);
      out.push_back(std::move(chunk));
    }
  }
  return out;
}

TrainResult train_crbm(const Corpus& corpus, const CrbmArchitecture& arch, const TrainConfig& cfg,
                       const std::function<void(const TrainLogRow&)>& on_epoch) {
  cfg.validate();
  if (corpus.pieces.empty()) throw DimensionError("cannot train on an empty corpus");
  corpus.validate();

  const std::vector<PianoRoll> instances = make_training_instances(corpus, cfg.instance_steps);
  const int t_steps = instances.front().t_steps();
  const int pitch_base = instances.front().pitch_base();

  Rng rng(cfg.rng_seed);
  Rng init_rng = rng.split(0);
  TrainResult result{init_params(arch.filters, arch.filter_width, corpus.pieces.front().pitch_count(),
                                 arch.stride, cfg.init_std, init_rng),
                     {}};
  result.params.check_roll(instances.front());
  PcdState state = init_pcd_state(result.params, cfg.particles, t_steps, pitch_base, rng.split(1));
  Rng order_rng = rng.split(2);
  Rng reset_rng = rng.split(3);

  std::vector<std::size_t> order(instances.size());
  std::iota(order.begin(), order.end(), 0);

  // fixed subsample for dead-unit checks and epoch logging
  std::vector<std::size_t> monitor_index = order;
  for (std::size_t i = monitor_index.size(); i > 1; --i) {
    std::swap(monitor_index[i - 1], monitor_index[order_rng.below(i)]);
  }
  monitor_index.resize(std::min<std::size_t>(monitor_index.size(), static_cast<std::size_t>(cfg.reset_sample)));
  std::vector<PianoRoll> monitor;
  for (std::size_t i : monitor_index) monitor.push_back(instances[i]);

  std::vector<PianoRoll> batch;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng.below(i)]);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      batch.clear();
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      for (std::size_t i = start; i < stop; ++i) batch.push_back(instances[order[i]]);
      result.params = pcd_update(result.params, batch, state, cfg);
    }

    ResetResult reset = dead_unit_reset(result.params, monitor, cfg.reset_threshold, cfg.init_std, reset_rng);
    result.params = std::move(reset.params);

    TrainLogRow row{epoch, 0.0, 0.0, static_cast<int>(reset.reset_units.size())};
    for (const PianoRoll& v : monitor) {
      row.mean_free_energy += free_energy(v, result.params);
      row.mean_hidden_activation += hidden_probs(v, result.params).values.mean();
    }
    row.mean_free_energy /= static_cast<double>(monitor.size());
    row.mean_hidden_activation /= static_cast<double>(monitor.size());
    result.log.push_back(row);
    if (on_epoch) on_epoch(row);
  }
  return result;
}

}  // namespace crbmgen

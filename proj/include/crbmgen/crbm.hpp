#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "crbmgen/pianoroll.hpp"
#include "crbmgen/rng.hpp"
#include "crbmgen/types.hpp"

namespace crbmgen {

/// Convolutional RBM over piano rolls. K filters of shape R x P slide over
/// time only, with stride d. The time axis is zero-padded by ceil(R/2) steps
/// before and floor(R/2) after, so hidden unit (k, j) sees input steps
/// j*d - ceil(R/2) .. j*d - ceil(R/2) + R - 1 and there are T/d hidden
/// positions per filter.
class CrbmParams {
 public:
  CrbmParams() = default;
  /// Zero-initialized parameters.
  CrbmParams(int filters, int filter_width, int pitch_count, int stride);

  int filters() const { return static_cast<int>(weights.rows()); }
  int filter_width() const { return filter_width_; }
  int pitch_count() const { return pitch_count_; }
  int stride() const { return stride_; }
  int pad_before() const { return (filter_width_ + 1) / 2; }
  int pad_after() const { return filter_width_ / 2; }

  /// Hidden positions for a roll of `t_steps`; throws DimensionError unless
  /// the stride divides it.
  int hidden_length(int t_steps) const;

  /// Filter k as an R x P row-major view.
  Eigen::Map<Matrix> filter(int k) {
    return {weights.row(k).data(), filter_width_, pitch_count_};
  }
  Eigen::Map<const Matrix> filter(int k) const {
    return {weights.row(k).data(), filter_width_, pitch_count_};
  }

  /// Throws DimensionError when `roll` cannot be fed to this model.
  void check_roll(const PianoRoll& roll) const;

  /// K x (R*P); row k is filter k flattened time-major.
  Matrix weights;
  Vector visible_bias;  ///< length P
  Vector hidden_bias;   ///< length K

  friend bool operator==(const CrbmParams& a, const CrbmParams& b) {
    return a.filter_width_ == b.filter_width_ && a.pitch_count_ == b.pitch_count_ &&
           a.stride_ == b.stride_ && a.weights.rows() == b.weights.rows() && a.weights == b.weights &&
           a.visible_bias == b.visible_bias && a.hidden_bias == b.hidden_bias;
  }

 private:
  int filter_width_ = 0;
  int pitch_count_ = 0;
  int stride_ = 1;
};

/// Gaussian filters with standard deviation `init_std`, zero biases.
CrbmParams init_params(int filters, int filter_width, int pitch_count, int stride, double init_std, Rng& rng);

struct HiddenState {
  Matrix values;  ///< K x (T/d)
  bool is_binary = false;
};

double sigmoid(double x);
/// log(1 + e^x) without overflow.
double softplus(double x);

/// Pre-activations b_k + sum_{r,p} W^k[r,p] * v_pad[j*d + r, p], shape K x (T/d).
Matrix hidden_pre(const Matrix& v, const CrbmParams& params);
Matrix hidden_pre(const PianoRoll& v, const CrbmParams& params);
/// (T/d) x (R*P); row j is the zero-padded input window seen by hidden position j.
Matrix input_windows(const PianoRoll& v, const CrbmParams& params);
HiddenState hidden_probs(const PianoRoll& v, const CrbmParams& params);

/// Transpose of v -> hidden_pre(v) - b, plus the visible bias on every step.
Matrix visible_pre(const Matrix& h, const CrbmParams& params, int t_steps);
PianoRoll visible_probs(const HiddenState& h, const CrbmParams& params, int t_steps, int pitch_base);

double free_energy(const PianoRoll& v, const CrbmParams& params);

/// One block Gibbs step: binary hidden sample, then visible probabilities.
PianoRoll gibbs_step(const PianoRoll& v, const CrbmParams& params, Rng& rng);

struct ChainResult {
  PianoRoll roll;
  std::vector<double> free_energy_trace;  ///< F before the first step and after every step
};

ChainResult gibbs_chain(const PianoRoll& v0, const CrbmParams& params, int steps, Rng& rng);

/// CRBM1 files: "CRBM1", u32 K, u32 R, u32 P, u32 d, then K*R*P filter
/// values, P visible biases and K hidden biases, all float32 little-endian.
std::vector<std::uint8_t> encode_params(const CrbmParams& params);
CrbmParams decode_params(const std::vector<std::uint8_t>& bytes);
void save_params(const std::filesystem::path& path, const CrbmParams& params);
CrbmParams load_params(const std::filesystem::path& path);

}  // namespace crbmgen

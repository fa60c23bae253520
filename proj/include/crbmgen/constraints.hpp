#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "crbmgen/pianoroll.hpp"
#include "crbmgen/types.hpp"

namespace crbmgen {

/// Temperley's key profiles, indexed by scale degree.
struct KeyProfiles {
  static constexpr std::array<double, 12> major = {5, 2, 3.5, 2, 4.5, 4, 2, 4.5, 2, 3.5, 1.5, 4};
  static constexpr std::array<double, 12> minor = {5, 2, 3.5, 4.5, 2, 4, 2, 4.5, 3.5, 2, 1.5, 4};
};

inline constexpr int kKeyVectorSize = 24;  ///< 12 major shifts then 12 minor shifts

struct ConstraintWeights {
  double selfsim = 1.5;
  double tonal = 5.0;
  double meter = 0.5;
};

struct TemplateConfig {
  int lambda = 8;      ///< self-similarity tile width
  int key_window = 4;  ///< tonality window M
  int bar_len = 16;    ///< steps per bar
  int octaves = 0;     ///< 0 = ceil(P / 12)
  ConstraintWeights weights;
};

/// Value and gradient of one cost with respect to the roll.
struct CostGrad {
  double value = 0.0;
  Matrix grad;
};

struct CostBreakdown {
  double total = 0.0;
  double selfsim = 0.0;
  double tonal = 0.0;
  double meter = 0.0;
};

/// Octave count used for a pitch range: `octaves` if positive, else ceil(P/12).
int resolve_octaves(int pitch_count, int octaves);

// --- self-similarity -------------------------------------------------------

/// s(z)[i, j] = sum_{l < lambda, p} z[j*lambda + l, p] * z[i + l, p] with z
/// zero beyond its last step. Shape T x (T / lambda).
Matrix self_similarity(const Matrix& z, int lambda);

/// Mean squared difference between `target` and s(v^2), with its gradient.
CostGrad selfsim_cost_grad_target(const Matrix& target, const Matrix& v, int lambda);
/// Same, with target s(x^2).
CostGrad selfsim_cost_grad(const Matrix& x, const Matrix& v, int lambda);

// --- tonality --------------------------------------------------------------

/// Raw key-estimation vectors, one row per valid window start (T - M + 1
/// rows, 24 columns). Pitch rows are folded into classes by row index; rows
/// beyond P (up to octaves*12) count as zero.
Matrix key_estimation(const Matrix& z, int key_window, int octaves);

/// (k - min) / (max - min); all zeros when max - min < 1e-12.
Vector normalize_key(const Vector& k);
/// normalize_key applied to every row.
Matrix normalized_key_estimation(const Matrix& z, int key_window, int octaves);

CostGrad tonality_cost_grad_target(const Matrix& target, const Matrix& v, int key_window, int octaves);
CostGrad tonality_cost_grad(const Matrix& x, const Matrix& v, int key_window, int octaves);

// --- meter -----------------------------------------------------------------

/// w(t) = sum_p max(0, z[t,p] - z[t-1,p]), with z[-1] = 0.
Vector onset_function(const Matrix& z);
/// Onsets folded by bar position, then standardized (population variance).
/// All zeros when the standard deviation is below 1e-12.
Vector onset_profile(const Matrix& z, int bar_len);

CostGrad meter_cost_grad_target(const Vector& target, const Matrix& v, int bar_len);
CostGrad meter_cost_grad(const Matrix& x, const Matrix& v, int bar_len);

// --- templates -------------------------------------------------------------

/// Structural targets extracted from a template piece.
struct StructureTemplate {
  int t_steps = 0;
  int pitch_count = 0;
  Matrix selfsim_target;  ///< T x (T / lambda)
  Matrix key_target;      ///< (T - M + 1) x 24, normalized
  Vector onset_target;    ///< bar_len
  int lambda = 8;
  int key_window = 4;
  int bar_len = 16;
  int octaves = 6;
  ConstraintWeights weights;

  /// Throws DimensionError unless `v` has the template's shape.
  void check_roll(const Matrix& v) const;
};

StructureTemplate extract_template(const Matrix& x, const TemplateConfig& cfg);
inline StructureTemplate extract_template(const PianoRoll& x, const TemplateConfig& cfg) {
  return extract_template(x.data(), cfg);
}

/// Weighted cost and, when `grad` is non-null, its gradient. Terms with zero
/// weight still report their value but skip their gradient.
CostBreakdown total_cost(const StructureTemplate& tmpl, const Matrix& v, Matrix* grad = nullptr);

/// clamp(v - gamma * d(phi)/dv, 0, 1).
Matrix gd_step(const Matrix& v, const StructureTemplate& tmpl, double gamma);
PianoRoll gd_step(const PianoRoll& v, const StructureTemplate& tmpl, double gamma);

// TMPL1 files: "TMPL1", u32 T, P, I, J, key rows, key columns, bar_len; then
// selfsim_target, key_target and onset_target as float32; then lambda,
// key_window, bar_len, octaves, w_selfsim, w_tonal, w_meter as float32.
std::vector<std::uint8_t> encode_template(const StructureTemplate& tmpl);
StructureTemplate decode_template(const std::vector<std::uint8_t>& bytes);
void save_template(const std::filesystem::path& path, const StructureTemplate& tmpl);
StructureTemplate load_template(const std::filesystem::path& path);

}  // namespace crbmgen

#include "crbmgen/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace crbmgen {

namespace {

constexpr double kDegenerate = 1e-12;

void require_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("template and candidate rolls differ in shape");
  }
}

/// U(i, kappa) = profile[(i + kappa) mod 12], so k = w * U for a pitch-class row w.
Matrix shift_matrix(const std::array<double, 12>& profile) {
  Matrix u(12, 12);
  for (int i = 0; i < 12; ++i) {
    for (int kappa = 0; kappa < 12; ++kappa) u(i, kappa) = profile[(i + kappa) % 12];
  }
  return u;
}

const Matrix& major_shifts() {
  static const Matrix u = shift_matrix(KeyProfiles::major);
  return u;
}

const Matrix& minor_shifts() {
  static const Matrix u = shift_matrix(KeyProfiles::minor);
  return u;
}

void check_key_window(const Matrix& z, int key_window, int octaves) {
  if (key_window < 1 || key_window > z.rows()) throw DimensionError("key window must lie in [1, T]");
  if (octaves * 12 < z.cols()) throw DimensionError("octave count does not cover the pitch range");
}

/// Sums of the pitch-class content over each M-step window: (T - M + 1) x 12.
Matrix window_pitch_classes(const Matrix& z, int key_window, int octaves) {
  const Eigen::Index t_steps = z.rows();
  Matrix classes = Matrix::Zero(t_steps, 12);
  for (int o = 0; o < octaves; ++o) {
    for (int i = 0; i < 12; ++i) {
      const Eigen::Index col = i + 12 * o;
      if (col < z.cols()) classes.col(i) += z.col(col);
    }
  }
  const Eigen::Index rows = t_steps - key_window + 1;
  Matrix windows = Matrix::Zero(rows, 12);
  for (Eigen::Index t = 0; t < rows; ++t) windows.row(t) = classes.middleRows(t, key_window).colwise().sum();
  return windows;
}

/// Gradient of normalize_key at `k`, applied to the upstream gradient `e`.
Vector normalize_key_backward(const Vector& k, const Vector& e) {
  Eigen::Index lo = 0;
  Eigen::Index hi = 0;
  const double mn = k.minCoeff(&lo);
  const double mx = k.maxCoeff(&hi);
  const double range = mx - mn;
  if (range < kDegenerate) return Vector::Zero(k.size());
  const Vector n = (k.array() - mn) / range;
  const double sum_e = e.sum();
  const double sum_en = e.dot(n);
  Vector dk = e / range;
  dk(lo) += (sum_en - sum_e) / range;
  dk(hi) -= sum_en / range;
  return dk;
}

void check_bar(const Matrix& z, int bar_len) {
  if (bar_len < 1 || z.rows() % bar_len != 0) {
    throw DimensionError("bar length " + std::to_string(bar_len) + " does not divide " +
                         std::to_string(z.rows()) + " time steps");
  }
}

Vector fold_bars(const Vector& onsets, int bar_len) {
  Vector rho = Vector::Zero(bar_len);
  for (Eigen::Index t = 0; t < onsets.size(); ++t) rho(t % bar_len) += onsets(t);
  return rho;
}

}  // namespace

int resolve_octaves(int pitch_count, int octaves) { return octaves > 0 ? octaves : (pitch_count + 11) / 12; }

Matrix self_similarity(const Matrix& z, int lambda) {
  const Eigen::Index t_steps = z.rows();
  if (lambda < 1 || t_steps % lambda != 0) {
    throw DimensionError("window " + std::to_string(lambda) + " does not divide " + std::to_string(t_steps) +
                         " time steps");
  }
  const Eigen::Index tiles = t_steps / lambda;
  const Matrix gram = z * z.transpose();
  Matrix s = Matrix::Zero(t_steps, tiles);
  for (Eigen::Index j = 0; j < tiles; ++j) {
    for (Eigen::Index i = 0; i < t_steps; ++i) {
      double acc = 0.0;
      for (Eigen::Index l = 0; l < lambda && i + l < t_steps; ++l) acc += gram(j * lambda + l, i + l);
      s(i, j) = acc;
    }
  }
  return s;
}

CostGrad selfsim_cost_grad_target(const Matrix& target, const Matrix& v, int lambda) {
  const Matrix y = v.cwiseProduct(v);
  const Matrix s = self_similarity(y, lambda);
  if (target.rows() != s.rows() || target.cols() != s.cols()) {
    throw DimensionError("self-similarity target has the wrong shape");
  }
  const Eigen::Index t_steps = v.rows();
  const double count = static_cast<double>(s.size());
  const Matrix diff = s - target;
  CostGrad out{diff.squaredNorm() / count, Matrix()};

  // ds -> d(gram): every s(i,j) is a sum of gram(j*lambda + l, i + l)
  const Matrix ds = (2.0 / count) * diff;
  Matrix dgram = Matrix::Zero(t_steps, t_steps);
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    for (Eigen::Index i = 0; i < t_steps; ++i) {
      const double g = ds(i, j);
      if (g == 0.0) continue;
      for (Eigen::Index l = 0; l < lambda && i + l < t_steps; ++l) dgram(j * lambda + l, i + l) += g;
    }
  }
  const Matrix dy = (dgram + dgram.transpose()) * y;
  out.grad = 2.0 * v.cwiseProduct(dy);
  return out;
}

CostGrad selfsim_cost_grad(const Matrix& x, const Matrix& v, int lambda) {
  require_same_shape(x, v);
  return selfsim_cost_grad_target(self_similarity(x.cwiseProduct(x), lambda), v, lambda);
}

Matrix key_estimation(const Matrix& z, int key_window, int octaves) {
  check_key_window(z, key_window, octaves);
  const Matrix windows = window_pitch_classes(z, key_window, octaves);
  Matrix k(windows.rows(), kKeyVectorSize);
  k.leftCols(12) = windows * major_shifts();
  k.rightCols(12) = windows * minor_shifts();
  return k;
}

Vector normalize_key(const Vector& k) {
  const double mn = k.minCoeff();
  const double range = k.maxCoeff() - mn;
  if (range < kDegenerate) return Vector::Zero(k.size());
  return (k.array() - mn) / range;
}

Matrix normalized_key_estimation(const Matrix& z, int key_window, int octaves) {
  Matrix k = key_estimation(z, key_window, octaves);
  for (Eigen::Index t = 0; t < k.rows(); ++t) k.row(t) = normalize_key(k.row(t).transpose()).transpose();
  return k;
}

CostGrad tonality_cost_grad_target(const Matrix& target, const Matrix& v, int key_window, int octaves) {
  const Matrix raw = key_estimation(v, key_window, octaves);
  if (target.rows() != raw.rows() || target.cols() != raw.cols()) {
    throw DimensionError("key target has the wrong shape");
  }
  const double count = static_cast<double>(raw.size());  // 2K * valid windows
  Matrix normalized(raw.rows(), raw.cols());
  for (Eigen::Index t = 0; t < raw.rows(); ++t) {
    normalized.row(t) = normalize_key(raw.row(t).transpose()).transpose();
  }
  const Matrix diff = normalized - target;
  CostGrad out{diff.squaredNorm() / count, Matrix()};

  Matrix draw(raw.rows(), raw.cols());
  for (Eigen::Index t = 0; t < raw.rows(); ++t) {
    const Vector e = (2.0 / count) * diff.row(t).transpose();
    draw.row(t) = normalize_key_backward(raw.row(t).transpose(), e).transpose();
  }
  const Matrix dwindows =
      draw.leftCols(12) * major_shifts().transpose() + draw.rightCols(12) * minor_shifts().transpose();

  // each window row sums key_window consecutive pitch-class rows
  const Eigen::Index t_steps = v.rows();
  Matrix dclasses = Matrix::Zero(t_steps, 12);
  for (Eigen::Index t = 0; t < dwindows.rows(); ++t) {
    for (int m = 0; m < key_window; ++m) dclasses.row(t + m) += dwindows.row(t);
  }
  out.grad = Matrix::Zero(t_steps, v.cols());
  for (Eigen::Index col = 0; col < v.cols(); ++col) out.grad.col(col) = dclasses.col(col % 12);
  return out;
}

CostGrad tonality_cost_grad(const Matrix& x, const Matrix& v, int key_window, int octaves) {
  require_same_shape(x, v);
  return tonality_cost_grad_target(normalized_key_estimation(x, key_window, octaves), v, key_window, octaves);
}

Vector onset_function(const Matrix& z) {
  Vector w(z.rows());
  for (Eigen::Index t = 0; t < z.rows(); ++t) {
    double acc = 0.0;
    for (Eigen::Index p = 0; p < z.cols(); ++p) {
      const double prev = t > 0 ? z(t - 1, p) : 0.0;
      acc += std::max(0.0, z(t, p) - prev);
    }
    w(t) = acc;
  }
  return w;
}

Vector onset_profile(const Matrix& z, int bar_len) {
  check_bar(z, bar_len);
  const Vector rho = fold_bars(onset_function(z), bar_len);
  const double mean = rho.mean();
  const double sd = std::sqrt((rho.array() - mean).square().mean());
  if (sd < kDegenerate) return Vector::Zero(bar_len);
  return (rho.array() - mean) / sd;
}

CostGrad meter_cost_grad_target(const Vector& target, const Matrix& v, int bar_len) {
  check_bar(v, bar_len);
  if (target.size() != bar_len) throw DimensionError("onset target has the wrong length");
  const Vector rho = fold_bars(onset_function(v), bar_len);
  const double mean = rho.mean();
  const double sd = std::sqrt((rho.array() - mean).square().mean());
  const bool degenerate = sd < kDegenerate;
  const Vector y = degenerate ? Vector(Vector::Zero(bar_len)) : Vector((rho.array() - mean) / sd);

  const Vector diff = y - target;
  CostGrad out{diff.squaredNorm() / bar_len, Matrix::Zero(v.rows(), v.cols())};
  if (degenerate) return out;

  const Vector e = (2.0 / bar_len) * diff;
  const Vector drho = (e.array() - e.mean() - y.array() * e.dot(y) / bar_len) / sd;
  for (Eigen::Index t = 0; t < v.rows(); ++t) {
    const double g = drho(t % bar_len);
    for (Eigen::Index p = 0; p < v.cols(); ++p) {
      const double prev = t > 0 ? v(t - 1, p) : 0.0;
      if (v(t, p) - prev > 0.0) {
        out.grad(t, p) += g;
        if (t > 0) out.grad(t - 1, p) -= g;
      }
    }
  }
  return out;
}

CostGrad meter_cost_grad(const Matrix& x, const Matrix& v, int bar_len) {
  require_same_shape(x, v);
  return meter_cost_grad_target(onset_profile(x, bar_len), v, bar_len);
}

void StructureTemplate::check_roll(const Matrix& v) const {
  if (v.rows() != t_steps || v.cols() != pitch_count) {
    throw DimensionError("roll is " + std::to_string(v.rows()) + "x" + std::to_string(v.cols()) +
                         ", template expects " + std::to_string(t_steps) + "x" + std::to_string(pitch_count));
  }
}

StructureTemplate extract_template(const Matrix& x, const TemplateConfig& cfg) {
  StructureTemplate tmpl;
  tmpl.t_steps = static_cast<int>(x.rows());
  tmpl.pitch_count = static_cast<int>(x.cols());
  tmpl.lambda = cfg.lambda;
  tmpl.key_window = cfg.key_window;
  tmpl.bar_len = cfg.bar_len;
  tmpl.octaves = resolve_octaves(tmpl.pitch_count, cfg.octaves);
  tmpl.weights = cfg.weights;
  tmpl.selfsim_target = self_similarity(x.cwiseProduct(x), cfg.lambda);
  tmpl.key_target = normalized_key_estimation(x, cfg.key_window, tmpl.octaves);
  tmpl.onset_target = onset_profile(x, cfg.bar_len);
  return tmpl;
}

CostBreakdown total_cost(const StructureTemplate& tmpl, const Matrix& v, Matrix* grad) {
  tmpl.check_roll(v);
  const CostGrad selfsim = selfsim_cost_grad_target(tmpl.selfsim_target, v, tmpl.lambda);
  const CostGrad tonal = tonality_cost_grad_target(tmpl.key_target, v, tmpl.key_window, tmpl.octaves);
  const CostGrad meter = meter_cost_grad_target(tmpl.onset_target, v, tmpl.bar_len);
  const ConstraintWeights& w = tmpl.weights;

  CostBreakdown cost;
  cost.selfsim = selfsim.value;
  cost.tonal = tonal.value;
  cost.meter = meter.value;
  cost.total = cost.selfsim * w.selfsim + cost.tonal * w.tonal + cost.meter * w.meter;
  if (grad != nullptr) {
    *grad = Matrix::Zero(v.rows(), v.cols());
    if (w.selfsim != 0.0) *grad += w.selfsim * selfsim.grad;
    if (w.tonal != 0.0) *grad += w.tonal * tonal.grad;
    if (w.meter != 0.0) *grad += w.meter * meter.grad;
  }
  return cost;
}

Matrix gd_step(const Matrix& v, const StructureTemplate& tmpl, double gamma) {
  if (gamma == 0.0) return v;
  Matrix grad;
  total_cost(tmpl, v, &grad);
  return (v - gamma * grad).cwiseMax(0.0).cwiseMin(1.0);
}

PianoRoll gd_step(const PianoRoll& v, const StructureTemplate& tmpl, double gamma) {
  return PianoRoll(gd_step(v.data(), tmpl, gamma), v.pitch_base());
}

}  // namespace crbmgen

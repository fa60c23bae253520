#include "crbmgen/crbm.hpp"

#include <cmath>
#include <string>

#include "crbmgen/binary_io.hpp"

namespace crbmgen {

namespace {

using StridedWindows = Eigen::Map<const Matrix, 0, Eigen::OuterStride<>>;

Matrix pad_time(const Matrix& v, const CrbmParams& params) {
  Matrix padded = Matrix::Zero(v.rows() + params.filter_width(), v.cols());
  padded.middleRows(params.pad_before(), v.rows()) = v;
  return padded;
}

/// Row j holds the flattened R x P input window of hidden position j.
StridedWindows windows(const Matrix& padded, const CrbmParams& params, int hidden_len) {
  const Eigen::Index width = static_cast<Eigen::Index>(params.filter_width()) * params.pitch_count();
  return {padded.data(), hidden_len, width,
          Eigen::OuterStride<>(static_cast<Eigen::Index>(params.stride()) * params.pitch_count())};
}

}  // namespace

CrbmParams::CrbmParams(int filters, int filter_width, int pitch_count, int stride)
    : filter_width_(filter_width), pitch_count_(pitch_count), stride_(stride) {
  if (filters <= 0 || filter_width <= 0 || pitch_count <= 0 || stride <= 0) {
    throw DimensionError("C-RBM dimensions must be positive");
  }
  weights = Matrix::Zero(filters, static_cast<Eigen::Index>(filter_width) * pitch_count);
  visible_bias = Vector::Zero(pitch_count);
  hidden_bias = Vector::Zero(filters);
}

int CrbmParams::hidden_length(int t_steps) const {
  if (t_steps <= 0 || t_steps % stride_ != 0) {
    throw DimensionError("stride " + std::to_string(stride_) + " does not divide " +
                         std::to_string(t_steps) + " time steps");
  }
  return t_steps / stride_;
}

void CrbmParams::check_roll(const PianoRoll& roll) const {
  if (roll.pitch_count() != pitch_count_) {
    throw DimensionError("roll has " + std::to_string(roll.pitch_count()) + " pitches, model expects " +
                         std::to_string(pitch_count_));
  }
  hidden_length(roll.t_steps());
}

CrbmParams init_params(int filters, int filter_width, int pitch_count, int stride, double init_std, Rng& rng) {
  CrbmParams params(filters, filter_width, pitch_count, stride);
  for (Eigen::Index i = 0; i < params.weights.size(); ++i) params.weights.data()[i] = init_std * rng.normal();
  return params;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

Matrix hidden_pre(const Matrix& v, const CrbmParams& params) {
  if (v.cols() != params.pitch_count()) throw DimensionError("roll pitch count does not match the model");
  const int hidden_len = params.hidden_length(static_cast<int>(v.rows()));
  const Matrix padded = pad_time(v, params);
  Matrix pre = params.weights * windows(padded, params, hidden_len).transpose();
  pre.colwise() += params.hidden_bias;
  return pre;
}

Matrix hidden_pre(const PianoRoll& v, const CrbmParams& params) { return hidden_pre(v.data(), params); }

Matrix input_windows(const PianoRoll& v, const CrbmParams& params) {
  params.check_roll(v);
  const Matrix padded = pad_time(v.data(), params);
  return windows(padded, params, params.hidden_length(v.t_steps()));
}

HiddenState hidden_probs(const PianoRoll& v, const CrbmParams& params) {
  HiddenState h{hidden_pre(v, params), false};
  h.values = h.values.unaryExpr([](double x) { return sigmoid(x); });
  return h;
}

Matrix visible_pre(const Matrix& h, const CrbmParams& params, int t_steps) {
  const int hidden_len = params.hidden_length(t_steps);
  if (h.rows() != params.filters() || h.cols() != hidden_len) {
    throw DimensionError("hidden state shape does not match the model and roll length");
  }
  const Eigen::Index width = params.weights.cols();
  const Matrix contributions = h.transpose() * params.weights;  // (T/d) x (R*P)
  Matrix padded = Matrix::Zero(t_steps + params.filter_width(), params.pitch_count());
  const Eigen::Index step = static_cast<Eigen::Index>(params.stride()) * params.pitch_count();
  for (int j = 0; j < hidden_len; ++j) {
    Eigen::Map<Eigen::RowVectorXd>(padded.data() + j * step, width) += contributions.row(j);
  }
  Matrix out = padded.middleRows(params.pad_before(), t_steps);
  out.rowwise() += params.visible_bias.transpose();
  return out;
}

PianoRoll visible_probs(const HiddenState& h, const CrbmParams& params, int t_steps, int pitch_base) {
  Matrix pre = visible_pre(h.values, params, t_steps);
  return PianoRoll(pre.unaryExpr([](double x) { return sigmoid(x); }), pitch_base);
}

double free_energy(const PianoRoll& v, const CrbmParams& params) {
  const Matrix pre = hidden_pre(v, params);
  const double visible_term = v.data().colwise().sum().dot(params.visible_bias.transpose());
  double hidden_term = 0.0;
  for (Eigen::Index i = 0; i < pre.size(); ++i) hidden_term += softplus(pre.data()[i]);
  return -visible_term - hidden_term;
}

PianoRoll gibbs_step(const PianoRoll& v, const CrbmParams& params, Rng& rng) {
  HiddenState h = hidden_probs(v, params);
  for (Eigen::Index i = 0; i < h.values.size(); ++i) {
    double& x = h.values.data()[i];
    x = rng.uniform() < x ? 1.0 : 0.0;
  }
  h.is_binary = true;
  return visible_probs(h, params, v.t_steps(), v.pitch_base());
}

ChainResult gibbs_chain(const PianoRoll& v0, const CrbmParams& params, int steps, Rng& rng) {
  ChainResult result{v0, {}};
  result.free_energy_trace.reserve(static_cast<std::size_t>(std::max(steps, 0)) + 1);
  result.free_energy_trace.push_back(free_energy(v0, params));
  for (int s = 0; s < steps; ++s) {
    result.roll = gibbs_step(result.roll, params, rng);
    result.free_energy_trace.push_back(free_energy(result.roll, params));
  }
  return result;
}

std::vector<std::uint8_t> encode_params(const CrbmParams& params) {
  io::ByteWriter w;
  w.magic("CRBM1");
  w.u32(static_cast<std::uint32_t>(params.filters()));
  w.u32(static_cast<std::uint32_t>(params.filter_width()));
  w.u32(static_cast<std::uint32_t>(params.pitch_count()));
  w.u32(static_cast<std::uint32_t>(params.stride()));
  for (Eigen::Index i = 0; i < params.weights.size(); ++i) w.f32(static_cast<float>(params.weights.data()[i]));
  for (double a : params.visible_bias) w.f32(static_cast<float>(a));
  for (double b : params.hidden_bias) w.f32(static_cast<float>(b));
  return w.take();
}

CrbmParams decode_params(const std::vector<std::uint8_t>& bytes) {
  io::ByteReader r(bytes, "CRBM1");
  r.expect_magic("CRBM1");
  const std::uint32_t filters = r.u32();
  const std::uint32_t width = r.u32();
  const std::uint32_t pitches = r.u32();
  const std::uint32_t stride = r.u32();
  if (filters == 0 || width == 0 || pitches == 0 || stride == 0) {
    throw DimensionError("CRBM1: zero dimension in header");
  }
  const std::uint64_t count = static_cast<std::uint64_t>(filters) * width * pitches + pitches + filters;
  if (count * 4 > r.remaining()) throw FormatError("CRBM1: truncated file");
  CrbmParams params(static_cast<int>(filters), static_cast<int>(width), static_cast<int>(pitches),
                    static_cast<int>(stride));
  for (Eigen::Index i = 0; i < params.weights.size(); ++i) params.weights.data()[i] = r.f32();
  for (double& a : params.visible_bias) a = r.f32();
  for (double& b : params.hidden_bias) b = r.f32();
  r.expect_end();
  if (!params.weights.allFinite() || !params.visible_bias.allFinite() || !params.hidden_bias.allFinite()) {
    throw FormatError("CRBM1: non-finite parameter");
  }
  return params;
}

void save_params(const std::filesystem::path& path, const CrbmParams& params) {
  io::write_file(path, encode_params(params));
}

CrbmParams load_params(const std::filesystem::path& path) { return decode_params(io::read_file(path)); }

}  // namespace crbmgen

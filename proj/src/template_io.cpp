#include <cmath>

#include "crbmgen/binary_io.hpp"
#include "crbmgen/constraints.hpp"

namespace crbmgen {

namespace {

void put_matrix(io::ByteWriter& w, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) w.f32(static_cast<float>(m.data()[i]));
}

Matrix get_matrix(io::ByteReader& r, std::uint32_t rows, std::uint32_t cols) {
  r.need(static_cast<std::size_t>(rows) * cols * 4);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.f32();
  return m;
}

int as_count(float value, const char* name) {
  if (!(value >= 1.0f) || value != std::floor(value) || value > 1e7f) {
    throw FormatError(std::string("TMPL1: invalid ") + name);
  }
  return static_cast<int>(value);
}

}  // namespace

std::vector<std::uint8_t> encode_template(const StructureTemplate& tmpl) {
  io::ByteWriter w;
  w.magic("TMPL1");
  w.u32(static_cast<std::uint32_t>(tmpl.t_steps));
  w.u32(static_cast<std::uint32_t>(tmpl.pitch_count));
  w.u32(static_cast<std::uint32_t>(tmpl.selfsim_target.rows()));
  w.u32(static_cast<std::uint32_t>(tmpl.selfsim_target.cols()));
  w.u32(static_cast<std::uint32_t>(tmpl.key_target.rows()));
  w.u32(static_cast<std::uint32_t>(tmpl.key_target.cols()));
  w.u32(static_cast<std::uint32_t>(tmpl.onset_target.size()));
  put_matrix(w, tmpl.selfsim_target);
  put_matrix(w, tmpl.key_target);
  for (double x : tmpl.onset_target) w.f32(static_cast<float>(x));
  w.f32(static_cast<float>(tmpl.lambda));
  w.f32(static_cast<float>(tmpl.key_window));
  w.f32(static_cast<float>(tmpl.bar_len));
  w.f32(static_cast<float>(tmpl.octaves));
  w.f32(static_cast<float>(tmpl.weights.selfsim));
  w.f32(static_cast<float>(tmpl.weights.tonal));
  w.f32(static_cast<float>(tmpl.weights.meter));
  return w.take();
}

StructureTemplate decode_template(const std::vector<std::uint8_t>& bytes) {
  io::ByteReader r(bytes, "TMPL1");
  r.expect_magic("TMPL1");
  StructureTemplate tmpl;
  const std::uint32_t t_steps = r.u32();
  const std::uint32_t pitches = r.u32();
  const std::uint32_t ss_rows = r.u32();
  const std::uint32_t ss_cols = r.u32();
  const std::uint32_t key_rows = r.u32();
  const std::uint32_t key_cols = r.u32();
  const std::uint32_t bar_len = r.u32();
  if (t_steps == 0 || pitches == 0 || ss_cols == 0 || key_rows == 0 || bar_len == 0) {
    throw DimensionError("TMPL1: zero dimension in header");
  }
  if (ss_rows != t_steps || key_cols != kKeyVectorSize || key_rows > t_steps || bar_len > t_steps) {
    throw DimensionError("TMPL1: inconsistent header dimensions");
  }
  tmpl.t_steps = static_cast<int>(t_steps);
  tmpl.pitch_count = static_cast<int>(pitches);
  tmpl.selfsim_target = get_matrix(r, ss_rows, ss_cols);
  tmpl.key_target = get_matrix(r, key_rows, key_cols);
  r.need(static_cast<std::size_t>(bar_len) * 4);
  tmpl.onset_target = Vector(bar_len);
  for (double& x : tmpl.onset_target) x = r.f32();
  tmpl.lambda = as_count(r.f32(), "lambda");
  tmpl.key_window = as_count(r.f32(), "key_window");
  const int stored_bar = as_count(r.f32(), "bar_len");
  tmpl.octaves = as_count(r.f32(), "octaves");
  tmpl.bar_len = stored_bar;
  tmpl.weights.selfsim = r.f32();
  tmpl.weights.tonal = r.f32();
  tmpl.weights.meter = r.f32();
  r.expect_end();

  if (stored_bar != static_cast<int>(bar_len) || t_steps % static_cast<std::uint32_t>(tmpl.lambda) != 0 ||
      ss_cols != t_steps / static_cast<std::uint32_t>(tmpl.lambda) ||
      key_rows != t_steps - static_cast<std::uint32_t>(tmpl.key_window) + 1 || tmpl.octaves * 12 < tmpl.pitch_count ||
      t_steps % bar_len != 0) {
    throw DimensionError("TMPL1: window sizes disagree with the stored targets");
  }
  if (!tmpl.selfsim_target.allFinite() || !tmpl.key_target.allFinite() || !tmpl.onset_target.allFinite() ||
      !std::isfinite(tmpl.weights.selfsim) || !std::isfinite(tmpl.weights.tonal) ||
      !std::isfinite(tmpl.weights.meter)) {
    throw FormatError("TMPL1: non-finite value");
  }
  return tmpl;
}

void save_template(const std::filesystem::path& path, const StructureTemplate& tmpl) {
  io::write_file(path, encode_template(tmpl));
}

StructureTemplate load_template(const std::filesystem::path& path) {
  return decode_template(io::read_file(path));
}

}  // namespace crbmgen

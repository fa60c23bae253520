#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "crbmgen/pianoroll.hpp"
#include "crbmgen/types.hpp"

namespace testsupport {

using crbmgen::Matrix;
using crbmgen::PianoRoll;

/// Uniform [0,1) matrix from a test-local generator.
inline Matrix random_matrix(int rows, int cols, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = dist(gen);
  }
  return m;
}

inline Matrix random_binary(int rows, int cols, std::uint64_t seed, double density = 0.3) {
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution dist(density);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = dist(gen) ? 1.0 : 0.0;
  }
  return m;
}

/// Minimal Standard MIDI File writer for building test inputs by hand.
class SmfBuilder {
 public:
  explicit SmfBuilder(int ppq = 480, int format = 0) : ppq_(ppq), format_(format) {}

  /// Starts a new track; events are appended to the last track.
  SmfBuilder& track() {
    tracks_.emplace_back();
    return *this;
  }
  SmfBuilder& raw(std::uint32_t delta, std::vector<std::uint8_t> bytes) {
    if (tracks_.empty()) track();
    auto& t = tracks_.back();
    write_varlen(t, delta);
    t.insert(t.end(), bytes.begin(), bytes.end());
    return *this;
  }
  SmfBuilder& note_on(std::uint32_t delta, int pitch, int velocity = 100, int channel = 0) {
    return raw(delta, {static_cast<std::uint8_t>(0x90 | channel), static_cast<std::uint8_t>(pitch),
                       static_cast<std::uint8_t>(velocity)});
  }
  SmfBuilder& note_off(std::uint32_t delta, int pitch, int channel = 0) {
    return raw(delta, {static_cast<std::uint8_t>(0x80 | channel), static_cast<std::uint8_t>(pitch), 0x40});
  }
  SmfBuilder& tempo(std::uint32_t delta, std::uint32_t usec_per_quarter) {
    return raw(delta, {0xFF, 0x51, 0x03, static_cast<std::uint8_t>(usec_per_quarter >> 16),
                       static_cast<std::uint8_t>(usec_per_quarter >> 8), static_cast<std::uint8_t>(usec_per_quarter)});
  }

  std::vector<std::uint8_t> build() const {
    std::vector<std::uint8_t> out = {'M', 'T', 'h', 'd', 0, 0, 0, 6};
    push16(out, format_);
    push16(out, static_cast<int>(tracks_.size()));
    push16(out, ppq_);
    for (const auto& t : tracks_) {
      std::vector<std::uint8_t> body = t;
      body.insert(body.end(), {0x00, 0xFF, 0x2F, 0x00});
      out.insert(out.end(), {'M', 'T', 'r', 'k'});
      const auto n = static_cast<std::uint32_t>(body.size());
      out.insert(out.end(), {static_cast<std::uint8_t>(n >> 24), static_cast<std::uint8_t>(n >> 16),
                             static_cast<std::uint8_t>(n >> 8), static_cast<std::uint8_t>(n)});
      out.insert(out.end(), body.begin(), body.end());
    }
    return out;
  }

 private:
  static void push16(std::vector<std::uint8_t>& out, int v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
  }
  static void write_varlen(std::vector<std::uint8_t>& out, std::uint32_t v) {
    std::uint8_t buf[5];
    int n = 0;
    buf[n++] = v & 0x7F;
    while (v >>= 7) buf[n++] = static_cast<std::uint8_t>((v & 0x7F) | 0x80);
    while (n) out.push_back(buf[--n]);
  }

  int ppq_;
  int format_;
  std::vector<std::vector<std::uint8_t>> tracks_;
};

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("crbmgen_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<std::uint8_t> file_bytes(const std::filesystem::path& path) {
  std::vector<std::uint8_t> out;
  FILE* f = std::fopen(path.string().c_str(), "rb");
  if (!f) return out;
  int c;
  while ((c = std::fgetc(f)) != EOF) out.push_back(static_cast<std::uint8_t>(c));
  std::fclose(f);
  return out;
}

}  // namespace testsupport

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crbmgen/types.hpp"

namespace crbmgen {

inline constexpr int kDefaultSteps = 512;
inline constexpr int kDefaultPitchCount = 64;
inline constexpr int kDefaultPitchBase = 28;

/// Time x pitch matrix with entries in [0,1]. Time is in sixteenth-note
/// steps; row p of the pitch axis is MIDI pitch `pitch_base + p`.
class PianoRoll {
 public:
  PianoRoll() = default;
  /// All-zero roll.
  PianoRoll(int t_steps, int pitch_count, int pitch_base = kDefaultPitchBase);
  /// Throws DimensionError on empty shape and Error on entries outside [0,1].
  explicit PianoRoll(Matrix data, int pitch_base = kDefaultPitchBase);

  int t_steps() const { return static_cast<int>(data_.rows()); }
  int pitch_count() const { return static_cast<int>(data_.cols()); }
  int pitch_base() const { return pitch_base_; }

  const Matrix& data() const { return data_; }
  /// Mutable access. Callers are responsible for keeping entries in [0,1].
  Matrix& mutable_data() { return data_; }

  double operator()(int t, int p) const { return data_(t, p); }
  double& operator()(int t, int p) { return data_(t, p); }

  bool same_shape(const PianoRoll& other) const {
    return t_steps() == other.t_steps() && pitch_count() == other.pitch_count();
  }

  /// Entries >= threshold become 1, everything else 0.
  PianoRoll binarized(double threshold = 0.5) const;

  /// Number of entries that are not exactly zero.
  std::int64_t active_cells() const;

  friend bool operator==(const PianoRoll& a, const PianoRoll& b) {
    return a.pitch_base_ == b.pitch_base_ && a.same_shape(b) && a.data_ == b.data_;
  }

 private:
  Matrix data_;
  int pitch_base_ = kDefaultPitchBase;
};

/// True when every entry is finite and inside [0,1].
bool in_unit_range(const Matrix& m);

struct TransposeResult {
  PianoRoll roll;
  std::int64_t dropped = 0;  ///< non-zero cells shifted outside the pitch range
};

/// Shifts every pitch row by `semitones` (+k = k rows up). Requires
/// |semitones| < pitch_count.
TransposeResult transpose(const PianoRoll& roll, int semitones);

struct Corpus {
  std::vector<PianoRoll> pieces;
  std::vector<std::string> names;
  /// Transposition applied to each piece relative to its source, in semitones.
  std::vector<int> transpositions;

  std::size_t size() const { return pieces.size(); }
  std::int64_t total_steps() const;
  /// Throws DimensionError if pieces disagree on pitch_count or pitch_base.
  void validate() const;
  void add(PianoRoll roll, std::string name, int transposition = 0);
};

/// Each piece transposed by 0..+11 semitones, grouped per source piece in
/// that order. Cells leaving the pitch range are dropped.
Corpus augment_all_keys(const Corpus& corpus);

// PRL1 files: "PRL1", u32 T, u32 P, i32 pitch_base, T*P float32, all
// little-endian, time-major.
std::vector<std::uint8_t> encode_roll(const PianoRoll& roll);
PianoRoll decode_roll(const std::vector<std::uint8_t>& bytes);
void save_roll(const std::filesystem::path& path, const PianoRoll& roll);
PianoRoll load_roll(const std::filesystem::path& path);

/// Paths listed in a manifest (one per line; blank lines and lines starting
/// with '#' are skipped). Relative entries resolve against the manifest's
/// directory.
std::vector<std::filesystem::path> read_manifest(const std::filesystem::path& manifest);

}  // namespace crbmgen

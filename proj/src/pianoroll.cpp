#include "crbmgen/pianoroll.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "crbmgen/binary_io.hpp"

namespace crbmgen {

namespace io {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace io

bool in_unit_range(const Matrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double x = m.data()[i];
    if (!(x >= 0.0 && x <= 1.0)) return false;  // NaN fails both
  }
  return true;
}

PianoRoll::PianoRoll(int t_steps, int pitch_count, int pitch_base)
    : data_(Matrix::Zero(t_steps, pitch_count)), pitch_base_(pitch_base) {
  if (t_steps <= 0 || pitch_count <= 0) {
    throw DimensionError("piano roll needs positive dimensions");
  }
}

PianoRoll::PianoRoll(Matrix data, int pitch_base) : data_(std::move(data)), pitch_base_(pitch_base) {
  if (data_.rows() == 0 || data_.cols() == 0) {
    throw DimensionError("piano roll needs positive dimensions");
  }
  if (!in_unit_range(data_)) throw Error("piano roll entries must lie in [0,1]");
}

PianoRoll PianoRoll::binarized(double threshold) const {
  PianoRoll out(*this);
  out.data_ = (data_.array() >= threshold).cast<double>().matrix();
  return out;
}

std::int64_t PianoRoll::active_cells() const { return (data_.array() != 0.0).count(); }

TransposeResult transpose(const PianoRoll& roll, int semitones) {
  const int pitches = roll.pitch_count();
  if (std::abs(semitones) >= pitches) {
    throw DimensionError("transposition must be smaller than the pitch range");
  }
  TransposeResult result{PianoRoll(roll.t_steps(), pitches, roll.pitch_base()), 0};
  for (int t = 0; t < roll.t_steps(); ++t) {
    for (int p = 0; p < pitches; ++p) {
      const double value = roll(t, p);
      if (value == 0.0) continue;
      const int target = p + semitones;
      if (target < 0 || target >= pitches) {
        ++result.dropped;
      } else {
        result.roll(t, target) = value;
      }
    }
  }
  return result;
}

std::int64_t Corpus::total_steps() const {
  std::int64_t total = 0;
  for (const auto& piece : pieces) total += piece.t_steps();
  return total;
}

void Corpus::validate() const {
  if (names.size() != pieces.size() || transpositions.size() != pieces.size()) {
    throw DimensionError("corpus metadata out of sync with pieces");
  }
  for (const auto& piece : pieces) {
    if (piece.pitch_count() != pieces.front().pitch_count() ||
        piece.pitch_base() != pieces.front().pitch_base()) {
      throw DimensionError("corpus pieces disagree on pitch range");
    }
  }
}

void Corpus::add(PianoRoll roll, std::string name, int transposition) {
  pieces.push_back(std::move(roll));
  names.push_back(std::move(name));
  transpositions.push_back(transposition);
}

Corpus augment_all_keys(const Corpus& corpus) {
  if (corpus.pieces.empty()) throw Error("cannot augment an empty corpus");
  corpus.validate();
  Corpus out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (int shift = 0; shift < 12; ++shift) {
      auto moved = transpose(corpus.pieces[i], shift);
      out.add(std::move(moved.roll), corpus.names[i] + "+" + std::to_string(shift),
              corpus.transpositions[i] + shift);
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_roll(const PianoRoll& roll) {
  io::ByteWriter w;
  w.magic("PRL1");
  w.u32(static_cast<std::uint32_t>(roll.t_steps()));
  w.u32(static_cast<std::uint32_t>(roll.pitch_count()));
  w.i32(roll.pitch_base());
  const Matrix& m = roll.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) w.f32(static_cast<float>(m.data()[i]));
  return w.take();
}

PianoRoll decode_roll(const std::vector<std::uint8_t>& bytes) {
  io::ByteReader r(bytes, "PRL1");
  r.expect_magic("PRL1");
  const std::uint32_t t_steps = r.u32();
  const std::uint32_t pitches = r.u32();
  const std::int32_t base = r.i32();
  if (t_steps == 0 || pitches == 0) throw DimensionError("PRL1: zero dimension in header");
  const std::uint64_t cells = static_cast<std::uint64_t>(t_steps) * pitches;
  if (cells * 4 != r.remaining()) {
    if (cells * 4 > r.remaining()) throw FormatError("PRL1: truncated file");
    throw FormatError("PRL1: trailing bytes after payload");
  }
  Matrix m(t_steps, pitches);
  for (std::uint64_t i = 0; i < cells; ++i) m.data()[i] = r.f32();
  if (!in_unit_range(m)) throw FormatError("PRL1: entry outside [0,1]");
  return PianoRoll(std::move(m), base);
}

void save_roll(const std::filesystem::path& path, const PianoRoll& roll) {
  io::write_file(path, encode_roll(roll));
}

PianoRoll load_roll(const std::filesystem::path& path) { return decode_roll(io::read_file(path)); }

std::vector<std::filesystem::path> read_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open manifest " + manifest.string());
  std::vector<std::filesystem::path> paths;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
      line.pop_back();
    }
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::filesystem::path entry = std::filesystem::u8path(line.substr(first));
    if (entry.is_relative()) entry = manifest.parent_path() / entry;
    paths.push_back(entry);
  }
  return paths;
}

}  // namespace crbmgen

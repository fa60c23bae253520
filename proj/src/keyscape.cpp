#include <cmath>
#include <string>

#include "crbmgen/eval.hpp"

namespace crbmgen {

namespace {

constexpr const char* kPitchNames[12] = {"C", "C#", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B"};

// Hue-ordered palette around the circle of fifths; minor keys are darker
// shades of their relative major.
constexpr const char* kMajorColors[12] = {"#e6194b", "#f58231", "#ffe119", "#bfef45", "#3cb44b", "#42d4f4",
                                          "#4363d8", "#911eb4", "#f032e6", "#fabed4", "#ffd8b1", "#aaffc3"};
constexpr const char* kMinorColors[12] = {"#800000", "#9a6324", "#808000", "#469990", "#000075", "#5b3a8e",
                                          "#a9a9a9", "#dcbeff", "#b15928", "#1f78b4", "#33a02c", "#6a3d9a"};

double pearson(const std::array<double, 12>& x, const std::array<double, 12>& y) {
  double mx = 0.0;
  double my = 0.0;
  for (int i = 0; i < 12; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= 12.0;
  my /= 12.0;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (int i = 0; i < 12; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

bool flat(const std::array<double, 12>& h) {
  for (double x : h) {
    if (x != h[0]) return false;
  }
  return true;
}

}  // namespace

std::string key_name(KeyLabel key) {
  if (key < 0 || key >= 24) return "none";
  return std::string(kPitchNames[key % 12]) + (key < 12 ? " major" : " minor");
}

std::string key_color(KeyLabel key) {
  if (key < 0 || key >= 24) return "#d0d0d0";
  return key < 12 ? kMajorColors[key] : kMinorColors[key - 12];
}

std::array<double, 12> pitch_class_histogram(const PianoRoll& roll, int begin, int end) {
  if (begin < 0 || end > roll.t_steps() || begin > end) throw DimensionError("key window outside the roll");
  std::array<double, 12> hist{};
  for (int p = 0; p < roll.pitch_count(); ++p) {
    const int pc = ((roll.pitch_base() + p) % 12 + 12) % 12;
    for (int t = begin; t < end; ++t) hist[static_cast<std::size_t>(pc)] += roll(t, p);
  }
  return hist;
}

std::array<double, 24> key_correlations(const std::array<double, 12>& histogram) {
  std::array<double, 24> out{};
  for (int tonic = 0; tonic < 12; ++tonic) {
    std::array<double, 12> major{};
    std::array<double, 12> minor{};
    for (int pc = 0; pc < 12; ++pc) {
      major[static_cast<std::size_t>(pc)] = KrumhanslKessler::major[static_cast<std::size_t>((pc - tonic + 12) % 12)];
      minor[static_cast<std::size_t>(pc)] = KrumhanslKessler::minor[static_cast<std::size_t>((pc - tonic + 12) % 12)];
    }
    out[static_cast<std::size_t>(tonic)] = pearson(histogram, major);
    out[static_cast<std::size_t>(tonic + 12)] = pearson(histogram, minor);
  }
  return out;
}

KeyLabel ks_key_estimate(const std::array<double, 12>& histogram) {
  if (flat(histogram)) return kNoKey;
  const auto corr = key_correlations(histogram);
  KeyLabel best = 0;
  for (KeyLabel k = 1; k < 24; ++k) {
    if (corr[static_cast<std::size_t>(k)] > corr[static_cast<std::size_t>(best)]) best = k;
  }
  return best;
}

KeyLabel ks_key_estimate(const PianoRoll& roll, int begin, int end) {
  return ks_key_estimate(pitch_class_histogram(roll, begin, end));
}

Keyscape keyscape(const PianoRoll& roll, int levels) {
  if (levels < 1 || levels > 30 || (1LL << (levels - 1)) > roll.t_steps()) {
    throw DimensionError("keyscape needs 1 <= levels and 2^(levels-1) <= T");
  }
  Keyscape scape;
  const long long t_steps = roll.t_steps();
  for (int level = 0; level < levels; ++level) {
    const long long windows = 1LL << level;
    std::vector<KeyLabel> row;
    row.reserve(static_cast<std::size_t>(windows));
    for (long long w = 0; w < windows; ++w) {
      const int begin = static_cast<int>(w * t_steps / windows);
      const int end = static_cast<int>((w + 1) * t_steps / windows);
      row.push_back(ks_key_estimate(roll, begin, end));
    }
    scape.levels.push_back(std::move(row));
  }
  return scape;
}

}  // namespace crbmgen

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "crbmgen/pianoroll.hpp"

namespace crbmgen {

// --- information rate ------------------------------------------------------

struct IrReport {
  double average_ir = 0.0;  ///< bits
  int n_slices = 0;
  int vocab_size = 0;
  std::vector<double> per_step_ir;  ///< entry n-1 is the contribution of slice n
};

/// Average information rate of a symbol sequence. For every n >= 1 the
/// marginal entropy comes from symbol counts over s[0..n-1] and the
/// conditional entropy from first-order transitions among s[0..n-1] that
/// leave s[n-1]. An unseen context contributes 0, as do negative steps.
IrReport information_rate(const std::vector<int>& symbols);

/// Binarizes at `threshold` and treats each time slice as one symbol.
IrReport information_rate(const PianoRoll& roll, double threshold = 0.5);

/// Time slices of a binarized roll mapped to dense ids in order of first appearance.
std::vector<int> slice_symbols(const PianoRoll& roll, double threshold = 0.5);

// --- key finding -----------------------------------------------------------

/// Krumhansl-Kessler probe-tone profiles, indexed by scale degree.
struct KrumhanslKessler {
  static constexpr std::array<double, 12> major = {6.35, 2.23, 3.48, 2.33, 4.38, 4.09,
                                                   2.52, 5.19, 2.39, 3.66, 2.29, 2.88};
  static constexpr std::array<double, 12> minor = {6.33, 2.68, 3.52, 5.38, 2.60, 3.53,
                                                   2.54, 4.75, 3.98, 2.69, 3.34, 3.17};
};

/// 0..11 = C..B major, 12..23 = C..B minor, kNoKey for an empty window.
using KeyLabel = int;
inline constexpr KeyLabel kNoKey = -1;

std::string key_name(KeyLabel key);

/// Pitch-class duration histogram of rows [begin, end), using real MIDI pitch classes.
std::array<double, 12> pitch_class_histogram(const PianoRoll& roll, int begin, int end);

/// Pearson correlation of the histogram with the 24 rotated profiles.
std::array<double, 24> key_correlations(const std::array<double, 12>& histogram);

/// Best-correlated key (lowest index on ties); kNoKey when the histogram is
/// flat or empty.
KeyLabel ks_key_estimate(const std::array<double, 12>& histogram);
KeyLabel ks_key_estimate(const PianoRoll& roll, int begin, int end);
inline KeyLabel ks_key_estimate(const PianoRoll& roll) { return ks_key_estimate(roll, 0, roll.t_steps()); }

struct Keyscape {
  /// levels[l] has 2^l labels, one per equal window; levels[0] is the apex.
  std::vector<std::vector<KeyLabel>> levels;
};

/// Requires 1 <= levels and 2^(levels-1) <= T.
Keyscape keyscape(const PianoRoll& roll, int levels);

/// RGB colour for each of the 24 keys; kNoKey maps to grey.
std::string key_color(KeyLabel key);

// --- group comparison ------------------------------------------------------

struct GroupSummary {
  std::string name;
  int count = 0;
  double mean = 0.0;
  double stddev = 0.0;  ///< sample standard deviation (n - 1)
};

struct WelchResult {
  std::string a;
  std::string b;
  double mean_difference = 0.0;  ///< mean(a) - mean(b)
  double t = 0.0;                ///< one-sided statistic for mean(a) > mean(b)
  double dof = 0.0;              ///< Welch-Satterthwaite degrees of freedom
};

/// Welch statistic of mean(a) - mean(b). With both variances zero the
/// statistic is 0 for equal means and +/-infinity otherwise.
WelchResult welch_test(const std::vector<double>& a, const std::vector<double>& b);

GroupSummary summarize(const std::string& name, const std::vector<double>& values);

struct IrComparison {
  std::vector<GroupSummary> groups;
  std::vector<WelchResult> tests;
  std::vector<std::vector<double>> values;  ///< per-group IR of every piece
};

using NamedRolls = std::pair<std::string, std::vector<PianoRoll>>;

/// IR of every roll, per-group summaries, and Welch tests for the named
/// (a, b) pairs. Throws Error for pairs naming unknown groups.
IrComparison compare_ir(const std::vector<NamedRolls>& groups,
                        const std::vector<std::pair<std::string, std::string>>& pairs, double threshold = 0.5);

/// "group,count,mean_ir,std_ir" rows, then "a,b,mean_difference,welch_t,dof" rows.
std::string comparison_csv(const IrComparison& comparison);

}  // namespace crbmgen

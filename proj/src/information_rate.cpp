#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "crbmgen/eval.hpp"

namespace crbmgen {

namespace {

double xlog2x(double c) { return c > 0.0 ? c * std::log2(c) : 0.0; }

/// Counts with running sum of c*log2(c), so entropy updates are O(1).
class Histogram {
 public:
  void add(int symbol) {
    double& c = counts_[symbol];
    if (c == 0.0) ++distinct_;
    weighted_ -= xlog2x(c);
    c += 1.0;
    weighted_ += xlog2x(c);
    total_ += 1.0;
  }
  bool empty() const { return total_ == 0.0; }
  /// H = log2(N) - (1/N) sum c log2 c
  double entropy() const {
    if (distinct_ < 2) return 0.0;
    return std::max(0.0, std::log2(total_) - weighted_ / total_);
  }

 private:
  std::unordered_map<int, double> counts_;
  double weighted_ = 0.0;
  double total_ = 0.0;
  int distinct_ = 0;
};

}  // namespace

IrReport information_rate(const std::vector<int>& symbols) {
  const int n_slices = static_cast<int>(symbols.size());
  if (n_slices < 2) throw Error("information rate needs at least two time slices");

  IrReport report;
  report.n_slices = n_slices;
  Histogram marginal;
  std::unordered_map<int, Histogram> transitions;
  marginal.add(symbols[0]);
  double sum = 0.0;
  for (int n = 1; n < n_slices; ++n) {
    // statistics cover s[0..n-1]; transitions s[m-1] -> s[m] for m <= n-1
    const double h = marginal.entropy();
    double step = 0.0;
    auto ctx = transitions.find(symbols[n - 1]);
    if (ctx != transitions.end() && !ctx->second.empty()) step = std::max(0.0, h - ctx->second.entropy());
    report.per_step_ir.push_back(step);
    sum += step;

    marginal.add(symbols[n]);
    transitions[symbols[n - 1]].add(symbols[n]);
  }
  report.average_ir = sum / static_cast<double>(n_slices - 1);

  std::unordered_map<int, int> seen;
  for (int s : symbols) seen.emplace(s, 0);
  report.vocab_size = static_cast<int>(seen.size());
  return report;
}

std::vector<int> slice_symbols(const PianoRoll& roll, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error("binarization threshold must lie in (0,1)");
  std::map<std::vector<bool>, int> ids;
  std::vector<int> symbols;
  symbols.reserve(static_cast<std::size_t>(roll.t_steps()));
  std::vector<bool> slice(static_cast<std::size_t>(roll.pitch_count()));
  for (int t = 0; t < roll.t_steps(); ++t) {
    for (int p = 0; p < roll.pitch_count(); ++p) slice[static_cast<std::size_t>(p)] = roll(t, p) >= threshold;
    auto [it, inserted] = ids.emplace(slice, static_cast<int>(ids.size()));
    symbols.push_back(it->second);
  }
  return symbols;
}

IrReport information_rate(const PianoRoll& roll, double threshold) {
  return information_rate(slice_symbols(roll, threshold));
}

}  // namespace crbmgen

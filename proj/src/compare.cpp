#include <cmath>
#include <cstdio>
#include <limits>

#include "crbmgen/eval.hpp"

namespace crbmgen {

namespace {

void moments(const std::vector<double>& xs, double& mean, double& var) {
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  var = 0.0;
  if (xs.size() > 1) {
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size() - 1);
  }
}

}  // namespace

GroupSummary summarize(const std::string& name, const std::vector<double>& values) {
  GroupSummary s{name, static_cast<int>(values.size()), 0.0, 0.0};
  if (values.empty()) return s;
  double var = 0.0;
  moments(values, s.mean, var);
  s.stddev = std::sqrt(var);
  return s;
}

WelchResult welch_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw Error("Welch test needs two nonempty groups");
  double ma = 0.0;
  double va = 0.0;
  double mb = 0.0;
  double vb = 0.0;
  moments(a, ma, va);
  moments(b, mb, vb);
  WelchResult r;
  r.mean_difference = ma - mb;
  const double sa = va / static_cast<double>(a.size());
  const double sb = vb / static_cast<double>(b.size());
  const double se2 = sa + sb;
  if (se2 <= 0.0) {
    r.t = r.mean_difference == 0.0 ? 0.0
                                   : std::copysign(std::numeric_limits<double>::infinity(), r.mean_difference);
    r.dof = static_cast<double>(a.size() + b.size() - 2);
    return r;
  }
  r.t = r.mean_difference / std::sqrt(se2);
  double denom = 0.0;
  if (a.size() > 1) denom += sa * sa / static_cast<double>(a.size() - 1);
  if (b.size() > 1) denom += sb * sb / static_cast<double>(b.size() - 1);
  r.dof = denom > 0.0 ? se2 * se2 / denom : 0.0;
  return r;
}

IrComparison compare_ir(const std::vector<NamedRolls>& groups,
                        const std::vector<std::pair<std::string, std::string>>& pairs, double threshold) {
  IrComparison out;
  for (const auto& [name, rolls] : groups) {
    std::vector<double> values;
    values.reserve(rolls.size());
    for (const PianoRoll& roll : rolls) values.push_back(information_rate(roll, threshold).average_ir);
    out.groups.push_back(summarize(name, values));
    out.values.push_back(std::move(values));
  }
  auto find = [&](const std::string& name) -> const std::vector<double>& {
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (groups[i].first == name) return out.values[i];
    }
    throw Error("unknown group \"" + name + "\" in comparison");
  };
  for (const auto& [a, b] : pairs) {
    WelchResult r = welch_test(find(a), find(b));
    r.a = a;
    r.b = b;
    out.tests.push_back(std::move(r));
  }
  return out;
}

std::string comparison_csv(const IrComparison& comparison) {
  std::string out = "group,count,mean_ir,std_ir\n";
  char line[512];
  for (const GroupSummary& g : comparison.groups) {
    std::snprintf(line, sizeof(line), "%s,%d,%.17g,%.17g\n", g.name.c_str(), g.count, g.mean, g.stddev);
    out += line;
  }
  if (!comparison.tests.empty()) {
    out += "a,b,mean_difference,welch_t,dof\n";
    for (const WelchResult& r : comparison.tests) {
      std::snprintf(line, sizeof(line), "%s,%s,%.17g,%.17g,%.17g\n", r.a.c_str(), r.b.c_str(), r.mean_difference,
                    r.t, r.dof);
      out += line;
    }
  }
  return out;
}

}  // namespace crbmgen

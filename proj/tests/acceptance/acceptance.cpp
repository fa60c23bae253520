#include <algorithm>
#include <chrono>
#include <array>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "crbmgen/constraints.hpp"
#include "crbmgen/crbm.hpp"
#include "crbmgen/eval.hpp"
#include "crbmgen/sampler.hpp"
#include "crbmgen/train.hpp"
#include "support/cli_fixture.hpp"
#include "support/gradcheck.hpp"
#include "support/ir_oracle.hpp"
#include "support/synthetic.hpp"
#include "support/test_support.hpp"

using namespace crbmgen;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* pattern, ...) __attribute__((format(printf, 1, 2)));
std::string format(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

double mean(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0) / x.size(); }

// --- 1: gradient correctness ---------------------------------------------------

Outcome gradient_correctness() {
  constexpr int kRolls = 50;
  constexpr int kSteps = 32;
  constexpr int kPitches = 12;
  constexpr int kLambda = 4;
  constexpr int kWindow = 4;
  constexpr int kBar = 8;
  constexpr int kOctaves = 1;
  constexpr double kEps = 1e-4;
  constexpr double kTolerance = 1e-3;

  double worst[3] = {0, 0, 0};
  int checked[3] = {0, 0, 0};
  int skipped[3] = {0, 0, 0};
  auto record = [&](int which, const testsupport::GradCheckResult& r) {
    worst[which] = std::max(worst[which], r.max_rel_error);
    checked[which] += r.checked;
    skipped[which] += r.skipped;
  };
  for (std::uint64_t i = 0; i < kRolls; ++i) {
    const Matrix x = testsupport::random_matrix(kSteps, kPitches, 2 * i + 1);
    const Matrix v = testsupport::random_matrix(kSteps, kPitches, 2 * i + 2);

    const CostGrad s = selfsim_cost_grad(x, v, kLambda);
    record(0, testsupport::check_gradient([&](const Matrix& z) { return selfsim_cost_grad(x, z, kLambda).value; }, v,
                                          s.grad, kEps));

    const CostGrad k = tonality_cost_grad(x, v, kWindow, kOctaves);
    record(1, testsupport::check_gradient(
                  [&](const Matrix& z) { return tonality_cost_grad(x, z, kWindow, kOctaves).value; }, v, k.grad, kEps,
                  testsupport::tonality_ties(v, kWindow, kOctaves, kEps)));

    const CostGrad m = meter_cost_grad(x, v, kBar);
    record(2, testsupport::check_gradient([&](const Matrix& z) { return meter_cost_grad(x, z, kBar).value; }, v,
                                          m.grad, kEps, testsupport::meter_kinks(v, kEps)));
  }
  const bool pass = worst[0] < kTolerance && worst[1] < kTolerance && worst[2] < kTolerance && checked[0] > 0 &&
                    checked[1] > 0 && checked[2] > 0;
  return {pass, format("max rel err selfsim %.2e tonality %.2e meter %.2e; checked %d/%d/%d, skipped %d/%d/%d",
                       worst[0], worst[1], worst[2], checked[0], checked[1], checked[2], skipped[0], skipped[1],
                       skipped[2])};
}

// --- 2: adjoint identity -------------------------------------------------------

Outcome adjoint_identity() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    CrbmParams params(3, 4, 4, 2);
    params.weights = testsupport::random_matrix(3, 16, 7000 + seed, -1.0, 1.0);
    params.visible_bias = testsupport::random_matrix(4, 1, 8000 + seed, -0.5, 0.5).col(0);
    params.hidden_bias = testsupport::random_matrix(3, 1, 9000 + seed, -0.5, 0.5).col(0);
    const Matrix v = testsupport::random_matrix(16, 4, seed);
    const Matrix h = testsupport::random_matrix(3, 8, seed + 500, -1.0, 1.0);
    Matrix hb = hidden_pre(v, params);
    hb.colwise() -= params.hidden_bias;
    Matrix va = visible_pre(h, params, 16);
    va.rowwise() -= params.visible_bias.transpose();
    const double lhs = (hb.array() * h.array()).sum();
    const double rhs = (v.array() * va.array()).sum();
    worst = std::max(worst, std::abs(lhs - rhs) / (hb.norm() * h.norm() + v.norm() * va.norm()));
  }
  return {worst < 1e-8, format("max normalized gap %.2e over 100 instances", worst)};
}

// --- shared toy model for 3 and 4 ------------------------------------------

constexpr int kToySteps = 64;
constexpr int kToyPitches = 12;
constexpr int kToyBase = 60;

CrbmParams train_toy_model() {
  const Corpus corpus = synthetic::pattern_corpus(24, kToySteps, kToyPitches, 2024, 32);
  CrbmArchitecture arch;
  arch.filters = 32;
  arch.filter_width = 8;
  arch.stride = 2;
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.epochs = 200;
  cfg.particles = 4;
  cfg.instance_steps = 0;
  cfg.rng_seed = 77;
  return train_crbm(corpus, arch, cfg).params;
}

SamplerConfig toy_schedule() {
  SamplerConfig cfg;
  cfg.outer_iters = 40;
  cfg.inner_iters = 3;
  cfg.gd_phase_steps = 20;
  cfg.gs_block_steps = 20;
  cfg.gd_phase_lr = 0.3;
  cfg.interleaved_gd_lr = 0.15;
  cfg.warmup_iters = 5;
  return cfg;
}

TemplateConfig toy_template_config() {
  TemplateConfig t;
  t.lambda = 8;
  t.key_window = 4;
  t.bar_len = 16;
  return t;
}

// --- 3: cost vs free energy quadrants ----------------------------------------

struct Cluster {
  std::vector<double> free_energy;
  std::vector<double> cost;
  void add(const PianoRoll& v, const CrbmParams& model, const StructureTemplate& tmpl) {
    free_energy.push_back(crbmgen::free_energy(v, model));
    cost.push_back(total_cost(tmpl, v.data()).total);
  }
};

Outcome quadrants(const CrbmParams& model) {
  constexpr int kRuns = 50;
  Rng template_rng(31337);
  const StructureTemplate tmpl =
      extract_template(synthetic::repeating_piece(kToySteps, kToyPitches, 32, template_rng, kToyBase),
                       toy_template_config());
  const SamplerConfig schedule = toy_schedule();
  const int gs_steps = schedule.inner_iters * schedule.gs_block_steps;

  Cluster noise;
  Cluster gs;
  Cluster gd;
  Cluster both;
  for (int run = 0; run < kRuns; ++run) {
    Rng rng = Rng(500).split(static_cast<std::uint64_t>(run));
    const PianoRoll start = uniform_noise(kToySteps, kToyPitches, kToyBase, rng);
    noise.add(start, model, tmpl);

    gs.add(gibbs_chain(start, model, gs_steps * 4, rng).roll, model, tmpl);

    PianoRoll v = start;
    for (int i = 0; i < schedule.gd_phase_steps * 4; ++i) v = gd_step(v, tmpl, schedule.gd_phase_lr);
    gd.add(v, model, tmpl);

    v = start;
    for (int i = 0; i < 4; ++i) v = run_schedule_iteration(v, model, tmpl, schedule, rng);
    both.add(v, model, tmpl);
  }
  const double f_noise = mean(noise.free_energy);
  const double f_gs = mean(gs.free_energy);
  const double f_gd = mean(gd.free_energy);
  const double f_both = mean(both.free_energy);
  const double c_noise = mean(noise.cost);
  const double c_gs = mean(gs.cost);
  const double c_gd = mean(gd.cost);
  const double c_both = mean(both.cost);
  const bool pass = f_gs < f_both && f_both < f_gd && f_gd < f_noise && c_gd < c_both && c_both < c_gs &&
                    c_gs < c_noise;
  return {pass, format("mean F noise %.2f GD %.2f GS+GD %.2f GS %.2f; mean cost noise %.4f GS %.4f GS+GD %.4f GD "
                       "%.4f",
                       f_noise, f_gd, f_both, f_gs, c_noise, c_gs, c_both, c_gd)};
}

// --- 4: IR ordering -------------------------------------------------------------

Outcome ir_ordering(const CrbmParams& model) {
  constexpr int kPieces = 30;
  const SamplerConfig schedule = toy_schedule();
  const int gs_total = schedule.outer_iters * schedule.inner_iters * schedule.gs_block_steps;

  std::vector<double> template_ir;
  std::vector<double> constrained_ir;
  std::vector<double> unconstrained_ir;
  for (int i = 0; i < kPieces; ++i) {
    Rng piece_rng = Rng(4242).split(static_cast<std::uint64_t>(i));
    const PianoRoll piece = synthetic::aaba_piece(kToySteps, kToyPitches, piece_rng, kToyBase);
    template_ir.push_back(information_rate(piece).average_ir);
    const StructureTemplate tmpl = extract_template(piece, toy_template_config());

    SamplerConfig cfg = schedule;
    cfg.rng_seed = 1000 + static_cast<std::uint64_t>(i);
    constrained_ir.push_back(information_rate(constrained_sample(model, tmpl, cfg, kToyBase).best).average_ir);

    Rng free_rng = Rng(2000 + static_cast<std::uint64_t>(i));
    const PianoRoll start = uniform_noise(kToySteps, kToyPitches, kToyBase, free_rng);
    unconstrained_ir.push_back(information_rate(gibbs_chain(start, model, gs_total, free_rng).roll).average_ir);
  }
  const WelchResult w = welch_test(constrained_ir, unconstrained_ir);
  const double m_tmpl = mean(template_ir);
  const double m_con = mean(constrained_ir);
  const double m_free = mean(unconstrained_ir);
  const bool pass = m_con > m_free && w.t > 2.0 && m_tmpl > m_con;
  return {pass, format("mean IR templates %.4f constrained %.4f unconstrained %.4f; Welch t %.2f (dof %.1f)", m_tmpl,
                       m_con, m_free, w.t, w.dof)};
}

// --- 5: simulated annealing statistics ----------------------------------------

Outcome sa_statistics() {
  constexpr int kDraws = 100000;
  Rng rng(55);
  int kept = 0;
  for (int i = 0; i < kDraws; ++i) kept += sa_accept(1.0, 0.0, 0.0, 0.0, 1.0, rng) ? 1 : 0;
  const double rate = static_cast<double>(kept) / kDraws;
  const double expected = std::exp(-1.0);

  std::mt19937_64 gen(56);
  std::uniform_real_distribution<double> value(-1e6, 1e6);
  std::uniform_real_distribution<double> improvement(0.0, 1e6);
  const std::vector<double> temps = {1.0, 0.5, 1e-3, 1e-6, 1e-12};
  int reverted = 0;
  for (int i = 0; i < 10000; ++i) {
    const double fe_old = value(gen);
    const double cost_old = value(gen);
    // every fourth trial is a tie on both objectives
    const double fe_new = i % 4 == 0 ? fe_old : fe_old - improvement(gen);
    const double cost_new = i % 4 == 0 ? cost_old : cost_old - improvement(gen);
    const double temp = temps[static_cast<std::size_t>(i) % temps.size()];
    if (!sa_accept(fe_new, fe_old, cost_new, cost_old, temp, rng)) ++reverted;
  }
  const bool pass = std::abs(rate - expected) <= 0.005 && reverted == 0;
  return {pass, format("keep rate %.5f vs e^-1 = %.5f; %d of 10000 improvements reverted", rate, expected, reverted)};
}

// --- 6: clamp invariant -------------------------------------------------------

Outcome clamp_invariant() {
  constexpr int kSteps = 100000;
  Rng rng(66);
  CrbmParams params(4, 4, 12, 2);
  params.weights = testsupport::random_matrix(4, 48, 1, -3.0, 3.0);
  params.visible_bias = testsupport::random_matrix(12, 1, 2, -2.0, 2.0).col(0);
  params.hidden_bias = testsupport::random_matrix(4, 1, 3, -2.0, 2.0).col(0);
  TemplateConfig tcfg;
  tcfg.lambda = 4;
  tcfg.key_window = 4;
  tcfg.bar_len = 8;
  const StructureTemplate tmpl = extract_template(testsupport::random_binary(16, 12, 4, 0.3), tcfg);
  const std::vector<double> gammas = {0.0, 0.1, 5.0, 10.0, 1e3, 1e9};

  PianoRoll v = uniform_noise(16, 12, 60, rng);
  int violations = 0;
  int gd = 0;
  for (int i = 0; i < kSteps; ++i) {
    if (rng.bernoulli(0.5)) {
      v = gd_step(v, tmpl, gammas[rng.below(gammas.size())]);
      ++gd;
    } else {
      v = gibbs_step(v, params, rng);
    }
    const auto& d = v.data();
    if (!d.allFinite() || d.minCoeff() < 0.0 || d.maxCoeff() > 1.0) ++violations;
    if (i % 1000 == 999) v = uniform_noise(16, 12, 60, rng);
  }
  return {violations == 0, format("%d steps (%d GD, %d GS), %d out-of-range states", kSteps, gd, kSteps - gd,
                                  violations)};
}

// --- 7: IR oracles ------------------------------------------------------------

Outcome ir_oracles() {
  bool constant_zero = true;
  for (int n : {2, 16, 100, 1000}) {
    constant_zero = constant_zero && information_rate(std::vector<int>(static_cast<std::size_t>(n), 3)).average_ir == 0.0;
  }
  double abab_gap = 0.0;
  for (int n : {4, 16, 64, 256}) {
    std::vector<int> s(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = i % 2;
    abab_gap = std::max(abab_gap, std::abs(information_rate(s).average_ir - testsupport::brute_force_ir(s)));
  }
  std::mt19937_64 gen(77);
  std::uniform_int_distribution<int> symbol(0, 5);
  std::vector<int> base(200);
  for (int& x : base) x = symbol(gen);
  const double base_ir = information_rate(base).average_ir;
  double perm_gap = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> perm(6);
    std::iota(perm.begin(), perm.end(), 10);
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<int> relabeled = base;
    for (int& x : relabeled) x = perm[static_cast<std::size_t>(x)];
    perm_gap = std::max(perm_gap, std::abs(information_rate(relabeled).average_ir - base_ir));
  }
  const bool pass = constant_zero && abab_gap < 1e-9 && perm_gap < 1e-12;
  return {pass, format("constant %s; ABAB oracle gap %.1e; relabeling gap %.1e", constant_zero ? "exactly 0" : "NONZERO",
                       abab_gap, perm_gap)};
}

// --- 8: determinism -----------------------------------------------------------

Outcome determinism() {
  using testsupport::file_bytes;
  clifixture::Fixture fx("acceptance_determinism");
  const auto& d = fx.dir;
  bool ok = fx.train(d / "a.crbm") == 0 && fx.train(d / "b.crbm") == 0;
  const bool train_same = ok && file_bytes(d / "a.crbm") == file_bytes(d / "b.crbm") &&
                          file_bytes(d / "a.crbm.log.csv") == file_bytes(d / "b.crbm.log.csv");

  ok = fx.extract(d / "t.tmpl") == 0 && fx.sample(d / "a.crbm", d / "t.tmpl", d / "s1") == 0 &&
       fx.sample(d / "a.crbm", d / "t.tmpl", d / "s2") == 0;
  bool sample_same = ok;
  int sample_files = 0;
  if (ok) {
    for (const auto& entry : std::filesystem::directory_iterator(d / "s1")) {
      ++sample_files;
      sample_same = sample_same && file_bytes(entry.path()) == file_bytes(d / "s2" / entry.path().filename());
    }
  }
  sample_same = sample_same && sample_files > 0;

  auto eval = [&](const std::string& tag) {
    std::vector<std::string> args = {"eval", "--mode", "ir", "--out", (d / ("ir" + tag + ".csv")).string(),
                                     "--summary", (d / ("sum" + tag + ".csv")).string()};
    for (const auto& entry : std::filesystem::directory_iterator(d / "s1")) {
      if (entry.path().extension() == ".prl") args.push_back("samples=" + entry.path().string());
    }
    for (const auto& p : fx.pieces) args.push_back("corpus=" + p.string());
    return fx.run(args);
  };
  const bool eval_same = eval("1") == 0 && eval("2") == 0 && file_bytes(d / "ir1.csv") == file_bytes(d / "ir2.csv") &&
                         file_bytes(d / "sum1.csv") == file_bytes(d / "sum2.csv");
  return {train_same && sample_same && eval_same,
          format("train %s, sample %s (%d files), eval %s", train_same ? "identical" : "DIFFERS",
                 sample_same ? "identical" : "DIFFERS", sample_files, eval_same ? "identical" : "DIFFERS")};
}

// --- 9: template self-consistency ---------------------------------------------

Outcome template_self_consistency() {
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const Matrix x = i % 2 ? testsupport::random_matrix(64, 12, 900 + i) : testsupport::random_binary(64, 12, 900 + i);
    const StructureTemplate tmpl = extract_template(x, TemplateConfig{});
    worst = std::max(worst, std::abs(total_cost(tmpl, x).total));
  }
  return {worst <= 1e-12, format("max |total_cost(x, x)| = %.1e over 10 pieces", worst)};
}

// --- 10: key-profile constants ------------------------------------------------

Outcome key_profile_constants() {
  const std::array<double, 12> major = {5, 2, 3.5, 2, 4.5, 4, 2, 4.5, 2, 3.5, 1.5, 4};
  const std::array<double, 12> minor = {5, 2, 3.5, 4.5, 2, 4, 2, 4.5, 3.5, 2, 1.5, 4};
  const bool constants = KeyProfiles::major == major && KeyProfiles::minor == minor;

  double worst = 0.0;
  for (int octaves : {1, 2}) {
    for (int window : {1, 4}) {
      const int pitches = 12 * octaves;
      const Matrix zeros = key_estimation(Matrix::Zero(16, pitches), window, octaves);
      const Matrix ones = key_estimation(Matrix::Ones(16, pitches), window, octaves);
      worst = std::max(worst, zeros.cwiseAbs().maxCoeff());
      worst = std::max(worst, (ones.array() - window * octaves * 38.5).abs().maxCoeff());
    }
  }
  return {constants && worst < 1e-9,
          format("profiles %s; max deviation from 0 and M*O*38.5: %.1e", constants ? "exact" : "DIFFER", worst)};
}

}  // namespace

int main() {
  int failures = 0;
  auto run = [&](int number, const char* name, double limit_seconds, const std::function<Outcome()>& criterion) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o = criterion();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit_seconds > 0 && seconds > limit_seconds) {
      o.pass = false;
      o.detail += format(" (over the %.0f s budget)", limit_seconds);
    }
    if (!o.pass) ++failures;
    std::printf("%s %d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", number, name, o.detail.c_str(), seconds);
    std::fflush(stdout);
  };

  run(1, "gradient correctness", 120, gradient_correctness);
  run(2, "adjoint identity", 0, adjoint_identity);

  const auto train_start = std::chrono::steady_clock::now();
  const CrbmParams toy = train_toy_model();
  const double train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - train_start).count();
  std::printf("toy model trained in %.1f s\n", train_seconds);
  run(3, "cost vs free energy quadrants", 15 * 60 - train_seconds, [&] { return quadrants(toy); });
  run(4, "IR ordering", 30 * 60 - train_seconds, [&] { return ir_ordering(toy); });

  run(5, "SA statistics", 0, sa_statistics);
  run(6, "clamp invariant", 0, clamp_invariant);
  run(7, "IR oracles", 0, ir_oracles);
  run(8, "determinism", 0, determinism);
  run(9, "template self-consistency", 0, template_self_consistency);
  run(10, "key-profile constants", 0, key_profile_constants);
  return failures == 0 ? 0 : 1;
}

#include "crbmgen/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace crbmgen {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* begin = value.data();
  const char* end = begin + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("invalid value \"" + value + "\" for key " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("invalid boolean \"" + value + "\" for key " + key);
}

std::string show(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

struct Entry {
  ConfigKey doc;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

template <typename T>
Entry make(std::string name, std::string desc, T default_value, std::function<T&(RunConfig&)> field) {
  std::string shown;
  if constexpr (std::is_same_v<T, bool>) {
    shown = default_value ? "true" : "false";
  } else if constexpr (std::is_floating_point_v<T>) {
    shown = show(default_value);
  } else {
    shown = std::to_string(default_value);
  }
  return {{std::move(name), shown, std::move(desc)},
          [field](RunConfig& cfg, const std::string& key, const std::string& value) {
            if constexpr (std::is_same_v<T, bool>) {
              field(cfg) = parse_bool(key, value);
            } else {
              field(cfg) = parse_number<T>(key, value);
            }
          }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    const RunConfig d;
    std::vector<Entry> t;
    t.push_back({{"seed", "(required)", "seed for every random draw in train and sample"},
                 [](RunConfig& c, const std::string& k, const std::string& v) {
                   c.seed = parse_number<std::uint64_t>(k, v);
                 }});
    // ingestion
    t.push_back(make<int>("pitch_base", "MIDI pitch of roll row 0 (28 = E1)", d.ingest.pitch_base,
                          [](RunConfig& c) -> int& { return c.ingest.pitch_base; }));
    t.push_back(make<int>("pitch_count", "number of pitch rows (64 covers MIDI 28-91)", d.ingest.pitch_count,
                          [](RunConfig& c) -> int& { return c.ingest.pitch_count; }));
    t.push_back(make<int>("t_steps", "fixed roll length for MIDI ingestion; 0 derives it from the notes",
                          d.ingest.t_steps, [](RunConfig& c) -> int& { return c.ingest.t_steps; }));
    t.push_back(make<int>("length_multiple", "derived roll lengths are rounded up to a multiple of this",
                          d.ingest.length_multiple, [](RunConfig& c) -> int& { return c.ingest.length_multiple; }));
    t.push_back(make<bool>("augment_keys", "train on every piece transposed by 0..+11 semitones", d.augment_keys,
                           [](RunConfig& c) -> bool& { return c.augment_keys; }));
    // architecture
    t.push_back(make<int>("filters", "number of convolution filters K (2048 hidden units in the reference setup)",
                          d.arch.filters, [](RunConfig& c) -> int& { return c.arch.filters; }));
    t.push_back(make<int>("filter_width", "filter width R in time steps (17)", d.arch.filter_width,
                          [](RunConfig& c) -> int& { return c.arch.filter_width; }));
    t.push_back(make<int>("stride", "convolution stride d (4)", d.arch.stride,
                          [](RunConfig& c) -> int& { return c.arch.stride; }));
    // training
    t.push_back(make<double>("learning_rate", "PCD learning rate (15e-4)", d.train.learning_rate,
                             [](RunConfig& c) -> double& { return c.train.learning_rate; }));
    t.push_back(make<int>("particles", "persistent fantasy particles (10)", d.train.particles,
                          [](RunConfig& c) -> int& { return c.train.particles; }));
    t.push_back(make<double>("l1", "L1 weight shrinkage strength (8e-4)", d.train.l1,
                             [](RunConfig& c) -> double& { return c.train.l1; }));
    t.push_back(make<double>("l2", "L2 weight decay strength (1e-2)", d.train.l2,
                             [](RunConfig& c) -> double& { return c.train.l2; }));
    t.push_back(make<double>("max_norm", "per-filter norm cap; <= 0 disables it", d.train.max_norm,
                             [](RunConfig& c) -> double& { return c.train.max_norm; }));
    t.push_back(make<double>("sparsity_target", "target mean hidden activation", d.train.sparsity_target,
                             [](RunConfig& c) -> double& { return c.train.sparsity_target; }));
    t.push_back(make<double>("sparsity_strength", "pull of hidden biases toward the sparsity target",
                             d.train.sparsity_strength,
                             [](RunConfig& c) -> double& { return c.train.sparsity_strength; }));
    t.push_back(make<double>("reset_threshold", "mean activation above which a unit is re-initialized (0.85)",
                             d.train.reset_threshold, [](RunConfig& c) -> double& { return c.train.reset_threshold; }));
    t.push_back(make<int>("reset_sample", "training instances used for the per-epoch dead-unit check",
                          d.train.reset_sample, [](RunConfig& c) -> int& { return c.train.reset_sample; }));
    t.push_back(make<int>("epochs", "training epochs", d.train.epochs,
                          [](RunConfig& c) -> int& { return c.train.epochs; }));
    t.push_back(make<int>("batch_size", "training instances per update (1)", d.train.batch_size,
                          [](RunConfig& c) -> int& { return c.train.batch_size; }));
    t.push_back(make<int>("instance_steps", "length of one training instance (512); 0 keeps whole pieces",
                          d.train.instance_steps, [](RunConfig& c) -> int& { return c.train.instance_steps; }));
    t.push_back(make<double>("init_std", "standard deviation of initial filter weights", d.train.init_std,
                             [](RunConfig& c) -> double& { return c.train.init_std; }));
    // template
    t.push_back(make<int>("lambda", "self-similarity tile width (8 = half a bar)", d.tmpl.lambda,
                          [](RunConfig& c) -> int& { return c.tmpl.lambda; }));
    t.push_back(make<int>("key_window", "tonality estimation window in steps (4)", d.tmpl.key_window,
                          [](RunConfig& c) -> int& { return c.tmpl.key_window; }));
    t.push_back(make<int>("bar_len", "steps per bar for the onset profile (16 = 4/4)", d.tmpl.bar_len,
                          [](RunConfig& c) -> int& { return c.tmpl.bar_len; }));
    t.push_back(make<int>("octaves", "octaves folded for key estimation; 0 = ceil(pitch_count / 12)",
                          d.tmpl.octaves, [](RunConfig& c) -> int& { return c.tmpl.octaves; }));
    t.push_back(make<double>("w_selfsim", "self-similarity weight (1.5)", d.tmpl.weights.selfsim,
                             [](RunConfig& c) -> double& { return c.tmpl.weights.selfsim; }));
    t.push_back(make<double>("w_tonal", "tonality weight (5.0)", d.tmpl.weights.tonal,
                             [](RunConfig& c) -> double& { return c.tmpl.weights.tonal; }));
    t.push_back(make<double>("w_meter", "meter weight (0.5)", d.tmpl.weights.meter,
                             [](RunConfig& c) -> double& { return c.tmpl.weights.meter; }));
    // sampling
    t.push_back(make<int>("outer_iters", "constrained sampling iterations N (250)", d.sampler.outer_iters,
                          [](RunConfig& c) -> int& { return c.sampler.outer_iters; }));
    t.push_back(make<int>("inner_iters", "Gibbs blocks per iteration (15)", d.sampler.inner_iters,
                          [](RunConfig& c) -> int& { return c.sampler.inner_iters; }));
    t.push_back(make<int>("gd_phase_steps", "GD steps opening each iteration (20)", d.sampler.gd_phase_steps,
                          [](RunConfig& c) -> int& { return c.sampler.gd_phase_steps; }));
    t.push_back(make<double>("gd_phase_lr", "learning rate of the GD phase (10)", d.sampler.gd_phase_lr,
                             [](RunConfig& c) -> double& { return c.sampler.gd_phase_lr; }));
    t.push_back(make<int>("gs_block_steps", "Gibbs steps per block (100)", d.sampler.gs_block_steps,
                          [](RunConfig& c) -> int& { return c.sampler.gs_block_steps; }));
    t.push_back(make<double>("interleaved_gd_lr", "learning rate of the GD step after each block (5)",
                             d.sampler.interleaved_gd_lr,
                             [](RunConfig& c) -> double& { return c.sampler.interleaved_gd_lr; }));
    t.push_back(make<int>("warmup_iters", "iterations observed to calibrate the standardizer", d.sampler.warmup_iters,
                          [](RunConfig& c) -> int& { return c.sampler.warmup_iters; }));
    t.push_back(make<int>("n_solutions", "independent sampling chains (20)", d.n_solutions,
                          [](RunConfig& c) -> int& { return c.n_solutions; }));
    t.push_back(make<int>("select", "best chains kept (4)", d.select,
                          [](RunConfig& c) -> int& { return c.select; }));
    // evaluation and output
    t.push_back(make<double>("threshold", "binarization threshold for MIDI export and IR", d.threshold,
                             [](RunConfig& c) -> double& { return c.threshold; }));
    t.push_back(make<int>("keyscape_levels", "keyscape levels (clamped to the roll length)", d.keyscape_levels,
                          [](RunConfig& c) -> int& { return c.keyscape_levels; }));
    t.push_back(make<int>("threads", "maximum worker threads", d.threads,
                          [](RunConfig& c) -> int& { return c.threads; }));
    return t;
  }();
  return table;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const Entry& e : entries()) {
    if (e.doc.name == key) {
      e.set(*this, key, trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key \"" + key + "\"");
}

void RunConfig::apply_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

void RunConfig::apply_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  apply_text(buf.str(), path.string());
}

void RunConfig::require_seed() {
  if (!seed) throw ConfigError("this command needs an explicit seed (set seed = <integer>)");
  train.rng_seed = *seed;
  sampler.rng_seed = *seed;
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const Entry& e : entries()) out.push_back(e.doc);
    return out;
  }();
  return keys;
}

std::string default_config_text() {
  std::string out;
  for (const ConfigKey& k : config_keys()) {
    out += "# " + k.description + "\n";
    out += (k.name == "seed" ? "# seed = 1" : k.name + " = " + k.default_value) + "\n";
  }
  return out;
}

}  // namespace crbmgen

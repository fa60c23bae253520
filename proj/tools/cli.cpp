#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <ostream>

#include "crbmgen/binary_io.hpp"
#include "crbmgen/config.hpp"
#include "crbmgen/constraints.hpp"
#include "crbmgen/crbm.hpp"
#include "crbmgen/eval.hpp"
#include "crbmgen/midi.hpp"
#include "crbmgen/pianoroll.hpp"
#include "crbmgen/sampler.hpp"
#include "crbmgen/svg.hpp"
#include "crbmgen/train.hpp"

namespace crbmgen::cli {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  int threads = 0;
};

RunConfig load_config(const CommonOptions& opts) {
  RunConfig cfg;
  if (!opts.config_path.empty()) cfg.apply_file(opts.config_path);
  for (const std::string& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got \"" + kv + "\"");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opts.threads > 0) cfg.threads = opts.threads;
  if (cfg.threads < 1) throw ConfigError("threads must be at least 1");
  return cfg;
}

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config_path, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", opts.overrides, "override one config key (key=value), repeatable");
  cmd->add_option("--threads", opts.threads, "cap on worker threads (overrides the threads key)");
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

PianoRoll load_piece(const fs::path& path, const IngestConfig& ingest, std::ostream& err) {
  const std::string ext = lower_extension(path);
  if (ext == ".prl") return load_roll(path);
  if (ext == ".mid" || ext == ".midi") {
    IngestResult r = load_midi(path, ingest);
    if (r.dropped_out_of_range > 0 || r.dropped_beyond_end > 0) {
      err << path.string() << ": dropped " << r.dropped_out_of_range << " out-of-range and "
          << r.dropped_beyond_end << " late notes\n";
    }
    return std::move(r.roll);
  }
  throw FormatError(path.string() + ": expected a .prl, .mid or .midi file");
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

std::string index_name(const char* prefix, int i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%02d%s", prefix, i, ext);
  return buf;
}

int cmd_train(const CommonOptions& opts, const fs::path& manifest, const fs::path& out_model, fs::path log_path,
              std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_config(opts);
  cfg.require_seed();
  cfg.train.validate();

  Corpus corpus;
  for (const fs::path& path : read_manifest(manifest)) {
    corpus.add(load_piece(path, cfg.ingest, err), path.filename().string());
  }
  if (corpus.pieces.empty()) throw FormatError("manifest " + manifest.string() + " lists no pieces");
  if (cfg.augment_keys) corpus = augment_all_keys(corpus);

  TrainResult result = train_crbm(corpus, cfg.arch, cfg.train, [&](const TrainLogRow& row) {
    out << "epoch " << row.epoch << " free_energy " << fmt("%.6g", row.mean_free_energy) << " activation "
        << fmt("%.4f", row.mean_hidden_activation) << " resets " << row.reset_units << "\n";
  });
  save_params(out_model, result.params);

  if (log_path.empty()) log_path = fs::path(out_model.string() + ".log.csv");
  std::string csv = "epoch,mean_free_energy,mean_hidden_activation,reset_units\n";
  for (const TrainLogRow& row : result.log) {
    csv += std::to_string(row.epoch) + "," + fmt("%.17g", row.mean_free_energy) + "," +
           fmt("%.17g", row.mean_hidden_activation) + "," + std::to_string(row.reset_units) + "\n";
  }
  io::write_text(log_path, csv);
  out << "wrote " << out_model.string() << " and " << log_path.string() << "\n";
  return kExitOk;
}

int cmd_extract(const CommonOptions& opts, const fs::path& input, const fs::path& out_template, std::ostream& out,
                std::ostream& err) {
  const RunConfig cfg = load_config(opts);
  const PianoRoll roll = load_piece(input, cfg.ingest, err);
  save_template(out_template, extract_template(roll, cfg.tmpl));
  out << "wrote " << out_template.string() << " (" << roll.t_steps() << " x " << roll.pitch_count() << ")\n";
  return kExitOk;
}

int cmd_sample(const CommonOptions& opts, const fs::path& model_path, const fs::path& template_path,
               const fs::path& out_dir, std::ostream& out) {
  RunConfig cfg = load_config(opts);
  cfg.require_seed();
  cfg.sampler.validate();
  if (cfg.n_solutions < 1) throw ConfigError("n_solutions must be at least 1");
  if (cfg.select < 1 || cfg.select > cfg.n_solutions) throw ConfigError("select must lie in [1, n_solutions]");

  const CrbmParams model = load_params(model_path);
  const StructureTemplate tmpl = load_template(template_path);
  if (model.pitch_count() != tmpl.pitch_count) {
    throw DimensionError("model has " + std::to_string(model.pitch_count()) + " pitches but the template has " +
                         std::to_string(tmpl.pitch_count));
  }
  model.hidden_length(tmpl.t_steps);

  const BatchResult batch =
      batch_sample(model, tmpl, cfg.sampler, cfg.n_solutions, cfg.select, cfg.ingest.pitch_base, cfg.threads);

  fs::create_directories(out_dir);
  for (const BatchSample& chain : batch.chains) {
    io::write_text(out_dir / index_name("trace_chain", chain.chain, ".csv"), trace_csv(chain.result.trace));
  }
  std::string selection = "rank,chain,seed,best_score,file\n";
  for (std::size_t rank = 0; rank < batch.selected.size(); ++rank) {
    const BatchSample& s = batch.selected[rank];
    const std::string stem = index_name("sample_", static_cast<int>(rank), "");
    save_roll(out_dir / (stem + ".prl"), s.result.best);
    io::write_file(out_dir / (stem + ".mid"), pianoroll_to_midi(s.result.best, cfg.threshold));
    selection += std::to_string(rank) + "," + std::to_string(s.chain) + "," + std::to_string(s.seed) + "," +
                 fmt("%.17g", s.result.best_score) + "," + stem + ".prl\n";
  }
  io::write_text(out_dir / "selection.csv", selection);
  out << "wrote " << batch.selected.size() << " samples and " << batch.chains.size() << " traces to "
      << out_dir.string() << "\n";
  return kExitOk;
}

struct EvalInput {
  std::string group;
  fs::path path;
};

EvalInput parse_eval_input(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0) return {"all", fs::u8path(arg)};
  return {arg.substr(0, eq), fs::u8path(arg.substr(eq + 1))};
}

int cmd_eval_ir(const RunConfig& cfg, const std::vector<EvalInput>& inputs, const fs::path& out_path,
                const fs::path& summary_path, const std::vector<std::string>& compare, std::ostream& out,
                std::ostream& err) {
  std::vector<NamedRolls> groups;
  std::map<std::string, std::size_t> group_index;
  std::string report = "group,path,average_ir,n_slices,vocab_size\n";
  for (const EvalInput& in : inputs) {
    PianoRoll roll = load_piece(in.path, cfg.ingest, err);
    const IrReport ir = information_rate(roll, cfg.threshold);
    report += in.group + "," + in.path.string() + "," + fmt("%.17g", ir.average_ir) + "," +
              std::to_string(ir.n_slices) + "," + std::to_string(ir.vocab_size) + "\n";
    auto [it, inserted] = group_index.try_emplace(in.group, groups.size());
    if (inserted) groups.emplace_back(in.group, std::vector<PianoRoll>{});
    groups[it->second].second.push_back(std::move(roll));
  }

  std::vector<std::pair<std::string, std::string>> pairs;
  for (const std::string& arg : compare) {
    const auto comma = arg.find(',');
    if (comma == std::string::npos) throw ConfigError("--compare expects a,b, got \"" + arg + "\"");
    std::pair<std::string, std::string> p{arg.substr(0, comma), arg.substr(comma + 1)};
    for (const std::string& name : {p.first, p.second}) {
      if (!group_index.count(name)) throw ConfigError("--compare names unknown group \"" + name + "\"");
    }
    pairs.push_back(std::move(p));
  }

  if (out_path.empty()) {
    out << report;
  } else {
    io::write_text(out_path, report);
  }
  if (!summary_path.empty() || !pairs.empty()) {
    const std::string summary = comparison_csv(compare_ir(groups, pairs, cfg.threshold));
    if (summary_path.empty()) {
      out << summary;
    } else {
      io::write_text(summary_path, summary);
    }
  }
  return kExitOk;
}

int cmd_eval_render(const RunConfig& cfg, const std::vector<EvalInput>& inputs, const fs::path& out_dir,
                    std::ostream& out, std::ostream& err) {
  const fs::path dir = out_dir.empty() ? fs::path(".") : out_dir;
  fs::create_directories(dir);
  for (const EvalInput& in : inputs) {
    const PianoRoll roll = load_piece(in.path, cfg.ingest, err);
    const std::string stem = in.path.stem().string();
    const std::string name = in.path.filename().string();
    io::write_text(dir / (stem + "_selfsim.svg"),
                   render_heatmap(self_similarity(roll.data(), cfg.tmpl.lambda), name + " self-similarity"));
    io::write_text(dir / (stem + "_onsets.svg"),
                   render_bars(onset_profile(roll.data(), cfg.tmpl.bar_len), name + " onset profile"));
    int levels = std::clamp(cfg.keyscape_levels, 1, 30);
    while (levels > 1 && (1LL << (levels - 1)) > roll.t_steps()) --levels;
    io::write_text(dir / (stem + "_keyscape.svg"), render_keyscape(keyscape(roll, levels), name + " keyscape"));
    out << "rendered " << name << "\n";
  }
  return kExitOk;
}

int report_error(std::ostream& err, const char* kind, const std::exception& e, int code) {
  err << "error (" << kind << "): " << e.what() << "\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Convolutional RBM music generation with structural constraints", "crbmgen"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "expand help for every subcommand");

  CommonOptions common;
  fs::path manifest;
  fs::path model_path;
  fs::path template_path;
  fs::path input_path;
  fs::path out_path;
  fs::path log_path;
  fs::path summary_path;
  std::string mode = "ir";
  std::vector<std::string> eval_inputs;
  std::vector<std::string> compare;

  CLI::App* train = app.add_subcommand("train", "train a C-RBM on the pieces listed in a manifest");
  add_common(train, common);
  train->add_option("-m,--manifest", manifest, "text file with one .mid/.midi/.prl path per line")->required();
  train->add_option("-o,--out", out_path, "output model file (CRBM1)")->required();
  train->add_option("--log", log_path, "training log CSV (default: <out>.log.csv)");

  CLI::App* extract = app.add_subcommand("extract", "extract a structure template from a piece");
  add_common(extract, common);
  extract->add_option("-t,--template", input_path, "template piece (.mid/.midi/.prl)")->required();
  extract->add_option("-o,--out", out_path, "output template file (TMPL1)")->required();

  CLI::App* sample = app.add_subcommand("sample", "constrained sampling from a trained model");
  add_common(sample, common);
  sample->add_option("-m,--model", model_path, "model file (CRBM1)")->required();
  sample->add_option("-t,--template", template_path, "template file (TMPL1)")->required();
  sample->add_option("-o,--out-dir", out_path, "directory for samples, traces and selection.csv")->required();

  CLI::App* eval = app.add_subcommand("eval", "information rate reports or SVG renderings");
  add_common(eval, common);
  eval->add_option("--mode", mode, "ir or render");
  eval->add_option("inputs", eval_inputs, "pieces as [group=]path (.mid/.midi/.prl)")->required();
  eval->add_option("-o,--out", out_path, "ir: per-piece CSV (default stdout); render: output directory");
  eval->add_option("--summary", summary_path, "ir: per-group summary CSV");
  eval->add_option("--compare", compare, "ir: Welch comparison of two groups as a,b, repeatable");

  CLI::App* config = app.add_subcommand("config", "print every config key with its default");

  std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train->parsed()) return cmd_train(common, manifest, out_path, log_path, out, err);
    if (extract->parsed()) return cmd_extract(common, input_path, out_path, out, err);
    if (sample->parsed()) return cmd_sample(common, model_path, template_path, out_path, out);
    if (config->parsed()) {
      out << default_config_text();
      return kExitOk;
    }
    if (eval->parsed()) {
      if (mode != "ir" && mode != "render") throw ConfigError("unknown eval mode \"" + mode + "\"");
      const RunConfig cfg = load_config(common);
      std::vector<EvalInput> inputs;
      for (const std::string& a : eval_inputs) inputs.push_back(parse_eval_input(a));
      if (mode == "ir") return cmd_eval_ir(cfg, inputs, out_path, summary_path, compare, out, err);
      return cmd_eval_render(cfg, inputs, out_path, out, err);
    }
  } catch (const ConfigError& e) {
    return report_error(err, "config", e, kExitUsage);
  } catch (const DimensionError& e) {
    return report_error(err, "dimension", e, kExitUsage);
  } catch (const Error& e) {
    return report_error(err, "data", e, kExitData);
  } catch (const fs::filesystem_error& e) {
    return report_error(err, "io", e, kExitData);
  }
  return kExitUsage;
}

}  // namespace crbmgen::cli

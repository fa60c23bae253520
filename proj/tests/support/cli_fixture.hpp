#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "crbmgen/binary_io.hpp"
#include "crbmgen/constraints.hpp"
#include "crbmgen/pianoroll.hpp"
#include "support/synthetic.hpp"
#include "support/test_support.hpp"

namespace clifixture {

/// Scratch directory holding four 32-step pieces, a manifest and a small
/// config that keeps every command fast.
struct Fixture {
  std::filesystem::path dir;
  std::filesystem::path manifest;
  std::filesystem::path config;
  std::vector<std::filesystem::path> pieces;
  std::ostringstream out;
  std::ostringstream err;

  explicit Fixture(const std::string& name) : dir(testsupport::scratch_dir(name)) {
    const crbmgen::Corpus corpus = synthetic::pattern_corpus(4, 32, 12, 11, 16);
    std::string listing;
    for (std::size_t i = 0; i < corpus.pieces.size(); ++i) {
      const auto path = dir / ("piece" + std::to_string(i) + ".prl");
      crbmgen::save_roll(path, corpus.pieces[i]);
      pieces.push_back(path);
      listing += path.filename().string() + "\n";
    }
    manifest = dir / "manifest.txt";
    crbmgen::io::write_text(manifest, listing);
    config = dir / "small.cfg";
    crbmgen::io::write_text(config,
                            "pitch_count = 12\npitch_base = 60\naugment_keys = false\n"
                            "filters = 4\nfilter_width = 4\nstride = 2\nparticles = 2\nepochs = 5\n"
                            "instance_steps = 0\nreset_sample = 4\n"
                            "lambda = 4\nkey_window = 2\nbar_len = 8\n"
                            "outer_iters = 3\ninner_iters = 2\ngd_phase_steps = 2\ngs_block_steps = 2\n"
                            "warmup_iters = 2\nn_solutions = 2\nselect = 1\nkeyscape_levels = 3\n");
  }

  crbmgen::TemplateConfig template_config() const {
    crbmgen::TemplateConfig t;
    t.lambda = 4;
    t.key_window = 2;
    t.bar_len = 8;
    return t;
  }

  int run(std::vector<std::string> args) {
    out.str("");
    err.str("");
    args.insert(args.begin(), "crbmgen");
    return crbmgen::cli::run(args, out, err);
  }

  int train(const std::filesystem::path& model) {
    return run({"train", "--manifest", manifest.string(), "--out", model.string(), "--config", config.string(),
                "--set", "seed=5"});
  }

  int extract(const std::filesystem::path& tmpl) {
    return run({"extract", "--template", pieces[0].string(), "--out", tmpl.string(), "--config", config.string()});
  }

  int sample(const std::filesystem::path& model, const std::filesystem::path& tmpl,
             const std::filesystem::path& out_dir) {
    return run({"sample", "--model", model.string(), "--template", tmpl.string(), "--out-dir", out_dir.string(),
                "--config", config.string(), "--set", "seed=9", "--threads", "2"});
  }
};

}  // namespace clifixture

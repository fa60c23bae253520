#include <doctest.h>

#include <sstream>

#include "cli.hpp"
#include "crbmgen/binary_io.hpp"
#include "crbmgen/constraints.hpp"
#include "crbmgen/crbm.hpp"
#include "crbmgen/midi.hpp"
#include "support/cli_fixture.hpp"
#include "support/test_support.hpp"

using namespace crbmgen;
using clifixture::Fixture;
using testsupport::file_bytes;

TEST_CASE("help and usage errors") {
  std::ostringstream out;
  std::ostringstream err;
  CHECK(cli::run({"crbmgen", "--help"}, out, err) == 0);
  CHECK(out.str().find("train") != std::string::npos);
  CHECK(cli::run({"crbmgen"}, out, err) == 2);
  CHECK(cli::run({"crbmgen", "bogus"}, out, err) == 2);
  CHECK(cli::run({"crbmgen", "train", "--manifest"}, out, err) == 2);
  CHECK(cli::run({"crbmgen", "config"}, out, err) == 0);
  CHECK(out.str().find("learning_rate = 0.0015") != std::string::npos);
}

TEST_CASE("train: missing manifest exits 3, missing seed exits 2, unknown key exits 2") {
  Fixture fx("cli_train_errors");
  CHECK(fx.run({"train", "--manifest", (fx.dir / "nope.txt").string(), "--out", (fx.dir / "m.crbm").string(),
                "--set", "seed=1"}) == 3);
  CHECK(fx.err.str().find("nope.txt") != std::string::npos);
  CHECK(fx.run({"train", "--manifest", fx.manifest.string(), "--out", (fx.dir / "m.crbm").string(), "--config",
                fx.config.string()}) == 2);
  CHECK(fx.err.str().find("seed") != std::string::npos);
  CHECK(fx.run({"train", "--manifest", fx.manifest.string(), "--out", (fx.dir / "m.crbm").string(), "--config",
                fx.config.string(), "--set", "seed=", "--set", "epochs=1"}) == 2);
  CHECK(fx.run({"train", "--manifest", fx.manifest.string(), "--out", (fx.dir / "m.crbm").string(), "--config",
                fx.config.string(), "--set", "colour=blue"}) == 2);
}

TEST_CASE("train: tiny corpus, five epochs, log rows and bit-identical reruns") {
  Fixture fx("cli_train");
  const auto model_a = fx.dir / "a.crbm";
  const auto model_b = fx.dir / "b.crbm";
  REQUIRE(fx.train(model_a) == 0);
  REQUIRE(fx.train(model_b) == 0);
  CHECK(file_bytes(model_a) == file_bytes(model_b));
  CHECK(file_bytes(model_a.string() + ".log.csv") == file_bytes(model_b.string() + ".log.csv"));
  const auto log = io::read_file(model_a.string() + ".log.csv");
  const std::string text(log.begin(), log.end());
  CHECK(text.rfind("epoch,mean_free_energy,mean_hidden_activation,reset_units\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);
  const CrbmParams params = load_params(model_a);
  CHECK(params.filters() == 4);
  CHECK(params.pitch_count() == 12);
}

TEST_CASE("train accepts MIDI inputs listed in the manifest") {
  Fixture fx("cli_train_midi");
  PianoRoll roll(16, 12, 60);
  for (int t = 0; t < 16; t += 4) roll(t, t % 12) = roll(t + 1, t % 12) = 1.0;
  io::write_file(fx.dir / "piece.mid", pianoroll_to_midi(roll));
  io::write_text(fx.dir / "midi.txt", "piece.mid\n");
  CHECK(fx.run({"train", "--manifest", (fx.dir / "midi.txt").string(), "--out", (fx.dir / "m.crbm").string(),
                "--config", fx.config.string(), "--set", "seed=1"}) == 0);
  io::write_text(fx.dir / "bad.txt", "piece.wav\n");
  CHECK(fx.run({"train", "--manifest", (fx.dir / "bad.txt").string(), "--out", (fx.dir / "m.crbm").string(),
                "--config", fx.config.string(), "--set", "seed=1"}) == 3);
}

TEST_CASE("extract writes a template that round-trips") {
  Fixture fx("cli_extract");
  const auto out = fx.dir / "t.tmpl";
  REQUIRE(fx.extract(out) == 0);
  const StructureTemplate tmpl = load_template(out);
  CHECK(tmpl.t_steps == 32);
  CHECK(tmpl.pitch_count == 12);
  const StructureTemplate direct = extract_template(load_roll(fx.pieces[0]), fx.template_config());
  CHECK(encode_template(tmpl) == encode_template(decode_template(encode_template(direct))));
  CHECK(fx.run({"extract", "--template", (fx.dir / "missing.prl").string(), "--out", out.string()}) == 3);
}

TEST_CASE("sample: one selected roll plus two traces; reproducible; dimension mismatch exits 2") {
  Fixture fx("cli_sample");
  REQUIRE(fx.train(fx.dir / "m.crbm") == 0);
  REQUIRE(fx.extract(fx.dir / "t.tmpl") == 0);
  REQUIRE(fx.sample(fx.dir / "m.crbm", fx.dir / "t.tmpl", fx.dir / "run1") == 0);
  REQUIRE(fx.sample(fx.dir / "m.crbm", fx.dir / "t.tmpl", fx.dir / "run2") == 0);
  for (const char* name : {"sample_00.prl", "sample_00.mid", "trace_chain00.csv", "trace_chain01.csv",
                           "selection.csv"}) {
    CHECK(std::filesystem::exists(fx.dir / "run1" / name));
    CHECK(file_bytes(fx.dir / "run1" / name) == file_bytes(fx.dir / "run2" / name));
  }
  CHECK_FALSE(std::filesystem::exists(fx.dir / "run1" / "sample_01.prl"));
  CHECK(load_roll(fx.dir / "run1" / "sample_00.prl").t_steps() == 32);

  // a template with a different pitch count
  const StructureTemplate wide =
      extract_template(testsupport::random_binary(32, 13, 1, 0.3), fx.template_config());
  save_template(fx.dir / "wide.tmpl", wide);
  CHECK(fx.sample(fx.dir / "m.crbm", fx.dir / "wide.tmpl", fx.dir / "run3") == 2);
}

TEST_CASE("eval ir: constant roll reports IR 0; unknown mode exits 2") {
  Fixture fx("cli_eval");
  save_roll(fx.dir / "flat.prl", PianoRoll(16, 12, 60));
  REQUIRE(fx.run({"eval", "--mode", "ir", (fx.dir / "flat.prl").string(), "--out", (fx.dir / "ir.csv").string()}) ==
          0);
  const auto bytes = io::read_file(fx.dir / "ir.csv");
  const std::string csv(bytes.begin(), bytes.end());
  CHECK(csv == "group,path,average_ir,n_slices,vocab_size\nall," + (fx.dir / "flat.prl").string() + ",0,16,1\n");
  CHECK(fx.run({"eval", "--mode", "loud", (fx.dir / "flat.prl").string()}) == 2);
  CHECK(fx.run({"eval", "--mode", "ir", (fx.dir / "missing.prl").string()}) == 3);
  CHECK(fx.run({"eval", "--mode", "ir", (fx.dir / "flat.prl").string(), "--compare", "all,other"}) == 2);
}

TEST_CASE("eval ir: groups, summary, Welch comparison and determinism") {
  Fixture fx("cli_eval_groups");
  std::vector<std::string> args = {"eval", "--mode", "ir"};
  for (std::size_t i = 0; i < fx.pieces.size(); ++i) {
    args.push_back((i % 2 ? "odd=" : "even=") + fx.pieces[i].string());
  }
  std::vector<std::string> run1 = args;
  run1.insert(run1.end(), {"--out", (fx.dir / "ir1.csv").string(), "--summary", (fx.dir / "s1.csv").string(),
                           "--compare", "even,odd"});
  std::vector<std::string> run2 = args;
  run2.insert(run2.end(), {"--out", (fx.dir / "ir2.csv").string(), "--summary", (fx.dir / "s2.csv").string(),
                           "--compare", "even,odd"});
  REQUIRE(fx.run(run1) == 0);
  REQUIRE(fx.run(run2) == 0);
  CHECK(file_bytes(fx.dir / "ir1.csv") == file_bytes(fx.dir / "ir2.csv"));
  CHECK(file_bytes(fx.dir / "s1.csv") == file_bytes(fx.dir / "s2.csv"));
  const auto s = io::read_file(fx.dir / "s1.csv");
  const std::string summary(s.begin(), s.end());
  CHECK(summary.find("\neven,2,") != std::string::npos);
  CHECK(summary.find("\neven,odd,") != std::string::npos);
}

TEST_CASE("eval render: three SVG files per input, byte-stable") {
  Fixture fx("cli_render");
  REQUIRE(fx.run({"eval", "--mode", "render", fx.pieces[0].string(), "--config", fx.config.string(), "--out",
                  (fx.dir / "svg1").string()}) == 0);
  REQUIRE(fx.run({"eval", "--mode", "render", fx.pieces[0].string(), "--config", fx.config.string(), "--out",
                  (fx.dir / "svg2").string()}) == 0);
  const std::string stem = fx.pieces[0].stem().string();
  int files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(fx.dir / "svg1")) {
    ++files;
    CHECK(file_bytes(entry.path()) == file_bytes(fx.dir / "svg2" / entry.path().filename()));
  }
  CHECK(files == 3);
  for (const char* suffix : {"_selfsim.svg", "_onsets.svg", "_keyscape.svg"}) {
    CHECK(std::filesystem::exists(fx.dir / "svg1" / (stem + suffix)));
  }
}

TEST_CASE("commands do not modify their inputs") {
  Fixture fx("cli_inputs");
  const auto before = file_bytes(fx.pieces[0]);
  const auto manifest_before = file_bytes(fx.manifest);
  REQUIRE(fx.train(fx.dir / "m.crbm") == 0);
  REQUIRE(fx.extract(fx.dir / "t.tmpl") == 0);
  const auto model_before = file_bytes(fx.dir / "m.crbm");
  REQUIRE(fx.sample(fx.dir / "m.crbm", fx.dir / "t.tmpl", fx.dir / "out") == 0);
  CHECK(file_bytes(fx.pieces[0]) == before);
  CHECK(file_bytes(fx.manifest) == manifest_before);
  CHECK(file_bytes(fx.dir / "m.crbm") == model_before);
}

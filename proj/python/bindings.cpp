#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "crbmgen/config.hpp"
#include "crbmgen/constraints.hpp"
#include "crbmgen/crbm.hpp"
#include "crbmgen/eval.hpp"
#include "crbmgen/midi.hpp"
#include "crbmgen/pianoroll.hpp"
#include "crbmgen/sampler.hpp"
#include "crbmgen/svg.hpp"
#include "crbmgen/train.hpp"

namespace py = pybind11;
using namespace crbmgen;

namespace {

py::bytes to_bytes(const std::vector<std::uint8_t>& data) {
  return py::bytes(reinterpret_cast<const char*>(data.data()), data.size());
}

std::vector<std::uint8_t> from_bytes(const py::bytes& data) {
  const std::string s = data;
  return {s.begin(), s.end()};
}

Corpus make_corpus(const std::vector<PianoRoll>& rolls) {
  Corpus corpus;
  for (std::size_t i = 0; i < rolls.size(); ++i) corpus.add(rolls[i], "piece" + std::to_string(i));
  return corpus;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Convolutional RBM music generation with structural constraints";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", error.ptr());
  py::register_exception<FormatError>(m, "FormatError", error.ptr());
  py::register_exception<MidiParseError>(m, "MidiParseError", error.ptr());
  py::register_exception<EmptyPieceError>(m, "EmptyPieceError", error.ptr());
  py::register_exception<IoError>(m, "IoError", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("seed", &Rng::seed)
      .def("split", &Rng::split, py::arg("stream"))
      .def("uniform", &Rng::uniform);

  // --- pianoroll -----------------------------------------------------------

  py::class_<PianoRoll>(m, "PianoRoll")
      .def(py::init<int, int, int>(), py::arg("t_steps"), py::arg("pitch_count"),
           py::arg("pitch_base") = kDefaultPitchBase)
      .def(py::init<Matrix, int>(), py::arg("data"), py::arg("pitch_base") = kDefaultPitchBase)
      .def_property_readonly("t_steps", &PianoRoll::t_steps)
      .def_property_readonly("pitch_count", &PianoRoll::pitch_count)
      .def_property_readonly("pitch_base", &PianoRoll::pitch_base)
      .def_property_readonly("data", &PianoRoll::data)
      .def("binarized", &PianoRoll::binarized, py::arg("threshold") = 0.5)
      .def("active_cells", &PianoRoll::active_cells)
      .def(py::self == py::self)
      .def("__repr__", [](const PianoRoll& r) {
        return "<PianoRoll " + std::to_string(r.t_steps()) + "x" + std::to_string(r.pitch_count()) + " base " +
               std::to_string(r.pitch_base()) + ">";
      });

  m.def("transpose", [](const PianoRoll& r, int semitones) {
    TransposeResult t = transpose(r, semitones);
    return py::make_tuple(std::move(t.roll), t.dropped);
  }, py::arg("roll"), py::arg("semitones"));
  m.def("encode_roll", [](const PianoRoll& r) { return to_bytes(encode_roll(r)); });
  m.def("decode_roll", [](const py::bytes& b) { return decode_roll(from_bytes(b)); });
  m.def("save_roll", &save_roll, py::arg("path"), py::arg("roll"));
  m.def("load_roll", &load_roll, py::arg("path"));

  py::class_<IngestConfig>(m, "IngestConfig")
      .def(py::init<>())
      .def_readwrite("pitch_base", &IngestConfig::pitch_base)
      .def_readwrite("pitch_count", &IngestConfig::pitch_count)
      .def_readwrite("t_steps", &IngestConfig::t_steps)
      .def_readwrite("length_multiple", &IngestConfig::length_multiple);

  m.def("midi_to_pianoroll", [](const py::bytes& b, const IngestConfig& cfg) {
    return midi_to_pianoroll(from_bytes(b), cfg).roll;
  }, py::arg("midi"), py::arg("config") = IngestConfig{});
  m.def("load_midi", [](const std::filesystem::path& p, const IngestConfig& cfg) { return load_midi(p, cfg).roll; },
        py::arg("path"), py::arg("config") = IngestConfig{});
  m.def("pianoroll_to_midi", [](const PianoRoll& r, double threshold) {
    return to_bytes(pianoroll_to_midi(r, threshold));
  }, py::arg("roll"), py::arg("threshold") = 0.5);

  // --- crbm ----------------------------------------------------------------

  py::class_<CrbmParams>(m, "CrbmParams")
      .def(py::init<int, int, int, int>(), py::arg("filters"), py::arg("filter_width"), py::arg("pitch_count"),
           py::arg("stride"))
      .def_readwrite("weights", &CrbmParams::weights)
      .def_readwrite("visible_bias", &CrbmParams::visible_bias)
      .def_readwrite("hidden_bias", &CrbmParams::hidden_bias)
      .def_property_readonly("filters", &CrbmParams::filters)
      .def_property_readonly("filter_width", &CrbmParams::filter_width)
      .def_property_readonly("pitch_count", &CrbmParams::pitch_count)
      .def_property_readonly("stride", &CrbmParams::stride)
      .def("hidden_length", &CrbmParams::hidden_length, py::arg("t_steps"));

  m.def("init_params", [](int k, int r, int p, int d, double std, std::uint64_t seed) {
    Rng rng(seed);
    return init_params(k, r, p, d, std, rng);
  }, py::arg("filters"), py::arg("filter_width"), py::arg("pitch_count"), py::arg("stride"),
        py::arg("init_std") = 0.01, py::arg("seed") = 0);
  m.def("hidden_pre", py::overload_cast<const PianoRoll&, const CrbmParams&>(&hidden_pre), py::arg("roll"),
        py::arg("params"));
  m.def("hidden_probs", [](const PianoRoll& v, const CrbmParams& p) { return hidden_probs(v, p).values; },
        py::arg("roll"), py::arg("params"));
  m.def("visible_pre", &visible_pre, py::arg("hidden"), py::arg("params"), py::arg("t_steps"));
  m.def("visible_probs", [](const Matrix& h, const CrbmParams& p, int t, int base) {
    return visible_probs(HiddenState{h, false}, p, t, base);
  }, py::arg("hidden"), py::arg("params"), py::arg("t_steps"), py::arg("pitch_base") = kDefaultPitchBase);
  m.def("free_energy", &free_energy, py::arg("roll"), py::arg("params"));
  m.def("gibbs_chain", [](const PianoRoll& v0, const CrbmParams& p, int steps, std::uint64_t seed) {
    Rng rng(seed);
    ChainResult r = gibbs_chain(v0, p, steps, rng);
    return py::make_tuple(std::move(r.roll), std::move(r.free_energy_trace));
  }, py::arg("roll"), py::arg("params"), py::arg("steps"), py::arg("seed"));
  m.def("encode_params", [](const CrbmParams& p) { return to_bytes(encode_params(p)); });
  m.def("decode_params", [](const py::bytes& b) { return decode_params(from_bytes(b)); });
  m.def("save_params", &save_params, py::arg("path"), py::arg("params"));
  m.def("load_params", &load_params, py::arg("path"));

  // --- training ------------------------------------------------------------

  py::class_<CrbmArchitecture>(m, "CrbmArchitecture")
      .def(py::init<>())
      .def_readwrite("filters", &CrbmArchitecture::filters)
      .def_readwrite("filter_width", &CrbmArchitecture::filter_width)
      .def_readwrite("stride", &CrbmArchitecture::stride);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("particles", &TrainConfig::particles)
      .def_readwrite("l1", &TrainConfig::l1)
      .def_readwrite("l2", &TrainConfig::l2)
      .def_readwrite("max_norm", &TrainConfig::max_norm)
      .def_readwrite("sparsity_target", &TrainConfig::sparsity_target)
      .def_readwrite("sparsity_strength", &TrainConfig::sparsity_strength)
      .def_readwrite("reset_threshold", &TrainConfig::reset_threshold)
      .def_readwrite("reset_sample", &TrainConfig::reset_sample)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("instance_steps", &TrainConfig::instance_steps)
      .def_readwrite("init_std", &TrainConfig::init_std)
      .def_readwrite("rng_seed", &TrainConfig::rng_seed);

  py::class_<TrainLogRow>(m, "TrainLogRow")
      .def_readonly("epoch", &TrainLogRow::epoch)
      .def_readonly("mean_free_energy", &TrainLogRow::mean_free_energy)
      .def_readonly("mean_hidden_activation", &TrainLogRow::mean_hidden_activation)
      .def_readonly("reset_units", &TrainLogRow::reset_units);

  m.def("train", [](const std::vector<PianoRoll>& rolls, const CrbmArchitecture& arch, const TrainConfig& cfg) {
    TrainResult r;
    {
      py::gil_scoped_release release;
      r = train_crbm(make_corpus(rolls), arch, cfg);
    }
    return py::make_tuple(std::move(r.params), std::move(r.log));
  }, py::arg("rolls"), py::arg("architecture"), py::arg("config"));

  // --- constraints ---------------------------------------------------------

  py::class_<ConstraintWeights>(m, "ConstraintWeights")
      .def(py::init<>())
      .def_readwrite("selfsim", &ConstraintWeights::selfsim)
      .def_readwrite("tonal", &ConstraintWeights::tonal)
      .def_readwrite("meter", &ConstraintWeights::meter);

  py::class_<TemplateConfig>(m, "TemplateConfig")
      .def(py::init<>())
      .def_readwrite("lambda_", &TemplateConfig::lambda)
      .def_readwrite("key_window", &TemplateConfig::key_window)
      .def_readwrite("bar_len", &TemplateConfig::bar_len)
      .def_readwrite("octaves", &TemplateConfig::octaves)
      .def_readwrite("weights", &TemplateConfig::weights);

  py::class_<StructureTemplate>(m, "StructureTemplate")
      .def_readonly("t_steps", &StructureTemplate::t_steps)
      .def_readonly("pitch_count", &StructureTemplate::pitch_count)
      .def_readonly("selfsim_target", &StructureTemplate::selfsim_target)
      .def_readonly("key_target", &StructureTemplate::key_target)
      .def_readonly("onset_target", &StructureTemplate::onset_target)
      .def_readwrite("weights", &StructureTemplate::weights);

  py::class_<CostBreakdown>(m, "CostBreakdown")
      .def_readonly("total", &CostBreakdown::total)
      .def_readonly("selfsim", &CostBreakdown::selfsim)
      .def_readonly("tonal", &CostBreakdown::tonal)
      .def_readonly("meter", &CostBreakdown::meter);

  m.def("self_similarity", &self_similarity, py::arg("roll"), py::arg("lambda_"));
  m.def("key_estimation", &key_estimation, py::arg("roll"), py::arg("key_window"), py::arg("octaves"));
  m.def("onset_function", &onset_function, py::arg("roll"));
  m.def("onset_profile", &onset_profile, py::arg("roll"), py::arg("bar_len"));
  m.def("extract_template", py::overload_cast<const Matrix&, const TemplateConfig&>(&extract_template),
        py::arg("roll"), py::arg("config") = TemplateConfig{});
  m.def("total_cost", [](const StructureTemplate& t, const Matrix& v) { return total_cost(t, v); },
        py::arg("template"), py::arg("roll"));
  m.def("cost_gradient", [](const StructureTemplate& t, const Matrix& v) {
    Matrix grad;
    total_cost(t, v, &grad);
    return grad;
  }, py::arg("template"), py::arg("roll"));
  m.def("gd_step", py::overload_cast<const Matrix&, const StructureTemplate&, double>(&gd_step), py::arg("roll"),
        py::arg("template"), py::arg("gamma"));
  m.def("save_template", &save_template, py::arg("path"), py::arg("template"));
  m.def("load_template", &load_template, py::arg("path"));

  // --- sampler -------------------------------------------------------------

  py::class_<SamplerConfig>(m, "SamplerConfig")
      .def(py::init<>())
      .def_readwrite("outer_iters", &SamplerConfig::outer_iters)
      .def_readwrite("inner_iters", &SamplerConfig::inner_iters)
      .def_readwrite("gd_phase_steps", &SamplerConfig::gd_phase_steps)
      .def_readwrite("gd_phase_lr", &SamplerConfig::gd_phase_lr)
      .def_readwrite("gs_block_steps", &SamplerConfig::gs_block_steps)
      .def_readwrite("interleaved_gd_lr", &SamplerConfig::interleaved_gd_lr)
      .def_readwrite("warmup_iters", &SamplerConfig::warmup_iters)
      .def_readwrite("rng_seed", &SamplerConfig::rng_seed);

  py::class_<TraceRow>(m, "TraceRow")
      .def_readonly("iter", &TraceRow::iter)
      .def_readonly("free_energy", &TraceRow::free_energy)
      .def_readonly("cost", &TraceRow::cost)
      .def_readonly("std_free_energy", &TraceRow::std_free_energy)
      .def_readonly("std_cost", &TraceRow::std_cost)
      .def_readonly("accepted", &TraceRow::accepted)
      .def_readonly("best_score", &TraceRow::best_score);

  py::class_<SampleResult>(m, "SampleResult")
      .def_readonly("best", &SampleResult::best)
      .def_readonly("best_score", &SampleResult::best_score)
      .def_readonly("trace", &SampleResult::trace);

  m.def("temperature", &temperature, py::arg("iteration"), py::arg("total"));
  m.def("sa_keep_probability", &sa_keep_probability, py::arg("f_new"), py::arg("f_old"), py::arg("temp"));
  m.def("uniform_noise", [](int t, int p, int base, std::uint64_t seed) {
    Rng rng(seed);
    return uniform_noise(t, p, base, rng);
  }, py::arg("t_steps"), py::arg("pitch_count"), py::arg("pitch_base") = kDefaultPitchBase, py::arg("seed") = 0);
  m.def("constrained_sample", [](const CrbmParams& model, const StructureTemplate& t, const SamplerConfig& cfg,
                                 int base) {
    py::gil_scoped_release release;
    return constrained_sample(model, t, cfg, base);
  }, py::arg("model"), py::arg("template"), py::arg("config"), py::arg("pitch_base") = kDefaultPitchBase);
  m.def("batch_sample", [](const CrbmParams& model, const StructureTemplate& t, const SamplerConfig& cfg, int n,
                           int k, int base, int threads) {
    BatchResult r;
    {
      py::gil_scoped_release release;
      r = batch_sample(model, t, cfg, n, k, base, threads);
    }
    std::vector<SampleResult> selected;
    for (BatchSample& s : r.selected) selected.push_back(std::move(s.result));
    return selected;
  }, py::arg("model"), py::arg("template"), py::arg("config"), py::arg("n_solutions"), py::arg("select"),
        py::arg("pitch_base") = kDefaultPitchBase, py::arg("threads") = 1);
  m.def("trace_csv", &trace_csv, py::arg("trace"));

  // --- eval ----------------------------------------------------------------

  py::class_<IrReport>(m, "IrReport")
      .def_readonly("average_ir", &IrReport::average_ir)
      .def_readonly("n_slices", &IrReport::n_slices)
      .def_readonly("vocab_size", &IrReport::vocab_size);

  m.def("information_rate", py::overload_cast<const std::vector<int>&>(&information_rate), py::arg("symbols"));
  m.def("information_rate", py::overload_cast<const PianoRoll&, double>(&information_rate), py::arg("roll"),
        py::arg("threshold") = 0.5);
  m.def("slice_symbols", &slice_symbols, py::arg("roll"), py::arg("threshold") = 0.5);
  m.def("key_name", &key_name, py::arg("key"));
  m.def("ks_key_estimate", py::overload_cast<const PianoRoll&>(&ks_key_estimate), py::arg("roll"));
  m.def("keyscape", [](const PianoRoll& r, int levels) { return keyscape(r, levels).levels; }, py::arg("roll"),
        py::arg("levels"));

  py::class_<WelchResult>(m, "WelchResult")
      .def_readonly("mean_difference", &WelchResult::mean_difference)
      .def_readonly("t", &WelchResult::t)
      .def_readonly("dof", &WelchResult::dof);
  m.def("welch_test", &welch_test, py::arg("a"), py::arg("b"));

  m.def("render_heatmap", &render_heatmap, py::arg("matrix"), py::arg("title") = "");
  m.def("render_bars", &render_bars, py::arg("values"), py::arg("title") = "");
  m.def("render_keyscape", [](const std::vector<std::vector<KeyLabel>>& levels, const std::string& title) {
    Keyscape k;
    k.levels = levels;
    return render_keyscape(k, title);
  }, py::arg("levels"), py::arg("title") = "");

  m.def("default_config_text", &default_config_text);
}

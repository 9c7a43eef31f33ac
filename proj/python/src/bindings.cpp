#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <string>
#include <vector>

#include "summix/bench/report.hpp"
#include "summix/blocks/encoder.hpp"
#include "summix/cli/gradcheck_suite.hpp"
#include "summix/cli/toy_task.hpp"
#include "summix/ctc/ctc.hpp"
#include "summix/mixers/mixer.hpp"
#include "summix/numcore/error.hpp"

namespace py = pybind11;
using namespace summix;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor<double> to_tensor(const Array& a, std::size_t rank, const char* what) {
  if (static_cast<std::size_t>(a.ndim()) != rank) {
    throw DimensionError(what, "rank", static_cast<std::size_t>(a.ndim()), "expected rank", rank);
  }
  Shape shape(a.shape(), a.shape() + a.ndim());
  Tensor<double> t(shape);
  if (t.size()) std::memcpy(t.data(), a.data(), t.size() * sizeof(double));
  return t;
}

Array to_array(const Tensor<double>& t) {
  Array out(std::vector<py::ssize_t>(t.shape().begin(), t.shape().end()));
  if (t.size()) std::memcpy(out.mutable_data(), t.data(), t.size() * sizeof(double));
  return out;
}

MaskedBatch<double> to_batch(const Array& values, const std::vector<int>& lengths, const char* what) {
  MaskedBatch<double> batch{to_tensor(values, 3, what), lengths};
  validate(batch);
  return batch;
}

py::dict cost_dict(const MixerCost& c) {
  py::dict d;
  d["flops"] = c.flops;
  d["activation_floats"] = c.activation_floats;
  d["pairwise_floats"] = c.pairwise_floats;
  return d;
}

Array mixer_forward_py(const std::string& kind, const Array& x, const std::vector<int>& lengths,
                       std::size_t heads, std::uint64_t seed) {
  const MaskedBatch<double> batch = to_batch(x, lengths, "mixer_forward");
  const MixerKind k = parse_mixer_kind(kind);
  Rng rng(seed);
  const auto mixer = create_mixer<double>(k, batch.features(), heads, default_positional_encoding(k), rng, "mixer");
  Tape<double> tape(false);
  return to_array(mixer_forward(tape, as_constant(tape, batch), mixer).values.value());
}

py::tuple encoder_logits_py(const std::string& config_json, const Array& features, const std::vector<int>& lengths,
                            std::uint64_t seed) {
  const EncoderConfig config = encoder_config_from_json(config_json);
  const auto encoder = Encoder<double>::create(config, seed);
  const MaskedBatch<double> batch = to_batch(features, lengths, "encoder_logits");
  Tape<double> tape(false);
  const Sequence<double> out = encoder_logits(tape, as_constant(tape, batch), encoder);
  return py::make_tuple(to_array(out.values.value()), out.lengths);
}

py::dict ctc_loss_py(const Array& logits, const std::vector<int>& lengths, const std::vector<LabelSequence>& targets) {
  const MaskedBatch<double> batch = to_batch(logits, lengths, "ctc_loss");
  Parameter<double> values{"logits", batch.values};
  zero_padding(values.value, batch.lengths);
  Tape<double> tape;
  const CtcLoss<double> loss = ctc_loss(tape, as_tracked(tape, values, batch.lengths), targets);
  tape.backward(loss.mean);
  py::dict d;
  d["per_sequence"] = std::vector<double>(loss.per_sequence.value().vec().begin(), loss.per_sequence.value().vec().end());
  d["mean"] = loss.mean.value()[0];
  d["infeasible"] = loss.infeasible;
  d["grad"] = to_array(tape.grad(values));
  return d;
}

py::list gradcheck_suite_py(const std::vector<std::string>& presets, const std::string& filter, bool corrupt,
                            std::uint64_t seed) {
  std::vector<NamedConfig> configs;
  for (const auto& name : presets.empty() ? preset_names() : presets) configs.push_back({name, preset(name)});
  py::list out;
  for (const CheckResult& r : run_gradcheck_suite(configs, {filter, corrupt, seed})) {
    py::dict d;
    d["name"] = r.name;
    d["max_relative_error"] = r.max_relative_error;
    d["tolerance"] = r.tolerance;
    d["coordinates"] = r.coordinates;
    d["worst_parameter"] = r.worst_parameter;
    d["passed"] = r.passed;
    out.append(d);
  }
  return out;
}

py::dict train_toy_py(const std::string& config_json, std::size_t steps, std::size_t batch, double lr,
                      const std::string& optimizer, std::uint64_t seed, const std::string& precision) {
  const EncoderConfig config = encoder_config_from_json(config_json);
  ToyTaskSpec task;
  task.seed = seed;
  TrainOptions options;
  options.steps = steps;
  options.batch = batch;
  options.learning_rate = lr;
  options.optimizer = parse_optimizer_kind(optimizer);
  options.seed = seed;
  TrainResult result;
  {
    py::gil_scoped_release release;
    if (precision == "f64") {
      result = train_toy<double>(config, task, options);
    } else if (precision == "f32") {
      result = train_toy<float>(config, task, options);
    } else {
      throw ConfigError("train_toy: precision must be f32 or f64, got " + precision);
    }
  }
  py::dict d;
  d["loss_curve"] = result.loss_curve;
  d["exact_match"] = result.exact_match;
  d["held_out_loss"] = result.held_out_loss;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Summary-mixing speech encoders: mixers, CTC and cost models";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<CapacityError>(m, "CapacityError", base.ptr());

  m.def("preset_names", &preset_names);
  m.def("preset_json", [](const std::string& name) { return to_json(preset(name)); }, py::arg("name"));
  m.def("normalize_config_json", [](const std::string& text) { return to_json(encoder_config_from_json(text)); },
        py::arg("text"));

  m.def("mixer_forward", &mixer_forward_py, py::arg("kind"), py::arg("x"), py::arg("lengths"),
        py::arg("heads") = 1, py::arg("seed") = 0,
        "Freshly initialised mixer applied to x [B, T, D]; zeros at padded frames.");
  m.def("encoder_logits", &encoder_logits_py, py::arg("config_json"), py::arg("features"), py::arg("lengths"),
        py::arg("seed") = 0, "Returns (logits [B, T', V + 1], output lengths).");

  m.def("ctc_feasible", &ctc_feasible, py::arg("target"), py::arg("frames"));
  m.def("ctc_loss", &ctc_loss_py, py::arg("logits"), py::arg("lengths"), py::arg("targets"),
        "per_sequence, mean, infeasible flags and the gradient of mean w.r.t. logits.");
  m.def(
      "ctc_brute_force",
      [](const Array& logits, const std::vector<int>& lengths, const std::vector<LabelSequence>& targets) {
        return ctc_brute_force(to_batch(logits, lengths, "ctc_brute_force"), targets);
      },
      py::arg("logits"), py::arg("lengths"), py::arg("targets"));
  m.def(
      "ctc_greedy_decode",
      [](const Array& logits, const std::vector<int>& lengths) {
        return ctc_greedy_decode(to_tensor(logits, 3, "ctc_greedy_decode"), lengths);
      },
      py::arg("logits"), py::arg("lengths"));

  m.def(
      "mixer_cost",
      [](const std::string& kind, std::size_t dim, std::size_t time, std::size_t heads) {
        return cost_dict(mixer_cost(parse_mixer_kind(kind), dim, time, heads));
      },
      py::arg("kind"), py::arg("dim"), py::arg("time"), py::arg("heads") = 1);
  m.def(
      "encoder_cost",
      [](const std::string& config_json, std::size_t time) {
        const EncoderCost c = encoder_cost(encoder_config_from_json(config_json), time);
        py::dict d;
        d["blocks"] = cost_dict(c.blocks);
        d["total"] = cost_dict(c.total);
        d["frames"] = c.frames;
        return d;
      },
      py::arg("config_json"), py::arg("time"));
  m.def("fit_exponent", &fit_exponent, py::arg("points"), "Least-squares slope of log y on log x.");

  m.def("gradcheck_suite", &gradcheck_suite_py, py::arg("presets") = std::vector<std::string>{},
        py::arg("filter") = "", py::arg("corrupt_gradient") = false, py::arg("seed") = 0);
  m.def("train_toy", &train_toy_py, py::arg("config_json"), py::arg("steps") = 500, py::arg("batch") = 16,
        py::arg("learning_rate") = 0.1, py::arg("optimizer") = "sgd", py::arg("seed") = 0,
        py::arg("precision") = "f64");
}

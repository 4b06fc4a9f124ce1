#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "emailad/bundle.hpp"
#include "emailad/error.hpp"
#include "emailad/eval.hpp"
#include "emailad/header.hpp"
#include "emailad/importance.hpp"
#include "emailad/learners.hpp"
#include "emailad/model_io.hpp"
#include "emailad/pipeline.hpp"
#include "emailad/synth.hpp"
#include "emailad/util.hpp"

namespace py = pybind11;
using namespace emailad;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Labels = py::array_t<int, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a, std::uint64_t fingerprint) {
  if (a.ndim() != 2) throw InvalidArgument("expected a 2-d array");
  Matrix m(a.shape(0), a.shape(1));
  auto v = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    for (py::ssize_t j = 0; j < a.shape(1); ++j) m(i, j) = v(i, j);
  m.schema_fingerprint = fingerprint;
  return m;
}

std::vector<int> to_labels(const Labels& y) {
  if (y.ndim() != 1) throw InvalidArgument("expected a 1-d label array");
  return {y.data(), y.data() + y.size()};
}

ModelSpec make_spec(const std::string& algorithm, const Hyperparameters& hp, std::uint64_t seed,
                    const std::vector<std::string>& bases) {
  ModelSpec spec;
  spec.algorithm = parse_algorithm(algorithm);
  spec.hyperparameters = hp;
  spec.seed = seed;
  for (std::size_t i = 0; i < bases.size(); ++i) {
    ModelSpec b;
    b.algorithm = parse_algorithm(bases[i]);
    b.seed = derive_seed(seed, 0xba5e, i);
    spec.base_specs.push_back(b);
  }
  spec.validate();
  return spec;
}

py::dict report_dict(const EvalReport& r) {
  py::module_ json = py::module_::import("json");
  return json.attr("loads")(report_to_json(r).dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Email header anomaly detection";

  // Translators run newest first, so the base class goes in first.
  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<FingerprintMismatch>(m, "FingerprintMismatch", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());

  m.attr("__version__") = std::string(kToolVersion);

  m.def("set_num_threads", &set_num_threads, py::arg("n"));

  m.def(
      "parse_headers",
      [](py::bytes raw) {
        auto h = parse_headers(std::string(raw));
        py::list out;
        for (const auto& f : h.fields) out.append(py::make_tuple(f.name, f.raw_value));
        return py::make_tuple(out, h.malformed_line_count);
      },
      py::arg("raw"), "Unfolded (name, value) pairs and the malformed line count.");

  m.def(
      "synth_email",
      [](const std::string& label, std::uint64_t seed) { return py::bytes(synth_email(parse_label(label), seed)); },
      py::arg("label"), py::arg("seed"));

  m.def(
      "write_synthetic_corpus",
      [](const std::filesystem::path& dir, std::size_t ham, std::size_t spam, std::size_t phishing,
         std::uint64_t seed) {
        SynthOptions o;
        o.ham = ham;
        o.spam = spam;
        o.phishing = phishing;
        o.seed = seed;
        auto l = write_synthetic_corpus(dir, o);
        py::dict d;
        d["trec_index"] = l.trec_index;
        d["trec_root"] = l.trec_root;
        d["phishing_dir"] = l.phishing_dir;
        return d;
      },
      py::arg("dir"), py::arg("ham") = 1000, py::arg("spam") = 1000, py::arg("phishing") = 500,
      py::arg("seed") = 42);

  py::class_<TrainedModel>(m, "Model")
      .def_property_readonly("algorithm",
                             [](const TrainedModel& t) { return std::string(algorithm_name(t.spec.algorithm)); })
      .def_property_readonly("converged", [](const TrainedModel& t) { return t.converged; })
      .def_property_readonly("one_class", &TrainedModel::one_class)
      .def(
          "decision_function",
          [](const TrainedModel& t, const Array& X) {
            auto scores = predict(t, to_matrix(X, t.schema_fingerprint));
            py::array_t<double> out(scores.size());
            for (std::size_t i = 0; i < scores.size(); ++i) out.mutable_at(i) = scores[i].decision_value;
            return out;
          },
          py::arg("X"))
      .def(
          "predict",
          [](const TrainedModel& t, const Array& X) {
            auto scores = predict(t, to_matrix(X, t.schema_fingerprint));
            py::array_t<int> out(scores.size());
            for (std::size_t i = 0; i < scores.size(); ++i) out.mutable_at(i) = scores[i].anomalous ? 1 : 0;
            return out;
          },
          py::arg("X"), "1 for anomalous (or outlier), 0 otherwise.")
      .def("to_json", [](const TrainedModel& t) { return model_to_json(t).dump(); })
      .def_static(
          "from_json", [](const std::string& s) { return model_from_json(nlohmann::json::parse(s)); },
          py::arg("text"))
      .def("__eq__", [](const TrainedModel& a, const TrainedModel& b) { return a == b; });

  m.def(
      "train",
      [](const std::string& algorithm, const Array& X, const Labels& y, const Hyperparameters& hp,
         std::uint64_t seed, const std::vector<std::string>& bases) {
        auto spec = make_spec(algorithm, hp, seed, bases);
        auto mat = to_matrix(X, 0);
        auto labels = to_labels(y);
        py::gil_scoped_release release;
        return train(spec, mat, labels);
      },
      py::arg("algorithm"), py::arg("X"), py::arg("y"), py::arg("hyperparameters") = Hyperparameters{},
      py::arg("seed") = 0, py::arg("bases") = std::vector<std::string>{});

  m.def(
      "cross_validate",
      [](const std::string& algorithm, const Array& X, const Labels& y, std::size_t folds,
         const Hyperparameters& hp, std::uint64_t seed) {
        auto spec = make_spec(algorithm, hp, seed, {});
        auto mat = to_matrix(X, 0);
        auto labels = to_labels(y);
        EvalReport r;
        {
          py::gil_scoped_release release;
          r = kfold_cv(spec, mat, labels, folds, seed);
        }
        return report_dict(r);
      },
      py::arg("algorithm"), py::arg("X"), py::arg("y"), py::arg("folds") = 10,
      py::arg("hyperparameters") = Hyperparameters{}, py::arg("seed") = 0);

  m.def(
      "auc",
      [](const std::vector<double>& scores, const std::vector<int>& y) { return auc_from_scores(scores, y); },
      py::arg("scores"), py::arg("y"));

  m.def(
      "permutation_importance",
      [](const TrainedModel& t, const Array& X, const Labels& y, const std::vector<std::string>& names,
         std::size_t repeats, std::uint64_t seed) {
        auto mat = to_matrix(X, t.schema_fingerprint);
        auto labels = to_labels(y);
        ImportanceReport r;
        {
          py::gil_scoped_release release;
          r = permutation_importance(t, mat, labels, names, repeats, seed);
        }
        py::list out;
        for (auto i : r.ranking()) {
          const auto& f = r.features[i];
          out.append(py::make_tuple(f.name, f.mean_drop, f.stddev));
        }
        return py::make_tuple(r.baseline_accuracy, out);
      },
      py::arg("model"), py::arg("X"), py::arg("y"), py::arg("names"), py::arg("repeats") = 10,
      py::arg("seed") = 0, "Baseline accuracy and (name, mean drop, stddev) ranked by mean drop.");

  py::class_<ModelBundle>(m, "Bundle")
      .def_static("load", &load_bundle, py::arg("path"))
      .def("save", [](const ModelBundle& b, const std::filesystem::path& p) { save_bundle(p, b); }, py::arg("path"))
      .def_property_readonly("model", [](const ModelBundle& b) { return b.model; })
      .def_property_readonly("positive_label", [](const ModelBundle& b) { return b.positive_label; })
      .def_property_readonly("feature_names", [](const ModelBundle& b) { return b.schema.names(); })
      .def_property_readonly("fingerprint", [](const ModelBundle& b) { return hex64(model_fingerprint(b)); })
      .def(
          "classify",
          [](const ModelBundle& b, py::bytes raw) {
            auto v = classify_header(b, parse_headers(std::string(raw)));
            return py::make_tuple(v.label, v.score.decision_value, v.exit_code);
          },
          py::arg("raw"), "(label, decision value, exit code) for one email.");

  m.def(
      "run",
      [](const std::filesystem::path& config_path, const std::vector<int>& phases,
         const std::optional<std::filesystem::path>& out_dir, std::optional<std::uint64_t> seed) {
        auto config = load_config(config_path);
        if (out_dir) config.output_dir = *out_dir;
        if (seed) config.seed = *seed;
        std::ostringstream log;
        RunOutput r;
        {
          py::gil_scoped_release release;
          r = run_pipeline(config, phases, &log);
        }
        py::module_ json = py::module_::import("json");
        return json.attr("loads")(r.manifest.dump());
      },
      py::arg("config"), py::arg("phases") = std::vector<int>{1, 2, 3, 4}, py::arg("out") = py::none(),
      py::arg("seed") = py::none(), "Run the pipeline and return the manifest.");
}

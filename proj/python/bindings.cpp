#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mmhdc/data_io.hpp"
#include "mmhdc/encoding.hpp"
#include "mmhdc/hdc_core.hpp"
#include "mmhdc/mm_hdc.hpp"
#include "mmhdc/multiclass.hpp"
#include "mmhdc/svm_ref.hpp"

namespace py = pybind11;
using namespace mmhdc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw DimensionError("expected a 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return Matrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

Vector to_vector(const Array& a) {
  if (a.ndim() != 1) throw DimensionError("expected a 1-D array");
  return Vector(a.data(), a.data() + a.shape(0));
}

std::vector<int> to_labels(const IntArray& a) {
  if (a.ndim() != 1) throw DimensionError("expected a 1-D label array");
  return std::vector<int>(a.data(), a.data() + a.shape(0));
}

py::array_t<double> from_vector(const Vector& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<double> from_matrix(const Matrix& m) {
  py::array_t<double> out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

py::dict trace_dict(const EpochTrace& t) {
  py::dict d;
  d["epoch"] = t.epoch;
  d["objective"] = t.objective;
  d["regularizer"] = t.regularizer;
  d["hinge_sum"] = t.hinge_sum;
  d["train_accuracy"] = t.train_accuracy;
  d["test_accuracy"] = t.test_accuracy ? py::cast(*t.test_accuracy) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Maximum-margin hyperdimensional classifiers (C++ core)";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<IdxError>(m, "IdxError", PyExc_IOError);

  py::enum_<EncoderKind>(m, "EncoderKind").value("onlinehd", EncoderKind::onlinehd).value("rff", EncoderKind::rff);
  py::enum_<Similarity>(m, "Similarity").value("dot", Similarity::dot).value("cosine", Similarity::cosine);
  py::enum_<Loss>(m, "Loss").value("hinge", Loss::hinge).value("squared_hinge", Loss::squared_hinge);
  py::enum_<Optimizer>(m, "Optimizer").value("sgd", Optimizer::sgd).value("adam", Optimizer::adam);
  py::enum_<Method>(m, "Method")
      .value("mm_hdc", Method::mm_hdc)
      .value("perceptron", Method::perceptron)
      .value("onlinehd", Method::onlinehd)
      .value("svm", Method::svm);

  py::class_<Encoder, std::shared_ptr<Encoder>>(m, "Encoder")
      .def(py::init([](EncoderKind kind, std::size_t d, std::size_t D, double sigma, std::uint64_t seed) {
             return std::make_shared<Encoder>(Encoder::sample(kind, d, D, sigma, seed));
           }),
           py::arg("kind"), py::arg("input_dim"), py::arg("output_dim"), py::arg("sigma") = 1.0, py::arg("seed") = 0)
      .def("encode", [](const Encoder& e, const Array& x) { return from_vector(e.encode(to_vector(x))); })
      .def("encode_batch", [](const Encoder& e, const Array& x) { return from_matrix(e.encode_batch(to_matrix(x))); })
      .def_property_readonly("kind", &Encoder::kind)
      .def_property_readonly("input_dim", &Encoder::input_dim)
      .def_property_readonly("output_dim", &Encoder::output_dim)
      .def_property_readonly("seed", &Encoder::seed)
      .def_property_readonly("projection", [](const Encoder& e) { return from_matrix(e.projection()); })
      .def_property_readonly("phase", [](const Encoder& e) { return from_vector(e.phase()); })
      .def("save", [](const Encoder& e, const std::filesystem::path& p) { e.save(p); })
      .def_static("load", [](const std::filesystem::path& p) { return std::make_shared<Encoder>(Encoder::load(p)); });

  m.def("normalize_l2", [](const Array& x) { return from_vector(normalize_l2(to_vector(x))); });

  py::class_<PrototypePair>(m, "PrototypePair")
      .def(py::init([](const Array& p, const Array& q) { return PrototypePair(to_vector(p), to_vector(q)); }))
      .def_property(
          "plus", [](const PrototypePair& p) { return from_vector(p.plus); },
          [](PrototypePair& p, const Array& v) { p.plus = to_vector(v); })
      .def_property(
          "minus", [](const PrototypePair& p) { return from_vector(p.minus); },
          [](PrototypePair& p, const Array& v) { p.minus = to_vector(v); })
      .def_property_readonly("dim", &PrototypePair::dim);

  m.def("init_prototypes",
        [](const Array& enc, const IntArray& y) { return init_prototypes(to_matrix(enc), to_labels(y)); });
  m.def(
      "similarity",
      [](const Array& a, const Array& b, Similarity kind) { return similarity(to_vector(a), to_vector(b), kind); },
      py::arg("a"), py::arg("b"), py::arg("kind") = Similarity::dot);
  m.def(
      "predict_binary",
      [](const PrototypePair& p, const Array& h, Similarity kind) { return predict_binary(p, to_vector(h), kind); },
      py::arg("proto"), py::arg("h"), py::arg("kind") = Similarity::dot);
  m.def("margin_score", [](const PrototypePair& p, const Array& h) { return margin_score(p, to_vector(h)); });
  m.def(
      "perceptron_epoch",
      [](PrototypePair p, const Array& enc, const IntArray& y, double lr, Similarity kind) {
        const auto mistakes = perceptron_epoch(p, to_matrix(enc), to_labels(y), lr, kind);
        return py::make_tuple(p, mistakes);
      },
      py::arg("proto"), py::arg("encoded"), py::arg("labels"), py::arg("lr"), py::arg("kind") = Similarity::dot);
  m.def("onlinehd_epoch", [](PrototypePair p, const Array& enc, const IntArray& y, double lr) {
    onlinehd_epoch(p, to_matrix(enc), to_labels(y), lr);
    return p;
  });
  m.def("renormalize", [](PrototypePair p) {
    renormalize(p);
    return p;
  });

  py::class_<MarginConfig>(m, "MarginConfig")
      .def(py::init<>())
      .def_readwrite("C", &MarginConfig::C)
      .def_readwrite("lr", &MarginConfig::lr)
      .def_readwrite("batch_size", &MarginConfig::batch_size)
      .def_readwrite("epochs", &MarginConfig::epochs)
      .def_readwrite("loss", &MarginConfig::loss)
      .def_readwrite("similarity", &MarginConfig::similarity)
      .def_readwrite("optimizer", &MarginConfig::optimizer)
      .def_readwrite("seed", &MarginConfig::seed);

  py::class_<LossReport>(m, "LossReport")
      .def_readonly("objective", &LossReport::objective)
      .def_readonly("regularizer", &LossReport::regularizer)
      .def_readonly("hinge_sum", &LossReport::hinge_sum)
      .def_property_readonly("slack", [](const LossReport& r) { return from_vector(r.slack); });

  m.def("violation_sets", [](const PrototypePair& p, const Array& enc, const IntArray& y) {
    const auto s = violation_sets(p, to_matrix(enc), to_labels(y));
    return py::make_tuple(s.plus, s.minus);
  });
  m.def(
      "objective",
      [](const PrototypePair& p, const Array& enc, const IntArray& y, double C, Loss loss) {
        return objective(p, to_matrix(enc), to_labels(y), C, loss);
      },
      py::arg("proto"), py::arg("encoded"), py::arg("labels"), py::arg("C"), py::arg("loss") = Loss::hinge);
  m.def(
      "gradients",
      [](const PrototypePair& p, const Array& enc, const IntArray& y, double C, Loss loss) {
        const auto g = gradients(p, to_matrix(enc), to_labels(y), C, loss);
        return py::make_tuple(from_vector(g.plus), from_vector(g.minus));
      },
      py::arg("proto"), py::arg("encoded"), py::arg("labels"), py::arg("C"), py::arg("loss") = Loss::hinge);
  m.def(
      "fit",
      [](const Array& enc, const IntArray& y, const MarginConfig& config, std::optional<PrototypePair> init) {
        const auto r = fit(to_matrix(enc), to_labels(y), config, std::move(init));
        py::list trace;
        for (const auto& t : r.trace) trace.append(trace_dict(t));
        return py::make_tuple(r.prototypes, trace);
      },
      py::arg("encoded"), py::arg("labels"), py::arg("config"), py::arg("init") = py::none());

  py::class_<LinearModel>(m, "LinearModel")
      .def_property_readonly("w", [](const LinearModel& l) { return from_vector(l.w); })
      .def_readonly("bias", &LinearModel::bias);
  m.def("svm_primal_loss", [](const Array& w, double bias, const Array& x, const IntArray& y, double C) {
    return svm_primal_loss(LinearModel{to_vector(w), bias}, to_matrix(x), to_labels(y), C);
  });

  py::class_<SvmConfig>(m, "SvmConfig")
      .def(py::init<>())
      .def_readwrite("C", &SvmConfig::C)
      .def_readwrite("lr", &SvmConfig::lr)
      .def_readwrite("batch_size", &SvmConfig::batch_size)
      .def_readwrite("epochs", &SvmConfig::epochs)
      .def_readwrite("optimizer", &SvmConfig::optimizer)
      .def_readwrite("train_bias", &SvmConfig::train_bias)
      .def_readwrite("seed", &SvmConfig::seed);
  m.def("svm_fit_primal", [](const Array& x, const IntArray& y, const SvmConfig& config) {
    return svm_fit_primal(to_matrix(x), to_labels(y), config).model;
  });

  py::class_<DualCertificate>(m, "DualCertificate")
      .def_property_readonly("lam", [](const DualCertificate& c) { return from_vector(c.lambda); })
      .def_property_readonly("eta", [](const DualCertificate& c) { return from_vector(c.eta); })
      .def_property_readonly("w", [](const DualCertificate& c) { return from_vector(c.w_reconstructed); })
      .def_readonly("dual_objective", &DualCertificate::dual_objective)
      .def_readonly("primal_objective", &DualCertificate::primal_objective)
      .def_readonly("gap", &DualCertificate::gap)
      .def_readonly("kkt_max_violation", &DualCertificate::kkt_max_violation)
      .def_readonly("converged", &DualCertificate::converged)
      .def("__str__", [](const DualCertificate& c) { return to_text(c); });
  m.def(
      "svm_dual_solve",
      [](const Array& x, const IntArray& y, double C, double tol, std::size_t max_sweeps) {
        return svm_dual_solve(to_matrix(x), to_labels(y), C, tol, max_sweeps);
      },
      py::arg("points"), py::arg("labels"), py::arg("C"), py::arg("tol") = 1e-10, py::arg("max_sweeps") = 100000);
  m.def("check_kkt", [](const DualCertificate& c, const Array& x, const IntArray& y, double C, double tol) {
    return check_kkt(c, to_matrix(x), to_labels(y), C, tol).max_violation;
  });
  m.def("prototype_decomposition", [](const DualCertificate& c, const IntArray& y, const Array& enc) {
    return prototype_decomposition(c, to_labels(y), to_matrix(enc));
  });

  py::class_<TrainSettings>(m, "TrainSettings")
      .def(py::init<>())
      .def_readwrite("method", &TrainSettings::method)
      .def_readwrite("lr", &TrainSettings::lr)
      .def_readwrite("C", &TrainSettings::C)
      .def_readwrite("batch_size", &TrainSettings::batch_size)
      .def_readwrite("loss", &TrainSettings::loss)
      .def_readwrite("similarity", &TrainSettings::similarity)
      .def_readwrite("optimizer", &TrainSettings::optimizer)
      .def_readwrite("renormalize_baselines", &TrainSettings::renormalize_baselines)
      .def_readwrite("seed", &TrainSettings::seed)
      .def_readwrite("threads", &TrainSettings::threads);

  py::class_<OvOEnsemble>(m, "OvOEnsemble")
      .def_property_readonly("num_classes", &OvOEnsemble::num_classes)
      .def_property_readonly("num_models", [](const OvOEnsemble& e) { return e.models().size(); })
      .def("predict", [](const OvOEnsemble& e, const Array& x) { return ovo_predict(e, to_vector(x)); })
      .def("predict_batch",
           [](const OvOEnsemble& e, const Array& x) {
             return e.predict_batch_encoded(e.encoder().encode_batch(to_matrix(x)));
           })
      .def("save", [](const OvOEnsemble& e, const std::filesystem::path& p) { e.save(p); })
      .def_static("load", [](const std::filesystem::path& p) { return OvOEnsemble::load(p); });
  m.def("ovo_fit", [](const Array& x, const IntArray& y, std::size_t k, std::shared_ptr<Encoder> encoder,
                      const TrainSettings& settings, std::size_t epochs) {
    return ovo_fit(to_matrix(x), to_labels(y), k, std::move(encoder), settings, epochs);
  });

  m.def("load_idx_images", [](const std::filesystem::path& p) { return from_matrix(load_idx_images(p)); });
  m.def("load_idx_labels", [](const std::filesystem::path& p) { return load_idx_labels(p); });
  m.def("make_separable", [](std::size_t n, std::size_t d, double margin, std::uint64_t seed) {
    const auto s = make_separable(n, d, margin, seed);
    return py::make_tuple(from_matrix(s.data.points), s.data.labels, from_vector(s.direction));
  });
}

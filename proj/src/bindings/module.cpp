#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ddb/bias.hpp"
#include "ddb/curve.hpp"
#include "ddb/label_noise.hpp"
#include "ddb/pairset.hpp"
#include "ddb/run_store.hpp"
#include "ddb/synth_probe.hpp"

namespace py = pybind11;
using namespace ddb;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Double-descent shape/texture bias analysis core";

    py::class_<TimeSeries>(m, "TimeSeries")
        .def(py::init<>())
        .def(py::init([](std::vector<std::int64_t> epochs, std::vector<double> values) {
                 TimeSeries s{std::move(epochs), std::move(values)};
                 s.validate();
                 return s;
             }),
             py::arg("epochs"), py::arg("values"))
        .def_readwrite("epochs", &TimeSeries::epochs)
        .def_readwrite("values", &TimeSeries::values)
        .def("__len__", &TimeSeries::size);

    py::class_<EpochRange>(m, "EpochRange")
        .def_readonly("start", &EpochRange::start)
        .def_readonly("end", &EpochRange::end)
        .def("contains", &EpochRange::contains)
        .def("__repr__", [](const EpochRange& r) {
            return "EpochRange(" + std::to_string(r.start) + ", " + std::to_string(r.end) + ")";
        });

    py::class_<PhaseConfig>(m, "PhaseConfig")
        .def(py::init<>())
        .def_readwrite("theta", &PhaseConfig::theta)
        .def_readwrite("lag", &PhaseConfig::lag);

    py::class_<PhaseSegmentation>(m, "PhaseSegmentation")
        .def_readonly("b1", &PhaseSegmentation::b1)
        .def_readonly("b2", &PhaseSegmentation::b2)
        .def_readonly("double_descent_detected", &PhaseSegmentation::double_descent_detected)
        .def_readonly("phase_ranges", &PhaseSegmentation::phase_ranges);

    py::class_<PhaseCorrelation>(m, "PhaseCorrelation")
        .def_readonly("phase", &PhaseCorrelation::phase)
        .def_readonly("range", &PhaseCorrelation::range)
        .def_readonly("reported", &PhaseCorrelation::reported)
        .def_readonly("r_shape", &PhaseCorrelation::r_shape)
        .def_readonly("r_texture", &PhaseCorrelation::r_texture)
        .def_readonly("s", &PhaseCorrelation::s)
        .def_readonly("n_points", &PhaseCorrelation::n_points)
        .def_readonly("note", &PhaseCorrelation::note);

    py::class_<PhaseCorrelationReport>(m, "PhaseCorrelationReport")
        .def_readonly("phases", &PhaseCorrelationReport::phases);

    m.def("moving_average", &moving_average, py::arg("series"), py::arg("window") = 5);
    m.def(
        "segment_phases",
        [](const TimeSeries& s, double theta, std::int64_t lag) {
            PhaseConfig c;
            c.theta = theta;
            c.lag = lag;
            return segment_phases(s, c);
        },
        py::arg("test_error"), py::arg("theta") = 0.1, py::arg("lag") = 5);
    m.def(
        "pearson",
        [](const std::vector<double>& x, const std::vector<double>& y) { return pearson(x, y); },
        py::arg("x"), py::arg("y"));
    m.def("sync_score", &sync_score, py::arg("r_shape"), py::arg("r_texture"));
    m.def("phase_correlations", &phase_correlations, py::arg("test_error"),
          py::arg("shape_bias"), py::arg("texture_bias"), py::arg("segmentation"));

    // --- bias ----------------------------------------------------------
    py::enum_<BaselineMode>(m, "BaselineMode")
        .value("mean_rho", BaselineMode::mean_rho)
        .value("raw_paper", BaselineMode::raw_paper)
        .value("reference_impl", BaselineMode::reference_impl);

    py::class_<ActivationMatrix>(m, "ActivationMatrix")
        .def(py::init([](std::vector<double> values, std::int64_t rows, std::int64_t cols) {
                 ActivationMatrix a;
                 a.values = std::move(values);
                 a.rows = rows;
                 a.cols = cols;
                 a.validate();
                 return a;
             }),
             py::arg("values"), py::arg("rows"), py::arg("cols"))
        .def_readonly("rows", &ActivationMatrix::rows)
        .def_readonly("cols", &ActivationMatrix::cols)
        .def_readonly("values", &ActivationMatrix::values);

    py::class_<CorrelationVector>(m, "CorrelationVector")
        .def_readonly("rho", &CorrelationVector::rho)
        .def_readonly("n_pairs", &CorrelationVector::n_pairs);

    py::class_<BiasEstimate>(m, "BiasEstimate")
        .def_readonly("shape_frac", &BiasEstimate::shape_frac)
        .def_readonly("texture_frac", &BiasEstimate::texture_frac)
        .def_readonly("residual_frac", &BiasEstimate::residual_frac)
        .def_readonly("layer_index", &BiasEstimate::layer_index)
        .def_readonly("epoch", &BiasEstimate::epoch);

    m.def("neuron_pair_correlation", &neuron_pair_correlation, py::arg("acts_a"),
          py::arg("acts_b"));
    m.def("bias_fractions", &bias_fractions, py::arg("rho_shape"), py::arg("rho_texture"),
          py::arg("mode") = BaselineMode::mean_rho);

    py::enum_<BiasFactor>(m, "BiasFactor")
        .value("shape", BiasFactor::shape)
        .value("texture", BiasFactor::texture);

    // --- label noise ---------------------------------------------------
    py::class_<NoisyLabelSet>(m, "NoisyLabelSet")
        .def_readonly("original_labels", &NoisyLabelSet::original_labels)
        .def_readonly("noisy_labels", &NoisyLabelSet::noisy_labels)
        .def_readonly("corrupted_mask", &NoisyLabelSet::corrupted_mask)
        .def_readonly("p", &NoisyLabelSet::p)
        .def_readonly("seed", &NoisyLabelSet::seed)
        .def_readonly("num_classes", &NoisyLabelSet::num_classes)
        .def("corrupted_count", &NoisyLabelSet::corrupted_count);
    m.def(
        "inject_label_noise",
        [](const std::vector<std::int32_t>& labels, double p, std::uint64_t seed,
           std::int32_t num_classes) {
            return inject_label_noise(labels, p, seed, num_classes);
        },
        py::arg("labels"), py::arg("p"), py::arg("seed"), py::arg("num_classes"));

    // --- run store (read side) ----------------------------------------
    py::class_<RunStore>(m, "RunStore")
        .def(py::init<std::filesystem::path>(), py::arg("root"))
        .def("load_run_series", &RunStore::load_run_series, py::arg("run_id"),
             py::arg("metric_name"))
        .def("load_records",
             [](const RunStore& store, const std::string& run_id) {
                 py::list out;
                 for (const auto& r : store.load_records(run_id)) {
                     py::dict d;
                     d["epoch"] = r.epoch;
                     d["train_error"] = r.train_error;
                     d["test_error"] = r.test_error;
                     d["train_loss"] = r.train_loss;
                     d["test_loss"] = r.test_loss;
                     if (r.shape_bias) d["shape_bias"] = *r.shape_bias;
                     if (r.texture_bias) d["texture_bias"] = *r.texture_bias;
                     if (r.residual_bias) d["residual_bias"] = *r.residual_bias;
                     if (r.checkpoint_ref) d["checkpoint_ref"] = *r.checkpoint_ref;
                     d["wall_time"] = r.wall_time;
                     out.append(d);
                 }
                 return out;
             })
        .def("metric_names", [](const RunStore&) { return RunStore::metric_names(); });

    // --- synthetic probe -----------------------------------------------
    py::class_<GrayImage>(m, "GrayImage")
        .def_readonly("width", &GrayImage::width)
        .def_readonly("height", &GrayImage::height)
        .def_readonly("pixels", &GrayImage::pixels);
    m.def("render_synthetic_image", &render_synthetic_image, py::arg("mask_id"),
          py::arg("fill_id"), py::arg("size"));
    m.def("mask_downsample_features", &mask_downsample_features, py::arg("image"),
          py::arg("grid") = 8);
    m.def("fill_histogram_features", &fill_histogram_features, py::arg("image"),
          py::arg("bins") = 16);
}

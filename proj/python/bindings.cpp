#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "netmirror/changepoint.hpp"
#include "netmirror/embed.hpp"
#include "netmirror/lpp.hpp"
#include "netmirror/metric.hpp"
#include "netmirror/mirror.hpp"
#include "netmirror/parallel.hpp"
#include "netmirror/pipeline.hpp"

namespace py = pybind11;
using namespace netmirror;

namespace {

GraphSnapshot to_graph(double time, int n, const std::vector<std::pair<int, int>>& edges) {
    return make_graph(time, n, edges);
}

DriftSpec drift_spec(const std::string& kind, double c1, double c2, const Vector& v, double sigma) {
    DriftSpec s;
    if (kind == "linear") s.kind = DriftKind::Linear;
    else if (kind == "quadratic") s.kind = DriftKind::Quadratic;
    else throw ConfigError("drift must be 'linear' or 'quadratic'");
    s.c1 = c1;
    s.c2 = c2;
    s.v = v;
    s.sigma = sigma;
    return s;
}

DistanceMatrix to_distances(const Matrix& values, std::vector<double> times) {
    if (times.empty())
        for (Eigen::Index i = 0; i < values.rows(); ++i) times.push_back(static_cast<double>(i));
    return {std::move(times), values};
}

IsomapTrace to_trace(const Vector& values, std::vector<double> times) {
    if (times.empty())
        for (Eigen::Index i = 0; i < values.size(); ++i) times.push_back(static_cast<double>(i + 1));
    return {std::move(times), values};
}

}  // namespace

PYBIND11_MODULE(_netmirror, m) {
    m.doc() = "Euclidean mirrors of network time series";
    m.attr("__version__") = kVersion;

    auto base = py::register_exception<Error>(m, "NetmirrorError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

    m.def("set_thread_count", &set_thread_count, py::arg("threads"));

    // graphs
    m.def(
        "sample_rdpg",
        [](const Matrix& X, std::uint64_t seed, double time) {
            const auto g = sample_rdpg(LatentMatrix{time, X}, seed);
            return g.edges;
        },
        py::arg("latents"), py::arg("seed"), py::arg("time") = 0.0,
        "Edges (i < j) of one RDPG draw with P = X X^T.");
    m.def("sbm_block_matrix_at", &sbm_block_matrix_at, py::arg("t"));
    m.def(
        "sbm_latents",
        [](const Matrix& B, const std::vector<int>& sizes, int dim) { return sbm_latents(SbmSpec{B, sizes}, dim).rows; },
        py::arg("block_matrix"), py::arg("block_sizes"), py::arg("dim") = -1);

    // latent processes
    m.def(
        "simulate_bm_drift",
        [](const std::vector<double>& times, std::size_t n, std::uint64_t seed, const std::string& drift, double c1,
           double c2, const Vector& v, double sigma) {
            TimeGrid grid{times, times.empty() ? 0.0 : times.back()};
            grid.validate();
            return simulate_bm_drift(drift_spec(drift, c1, c2, v, sigma), grid, n, seed).positions;
        },
        py::arg("times"), py::arg("n"), py::arg("seed"), py::arg("drift") = "linear", py::arg("c1") = 1.0 / 50,
        py::arg("c2") = 1.0 / 10, py::arg("v") = Vector::Constant(2, 1.0 / std::sqrt(2.0)), py::arg("sigma") = 0.001,
        "List of n x d latent matrices, one per time.");
    m.def(
        "dmv_oracle_bm",
        [](double t, double s, const std::string& drift, double c1, double c2, const Vector& v, double sigma) {
            return dmv_oracle_bm(drift_spec(drift, c1, c2, v, sigma), t, s);
        },
        py::arg("t"), py::arg("s"), py::arg("drift") = "linear", py::arg("c1") = 1.0 / 50, py::arg("c2") = 1.0 / 10,
        py::arg("v") = Vector::Constant(2, 1.0 / std::sqrt(2.0)), py::arg("sigma") = 0.001);
    m.def("dmv_oracle_ibm", &dmv_oracle_ibm, py::arg("a"), py::arg("v"), py::arg("sigma"), py::arg("t"), py::arg("s"));

    // embedding and distances
    m.def(
        "ase",
        [](int n, const std::vector<std::pair<int, int>>& edges, int d, bool scaled) {
            const auto e = ase(to_graph(0.0, n, edges), d, scaled);
            return py::make_tuple(e.rows, e.eigenvalues);
        },
        py::arg("n"), py::arg("edges"), py::arg("d"), py::arg("scaled") = true,
        "Adjacency spectral embedding: (rows, eigenvalues).");
    m.def("spectral_norm", &spectral_norm, py::arg("matrix"));
    m.def(
        "procrustes_rotation", [](const Matrix& Xt, const Matrix& Xs) { return procrustes_rotation(Xt, Xs).rotation; },
        py::arg("xt"), py::arg("xs"));
    m.def(
        "dmv_hat",
        [](const Matrix& Xt, const Matrix& Xs, bool refine) {
            const auto r = dmv_hat(Xt, Xs, refine);
            py::dict out;
            out["distance"] = r.distance;
            out["frobenius_distance"] = r.frobeniusDistance;
            out["rotation"] = r.rotation;
            return out;
        },
        py::arg("xt"), py::arg("xs"), py::arg("refine") = false);
    m.def("sin_theta_norm", &sin_theta_norm, py::arg("u"), py::arg("v"));
    m.def(
        "distance_matrix",
        [](const std::vector<Matrix>& mats, std::vector<double> times, bool refine) {
            if (times.empty())
                for (std::size_t i = 0; i < mats.size(); ++i) times.push_back(static_cast<double>(i));
            return distance_matrix(mats, times, refine).values;
        },
        py::arg("embeddings"), py::arg("times") = std::vector<double>{}, py::arg("refine") = false);

    // mirror
    m.def(
        "cmds",
        [](const Matrix& D, int c) {
            const auto M = cmds(to_distances(D, {}), c);
            py::dict out;
            out["coords"] = M.coords;
            out["scree"] = M.scree;
            out["warnings"] = M.warnings;
            return out;
        },
        py::arg("distances"), py::arg("c"));
    m.def(
        "isomap_1d", [](const Matrix& coords, int k) {
            MirrorCurve M;
            M.coords = coords;
            M.c = static_cast<int>(coords.cols());
            for (Eigen::Index i = 0; i < coords.rows(); ++i) M.times.push_back(static_cast<double>(i));
            return isomap_1d(M, k).values;
        },
        py::arg("coords"), py::arg("k") = 5);
    m.def(
        "stress",
        [](const Matrix& D, const Matrix& coords, std::vector<double> times) {
            return stress(to_distances(D, std::move(times)), coords);
        },
        py::arg("distances"), py::arg("coords"), py::arg("times") = std::vector<double>{});
    m.def(
        "select_dimension",
        [](const Vector& scree, double threshold) {
            const auto c = select_dimension(scree, threshold);
            return py::make_tuple(c.c, c.massProfile);
        },
        py::arg("scree"), py::arg("threshold") = 0.95);

    // change points
    m.def(
        "sigmage_scan",
        [](const Vector& values, std::vector<double> times, int w, double threshold) {
            py::list out;
            for (const auto& e : sigmage_scan(to_trace(values, std::move(times)), w, threshold).perTime) {
                py::dict d;
                d["time"] = e.time;
                d["sigmage"] = e.sigmage;
                d["window_mean"] = e.windowMean;
                d["window_sd"] = e.windowSd;
                d["flag"] = e.flag;
                out.append(d);
            }
            return out;
        },
        py::arg("values"), py::arg("times") = std::vector<double>{}, py::arg("window") = 5, py::arg("threshold") = 5.0);
    m.def(
        "regression_band_scan",
        [](const Vector& values, std::vector<double> times, int w, double multiplier) {
            py::list out;
            for (const auto& e : regression_band_scan(to_trace(values, std::move(times)), w, multiplier).perTime) {
                py::dict d;
                d["time"] = e.time;
                d["observed"] = e.observed;
                d["predicted"] = e.predicted;
                d["half_width"] = e.halfWidth;
                d["flag"] = e.flag;
                out.append(d);
            }
            return out;
        },
        py::arg("values"), py::arg("times") = std::vector<double>{}, py::arg("window") = 5,
        py::arg("multiplier") = 5.0);

    // pipeline
    m.def("parse_config", [](const std::string& json) { return config_to_json(parse_config(json)); },
          py::arg("config_json"), "Validates a configuration and returns its canonical echo.");
    m.def(
        "run_pipeline", [](const std::string& json) {
            py::gil_scoped_release release;
            run_pipeline(parse_config(json));
        },
        py::arg("config_json"), "Runs the full pipeline, writing artifacts to the configured outputDir.");
    m.def(
        "run_bootstrap",
        [](const std::string& json, const std::vector<std::size_t>& sizes, int replicates, bool write) {
            BootstrapResult r;
            {
                py::gil_scoped_release release;
                BootstrapOptions opts;
                opts.sampleSizes = sizes;
                opts.replicates = replicates;
                r = run_bootstrap(parse_config(json), opts, write);
            }
            py::dict out;
            out["source"] = r.source.values;
            py::list med;
            for (const auto& [ns, e] : r.medianError) med.append(py::make_tuple(ns, e));
            out["median_error"] = med;
            return out;
        },
        py::arg("config_json"), py::arg("sample_sizes"), py::arg("replicates") = 10, py::arg("write") = true);
}

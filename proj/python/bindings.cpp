#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <stdexcept>

#include "vrclass/cluster.hpp"
#include "vrclass/error.hpp"
#include "vrclass/ingestion.hpp"
#include "vrclass/pca.hpp"
#include "vrclass/pipeline.hpp"
#include "vrclass/preprocess.hpp"
#include "vrclass/validate.hpp"

namespace py = pybind11;
using namespace vrclass;

namespace {

using InArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using LabelArray = py::array_t<std::size_t, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const InArray& a) {
    if (a.ndim() != 2) {
        throw InvalidArgument("expected a 2-D array");
    }
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    if (!m.data().empty()) {
        std::memcpy(m.data().data(), a.data(), m.data().size() * sizeof(double));
    }
    return m;
}

py::array_t<double> to_array(const Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    if (!m.data().empty()) {
        std::memcpy(out.mutable_data(), m.data().data(), m.data().size() * sizeof(double));
    }
    return out;
}

std::vector<std::size_t> to_labels(const LabelArray& a) {
    if (a.ndim() != 1) {
        throw InvalidArgument("expected a 1-D label array");
    }
    return {a.data(), a.data() + a.shape(0)};
}

py::dict model_dict(const ClusterModel& m) {
    py::dict d;
    d["algorithm"] = std::string(to_string(m.algorithm));
    d["k"] = m.k;
    d["labels"] = py::array_t<std::size_t>(m.labels.size(), m.labels.data());
    d["centers"] = to_array(m.centers);
    d["medoid_rows"] = m.medoid_rows;
    d["inertia"] = m.inertia;
    d["n_iter"] = m.n_iter;
    d["cost_history"] = m.cost_history;
    return d;
}

FeatureMatrix as_features(const Matrix& values) {
    FeatureMatrix f;
    f.values = values;
    for (std::size_t j = 0; j < values.cols(); ++j) {
        f.columns.push_back({"x" + std::to_string(j), ColumnKind::numeric, Transform::zscore, std::nullopt, {}});
    }
    for (std::size_t i = 0; i < values.rows(); ++i) {
        f.row_ids.push_back(std::to_string(i));
    }
    return f;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Vacation-rental clustering engine";
    m.attr("__version__") = VRCLASS_VERSION;

    py::register_exception<Error>(m, "VrclassError");

    m.def(
        "kmeans",
        [](const InArray& x, std::size_t k, std::uint64_t seed, std::size_t max_iter, double tol,
           std::size_t n_init) { return model_dict(kmeans(to_matrix(x), k, seed, {max_iter, tol, n_init})); },
        py::arg("x"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iter") = 300, py::arg("tol") = 1e-4,
        py::arg("n_init") = 1, "k-means++ seeded Lloyd iterations.");

    m.def(
        "pam", [](const InArray& x, std::size_t k, std::size_t max_swaps) {
            return model_dict(pam(to_matrix(x), k, 0, {max_swaps}));
        },
        py::arg("x"), py::arg("k"), py::arg("max_swaps") = 200, "Partitioning Around Medoids (BUILD + SWAP).");

    m.def(
        "clara",
        [](const InArray& x, std::size_t k, std::uint64_t seed, std::size_t n_samples,
           std::optional<std::size_t> sample_size) {
            ClaraOptions o;
            o.n_samples = n_samples;
            o.sample_size = sample_size;
            return model_dict(clara(to_matrix(x), k, seed, o));
        },
        py::arg("x"), py::arg("k"), py::arg("seed") = 0, py::arg("n_samples") = 5, py::arg("sample_size") = py::none(),
        "PAM on row samples; best full-data cost wins.");

    m.def(
        "davies_bouldin",
        [](const InArray& x, const LabelArray& labels, const InArray& centers) {
            return davies_bouldin(to_matrix(x), to_labels(labels), to_matrix(centers));
        },
        py::arg("x"), py::arg("labels"), py::arg("centers"));

    m.def(
        "calinski_harabasz",
        [](const InArray& x, const LabelArray& labels, std::size_t k) {
            return calinski_harabasz(to_matrix(x), to_labels(labels), k);
        },
        py::arg("x"), py::arg("labels"), py::arg("k"));

    m.def(
        "adjusted_rand_index",
        [](const LabelArray& a, const LabelArray& b) { return adjusted_rand_index(to_labels(a), to_labels(b)); },
        py::arg("a"), py::arg("b"));

    m.def(
        "crosstab",
        [](const LabelArray& a, const LabelArray& b) { return crosstab(to_labels(a), to_labels(b)).counts; },
        py::arg("a"), py::arg("b"), "Counts with rows from a and columns from b.");

    m.def(
        "kneedle",
        [](const std::vector<std::size_t>& ks, const std::vector<double>& costs, double sensitivity) {
            return kneedle(ks, costs, sensitivity);
        },
        py::arg("ks"), py::arg("costs"), py::arg("sensitivity") = 1.0, "Knee of a decreasing cost curve, or None.");

    m.def(
        "skewness", [](const std::vector<double>& x) { return measure_skewness(x); }, py::arg("x"),
        "Adjusted Fisher-Pearson sample skewness.");

    m.def(
        "pca",
        [](const InArray& x, double kaiser_threshold) {
            const auto model = fit_pca(as_features(to_matrix(x)), kaiser_threshold);
            py::dict d;
            d["eigenvalues"] = model.eigenvalues;
            d["explained_ratio"] = model.explained_ratio;
            d["loadings"] = to_array(model.loadings);
            d["n_selected"] = model.n_selected;
            return d;
        },
        py::arg("x"), py::arg("kaiser_threshold") = 1.0,
        "Correlation PCA of standardized columns with Kaiser selection.");

    m.def(
        "generate",
        [](const std::string& out_dir, std::size_t n, std::size_t k, double sep, std::uint64_t seed,
           double urban_fraction, double rural_uplift, const std::string& name) {
            SyntheticSpec spec;
            spec.n_points = n;
            spec.n_clusters = k;
            spec.separation = sep;
            spec.seed = seed;
            spec.urban_fraction = urban_fraction;
            spec.rural_occupancy_uplift = rural_uplift;
            const auto data = generate_synthetic(spec);
            write_synthetic(out_dir, name, data);
            return data.true_labels;
        },
        py::arg("out_dir"), py::arg("n"), py::arg("k"), py::arg("sep") = 8.0, py::arg("seed") = 1,
        py::arg("urban_fraction") = 0.7, py::arg("rural_uplift") = 0.0, py::arg("name") = "synthetic",
        "Writes a synthetic listing set and returns its planted labels.");

    m.def(
        "_run",
        [](const std::optional<std::string>& config_path, const std::vector<std::pair<std::string, std::string>>& entries) {
            PipelineConfig config;
            if (config_path) {
                config = load_config(*config_path);
            }
            for (const auto& [key, value] : entries) {
                apply_config_entry(config, key, value);
            }
            const auto result = run_pipeline(config);
            return py::make_tuple(result.ok, result.manifest.dump());
        },
        py::arg("config_path"), py::arg("entries"));
}

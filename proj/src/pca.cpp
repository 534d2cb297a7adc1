#include "vrclass/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "vrclass/csv.hpp"
#include "vrclass/error.hpp"

namespace vrclass {

SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tol_factor, int max_sweeps) {
    const std::size_t n = symmetric.rows();
    if (symmetric.cols() != n) {
        throw InvalidArgument("jacobi_eigen: matrix is not square");
    }
    for (double v : symmetric.data()) {
        if (!std::isfinite(v)) {
            throw NumericError("jacobi_eigen: non-finite matrix entry");
        }
    }

    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            a(i, j) = 0.5 * (symmetric(i, j) + symmetric(j, i));
        }
    }
    Matrix v = Matrix::identity(n);
    const double threshold = tol_factor * static_cast<double>(n);

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                s += a(p, q) * a(p, q);
            }
        }
        return std::sqrt(2.0 * s);
    };

    SymmetricEigen out;
    for (; out.sweeps < max_sweeps; ++out.sweeps) {
        if (off_norm() < threshold) {
            break;
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) {
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (off_norm() >= threshold) {
        throw NumericError("jacobi_eigen: no convergence after " + std::to_string(max_sweeps) + " sweeps");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) {
            out.vectors(i, j) = v(i, order[j]);
        }
    }
    return out;
}

Matrix covariance(const Matrix& data) {
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    if (n < 2) {
        throw InvalidArgument("covariance needs at least 2 rows");
    }
    std::vector<double> mean(d, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            mean[c] += data(r, c);
        }
    }
    for (auto& m : mean) {
        m /= static_cast<double>(n);
    }
    Matrix cov(d, d);
    std::vector<double> centered(d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            centered[c] = data(r, c) - mean[c];
        }
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = i; j < d; ++j) {
                cov(i, j) += centered[i] * centered[j];
            }
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
            cov(i, j) /= static_cast<double>(n - 1);
            cov(j, i) = cov(i, j);
        }
    }
    return cov;
}

PcaModel fit_pca(const FeatureMatrix& standardized, double kaiser_threshold) {
    standardized.check_shape();
    standardized.check_finite();
    const std::size_t n = standardized.rows();
    const std::size_t d = standardized.cols();
    if (d < 2) {
        throw InvalidArgument("PCA needs at least 2 columns, got " + std::to_string(d));
    }
    if (n < 2) {
        throw InvalidArgument("PCA needs at least 2 rows, got " + std::to_string(n));
    }

    PcaModel model;
    model.kaiser_threshold = kaiser_threshold;
    model.n_samples = n;
    for (const auto& c : standardized.columns) {
        model.feature_names.push_back(c.name);
    }
    if (n < d) {
        model.warnings.push_back("rank deficient: " + std::to_string(n) + " rows < " + std::to_string(d) +
                                 " columns; trailing eigenvalues are zero");
    }

    auto eig = jacobi_eigen(covariance(standardized.values));
    for (auto& ev : eig.values) {
        if (ev < 0.0) {
            if (ev < -1e-10) {
                model.warnings.push_back("clamped negative eigenvalue " + csv::format_double(ev));
            }
            ev = 0.0;
        }
    }
    // Largest-magnitude entry of every eigenvector is positive.
    for (std::size_t j = 0; j < d; ++j) {
        std::size_t arg = 0;
        for (std::size_t i = 1; i < d; ++i) {
            if (std::abs(eig.vectors(i, j)) > std::abs(eig.vectors(arg, j))) {
                arg = i;
            }
        }
        if (eig.vectors(arg, j) < 0.0) {
            for (std::size_t i = 0; i < d; ++i) {
                eig.vectors(i, j) = -eig.vectors(i, j);
            }
        }
    }

    model.loadings = std::move(eig.vectors);
    model.eigenvalues = std::move(eig.values);
    const double total = std::accumulate(model.eigenvalues.begin(), model.eigenvalues.end(), 0.0);
    model.explained_ratio.resize(d, 0.0);
    if (total > 0.0) {
        for (std::size_t j = 0; j < d; ++j) {
            model.explained_ratio[j] = model.eigenvalues[j] / total;
        }
    }
    const auto selected = static_cast<std::size_t>(std::count_if(
        model.eigenvalues.begin(), model.eigenvalues.end(), [&](double ev) { return ev >= kaiser_threshold; }));
    model.n_selected = std::max<std::size_t>(1, selected);
    return model;
}

FeatureMatrix project(const FeatureMatrix& standardized, const PcaModel& model, std::optional<std::size_t> k) {
    standardized.check_shape();
    std::vector<std::string> names;
    for (const auto& c : standardized.columns) {
        names.push_back(c.name);
    }
    if (names != model.feature_names) {
        std::string detail;
        for (const auto& name : names) {
            if (std::find(model.feature_names.begin(), model.feature_names.end(), name) == model.feature_names.end()) {
                detail += " unexpected '" + name + "'";
            }
        }
        for (const auto& name : model.feature_names) {
            if (std::find(names.begin(), names.end(), name) == names.end()) {
                detail += " missing '" + name + "'";
            }
        }
        if (detail.empty()) {
            detail = " column order differs";
        }
        throw InvalidArgument("projection schema mismatch:" + detail);
    }
    const std::size_t d = model.dim();
    const std::size_t kk = k.value_or(model.n_selected);
    if (kk < 1 || kk > d) {
        throw InvalidArgument("projection needs 1 <= k <= " + std::to_string(d) + ", got " + std::to_string(kk));
    }

    FeatureMatrix out;
    out.row_ids = standardized.row_ids;
    out.values = Matrix(standardized.rows(), kk);
    for (std::size_t j = 0; j < kk; ++j) {
        out.columns.push_back({"PC" + std::to_string(j), ColumnKind::numeric, Transform::none, std::nullopt, {}});
    }
    for (std::size_t r = 0; r < standardized.rows(); ++r) {
        const auto x = standardized.values.row(r);
        for (std::size_t j = 0; j < kk; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                s += x[i] * model.loadings(i, j);
            }
            out.values(r, j) = s;
        }
    }
    return out;
}

Matrix reconstruct(const Matrix& scores, const PcaModel& model) {
    const std::size_t k = scores.cols();
    const std::size_t d = model.dim();
    if (k > d) {
        throw InvalidArgument("reconstruct: more score columns than components");
    }
    Matrix out(scores.rows(), d);
    for (std::size_t r = 0; r < scores.rows(); ++r) {
        for (std::size_t i = 0; i < d; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                s += scores(r, j) * model.loadings(i, j);
            }
            out(r, i) = s;
        }
    }
    return out;
}

std::vector<std::size_t> numeric_column_indices(const FeatureMatrix& m) {
    std::vector<std::size_t> idx;
    for (std::size_t c = 0; c < m.columns.size(); ++c) {
        if (m.columns[c].kind == ColumnKind::numeric) {
            idx.push_back(c);
        }
    }
    return idx;
}

FeatureMatrix build_cluster_space(const FeatureMatrix& prepared, const PcaModel& model) {
    const auto numeric = numeric_column_indices(prepared);
    std::vector<std::size_t> encoded;
    for (std::size_t c = 0; c < prepared.cols(); ++c) {
        if (prepared.columns[c].kind != ColumnKind::numeric) {
            encoded.push_back(c);
        }
    }
    FeatureMatrix space = project(prepared.select_columns(numeric), model);
    const auto extra = prepared.select_columns(encoded);
    if (extra.cols() == 0) {
        return space;
    }
    Matrix values(space.rows(), space.cols() + extra.cols());
    for (std::size_t r = 0; r < space.rows(); ++r) {
        auto dst = values.row(r);
        std::copy(space.values.row(r).begin(), space.values.row(r).end(), dst.begin());
        std::copy(extra.values.row(r).begin(), extra.values.row(r).end(), dst.begin() + space.cols());
    }
    space.values = std::move(values);
    space.columns.insert(space.columns.end(), extra.columns.begin(), extra.columns.end());
    return space;
}

std::string loadings_table(const PcaModel& model) {
    std::ostringstream out;
    out << "feature";
    for (std::size_t j = 0; j < model.n_selected; ++j) {
        out << ",PC" << j;
    }
    out << '\n';
    for (std::size_t i = 0; i < model.dim(); ++i) {
        out << csv::escape(model.feature_names[i]);
        for (std::size_t j = 0; j < model.n_selected; ++j) {
            out << ',' << csv::format_double(model.loadings(i, j));
        }
        out << '\n';
    }
    return out.str();
}

std::string variance_table(const PcaModel& model) {
    std::ostringstream out;
    out << "component,eigenvalue,explained_ratio,cumulative\n";
    double cumulative = 0.0;
    for (std::size_t j = 0; j < model.eigenvalues.size(); ++j) {
        cumulative += model.explained_ratio[j];
        out << "PC" << j << ',' << csv::format_double(model.eigenvalues[j]) << ','
            << csv::format_double(model.explained_ratio[j]) << ',' << csv::format_double(cumulative) << '\n';
    }
    return out.str();
}

nlohmann::ordered_json PcaModel::to_json() const {
    nlohmann::ordered_json j;
    j["feature_names"] = feature_names;
    j["n_samples"] = n_samples;
    j["kaiser_threshold"] = kaiser_threshold;
    j["n_selected"] = n_selected;
    j["eigenvalues"] = eigenvalues;
    j["explained_ratio"] = explained_ratio;
    auto& rows = j["loadings"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < loadings.rows(); ++i) {
        rows.push_back(std::vector<double>(loadings.row(i).begin(), loadings.row(i).end()));
    }
    j["warnings"] = warnings;
    return j;
}

PcaModel PcaModel::from_json(const nlohmann::json& j) {
    PcaModel m;
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.n_samples = j.at("n_samples").get<std::size_t>();
    m.kaiser_threshold = j.at("kaiser_threshold").get<double>();
    m.n_selected = j.at("n_selected").get<std::size_t>();
    m.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
    m.explained_ratio = j.at("explained_ratio").get<std::vector<double>>();
    m.loadings = Matrix::from_rows(j.at("loadings").get<std::vector<std::vector<double>>>());
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    return m;
}

}  // namespace vrclass

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vrclass/data_model.hpp"

namespace vrclass {

struct SymmetricEigen {
    std::vector<double> values;  // descending
    Matrix vectors;              // column j pairs with values[j]
    int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Iterates until the
/// off-diagonal Frobenius norm drops below tol_factor * dim.
SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tol_factor = 1e-11, int max_sweeps = 100);

/// Sample covariance with divisor n - 1.
Matrix covariance(const Matrix& data);

struct PcaModel {
    Matrix loadings;  // d x d, orthonormal columns, eigenvalue-descending
    std::vector<double> eigenvalues;
    std::vector<double> explained_ratio;
    std::size_t n_selected = 1;
    double kaiser_threshold = 1.0;
    std::vector<std::string> feature_names;
    std::size_t n_samples = 0;
    std::vector<std::string> warnings;

    std::size_t dim() const { return feature_names.size(); }

    nlohmann::ordered_json to_json() const;
    static PcaModel from_json(const nlohmann::json& j);
};

/// Principal components of standardized numeric data. Each eigenvector is
/// flipped so its largest-magnitude entry is positive. n_selected counts
/// eigenvalues >= kaiser_threshold, minimum 1.
PcaModel fit_pca(const FeatureMatrix& standardized, double kaiser_threshold = 1.0);

/// Scores on the first k components (default n_selected), columns PC0..PC(k-1).
FeatureMatrix project(const FeatureMatrix& standardized, const PcaModel& model,
                      std::optional<std::size_t> k = std::nullopt);

/// Maps component scores back to the standardized feature space.
Matrix reconstruct(const Matrix& scores, const PcaModel& model);

/// Indices of numeric-kind columns.
std::vector<std::size_t> numeric_column_indices(const FeatureMatrix& m);

/// Clustering space: PCA scores of the numeric columns followed by the
/// encoded categorical columns.
FeatureMatrix build_cluster_space(const FeatureMatrix& prepared, const PcaModel& model);

/// feature x PC0..PC(n_selected-1) loadings as CSV.
std::string loadings_table(const PcaModel& model);

/// component,eigenvalue,explained_ratio,cumulative
std::string variance_table(const PcaModel& model);

}  // namespace vrclass

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vrclass/data_model.hpp"

namespace vrclass {

/// Mean over clusters of max_{j != i} (s_i + s_j) / d_ij, with s_i the mean
/// distance of cluster i to its center and d_ij the center distance.
double davies_bouldin(const Matrix& points, std::span<const std::size_t> labels, const Matrix& centers);

/// Variance ratio (B / (k - 1)) / (W / (n - k)) using cluster centroids.
double calinski_harabasz(const Matrix& points, std::span<const std::size_t> labels, std::size_t k);

struct CrossTab {
    std::vector<std::vector<std::size_t>> counts;  // rows: labels_a, columns: labels_b
    std::vector<std::size_t> row_totals;
    std::vector<std::size_t> col_totals;
    std::size_t grand_total = 0;

    /// True when both margins sum to the grand total and match the cells.
    bool margins_consistent() const;

    /// Cells plus a "total" column and a "total" row.
    std::string to_csv(const std::string& row_name, const std::string& col_name) const;
};

CrossTab crosstab(std::span<const std::size_t> labels_a, std::span<const std::size_t> labels_b);

double adjusted_rand_index(std::span<const std::size_t> labels_a, std::span<const std::size_t> labels_b);

struct ModelScore {
    std::string tag;
    double dbi = 0.0;
    double chi = 0.0;
};

struct Selection {
    std::size_t index = 0;
    std::string tag;
    bool disagreement = false;  // DBI and CHI favour different models; CHI decided
    bool tie = false;           // another model has identical scores
};

/// Lowest DBI and highest CHI agree -> that model. Otherwise CHI wins and the
/// disagreement is flagged. Equal scores resolve to the earlier model.
Selection select_model(std::span<const ModelScore> scores);

struct ModelValidation {
    std::string tag;
    std::string algorithm;
    std::size_t k = 0;
    double dbi = 0.0;
    double chi = 0.0;
    double inertia = 0.0;
    std::optional<double> ari_vs_truth;
};

struct ValidationReport {
    std::vector<ModelValidation> per_model;
    CrossTab crosstab;
    Selection selection;
    std::optional<double> ari_vs_truth;  // of the selected model

    nlohmann::ordered_json to_json() const;
};

}  // namespace vrclass

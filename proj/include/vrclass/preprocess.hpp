#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vrclass/data_model.hpp"

namespace vrclass {

/// Adjusted Fisher-Pearson sample skewness G1 = g1 * sqrt(n(n-1)) / (n-2).
/// Requires n >= 3 finite values; throws DegenerateColumnError on zero variance.
double measure_skewness(std::span<const double> column);

struct ZScoreParams {
    double mean = 0.0;
    double std = 1.0;  // sample standard deviation (n - 1)

    bool operator==(const ZScoreParams&) const = default;
};

struct NumericColumnPlan {
    std::string name;
    double skewness = 0.0;
    bool log1p = false;
    ZScoreParams zscore;
    std::size_t imputed = 0;  // missing cells filled with the (post-log) column mean

    bool operator==(const NumericColumnPlan&) const = default;
};

/// Observed levels in declared order; level i encodes as i / (m - 1).
struct OrdinalColumnPlan {
    std::string name;
    std::vector<std::string> levels;

    bool operator==(const OrdinalColumnPlan&) const = default;
};

/// Observed categories, sorted; each becomes a "<name>=<category>" 0/1 column.
struct NominalColumnPlan {
    std::string name;
    std::vector<std::string> categories;

    bool operator==(const NominalColumnPlan&) const = default;
};

struct PlanOptions {
    double skew_threshold = 2.0;
    bool drop_duplicate_columns = false;
};

struct PreprocessPlan {
    double skew_threshold = 2.0;
    std::vector<std::string> input_columns;
    std::vector<NumericColumnPlan> numeric;
    std::vector<OrdinalColumnPlan> ordinal;
    std::vector<NominalColumnPlan> nominal;
    std::vector<std::string> log_refused;  // skewed but containing negatives
    std::vector<std::string> dropped_constant;
    std::vector<std::string> dropped_duplicate;

    std::vector<std::string> log_columns() const;
    std::size_t imputed_total() const;

    const NumericColumnPlan* find_numeric(std::string_view name) const;

    /// Maps a standardized value of a numeric column back to original units
    /// (un-zscore, then expm1 when log-transformed).
    double inverse_numeric(std::string_view name, double standardized) const;

    nlohmann::ordered_json to_json() const;
    static PreprocessPlan from_json(const nlohmann::json& j);

    bool operator==(const PreprocessPlan&) const = default;
};

/// Fits transforms on a raw matrix: constant columns dropped, |skew| above the
/// threshold marked for log1p (non-negative columns only), numeric columns
/// z-scored on post-log statistics, categorical encodings built.
PreprocessPlan fit_plan(const FeatureMatrix& raw, const PlanOptions& options = {});

/// Applies a fitted plan. Output columns follow input order with nominal
/// columns expanded in place. Throws PlanError on schema mismatch, unseen
/// categories or missing categorical values.
FeatureMatrix apply_plan(const FeatureMatrix& raw, const PreprocessPlan& plan);

void save_plan(const std::string& path, const PreprocessPlan& plan);
PreprocessPlan load_plan(const std::string& path);

}  // namespace vrclass

#include "vrclass/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "vrclass/error.hpp"

namespace vrclass {

double measure_skewness(std::span<const double> column) {
    const std::size_t n = column.size();
    if (n < 3) {
        throw InvalidArgument("skewness needs at least 3 values, got " + std::to_string(n));
    }
    for (double v : column) {
        if (!std::isfinite(v)) {
            throw NumericError("skewness input contains a non-finite value");
        }
    }
    const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
    if (*lo == *hi) {
        throw DegenerateColumnError("skewness undefined for a zero-variance column");
    }
    const double nd = static_cast<double>(n);
    const double mean = std::accumulate(column.begin(), column.end(), 0.0) / nd;
    double m2 = 0.0;
    double m3 = 0.0;
    for (double v : column) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= nd;
    m3 /= nd;
    const double g1 = m3 / std::pow(m2, 1.5);
    return g1 * std::sqrt(nd * (nd - 1.0)) / (nd - 2.0);
}

std::vector<std::string> PreprocessPlan::log_columns() const {
    std::vector<std::string> out;
    for (const auto& c : numeric) {
        if (c.log1p) {
            out.push_back(c.name);
        }
    }
    return out;
}

std::size_t PreprocessPlan::imputed_total() const {
    std::size_t total = 0;
    for (const auto& c : numeric) {
        total += c.imputed;
    }
    return total;
}

const NumericColumnPlan* PreprocessPlan::find_numeric(std::string_view name) const {
    for (const auto& c : numeric) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

double PreprocessPlan::inverse_numeric(std::string_view name, double standardized) const {
    const auto* c = find_numeric(name);
    if (c == nullptr) {
        throw PlanError("plan has no numeric column '" + std::string(name) + "'");
    }
    const double v = standardized * c->zscore.std + c->zscore.mean;
    return c->log1p ? std::expm1(v) : v;
}

namespace {

bool same_column(const Matrix& m, std::size_t a, std::size_t b) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double x = m(r, a);
        const double y = m(r, b);
        if (!(x == y || (std::isnan(x) && std::isnan(y)))) {
            return false;
        }
    }
    return true;
}

std::string level_name(const ColumnMeta& meta, double code) {
    const auto idx = static_cast<std::size_t>(code);
    if (code < 0.0 || idx >= meta.levels.size() || static_cast<double>(idx) != code) {
        throw PlanError("column '" + meta.name + "' has invalid level code " + std::to_string(code));
    }
    return meta.levels[idx];
}

}  // namespace

PreprocessPlan fit_plan(const FeatureMatrix& raw, const PlanOptions& options) {
    raw.check_shape();
    const std::size_t n = raw.rows();
    if (n < 2) {
        throw PlanError("cannot fit a preprocessing plan on fewer than 2 rows");
    }

    PreprocessPlan plan;
    plan.skew_threshold = options.skew_threshold;
    std::vector<std::size_t> kept_numeric;

    for (std::size_t c = 0; c < raw.cols(); ++c) {
        const auto& meta = raw.columns[c];
        plan.input_columns.push_back(meta.name);
        switch (meta.kind) {
            case ColumnKind::numeric: {
                std::vector<double> observed;
                observed.reserve(n);
                for (std::size_t r = 0; r < n; ++r) {
                    const double v = raw.values(r, c);
                    if (std::isnan(v)) {
                        continue;
                    }
                    if (!std::isfinite(v)) {
                        throw PlanError("column '" + meta.name + "' contains an infinite value");
                    }
                    observed.push_back(v);
                }
                const auto [lo, hi] = std::minmax_element(observed.begin(), observed.end());
                if (observed.empty() || *lo == *hi) {
                    plan.dropped_constant.push_back(meta.name);
                    break;
                }
                if (options.drop_duplicate_columns) {
                    const auto dup = std::find_if(kept_numeric.begin(), kept_numeric.end(),
                                                  [&](std::size_t k) { return same_column(raw.values, k, c); });
                    if (dup != kept_numeric.end()) {
                        plan.dropped_duplicate.push_back(meta.name);
                        break;
                    }
                }
                kept_numeric.push_back(c);

                NumericColumnPlan col;
                col.name = meta.name;
                col.imputed = n - observed.size();
                if (observed.size() >= 3) {
                    col.skewness = measure_skewness(observed);
                }
                if (std::abs(col.skewness) > options.skew_threshold) {
                    if (*lo < 0.0) {
                        plan.log_refused.push_back(meta.name);
                    } else {
                        col.log1p = true;
                        for (auto& v : observed) {
                            v = std::log1p(v);
                        }
                    }
                }
                const double mean =
                    std::accumulate(observed.begin(), observed.end(), 0.0) / static_cast<double>(observed.size());
                double ss = 0.0;
                for (double v : observed) {
                    ss += (v - mean) * (v - mean);
                }
                // imputed cells sit at the mean and add nothing to ss
                col.zscore = {mean, std::sqrt(ss / static_cast<double>(n - 1))};
                if (!(col.zscore.std > 0.0)) {
                    throw DegenerateColumnError("column '" + meta.name + "' has zero spread after transform");
                }
                plan.numeric.push_back(std::move(col));
                break;
            }
            case ColumnKind::ordinal: {
                std::vector<bool> seen(meta.levels.size(), false);
                for (std::size_t r = 0; r < n; ++r) {
                    const double v = raw.values(r, c);
                    if (!std::isnan(v)) {
                        (void)level_name(meta, v);
                        seen[static_cast<std::size_t>(v)] = true;
                    }
                }
                OrdinalColumnPlan col{meta.name, {}};
                for (std::size_t l = 0; l < meta.levels.size(); ++l) {
                    if (seen[l]) {
                        col.levels.push_back(meta.levels[l]);
                    }
                }
                if (col.levels.size() < 2) {
                    plan.dropped_constant.push_back(meta.name);
                } else {
                    plan.ordinal.push_back(std::move(col));
                }
                break;
            }
            case ColumnKind::nominal: {
                std::set<std::string> categories;
                for (std::size_t r = 0; r < n; ++r) {
                    const double v = raw.values(r, c);
                    if (!std::isnan(v)) {
                        categories.insert(level_name(meta, v));
                    }
                }
                if (categories.size() < 2) {
                    plan.dropped_constant.push_back(meta.name);
                } else {
                    plan.nominal.push_back({meta.name, {categories.begin(), categories.end()}});
                }
                break;
            }
            case ColumnKind::nominal_onehot:
                throw PlanError("column '" + meta.name + "' is already one-hot encoded");
        }
    }

    if (plan.numeric.empty() && plan.ordinal.empty() && plan.nominal.empty()) {
        throw PlanError("every column is constant; nothing left to cluster on");
    }
    return plan;
}

FeatureMatrix apply_plan(const FeatureMatrix& raw, const PreprocessPlan& plan) {
    raw.check_shape();
    std::vector<std::string> names;
    for (const auto& c : raw.columns) {
        names.push_back(c.name);
    }
    if (names != plan.input_columns) {
        std::string diff;
        for (const auto& name : plan.input_columns) {
            if (std::find(names.begin(), names.end(), name) == names.end()) {
                diff += " missing '" + name + "'";
            }
        }
        for (const auto& name : names) {
            if (std::find(plan.input_columns.begin(), plan.input_columns.end(), name) == plan.input_columns.end()) {
                diff += " unexpected '" + name + "'";
            }
        }
        if (diff.empty()) {
            diff = " column order differs";
        }
        throw PlanError("matrix schema does not match the plan:" + diff);
    }

    const std::size_t n = raw.rows();
    FeatureMatrix out;
    out.row_ids = raw.row_ids;
    std::vector<std::vector<double>> cols;

    for (std::size_t c = 0; c < raw.cols(); ++c) {
        const auto& meta = raw.columns[c];
        if (meta.kind == ColumnKind::numeric) {
            const auto* p = plan.find_numeric(meta.name);
            if (p == nullptr) {
                continue;  // dropped
            }
            std::vector<double> v(n);
            for (std::size_t r = 0; r < n; ++r) {
                double x = raw.values(r, c);
                if (std::isnan(x)) {
                    v[r] = 0.0;
                    continue;
                }
                if (p->log1p) {
                    if (x < 0.0) {
                        throw PlanError("column '" + meta.name + "' has a negative value but is log-transformed");
                    }
                    x = std::log1p(x);
                }
                v[r] = (x - p->zscore.mean) / p->zscore.std;
            }
            out.columns.push_back({meta.name, ColumnKind::numeric,
                                   p->log1p ? Transform::log1p_then_zscore : Transform::zscore, std::nullopt, {}});
            cols.push_back(std::move(v));
        } else if (meta.kind == ColumnKind::ordinal) {
            const auto it = std::find_if(plan.ordinal.begin(), plan.ordinal.end(),
                                         [&](const auto& o) { return o.name == meta.name; });
            if (it == plan.ordinal.end()) {
                continue;
            }
            const double denom = static_cast<double>(it->levels.size() - 1);
            std::vector<double> v(n);
            for (std::size_t r = 0; r < n; ++r) {
                const double x = raw.values(r, c);
                if (std::isnan(x)) {
                    throw PlanError("column '" + meta.name + "' is missing a category at row " + std::to_string(r));
                }
                const auto level = level_name(meta, x);
                const auto pos = std::find(it->levels.begin(), it->levels.end(), level);
                if (pos == it->levels.end()) {
                    throw PlanError("column '" + meta.name + "' has unseen category '" + level + "'");
                }
                v[r] = static_cast<double>(pos - it->levels.begin()) / denom;
            }
            out.columns.push_back({meta.name, ColumnKind::ordinal, Transform::none, std::nullopt, it->levels});
            cols.push_back(std::move(v));
        } else if (meta.kind == ColumnKind::nominal) {
            const auto it = std::find_if(plan.nominal.begin(), plan.nominal.end(),
                                         [&](const auto& o) { return o.name == meta.name; });
            if (it == plan.nominal.end()) {
                continue;
            }
            const std::size_t first = cols.size();
            for (const auto& cat : it->categories) {
                out.columns.push_back(
                    {meta.name + "=" + cat, ColumnKind::nominal_onehot, Transform::none, meta.name, {}});
                cols.emplace_back(n, 0.0);
            }
            for (std::size_t r = 0; r < n; ++r) {
                const double x = raw.values(r, c);
                if (std::isnan(x)) {
                    throw PlanError("column '" + meta.name + "' is missing a category at row " + std::to_string(r));
                }
                const auto level = level_name(meta, x);
                const auto pos = std::find(it->categories.begin(), it->categories.end(), level);
                if (pos == it->categories.end()) {
                    throw PlanError("column '" + meta.name + "' has unseen category '" + level + "'");
                }
                cols[first + static_cast<std::size_t>(pos - it->categories.begin())][r] = 1.0;
            }
        } else {
            throw PlanError("column '" + meta.name + "' is already one-hot encoded");
        }
    }

    out.values = Matrix(n, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        for (std::size_t r = 0; r < n; ++r) {
            out.values(r, j) = cols[j][r];
        }
    }
    out.check_finite();
    return out;
}

nlohmann::ordered_json PreprocessPlan::to_json() const {
    nlohmann::ordered_json j;
    j["skew_threshold"] = skew_threshold;
    j["input_columns"] = input_columns;
    j["log_columns"] = log_columns();
    j["log_refused"] = log_refused;
    j["dropped_constant"] = dropped_constant;
    j["dropped_duplicate"] = dropped_duplicate;
    j["imputed_total"] = imputed_total();
    auto& num = j["numeric"] = nlohmann::ordered_json::array();
    for (const auto& c : numeric) {
        num.push_back({{"name", c.name},
                       {"skewness", c.skewness},
                       {"log1p", c.log1p},
                       {"mean", c.zscore.mean},
                       {"std", c.zscore.std},
                       {"imputed", c.imputed}});
    }
    auto& ord = j["ordinal"] = nlohmann::ordered_json::array();
    for (const auto& c : ordinal) {
        ord.push_back({{"name", c.name}, {"levels", c.levels}});
    }
    auto& nom = j["onehot"] = nlohmann::ordered_json::array();
    for (const auto& c : nominal) {
        nom.push_back({{"name", c.name}, {"categories", c.categories}});
    }
    return j;
}

PreprocessPlan PreprocessPlan::from_json(const nlohmann::json& j) {
    try {
        PreprocessPlan plan;
        plan.skew_threshold = j.at("skew_threshold").get<double>();
        plan.input_columns = j.at("input_columns").get<std::vector<std::string>>();
        plan.log_refused = j.at("log_refused").get<std::vector<std::string>>();
        plan.dropped_constant = j.at("dropped_constant").get<std::vector<std::string>>();
        plan.dropped_duplicate = j.at("dropped_duplicate").get<std::vector<std::string>>();
        for (const auto& c : j.at("numeric")) {
            NumericColumnPlan col;
            col.name = c.at("name").get<std::string>();
            col.skewness = c.at("skewness").get<double>();
            col.log1p = c.at("log1p").get<bool>();
            col.zscore = {c.at("mean").get<double>(), c.at("std").get<double>()};
            col.imputed = c.at("imputed").get<std::size_t>();
            plan.numeric.push_back(std::move(col));
        }
        for (const auto& c : j.at("ordinal")) {
            plan.ordinal.push_back({c.at("name").get<std::string>(), c.at("levels").get<std::vector<std::string>>()});
        }
        for (const auto& c : j.at("onehot")) {
            plan.nominal.push_back(
                {c.at("name").get<std::string>(), c.at("categories").get<std::vector<std::string>>()});
        }
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw PlanError(std::string("malformed plan: ") + e.what());
    }
}

void save_plan(const std::string& path, const PreprocessPlan& plan) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw PlanError("cannot write plan to '" + path + "'");
    }
    out << plan.to_json().dump(2) << '\n';
}

PreprocessPlan load_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw PlanError("cannot read plan from '" + path + "'");
    }
    try {
        return PreprocessPlan::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw PlanError(std::string("plan is not valid JSON: ") + e.what());
    }
}

}  // namespace vrclass

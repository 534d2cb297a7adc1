#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "support.hpp"
#include "vrclass/error.hpp"
#include "vrclass/ingestion.hpp"
#include "vrclass/preprocess.hpp"

using namespace vrclass;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

FeatureMatrix numeric_matrix(const std::vector<std::string>& names, const std::vector<std::vector<double>>& cols) {
    FeatureMatrix m;
    const std::size_t n = cols.front().size();
    m.values = Matrix(n, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        m.columns.push_back({names[j], ColumnKind::numeric, Transform::none, std::nullopt, {}});
        for (std::size_t i = 0; i < n; ++i) {
            m.values(i, j) = cols[j][i];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        m.row_ids.push_back("r" + std::to_string(i));
    }
    return m;
}

// Adjusted Fisher-Pearson skewness via the sample standard deviation.
double textbook_skew(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) {
        ss += (v - mean) * (v - mean);
    }
    const double s = std::sqrt(ss / (n - 1.0));
    double cube = 0.0;
    for (double v : x) {
        cube += std::pow((v - mean) / s, 3.0);
    }
    return n / ((n - 1.0) * (n - 2.0)) * cube;
}

std::vector<double> column(const FeatureMatrix& m, const std::string& name) {
    return m.values.column(*m.find_column(name));
}

}  // namespace

TEST_CASE("skewness") {
    CHECK(std::abs(measure_skewness(std::vector<double>{1, 2, 3, 4, 5})) <= 1e-12);
    CHECK(measure_skewness(std::vector<double>{0, 0, 0, 1000}) > 0.0);
    const std::vector<double> x = {1, 1, 2, 2, 3, 3, 40};
    CHECK(measure_skewness(x) == doctest::Approx(textbook_skew(x)).epsilon(1e-12));
    CHECK(measure_skewness(x) == doctest::Approx(2.6278717679849106).epsilon(1e-12));
    CHECK_THROWS_AS(measure_skewness(std::vector<double>{2, 2, 2}), DegenerateColumnError);
    CHECK_THROWS_AS(measure_skewness(std::vector<double>{1, 2}), InvalidArgument);
}

TEST_CASE("skewed columns are log-marked") {
    Rng rng(4);
    std::vector<double> revenue, symmetric;
    for (int i = 0; i < 500; ++i) {
        revenue.push_back(std::exp(9.0 + 1.3 * rng.normal()));
        symmetric.push_back(rng.normal());
    }
    const double skew = measure_skewness(revenue);
    REQUIRE(skew > 2.0);
    const auto plan = fit_plan(numeric_matrix({"annual_revenue", "z"}, {revenue, symmetric}));
    CHECK(plan.log_columns() == std::vector<std::string>{"annual_revenue"});

    const auto flat = fit_plan(numeric_matrix({"a", "b"}, {symmetric, symmetric}));
    CHECK(flat.log_columns().empty());
}

TEST_CASE("skewed column with negatives is refused") {
    std::vector<double> x = {-1, 0, 0, 0, 0, 0, 0, 0, 0, 100};
    const auto plan = fit_plan(numeric_matrix({"x", "y"}, {x, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}}));
    CHECK(plan.log_columns().empty());
    CHECK(plan.log_refused == std::vector<std::string>{"x"});
}

TEST_CASE("z-scores on fitting data") {
    Rng rng(8);
    std::vector<double> a, b;
    for (int i = 0; i < 300; ++i) {
        a.push_back(5 + 3 * rng.normal());
        b.push_back(std::exp(rng.normal() * 1.5));
    }
    const auto raw = numeric_matrix({"a", "b"}, {a, b});
    const auto out = apply_plan(raw, fit_plan(raw));
    for (const auto& name : {"a", "b"}) {
        const auto v = column(out, name);
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double ss = 0.0;
        for (double x : v) {
            ss += (x - mean) * (x - mean);
        }
        CHECK(std::abs(mean) <= 1e-9);
        CHECK(std::abs(std::sqrt(ss / (v.size() - 1)) - 1.0) <= 1e-9);
    }
    CHECK(out.columns[1].transform == Transform::log1p_then_zscore);
    CHECK(out.columns[0].transform == Transform::zscore);
}

TEST_CASE("missing numeric cells are imputed at the mean") {
    const auto raw = numeric_matrix({"a", "b"}, {{1, kNaN, 3, 4}, {1, 2, 3, 5}});
    const auto plan = fit_plan(raw);
    CHECK(plan.find_numeric("a")->imputed == 1);
    CHECK(plan.imputed_total() == 1);
    const auto out = apply_plan(raw, plan);
    CHECK(out.values(1, 0) == 0.0);
    CHECK_NOTHROW(out.check_finite());
}

TEST_CASE("constant and duplicate columns") {
    const auto raw = numeric_matrix({"a", "c", "dup"}, {{1, 2, 3}, {7, 7, 7}, {1, 2, 3}});
    const auto plan = fit_plan(raw, {2.0, true});
    CHECK(plan.dropped_constant == std::vector<std::string>{"c"});
    CHECK(plan.dropped_duplicate == std::vector<std::string>{"dup"});
    CHECK(apply_plan(raw, plan).cols() == 1);
}

TEST_CASE("categorical encodings") {
    SUBCASE("one-hot columns in lexicographic order") {
        std::vector<PropertyRecord> recs = {testing::valid_record("a"), testing::valid_record("b"),
                                            testing::valid_record("c")};
        recs[1].urban_rural = UrbanRural::rural;
        recs[0].adr = 50;
        recs[2].adr = 70;
        recs[1].citytown_class = "village_or_smaller";
        const auto raw = records_to_matrix(recs);
        const auto plan = fit_plan(raw);
        const auto nominal = std::find_if(plan.nominal.begin(), plan.nominal.end(),
                                          [](const auto& p) { return p.name == "urban_rural"; });
        REQUIRE(nominal != plan.nominal.end());
        CHECK(nominal->categories == std::vector<std::string>{"rural", "urban"});
        const auto out = apply_plan(raw, plan);
        CHECK(column(out, "urban_rural=rural") == std::vector<double>{0, 1, 0});
        CHECK(column(out, "urban_rural=urban") == std::vector<double>{1, 0, 1});
        const auto& meta = out.columns[*out.find_column("urban_rural=urban")];
        CHECK(meta.kind == ColumnKind::nominal_onehot);
        CHECK(meta.source_category == "urban_rural");
        // single property type: constant, dropped
        CHECK(std::find(plan.dropped_constant.begin(), plan.dropped_constant.end(), "property_type") !=
              plan.dropped_constant.end());
    }
    SUBCASE("ordinal ranks scaled to [0,1]") {
        FeatureMatrix raw;
        raw.values = Matrix::from_rows({{0}, {1}, {2}, {3}, {4}, {2}});
        raw.columns = {{"level", ColumnKind::ordinal, Transform::none, std::nullopt, {"l0", "l1", "l2", "l3", "l4"}}};
        raw.row_ids = {"a", "b", "c", "d", "e", "f"};
        const auto out = apply_plan(raw, fit_plan(raw));
        CHECK(out.values(2, 0) == 0.5);
        CHECK(out.values(4, 0) == 1.0);
        CHECK(out.values(0, 0) == 0.0);
    }
    SUBCASE("unseen category at apply time") {
        std::vector<PropertyRecord> recs = {testing::valid_record("a"), testing::valid_record("b")};
        recs[1].urban_rural = UrbanRural::rural;
        recs[1].adr = 10;
        recs[1].property_type = "private-room";
        const auto plan = fit_plan(records_to_matrix(recs));
        recs[1].property_type = "hotel-room";
        CHECK_THROWS_AS(apply_plan(records_to_matrix(recs), plan), PlanError);
    }
}

TEST_CASE("plan json round trip and inverse transform") {
    testing::TempDir dir("vrclass_plan");
    SyntheticSpec spec;
    spec.n_points = 300;
    const auto data = generate_synthetic(spec);
    const auto raw = records_to_matrix(data.records);
    const auto plan = fit_plan(raw);
    save_plan(dir.file("plan.json"), plan);
    const auto back = load_plan(dir.file("plan.json"));
    CHECK(back == plan);
    CHECK(apply_plan(raw, back) == apply_plan(raw, plan));

    const auto out = apply_plan(raw, plan);
    for (const auto& col : plan.numeric) {
        const auto j = *out.find_column(col.name);
        const auto i = *raw.find_column(col.name);
        for (std::size_t r = 0; r < 5; ++r) {
            if (!std::isnan(raw.values(r, i))) {
                CHECK(plan.inverse_numeric(col.name, out.values(r, j)) ==
                      doctest::Approx(raw.values(r, i)).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("schema mismatch is rejected") {
    const auto raw = numeric_matrix({"a", "b"}, {{1, 2, 3}, {3, 1, 2}});
    const auto plan = fit_plan(raw);
    const auto other = numeric_matrix({"a", "c"}, {{1, 2, 3}, {3, 1, 2}});
    CHECK_THROWS_AS(apply_plan(other, plan), PlanError);
}

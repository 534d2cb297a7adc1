#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "vrclass/csv.hpp"
#include "vrclass/ingestion.hpp"
#include "vrclass/preprocess.hpp"
#include "vrclass/profile.hpp"

using namespace vrclass;
using namespace std::chrono;

namespace {

const FeatureSummary& feature(const ClusterProfile& p, const std::string& name) {
    const auto it = std::find_if(p.features.begin(), p.features.end(), [&](const auto& f) { return f.name == name; });
    REQUIRE(it != p.features.end());
    return *it;
}

std::vector<PropertyRecord> small_set() {
    std::vector<PropertyRecord> recs;
    for (int i = 0; i < 6; ++i) {
        auto r = testing::valid_record("P" + std::to_string(i));
        r.adr = 50.0 + 10.0 * i;
        r.rating_overall = 3.0 + 0.2 * i;
        r.urban_rural = i < 4 ? UrbanRural::urban : UrbanRural::rural;
        recs.push_back(r);
    }
    return recs;
}

}  // namespace

TEST_CASE("single cluster reproduces the global summary") {
    const auto recs = small_set();
    const std::vector<std::size_t> labels(recs.size(), 0);
    const auto result = profile_clusters(recs, labels);
    REQUIRE(result.profiles.size() == 1);
    const auto& p = result.profiles[0];
    CHECK(p.size == 6);
    const auto& adr = feature(p, "adr");
    CHECK(adr.mean == doctest::Approx(75.0));
    CHECK(adr.median == doctest::Approx(75.0));
    CHECK(adr.std == doctest::Approx(std::sqrt(1750.0 / 5.0)));
    CHECK(adr.count == 6);
    for (const auto& f : p.top_distinguishing_features) {
        CHECK(f.effect == 0.0);
    }
    CHECK(p.urban_share == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("a planted rating difference is the top feature") {
    auto recs = small_set();
    for (auto& r : recs) {
        r.adr = 80.0;
    }
    std::vector<std::size_t> labels = {0, 0, 0, 1, 1, 1};
    for (std::size_t i = 0; i < recs.size(); ++i) {
        recs[i].rating_cleanliness = labels[i] == 1 ? 2.0 : 4.9;
    }
    const auto result = profile_clusters(recs, labels);
    REQUIRE(result.profiles.size() == 2);
    CHECK(result.profiles[1].top_distinguishing_features.front().name == "rating_cleanliness");
    CHECK(result.profiles[1].top_distinguishing_features.front().effect < 0.0);
    CHECK(result.profiles[0].top_distinguishing_features.front().effect > 0.0);
}

TEST_CASE("missing ratings are excluded from counts") {
    auto recs = small_set();
    recs[0].rating_overall.reset();
    const auto result = profile_clusters(recs, std::vector<std::size_t>(6, 0));
    CHECK(feature(result.profiles[0], "rating_overall").count == 5);
}

TEST_CASE("empty clusters are reported") {
    const auto recs = small_set();
    const std::vector<std::size_t> labels = {0, 0, 0, 2, 2, 2};
    const auto result = profile_clusters(recs, labels);
    CHECK(result.profiles.size() == 2);
    CHECK(result.warnings.size() == 1);
}

TEST_CASE("urban/rural distribution") {
    const auto recs = small_set();
    const std::vector<std::size_t> labels = {0, 0, 0, 0, 1, 1};
    const auto result = profile_clusters(recs, labels);
    CHECK(result.profiles[0].urban_share == 1.0);
    CHECK(result.profiles[1].urban_share == 0.0);
    const auto counts = urban_rural_distribution(recs, labels);
    REQUIRE(counts.size() == 2);
    CHECK(counts[0].urban == 4);
    CHECK(counts[1].rural == 2);
    CHECK(urban_rural_csv(counts) == "cluster,urban,rural\n0,4,0\n1,0,2\n");

    SyntheticSpec spec;
    spec.n_points = 1000;
    const auto d = generate_synthetic(spec);
    const auto all = urban_rural_distribution(d.records, std::vector<std::size_t>(1000, 0));
    CHECK(all[0].urban == 700);
    CHECK(all[0].rural == 300);
}

TEST_CASE("descriptive series") {
    const auto window = study_window();
    SUBCASE("one listing active all window") {
        auto r = testing::valid_record();
        r.first_active = year{2019} / 1 / 1;
        r.last_active = year{2022} / 1 / 1;
        r.annual_revenue = 1200;
        r.occupancy_rate = 0.25;
        const std::vector<PropertyRecord> recs = {r};
        const auto s = descriptive_series(recs, window);
        REQUIRE(s.revenue.size() == 19);  // 2020-01 .. 2021-07
        CHECK(s.revenue.front().month == year{2020} / 1);
        CHECK(s.revenue.back().month == year{2021} / 7);
        for (const auto& p : s.revenue) {
            CHECK(p.urban_count == 1);
            CHECK(p.urban_mean == 100.0);
            CHECK_FALSE(p.rural_mean);
        }
        CHECK(s.occupancy[5].urban_mean == 0.25);
    }
    SUBCASE("activity bounds restrict the months") {
        auto r = testing::valid_record();  // 2020-03-01 .. 2021-03-01
        const std::vector<PropertyRecord> recs = {r};
        const auto s = descriptive_series(recs, window);
        const auto active = std::count_if(s.revenue.begin(), s.revenue.end(), [](const auto& p) { return p.urban_count; });
        CHECK(active == 13);
        CHECK(s.revenue[0].urban_count == 0);
        CHECK(s.revenue[2].urban_count == 1);
    }
    SUBCASE("planted rural uplift") {
        SyntheticSpec spec;
        spec.n_points = 2000;
        spec.rural_occupancy_uplift = 0.2;
        const auto d = generate_synthetic(spec);
        const auto s = descriptive_series(d.records, window);
        double diff = 0.0;
        std::size_t months = 0;
        for (const auto& p : s.occupancy) {
            if (p.urban_mean && p.rural_mean) {
                diff += *p.rural_mean - *p.urban_mean;
                ++months;
            }
        }
        REQUIRE(months > 0);
        CHECK(diff / months == doctest::Approx(0.2).epsilon(0.25));
    }
    SUBCASE("empty input") {
        const auto s = descriptive_series(std::vector<PropertyRecord>{}, window);
        CHECK(s.revenue.empty());
        CHECK(s.occupancy.empty());
    }
    SUBCASE("csv layout") {
        const std::vector<PropertyRecord> recs = {testing::valid_record()};
        const auto text = series_csv(descriptive_series(recs, window).revenue, window);
        CHECK(text.rfind("# window_start=2020-01-30\n# window_end=2021-07-19\n"
                         "month,urban_mean,urban_count,rural_mean,rural_count\n2020-01,,0,,0\n",
                         0) == 0);
    }
}

TEST_CASE("cluster point export") {
    auto recs = small_set();
    recs[2].latitude.reset();
    recs[2].longitude.reset();
    const std::vector<std::size_t> labels = {0, 1, 0, 1, 0, 1};
    const auto out = export_cluster_points(recs, labels);
    CHECK(out.rows_written == 5);
    CHECK(out.rows_skipped == 1);
    std::istringstream in(out.csv);
    const auto table = csv::read_table(in);
    CHECK(table.header == csv::Row{"property_id", "latitude", "longitude", "cluster"});
    CHECK(table.rows.size() == 5);
}

TEST_CASE("back-transformed means") {
    SyntheticSpec spec;
    spec.n_points = 400;
    const auto d = generate_synthetic(spec);
    const auto raw = records_to_matrix(d.records);
    const auto plan = fit_plan(raw);
    const auto result = profile_clusters(d.records, std::vector<std::size_t>(d.records.size(), 0), &plan);
    for (const auto& f : result.profiles[0].features) {
        const auto* col = plan.find_numeric(f.name);
        if (col == nullptr) {
            continue;
        }
        REQUIRE(f.back_transformed_mean);
        if (col->log1p) {
            // exp(mean(log1p x)) - 1 is the geometric-style centre, not the arithmetic mean
            CHECK(*f.back_transformed_mean <= f.mean * 1.0000001);
        } else {
            CHECK(*f.back_transformed_mean == doctest::Approx(f.mean).epsilon(1e-6));
        }
    }
}

#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "vrclass/cluster.hpp"
#include "vrclass/error.hpp"
#include "vrclass/ingestion.hpp"
#include "vrclass/pipeline.hpp"
#include "vrclass/validate.hpp"

using namespace vrclass;
using namespace std::chrono;

namespace {

std::string to_csv(const std::vector<PropertyRecord>& recs) {
    std::ostringstream out;
    write_properties(out, recs);
    return out.str();
}

LoadResult load(const std::string& text) {
    std::istringstream in(text);
    return load_properties(in, study_window());
}

}  // namespace

TEST_CASE("property csv round trip") {
    std::vector<PropertyRecord> recs = {testing::valid_record("A"), testing::valid_record("B, quoted")};
    recs[1].rating_overall.reset();
    recs[1].latitude.reset();
    recs[1].longitude.reset();
    recs[1].imd_index.reset();
    const auto got = load(to_csv(recs));
    CHECK(got.report.rows_read == 2);
    CHECK(got.report.rows_kept == 2);
    REQUIRE(got.records.size() == 2);
    CHECK(got.records[0] == recs[0]);
    CHECK(got.records[1] == recs[1]);
}

TEST_CASE("window exclusion") {
    std::vector<PropertyRecord> recs = {testing::valid_record("A"), testing::valid_record("B"),
                                        testing::valid_record("C")};
    recs[1].first_active = year{2019} / 2 / 1;
    recs[1].last_active = year{2019} / 11 / 30;
    const auto got = load(to_csv(recs));
    CHECK(got.records.size() == 2);
    CHECK(got.report.rows_dropped_window == 1);
    CHECK(got.report.balanced());
}

TEST_CASE("header-only file") {
    std::vector<PropertyRecord> none;
    const auto got = load(to_csv(none));
    CHECK(got.records.empty());
    CHECK(got.report.rows_read == 0);
}

TEST_CASE("invalid and malformed rows are counted and skipped") {
    std::vector<PropertyRecord> recs = {testing::valid_record("A"), testing::valid_record("B")};
    recs[1].occupancy_rate = 1.5;
    auto text = to_csv(recs);
    text += "P9,not-a-number\n";
    const auto got = load(text);
    CHECK(got.records.size() == 1);
    CHECK(got.report.rows_dropped_invalid == 2);
    CHECK(got.report.rows_read == 3);
    CHECK(got.report.balanced());
}

TEST_CASE("missing column is a schema error") {
    auto text = to_csv({testing::valid_record()});
    const auto pos = text.find(",adr");
    text.replace(pos, 4, ",price");
    CHECK_THROWS_AS(load(text), IngestError);
    CHECK_THROWS_AS(load(""), IngestError);
}

TEST_CASE("unreadable file is fatal") {
    CHECK_THROWS_AS(load_properties("/nonexistent/props.csv", study_window()), IngestError);
}

TEST_CASE("lsoa join") {
    std::vector<PropertyRecord> recs = {testing::valid_record("A"), testing::valid_record("B")};
    recs[1].lsoa_code = "E01000002";
    for (auto& r : recs) {
        r.imd_index.reset();
        r.ahah_index.reset();
        r.citytown_class.reset();
        r.urban_rural.reset();
    }
    LsoaLookup lookup;
    lookup["E01000001"] = {"E01000001", 12.5, 30.0, "small_town", UrbanRural::rural};
    lookup["E01000002"] = {"E01000002", 40.0, 10.0, "core_city", UrbanRural::urban};

    SUBCASE("all codes found") {
        const auto j = join_lsoa(recs, lookup);
        CHECK(j.miss_count == 0);
        REQUIRE(j.records.size() == 2);
        CHECK(j.records[0].imd_index == 12.5);
        CHECK(j.records[0].urban_rural == UrbanRural::rural);
        CHECK(j.records[1].citytown_class == "core_city");
    }
    SUBCASE("one miss") {
        lookup.erase("E01000002");
        const auto j = join_lsoa(recs, lookup);
        CHECK(j.miss_count == 1);
        CHECK(j.records.size() == 1);
    }
    SUBCASE("empty lookup") {
        const auto j = join_lsoa(recs, {});
        CHECK(j.records.empty());
        CHECK(j.miss_count == 2);
    }
    SUBCASE("lookup csv round trip") {
        std::ostringstream out;
        write_lsoa_lookup(out, lookup);
        std::istringstream in(out.str());
        CHECK(load_lsoa_lookup(in) == lookup);
    }
    SUBCASE("duplicate lookup code is fatal") {
        std::istringstream in(
            "lsoa_code,imd_index,ahah_index,citytown_class,urban_rural\n"
            "E1,1,2,core_city,urban\nE1,1,2,core_city,urban\n");
        CHECK_THROWS_AS(load_lsoa_lookup(in), IngestError);
    }
}

TEST_CASE("ingest tallies join misses") {
    testing::TempDir dir("vrclass_ingest");
    std::vector<PropertyRecord> recs = {testing::valid_record("A"), testing::valid_record("B"),
                                        testing::valid_record("C")};
    recs[2].lsoa_code = "E09999999";
    write_properties(dir.file("p.csv"), recs);
    LsoaLookup lookup;
    lookup["E01000001"] = {"E01000001", 1.0, 2.0, "core_city", UrbanRural::urban};
    {
        std::ofstream out(dir.file("l.csv"));
        write_lsoa_lookup(out, lookup);
    }
    const auto got = ingest(dir.file("p.csv"), dir.file("l.csv"), study_window());
    CHECK(got.report.rows_kept == 2);
    CHECK(got.report.rows_dropped_join_miss == 1);
    CHECK(got.report.balanced());
}

TEST_CASE("synthetic generator") {
    SUBCASE("deterministic") {
        SyntheticSpec spec;
        spec.n_points = 100;
        spec.n_clusters = 1;
        spec.separation = 0;
        spec.seed = 7;
        const auto a = generate_synthetic(spec);
        const auto b = generate_synthetic(spec);
        CHECK(to_csv(a.records) == to_csv(b.records));
        CHECK(a.true_labels == b.true_labels);
    }
    SUBCASE("precondition") {
        SyntheticSpec spec;
        spec.n_points = 3;
        spec.n_clusters = 4;
        CHECK_THROWS_AS(generate_synthetic(spec), InvalidArgument);
        spec.n_points = 100;
        spec.n_clusters = 25;
        CHECK_THROWS_AS(generate_synthetic(spec), InvalidArgument);
    }
    SUBCASE("records are valid, joinable and inside the window") {
        SyntheticSpec spec;
        spec.n_points = 300;
        const auto d = generate_synthetic(spec);
        REQUIRE(d.records.size() == 300);
        for (const auto& r : d.records) {
            CHECK(validate_record(r).empty());
            CHECK(overlaps(r.first_active, r.last_active, study_window()));
            const auto it = d.lookup.find(r.lsoa_code);
            REQUIRE(it != d.lookup.end());
            CHECK(it->second.urban_rural == r.urban_rural);
        }
    }
    SUBCASE("exact urban share") {
        SyntheticSpec spec;
        spec.n_points = 1000;
        spec.urban_fraction = 0.7;
        const auto d = generate_synthetic(spec);
        const auto urban = std::count_if(d.records.begin(), d.records.end(),
                                         [](const auto& r) { return r.urban_rural == UrbanRural::urban; });
        CHECK(urban == 700);
    }
    SUBCASE("planted clusters are recoverable by k-means") {
        SyntheticSpec spec;
        spec.n_points = 200;
        spec.n_clusters = 4;
        spec.separation = 8;
        spec.seed = 1;
        const auto d = generate_synthetic(spec);
        PipelineConfig config;
        const auto prepared = prepare_features(d.records, config);
        const auto model = kmeans(prepared.space.values, 4, 17, {300, 1e-4, 10});
        CHECK(adjusted_rand_index(model.labels, d.true_labels) >= 0.9);
    }
}

TEST_CASE("synthetic files and truth sidecar") {
    testing::TempDir dir("vrclass_synth");
    SyntheticSpec spec;
    spec.n_points = 50;
    spec.n_clusters = 2;
    const auto d = generate_synthetic(spec);
    write_synthetic(dir.str(), "s", d);
    const auto loaded = ingest(dir.file("s.csv"), dir.file("s.lsoa.csv"), study_window());
    CHECK(loaded.records.size() == 50);
    const auto truth = load_truth(dir.file("s.truth.csv"));
    CHECK(truth.size() == 50);
    for (std::size_t i = 0; i < d.records.size(); ++i) {
        CHECK(truth.at(d.records[i].property_id) == d.true_labels[i]);
    }
}

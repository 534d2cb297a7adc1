#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "vrclass/csv.hpp"
#include "vrclass/error.hpp"
#include "vrclass/pipeline.hpp"

using namespace vrclass;

namespace {

PipelineConfig synthetic_config(const std::string& out, std::size_t n, std::size_t k, double sep) {
    PipelineConfig c;
    SyntheticSpec spec;
    spec.n_points = n;
    spec.n_clusters = k;
    spec.separation = sep;
    c.synthetic = spec;
    c.out_dir = out;
    return c;
}

csv::Table read_csv_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    return csv::read_table(in);
}

}  // namespace

TEST_CASE("k list parsing") {
    CHECK(parse_k_list("2..5") == std::vector<std::size_t>{2, 3, 4, 5});
    CHECK(parse_k_list("2, 3,7") == std::vector<std::size_t>{2, 3, 7});
    CHECK_THROWS_AS(parse_k_list("5..2"), ConfigError);
    CHECK_THROWS_AS(parse_k_list("a,b"), ConfigError);
    CHECK_THROWS_AS(parse_k_list(""), ConfigError);
}

TEST_CASE("config files") {
    testing::TempDir dir("vrclass_cfg");
    SUBCASE("keys, comments and blanks") {
        {
            std::ofstream out(dir.file("a.cfg"));
            out << "# comment\n\nsynthetic.n = 250\nsynthetic.k=3\nk_list=2..6\nseed=9\n"
                   "window_start=2020-02-01\nuse_elbow_k=true\nout=" << dir.file("o") << "\n";
        }
        const auto c = load_config(dir.file("a.cfg"));
        REQUIRE(c.synthetic);
        CHECK(c.synthetic->n_points == 250);
        CHECK(c.synthetic->n_clusters == 3);
        CHECK(c.k_list == std::vector<std::size_t>{2, 3, 4, 5, 6});
        CHECK(c.seed == 9);
        CHECK(c.use_elbow_k);
        CHECK(format_iso_date(c.window.start) == "2020-02-01");
        CHECK_NOTHROW(c.check());
    }
    SUBCASE("unknown key names the line") {
        {
            std::ofstream out(dir.file("b.cfg"));
            out << "seed=1\ncolour=blue\n";
        }
        try {
            load_config(dir.file("b.cfg"));
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(":2:") != std::string::npos);
        }
    }
    SUBCASE("bad values") {
        PipelineConfig c;
        CHECK_THROWS_AS(apply_config_entry(c, "kmeans_k", "many"), ConfigError);
        CHECK_THROWS_AS(apply_config_entry(c, "window_end", "2021-02-30"), ConfigError);
        CHECK_THROWS_AS(apply_config_entry(c, "use_elbow_k", "maybe"), ConfigError);
    }
    SUBCASE("check rejects incoherent settings") {
        PipelineConfig none;
        CHECK_THROWS_AS(none.check(), ConfigError);
        auto both = synthetic_config("x", 100, 2, 8);
        both.properties_path = "p.csv";
        CHECK_THROWS_AS(both.check(), ConfigError);
        auto lsoa_only = synthetic_config("x", 100, 2, 8);
        lsoa_only.lsoa_path = "l.csv";
        CHECK_THROWS_AS(lsoa_only.check(), ConfigError);
        auto small_k = synthetic_config("x", 100, 2, 8);
        small_k.kmeans_k = 1;
        CHECK_THROWS_AS(small_k.check(), ConfigError);
        auto window = synthetic_config("x", 100, 2, 8);
        window.window = {kStudyEnd, kStudyStart};
        CHECK_THROWS_AS(window.check(), ConfigError);
    }
}

TEST_CASE("feature and label files round trip") {
    testing::TempDir dir("vrclass_files");
    FeatureMatrix m;
    m.values = Matrix::from_rows({{0.1, -2.0 / 3.0}, {1e-17, 12345.678}});
    m.columns = {{"a", ColumnKind::numeric, Transform::zscore, std::nullopt, {}},
                 {"b=x", ColumnKind::nominal_onehot, Transform::none, "b", {}}};
    m.row_ids = {"r1", "r,2"};
    write_feature_csv(dir.file("f.csv"), m);
    const auto back = read_feature_csv(dir.file("f.csv"));
    CHECK(back.values == m.values);
    CHECK(back.row_ids == m.row_ids);
    CHECK(back.columns[1].name == "b=x");

    const std::vector<std::string> ids = {"x", "y", "z"};
    const std::vector<std::size_t> labels = {2, 0, 1};
    write_labels_csv(dir.file("l.csv"), ids, labels);
    const auto [rid, lab] = read_labels_csv(dir.file("l.csv"));
    CHECK(rid == ids);
    CHECK(lab == labels);
}

TEST_CASE("prepare_features builds the clustering space") {
    SyntheticSpec spec;
    spec.n_points = 300;
    const auto d = generate_synthetic(spec);
    PipelineConfig config;
    const auto prepared = prepare_features(d.records, config);
    CHECK(prepared.space.rows() == 300);
    CHECK(prepared.space.cols() > prepared.pca.n_selected);
    CHECK(prepared.pca.dim() == kNumericFeatureCount - prepared.plan.dropped_constant.size());
    CHECK_NOTHROW(prepared.space.check_finite());
}

TEST_CASE("full run") {
    testing::TempDir dir("vrclass_run");
    auto config = synthetic_config(dir.str(), 600, 4, 10);
    config.k_list = {2, 3, 4, 5, 6, 7, 8};
    const auto result = run_pipeline(config);
    REQUIRE(result.ok);
    CHECK(result.elbow.selected_k == 4);
    CHECK(result.ingest.rows_kept == 600);
    CHECK(result.ingest.balanced());

    const auto& m = result.manifest;
    CHECK(m["status"] == "ok");
    CHECK(m["row_counts"]["clustered"] == 600);
    CHECK(m["seeds"].contains("kmeans"));

    for (const auto* name : {"elbow.csv", "labels.csv", "labels_kmeans.csv", "labels_kmedoids.csv", "crosstab.csv",
                             "pca_loadings.csv", "pca_variance.csv", "cluster_space.csv", "features.csv",
                             "urban_rural.csv", "series_revenue.csv", "series_occupancy.csv",
                             "cluster_points.csv", "properties.clean.csv"}) {
        CAPTURE(name);
        const auto path = dir.file(name);
        REQUIRE(std::filesystem::exists(path));
        const auto table = read_csv_file(path);
        CHECK_FALSE(table.header.empty());
        for (const auto& row : table.rows) {
            CHECK(row.size() == table.header.size());
        }
    }
    for (const auto* name : {"run_manifest.json", "validation.json", "profiles.json", "plan.json",
                             "pca_model.json", "cluster_models.json", "ingest_report.json"}) {
        CAPTURE(name);
        CHECK_NOTHROW(read_json(dir.file(name)));
    }

    // every clustered row has exactly one label
    const auto labels = read_csv_file(dir.file("labels.csv"));
    CHECK(labels.rows.size() == 600);
    const auto ur = read_csv_file(dir.file("urban_rural.csv"));
    std::size_t total = 0;
    for (const auto& row : ur.rows) {
        total += static_cast<std::size_t>(*csv::parse_double(row[1]) + *csv::parse_double(row[2]));
    }
    CHECK(total == 600);
}

TEST_CASE("failed stage is named in the manifest") {
    testing::TempDir dir("vrclass_fail");
    auto config = synthetic_config(dir.str(), 100, 2, 8);
    config.window = {std::chrono::year{2010} / 1 / 1, std::chrono::year{2010} / 12 / 31};
    const auto result = run_pipeline(config);
    CHECK_FALSE(result.ok);
    CHECK(result.failed_stage == "ingest");
    const auto manifest = read_json(dir.file("run_manifest.json"));
    CHECK(manifest["status"] == "failed");
    CHECK(manifest["failed_stage"] == "ingest");
    CHECK(manifest["row_counts"]["rows_read"] == 100);
    CHECK(std::filesystem::exists(dir.file("ingest_report.json")));
}

TEST_CASE("staged calls reproduce the run") {
    testing::TempDir a("vrclass_run_a");
    testing::TempDir b("vrclass_run_b");
    auto config = synthetic_config(a.str(), 300, 3, 8);
    config.k_list = {2, 3, 4, 5};
    REQUIRE(run_pipeline(config).ok);

    config.out_dir = b.str();
    const auto gen = stages::generate(config);
    stages::ingest(config, gen.properties_path, gen.lsoa_path);
    stages::preprocess(config, b.file("properties.clean.csv"));
    stages::pca(config, b.file("features.csv"), b.file("plan.json"));
    stages::elbow(config, b.file("cluster_space.csv"), Algorithm::kmeans);
    stages::cluster(config, b.file("cluster_space.csv"));
    stages::validate(config, b.file("cluster_space.csv"), gen.truth_path);
    stages::profile(config, b.file("properties.clean.csv"), b.file("labels.csv"), b.file("plan.json"));
    for (const auto* name : {"labels.csv", "elbow.csv", "validation.json", "profiles.json", "cluster_space.csv"}) {
        CAPTURE(name);
        CHECK(testing::slurp(a.file(name)) == testing::slurp(b.file(name)));
    }
}

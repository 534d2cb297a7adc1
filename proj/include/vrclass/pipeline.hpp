#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vrclass/cluster.hpp"
#include "vrclass/data_model.hpp"
#include "vrclass/dates.hpp"
#include "vrclass/ingestion.hpp"
#include "vrclass/pca.hpp"
#include "vrclass/preprocess.hpp"
#include "vrclass/profile.hpp"
#include "vrclass/validate.hpp"

namespace vrclass {

/// Everything a pipeline run needs. Loaded from a flat key=value file, then
/// overridden by command-line flags.
struct PipelineConfig {
    std::optional<std::string> properties_path;
    std::optional<std::string> lsoa_path;
    std::optional<SyntheticSpec> synthetic;
    DateRange window = study_window();
    double skew_threshold = 2.0;
    double kaiser_threshold = 1.0;
    bool drop_duplicate_columns = false;
    std::vector<std::size_t> k_list = {2, 3, 4, 5, 6, 7, 8};
    std::size_t kmeans_k = 4;
    std::size_t kmedoids_k = 6;
    bool use_elbow_k = false;
    double kneedle_sensitivity = 1.0;
    std::size_t kmeans_n_init = 10;
    std::size_t kmeans_max_iter = 300;
    double kmeans_tol = 1e-4;
    std::size_t clara_samples = 5;
    std::optional<std::size_t> clara_sample_size;
    std::size_t pam_max_swaps = 200;
    std::uint64_t seed = 42;
    std::string out_dir = "out";

    /// Exactly one data source, well-ordered window, usable k values.
    void check() const;

    ClusterOptions cluster_options() const;

    nlohmann::ordered_json to_json() const;
};

/// Recognized keys: properties, lsoa, synthetic.{n,k,sep,seed,urban_fraction,
/// rural_uplift}, window_start, window_end, skew_threshold, kaiser_threshold,
/// drop_duplicate_columns, k_list, kmeans_k, kmedoids_k, use_elbow_k,
/// kneedle_sensitivity, kmeans_n_init, kmeans_max_iter, kmeans_tol,
/// clara_samples, clara_sample_size, pam_max_swaps, seed, out.
void apply_config_entry(PipelineConfig& config, std::string_view key, std::string_view value);

/// Parses '#'-commented key=value lines on top of `base`.
PipelineConfig load_config(const std::string& path, PipelineConfig base = {});

/// "2..8" or "2,3,5".
std::vector<std::size_t> parse_k_list(std::string_view text);

/// Raw matrix, fitted plan, transformed matrix, PCA and clustering space.
struct PreparedData {
    FeatureMatrix raw;
    PreprocessPlan plan;
    FeatureMatrix prepared;
    PcaModel pca;
    FeatureMatrix space;
};

PreparedData prepare_features(std::span<const PropertyRecord> records, const PipelineConfig& config);

// Feature-matrix files: property_id followed by one column per feature.
void write_feature_csv(const std::string& path, const FeatureMatrix& matrix);
FeatureMatrix read_feature_csv(const std::string& path);

void write_labels_csv(const std::string& path, std::span<const std::string> row_ids,
                      std::span<const std::size_t> labels);
/// Returns (row ids, labels).
std::pair<std::vector<std::string>, std::vector<std::size_t>> read_labels_csv(const std::string& path);

void write_text(const std::string& path, std::string_view text);
void write_json(const std::string& path, const nlohmann::ordered_json& j);
nlohmann::json read_json(const std::string& path);

/// Stage entry points. Each reads its inputs from files and writes its
/// artifacts into config.out_dir, so stages can be re-run independently.
namespace stages {

struct GenerateOutput {
    std::string properties_path;
    std::string truth_path;
    std::string lsoa_path;
};

GenerateOutput generate(const PipelineConfig& config, const std::string& name = "synthetic");

/// properties (+ lsoa) -> ingest_report.json, properties.clean.csv. Fails when
/// no rows survive; the report is still written and copied to `report_out`.
IngestReport ingest(const PipelineConfig& config, const std::string& properties_path,
                    const std::optional<std::string>& lsoa_path, IngestReport* report_out = nullptr);

/// properties.clean.csv -> plan.json, features.csv
void preprocess(const PipelineConfig& config, const std::string& clean_path);

/// features.csv + plan.json -> pca_model.json, pca_loadings.csv, pca_variance.csv, cluster_space.csv
PcaModel pca(const PipelineConfig& config, const std::string& features_path, const std::string& plan_path);

struct ClusterOutput {
    ClusterModel kmeans;
    ClusterModel kmedoids;
};

/// cluster_space.csv -> labels_kmeans.csv, labels_kmedoids.csv, cluster_models.json
ClusterOutput cluster(const PipelineConfig& config, const std::string& space_path);

/// cluster_space.csv -> elbow.csv (kmeans) or elbow_kmedoids.csv
ElbowCurve elbow(const PipelineConfig& config, const std::string& space_path, Algorithm algorithm);

/// cluster_space.csv + labels + cluster_models.json -> validation.json, crosstab.csv, labels.csv
ValidationReport validate(const PipelineConfig& config, const std::string& space_path,
                          const std::optional<std::string>& truth_path);

/// properties.clean.csv + labels.csv -> profiles.json, urban_rural.csv,
/// series_revenue.csv, series_occupancy.csv, cluster_points.csv
void profile(const PipelineConfig& config, const std::string& clean_path, const std::string& labels_path,
             const std::optional<std::string>& plan_path);

}  // namespace stages

struct RunResult {
    bool ok = false;
    std::string failed_stage;
    std::string error;
    IngestReport ingest;
    ValidationReport validation;
    ElbowCurve elbow;
    nlohmann::ordered_json manifest;
};

/// generate (synthetic only) -> ingest -> preprocess -> pca -> elbow -> cluster
/// -> validate -> profile, then run_manifest.json. A failing stage stops the
/// run; artifacts written so far are kept and the manifest names the stage.
RunResult run_pipeline(const PipelineConfig& config);

}  // namespace vrclass

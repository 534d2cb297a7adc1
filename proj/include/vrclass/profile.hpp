#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vrclass/data_model.hpp"
#include "vrclass/dates.hpp"
#include "vrclass/preprocess.hpp"

namespace vrclass {

struct FeatureSummary {
    std::string name;
    std::size_t count = 0;  // non-missing values
    double mean = 0.0;
    double median = 0.0;
    double std = 0.0;
    std::optional<double> back_transformed_mean;  // inverse plan applied to the standardized cluster mean
};

struct DistinguishingFeature {
    std::string name;
    double effect = 0.0;  // (cluster mean - overall mean) / overall std
};

struct ClusterProfile {
    std::size_t cluster = 0;
    std::size_t size = 0;
    std::vector<FeatureSummary> features;
    double urban_share = 0.0;
    std::vector<DistinguishingFeature> top_distinguishing_features;  // by |effect| desc, then name
};

struct ProfileResult {
    std::vector<ClusterProfile> profiles;
    std::vector<std::string> warnings;

    nlohmann::ordered_json to_json() const;
};

/// Per-cluster summaries in original units. When a plan is given, each
/// numeric summary also carries the back-transformed standardized mean.
ProfileResult profile_clusters(std::span<const PropertyRecord> records, std::span<const std::size_t> labels,
                               const PreprocessPlan* plan = nullptr);

struct UrbanRuralCount {
    std::size_t cluster = 0;
    std::size_t urban = 0;
    std::size_t rural = 0;
};

std::vector<UrbanRuralCount> urban_rural_distribution(std::span<const PropertyRecord> records,
                                                      std::span<const std::size_t> labels);

std::string urban_rural_csv(const std::vector<UrbanRuralCount>& counts);

struct SeriesPoint {
    std::chrono::year_month month;
    std::size_t urban_count = 0;
    std::size_t rural_count = 0;
    std::optional<double> urban_mean;  // absent when no active listing
    std::optional<double> rural_mean;
};

struct DescriptiveSeries {
    std::vector<SeriesPoint> revenue;    // mean monthly revenue: annual_revenue / 12
    std::vector<SeriesPoint> occupancy;  // mean occupancy_rate
};

/// Monthly means over listings active in each month of the window, split by
/// urban/rural. Empty input yields empty series.
DescriptiveSeries descriptive_series(std::span<const PropertyRecord> records, const DateRange& window);

/// month,urban_mean,urban_count,rural_mean,rural_count with the window dates
/// as '#' header comments.
std::string series_csv(const std::vector<SeriesPoint>& series, const DateRange& window);

struct PointExport {
    std::string csv;
    std::size_t rows_written = 0;
    std::size_t rows_skipped = 0;
};

/// property_id,latitude,longitude,cluster; rows without coordinates are skipped.
PointExport export_cluster_points(std::span<const PropertyRecord> records, std::span<const std::size_t> labels);

}  // namespace vrclass

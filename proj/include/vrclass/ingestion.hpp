#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "vrclass/data_model.hpp"
#include "vrclass/dates.hpp"

namespace vrclass {

/// Area attributes keyed by LSOA code.
struct LsoaAttributes {
    std::string lsoa_code;
    double imd_index = 0.0;
    double ahah_index = 0.0;
    std::string citytown_class;
    UrbanRural urban_rural = UrbanRural::urban;

    bool operator==(const LsoaAttributes&) const = default;
};

using LsoaLookup = std::map<std::string, LsoaAttributes, std::less<>>;

struct IngestReport {
    std::size_t rows_read = 0;
    std::size_t rows_kept = 0;
    std::size_t rows_dropped_window = 0;
    std::size_t rows_dropped_join_miss = 0;
    std::size_t rows_dropped_invalid = 0;

    bool balanced() const {
        return rows_read == rows_kept + rows_dropped_window + rows_dropped_join_miss + rows_dropped_invalid;
    }

    nlohmann::ordered_json to_json() const;
};

struct LoadResult {
    std::vector<PropertyRecord> records;
    IngestReport report;
};

/// Property CSV header, in field order.
const std::vector<std::string>& property_csv_columns();

/// Parses a property CSV, keeping rows that are valid and overlap the window.
/// Columns are matched by name; a missing column is a fatal schema error.
LoadResult load_properties(std::istream& in, const DateRange& window);
LoadResult load_properties(const std::string& path, const DateRange& window);

void write_properties(std::ostream& out, const std::vector<PropertyRecord>& records);
void write_properties(const std::string& path, const std::vector<PropertyRecord>& records);

/// Reads lsoa_code,imd_index,ahah_index,citytown_class,urban_rural. Duplicate
/// codes or unparseable rows are fatal.
LsoaLookup load_lsoa_lookup(std::istream& in);
LsoaLookup load_lsoa_lookup(const std::string& path);

void write_lsoa_lookup(std::ostream& out, const LsoaLookup& lookup);

struct JoinResult {
    std::vector<PropertyRecord> records;
    std::size_t miss_count = 0;
};

/// Fills area attributes from the lookup; records whose code misses are dropped.
JoinResult join_lsoa(std::vector<PropertyRecord> records, const LsoaLookup& lookup);

/// load_properties followed by join_lsoa, with join misses tallied in the report.
LoadResult ingest(const std::string& properties_path, const std::string& lsoa_path, const DateRange& window);

struct SyntheticSpec {
    std::size_t n_points = 500;
    std::size_t n_clusters = 4;
    double separation = 8.0;  // center spacing in within-cluster standard deviations
    std::uint64_t seed = 1;
    double urban_fraction = 0.7;
    double rural_occupancy_uplift = 0.0;  // added to occupancy_rate of rural listings, in [0, 0.25]

    /// Throws InvalidArgument when the settings cannot be generated.
    void check() const;

    bool operator==(const SyntheticSpec&) const = default;
};

inline constexpr std::size_t kMaxSyntheticClusters = kNumericFeatureCount;

struct SyntheticData {
    std::vector<PropertyRecord> records;
    std::vector<std::size_t> true_labels;
    LsoaLookup lookup;  // one LSOA per record, consistent with the record's area fields
};

/// Gaussian mixture in a 24-dim latent space, mapped monotonically into valid
/// field ranges. Component centers are mutually `separation` apart. Exactly
/// round(urban_fraction * n) listings are urban.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Writes <dir>/<name>.csv, <name>.truth.csv and <name>.lsoa.csv.
void write_synthetic(const std::string& dir, const std::string& name, const SyntheticData& data);

void write_truth(std::ostream& out, const std::vector<PropertyRecord>& records,
                 const std::vector<std::size_t>& labels);

/// property_id -> true label.
std::map<std::string, std::size_t> load_truth(const std::string& path);

}  // namespace vrclass

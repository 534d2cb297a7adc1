#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vrclass/dates.hpp"

namespace vrclass {

enum class UrbanRural { urban, rural };

std::string_view to_string(UrbanRural value);
std::optional<UrbanRural> parse_urban_rural(std::string_view text);

/// City and town classes, largest settlement type first.
inline constexpr std::array<std::string_view, 7> kCitytownLevels = {
    "core_city_london", "core_city",   "other_city",         "large_town",
    "medium_town",      "small_town",  "village_or_smaller",
};

/// One vacation-rental listing active in Great Britain.
///
/// Ratings are absent for never-reviewed listings; area attributes (IMD, AHAH,
/// city/town class, urban/rural) are absent until the LSOA join runs.
struct PropertyRecord {
    std::string property_id;
    double adr = 0.0;  // GBP per night
    double annual_revenue = 0.0;
    double occupancy_rate = 0.0;
    double num_bookings = 0.0;
    double bedrooms = 0.0;
    double bathrooms = 0.0;  // half-baths allowed
    double max_guests = 0.0;
    double property_response = 0.0;
    double host_response = 0.0;
    double minimum_stay = 0.0;
    double reservation_days = 0.0;
    double available_days = 0.0;
    double blocked_days = 0.0;
    double num_photos = 0.0;
    std::optional<double> rating_overall;
    std::optional<double> rating_communication;
    std::optional<double> rating_accuracy;
    std::optional<double> rating_cleanliness;
    std::optional<double> rating_checkin;
    std::optional<double> rating_location;
    std::optional<double> ahah_index;
    std::optional<double> imd_index;
    double host_num_listings = 0.0;
    double cleaning_fee = 0.0;
    std::string property_type;
    std::optional<UrbanRural> urban_rural;
    std::optional<std::string> citytown_class;
    std::string lsoa_code;
    std::optional<double> latitude;
    std::optional<double> longitude;
    Date first_active{};
    Date last_active{};

    bool operator==(const PropertyRecord&) const = default;
};

/// The 24 numeric clustering variables, in loadings-table order.
enum class NumericFeature : std::size_t {
    adr,
    annual_revenue,
    occupancy_rate,
    num_bookings,
    bedrooms,
    bathrooms,
    max_guests,
    property_response,
    minimum_stay,
    reservation_days,
    available_days,
    blocked_days,
    num_photos,
    rating_overall,
    rating_communication,
    rating_accuracy,
    rating_cleanliness,
    rating_checkin,
    rating_location,
    ahah_index,
    imd_index,
    host_num_listings,
    host_response,
    cleaning_fee,
};

inline constexpr std::size_t kNumericFeatureCount = 24;

struct NumericFeatureInfo {
    NumericFeature id;
    std::string_view name;
};

extern const std::array<NumericFeatureInfo, kNumericFeatureCount> kNumericFeatures;

/// Value of a numeric feature, nullopt when the record leaves it absent.
std::optional<double> numeric_feature(const PropertyRecord& record, NumericFeature feature);
void set_numeric_feature(PropertyRecord& record, NumericFeature feature, std::optional<double> value);

/// Lists every invariant the record breaks; empty when the record is valid.
std::vector<std::string> validate_record(const PropertyRecord& record);

/// Dense row-major matrix of doubles.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows);
    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double> column(std::size_t c) const;

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    Matrix transposed() const;

    bool operator==(const Matrix&) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix multiply(const Matrix& a, const Matrix& b);

double squared_distance(std::span<const double> a, std::span<const double> b);
double distance(std::span<const double> a, std::span<const double> b);

enum class ColumnKind { numeric, ordinal, nominal, nominal_onehot };
enum class Transform { none, log1p, zscore, log1p_then_zscore };

std::string_view to_string(ColumnKind kind);
std::string_view to_string(Transform transform);

/// Raw ordinal and nominal columns store an index into `levels`; NaN marks a
/// missing category. Ordinal levels are listed in declared order.
struct ColumnMeta {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    Transform transform = Transform::none;
    std::optional<std::string> source_category;  // source nominal column of a one-hot column
    std::vector<std::string> levels;

    bool operator==(const ColumnMeta&) const = default;
};

struct FeatureMatrix {
    Matrix values;
    std::vector<ColumnMeta> columns;
    std::vector<std::string> row_ids;

    std::size_t rows() const { return values.rows(); }
    std::size_t cols() const { return values.cols(); }

    std::optional<std::size_t> find_column(std::string_view name) const;

    /// Throws InvalidArgument when shapes disagree.
    void check_shape() const;

    /// Throws NumericError naming the first NaN/Inf cell.
    void check_finite() const;

    /// Subset of columns, in the given order.
    FeatureMatrix select_columns(std::span<const std::size_t> indices) const;

    bool operator==(const FeatureMatrix&) const = default;
};

/// Raw feature matrix: the 24 numeric variables (NaN where absent), then
/// citytown_class (ordinal), property_type and urban_rural (nominal).
FeatureMatrix records_to_matrix(std::span<const PropertyRecord> records);

}  // namespace vrclass

#include "vrclass/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vrclass/error.hpp"

namespace vrclass {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_integral(double v) { return std::floor(v) == v; }

}  // namespace

std::string_view to_string(UrbanRural value) {
    return value == UrbanRural::urban ? "urban" : "rural";
}

std::optional<UrbanRural> parse_urban_rural(std::string_view text) {
    if (text == "urban") {
        return UrbanRural::urban;
    }
    if (text == "rural") {
        return UrbanRural::rural;
    }
    return std::nullopt;
}

const std::array<NumericFeatureInfo, kNumericFeatureCount> kNumericFeatures = {{
    {NumericFeature::adr, "adr"},
    {NumericFeature::annual_revenue, "annual_revenue"},
    {NumericFeature::occupancy_rate, "occupancy_rate"},
    {NumericFeature::num_bookings, "num_bookings"},
    {NumericFeature::bedrooms, "bedrooms"},
    {NumericFeature::bathrooms, "bathrooms"},
    {NumericFeature::max_guests, "max_guests"},
    {NumericFeature::property_response, "property_response"},
    {NumericFeature::minimum_stay, "minimum_stay"},
    {NumericFeature::reservation_days, "reservation_days"},
    {NumericFeature::available_days, "available_days"},
    {NumericFeature::blocked_days, "blocked_days"},
    {NumericFeature::num_photos, "num_photos"},
    {NumericFeature::rating_overall, "rating_overall"},
    {NumericFeature::rating_communication, "rating_communication"},
    {NumericFeature::rating_accuracy, "rating_accuracy"},
    {NumericFeature::rating_cleanliness, "rating_cleanliness"},
    {NumericFeature::rating_checkin, "rating_checkin"},
    {NumericFeature::rating_location, "rating_location"},
    {NumericFeature::ahah_index, "ahah_index"},
    {NumericFeature::imd_index, "imd_index"},
    {NumericFeature::host_num_listings, "host_num_listings"},
    {NumericFeature::host_response, "host_response"},
    {NumericFeature::cleaning_fee, "cleaning_fee"},
}};

namespace {

// Single dispatch table shared by the getter and setter.
template <typename Record, typename Fn>
decltype(auto) visit_feature(Record& r, NumericFeature f, Fn&& fn) {
    switch (f) {
        case NumericFeature::adr: return fn(r.adr);
        case NumericFeature::annual_revenue: return fn(r.annual_revenue);
        case NumericFeature::occupancy_rate: return fn(r.occupancy_rate);
        case NumericFeature::num_bookings: return fn(r.num_bookings);
        case NumericFeature::bedrooms: return fn(r.bedrooms);
        case NumericFeature::bathrooms: return fn(r.bathrooms);
        case NumericFeature::max_guests: return fn(r.max_guests);
        case NumericFeature::property_response: return fn(r.property_response);
        case NumericFeature::minimum_stay: return fn(r.minimum_stay);
        case NumericFeature::reservation_days: return fn(r.reservation_days);
        case NumericFeature::available_days: return fn(r.available_days);
        case NumericFeature::blocked_days: return fn(r.blocked_days);
        case NumericFeature::num_photos: return fn(r.num_photos);
        case NumericFeature::rating_overall: return fn(r.rating_overall);
        case NumericFeature::rating_communication: return fn(r.rating_communication);
        case NumericFeature::rating_accuracy: return fn(r.rating_accuracy);
        case NumericFeature::rating_cleanliness: return fn(r.rating_cleanliness);
        case NumericFeature::rating_checkin: return fn(r.rating_checkin);
        case NumericFeature::rating_location: return fn(r.rating_location);
        case NumericFeature::ahah_index: return fn(r.ahah_index);
        case NumericFeature::imd_index: return fn(r.imd_index);
        case NumericFeature::host_num_listings: return fn(r.host_num_listings);
        case NumericFeature::host_response: return fn(r.host_response);
        case NumericFeature::cleaning_fee: return fn(r.cleaning_fee);
    }
    throw InvalidArgument("unknown numeric feature");
}

struct Getter {
    std::optional<double> operator()(const double& v) const { return v; }
    std::optional<double> operator()(const std::optional<double>& v) const { return v; }
};

struct Setter {
    std::optional<double> value;
    void operator()(double& v) const { v = value.value_or(kNaN); }
    void operator()(std::optional<double>& v) const { v = value; }
};

}  // namespace

std::optional<double> numeric_feature(const PropertyRecord& record, NumericFeature feature) {
    return visit_feature(record, feature, Getter{});
}

void set_numeric_feature(PropertyRecord& record, NumericFeature feature, std::optional<double> value) {
    visit_feature(record, feature, Setter{value});
}

std::vector<std::string> validate_record(const PropertyRecord& r) {
    std::vector<std::string> out;
    if (r.property_id.empty()) {
        out.emplace_back("property_id empty");
    }

    for (const auto& info : kNumericFeatures) {
        const auto v = numeric_feature(r, info.id);
        if (v && !std::isfinite(*v)) {
            out.push_back(std::string(info.name) + " not finite");
        }
    }

    auto fraction = [&](std::string_view name, double v) {
        if (std::isfinite(v) && (v < 0.0 || v > 1.0)) {
            out.push_back(std::string(name) + " out of [0,1]");
        }
    };
    fraction("occupancy_rate", r.occupancy_rate);
    fraction("property_response", r.property_response);
    fraction("host_response", r.host_response);

    auto count = [&](std::string_view name, double v) {
        if (!std::isfinite(v)) {
            return;
        }
        if (v < 0.0) {
            out.push_back(std::string(name) + " negative");
        } else if (!is_integral(v)) {
            out.push_back(std::string(name) + " not an integer");
        }
    };
    count("num_bookings", r.num_bookings);
    count("bedrooms", r.bedrooms);
    count("max_guests", r.max_guests);
    count("minimum_stay", r.minimum_stay);
    count("reservation_days", r.reservation_days);
    count("available_days", r.available_days);
    count("blocked_days", r.blocked_days);
    count("num_photos", r.num_photos);
    count("host_num_listings", r.host_num_listings);

    if (std::isfinite(r.bathrooms)) {
        if (r.bathrooms < 0.0) {
            out.emplace_back("bathrooms negative");
        } else if (!is_integral(r.bathrooms * 2.0)) {
            out.emplace_back("bathrooms not a multiple of 0.5");
        }
    }

    auto non_negative = [&](std::string_view name, double v) {
        if (std::isfinite(v) && v < 0.0) {
            out.push_back(std::string(name) + " negative");
        }
    };
    non_negative("adr", r.adr);
    non_negative("annual_revenue", r.annual_revenue);
    non_negative("cleaning_fee", r.cleaning_fee);

    const std::pair<std::string_view, const std::optional<double>*> ratings[] = {
        {"rating_overall", &r.rating_overall},         {"rating_communication", &r.rating_communication},
        {"rating_accuracy", &r.rating_accuracy},       {"rating_cleanliness", &r.rating_cleanliness},
        {"rating_checkin", &r.rating_checkin},         {"rating_location", &r.rating_location},
    };
    for (const auto& [name, rating] : ratings) {
        if (*rating && std::isfinite(**rating) && (**rating < 1.0 || **rating > 5.0)) {
            out.push_back(std::string(name) + " out of [1,5]");
        }
    }

    const double day_budget = r.reservation_days + r.available_days + r.blocked_days;
    if (std::isfinite(day_budget) && day_budget > kStudyWindowDays) {
        out.push_back("day budget exceeds " + std::to_string(kStudyWindowDays));
    }

    if (r.citytown_class &&
        std::find(kCitytownLevels.begin(), kCitytownLevels.end(), *r.citytown_class) == kCitytownLevels.end()) {
        out.push_back("citytown_class unknown category '" + *r.citytown_class + "'");
    }
    if (r.latitude && !(std::abs(*r.latitude) <= 90.0)) {
        out.emplace_back("latitude out of [-90,90]");
    }
    if (r.longitude && !(std::abs(*r.longitude) <= 180.0)) {
        out.emplace_back("longitude out of [-180,180]");
    }
    if (!r.first_active.ok() || !r.last_active.ok()) {
        out.emplace_back("activity dates invalid");
    } else if (std::chrono::sys_days{r.last_active} < std::chrono::sys_days{r.first_active}) {
        out.emplace_back("last_active before first_active");
    }
    return out;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) {
        return {};
    }
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols()) {
            throw InvalidArgument("Matrix::from_rows: ragged rows");
        }
        std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    return m;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        out[r] = (*this)(r, c);
    }
    return out;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            t(c, r) = (*this)(r, c);
        }
    }
    return t;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw InvalidArgument("multiply: inner dimensions differ");
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

std::string_view to_string(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::numeric: return "numeric";
        case ColumnKind::ordinal: return "ordinal";
        case ColumnKind::nominal: return "nominal";
        case ColumnKind::nominal_onehot: return "nominal_onehot";
    }
    return "numeric";
}

std::string_view to_string(Transform transform) {
    switch (transform) {
        case Transform::none: return "none";
        case Transform::log1p: return "log1p";
        case Transform::zscore: return "zscore";
        case Transform::log1p_then_zscore: return "log1p_then_zscore";
    }
    return "none";
}

std::optional<std::size_t> FeatureMatrix::find_column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].name == name) {
            return i;
        }
    }
    return std::nullopt;
}

void FeatureMatrix::check_shape() const {
    if (columns.size() != values.cols()) {
        throw InvalidArgument("feature matrix has " + std::to_string(values.cols()) + " columns but " +
                              std::to_string(columns.size()) + " column descriptors");
    }
    if (row_ids.size() != values.rows()) {
        throw InvalidArgument("feature matrix has " + std::to_string(values.rows()) + " rows but " +
                              std::to_string(row_ids.size()) + " row ids");
    }
}

void FeatureMatrix::check_finite() const {
    for (std::size_t r = 0; r < rows(); ++r) {
        for (std::size_t c = 0; c < cols(); ++c) {
            if (!std::isfinite(values(r, c))) {
                throw NumericError("non-finite value in column '" + columns[c].name + "' at row " +
                                   std::to_string(r));
            }
        }
    }
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> indices) const {
    FeatureMatrix out;
    out.row_ids = row_ids;
    out.values = Matrix(rows(), indices.size());
    for (std::size_t j = 0; j < indices.size(); ++j) {
        out.columns.push_back(columns.at(indices[j]));
        for (std::size_t r = 0; r < rows(); ++r) {
            out.values(r, j) = values(r, indices[j]);
        }
    }
    return out;
}

FeatureMatrix records_to_matrix(std::span<const PropertyRecord> records) {
    FeatureMatrix m;
    const std::size_t n = records.size();

    std::vector<std::string> property_types;
    for (const auto& r : records) {
        if (!r.property_type.empty() &&
            std::find(property_types.begin(), property_types.end(), r.property_type) == property_types.end()) {
            property_types.push_back(r.property_type);
        }
    }

    for (const auto& info : kNumericFeatures) {
        m.columns.push_back({std::string(info.name), ColumnKind::numeric, Transform::none, std::nullopt, {}});
    }
    m.columns.push_back({"citytown_class", ColumnKind::ordinal, Transform::none, std::nullopt,
                         std::vector<std::string>(kCitytownLevels.begin(), kCitytownLevels.end())});
    m.columns.push_back({"property_type", ColumnKind::nominal, Transform::none, std::nullopt, property_types});
    m.columns.push_back({"urban_rural", ColumnKind::nominal, Transform::none, std::nullopt, {"urban", "rural"}});

    m.values = Matrix(n, m.columns.size(), kNaN);
    m.row_ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = records[i];
        m.row_ids.push_back(r.property_id);
        for (std::size_t j = 0; j < kNumericFeatureCount; ++j) {
            m.values(i, j) = numeric_feature(r, kNumericFeatures[j].id).value_or(kNaN);
        }
        std::size_t col = kNumericFeatureCount;
        if (r.citytown_class) {
            const auto it = std::find(kCitytownLevels.begin(), kCitytownLevels.end(), *r.citytown_class);
            if (it != kCitytownLevels.end()) {
                m.values(i, col) = static_cast<double>(it - kCitytownLevels.begin());
            }
        }
        ++col;
        if (!r.property_type.empty()) {
            const auto it = std::find(property_types.begin(), property_types.end(), r.property_type);
            m.values(i, col) = static_cast<double>(it - property_types.begin());
        }
        ++col;
        if (r.urban_rural) {
            m.values(i, col) = *r.urban_rural == UrbanRural::urban ? 0.0 : 1.0;
        }
    }
    return m;
}

}  // namespace vrclass

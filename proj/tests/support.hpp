#pragma once

// Fixtures shared by the unit and acceptance tests.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "vrclass/data_model.hpp"
#include "vrclass/dates.hpp"
#include "vrclass/random.hpp"

namespace vrclass::testing {

/// n points in d dimensions, drawn around k random centers.
inline Matrix blobs(std::size_t n, std::size_t d, std::size_t k, double spread, std::uint64_t seed) {
    Rng rng(seed);
    Matrix centers(k, d);
    for (auto& v : centers.data()) {
        v = spread * (2.0 * rng.uniform() - 1.0);
    }
    Matrix points(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = i % k;
        for (std::size_t j = 0; j < d; ++j) {
            points(i, j) = centers(c, j) + rng.normal();
        }
    }
    return points;
}

/// Uniform points in the unit cube.
inline Matrix uniform_points(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Matrix points(n, d);
    for (auto& v : points.data()) {
        v = rng.uniform();
    }
    return points;
}

/// A listing that passes validate_record, active 2020-03-01..2021-03-01.
inline PropertyRecord valid_record(const std::string& id = "P0000001") {
    using namespace std::chrono;
    PropertyRecord r;
    r.property_id = id;
    r.adr = 100.0;
    r.annual_revenue = 12000.0;
    r.occupancy_rate = 0.5;
    r.num_bookings = 10;
    r.bedrooms = 2;
    r.bathrooms = 1.5;
    r.max_guests = 4;
    r.property_response = 0.9;
    r.host_response = 0.8;
    r.minimum_stay = 2;
    r.reservation_days = 100;
    r.available_days = 100;
    r.blocked_days = 50;
    r.num_photos = 20;
    r.rating_overall = 4.5;
    r.rating_communication = 4.6;
    r.rating_accuracy = 4.4;
    r.rating_cleanliness = 4.7;
    r.rating_checkin = 4.8;
    r.rating_location = 4.9;
    r.ahah_index = 20.0;
    r.imd_index = 10.0;
    r.host_num_listings = 1;
    r.cleaning_fee = 30.0;
    r.property_type = "entire-home";
    r.urban_rural = UrbanRural::urban;
    r.citytown_class = "core_city";
    r.lsoa_code = "E01000001";
    r.latitude = 51.5;
    r.longitude = -0.1;
    r.first_active = year{2020} / March / 1;
    r.last_active = year{2021} / March / 1;
    return r;
}

/// Directory removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& stem) {
        Rng rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / (stem + "_" + std::to_string(rng.next_u64() % 1000000007));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

  private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace vrclass::testing

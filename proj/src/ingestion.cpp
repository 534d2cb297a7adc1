#include "vrclass/ingestion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>

#include "vrclass/csv.hpp"
#include "vrclass/error.hpp"
#include "vrclass/random.hpp"

namespace vrclass {

namespace {

using Parser = std::function<bool(PropertyRecord&, const std::string&)>;
using Printer = std::function<std::string(const PropertyRecord&)>;

struct FieldCodec {
    std::string name;
    Parser parse;
    Printer print;
};

FieldCodec required_number(std::string name, double PropertyRecord::*member) {
    return {std::move(name),
            [member](PropertyRecord& r, const std::string& s) {
                const auto v = csv::parse_double(s);
                if (!v) {
                    return false;
                }
                r.*member = *v;
                return true;
            },
            [member](const PropertyRecord& r) { return csv::format_double(r.*member); }};
}

FieldCodec optional_number(std::string name, std::optional<double> PropertyRecord::*member) {
    return {std::move(name),
            [member](PropertyRecord& r, const std::string& s) {
                if (s.empty()) {
                    r.*member = std::nullopt;
                    return true;
                }
                const auto v = csv::parse_double(s);
                if (!v) {
                    return false;
                }
                r.*member = *v;
                return true;
            },
            [member](const PropertyRecord& r) {
                return r.*member ? csv::format_double(*(r.*member)) : std::string{};
            }};
}

FieldCodec date_field(std::string name, Date PropertyRecord::*member) {
    return {std::move(name),
            [member](PropertyRecord& r, const std::string& s) {
                const auto d = parse_iso_date(s);
                if (!d) {
                    return false;
                }
                r.*member = *d;
                return true;
            },
            [member](const PropertyRecord& r) { return format_iso_date(r.*member); }};
}

const std::vector<FieldCodec>& codecs() {
    static const std::vector<FieldCodec> table = [] {
        std::vector<FieldCodec> t;
        t.push_back({"property_id",
                     [](PropertyRecord& r, const std::string& s) {
                         r.property_id = s;
                         return !s.empty();
                     },
                     [](const PropertyRecord& r) { return r.property_id; }});
        t.push_back(required_number("adr", &PropertyRecord::adr));
        t.push_back(required_number("annual_revenue", &PropertyRecord::annual_revenue));
        t.push_back(required_number("occupancy_rate", &PropertyRecord::occupancy_rate));
        t.push_back(required_number("num_bookings", &PropertyRecord::num_bookings));
        t.push_back(required_number("bedrooms", &PropertyRecord::bedrooms));
        t.push_back(required_number("bathrooms", &PropertyRecord::bathrooms));
        t.push_back(required_number("max_guests", &PropertyRecord::max_guests));
        t.push_back(required_number("property_response", &PropertyRecord::property_response));
        t.push_back(required_number("host_response", &PropertyRecord::host_response));
        t.push_back(required_number("minimum_stay", &PropertyRecord::minimum_stay));
        t.push_back(required_number("reservation_days", &PropertyRecord::reservation_days));
        t.push_back(required_number("available_days", &PropertyRecord::available_days));
        t.push_back(required_number("blocked_days", &PropertyRecord::blocked_days));
        t.push_back(required_number("num_photos", &PropertyRecord::num_photos));
        t.push_back(optional_number("rating_overall", &PropertyRecord::rating_overall));
        t.push_back(optional_number("rating_communication", &PropertyRecord::rating_communication));
        t.push_back(optional_number("rating_accuracy", &PropertyRecord::rating_accuracy));
        t.push_back(optional_number("rating_cleanliness", &PropertyRecord::rating_cleanliness));
        t.push_back(optional_number("rating_checkin", &PropertyRecord::rating_checkin));
        t.push_back(optional_number("rating_location", &PropertyRecord::rating_location));
        t.push_back(optional_number("ahah_index", &PropertyRecord::ahah_index));
        t.push_back(optional_number("imd_index", &PropertyRecord::imd_index));
        t.push_back(required_number("host_num_listings", &PropertyRecord::host_num_listings));
        t.push_back(required_number("cleaning_fee", &PropertyRecord::cleaning_fee));
        t.push_back({"property_type",
                     [](PropertyRecord& r, const std::string& s) {
                         r.property_type = s;
                         return !s.empty();
                     },
                     [](const PropertyRecord& r) { return r.property_type; }});
        t.push_back({"urban_rural",
                     [](PropertyRecord& r, const std::string& s) {
                         if (s.empty()) {
                             r.urban_rural = std::nullopt;
                             return true;
                         }
                         r.urban_rural = parse_urban_rural(s);
                         return r.urban_rural.has_value();
                     },
                     [](const PropertyRecord& r) {
                         return r.urban_rural ? std::string(to_string(*r.urban_rural)) : std::string{};
                     }});
        t.push_back({"citytown_class",
                     [](PropertyRecord& r, const std::string& s) {
                         r.citytown_class = s.empty() ? std::nullopt : std::optional<std::string>(s);
                         return true;
                     },
                     [](const PropertyRecord& r) { return r.citytown_class.value_or(""); }});
        t.push_back({"lsoa_code",
                     [](PropertyRecord& r, const std::string& s) {
                         r.lsoa_code = s;
                         return true;
                     },
                     [](const PropertyRecord& r) { return r.lsoa_code; }});
        t.push_back(optional_number("latitude", &PropertyRecord::latitude));
        t.push_back(optional_number("longitude", &PropertyRecord::longitude));
        t.push_back(date_field("first_active", &PropertyRecord::first_active));
        t.push_back(date_field("last_active", &PropertyRecord::last_active));
        return t;
    }();
    return table;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IngestError("cannot open '" + path + "'");
    }
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IngestError("cannot write '" + path + "'");
    }
    return out;
}

}  // namespace

nlohmann::ordered_json IngestReport::to_json() const {
    nlohmann::ordered_json j;
    j["rows_read"] = rows_read;
    j["rows_kept"] = rows_kept;
    j["rows_dropped_window"] = rows_dropped_window;
    j["rows_dropped_join_miss"] = rows_dropped_join_miss;
    j["rows_dropped_invalid"] = rows_dropped_invalid;
    return j;
}

const std::vector<std::string>& property_csv_columns() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& c : codecs()) {
            out.push_back(c.name);
        }
        return out;
    }();
    return names;
}

LoadResult load_properties(std::istream& in, const DateRange& window) {
    csv::Reader reader(in);
    LoadResult result;
    const auto header_line = reader.next_line();
    if (!header_line) {
        throw IngestError("property file is empty (no header row)");
    }
    const auto header = csv::parse_line(*header_line);
    if (!header) {
        throw IngestError("property file header is malformed");
    }

    const auto& table = codecs();
    std::vector<std::size_t> position(table.size());
    for (std::size_t f = 0; f < table.size(); ++f) {
        const auto it = std::find(header->begin(), header->end(), table[f].name);
        if (it == header->end()) {
            throw IngestError("property file is missing column '" + table[f].name + "'");
        }
        position[f] = static_cast<std::size_t>(it - header->begin());
    }

    while (auto line = reader.next_line()) {
        if (line->empty()) {
            continue;
        }
        ++result.report.rows_read;
        const auto fields = csv::parse_line(*line);
        if (!fields || fields->size() != header->size()) {
            ++result.report.rows_dropped_invalid;
            continue;
        }
        PropertyRecord record;
        bool parsed = true;
        for (std::size_t f = 0; f < table.size() && parsed; ++f) {
            parsed = table[f].parse(record, (*fields)[position[f]]);
        }
        if (!parsed) {
            ++result.report.rows_dropped_invalid;
            continue;
        }
        if (!validate_record(record).empty()) {
            ++result.report.rows_dropped_invalid;
            continue;
        }
        if (!overlaps(record.first_active, record.last_active, window)) {
            ++result.report.rows_dropped_window;
            continue;
        }
        result.records.push_back(std::move(record));
    }
    result.report.rows_kept = result.records.size();
    return result;
}

LoadResult load_properties(const std::string& path, const DateRange& window) {
    auto in = open_input(path);
    return load_properties(in, window);
}

void write_properties(std::ostream& out, const std::vector<PropertyRecord>& records) {
    out << csv::join(property_csv_columns()) << '\n';
    csv::Row row;
    for (const auto& r : records) {
        row.clear();
        for (const auto& c : codecs()) {
            row.push_back(c.print(r));
        }
        out << csv::join(row) << '\n';
    }
}

void write_properties(const std::string& path, const std::vector<PropertyRecord>& records) {
    auto out = open_output(path);
    write_properties(out, records);
}

LsoaLookup load_lsoa_lookup(std::istream& in) {
    const auto table = csv::read_table(in, false);
    const auto c_code = table.column("lsoa_code");
    const auto c_imd = table.column("imd_index");
    const auto c_ahah = table.column("ahah_index");
    const auto c_city = table.column("citytown_class");
    const auto c_ur = table.column("urban_rural");
    LsoaLookup lookup;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const auto imd = csv::parse_double(row[c_imd]);
        const auto ahah = csv::parse_double(row[c_ahah]);
        const auto ur = parse_urban_rural(row[c_ur]);
        if (row[c_code].empty() || !imd || !ahah || !ur || row[c_city].empty()) {
            throw IngestError("LSOA lookup row " + std::to_string(i + 1) + " is malformed");
        }
        LsoaAttributes attrs{row[c_code], *imd, *ahah, row[c_city], *ur};
        if (!lookup.emplace(attrs.lsoa_code, attrs).second) {
            throw IngestError("LSOA lookup has duplicate code '" + attrs.lsoa_code + "'");
        }
    }
    return lookup;
}

LsoaLookup load_lsoa_lookup(const std::string& path) {
    auto in = open_input(path);
    return load_lsoa_lookup(in);
}

void write_lsoa_lookup(std::ostream& out, const LsoaLookup& lookup) {
    out << "lsoa_code,imd_index,ahah_index,citytown_class,urban_rural\n";
    for (const auto& [code, a] : lookup) {
        out << csv::join({code, csv::format_double(a.imd_index), csv::format_double(a.ahah_index),
                          a.citytown_class, std::string(to_string(a.urban_rural))})
            << '\n';
    }
}

JoinResult join_lsoa(std::vector<PropertyRecord> records, const LsoaLookup& lookup) {
    JoinResult result;
    result.records.reserve(records.size());
    for (auto& r : records) {
        const auto it = lookup.find(r.lsoa_code);
        if (it == lookup.end()) {
            ++result.miss_count;
            continue;
        }
        r.imd_index = it->second.imd_index;
        r.ahah_index = it->second.ahah_index;
        r.citytown_class = it->second.citytown_class;
        r.urban_rural = it->second.urban_rural;
        result.records.push_back(std::move(r));
    }
    return result;
}

LoadResult ingest(const std::string& properties_path, const std::string& lsoa_path, const DateRange& window) {
    auto loaded = load_properties(properties_path, window);
    const auto lookup = load_lsoa_lookup(lsoa_path);
    auto joined = join_lsoa(std::move(loaded.records), lookup);
    loaded.records = std::move(joined.records);
    loaded.report.rows_dropped_join_miss = joined.miss_count;
    loaded.report.rows_kept = loaded.records.size();
    return loaded;
}

// ---------------------------------------------------------------------------
// Synthetic data

void SyntheticSpec::check() const {
    if (n_clusters < 1) {
        throw InvalidArgument("synthetic settings: n_clusters must be >= 1");
    }
    if (n_clusters > kMaxSyntheticClusters) {
        throw InvalidArgument("synthetic settings: n_clusters must be <= " + std::to_string(kMaxSyntheticClusters));
    }
    if (n_points < n_clusters) {
        throw InvalidArgument("synthetic settings: n_points (" + std::to_string(n_points) + ") < n_clusters (" +
                              std::to_string(n_clusters) + ")");
    }
    if (!(separation >= 0.0) || !std::isfinite(separation)) {
        throw InvalidArgument("synthetic settings: separation must be finite and >= 0");
    }
    if (!(urban_fraction >= 0.0 && urban_fraction <= 1.0)) {
        throw InvalidArgument("synthetic settings: urban_fraction must be in [0,1]");
    }
    if (!(rural_occupancy_uplift >= 0.0 && rural_occupancy_uplift <= 0.25)) {
        throw InvalidArgument("synthetic settings: rural_occupancy_uplift must be in [0,0.25]");
    }
}

namespace {

using Latent = std::array<double, kNumericFeatureCount>;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double round_to(double x, double step) {
    const double inv = std::round(1.0 / step);  // divide by the integer reciprocal so 0.01 steps print cleanly
    return inv >= 1.0 ? std::round(x * inv) / inv : std::round(x / step) * step;
}

// Mutually orthogonal center directions scaled so every pair is `separation` apart.
std::vector<Latent> plant_centers(std::size_t k, double separation, Rng& rng) {
    std::vector<Latent> basis;
    while (basis.size() < k) {
        Latent v{};
        for (auto& x : v) {
            x = rng.normal();
        }
        for (const auto& b : basis) {
            double dot = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) {
                dot += v[i] * b[i];
            }
            for (std::size_t i = 0; i < v.size(); ++i) {
                v[i] -= dot * b[i];
            }
        }
        double norm = 0.0;
        for (double x : v) {
            norm += x * x;
        }
        norm = std::sqrt(norm);
        if (norm < 1e-8) {
            continue;
        }
        for (auto& x : v) {
            x /= norm;
        }
        basis.push_back(v);
    }
    const double scale = separation / std::numbers::sqrt2;
    Latent mean{};
    for (auto& b : basis) {
        for (std::size_t i = 0; i < b.size(); ++i) {
            b[i] *= scale;
            mean[i] += b[i] / static_cast<double>(k);
        }
    }
    for (auto& b : basis) {
        for (std::size_t i = 0; i < b.size(); ++i) {
            b[i] -= mean[i];
        }
    }
    return basis;
}

// Monotone map from latent coordinates to field ranges. Skewed money and count
// fields are log-normal; fractions, ratings and day counts are squashed.
void map_latent(const Latent& z, PropertyRecord& r) {
    r.adr = round_to(std::exp(4.6 + 0.35 * z[0]), 0.01);
    r.annual_revenue = round_to(std::exp(9.3 + 0.6 * z[1]), 0.01);
    r.occupancy_rate = round_to(0.75 * sigmoid(0.8 * z[2] - 0.3), 1e-4);
    r.num_bookings = std::round(std::exp(2.8 + 0.5 * z[3]));
    r.bedrooms = std::round(std::exp(0.7 + 0.35 * z[4]));
    r.bathrooms = round_to(std::exp(0.2 + 0.3 * z[5]), 0.5);
    r.max_guests = std::max(1.0, std::round(std::exp(1.3 + 0.35 * z[6])));
    r.property_response = round_to(sigmoid(2.0 + 0.8 * z[7]), 1e-4);
    r.minimum_stay = std::max(1.0, std::round(std::exp(0.7 + 0.5 * z[8])));
    r.reservation_days = std::round(179.0 * sigmoid(0.8 * z[9] - 0.2));
    r.available_days = std::round(179.0 * sigmoid(0.8 * z[10]));
    r.blocked_days = std::round(179.0 * sigmoid(0.8 * z[11] - 1.0));
    r.num_photos = std::round(std::exp(3.0 + 0.35 * z[12]));
    auto rating = [](double x) { return round_to(1.0 + 4.0 * sigmoid(2.2 + 0.7 * x), 0.01); };
    r.rating_overall = rating(z[13]);
    r.rating_communication = rating(z[14]);
    r.rating_accuracy = rating(z[15]);
    r.rating_cleanliness = rating(z[16]);
    r.rating_checkin = rating(z[17]);
    r.rating_location = rating(z[18]);
    r.ahah_index = round_to(25.0 + 8.0 * z[19], 0.001);
    r.imd_index = round_to(std::exp(2.9 + 0.45 * z[20]), 0.001);
    r.host_num_listings = std::max(1.0, std::round(std::exp(0.8 + 0.8 * z[21])));
    r.host_response = round_to(sigmoid(2.0 + 0.8 * z[22]), 1e-4);
    r.cleaning_fee = round_to(std::exp(3.5 + 0.5 * z[23]), 0.01);
}

std::string padded(std::string_view prefix, std::size_t value, int width) {
    std::string digits = std::to_string(value);
    if (digits.size() < static_cast<std::size_t>(width)) {
        digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
    }
    return std::string(prefix) + digits;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    spec.check();
    const std::size_t n = spec.n_points;

    Rng center_rng(derive_seed(spec.seed, 0));
    const auto centers = plant_centers(spec.n_clusters, spec.separation, center_rng);

    // Balanced component sizes, shuffled.
    Rng label_rng(derive_seed(spec.seed, 1));
    SyntheticData data;
    data.true_labels.resize(n);
    const auto order = label_rng.permutation(n);
    for (std::size_t i = 0; i < n; ++i) {
        data.true_labels[order[i]] = i % spec.n_clusters;
    }

    Rng urban_rng(derive_seed(spec.seed, 2));
    const auto n_urban = static_cast<std::size_t>(std::llround(spec.urban_fraction * static_cast<double>(n)));
    std::vector<bool> urban(n, false);
    const auto urban_order = urban_rng.permutation(n);
    for (std::size_t i = 0; i < n_urban; ++i) {
        urban[urban_order[i]] = true;
    }

    Rng noise_rng(derive_seed(spec.seed, 3));
    Rng cat_rng(derive_seed(spec.seed, 4));
    Rng date_rng(derive_seed(spec.seed, 5));

    constexpr std::array<std::string_view, 4> kTypes = {"entire-home", "private-room", "hotel-room", "shared-room"};
    constexpr std::array<double, 4> kTypeCdf = {0.6, 0.9, 0.95, 1.0};
    const std::chrono::sys_days first_base{Date{std::chrono::year{2019}, std::chrono::month{6}, std::chrono::day{1}}};
    const std::chrono::sys_days last_floor{Date{std::chrono::year{2020}, std::chrono::month{3}, std::chrono::day{1}}};

    data.records.resize(n);
    const int id_width = std::max(7, static_cast<int>(std::to_string(n).size()));
    for (std::size_t i = 0; i < n; ++i) {
        auto& r = data.records[i];
        Latent z = centers[data.true_labels[i]];
        for (auto& x : z) {
            x += noise_rng.normal();
        }
        map_latent(z, r);

        r.property_id = padded("P", i + 1, id_width);
        r.lsoa_code = padded("E01", i + 1, std::max(6, id_width - 1));
        r.urban_rural = urban[i] ? UrbanRural::urban : UrbanRural::rural;
        if (!urban[i]) {
            r.occupancy_rate = round_to(r.occupancy_rate + spec.rural_occupancy_uplift, 1e-4);
        }

        const double u = cat_rng.uniform();
        const auto type_idx =
            static_cast<std::size_t>(std::upper_bound(kTypeCdf.begin(), kTypeCdf.end(), u) - kTypeCdf.begin());
        r.property_type = std::string(kTypes[std::min<std::size_t>(type_idx, kTypes.size() - 1)]);
        r.citytown_class = std::string(kCitytownLevels[cat_rng.below(kCitytownLevels.size())]);
        r.latitude = round_to(50.0 + 8.0 * cat_rng.uniform(), 1e-5);
        r.longitude = round_to(-5.5 + 7.0 * cat_rng.uniform(), 1e-5);

        const auto first = first_base + std::chrono::days{static_cast<long>(date_rng.below(580))};
        const auto last = std::max(first, last_floor) + std::chrono::days{static_cast<long>(date_rng.below(400))};
        r.first_active = Date{first};
        r.last_active = Date{last};

        data.lookup.emplace(r.lsoa_code, LsoaAttributes{r.lsoa_code, *r.imd_index, *r.ahah_index,
                                                        *r.citytown_class, *r.urban_rural});
    }
    return data;
}

void write_truth(std::ostream& out, const std::vector<PropertyRecord>& records,
                 const std::vector<std::size_t>& labels) {
    out << "property_id,true_label\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        out << csv::escape(records[i].property_id) << ',' << labels.at(i) << '\n';
    }
}

void write_synthetic(const std::string& dir, const std::string& name, const SyntheticData& data) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    write_properties((base / (name + ".csv")).string(), data.records);
    {
        auto out = open_output((base / (name + ".truth.csv")).string());
        write_truth(out, data.records, data.true_labels);
    }
    {
        auto out = open_output((base / (name + ".lsoa.csv")).string());
        write_lsoa_lookup(out, data.lookup);
    }
}

std::map<std::string, std::size_t> load_truth(const std::string& path) {
    const auto table = csv::read_table_file(path, false);
    const auto c_id = table.column("property_id");
    const auto c_label = table.column("true_label");
    std::map<std::string, std::size_t> truth;
    for (const auto& row : table.rows) {
        const auto label = csv::parse_int(row[c_label]);
        if (!label || *label < 0) {
            throw IngestError("truth file has a malformed label for '" + row[c_id] + "'");
        }
        truth[row[c_id]] = static_cast<std::size_t>(*label);
    }
    return truth;
}

}  // namespace vrclass

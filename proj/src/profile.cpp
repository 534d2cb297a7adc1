#include "vrclass/profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vrclass/csv.hpp"
#include "vrclass/error.hpp"

namespace vrclass {

namespace {

std::size_t label_count(std::span<const std::size_t> labels) {
    return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

void check_lengths(std::span<const PropertyRecord> records, std::span<const std::size_t> labels) {
    if (records.size() != labels.size()) {
        throw InvalidArgument("profile: " + std::to_string(records.size()) + " records but " +
                              std::to_string(labels.size()) + " labels");
    }
}

struct Moments {
    std::size_t count = 0;
    double mean = 0.0;
    double std = 0.0;
};

Moments moments(const std::vector<double>& v) {
    Moments m;
    m.count = v.size();
    if (v.empty()) {
        return m;
    }
    for (double x : v) {
        m.mean += x;
    }
    m.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) {
            ss += (x - m.mean) * (x - m.mean);
        }
        m.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return m;
}

double median(std::vector<double> v) {
    if (v.empty()) {
        return 0.0;
    }
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json();
}

}  // namespace

ProfileResult profile_clusters(std::span<const PropertyRecord> records, std::span<const std::size_t> labels,
                               const PreprocessPlan* plan) {
    check_lengths(records, labels);
    ProfileResult result;
    const std::size_t k = label_count(labels);

    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        members[labels[i]].push_back(i);
    }

    std::vector<Moments> global;
    for (const auto& info : kNumericFeatures) {
        std::vector<double> all;
        for (const auto& r : records) {
            if (const auto v = numeric_feature(r, info.id)) {
                all.push_back(*v);
            }
        }
        global.push_back(moments(all));
    }

    // Standardized cluster means, mapped back through the plan's inverse.
    FeatureMatrix prepared;
    if (plan != nullptr && !records.empty()) {
        prepared = apply_plan(records_to_matrix(records), *plan);
    }

    for (std::size_t c = 0; c < k; ++c) {
        if (members[c].empty()) {
            result.warnings.push_back("cluster " + std::to_string(c) + " is empty and was excluded");
            continue;
        }
        ClusterProfile p;
        p.cluster = c;
        p.size = members[c].size();
        std::size_t urban = 0;
        for (auto i : members[c]) {
            if (records[i].urban_rural == UrbanRural::urban) {
                ++urban;
            }
        }
        p.urban_share = static_cast<double>(urban) / static_cast<double>(p.size);

        for (std::size_t f = 0; f < kNumericFeatures.size(); ++f) {
            const auto& info = kNumericFeatures[f];
            std::vector<double> values;
            for (auto i : members[c]) {
                if (const auto v = numeric_feature(records[i], info.id)) {
                    values.push_back(*v);
                }
            }
            const auto m = moments(values);
            FeatureSummary s;
            s.name = std::string(info.name);
            s.count = m.count;
            s.mean = m.mean;
            s.std = m.std;
            s.median = median(std::move(values));
            if (plan != nullptr) {
                if (const auto col = prepared.find_column(s.name); col && plan->find_numeric(s.name)) {
                    double z = 0.0;
                    for (auto i : members[c]) {
                        z += prepared.values(i, *col);
                    }
                    z /= static_cast<double>(p.size);
                    s.back_transformed_mean = plan->inverse_numeric(s.name, z);
                }
            }
            // a constant column can leave rounding noise in its std; treat that as no spread
            const bool spread = global[f].std > 1e-12 * std::max(1.0, std::abs(global[f].mean));
            const double effect = (m.count == 0 || !spread) ? 0.0 : (m.mean - global[f].mean) / global[f].std;
            p.top_distinguishing_features.push_back({s.name, effect});
            p.features.push_back(std::move(s));
        }
        std::sort(p.top_distinguishing_features.begin(), p.top_distinguishing_features.end(),
                  [](const DistinguishingFeature& a, const DistinguishingFeature& b) {
                      const double fa = std::abs(a.effect);
                      const double fb = std::abs(b.effect);
                      if (fa != fb) {
                          return fa > fb;
                      }
                      return a.name < b.name;
                  });
        result.profiles.push_back(std::move(p));
    }
    return result;
}

nlohmann::ordered_json ProfileResult::to_json() const {
    nlohmann::ordered_json j;
    auto& arr = j["profiles"] = nlohmann::ordered_json::array();
    for (const auto& p : profiles) {
        nlohmann::ordered_json e;
        e["cluster"] = p.cluster;
        e["size"] = p.size;
        e["urban_share"] = p.urban_share;
        auto& feats = e["features"] = nlohmann::ordered_json::array();
        for (const auto& f : p.features) {
            feats.push_back({{"name", f.name},
                             {"count", f.count},
                             {"mean", f.mean},
                             {"median", f.median},
                             {"std", f.std},
                             {"back_transformed_mean", optional_number(f.back_transformed_mean)}});
        }
        auto& top = e["top_distinguishing_features"] = nlohmann::ordered_json::array();
        for (const auto& f : p.top_distinguishing_features) {
            top.push_back({{"name", f.name}, {"effect", f.effect}});
        }
        arr.push_back(std::move(e));
    }
    j["warnings"] = warnings;
    return j;
}

std::vector<UrbanRuralCount> urban_rural_distribution(std::span<const PropertyRecord> records,
                                                      std::span<const std::size_t> labels) {
    check_lengths(records, labels);
    std::vector<UrbanRuralCount> out(label_count(labels));
    for (std::size_t c = 0; c < out.size(); ++c) {
        out[c].cluster = c;
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!records[i].urban_rural) {
            continue;
        }
        if (*records[i].urban_rural == UrbanRural::urban) {
            ++out[labels[i]].urban;
        } else {
            ++out[labels[i]].rural;
        }
    }
    return out;
}

std::string urban_rural_csv(const std::vector<UrbanRuralCount>& counts) {
    std::ostringstream out;
    out << "cluster,urban,rural\n";
    for (const auto& c : counts) {
        out << c.cluster << ',' << c.urban << ',' << c.rural << '\n';
    }
    return out.str();
}

DescriptiveSeries descriptive_series(std::span<const PropertyRecord> records, const DateRange& window) {
    DescriptiveSeries series;
    if (records.empty()) {
        return series;
    }
    namespace chr = std::chrono;
    const chr::year_month first_month{window.start.year(), window.start.month()};
    const chr::year_month last_month{window.end.year(), window.end.month()};

    std::vector<chr::year_month> months;
    for (auto m = first_month; m <= last_month; m += chr::months{1}) {
        months.push_back(m);
    }
    struct Acc {
        double sum = 0.0;
        std::size_t count = 0;
    };
    // [month][urban=0 / rural=1]
    std::vector<std::array<Acc, 2>> revenue(months.size()), occupancy(months.size());

    for (const auto& r : records) {
        if (!r.urban_rural) {
            continue;
        }
        const auto start = std::max(chr::sys_days{r.first_active}, chr::sys_days{window.start});
        const auto end = std::min(chr::sys_days{r.last_active}, chr::sys_days{window.end});
        if (end < start) {
            continue;
        }
        const Date s{start};
        const Date e{end};
        const chr::year_month from{s.year(), s.month()};
        const chr::year_month to{e.year(), e.month()};
        const std::size_t split = *r.urban_rural == UrbanRural::urban ? 0 : 1;
        for (std::size_t m = 0; m < months.size(); ++m) {
            if (months[m] < from || months[m] > to) {
                continue;
            }
            revenue[m][split].sum += r.annual_revenue / 12.0;
            ++revenue[m][split].count;
            occupancy[m][split].sum += r.occupancy_rate;
            ++occupancy[m][split].count;
        }
    }

    auto build = [&](const std::vector<std::array<Acc, 2>>& acc) {
        std::vector<SeriesPoint> out;
        for (std::size_t m = 0; m < months.size(); ++m) {
            SeriesPoint p;
            p.month = months[m];
            p.urban_count = acc[m][0].count;
            p.rural_count = acc[m][1].count;
            if (p.urban_count > 0) {
                p.urban_mean = acc[m][0].sum / static_cast<double>(p.urban_count);
            }
            if (p.rural_count > 0) {
                p.rural_mean = acc[m][1].sum / static_cast<double>(p.rural_count);
            }
            out.push_back(p);
        }
        return out;
    };
    series.revenue = build(revenue);
    series.occupancy = build(occupancy);
    return series;
}

std::string series_csv(const std::vector<SeriesPoint>& series, const DateRange& window) {
    std::ostringstream out;
    out << "# window_start=" << format_iso_date(window.start) << '\n';
    out << "# window_end=" << format_iso_date(window.end) << '\n';
    out << "month,urban_mean,urban_count,rural_mean,rural_count\n";
    for (const auto& p : series) {
        out << format_year_month(p.month) << ',' << csv::format_double(p.urban_mean.value_or(NAN)) << ','
            << p.urban_count << ',' << csv::format_double(p.rural_mean.value_or(NAN)) << ',' << p.rural_count
            << '\n';
    }
    return out.str();
}

PointExport export_cluster_points(std::span<const PropertyRecord> records, std::span<const std::size_t> labels) {
    check_lengths(records, labels);
    PointExport out;
    std::ostringstream csv_out;
    csv_out << "property_id,latitude,longitude,cluster\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (!r.latitude || !r.longitude) {
            ++out.rows_skipped;
            continue;
        }
        csv_out << csv::escape(r.property_id) << ',' << csv::format_double(*r.latitude) << ','
                << csv::format_double(*r.longitude) << ',' << labels[i] << '\n';
        ++out.rows_written;
    }
    out.csv = csv_out.str();
    return out;
}

}  // namespace vrclass

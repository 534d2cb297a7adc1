#include "vrclass/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "vrclass/csv.hpp"
#include "vrclass/error.hpp"
#include "vrclass/random.hpp"

namespace vrclass {

std::string_view to_string(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::kmeans: return "kmeans";
        case Algorithm::kmedoids_clara: return "kmedoids_clara";
        case Algorithm::kmedoids_pam: return "kmedoids_pam";
    }
    return "kmeans";
}

std::optional<Algorithm> parse_algorithm(std::string_view text) {
    if (text == "kmeans") {
        return Algorithm::kmeans;
    }
    if (text == "kmedoids_clara" || text == "clara" || text == "kmedoids") {
        return Algorithm::kmedoids_clara;
    }
    if (text == "kmedoids_pam" || text == "pam") {
        return Algorithm::kmedoids_pam;
    }
    return std::nullopt;
}

nlohmann::ordered_json ClusterModel::to_json() const {
    nlohmann::ordered_json j;
    j["algorithm"] = std::string(to_string(algorithm));
    j["k"] = k;
    j["seed"] = seed;
    j["n_iter"] = n_iter;
    j["inertia"] = inertia;
    std::vector<std::size_t> sizes(k, 0);
    for (auto l : labels) {
        ++sizes.at(l);
    }
    j["cluster_sizes"] = sizes;
    if (is_medoid_model()) {
        j["medoid_rows"] = medoid_rows;
    }
    auto& rows = j["centers"] = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < centers.rows(); ++c) {
        rows.push_back(std::vector<double>(centers.row(c).begin(), centers.row(c).end()));
    }
    return j;
}

namespace {

void check_points(const Matrix& points, std::size_t k) {
    if (k == 0) {
        throw InvalidArgument("k must be at least 1");
    }
    if (k > points.rows()) {
        throw InvalidArgument("k (" + std::to_string(k) + ") exceeds the number of points (" +
                              std::to_string(points.rows()) + ")");
    }
    for (double v : points.data()) {
        if (!std::isfinite(v)) {
            throw NumericError("clustering input contains a non-finite value");
        }
    }
}

// Nearest center by squared distance; ties to the lowest center index.
std::vector<std::size_t> assign_squared(const Matrix& points, const Matrix& centers, std::vector<double>& dist2) {
    const std::size_t n = points.rows();
    std::vector<std::size_t> labels(n, 0);
    dist2.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = points.row(i);
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t c = 0; c < centers.rows(); ++c) {
            const double d = squared_distance(x, centers.row(c));
            if (d < best) {
                best = d;
                arg = c;
            }
        }
        labels[i] = arg;
        dist2[i] = best;
    }
    return labels;
}

// Moves the farthest point (from a cluster with spare members) into each empty cluster.
void reseed_empty(const Matrix& points, Matrix& centers, std::vector<std::size_t>& labels,
                  std::vector<double>& dist2) {
    const std::size_t k = centers.rows();
    std::vector<std::size_t> counts(k, 0);
    for (auto l : labels) {
        ++counts[l];
    }
    for (std::size_t e = 0; e < k; ++e) {
        if (counts[e] != 0) {
            continue;
        }
        std::size_t far = labels.size();
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (counts[labels[i]] > 1 && (far == labels.size() || dist2[i] > dist2[far])) {
                far = i;
            }
        }
        --counts[labels[far]];
        labels[far] = e;
        ++counts[e];
        dist2[far] = 0.0;
        std::copy(points.row(far).begin(), points.row(far).end(), centers.row(e).begin());
    }
}

double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s;
}

ClusterModel lloyd(const Matrix& points, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
    const std::size_t n = points.rows();
    const std::size_t d = points.cols();

    ClusterModel model;
    model.algorithm = Algorithm::kmeans;
    model.k = k;
    model.seed = seed;
    model.centers = kmeans_pp_init(points, k, seed);

    std::vector<double> dist2;
    model.labels = assign_squared(points, model.centers, dist2);
    reseed_empty(points, model.centers, model.labels, dist2);
    model.cost_history.push_back(sum(dist2));

    while (model.n_iter < options.max_iter) {
        ++model.n_iter;
        Matrix next(k, d, 0.0);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto dst = next.row(model.labels[i]);
            const auto x = points.row(i);
            for (std::size_t j = 0; j < d; ++j) {
                dst[j] += x[j];
            }
            ++counts[model.labels[i]];
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            for (auto& v : next.row(c)) {
                v /= static_cast<double>(counts[c]);
            }
            shift = std::max(shift, distance(next.row(c), model.centers.row(c)));
        }
        model.centers = std::move(next);
        model.labels = assign_squared(points, model.centers, dist2);
        reseed_empty(points, model.centers, model.labels, dist2);
        model.cost_history.push_back(sum(dist2));
        if (shift < options.tol) {
            break;
        }
    }
    model.inertia = model.cost_history.back();
    return model;
}

// Row-major n x n Euclidean distances.
std::vector<double> distance_matrix(const Matrix& points, std::span<const std::size_t> rows) {
    const std::size_t m = rows.size();
    std::vector<double> dist(m * m, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            const double v = distance(points.row(rows[a]), points.row(rows[b]));
            dist[a * m + b] = v;
            dist[b * m + a] = v;
        }
    }
    return dist;
}

struct PamSolution {
    std::vector<std::size_t> medoids;  // positions into the distance matrix
    double build_cost = 0.0;
    std::size_t swaps = 0;
};

PamSolution pam_on_distances(const std::vector<double>& dist, std::size_t m, std::size_t k, std::size_t max_swaps) {
    auto D = [&](std::size_t a, std::size_t b) { return dist[a * m + b]; };
    PamSolution sol;
    std::vector<bool> is_medoid(m, false);
    std::vector<double> nearest(m, std::numeric_limits<double>::infinity());

    // BUILD
    {
        std::size_t first = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                s += D(i, j);
            }
            if (s < best) {
                best = s;
                first = j;
            }
        }
        sol.medoids.push_back(first);
        is_medoid[first] = true;
        for (std::size_t i = 0; i < m; ++i) {
            nearest[i] = D(i, first);
        }
    }
    while (sol.medoids.size() < k) {
        std::size_t pick = m;
        double best_gain = -1.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (is_medoid[j]) {
                continue;
            }
            double gain = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                gain += std::max(nearest[i] - D(i, j), 0.0);
            }
            if (gain > best_gain) {
                best_gain = gain;
                pick = j;
            }
        }
        sol.medoids.push_back(pick);
        is_medoid[pick] = true;
        for (std::size_t i = 0; i < m; ++i) {
            nearest[i] = std::min(nearest[i], D(i, pick));
        }
    }
    for (double v : nearest) {
        sol.build_cost += v;
    }

    // SWAP
    std::vector<double> d1(m), d2(m);
    std::vector<std::size_t> owner(m);
    auto refresh = [&] {
        for (std::size_t i = 0; i < m; ++i) {
            d1[i] = d2[i] = std::numeric_limits<double>::infinity();
            for (std::size_t p = 0; p < k; ++p) {
                const double v = D(i, sol.medoids[p]);
                if (v < d1[i]) {
                    d2[i] = d1[i];
                    d1[i] = v;
                    owner[i] = p;
                } else if (v < d2[i]) {
                    d2[i] = v;
                }
            }
        }
    };
    refresh();
    while (sol.swaps < max_swaps) {
        double best_delta = 0.0;
        std::size_t best_pos = k;
        std::size_t best_candidate = m;
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t o = 0; o < m; ++o) {
                if (is_medoid[o]) {
                    continue;
                }
                double delta = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double dio = D(i, o);
                    const double keep = owner[i] == p ? d2[i] : d1[i];
                    delta += std::min(dio, keep) - d1[i];
                }
                if (delta < best_delta) {
                    best_delta = delta;
                    best_pos = p;
                    best_candidate = o;
                }
            }
        }
        if (best_pos == k || best_delta >= -1e-12) {
            break;
        }
        is_medoid[sol.medoids[best_pos]] = false;
        is_medoid[best_candidate] = true;
        sol.medoids[best_pos] = best_candidate;
        ++sol.swaps;
        refresh();
    }
    return sol;
}

// Labels, centers and total distance for a medoid set given as data rows.
ClusterModel medoid_model(const Matrix& points, std::vector<std::size_t> medoid_rows, Algorithm algorithm,
                          std::uint64_t seed) {
    std::sort(medoid_rows.begin(), medoid_rows.end());
    ClusterModel model;
    model.algorithm = algorithm;
    model.k = medoid_rows.size();
    model.seed = seed;
    model.centers = Matrix(model.k, points.cols());
    for (std::size_t c = 0; c < model.k; ++c) {
        std::copy(points.row(medoid_rows[c]).begin(), points.row(medoid_rows[c]).end(), model.centers.row(c).begin());
    }
    model.medoid_rows = std::move(medoid_rows);
    std::vector<double> dist;
    model.labels = assign_nearest(points, model.centers, &dist);
    // a medoid always belongs to its own cluster, even when it duplicates another medoid
    for (std::size_t c = 0; c < model.k; ++c) {
        model.labels[model.medoid_rows[c]] = c;
        dist[model.medoid_rows[c]] = 0.0;
    }
    // ascending order makes the total independent of row order, so tied medoid sets cost the same
    std::sort(dist.begin(), dist.end());
    model.inertia = sum(dist);
    return model;
}

}  // namespace

std::vector<std::size_t> assign_nearest(const Matrix& points, const Matrix& centers, std::vector<double>* distances) {
    std::vector<double> dist2;
    auto labels = assign_squared(points, centers, dist2);
    if (distances != nullptr) {
        distances->resize(dist2.size());
        for (std::size_t i = 0; i < dist2.size(); ++i) {
            (*distances)[i] = std::sqrt(dist2[i]);
        }
    }
    return labels;
}

Matrix kmeans_pp_init(const Matrix& points, std::size_t k, std::uint64_t seed) {
    check_points(points, k);
    const std::size_t n = points.rows();
    Rng rng(seed);
    Matrix centers(k, points.cols());

    std::size_t chosen = rng.below(n);
    std::copy(points.row(chosen).begin(), points.row(chosen).end(), centers.row(0).begin());
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        d2[i] = squared_distance(points.row(i), centers.row(0));
    }

    for (std::size_t c = 1; c < k; ++c) {
        const double total = sum(d2);
        if (!(total > 0.0)) {
            chosen = rng.below(n);
        } else {
            const double target = rng.uniform() * total;
            double cumulative = 0.0;
            chosen = n;
            std::size_t last_positive = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) {
                    continue;
                }
                last_positive = i;
                cumulative += d2[i];
                if (target < cumulative) {
                    chosen = i;
                    break;
                }
            }
            if (chosen == n) {
                chosen = last_positive;  // rounding at the top of the range
            }
        }
        std::copy(points.row(chosen).begin(), points.row(chosen).end(), centers.row(c).begin());
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_distance(points.row(i), centers.row(c)));
        }
    }
    return centers;
}

ClusterModel kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
    check_points(points, k);
    if (options.n_init == 0) {
        throw InvalidArgument("kmeans: n_init must be at least 1");
    }
    ClusterModel best;
    for (std::size_t run = 0; run < options.n_init; ++run) {
        const std::uint64_t run_seed = options.n_init == 1 ? seed : derive_seed(seed, run);
        auto model = lloyd(points, k, run_seed, options);
        if (run == 0 || model.inertia < best.inertia) {
            best = std::move(model);
        }
    }
    best.seed = seed;
    return best;
}

ClusterModel pam(const Matrix& points, std::size_t k, std::uint64_t seed, const PamOptions& options) {
    check_points(points, k);
    std::vector<std::size_t> rows(points.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i] = i;
    }
    const auto dist = distance_matrix(points, rows);
    const auto sol = pam_on_distances(dist, rows.size(), k, options.max_swaps);
    auto model = medoid_model(points, sol.medoids, Algorithm::kmedoids_pam, seed);
    model.n_iter = sol.swaps;
    return model;
}

ClusterModel clara(const Matrix& points, std::size_t k, std::uint64_t seed, const ClaraOptions& options) {
    check_points(points, k);
    const std::size_t n = points.rows();
    const std::size_t sample_size = options.sample_size.value_or(std::min(n, 40 + 2 * k));
    if (sample_size < k) {
        throw InvalidArgument("clara: sample_size (" + std::to_string(sample_size) + ") < k (" + std::to_string(k) +
                              ")");
    }
    if (sample_size > n) {
        throw InvalidArgument("clara: sample_size exceeds the number of points");
    }
    if (options.n_samples == 0) {
        throw InvalidArgument("clara: n_samples must be at least 1");
    }

    Rng rng(seed);
    ClusterModel best;
    for (std::size_t s = 0; s < options.n_samples; ++s) {
        const auto sample = rng.sample_without_replacement(n, sample_size);
        const auto dist = distance_matrix(points, sample);
        const auto sol = pam_on_distances(dist, sample.size(), k, options.pam.max_swaps);
        std::vector<std::size_t> medoid_rows;
        for (auto pos : sol.medoids) {
            medoid_rows.push_back(sample[pos]);
        }
        auto model = medoid_model(points, std::move(medoid_rows), Algorithm::kmedoids_clara, seed);
        model.n_iter = s + 1;
        if (s == 0 || model.inertia < best.inertia) {
            best = std::move(model);
        }
    }
    best.n_iter = options.n_samples;
    return best;
}

ClusterModel run_clustering(const Matrix& points, std::size_t k, Algorithm algorithm, std::uint64_t seed,
                            const ClusterOptions& options) {
    switch (algorithm) {
        case Algorithm::kmeans: return kmeans(points, k, seed, options.kmeans);
        case Algorithm::kmedoids_clara: return clara(points, k, seed, options.clara);
        case Algorithm::kmedoids_pam: return pam(points, k, seed, options.pam);
    }
    throw InvalidArgument("unknown algorithm");
}

std::vector<std::size_t> canonicalize_labels(std::span<const std::size_t> labels) {
    std::map<std::size_t, std::size_t> remap;
    std::vector<std::size_t> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto [it, inserted] = remap.emplace(labels[i], remap.size());
        out[i] = it->second;
    }
    return out;
}

KneedleResult kneedle_detail(std::span<const std::size_t> ks, std::span<const double> costs, double sensitivity) {
    if (ks.size() != costs.size()) {
        throw InvalidArgument("kneedle: ks and costs differ in length");
    }
    KneedleResult result;
    const std::size_t n = ks.size();
    if (n < 3) {
        return result;
    }
    const double x_min = static_cast<double>(ks.front());
    const double x_range = static_cast<double>(ks.back()) - x_min;
    const auto [c_lo, c_hi] = std::minmax_element(costs.begin(), costs.end());
    const double y_range = *c_hi - *c_lo;
    if (!(x_range > 0.0) || !(y_range > 0.0)) {
        result.difference.assign(n, 0.0);
        return result;
    }

    std::vector<double> x(n);
    result.difference.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = (static_cast<double>(ks[i]) - x_min) / x_range;
        const double y = (costs[i] - *c_lo) / y_range;
        result.difference[i] = (1.0 - y) - x[i];
    }
    const double mean_spacing = (x.back() - x.front()) / static_cast<double>(n - 1);
    const auto& diff = result.difference;

    // Flat stretches of a straight line show up as rounding noise, not maxima.
    constexpr double kMinPeak = 1e-9;
    std::optional<std::size_t> candidate;
    double threshold = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const bool local_max = i + 1 < n && diff[i] > diff[i - 1] && diff[i] >= diff[i + 1] && diff[i] > kMinPeak;
        if (local_max) {
            candidate = i;
            threshold = diff[i] - sensitivity * mean_spacing;
            continue;
        }
        if (candidate && diff[i] < threshold) {
            result.knee = ks[*candidate];
            return result;
        }
    }
    return result;
}

std::optional<std::size_t> kneedle(std::span<const std::size_t> ks, std::span<const double> costs,
                                   double sensitivity) {
    return kneedle_detail(ks, costs, sensitivity).knee;
}

std::string ElbowCurve::to_csv() const {
    std::ostringstream out;
    out << "k,cost,selected\n";
    for (std::size_t i = 0; i < ks.size(); ++i) {
        out << ks[i] << ',' << csv::format_double(costs[i]) << ',' << (ks[i] == selected_k ? 1 : 0) << '\n';
    }
    return out.str();
}

ElbowCurve select_elbow(std::vector<std::size_t> ks, std::vector<double> costs, double sensitivity) {
    if (ks.empty() || ks.size() != costs.size()) {
        throw InvalidArgument("elbow: need matching, non-empty k and cost lists");
    }
    for (std::size_t i = 1; i < ks.size(); ++i) {
        if (ks[i] <= ks[i - 1]) {
            throw InvalidArgument("elbow: k values must be strictly ascending");
        }
    }
    ElbowCurve curve;
    curve.sensitivity = sensitivity;
    curve.ks = std::move(ks);
    curve.costs = std::move(costs);
    curve.selected_k = curve.ks.front();
    if (curve.ks.size() == 1) {
        curve.flag = "single k value; no knee detection possible";
        return curve;
    }
    if (curve.ks.size() < 3) {
        curve.flag = "fewer than 3 k values; no knee detected";
        return curve;
    }
    const auto knee = kneedle(curve.ks, curve.costs, sensitivity);
    if (knee) {
        curve.selected_k = *knee;
        curve.knee_found = true;
    } else {
        curve.flag = "no knee detected";
    }
    return curve;
}

ElbowCurve elbow_sweep(const Matrix& points, std::span<const std::size_t> ks, Algorithm algorithm,
                       std::uint64_t seed, const ClusterOptions& options, double sensitivity) {
    std::vector<double> costs;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (i > 0 && ks[i] <= ks[i - 1]) {
            throw InvalidArgument("elbow: k values must be strictly ascending");
        }
        costs.push_back(run_clustering(points, ks[i], algorithm, seed, options).inertia);
    }
    return select_elbow({ks.begin(), ks.end()}, std::move(costs), sensitivity);
}

}  // namespace vrclass

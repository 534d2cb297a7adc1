#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vrclass/data_model.hpp"

namespace vrclass {

enum class Algorithm { kmeans, kmedoids_clara, kmedoids_pam };

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view text);

struct ClusterModel {
    Algorithm algorithm = Algorithm::kmeans;
    std::size_t k = 0;
    std::vector<std::size_t> labels;
    Matrix centers;                        // centroids, or medoid coordinates
    std::vector<std::size_t> medoid_rows;  // k-medoids only, ascending
    double inertia = 0.0;                  // squared distances (k-means) or distances (k-medoids)
    std::size_t n_iter = 0;
    std::uint64_t seed = 0;
    std::vector<double> cost_history;  // k-means: cost after every assignment step of the kept run

    bool is_medoid_model() const { return algorithm != Algorithm::kmeans; }

    nlohmann::ordered_json to_json() const;
};

/// k-means++ seeding: first center uniform, the rest drawn with probability
/// proportional to squared distance to the nearest chosen center. When every
/// remaining point coincides with a chosen center the draw falls back to uniform.
Matrix kmeans_pp_init(const Matrix& points, std::size_t k, std::uint64_t seed);

struct KMeansOptions {
    std::size_t max_iter = 300;
    double tol = 1e-4;       // max centroid displacement
    std::size_t n_init = 1;  // independent seeded restarts; lowest inertia kept
};

/// Lloyd's algorithm. Ties go to the lowest center index; an empty cluster is
/// reseeded with the point farthest from its assigned center.
ClusterModel kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, const KMeansOptions& options = {});

struct PamOptions {
    std::size_t max_swaps = 200;
};

/// Partitioning Around Medoids: greedy BUILD, then best-improvement SWAP until
/// no swap lowers the total Euclidean distance by more than 1e-12.
ClusterModel pam(const Matrix& points, std::size_t k, std::uint64_t seed = 0, const PamOptions& options = {});

struct ClaraOptions {
    std::size_t n_samples = 5;
    std::optional<std::size_t> sample_size;  // default min(n, 40 + 2k)
    PamOptions pam;
};

/// PAM on seeded row samples; the medoid set with the lowest full-data cost wins.
ClusterModel clara(const Matrix& points, std::size_t k, std::uint64_t seed, const ClaraOptions& options = {});

struct ClusterOptions {
    KMeansOptions kmeans;
    ClaraOptions clara;
    PamOptions pam;
};

ClusterModel run_clustering(const Matrix& points, std::size_t k, Algorithm algorithm, std::uint64_t seed,
                            const ClusterOptions& options = {});

/// Assigns each point to its nearest center (lowest index on ties).
/// Returns the labels and writes per-point distances when requested.
std::vector<std::size_t> assign_nearest(const Matrix& points, const Matrix& centers,
                                        std::vector<double>* distances = nullptr);

/// Relabels clusters by order of first appearance.
std::vector<std::size_t> canonicalize_labels(std::span<const std::size_t> labels);

struct KneedleResult {
    std::optional<std::size_t> knee;
    std::vector<double> difference;  // normalized difference curve
};

/// Knee of a decreasing convex cost curve. Returns no knee for fewer than
/// three points, flat curves, or when no local maximum of the difference
/// curve is followed by a drop below its threshold.
KneedleResult kneedle_detail(std::span<const std::size_t> ks, std::span<const double> costs,
                             double sensitivity = 1.0);

std::optional<std::size_t> kneedle(std::span<const std::size_t> ks, std::span<const double> costs,
                                   double sensitivity = 1.0);

struct ElbowCurve {
    std::vector<std::size_t> ks;
    std::vector<double> costs;
    std::size_t selected_k = 0;
    double sensitivity = 1.0;
    bool knee_found = false;
    std::string flag;  // empty when a knee was found

    /// k,cost,selected
    std::string to_csv() const;
};

/// Selects k from precomputed costs; falls back to the smallest k with a flag.
ElbowCurve select_elbow(std::vector<std::size_t> ks, std::vector<double> costs, double sensitivity = 1.0);

ElbowCurve elbow_sweep(const Matrix& points, std::span<const std::size_t> ks, Algorithm algorithm,
                       std::uint64_t seed, const ClusterOptions& options = {}, double sensitivity = 1.0);

}  // namespace vrclass

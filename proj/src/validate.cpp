#include "vrclass/validate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vrclass/error.hpp"

namespace vrclass {

namespace {

std::vector<std::size_t> cluster_sizes(std::span<const std::size_t> labels, std::size_t k) {
    std::vector<std::size_t> sizes(k, 0);
    for (auto l : labels) {
        if (l >= k) {
            throw InvalidArgument("label " + std::to_string(l) + " outside 0.." + std::to_string(k - 1));
        }
        ++sizes[l];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] == 0) {
            throw InvalidArgument("cluster " + std::to_string(c) + " is empty");
        }
    }
    return sizes;
}

double comb2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

double davies_bouldin(const Matrix& points, std::span<const std::size_t> labels, const Matrix& centers) {
    const std::size_t k = centers.rows();
    if (k < 2) {
        throw InvalidArgument("Davies-Bouldin index needs k >= 2");
    }
    if (labels.size() != points.rows()) {
        throw InvalidArgument("Davies-Bouldin: label count differs from point count");
    }
    const auto sizes = cluster_sizes(labels, k);

    std::vector<double> scatter(k, 0.0);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        scatter[labels[i]] += distance(points.row(i), centers.row(labels[i]));
    }
    for (std::size_t c = 0; c < k; ++c) {
        scatter[c] /= static_cast<double>(sizes[c]);
    }

    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double worst = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) {
                continue;
            }
            const double d = distance(centers.row(i), centers.row(j));
            if (d == 0.0) {
                throw NumericError("Davies-Bouldin: clusters " + std::to_string(std::min(i, j)) + " and " +
                                   std::to_string(std::max(i, j)) + " have coincident centers");
            }
            worst = std::max(worst, (scatter[i] + scatter[j]) / d);
        }
        total += worst;
    }
    return total / static_cast<double>(k);
}

double calinski_harabasz(const Matrix& points, std::span<const std::size_t> labels, std::size_t k) {
    const std::size_t n = points.rows();
    if (labels.size() != n) {
        throw InvalidArgument("Calinski-Harabasz: label count differs from point count");
    }
    if (k < 2 || k >= n) {
        throw InvalidArgument("Calinski-Harabasz needs 2 <= k <= n-1, got k=" + std::to_string(k) +
                              " n=" + std::to_string(n));
    }
    const auto sizes = cluster_sizes(labels, k);
    const std::size_t d = points.cols();

    Matrix centroids(k, d, 0.0);
    std::vector<double> overall(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = points.row(i);
        auto c = centroids.row(labels[i]);
        for (std::size_t j = 0; j < d; ++j) {
            c[j] += x[j];
            overall[j] += x[j];
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        for (auto& v : centroids.row(c)) {
            v /= static_cast<double>(sizes[c]);
        }
    }
    for (auto& v : overall) {
        v /= static_cast<double>(n);
    }

    double between = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        between += static_cast<double>(sizes[c]) * squared_distance(centroids.row(c), overall);
    }
    double within = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        within += squared_distance(points.row(i), centroids.row(labels[i]));
    }
    if (within == 0.0) {
        throw NumericError("Calinski-Harabasz: degenerate perfect clustering (zero within-cluster dispersion)");
    }
    return (between / static_cast<double>(k - 1)) / (within / static_cast<double>(n - k));
}

bool CrossTab::margins_consistent() const {
    std::size_t row_sum = 0;
    for (std::size_t r = 0; r < counts.size(); ++r) {
        std::size_t s = 0;
        for (auto v : counts[r]) {
            s += v;
        }
        if (s != row_totals[r]) {
            return false;
        }
        row_sum += row_totals[r];
    }
    std::size_t col_sum = 0;
    for (std::size_t c = 0; c < col_totals.size(); ++c) {
        std::size_t s = 0;
        for (const auto& row : counts) {
            s += row[c];
        }
        if (s != col_totals[c]) {
            return false;
        }
        col_sum += col_totals[c];
    }
    return row_sum == grand_total && col_sum == grand_total;
}

std::string CrossTab::to_csv(const std::string& row_name, const std::string& col_name) const {
    std::ostringstream out;
    out << row_name << '/' << col_name;
    for (std::size_t c = 0; c < col_totals.size(); ++c) {
        out << ',' << c;
    }
    out << ",total\n";
    for (std::size_t r = 0; r < counts.size(); ++r) {
        out << r;
        for (auto v : counts[r]) {
            out << ',' << v;
        }
        out << ',' << row_totals[r] << '\n';
    }
    out << "total";
    for (auto v : col_totals) {
        out << ',' << v;
    }
    out << ',' << grand_total << '\n';
    return out.str();
}

CrossTab crosstab(std::span<const std::size_t> labels_a, std::span<const std::size_t> labels_b) {
    if (labels_a.size() != labels_b.size()) {
        throw InvalidArgument("crosstab: labelings differ in length (" + std::to_string(labels_a.size()) + " vs " +
                              std::to_string(labels_b.size()) + ")");
    }
    CrossTab tab;
    if (labels_a.empty()) {
        return tab;
    }
    const std::size_t rows = *std::max_element(labels_a.begin(), labels_a.end()) + 1;
    const std::size_t cols = *std::max_element(labels_b.begin(), labels_b.end()) + 1;
    tab.counts.assign(rows, std::vector<std::size_t>(cols, 0));
    tab.row_totals.assign(rows, 0);
    tab.col_totals.assign(cols, 0);
    for (std::size_t i = 0; i < labels_a.size(); ++i) {
        ++tab.counts[labels_a[i]][labels_b[i]];
        ++tab.row_totals[labels_a[i]];
        ++tab.col_totals[labels_b[i]];
    }
    tab.grand_total = labels_a.size();
    return tab;
}

double adjusted_rand_index(std::span<const std::size_t> labels_a, std::span<const std::size_t> labels_b) {
    if (labels_a.size() < 2) {
        throw InvalidArgument("adjusted Rand index needs at least 2 points");
    }
    const auto tab = crosstab(labels_a, labels_b);
    double index = 0.0;
    for (const auto& row : tab.counts) {
        for (auto v : row) {
            index += comb2(static_cast<double>(v));
        }
    }
    double sum_a = 0.0;
    for (auto v : tab.row_totals) {
        sum_a += comb2(static_cast<double>(v));
    }
    double sum_b = 0.0;
    for (auto v : tab.col_totals) {
        sum_b += comb2(static_cast<double>(v));
    }
    const double expected = sum_a * sum_b / comb2(static_cast<double>(tab.grand_total));
    const double maximum = 0.5 * (sum_a + sum_b);
    if (maximum == expected) {
        return 1.0;  // both partitions trivial in the same way
    }
    return (index - expected) / (maximum - expected);
}

Selection select_model(std::span<const ModelScore> scores) {
    if (scores.empty()) {
        throw InvalidArgument("select_model: no models to choose from");
    }
    std::size_t best_dbi = 0;
    std::size_t best_chi = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i].dbi < scores[best_dbi].dbi) {
            best_dbi = i;
        }
        if (scores[i].chi > scores[best_chi].chi) {
            best_chi = i;
        }
    }
    Selection sel;
    sel.index = best_chi;
    sel.disagreement = best_dbi != best_chi;
    sel.tag = scores[sel.index].tag;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (i != sel.index && scores[i].dbi == scores[sel.index].dbi && scores[i].chi == scores[sel.index].chi) {
            sel.tie = true;
        }
    }
    return sel;
}

nlohmann::ordered_json ValidationReport::to_json() const {
    nlohmann::ordered_json j;
    j["chi_definition"] = "variance ratio: (B/(k-1)) / (W/(n-k))";
    auto& models = j["models"] = nlohmann::ordered_json::array();
    for (const auto& m : per_model) {
        nlohmann::ordered_json e;
        e["tag"] = m.tag;
        e["algorithm"] = m.algorithm;
        e["k"] = m.k;
        e["dbi"] = m.dbi;
        e["chi"] = m.chi;
        e["inertia"] = m.inertia;
        e["ari_vs_truth"] = m.ari_vs_truth ? nlohmann::ordered_json(*m.ari_vs_truth) : nlohmann::ordered_json();
        models.push_back(std::move(e));
    }
    j["selected"] = selection.tag;
    j["flags"] = {{"disagreement", selection.disagreement}, {"tie", selection.tie}};
    j["ari_vs_truth"] = ari_vs_truth ? nlohmann::ordered_json(*ari_vs_truth) : nlohmann::ordered_json();
    nlohmann::ordered_json tab;
    tab["rows"] = per_model.empty() ? "" : per_model.front().tag;
    tab["columns"] = per_model.size() < 2 ? "" : per_model[1].tag;
    tab["counts"] = crosstab.counts;
    tab["row_totals"] = crosstab.row_totals;
    tab["col_totals"] = crosstab.col_totals;
    tab["grand_total"] = crosstab.grand_total;
    j["crosstab"] = std::move(tab);
    return j;
}

}  // namespace vrclass

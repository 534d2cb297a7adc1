#include "vrclass/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "vrclass/csv.hpp"
#include "vrclass/error.hpp"
#include "vrclass/random.hpp"

namespace vrclass {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string bad_value(std::string_view key, std::string_view value, std::string_view expected) {
    return "config key '" + std::string(key) + "': '" + std::string(value) + "' is not " + std::string(expected);
}

double as_double(std::string_view key, std::string_view value) {
    const auto v = csv::parse_double(value);
    if (!v || !std::isfinite(*v)) {
        throw ConfigError(bad_value(key, value, "a number"));
    }
    return *v;
}

std::size_t as_size(std::string_view key, std::string_view value) {
    const auto v = csv::parse_int(value);
    if (!v || *v < 0) {
        throw ConfigError(bad_value(key, value, "a non-negative integer"));
    }
    return static_cast<std::size_t>(*v);
}

std::uint64_t as_u64(std::string_view key, std::string_view value) {
    std::uint64_t v = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc{} || ptr != end || value.empty()) {
        throw ConfigError(bad_value(key, value, "an unsigned integer"));
    }
    return v;
}

bool as_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no" || value == "off") {
        return false;
    }
    throw ConfigError(bad_value(key, value, "a boolean"));
}

Date as_date(std::string_view key, std::string_view value) {
    const auto d = parse_iso_date(value);
    if (!d) {
        throw ConfigError(bad_value(key, value, "an ISO date (YYYY-MM-DD)"));
    }
    return *d;
}

std::string path_in(const PipelineConfig& config, std::string_view file) {
    return (fs::path(config.out_dir) / file).string();
}

std::uint64_t cluster_seed(const PipelineConfig& config, Algorithm algorithm) {
    return derive_seed(config.seed, algorithm == Algorithm::kmeans ? 1 : 2);
}

// Column metadata that apply_plan produces, rebuilt from the plan alone.
std::vector<ColumnMeta> plan_output_columns(const PreprocessPlan& plan) {
    std::vector<ColumnMeta> out;
    for (const auto& name : plan.input_columns) {
        if (const auto* p = plan.find_numeric(name)) {
            out.push_back({name, ColumnKind::numeric, p->log1p ? Transform::log1p_then_zscore : Transform::zscore,
                           std::nullopt, {}});
            continue;
        }
        const auto ord = std::find_if(plan.ordinal.begin(), plan.ordinal.end(),
                                      [&](const auto& o) { return o.name == name; });
        if (ord != plan.ordinal.end()) {
            out.push_back({name, ColumnKind::ordinal, Transform::none, std::nullopt, ord->levels});
            continue;
        }
        const auto nom = std::find_if(plan.nominal.begin(), plan.nominal.end(),
                                      [&](const auto& o) { return o.name == name; });
        if (nom != plan.nominal.end()) {
            for (const auto& cat : nom->categories) {
                out.push_back({name + "=" + cat, ColumnKind::nominal_onehot, Transform::none, name, {}});
            }
        }
    }
    return out;
}

void restore_metadata(FeatureMatrix& m, const std::vector<ColumnMeta>& columns, const std::string& what) {
    if (m.cols() != columns.size()) {
        throw PlanError(what + " has " + std::to_string(m.cols()) + " columns, the plan expects " +
                        std::to_string(columns.size()));
    }
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (m.columns[c].name != columns[c].name) {
            throw PlanError(what + " column " + std::to_string(c) + " is '" + m.columns[c].name + "', the plan expects '" +
                            columns[c].name + "'");
        }
    }
    m.columns = columns;
}

// Labels re-ordered to follow `row_ids`.
std::vector<std::size_t> labels_for(std::span<const std::string> row_ids, const std::vector<std::string>& label_ids,
                                    const std::vector<std::size_t>& labels, const std::string& what) {
    if (label_ids == std::vector<std::string>(row_ids.begin(), row_ids.end())) {
        return labels;
    }
    std::map<std::string_view, std::size_t> by_id;
    for (std::size_t i = 0; i < label_ids.size(); ++i) {
        by_id[label_ids[i]] = labels[i];
    }
    std::vector<std::size_t> out;
    out.reserve(row_ids.size());
    for (const auto& id : row_ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw InvalidArgument(what + " has no label for '" + id + "'");
        }
        out.push_back(it->second);
    }
    return out;
}

Matrix centers_from_json(const nlohmann::json& j) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : j.at("centers")) {
        rows.push_back(r.get<std::vector<double>>());
    }
    return Matrix::from_rows(rows);
}

std::size_t elbow_selected_k(const std::string& path) {
    const auto table = csv::read_table_file(path);
    const auto c_k = table.column("k");
    const auto c_sel = table.column("selected");
    for (const auto& row : table.rows) {
        if (row[c_sel] == "1") {
            return as_size("k", row[c_k]);
        }
    }
    throw InvalidArgument(path + " has no selected k");
}

}  // namespace

void PipelineConfig::check() const {
    if (properties_path.has_value() == synthetic.has_value()) {
        throw ConfigError("exactly one data source is required: properties (with optional lsoa) or synthetic.*");
    }
    if (lsoa_path && !properties_path) {
        throw ConfigError("lsoa given without properties");
    }
    if (synthetic) {
        synthetic->check();
    }
    if (window.end < window.start) {
        throw ConfigError("window_end " + format_iso_date(window.end) + " is before window_start " +
                          format_iso_date(window.start));
    }
    if (k_list.empty()) {
        throw ConfigError("k_list is empty");
    }
    for (std::size_t i = 0; i < k_list.size(); ++i) {
        if (k_list[i] < 1 || (i > 0 && k_list[i] <= k_list[i - 1])) {
            throw ConfigError("k_list must hold strictly ascending positive values");
        }
    }
    if (kmeans_k < 2 || kmedoids_k < 2) {
        throw ConfigError("kmeans_k and kmedoids_k must be at least 2");
    }
    if (kmeans_n_init < 1 || kmeans_max_iter < 1 || clara_samples < 1) {
        throw ConfigError("kmeans_n_init, kmeans_max_iter and clara_samples must be positive");
    }
    if (!(kmeans_tol >= 0.0) || !(kneedle_sensitivity > 0.0)) {
        throw ConfigError("kmeans_tol must be >= 0 and kneedle_sensitivity > 0");
    }
    if (out_dir.empty()) {
        throw ConfigError("out directory is empty");
    }
}

ClusterOptions PipelineConfig::cluster_options() const {
    ClusterOptions o;
    o.kmeans.max_iter = kmeans_max_iter;
    o.kmeans.tol = kmeans_tol;
    o.kmeans.n_init = kmeans_n_init;
    o.pam.max_swaps = pam_max_swaps;
    o.clara.n_samples = clara_samples;
    o.clara.sample_size = clara_sample_size;
    o.clara.pam = o.pam;
    return o;
}

nlohmann::ordered_json PipelineConfig::to_json() const {
    nlohmann::ordered_json j;
    j["properties"] = properties_path ? nlohmann::ordered_json(*properties_path) : nlohmann::ordered_json();
    j["lsoa"] = lsoa_path ? nlohmann::ordered_json(*lsoa_path) : nlohmann::ordered_json();
    if (synthetic) {
        j["synthetic"] = {{"n", synthetic->n_points},
                          {"k", synthetic->n_clusters},
                          {"sep", synthetic->separation},
                          {"seed", synthetic->seed},
                          {"urban_fraction", synthetic->urban_fraction},
                          {"rural_uplift", synthetic->rural_occupancy_uplift}};
    } else {
        j["synthetic"] = nullptr;
    }
    j["window_start"] = format_iso_date(window.start);
    j["window_end"] = format_iso_date(window.end);
    j["skew_threshold"] = skew_threshold;
    j["kaiser_threshold"] = kaiser_threshold;
    j["drop_duplicate_columns"] = drop_duplicate_columns;
    j["k_list"] = k_list;
    j["kmeans_k"] = kmeans_k;
    j["kmedoids_k"] = kmedoids_k;
    j["use_elbow_k"] = use_elbow_k;
    j["kneedle_sensitivity"] = kneedle_sensitivity;
    j["kmeans_n_init"] = kmeans_n_init;
    j["kmeans_max_iter"] = kmeans_max_iter;
    j["kmeans_tol"] = kmeans_tol;
    j["clara_samples"] = clara_samples;
    j["clara_sample_size"] = clara_sample_size ? nlohmann::ordered_json(*clara_sample_size) : nlohmann::ordered_json();
    j["pam_max_swaps"] = pam_max_swaps;
    j["seed"] = seed;
    j["out"] = out_dir;
    return j;
}

std::vector<std::size_t> parse_k_list(std::string_view text) {
    text = trim(text);
    std::vector<std::size_t> ks;
    if (const auto dots = text.find(".."); dots != std::string_view::npos) {
        const auto lo = as_size("k_list", trim(text.substr(0, dots)));
        const auto hi = as_size("k_list", trim(text.substr(dots + 2)));
        if (hi < lo) {
            throw ConfigError("k_list range '" + std::string(text) + "' is descending");
        }
        for (auto k = lo; k <= hi; ++k) {
            ks.push_back(k);
        }
        return ks;
    }
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto item = trim(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        ks.push_back(as_size("k_list", item));
        if (comma == std::string_view::npos) {
            break;
        }
        pos = comma + 1;
    }
    return ks;
}

void apply_config_entry(PipelineConfig& config, std::string_view key, std::string_view value) {
    key = trim(key);
    value = trim(value);
    auto synth = [&]() -> SyntheticSpec& {
        if (!config.synthetic) {
            config.synthetic = SyntheticSpec{};
        }
        return *config.synthetic;
    };
    if (key == "properties") {
        config.properties_path = std::string(value);
    } else if (key == "lsoa") {
        config.lsoa_path = std::string(value);
    } else if (key == "synthetic.n") {
        synth().n_points = as_size(key, value);
    } else if (key == "synthetic.k") {
        synth().n_clusters = as_size(key, value);
    } else if (key == "synthetic.sep") {
        synth().separation = as_double(key, value);
    } else if (key == "synthetic.seed") {
        synth().seed = as_u64(key, value);
    } else if (key == "synthetic.urban_fraction") {
        synth().urban_fraction = as_double(key, value);
    } else if (key == "synthetic.rural_uplift") {
        synth().rural_occupancy_uplift = as_double(key, value);
    } else if (key == "window_start") {
        config.window.start = as_date(key, value);
    } else if (key == "window_end") {
        config.window.end = as_date(key, value);
    } else if (key == "skew_threshold") {
        config.skew_threshold = as_double(key, value);
    } else if (key == "kaiser_threshold") {
        config.kaiser_threshold = as_double(key, value);
    } else if (key == "drop_duplicate_columns") {
        config.drop_duplicate_columns = as_bool(key, value);
    } else if (key == "k_list") {
        config.k_list = parse_k_list(value);
    } else if (key == "kmeans_k") {
        config.kmeans_k = as_size(key, value);
    } else if (key == "kmedoids_k") {
        config.kmedoids_k = as_size(key, value);
    } else if (key == "use_elbow_k") {
        config.use_elbow_k = as_bool(key, value);
    } else if (key == "kneedle_sensitivity") {
        config.kneedle_sensitivity = as_double(key, value);
    } else if (key == "kmeans_n_init") {
        config.kmeans_n_init = as_size(key, value);
    } else if (key == "kmeans_max_iter") {
        config.kmeans_max_iter = as_size(key, value);
    } else if (key == "kmeans_tol") {
        config.kmeans_tol = as_double(key, value);
    } else if (key == "clara_samples") {
        config.clara_samples = as_size(key, value);
    } else if (key == "clara_sample_size") {
        config.clara_sample_size = as_size(key, value);
    } else if (key == "pam_max_swaps") {
        config.pam_max_swaps = as_size(key, value);
    } else if (key == "seed") {
        config.seed = as_u64(key, value);
    } else if (key == "out") {
        config.out_dir = std::string(value);
    } else {
        throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
}

PipelineConfig load_config(const std::string& path, PipelineConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') {
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
        }
        try {
            apply_config_entry(base, text.substr(0, eq), text.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return base;
}

PreparedData prepare_features(std::span<const PropertyRecord> records, const PipelineConfig& config) {
    PreparedData d;
    d.raw = records_to_matrix(records);
    d.plan = fit_plan(d.raw, {config.skew_threshold, config.drop_duplicate_columns});
    d.prepared = apply_plan(d.raw, d.plan);
    d.pca = fit_pca(d.prepared.select_columns(numeric_column_indices(d.prepared)), config.kaiser_threshold);
    d.space = build_cluster_space(d.prepared, d.pca);
    return d;
}

void write_feature_csv(const std::string& path, const FeatureMatrix& matrix) {
    matrix.check_shape();
    std::ostringstream out;
    out << "property_id";
    for (const auto& c : matrix.columns) {
        out << ',' << csv::escape(c.name);
    }
    out << '\n';
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        out << csv::escape(matrix.row_ids[r]);
        for (double v : matrix.values.row(r)) {
            out << ',' << csv::format_double(v);
        }
        out << '\n';
    }
    write_text(path, out.str());
}

FeatureMatrix read_feature_csv(const std::string& path) {
    const auto table = csv::read_table_file(path);
    if (table.header.empty() || table.header.front() != "property_id") {
        throw IngestError(path + ": first column must be property_id");
    }
    FeatureMatrix m;
    for (std::size_t c = 1; c < table.header.size(); ++c) {
        m.columns.push_back({table.header[c], ColumnKind::numeric, Transform::none, std::nullopt, {}});
    }
    m.values = Matrix(table.rows.size(), m.columns.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        m.row_ids.push_back(row[0]);
        for (std::size_t c = 1; c < row.size(); ++c) {
            const auto v = csv::parse_double(row[c]);
            if (!v) {
                throw IngestError(path + ": row " + std::to_string(r + 1) + " column '" + table.header[c] +
                                  "' is not a number");
            }
            m.values(r, c - 1) = *v;
        }
    }
    return m;
}

void write_labels_csv(const std::string& path, std::span<const std::string> row_ids,
                      std::span<const std::size_t> labels) {
    if (row_ids.size() != labels.size()) {
        throw InvalidArgument("labels: " + std::to_string(row_ids.size()) + " ids but " +
                              std::to_string(labels.size()) + " labels");
    }
    std::ostringstream out;
    out << "property_id,cluster\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out << csv::escape(row_ids[i]) << ',' << labels[i] << '\n';
    }
    write_text(path, out.str());
}

std::pair<std::vector<std::string>, std::vector<std::size_t>> read_labels_csv(const std::string& path) {
    const auto table = csv::read_table_file(path);
    const auto c_id = table.column("property_id");
    const auto c_label = table.column("cluster");
    std::pair<std::vector<std::string>, std::vector<std::size_t>> out;
    for (const auto& row : table.rows) {
        const auto v = csv::parse_int(row[c_label]);
        if (!v || *v < 0) {
            throw IngestError(path + ": malformed cluster label for '" + row[c_id] + "'");
        }
        out.first.push_back(row[c_id]);
        out.second.push_back(static_cast<std::size_t>(*v));
    }
    return out;
}

void write_text(const std::string& path, std::string_view text) {
    const fs::path p(path);
    if (p.has_parent_path()) {
        fs::create_directories(p.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path);
    }
    out << text;
    if (!out) {
        throw Error("write failed for " + path);
    }
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path);
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(path + ": " + e.what());
    }
}

namespace stages {

GenerateOutput generate(const PipelineConfig& config, const std::string& name) {
    if (!config.synthetic) {
        throw ConfigError("generate needs synthetic settings");
    }
    config.synthetic->check();
    const auto data = generate_synthetic(*config.synthetic);
    write_synthetic(config.out_dir, name, data);
    return {path_in(config, name + ".csv"), path_in(config, name + ".truth.csv"), path_in(config, name + ".lsoa.csv")};
}

IngestReport ingest(const PipelineConfig& config, const std::string& properties_path,
                    const std::optional<std::string>& lsoa_path, IngestReport* report_out) {
    auto loaded = lsoa_path ? vrclass::ingest(properties_path, *lsoa_path, config.window)
                            : load_properties(properties_path, config.window);
    write_json(path_in(config, "ingest_report.json"), loaded.report.to_json());
    if (report_out != nullptr) {
        *report_out = loaded.report;
    }
    if (loaded.records.empty()) {
        throw IngestError("no rows left after ingestion (read " + std::to_string(loaded.report.rows_read) +
                          ", outside window " + std::to_string(loaded.report.rows_dropped_window) + ", invalid " +
                          std::to_string(loaded.report.rows_dropped_invalid) + ", join misses " +
                          std::to_string(loaded.report.rows_dropped_join_miss) + ")");
    }
    write_properties(path_in(config, "properties.clean.csv"), loaded.records);
    return loaded.report;
}

void preprocess(const PipelineConfig& config, const std::string& clean_path) {
    const auto records = load_properties(clean_path, config.window).records;
    const auto raw = records_to_matrix(records);
    const auto plan = fit_plan(raw, {config.skew_threshold, config.drop_duplicate_columns});
    const auto prepared = apply_plan(raw, plan);
    save_plan(path_in(config, "plan.json"), plan);
    write_feature_csv(path_in(config, "features.csv"), prepared);
}

PcaModel pca(const PipelineConfig& config, const std::string& features_path, const std::string& plan_path) {
    const auto plan = load_plan(plan_path);
    auto prepared = read_feature_csv(features_path);
    restore_metadata(prepared, plan_output_columns(plan), features_path);
    const auto model = fit_pca(prepared.select_columns(numeric_column_indices(prepared)), config.kaiser_threshold);
    write_json(path_in(config, "pca_model.json"), model.to_json());
    write_text(path_in(config, "pca_loadings.csv"), loadings_table(model));
    write_text(path_in(config, "pca_variance.csv"), variance_table(model));
    write_feature_csv(path_in(config, "cluster_space.csv"), build_cluster_space(prepared, model));
    return model;
}

ClusterOutput cluster(const PipelineConfig& config, const std::string& space_path) {
    const auto space = read_feature_csv(space_path);
    std::size_t k_means = config.kmeans_k;
    std::size_t k_medoids = config.kmedoids_k;
    if (config.use_elbow_k) {
        const auto means_curve = path_in(config, "elbow.csv");
        const auto medoids_curve = path_in(config, "elbow_kmedoids.csv");
        k_means = elbow_selected_k(means_curve);
        k_medoids = fs::exists(medoids_curve) ? elbow_selected_k(medoids_curve) : k_means;
    }
    const auto options = config.cluster_options();
    ClusterOutput out;
    out.kmeans = run_clustering(space.values, k_means, Algorithm::kmeans, cluster_seed(config, Algorithm::kmeans),
                                options);
    out.kmedoids = run_clustering(space.values, k_medoids, Algorithm::kmedoids_clara,
                                  cluster_seed(config, Algorithm::kmedoids_clara), options);
    write_labels_csv(path_in(config, "labels_kmeans.csv"), space.row_ids, out.kmeans.labels);
    write_labels_csv(path_in(config, "labels_kmedoids.csv"), space.row_ids, out.kmedoids.labels);
    nlohmann::ordered_json j;
    j["kmeans"] = out.kmeans.to_json();
    j["kmedoids"] = out.kmedoids.to_json();
    write_json(path_in(config, "cluster_models.json"), j);
    return out;
}

ElbowCurve elbow(const PipelineConfig& config, const std::string& space_path, Algorithm algorithm) {
    const auto space = read_feature_csv(space_path);
    const auto curve = elbow_sweep(space.values, config.k_list, algorithm, cluster_seed(config, algorithm),
                                   config.cluster_options(), config.kneedle_sensitivity);
    write_text(path_in(config, algorithm == Algorithm::kmeans ? "elbow.csv" : "elbow_kmedoids.csv"), curve.to_csv());
    return curve;
}

ValidationReport validate(const PipelineConfig& config, const std::string& space_path,
                          const std::optional<std::string>& truth_path) {
    const auto space = read_feature_csv(space_path);
    const auto models = read_json(path_in(config, "cluster_models.json"));

    std::optional<std::vector<std::size_t>> truth;
    if (truth_path) {
        const auto by_id = load_truth(*truth_path);
        std::vector<std::size_t> t;
        for (const auto& id : space.row_ids) {
            const auto it = by_id.find(id);
            if (it == by_id.end()) {
                throw InvalidArgument(*truth_path + " has no label for '" + id + "'");
            }
            t.push_back(it->second);
        }
        truth = std::move(t);
    }

    ValidationReport report;
    std::vector<std::vector<std::size_t>> all_labels;
    std::vector<ModelScore> scores;
    for (const std::string tag : {"kmeans", "kmedoids"}) {
        const auto file = path_in(config, "labels_" + tag + ".csv");
        const auto [ids, raw_labels] = read_labels_csv(file);
        const auto labels = labels_for(space.row_ids, ids, raw_labels, file);
        const auto& jm = models.at(tag);
        ModelValidation mv;
        mv.tag = tag;
        mv.algorithm = jm.at("algorithm").get<std::string>();
        mv.k = jm.at("k").get<std::size_t>();
        mv.inertia = jm.at("inertia").get<double>();
        mv.dbi = davies_bouldin(space.values, labels, centers_from_json(jm));
        mv.chi = calinski_harabasz(space.values, labels, mv.k);
        if (truth) {
            mv.ari_vs_truth = adjusted_rand_index(labels, *truth);
        }
        scores.push_back({tag, mv.dbi, mv.chi});
        report.per_model.push_back(std::move(mv));
        all_labels.push_back(labels);
    }
    report.crosstab = crosstab(all_labels[0], all_labels[1]);
    report.selection = select_model(scores);
    report.ari_vs_truth = report.per_model[report.selection.index].ari_vs_truth;

    write_json(path_in(config, "validation.json"), report.to_json());
    write_text(path_in(config, "crosstab.csv"), report.crosstab.to_csv("kmeans", "kmedoids"));
    write_labels_csv(path_in(config, "labels.csv"), space.row_ids, all_labels[report.selection.index]);
    return report;
}

void profile(const PipelineConfig& config, const std::string& clean_path, const std::string& labels_path,
             const std::optional<std::string>& plan_path) {
    const auto records = load_properties(clean_path, config.window).records;
    std::vector<std::string> ids;
    for (const auto& r : records) {
        ids.push_back(r.property_id);
    }
    const auto [label_ids, raw_labels] = read_labels_csv(labels_path);
    const auto labels = labels_for(ids, label_ids, raw_labels, labels_path);

    std::optional<PreprocessPlan> plan;
    if (plan_path) {
        plan = load_plan(*plan_path);
    }
    const auto result = profile_clusters(records, labels, plan ? &*plan : nullptr);
    write_json(path_in(config, "profiles.json"), result.to_json());
    write_text(path_in(config, "urban_rural.csv"), urban_rural_csv(urban_rural_distribution(records, labels)));
    const auto series = descriptive_series(records, config.window);
    write_text(path_in(config, "series_revenue.csv"), series_csv(series.revenue, config.window));
    write_text(path_in(config, "series_occupancy.csv"), series_csv(series.occupancy, config.window));
    write_text(path_in(config, "cluster_points.csv"), export_cluster_points(records, labels).csv);
}

}  // namespace stages

RunResult run_pipeline(const PipelineConfig& config) {
    RunResult result;
    auto& manifest = result.manifest;
    manifest["tool"] = "vrclass";
    manifest["version"] = VRCLASS_VERSION;
    manifest["config"] = config.to_json();
    manifest["seeds"] = {{"seed", config.seed},
                         {"kmeans", cluster_seed(config, Algorithm::kmeans)},
                         {"kmedoids", cluster_seed(config, Algorithm::kmedoids_clara)},
                         {"synthetic", config.synthetic ? nlohmann::ordered_json(config.synthetic->seed)
                                                        : nlohmann::ordered_json()}};
    auto& timings = manifest["timings_seconds"] = nlohmann::ordered_json::object();

    std::string current = "config";
    auto timed = [&](const std::string& name, auto&& fn) {
        current = name;
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    try {
        config.check();
        fs::create_directories(config.out_dir);

        std::string properties = config.properties_path.value_or("");
        std::optional<std::string> lsoa = config.lsoa_path;
        std::optional<std::string> truth;
        if (config.synthetic) {
            timed("generate", [&] {
                const auto g = stages::generate(config);
                properties = g.properties_path;
                lsoa = g.lsoa_path;
                truth = g.truth_path;
            });
        }
        timed("ingest", [&] { stages::ingest(config, properties, lsoa, &result.ingest); });
        const auto clean = path_in(config, "properties.clean.csv");
        timed("preprocess", [&] { stages::preprocess(config, clean); });
        PcaModel model;
        timed("pca", [&] {
            model = stages::pca(config, path_in(config, "features.csv"), path_in(config, "plan.json"));
        });
        const auto space = path_in(config, "cluster_space.csv");
        timed("elbow", [&] { result.elbow = stages::elbow(config, space, Algorithm::kmeans); });
        stages::ClusterOutput clusters;
        timed("cluster", [&] { clusters = stages::cluster(config, space); });
        timed("validate", [&] { result.validation = stages::validate(config, space, truth); });
        timed("profile", [&] {
            stages::profile(config, clean, path_in(config, "labels.csv"), path_in(config, "plan.json"));
        });

        manifest["row_counts"] = result.ingest.to_json();
        manifest["row_counts"]["clustered"] = clusters.kmeans.labels.size();
        manifest["pca"] = {{"n_selected", model.n_selected}, {"warnings", model.warnings}};
        manifest["elbow"] = {{"selected_k", result.elbow.selected_k},
                             {"knee_found", result.elbow.knee_found},
                             {"flag", result.elbow.flag}};
        manifest["clusters"] = {{"kmeans_k", clusters.kmeans.k}, {"kmedoids_k", clusters.kmedoids.k}};
        manifest["selected_model"] = result.validation.selection.tag;
        manifest["status"] = "ok";
        result.ok = true;
    } catch (const std::exception& e) {
        result.ok = false;
        result.failed_stage = current;
        result.error = e.what();
        manifest["row_counts"] = result.ingest.to_json();
        manifest["status"] = "failed";
        manifest["failed_stage"] = current;
        manifest["error"] = result.error;
    }
    try {
        write_json(path_in(config, "run_manifest.json"), manifest);
    } catch (const std::exception& e) {
        if (result.ok) {
            result.ok = false;
            result.failed_stage = "manifest";
            result.error = e.what();
        }
    }
    return result;
}

}  // namespace vrclass

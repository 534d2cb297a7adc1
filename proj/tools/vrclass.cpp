// vrclass: command-line front end for the property classification pipeline.
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage or configuration error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "vrclass/error.hpp"
#include "vrclass/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct GlobalFlags {
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
};

// Flags shared by generate and run for building a synthetic spec.
struct SyntheticFlags {
    std::optional<std::size_t> n;
    std::optional<std::size_t> k;
    std::optional<double> sep;
    std::optional<double> urban_fraction;
    std::optional<double> rural_uplift;
    std::optional<std::uint64_t> synthetic_seed;

    bool any() const { return n || k || sep || urban_fraction || rural_uplift || synthetic_seed; }

    void apply(vrclass::PipelineConfig& config) const {
        if (!any()) {
            return;
        }
        auto& spec = config.synthetic ? *config.synthetic : config.synthetic.emplace();
        if (n) spec.n_points = *n;
        if (k) spec.n_clusters = *k;
        if (sep) spec.separation = *sep;
        if (urban_fraction) spec.urban_fraction = *urban_fraction;
        if (rural_uplift) spec.rural_occupancy_uplift = *rural_uplift;
        if (synthetic_seed) spec.seed = *synthetic_seed;
    }
};

void add_synthetic_flags(CLI::App* cmd, SyntheticFlags& f, bool k_required) {
    cmd->add_option("--n", f.n, "number of listings");
    auto* k = cmd->add_option("--k", f.k, "number of planted clusters");
    if (k_required) {
        k->required();
    }
    cmd->add_option("--sep", f.sep, "center separation in within-cluster standard deviations");
    cmd->add_option("--urban-fraction", f.urban_fraction, "share of urban listings");
    cmd->add_option("--rural-uplift", f.rural_uplift, "occupancy added to rural listings");
}

vrclass::PipelineConfig base_config(const GlobalFlags& g) {
    vrclass::PipelineConfig config;
    if (g.config_path) {
        config = vrclass::load_config(*g.config_path);
    }
    if (g.seed) {
        config.seed = *g.seed;
    }
    if (g.out_dir) {
        config.out_dir = *g.out_dir;
    }
    return config;
}

std::string out_file(const vrclass::PipelineConfig& config, const std::string& name) {
    return (std::filesystem::path(config.out_dir) / name).string();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vrclass: clustering pipeline for vacation-rental listings"};
    app.set_version_flag("--version", std::string(VRCLASS_VERSION));
    app.require_subcommand(1, 1);

    GlobalFlags global;
    app.add_option("--config", global.config_path, "key=value config file")->check(CLI::ExistingFile);
    app.add_option("--seed", global.seed, "master seed");
    app.add_option("--out", global.out_dir, "output directory");

    // generate
    auto* gen = app.add_subcommand("generate", "write a synthetic listing set with planted clusters");
    SyntheticFlags gen_flags;
    std::string gen_name = "synthetic";
    add_synthetic_flags(gen, gen_flags, true);
    gen->add_option("--name", gen_name, "file stem for the generated files")->capture_default_str();

    // ingest
    auto* ing = app.add_subcommand("ingest", "load, validate, window-filter and LSOA-join listings");
    std::optional<std::string> ing_props;
    std::optional<std::string> ing_lsoa;
    ing->add_option("--properties", ing_props, "property CSV");
    ing->add_option("--lsoa", ing_lsoa, "LSOA lookup CSV");

    // preprocess
    auto* pre = app.add_subcommand("preprocess", "fit and apply the transform plan");
    std::optional<std::string> pre_input;
    pre->add_option("--input", pre_input, "cleaned property CSV (default <out>/properties.clean.csv)");

    // pca
    auto* pca = app.add_subcommand("pca", "principal components and the clustering space");
    std::optional<std::string> pca_features;
    std::optional<std::string> pca_plan;
    pca->add_option("--features", pca_features, "feature CSV (default <out>/features.csv)");
    pca->add_option("--plan", pca_plan, "plan JSON (default <out>/plan.json)");

    // elbow
    auto* elb = app.add_subcommand("elbow", "cost sweep over k and knee selection");
    std::optional<std::string> elb_space;
    std::optional<std::string> elb_k_list;
    std::string elb_algorithm = "kmeans";
    elb->add_option("--space", elb_space, "clustering space CSV (default <out>/cluster_space.csv)");
    elb->add_option("--k-list", elb_k_list, "k values, e.g. 2..8 or 2,3,5");
    elb->add_option("--algorithm", elb_algorithm, "kmeans or kmedoids")
        ->check(CLI::IsMember({"kmeans", "kmedoids"}))
        ->capture_default_str();

    // cluster
    auto* clu = app.add_subcommand("cluster", "k-means and CLARA k-medoids");
    std::optional<std::string> clu_space;
    std::optional<std::size_t> clu_kmeans_k;
    std::optional<std::size_t> clu_kmedoids_k;
    bool clu_use_elbow = false;
    clu->add_option("--space", clu_space, "clustering space CSV (default <out>/cluster_space.csv)");
    clu->add_option("--kmeans-k", clu_kmeans_k, "k for k-means");
    clu->add_option("--kmedoids-k", clu_kmedoids_k, "k for k-medoids");
    clu->add_flag("--use-elbow-k", clu_use_elbow, "take k from the elbow files in <out>");

    // validate
    auto* val = app.add_subcommand("validate", "validity indices, cross-tabulation and model selection");
    std::optional<std::string> val_space;
    std::optional<std::string> val_truth;
    val->add_option("--space", val_space, "clustering space CSV (default <out>/cluster_space.csv)");
    val->add_option("--truth", val_truth, "planted labels, for ARI");

    // profile
    auto* pro = app.add_subcommand("profile", "cluster profiles, urban/rural split, monthly series, points");
    std::optional<std::string> pro_input;
    std::optional<std::string> pro_labels;
    std::optional<std::string> pro_plan;
    bool pro_no_plan = false;
    pro->add_option("--input", pro_input, "cleaned property CSV (default <out>/properties.clean.csv)");
    pro->add_option("--labels", pro_labels, "labels CSV (default <out>/labels.csv)");
    pro->add_option("--plan", pro_plan, "plan JSON for back-transformed means (default <out>/plan.json)");
    pro->add_flag("--no-plan", pro_no_plan, "skip back-transformed means");

    // run
    auto* run = app.add_subcommand("run", "full pipeline");
    SyntheticFlags run_flags;
    std::optional<std::string> run_props;
    std::optional<std::string> run_lsoa;
    std::optional<std::string> run_k_list;
    bool run_use_elbow = false;
    add_synthetic_flags(run, run_flags, false);
    run->add_option("--synthetic-seed", run_flags.synthetic_seed, "seed for the synthetic generator");
    run->add_option("--properties", run_props, "property CSV");
    run->add_option("--lsoa", run_lsoa, "LSOA lookup CSV");
    run->add_option("--k-list", run_k_list, "elbow k values, e.g. 2..8");
    run->add_flag("--use-elbow-k", run_use_elbow, "cluster with the elbow-selected k");

    for (auto* sub : app.get_subcommands({})) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    vrclass::PipelineConfig config;
    try {
        config = base_config(global);
        if (*gen) {
            gen_flags.apply(config);
            if (global.seed) {
                config.synthetic->seed = *global.seed;
            }
            config.synthetic->check();
        } else if (*run) {
            run_flags.apply(config);
            if (run_props) {
                config.properties_path = *run_props;
            }
            if (run_lsoa) {
                config.lsoa_path = *run_lsoa;
            }
            if (run_k_list) {
                config.k_list = vrclass::parse_k_list(*run_k_list);
            }
            if (run_use_elbow) {
                config.use_elbow_k = true;
            }
            config.check();
        } else if (*elb) {
            if (elb_k_list) {
                config.k_list = vrclass::parse_k_list(*elb_k_list);
            }
        } else if (*clu) {
            if (clu_kmeans_k) {
                config.kmeans_k = *clu_kmeans_k;
            }
            if (clu_kmedoids_k) {
                config.kmedoids_k = *clu_kmedoids_k;
            }
            if (clu_use_elbow) {
                config.use_elbow_k = true;
            }
        }
    } catch (const vrclass::ConfigError& e) {
        std::cerr << "vrclass: " << e.what() << '\n';
        return kExitUsage;
    } catch (const vrclass::InvalidArgument& e) {
        std::cerr << "vrclass: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*gen) {
            const auto files = vrclass::stages::generate(config, gen_name);
            std::cout << "wrote " << files.properties_path << ", " << files.truth_path << ", " << files.lsoa_path
                      << '\n';
        } else if (*ing) {
            const auto props = ing_props ? ing_props : config.properties_path;
            if (!props) {
                std::cerr << "vrclass: ingest needs --properties or a properties config key\n";
                return kExitUsage;
            }
            const auto report = vrclass::stages::ingest(config, *props, ing_lsoa ? ing_lsoa : config.lsoa_path);
            std::cout << report.to_json().dump() << '\n';
        } else if (*pre) {
            vrclass::stages::preprocess(config, pre_input.value_or(out_file(config, "properties.clean.csv")));
            std::cout << "wrote " << out_file(config, "plan.json") << ", " << out_file(config, "features.csv")
                      << '\n';
        } else if (*pca) {
            const auto model = vrclass::stages::pca(config, pca_features.value_or(out_file(config, "features.csv")),
                                                    pca_plan.value_or(out_file(config, "plan.json")));
            std::cout << "components retained: " << model.n_selected << " of " << model.dim() << '\n';
            for (const auto& w : model.warnings) {
                std::cerr << "warning: " << w << '\n';
            }
        } else if (*elb) {
            const auto algorithm = elb_algorithm == "kmeans" ? vrclass::Algorithm::kmeans
                                                             : vrclass::Algorithm::kmedoids_clara;
            const auto curve = vrclass::stages::elbow(
                config, elb_space.value_or(out_file(config, "cluster_space.csv")), algorithm);
            std::cout << "selected_k=" << curve.selected_k << '\n';
            if (!curve.flag.empty()) {
                std::cerr << "warning: " << curve.flag << '\n';
            }
        } else if (*clu) {
            const auto result =
                vrclass::stages::cluster(config, clu_space.value_or(out_file(config, "cluster_space.csv")));
            std::cout << "kmeans k=" << result.kmeans.k << " inertia=" << result.kmeans.inertia << '\n';
            std::cout << "kmedoids k=" << result.kmedoids.k << " cost=" << result.kmedoids.inertia << '\n';
        } else if (*val) {
            const auto report =
                vrclass::stages::validate(config, val_space.value_or(out_file(config, "cluster_space.csv")), val_truth);
            std::cout << "selected " << report.selection.tag << (report.selection.disagreement ? " (DBI disagrees)" : "")
                      << '\n';
        } else if (*pro) {
            std::optional<std::string> plan;
            if (!pro_no_plan) {
                plan = pro_plan.value_or(out_file(config, "plan.json"));
            }
            vrclass::stages::profile(config, pro_input.value_or(out_file(config, "properties.clean.csv")),
                                     pro_labels.value_or(out_file(config, "labels.csv")), plan);
            std::cout << "wrote profiles to " << config.out_dir << '\n';
        } else if (*run) {
            const auto result = vrclass::run_pipeline(config);
            if (!result.ok) {
                std::cerr << "vrclass: stage '" << result.failed_stage << "' failed: " << result.error << '\n';
                return result.failed_stage == "config" ? kExitUsage : kExitRuntime;
            }
            std::cout << "elbow selected k=" << result.elbow.selected_k << "; selected model "
                      << result.validation.selection.tag;
            if (result.validation.ari_vs_truth) {
                std::cout << " (ARI vs truth " << *result.validation.ari_vs_truth << ")";
            }
            std::cout << '\n';
        }
    } catch (const vrclass::ConfigError& e) {
        std::cerr << "vrclass: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "vrclass: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

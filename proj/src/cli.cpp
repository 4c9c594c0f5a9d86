#include "tsfeat/cli.hpp"

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tsfeat/error.hpp"
#include "tsfeat/parallel.hpp"
#include "tsfeat/pipeline.hpp"
#include "tsfeat/service.hpp"
#include "tsfeat/svg.hpp"

namespace tsfeat::cli {

namespace fs = std::filesystem;
using pipeline::json;
using pipeline::Stage;

namespace {

struct Output {
    std::string name;
    std::string content;
};

void write_text(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
}

json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidParameter, path.string() + " is not valid JSON: " + e.what());
    }
}

// Rendered outputs of one stage. Every artifact is a pure function of the
// stage input and its canonical parameters.
std::vector<Output> analysis_outputs(Stage s, const json& artifact) {
    const std::string text = pipeline::dump(artifact);
    switch (s) {
        case Stage::Quality: return {{"quality.json", text}, {"quality.svg", svg::quality_plot(artifact)}};
        case Stage::Matrix: return {{"matrix.json", text}, {"matrix.svg", svg::matrix_heatmap(artifact)}};
        case Stage::Project: return {{"embedding.json", text}, {"embedding.svg", svg::embedding_scatter(artifact)}};
        case Stage::Classify:
            return {{"classification.json", text}, {"classification.svg", svg::accuracy_bars(artifact)}};
        case Stage::TopFeatures:
            return {{"top_features.json", text},
                    {"top_features.csv", pipeline::top_features_csv(artifact)},
                    {"correlation.svg", svg::correlation_heatmap(artifact)},
                    {"violins.svg", svg::violins(artifact)}};
        case Stage::Extract: break;
    }
    return {};
}

ColumnSpec column_spec(const json& columns) {
    ColumnSpec spec;
    spec.id = columns.at("id").get<std::string>();
    spec.time = columns.at("time").get<std::string>();
    spec.value = columns.at("value").get<std::string>();
    if (!columns.at("group").is_null()) spec.group = columns.at("group").get<std::string>();
    return spec;
}

// Runs one stage described by a manifest entry and writes its outputs into
// `out_dir`. Returns the output file names.
std::vector<std::string> execute(const json& entry, const fs::path& out_dir) {
    const Stage stage = pipeline::parse_stage(entry.at("stage").get<std::string>());
    const json params = pipeline::canonical_params(stage, entry.at("params"));
    std::vector<Output> outputs;
    if (stage == Stage::Extract) {
        const Dataset d = ingest_long_csv(fs::path(entry.at("input").get<std::string>()), column_spec(entry.at("columns")));
        const FeatureTable ft = pipeline::run_extract(d, params);
        std::ostringstream csv;
        write_feature_csv(ft, csv);
        outputs.push_back({"features.csv", csv.str()});
        for (auto& o : analysis_outputs(Stage::Quality, pipeline::run_analysis(Stage::Quality, ft, json::object())))
            outputs.push_back(std::move(o));
    } else {
        fs::path input = entry.at("input").get<std::string>();
        if (entry.value("input_from_extract", false)) input = out_dir / "features.csv";
        const FeatureTable ft = read_feature_csv(input);
        outputs = analysis_outputs(stage, pipeline::run_analysis(stage, ft, params));
    }
    std::vector<std::string> names;
    for (const auto& o : outputs) {
        write_text(out_dir / o.name, o.content);
        names.push_back(o.name);
    }
    return names;
}

// Runs `entry`, records timing and outputs, and merges it into the
// manifest of `out_dir` (one entry per stage, latest wins).
void run_and_record(json entry, const fs::path& out_dir, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    entry["outputs"] = execute(entry, out_dir);
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    entry["wall_ms"] = std::round(ms * 1000.0) / 1000.0;

    const fs::path manifest_path = out_dir / "manifest.json";
    json manifest = fs::exists(manifest_path) ? read_json(manifest_path) : json::object();
    manifest["engine_version"] = pipeline::kEngineVersion;
    json stages = json::array();
    for (const auto& s : manifest.value("stages", json::array()))
        if (s.at("stage") != entry.at("stage")) stages.push_back(s);
    stages.push_back(entry);
    manifest["stages"] = stages;
    write_text(manifest_path, manifest.dump(2) + "\n");

    for (const auto& name : entry["outputs"]) out << (out_dir / name.get<std::string>()).string() << "\n";
}

int exit_code_for(const Error& e) {
    switch (e.category()) {
        case ErrorCategory::Schema: return kUsage;
        case ErrorCategory::Degenerate: return kDegenerate;
        case ErrorCategory::Numerical: return kNumerical;
    }
    return kInternal;
}

struct ClassifierOptions {
    std::string classifier = "LinearSVM";
    double cost = 1.0;
    std::size_t max_epochs = 1000;
    std::size_t folds = 10;
    bool k_fold = true;
    bool stratified = true;
    bool balanced = false;
    std::string null_method = "model-free";
    std::size_t permutations = 10000;
    std::string pvalue = "gaussian";

    void add(CLI::App* app) {
        app->add_option("--classifier", classifier, "LinearSVM or BinomialLogistic")->capture_default_str();
        app->add_option("--cost", cost, "Regularization weight C")->capture_default_str();
        app->add_option("--max-epochs", max_epochs, "Solver epoch limit")->capture_default_str();
        app->add_option("--folds", folds, "Number of cross-validation folds")->capture_default_str();
        app->add_flag("--k-fold,!--no-k-fold", k_fold, "Use k-fold cross-validation");
        app->add_flag("--stratified,!--no-stratified", stratified, "Stratify folds by class");
        app->add_flag("--balanced", balanced, "Score with balanced accuracy");
        app->add_option("--null", null_method, "Null distribution: model-free, null-fits or none")->capture_default_str();
        app->add_option("--permutations", permutations, "Number of null permutations")->capture_default_str();
        app->add_option("--pvalue", pvalue, "p-value method: gaussian or empirical")->capture_default_str();
    }

    void fill(json& p) const {
        p["classifier"] = classifier;
        p["cost"] = cost;
        p["max_epochs"] = max_epochs;
        p["num_folds"] = folds;
        p["use_k_fold"] = k_fold;
        p["stratified"] = stratified;
        p["balanced_accuracy"] = balanced;
        p["null_method"] = null_method;
        p["num_permutations"] = permutations;
        p["p_value_method"] = pvalue;
    }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Feature-based time-series analysis engine", "tsfeat"};
    app.set_config("--config", "", "Read options from a TOML file");
    app.require_subcommand(1);
    std::size_t threads = 0;
    app.add_option("--threads", threads, "Worker threads (0 = available parallelism)");
    app.set_version_flag("--version", std::string(pipeline::kEngineVersion));

    std::uint64_t seed = 0;
    std::string out_dir = "tsfeat-out";
    auto common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "Master random seed")->capture_default_str();
        sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    };

    // extract
    auto* extract = app.add_subcommand("extract", "Compute the feature table of a long-format CSV");
    std::string input;
    ColumnSpec columns;
    std::string group;
    bool zscore = false;
    extract->add_option("--input", input, "Long-format CSV")->required();
    extract->add_option("--id", columns.id, "Series id column")->capture_default_str();
    extract->add_option("--time", columns.time, "Time index column")->capture_default_str();
    extract->add_option("--value", columns.value, "Value column")->capture_default_str();
    extract->add_option("--group", group, "Class label column");
    extract->add_flag("--zscore", zscore, "z-score every series before extraction");
    common(extract);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Run an analysis stage on a feature CSV");
    analyze->require_subcommand(1);
    std::string features;
    auto features_option = [&](CLI::App* sub) {
        sub->add_option("--features", features, "Feature CSV written by extract")->required();
        common(sub);
    };

    auto* matrix = analyze->add_subcommand("matrix", "Normalized, hierarchically ordered feature matrix");
    std::string norm_method = "z-score", linkage = "average";
    features_option(matrix);
    matrix->add_option("--method", norm_method, "z-score, MinMax, Sigmoid or RobustSigmoid")->capture_default_str();
    matrix->add_option("--linkage", linkage, "average, complete or single")->capture_default_str();

    auto* project = analyze->add_subcommand("project", "Two-dimensional PCA or t-SNE embedding");
    std::string proj_method = "pca", proj_norm = "z-score";
    double perplexity = 15.0;
    std::size_t iterations = 1000;
    features_option(project);
    project->add_option("--method", proj_method, "pca or tsne")->capture_default_str();
    project->add_option("--normalization", proj_norm, "Normalization applied before projection")->capture_default_str();
    project->add_option("--perplexity", perplexity, "t-SNE perplexity")->capture_default_str();
    project->add_option("--iterations", iterations, "t-SNE iterations")->capture_default_str();

    auto* classify = analyze->add_subcommand("classify", "Cross-validated multi-feature classification");
    ClassifierOptions copts;
    bool by_set = true;
    features_option(classify);
    copts.add(classify);
    classify->add_flag("--by-set,!--no-by-set", by_set, "Also evaluate each feature set separately");

    auto* top = analyze->add_subcommand("top-features", "Rank individual features by discriminative power");
    ClassifierOptions topts;
    std::string test = "classifier", correlation = "spearman";
    std::size_t num_features = 40;
    features_option(top);
    topts.add(top);
    top->add_option("--test", test, "classifier, t-test, wilcox or BinomialLogistic")->capture_default_str();
    top->add_option("--num-features", num_features, "Number of top features to report")->capture_default_str();
    top->add_option("--correlation", correlation, "spearman or pearson")->capture_default_str();

    // serve
    auto* serve = app.add_subcommand("serve", "Start the HTTP service");
    service::ServiceConfig scfg;
    std::string data_dir, static_dir;
    std::size_t max_upload_mb = 256;
    serve->add_option("--host", scfg.host, "Bind address")->capture_default_str();
    serve->add_option("--port", scfg.port, "Port")->capture_default_str();
    serve->add_option("--data-dir", data_dir, "Directory for persisted datasets and results");
    serve->add_option("--static-dir", static_dir, "Directory of explorer assets served at /");
    serve->add_option("--max-upload-mb", max_upload_mb, "Upload size cap in MiB")->capture_default_str();
    serve->add_option("--workers", scfg.workers, "Concurrent jobs")->capture_default_str();

    // replay
    auto* replay = app.add_subcommand("replay", "Rerun every stage recorded in a manifest");
    std::string manifest_path;
    replay->add_option("manifest", manifest_path, "manifest.json")->required();
    replay->add_option("--out", out_dir, "Output directory (default: the manifest's directory)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        set_thread_count(threads);
        if (extract->parsed()) {
            json entry = {{"stage", "extract"},
                          {"input", fs::absolute(input).string()},
                          {"columns",
                           {{"id", columns.id},
                            {"time", columns.time},
                            {"value", columns.value},
                            {"group", group.empty() ? json(nullptr) : json(group)}}},
                          {"params", pipeline::canonical_params(Stage::Extract, {{"zscore", zscore}})},
                          {"seed", seed}};
            run_and_record(entry, out_dir, out);
        } else if (analyze->parsed()) {
            Stage stage;
            json params = json::object();
            if (matrix->parsed()) {
                stage = Stage::Matrix;
                params = {{"method", norm_method}, {"linkage", linkage}};
            } else if (project->parsed()) {
                stage = Stage::Project;
                params = {{"method", proj_method}, {"normalization", proj_norm}, {"perplexity", perplexity},
                          {"iterations", iterations}, {"seed", seed}};
            } else if (classify->parsed()) {
                stage = Stage::Classify;
                copts.fill(params);
                params["by_set"] = by_set;
                params["seed"] = seed;
            } else {
                stage = Stage::TopFeatures;
                topts.fill(params);
                params["test"] = test;
                params["num_features"] = num_features;
                params["correlation"] = correlation;
                params["seed"] = seed;
            }
            const fs::path in = fs::absolute(features);
            json entry = {{"stage", pipeline::to_string(stage)},
                          {"input", in.string()},
                          {"params", pipeline::canonical_params(stage, params)},
                          {"seed", seed}};
            if (fs::exists(fs::path(out_dir) / "features.csv") &&
                fs::equivalent(in, fs::path(out_dir) / "features.csv"))
                entry["input_from_extract"] = true;
            run_and_record(entry, out_dir, out);
        } else if (serve->parsed()) {
            if (!data_dir.empty()) scfg.data_dir = data_dir;
            if (!static_dir.empty()) scfg.static_dir = static_dir;
            scfg.max_upload_bytes = max_upload_mb * 1024u * 1024u;
            service::Server server(scfg);
            out << "listening on http://" << scfg.host << ":" << scfg.port << std::endl;
            if (!server.listen()) {
                err << "error: cannot bind " << scfg.host << ":" << scfg.port << "\n";
                return kInternal;
            }
        } else if (replay->parsed()) {
            const fs::path mpath = manifest_path;
            const json manifest = read_json(mpath);
            const fs::path target = replay->count("--out") ? fs::path(out_dir) : mpath.parent_path();
            fs::create_directories(target);
            for (const auto& entry : manifest.at("stages")) run_and_record(entry, target, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.name() << ": " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << "\n";
        return kInternal;
    }
    return kOk;
}

}  // namespace tsfeat::cli

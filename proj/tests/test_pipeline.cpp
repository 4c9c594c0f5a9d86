#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "expect.hpp"
#include "synth.hpp"
#include "tsfeat/cli.hpp"
#include "tsfeat/parallel.hpp"
#include "tsfeat/pipeline.hpp"
#include "tsfeat/svg.hpp"

using namespace tsfeat;
using pipeline::json;
using pipeline::Stage;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run tsfeat_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "tsfeat");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("tsfeat_test_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

}  // namespace

TEST_CASE("canonical params fill defaults and respell enums") {
    const json m = pipeline::canonical_params(Stage::Matrix, json::object());
    CHECK(m == json{{"method", "z-score"}, {"linkage", "average"}});
    const json p = pipeline::canonical_params(Stage::Project, {{"method", "tsne"}, {"perplexity", 15}, {"seed", 7}});
    CHECK(p["method"] == "tsne");
    CHECK(p["perplexity"].is_number_float());
    CHECK(p["seed"] == 7);
    CHECK(p["iterations"] == 1000);
    const json c = pipeline::canonical_params(Stage::Classify, {{"classifier", "svmLinear"}, {"null_method", "model-free"}});
    CHECK(c["classifier"] == "LinearSVM");
    CHECK(c["null_method"] == "ModelFreeShuffles");
    CHECK(c["by_set"] == true);
    CHECK(c["num_permutations"] == 10000);
    const json t = pipeline::canonical_params(Stage::TopFeatures, {{"classifier", "BinomialLogistic"}});
    CHECK(t["test"] == "BinomialLogistic");
    CHECK(pipeline::canonical_params(Stage::Classify, c) == c);
}

TEST_CASE("canonical params reject bad input") {
    CHECK_RAISES(pipeline::canonical_params(Stage::Matrix, {{"bogus", 1}}), InvalidParameter);
    CHECK_RAISES(pipeline::canonical_params(Stage::Matrix, {{"method", 3}}), InvalidParameter);
    CHECK_RAISES(pipeline::canonical_params(Stage::Matrix, {{"method", "L2"}}), InvalidParameter);
    CHECK_RAISES(pipeline::canonical_params(Stage::Project, {{"iterations", -5}}), InvalidParameter);
    CHECK_RAISES(pipeline::canonical_params(Stage::Classify, {{"num_folds", 1}}), InvalidParameter);
    CHECK_RAISES(pipeline::canonical_params(Stage::Classify, {{"by_set", "yes"}}), InvalidParameter);
    CHECK_RAISES(pipeline::parse_stage("sideways"), InvalidParameter);
}

TEST_CASE("dump is compact, sorted and maps non-finite numbers to null") {
    json j = {{"b", 1}, {"a", std::nan("")}, {"c", {1.5, INFINITY}}};
    CHECK(pipeline::dump(j) == "{\"a\":null,\"b\":1,\"c\":[1.5,null]}\n");
}

TEST_CASE("every analysis stage is byte-identical across worker counts") {
    const FeatureTable ft = extract_features(synth::three_class(8, 12, 80), native_catalog());
    const std::pair<Stage, json> stages[] = {
        {Stage::Quality, json::object()},
        {Stage::Matrix, json::object()},
        {Stage::Project, {{"method", "tsne"}, {"perplexity", 5}, {"iterations", 300}, {"seed", 3}}},
        {Stage::Project, json::object()},
        {Stage::Classify, {{"num_permutations", 200}, {"num_folds", 5}, {"seed", 5}}},
        {Stage::Classify, {{"null_method", "NullModelFits"}, {"num_permutations", 20}, {"num_folds", 5}, {"seed", 5}}},
        {Stage::TopFeatures, {{"num_permutations", 100}, {"num_folds", 5}, {"num_features", 10}, {"seed", 5}}},
    };
    for (const auto& [stage, params] : stages) {
        const json canon = pipeline::canonical_params(stage, params);
        set_thread_count(1);
        const std::string one = pipeline::dump(pipeline::run_analysis(stage, ft, canon));
        set_thread_count(8);
        const std::string eight = pipeline::dump(pipeline::run_analysis(stage, ft, canon));
        const std::string again = pipeline::dump(pipeline::run_analysis(stage, ft, canon));
        set_thread_count(0);
        INFO(pipeline::to_string(stage), " ", params.dump());
        CHECK(one == eight);
        CHECK(eight == again);
    }
}

TEST_CASE("artifact schemas") {
    const FeatureTable ft = extract_features(synth::three_class(2, 6, 60), native_catalog());
    const json m = pipeline::run_analysis(Stage::Matrix, ft, pipeline::canonical_params(Stage::Matrix, {}));
    for (const char* key : {"row_ids", "col_names", "values", "row_order", "col_order", "merges_rows", "merges_cols"})
        CHECK(m.contains(key));
    CHECK(m["row_order"].size() == 18);
    const json e = pipeline::run_analysis(Stage::Project, ft, pipeline::canonical_params(Stage::Project, {}));
    CHECK(e["coords"].size() == 18);
    CHECK(e["ellipses"].size() == 3);
    const json c = pipeline::run_analysis(
        Stage::Classify, ft, pipeline::canonical_params(Stage::Classify, {{"num_permutations", 50}, {"num_folds", 3}}));
    CHECK(c["rows"].size() == 3);
    CHECK(c["rows"][2]["name"] == "All features");
    CHECK(c["rows"][0]["p_value"].is_number());
    const json t = pipeline::run_analysis(
        Stage::TopFeatures, ft,
        pipeline::canonical_params(Stage::TopFeatures, {{"num_permutations", 50}, {"num_folds", 3}, {"num_features", 5}}));
    CHECK(t["rows"].size() == 5);
    CHECK(t["correlation"]["values"].size() == 5);
    const std::string csv = pipeline::top_features_csv(t);
    CHECK(csv.rfind("feature,set,statistic,p_value,adjusted_p\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);

    for (const std::string& s : {svg::matrix_heatmap(m), svg::embedding_scatter(e), svg::accuracy_bars(c),
                                 svg::correlation_heatmap(t), svg::violins(t)}) {
        CHECK(s.rfind("<svg", 0) == 0);
        CHECK(s.find("</svg>") != std::string::npos);
    }
}

TEST_CASE("heatmap draws rows in row_order") {
    json m = {{"kind", "matrix"},
              {"row_ids", {"a", "b", "c"}},
              {"row_groups", json::array()},
              {"col_names", {"f"}},
              {"col_sets", {"s"}},
              {"values", {{0.0}, {0.5}, {1.0}}},
              {"row_order", {2, 0, 1}},
              {"col_order", {0}},
              {"merges_rows", json::array()},
              {"merges_cols", json::array()},
              {"method", "z-score"},
              {"linkage", "average"}};
    const std::string s = svg::matrix_heatmap(m);
    const auto pc = s.find(">c<"), pa = s.find(">a<"), pb = s.find(">b<");
    REQUIRE(pc != std::string::npos);
    CHECK(pc < pa);
    CHECK(pa < pb);
}

TEST_CASE("cli: help, version and usage errors") {
    CHECK(tsfeat_cli({"--help"}).code == 0);
    CHECK(tsfeat_cli({"--help"}).out.find("extract") != std::string::npos);
    CHECK(tsfeat_cli({"--version"}).code == 0);
    CHECK(tsfeat_cli({"extract"}).code == 2);
    CHECK(tsfeat_cli({"frobnicate"}).code == 2);
    CHECK(tsfeat_cli({"analyze", "matrix", "--features", "/nonexistent/x.csv"}).code == 2);
}

TEST_CASE("cli: extract and analyze end to end, replay reproduces bytes") {
    TempDir dir("cli");
    const fs::path csv = dir.path / "data.csv";
    write(csv, synth::long_csv(synth::three_class(6, 10, 64)));
    const fs::path out = dir.path / "out";
    const std::string o = out.string();

    Run r = tsfeat_cli({"extract", "--input", csv.string(), "--group", "group", "--out", o});
    REQUIRE(r.code == 0);
    CHECK(slurp(out / "features.csv").rfind("id,names,values,method,group\n", 0) == 0);
    CHECK(fs::exists(out / "quality.json"));
    CHECK(fs::exists(out / "quality.svg"));
    const std::string feats = (out / "features.csv").string();

    CHECK(tsfeat_cli({"analyze", "matrix", "--features", feats, "--method", "z-score", "--out", o}).code == 0);
    CHECK(tsfeat_cli({"analyze", "project", "--features", feats, "--method", "tsne", "--perplexity", "5", "--seed", "7",
               "--iterations", "250", "--out", o})
              .code == 0);
    const std::string emb = slurp(out / "embedding.json");
    CHECK(tsfeat_cli({"analyze", "project", "--features", feats, "--method", "tsne", "--perplexity", "5", "--seed", "7",
               "--iterations", "250", "--out", o})
              .code == 0);
    CHECK(slurp(out / "embedding.json") == emb);
    CHECK(tsfeat_cli({"analyze", "classify", "--features", feats, "--by-set", "--null", "model-free", "--permutations", "500",
               "--pvalue", "gaussian", "--folds", "5", "--out", o})
              .code == 0);
    const json cls = json::parse(slurp(out / "classification.json"));
    for (const auto& row : cls["rows"]) CHECK(row["p_value"].is_number());
    CHECK(tsfeat_cli({"--threads", "2", "analyze", "top-features", "--features", feats, "--test", "wilcox", "--num-features",
               "8", "--out", o})
              .code == 2);  // three classes with a two-sample test
    CHECK(tsfeat_cli({"analyze", "top-features", "--features", feats, "--permutations", "100", "--folds", "5",
               "--num-features", "8", "--out", o})
              .code == 0);
    for (const char* f : {"matrix.json", "matrix.svg", "embedding.svg", "classification.svg", "top_features.json",
                          "top_features.csv", "correlation.svg", "violins.svg", "manifest.json"})
        CHECK(fs::exists(out / f));

    const json manifest = json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["stages"].size() == 5);

    const fs::path again = dir.path / "again";
    REQUIRE(tsfeat_cli({"replay", (out / "manifest.json").string(), "--out", again.string()}).code == 0);
    for (const auto& entry : fs::directory_iterator(out)) {
        const auto name = entry.path().filename();
        if (name == "manifest.json") continue;
        INFO(name.string());
        CHECK(slurp(entry.path()) == slurp(again / name));
    }
}

TEST_CASE("cli: exit codes follow the error category") {
    TempDir dir("codes");
    write(dir.path / "nov.csv", "id,timepoint\na,0\na,1\n");
    Run r = tsfeat_cli({"extract", "--input", (dir.path / "nov.csv").string(), "--out", dir.path.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("MissingColumn") != std::string::npos);

    write(dir.path / "flat.csv", "id,timepoint,values\nflatone,0,5\nflatone,1,5\nok,0,1\nok,1,2\n");
    r = tsfeat_cli({"extract", "--input", (dir.path / "flat.csv").string(), "--zscore", "--out", dir.path.string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("ConstantSeries") != std::string::npos);
    CHECK(r.err.find("flatone") != std::string::npos);

    write(dir.path / "unl.csv", "id,timepoint,values\na,0,1\na,1,2\na,2,4\nb,0,3\nb,1,1\nb,2,2\n");
    REQUIRE(tsfeat_cli({"extract", "--input", (dir.path / "unl.csv").string(), "--out", dir.path.string()}).code == 0);
    r = tsfeat_cli({"analyze", "classify", "--features", (dir.path / "features.csv").string(), "--out", dir.path.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("UnlabeledSeries") != std::string::npos);
}

TEST_CASE("cli: config file supplies option values") {
    TempDir dir("config");
    write(dir.path / "data.csv", synth::long_csv(synth::three_class(1, 5, 40)));
    write(dir.path / "cfg.toml", "[extract]\ngroup = \"group\"\nzscore = true\n");
    REQUIRE(tsfeat_cli({"--config", (dir.path / "cfg.toml").string(), "extract", "--input", (dir.path / "data.csv").string(),
                 "--out", dir.path.string()})
                .code == 0);
    const json manifest = json::parse(slurp(dir.path / "manifest.json"));
    CHECK(manifest["stages"][0]["params"]["zscore"] == true);
    CHECK(manifest["stages"][0]["columns"]["group"] == "group");
}

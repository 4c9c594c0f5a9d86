#include "tsfeat/pipeline.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include "tsfeat/csv.hpp"
#include "tsfeat/error.hpp"
#include "tsfeat/rng.hpp"
#include "tsfeat/stats.hpp"

namespace tsfeat::pipeline {

std::string_view to_string(Stage s) noexcept {
    switch (s) {
        case Stage::Extract: return "extract";
        case Stage::Quality: return "quality";
        case Stage::Matrix: return "matrix";
        case Stage::Project: return "project";
        case Stage::Classify: return "classify";
        case Stage::TopFeatures: return "top-features";
    }
    return "unknown";
}

Stage parse_stage(std::string_view name) {
    for (Stage s : {Stage::Extract, Stage::Quality, Stage::Matrix, Stage::Project, Stage::Classify, Stage::TopFeatures})
        if (to_string(s) == name) return s;
    throw Error(ErrorKind::InvalidParameter, "unknown stage '" + std::string(name) + "'");
}

namespace {

enum class Kind { Bool, Real, Count, Seed, Enum };

struct ParamDef {
    std::string name;
    Kind kind;
    json fallback;
    double min = 0.0;  // Real: exclusive lower bound; Count: inclusive
    std::function<std::string(std::string_view)> canon = {};
};

template <typename Parse>
std::function<std::string(std::string_view)> enum_canon(Parse parse) {
    return [parse](std::string_view s) { return std::string(to_string(parse(s))); };
}

std::string null_canon(std::string_view s) {
    if (s == "none") return "none";
    return std::string(learn::to_string(learn::parse_null_method(s)));
}

std::vector<ParamDef> classifier_defs() {
    return {
        {"classifier", Kind::Enum, "LinearSVM", 0, enum_canon(learn::parse_classifier)},
        {"cost", Kind::Real, 1.0, 0.0},
        {"max_epochs", Kind::Count, 1000, 1},
        {"use_k_fold", Kind::Bool, true},
        {"num_folds", Kind::Count, 10, 2},
        {"stratified", Kind::Bool, true},
        {"balanced_accuracy", Kind::Bool, false},
        {"null_method", Kind::Enum, "ModelFreeShuffles", 0, null_canon},
        {"num_permutations", Kind::Count, 10000, 1},
        {"p_value_method", Kind::Enum, "gaussian", 0, enum_canon(learn::parse_p_value_method)},
        {"seed", Kind::Seed, 0},
    };
}

std::vector<ParamDef> defs_for(Stage s) {
    switch (s) {
        case Stage::Extract: return {{"zscore", Kind::Bool, false}};
        case Stage::Quality: return {};
        case Stage::Matrix:
            return {{"method", Kind::Enum, "z-score", 0, enum_canon(parse_normalization)},
                    {"linkage", Kind::Enum, "average", 0, enum_canon(parse_linkage)}};
        case Stage::Project:
            return {{"method", Kind::Enum, "pca", 0, enum_canon(parse_projection)},
                    {"normalization", Kind::Enum, "z-score", 0, enum_canon(parse_normalization)},
                    {"perplexity", Kind::Real, 15.0, 0.0},
                    {"iterations", Kind::Count, 1000, 1},
                    {"seed", Kind::Seed, 0}};
        case Stage::Classify: {
            auto d = classifier_defs();
            d.push_back({"by_set", Kind::Bool, true});
            return d;
        }
        case Stage::TopFeatures: {
            auto d = classifier_defs();
            d.push_back({"test", Kind::Enum, "classifier", 0, enum_canon(learn::parse_top_test)});
            d.push_back({"num_features", Kind::Count, 40, 1});
            d.push_back({"correlation", Kind::Enum, "spearman", 0, enum_canon(parse_correlation)});
            return d;
        }
    }
    return {};
}

[[noreturn]] void bad_param(const std::string& name, const std::string& why) {
    throw Error(ErrorKind::InvalidParameter, "parameter '" + name + "' " + why);
}

json canonical_value(const ParamDef& def, const json& v) {
    switch (def.kind) {
        case Kind::Bool:
            if (!v.is_boolean()) bad_param(def.name, "must be a boolean");
            return v;
        case Kind::Real: {
            if (!v.is_number()) bad_param(def.name, "must be a number");
            const double x = v.get<double>();
            if (!std::isfinite(x) || !(x > def.min)) bad_param(def.name, "must be a positive finite number");
            return x;
        }
        case Kind::Count: {
            std::uint64_t x = 0;
            if (v.is_number_unsigned()) x = v.get<std::uint64_t>();
            else if (v.is_number_integer() && v.get<std::int64_t>() >= 0) x = static_cast<std::uint64_t>(v.get<std::int64_t>());
            else if (v.is_number_float() && v.get<double>() >= 0 && v.get<double>() == std::floor(v.get<double>()) &&
                     v.get<double>() < 1e15)
                x = static_cast<std::uint64_t>(v.get<double>());
            else bad_param(def.name, "must be a non-negative integer");
            if (static_cast<double>(x) < def.min) bad_param(def.name, "must be at least " + std::to_string(static_cast<long>(def.min)));
            return x;
        }
        case Kind::Seed:
            if (v.is_number_unsigned()) return v.get<std::uint64_t>();
            if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
            bad_param(def.name, "must be a non-negative 64-bit integer");
        case Kind::Enum:
            if (!v.is_string()) bad_param(def.name, "must be a string");
            return def.canon(v.get<std::string>());
    }
    return v;
}

learn::ClassifierSpec classifier_spec(const json& p) {
    learn::ClassifierSpec spec;
    spec.method = learn::parse_classifier(p.at("classifier").get<std::string>());
    spec.cost = p.at("cost").get<double>();
    spec.max_epochs = p.at("max_epochs").get<std::size_t>();
    spec.seed = stream_seed(p.at("seed").get<std::uint64_t>(), 0);
    return spec;
}

learn::CVConfig cv_config(const json& p) {
    learn::CVConfig cv;
    cv.use_k_fold = p.at("use_k_fold").get<bool>();
    cv.num_folds = p.at("num_folds").get<std::size_t>();
    cv.stratified = p.at("stratified").get<bool>();
    cv.balanced_accuracy = p.at("balanced_accuracy").get<bool>();
    cv.seed = stream_seed(p.at("seed").get<std::uint64_t>(), 1);
    return cv;
}

std::optional<learn::NullConfig> null_config(const json& p) {
    const auto method = p.at("null_method").get<std::string>();
    if (method == "none") return std::nullopt;
    learn::NullConfig n;
    n.method = learn::parse_null_method(method);
    n.num_permutations = p.at("num_permutations").get<std::size_t>();
    n.p_value_method = learn::parse_p_value_method(p.at("p_value_method").get<std::string>());
    n.seed = stream_seed(p.at("seed").get<std::uint64_t>(), 2);
    return n;
}

json key_json(const FeatureKey& k) { return {{"name", k.name}, {"set", k.set}}; }

json keys_json(const std::vector<FeatureKey>& keys) {
    json out = json::array();
    for (const auto& k : keys) out.push_back(key_json(k));
    return out;
}

json matrix_json(const Matrix& m) {
    json out = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto r = m.row(i);
        out.push_back(std::vector<double>(r.begin(), r.end()));
    }
    return out;
}

json merges_json(const Dendrogram& d) {
    json out = json::array();
    for (const auto& m : d.merges) out.push_back({m.left, m.right, m.height, m.size});
    return out;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json canonical_params(Stage s, const json& params) {
    const json& in = params.is_null() ? json::object() : params;
    if (!in.is_object()) throw Error(ErrorKind::InvalidParameter, "parameters must be a JSON object");
    const auto defs = defs_for(s);
    for (const auto& [key, _] : in.items()) {
        const bool known = std::any_of(defs.begin(), defs.end(), [&](const ParamDef& d) { return d.name == key; });
        if (!known) bad_param(key, "is not accepted by stage " + std::string(to_string(s)));
    }
    json out = json::object();
    for (const auto& def : defs) out[def.name] = canonical_value(def, in.contains(def.name) ? in.at(def.name) : def.fallback);
    if (s == Stage::Classify || s == Stage::TopFeatures) {
        if (out["classifier"] == "BinomialLogistic" && s == Stage::TopFeatures && out["test"] == "classifier")
            out["test"] = "BinomialLogistic";
    }
    return out;
}

std::string dump(const json& j) {
    // NaN and infinities are emitted as null by the serializer.
    return j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
}

FeatureTable run_extract(const Dataset& d, const json& p) {
    const Dataset input = p.at("zscore").get<bool>() ? zscore_series(d) : d;
    return extract_features(input, native_catalog());
}

json run_analysis(Stage s, const FeatureTable& ft, const json& p) {
    switch (s) {
        case Stage::Extract: throw Error(ErrorKind::InvalidParameter, "extract is not an analysis stage");
        case Stage::Quality: return to_json(quality_report(ft));
        case Stage::Matrix: {
            json out = to_json(cluster_matrix(ft, parse_normalization(p.at("method").get<std::string>()),
                                              parse_linkage(p.at("linkage").get<std::string>())));
            out["method"] = p.at("method");
            out["linkage"] = p.at("linkage");
            return out;
        }
        case Stage::Project: {
            ProjectionConfig cfg;
            cfg.method = parse_projection(p.at("method").get<std::string>());
            cfg.normalization = parse_normalization(p.at("normalization").get<std::string>());
            cfg.tsne.perplexity = p.at("perplexity").get<double>();
            cfg.tsne.iterations = p.at("iterations").get<std::size_t>();
            cfg.tsne.exaggeration_iterations = std::min(cfg.tsne.exaggeration_iterations, cfg.tsne.iterations);
            cfg.tsne.seed = p.at("seed").get<std::uint64_t>();
            json out = to_json(project_table(ft, cfg));
            out["normalization"] = p.at("normalization");
            if (cfg.method == ProjectionMethod::TSNE) out["perplexity"] = cfg.tsne.perplexity;
            return out;
        }
        case Stage::Classify:
            return to_json(learn::fit_multi_feature_classifier(ft, p.at("by_set").get<bool>(), classifier_spec(p),
                                                               cv_config(p), null_config(p)));
        case Stage::TopFeatures: {
            learn::TopFeatureConfig cfg;
            cfg.num_features = p.at("num_features").get<std::size_t>();
            cfg.test = learn::parse_top_test(p.at("test").get<std::string>());
            cfg.spec = classifier_spec(p);
            cfg.cv = cv_config(p);
            const auto null = null_config(p);
            const bool classifier_test =
                cfg.test == learn::TopTest::OneDClassifier || cfg.test == learn::TopTest::BinomialLogistic;
            if (classifier_test && !null)
                throw Error(ErrorKind::InvalidParameter, "classifier-based top features need a null_method");
            if (null) cfg.null_cfg = *null;
            cfg.correlation = parse_correlation(p.at("correlation").get<std::string>());
            return to_json(learn::compute_top_features(ft, cfg));
        }
    }
    throw Error(ErrorKind::InvalidParameter, "unknown stage");
}

json to_json(const QualityReport& q) {
    json rows = json::array();
    for (const auto& r : q.rows) {
        rows.push_back({{"name", r.feature.name}, {"set", r.feature.set}, {"numeric", r.numeric}, {"nan", r.nan},
                        {"pos_inf", r.pos_inf}, {"neg_inf", r.neg_inf}});
    }
    return {{"kind", "quality"}, {"features", rows}};
}

json to_json(const ClusteredMatrix& m) {
    std::vector<std::string> names, sets;
    for (const auto& f : m.features) {
        names.push_back(f.name);
        sets.push_back(f.set);
    }
    return {{"kind", "matrix"},
            {"row_ids", m.row_ids},
            {"row_groups", m.row_groups},
            {"col_names", names},
            {"col_sets", sets},
            {"values", matrix_json(m.values)},
            {"row_order", m.row_order},
            {"col_order", m.col_order},
            {"merges_rows", merges_json(m.row_dendrogram)},
            {"merges_cols", merges_json(m.col_dendrogram)},
            {"dropped_nonfinite", keys_json(m.dropped_nonfinite)},
            {"dropped_degenerate", keys_json(m.dropped_degenerate)}};
}

json to_json(const ProjectedTable& p) {
    const Embedding& e = p.embedding;
    json out = {{"kind", "embedding"},
                {"method", to_string(e.method)},
                {"ids", p.ids},
                {"groups", p.groups},
                {"coords", matrix_json(e.coords)},
                {"features", keys_json(p.features)},
                {"dropped", keys_json(p.dropped)}};
    if (e.variance_explained) out["variance_explained"] = {e.variance_explained->first, e.variance_explained->second};
    if (e.kl_initial) out["kl_initial"] = *e.kl_initial;
    if (e.kl_final) out["kl_final"] = *e.kl_final;
    if (!p.groups.empty()) {
        json ellipses = json::array();
        for (const auto& g : p.ellipses) {
            ellipses.push_back({{"group", g.group},
                                {"count", g.count},
                                {"mean", {g.mean_x, g.mean_y}},
                                {"cov", {{g.cov_xx, g.cov_xy}, {g.cov_xy, g.cov_yy}}}});
        }
        out["ellipses"] = ellipses;
    }
    return out;
}

json to_json(const learn::ClassificationReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"name", row.name},
                        {"label", row.name + " (" + std::to_string(row.feature_count) + ")"},
                        {"feature_count", row.feature_count},
                        {"mean", row.cv.mean},
                        {"sd", row.cv.sd},
                        {"fold_statistics", row.cv.fold_statistics},
                        {"p_value", optional_number(row.p_value)},
                        {"p_adjusted", optional_number(row.p_adjusted)}});
    }
    json dropped = json::array();
    for (const auto& d : r.dropped)
        dropped.push_back({{"name", d.feature.name}, {"set", d.feature.set}, {"reason", learn::to_string(d.reason)}});
    json null = nullptr;
    if (r.null_cfg) {
        null = {{"method", learn::to_string(r.null_cfg->method)},
                {"num_permutations", r.null_cfg->num_permutations},
                {"p_value_method", learn::to_string(r.null_cfg->p_value_method)}};
        if (r.shared_null) {
            null["mean"] = stats::mean(r.shared_null->values);
            null["sd"] = stats::stddev(r.shared_null->values);
        }
    }
    return {{"kind", "classification"},
            {"classifier", learn::to_string(r.spec.method)},
            {"metric", r.cv.balanced_accuracy ? "balanced_accuracy" : "accuracy"},
            {"num_folds", r.cv.use_k_fold ? r.cv.num_folds : 1},
            {"classes", r.classes},
            {"null", null},
            {"rows", rows},
            {"dropped", dropped}};
}

json to_json(const learn::TopFeatureResult& r) {
    json rows = json::array();
    std::vector<std::string> labels;
    for (const auto& row : r.rows) {
        rows.push_back({{"name", row.feature.name},
                        {"set", row.feature.set},
                        {"statistic", row.statistic},
                        {"p_value", row.p_value},
                        {"adjusted_p", row.adjusted_p}});
        labels.push_back(row.feature.label());
    }
    json violins = json::array();
    for (const auto& v : r.violins) {
        json density = json::object(), bandwidth = json::object();
        for (std::size_t c = 0; c < r.classes.size(); ++c) {
            density[r.classes[c]] = v.density[c];
            bandwidth[r.classes[c]] = v.bandwidth[c];
        }
        json points = json::array();
        for (std::size_t i = 0; i < v.values.size(); ++i)
            points.push_back({{"id", r.ids[i]}, {"group", r.classes[static_cast<std::size_t>(v.classes[i])]}, {"value", v.values[i]}});
        violins.push_back({{"name", v.feature.name},
                           {"set", v.feature.set},
                           {"grid", v.grid},
                           {"bandwidth", bandwidth},
                           {"density", density},
                           {"points", points}});
    }
    json dropped = json::array();
    for (const auto& d : r.dropped)
        dropped.push_back({{"name", d.feature.name}, {"set", d.feature.set}, {"reason", learn::to_string(d.reason)}});
    return {{"kind", "top_features"},
            {"test", learn::to_string(r.test)},
            {"classes", r.classes},
            {"features_tested", r.features_tested},
            {"rows", rows},
            {"dropped", dropped},
            {"untestable", keys_json(r.untestable)},
            {"correlation",
             {{"features", labels},
              {"values", matrix_json(r.correlation)},
              {"order", r.dendrogram.leaf_order},
              {"merges", merges_json(r.dendrogram)}}},
            {"violins", violins}};
}

std::string top_features_csv(const json& artifact) {
    std::ostringstream out;
    csv::write_row(out, {"feature", "set", "statistic", "p_value", "adjusted_p"});
    for (const auto& row : artifact.at("rows")) {
        auto num = [](const json& v) { return v.is_number() ? csv::format_double(v.get<double>()) : std::string("NaN"); };
        csv::write_row(out, {row.at("name").get<std::string>(), row.at("set").get<std::string>(), num(row.at("statistic")),
                             num(row.at("p_value")), num(row.at("adjusted_p"))});
    }
    return out.str();
}

}  // namespace tsfeat::pipeline

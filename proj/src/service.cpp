#include "tsfeat/service.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

// Room for many concurrent polling clients: the library defaults size the
// accept backlog and the handler pool for a handful of connections.
#define CPPHTTPLIB_LISTEN_BACKLOG 128
#define CPPHTTPLIB_THREAD_POOL_COUNT 64
#include <httplib.h>
#include <openssl/evp.h>

#include "tsfeat/error.hpp"
#include "tsfeat/pipeline.hpp"

namespace tsfeat::service {

using pipeline::json;
namespace fs = std::filesystem;

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

namespace {

enum class JobState { Queued, Running, Done, Failed };

std::string_view state_name(JobState s) {
    switch (s) {
        case JobState::Queued: return "queued";
        case JobState::Running: return "running";
        case JobState::Done: return "done";
        case JobState::Failed: return "failed";
    }
    return "unknown";
}

struct DatasetEntry {
    std::string id;
    std::string csv;
    json meta;  // {"columns": {...}, "zscore": bool}
    Dataset data;

    std::once_flag features_once;
    std::shared_ptr<const FeatureTable> features;

    const FeatureTable& feature_table() {
        std::call_once(features_once, [&] {
            const json params = pipeline::canonical_params(pipeline::Stage::Extract, {{"zscore", meta.at("zscore")}});
            features = std::make_shared<const FeatureTable>(pipeline::run_extract(data, params));
        });
        return *features;
    }
};

struct Job {
    std::string id;
    std::string dataset_id;
    pipeline::Stage kind;
    json params;
    JobState state = JobState::Queued;  // guarded by the store mutex
    std::string result;                  // immutable once state is Done
    json error;                          // set when Failed
    bool internal_error = false;
};

struct HttpError {
    int status;
    std::string name;
    std::string message;
};

void write_atomic(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ColumnSpec column_spec(const json& columns) {
    ColumnSpec spec;
    spec.id = columns.at("id").get<std::string>();
    spec.time = columns.at("time").get<std::string>();
    spec.value = columns.at("value").get<std::string>();
    if (!columns.at("group").is_null()) spec.group = columns.at("group").get<std::string>();
    return spec;
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(pipeline::dump(body), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view name, const std::string& message) {
    send_json(res, status, {{"error", name}, {"message", message}});
}

}  // namespace

struct Server::Impl {
    ServiceConfig config;
    httplib::Server http;
    std::thread http_thread;

    std::mutex mu;
    std::condition_variable cv;       // queue changes, pause changes
    std::condition_variable idle_cv;  // queue drained
    std::map<std::string, std::shared_ptr<DatasetEntry>> datasets;
    std::map<std::string, std::shared_ptr<Job>> jobs;
    std::deque<std::shared_ptr<Job>> queue;
    std::size_t running = 0;
    bool paused = false;
    bool stopping = false;
    std::vector<std::jthread> workers;

    explicit Impl(ServiceConfig c) : config(std::move(c)) {
        if (config.data_dir) load_persisted();
        setup_routes();
        const std::size_t n = std::max<std::size_t>(1, config.workers);
        for (std::size_t i = 0; i < n; ++i) workers.emplace_back([this] { worker_loop(); });
    }

    ~Impl() {
        {
            std::lock_guard lock(mu);
            stopping = true;
        }
        cv.notify_all();
        workers.clear();
    }

    // ---- persistence

    fs::path dataset_dir(const std::string& id) const { return *config.data_dir / "datasets" / id; }
    fs::path job_path(const std::string& id) const { return *config.data_dir / "jobs" / (id + ".json"); }

    void load_persisted() {
        const fs::path ddir = *config.data_dir / "datasets";
        if (fs::exists(ddir)) {
            for (const auto& entry : fs::directory_iterator(ddir)) {
                try {
                    auto d = std::make_shared<DatasetEntry>();
                    d->id = entry.path().filename().string();
                    d->csv = read_file(entry.path() / "data.csv");
                    d->meta = json::parse(read_file(entry.path() / "meta.json"));
                    std::istringstream in(d->csv);
                    d->data = ingest_long_csv(in, column_spec(d->meta.at("columns")));
                    datasets[d->id] = d;
                } catch (const std::exception& e) {
                    std::clog << "skipping stored dataset " << entry.path() << ": " << e.what() << "\n";
                }
            }
        }
        const fs::path jdir = *config.data_dir / "jobs";
        if (fs::exists(jdir)) {
            for (const auto& entry : fs::directory_iterator(jdir)) {
                if (entry.path().extension() != ".json") continue;
                try {
                    const json j = json::parse(read_file(entry.path()));
                    auto job = std::make_shared<Job>();
                    job->id = j.at("job_id").get<std::string>();
                    job->dataset_id = j.at("dataset_id").get<std::string>();
                    job->kind = pipeline::parse_stage(j.at("kind").get<std::string>());
                    job->params = j.at("params");
                    if (j.at("state") == "done") {
                        job->state = JobState::Done;
                        job->result = read_file(jdir / (job->id + ".result.json"));
                    } else {
                        job->state = JobState::Failed;
                        job->error = j.at("error");
                        job->internal_error = j.value("internal", false);
                    }
                    if (datasets.count(job->dataset_id)) jobs[job->id] = job;
                } catch (const std::exception& e) {
                    std::clog << "skipping stored job " << entry.path() << ": " << e.what() << "\n";
                }
            }
        }
    }

    void persist_dataset(const DatasetEntry& d) {
        if (!config.data_dir) return;
        write_atomic(dataset_dir(d.id) / "data.csv", d.csv);
        write_atomic(dataset_dir(d.id) / "meta.json", pipeline::dump(d.meta));
    }

    void persist_job(const Job& job) {
        if (!config.data_dir) return;
        json j = {{"job_id", job.id},
                  {"dataset_id", job.dataset_id},
                  {"kind", pipeline::to_string(job.kind)},
                  {"params", job.params},
                  {"state", state_name(job.state)}};
        if (job.state == JobState::Done) {
            write_atomic(*config.data_dir / "jobs" / (job.id + ".result.json"), job.result);
        } else {
            j["error"] = job.error;
            j["internal"] = job.internal_error;
        }
        write_atomic(job_path(job.id), pipeline::dump(j));
    }

    // ---- jobs

    void worker_loop() {
        for (;;) {
            std::shared_ptr<Job> job;
            std::shared_ptr<DatasetEntry> ds;
            {
                std::unique_lock lock(mu);
                cv.wait(lock, [&] { return stopping || (!paused && !queue.empty()); });
                if (stopping) return;
                job = queue.front();
                queue.pop_front();
                job->state = JobState::Running;
                ++running;
                ds = datasets.at(job->dataset_id);
            }
            std::string result;
            json error;
            bool internal = false;
            try {
                result = pipeline::dump(pipeline::run_analysis(job->kind, ds->feature_table(), job->params));
            } catch (const Error& e) {
                error = {{"error", e.name()}, {"message", e.what()}};
            } catch (const std::exception& e) {
                error = {{"error", "InternalError"}, {"message", e.what()}};
                internal = true;
            }
            {
                std::lock_guard lock(mu);
                if (error.is_null()) {
                    job->result = std::move(result);
                    job->state = JobState::Done;
                } else {
                    job->error = std::move(error);
                    job->internal_error = internal;
                    job->state = JobState::Failed;
                }
                --running;
                try {
                    persist_job(*job);
                } catch (const std::exception& e) {
                    std::clog << "cannot persist job " << job->id << ": " << e.what() << "\n";
                }
            }
            idle_cv.notify_all();
        }
    }

    json job_status(const Job& job) const {
        json j = {{"job_id", job.id},
                  {"dataset_id", job.dataset_id},
                  {"kind", pipeline::to_string(job.kind)},
                  {"params", job.params},
                  {"state", state_name(job.state)}};
        if (job.state == JobState::Failed) j["error"] = job.error;
        return j;
    }

    // ---- handlers

    json upload_params(const httplib::Request& req, std::string& csv) {
        auto field = [&](const std::string& name) -> std::optional<std::string> {
            if (req.is_multipart_form_data() && req.has_file(name)) return req.get_file_value(name).content;
            if (req.has_param(name)) return req.get_param_value(name);
            return std::nullopt;
        };
        json body;
        const bool json_body = req.get_header_value("Content-Type").rfind("application/json", 0) == 0;
        if (json_body) {
            try {
                body = json::parse(req.body);
            } catch (const json::exception& e) {
                throw HttpError{400, "BadRequest", std::string("request body is not valid JSON: ") + e.what()};
            }
            if (!body.is_object() || !body.contains("csv") || !body["csv"].is_string())
                throw HttpError{400, "BadRequest", "JSON upload needs a string field 'csv'"};
            csv = body["csv"].get<std::string>();
        } else if (req.is_multipart_form_data()) {
            if (!req.has_file("file")) throw HttpError{400, "BadRequest", "multipart upload needs a 'file' part"};
            csv = req.get_file_value("file").content;
        } else {
            csv = req.body;
        }
        if (csv.empty()) throw HttpError{400, "BadRequest", "uploaded CSV is empty"};

        auto get = [&](const std::string& name, const std::string& fallback) -> json {
            if (json_body) {
                if (!body.contains(name)) return fallback.empty() ? json(nullptr) : json(fallback);
                if (body[name].is_null()) return nullptr;
                if (!body[name].is_string()) throw HttpError{400, "BadRequest", "field '" + name + "' must be a string"};
                return body[name];
            }
            const auto v = field(name);
            if (!v) return fallback.empty() ? json(nullptr) : json(fallback);
            return v->empty() ? json(nullptr) : json(*v);
        };
        bool zscore = false;
        if (json_body) {
            if (body.contains("zscore")) {
                if (!body["zscore"].is_boolean()) throw HttpError{400, "BadRequest", "field 'zscore' must be a boolean"};
                zscore = body["zscore"].get<bool>();
            }
        } else if (const auto z = field("zscore")) {
            if (*z == "true" || *z == "1") zscore = true;
            else if (*z == "false" || *z == "0" || z->empty()) zscore = false;
            else throw HttpError{400, "BadRequest", "field 'zscore' must be true or false"};
        }
        const json columns = {{"id", get("id", "id")},
                              {"time", get("time", "timepoint")},
                              {"value", get("value", "values")},
                              {"group", get("group", "")}};
        for (const char* k : {"id", "time", "value"})
            if (columns[k].is_null()) throw HttpError{400, "BadRequest", std::string("column name '") + k + "' is empty"};
        return {{"columns", columns}, {"zscore", zscore}};
    }

    void post_dataset(const httplib::Request& req, httplib::Response& res) {
        std::string csv;
        const json meta = upload_params(req, csv);
        const std::string id = sha256_hex(pipeline::dump(meta) + csv);
        {
            std::lock_guard lock(mu);
            if (const auto it = datasets.find(id); it != datasets.end()) {
                send_json(res, 200, dataset_info(*it->second));
                return;
            }
        }
        auto d = std::make_shared<DatasetEntry>();
        d->id = id;
        d->csv = std::move(csv);
        d->meta = meta;
        std::istringstream in(d->csv);
        d->data = ingest_long_csv(in, column_spec(meta.at("columns")));
        if (meta.at("zscore").get<bool>()) (void)zscore_series(d->data);  // surface ConstantSeries at upload
        {
            std::lock_guard lock(mu);
            auto [it, inserted] = datasets.emplace(id, d);
            if (inserted) persist_dataset(*d);
            send_json(res, inserted ? 201 : 200, dataset_info(*it->second));
        }
    }

    static json dataset_info(const DatasetEntry& d) {
        return {{"dataset_id", d.id},
                {"series", d.data.size()},
                {"labeled", d.data.labeled()},
                {"classes", d.data.distinct_labels()},
                {"columns", d.meta.at("columns")},
                {"zscore", d.meta.at("zscore")}};
    }

    std::shared_ptr<DatasetEntry> find_dataset(const std::string& id) {
        std::lock_guard lock(mu);
        const auto it = datasets.find(id);
        if (it == datasets.end()) throw HttpError{404, "NotFound", "unknown dataset '" + id + "'"};
        return it->second;
    }

    std::shared_ptr<Job> find_job(const std::string& id) {
        std::lock_guard lock(mu);
        const auto it = jobs.find(id);
        if (it == jobs.end()) throw HttpError{404, "NotFound", "unknown job '" + id + "'"};
        return it->second;
    }

    void post_job(const httplib::Request& req, httplib::Response& res) {
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::exception& e) {
            throw HttpError{400, "BadRequest", std::string("request body is not valid JSON: ") + e.what()};
        }
        if (!body.is_object()) throw HttpError{400, "BadRequest", "request body must be a JSON object"};
        if (!body.contains("dataset_id") || !body["dataset_id"].is_string())
            throw HttpError{400, "BadRequest", "missing string field 'dataset_id'"};
        if (!body.contains("kind") || !body["kind"].is_string())
            throw HttpError{400, "BadRequest", "missing string field 'kind'"};
        const json params = body.value("params", json::object());
        if (!params.is_object()) throw HttpError{400, "BadRequest", "'params' must be a JSON object"};

        pipeline::Stage kind;
        try {
            kind = pipeline::parse_stage(body["kind"].get<std::string>());
        } catch (const Error& e) {
            throw HttpError{400, "BadRequest", e.what()};
        }
        if (kind == pipeline::Stage::Extract)
            throw HttpError{400, "BadRequest", "features are served by GET /datasets/{id}/features.csv"};
        const std::string dataset_id = body["dataset_id"].get<std::string>();
        find_dataset(dataset_id);
        json canonical;
        try {
            canonical = pipeline::canonical_params(kind, params);
        } catch (const Error& e) {
            throw HttpError{400, std::string(e.name()), e.what()};
        }

        const std::string job_id =
            sha256_hex(dataset_id + "\n" + std::string(pipeline::to_string(kind)) + "\n" + pipeline::dump(canonical));
        std::lock_guard lock(mu);
        if (const auto it = jobs.find(job_id); it != jobs.end()) {
            json status = job_status(*it->second);
            status["cached"] = true;
            send_json(res, 200, status);
            return;
        }
        auto job = std::make_shared<Job>();
        job->id = job_id;
        job->dataset_id = dataset_id;
        job->kind = kind;
        job->params = canonical;
        jobs[job_id] = job;
        queue.push_back(job);
        cv.notify_all();
        json status = job_status(*job);
        status["cached"] = false;
        send_json(res, 202, status);
    }

    void get_result(const std::string& id, httplib::Response& res) {
        const auto job = find_job(id);
        std::lock_guard lock(mu);
        switch (job->state) {
            case JobState::Done:
                res.status = 200;
                res.set_content(job->result, "application/json");
                return;
            case JobState::Failed:
                send_json(res, job->internal_error ? 500 : 422, job->error);
                return;
            default:
                send_json(res, 409, {{"error", "JobNotDone"},
                                     {"message", "job is " + std::string(state_name(job->state))},
                                     {"state", state_name(job->state)}});
        }
    }

    template <typename F>
    httplib::Server::Handler guarded(F f) {
        return [f](const httplib::Request& req, httplib::Response& res) {
            try {
                f(req, res);
            } catch (const HttpError& e) {
                send_error(res, e.status, e.name, e.message);
            } catch (const Error& e) {
                send_error(res, e.category() == ErrorCategory::Schema ? 400 : 422, e.name(), e.what());
            } catch (const std::exception& e) {
                send_error(res, 500, "InternalError", e.what());
            }
        };
    }

    void setup_routes() {
        http.set_payload_max_length(config.max_upload_bytes);
        http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                  {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                  {"Access-Control-Allow-Headers", "Content-Type"}});
        http.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
        http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (!res.body.empty()) return;
            const std::string name = res.status == 413 ? "PayloadTooLarge" : res.status == 404 ? "NotFound" : "HttpError";
            send_error(res, res.status, name, "request failed with status " + std::to_string(res.status));
        });

        http.Get("/health", [](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, {{"status", "ok"}, {"version", pipeline::kEngineVersion}});
        });
        http.Get("/spec", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(openapi_document(), "application/json");
        });
        http.Post("/datasets", guarded([this](const httplib::Request& req, httplib::Response& res) { post_dataset(req, res); }));
        http.Get(R"(/datasets/([0-9a-f]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                     send_json(res, 200, dataset_info(*find_dataset(req.matches[1])));
                 }));
        http.Get(R"(/datasets/([^/]+)/features\.csv)",
                 guarded([this](const httplib::Request& req, httplib::Response& res) {
                     const auto d = find_dataset(req.matches[1]);
                     std::ostringstream out;
                     write_feature_csv(d->feature_table(), out);
                     res.set_header("Content-Disposition", "attachment; filename=\"features.csv\"");
                     res.set_content(out.str(), "text/csv");
                 }));
        http.Post("/jobs", guarded([this](const httplib::Request& req, httplib::Response& res) { post_job(req, res); }));
        http.Get(R"(/jobs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                     const auto job = find_job(req.matches[1]);
                     std::lock_guard lock(mu);
                     send_json(res, 200, job_status(*job));
                 }));
        http.Get(R"(/jobs/([^/]+)/result)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                     get_result(req.matches[1], res);
                 }));
        if (config.static_dir && !http.set_mount_point("/", config.static_dir->string()))
            std::clog << "static directory " << *config.static_dir << " is not available\n";
    }
};

Server::Server(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Server::~Server() { stop(); }

bool Server::listen() { return impl_->http.listen(impl_->config.host, impl_->config.port); }

int Server::start() {
    int port = impl_->config.port;
    if (port == 0) port = impl_->http.bind_to_any_port(impl_->config.host);
    else if (!impl_->http.bind_to_port(impl_->config.host, port)) port = -1;
    if (port < 0) return -1;
    impl_->http_thread = std::thread([this] { impl_->http.listen_after_bind(); });
    impl_->http.wait_until_ready();
    return port;
}

void Server::stop() {
    if (!impl_) return;
    impl_->http.stop();
    if (impl_->http_thread.joinable()) impl_->http_thread.join();
}

void Server::drain() {
    std::unique_lock lock(impl_->mu);
    impl_->idle_cv.wait(lock, [&] { return (impl_->queue.empty() || impl_->paused) && impl_->running == 0; });
}

void Server::pause_workers() {
    std::lock_guard lock(impl_->mu);
    impl_->paused = true;
}

void Server::resume_workers() {
    {
        std::lock_guard lock(impl_->mu);
        impl_->paused = false;
    }
    impl_->cv.notify_all();
}

std::string openapi_document() {
    const json error_schema = {{"type", "object"},
                               {"properties", {{"error", {{"type", "string"}}}, {"message", {{"type", "string"}}}}}};
    auto error_response = [&](const char* what) {
        return json{{"description", what}, {"content", {{"application/json", {{"schema", {{"$ref", "#/components/schemas/Error"}}}}}}}};
    };
    const json id_param = {{"name", "id"}, {"in", "path"}, {"required", true}, {"schema", {{"type", "string"}}}};
    json doc = {
        {"openapi", "3.0.3"},
        {"info", {{"title", "tsfeat engine"}, {"version", pipeline::kEngineVersion}}},
        {"components",
         {{"schemas",
           {{"Error", error_schema},
            {"JobRequest",
             {{"type", "object"},
              {"required", {"dataset_id", "kind"}},
              {"properties",
               {{"dataset_id", {{"type", "string"}}},
                {"kind", {{"type", "string"}, {"enum", {"quality", "matrix", "project", "classify", "top-features"}}}},
                {"params", {{"type", "object"}}}}}}},
            {"JobStatus",
             {{"type", "object"},
              {"properties",
               {{"job_id", {{"type", "string"}}},
                {"dataset_id", {{"type", "string"}}},
                {"kind", {{"type", "string"}}},
                {"params", {{"type", "object"}}},
                {"state", {{"type", "string"}, {"enum", {"queued", "running", "done", "failed"}}}},
                {"cached", {{"type", "boolean"}}},
                {"error", {{"$ref", "#/components/schemas/Error"}}}}}}}}}}},
        {"paths",
         {{"/datasets",
           {{"post",
             {{"summary", "Upload a long-format CSV (raw body, multipart 'file' part, or JSON {csv})"},
              {"parameters",
               {{{"name", "id"}, {"in", "query"}, {"schema", {{"type", "string"}, {"default", "id"}}}},
                {{"name", "time"}, {"in", "query"}, {"schema", {{"type", "string"}, {"default", "timepoint"}}}},
                {{"name", "value"}, {"in", "query"}, {"schema", {{"type", "string"}, {"default", "values"}}}},
                {{"name", "group"}, {"in", "query"}, {"schema", {{"type", "string"}}}},
                {{"name", "zscore"}, {"in", "query"}, {"schema", {{"type", "boolean"}, {"default", false}}}}}},
              {"responses",
               {{"201", {{"description", "dataset stored; body holds dataset_id"}}},
                {"200", {{"description", "identical dataset already stored"}}},
                {"400", error_response("malformed upload or CSV schema error")},
                {"413", error_response("upload exceeds the size cap")},
                {"422", error_response("degenerate data")}}}}}}},
          {"/datasets/{id}",
           {{"get", {{"parameters", {id_param}}, {"responses", {{"200", {{"description", "dataset summary"}}}, {"404", error_response("unknown dataset")}}}}}}},
          {"/datasets/{id}/features.csv",
           {{"get",
             {{"parameters", {id_param}},
              {"responses",
               {{"200", {{"description", "tidy feature table"}, {"content", {{"text/csv", json::object()}}}}},
                {"404", error_response("unknown dataset")}}}}}}},
          {"/jobs",
           {{"post",
             {{"requestBody", {{"required", true}, {"content", {{"application/json", {{"schema", {{"$ref", "#/components/schemas/JobRequest"}}}}}}}}},
              {"responses",
               {{"202", {{"description", "job queued"}}},
                {"200", {{"description", "identical job exists; its status is returned"}}},
                {"400", error_response("malformed request or invalid parameters")},
                {"404", error_response("unknown dataset")}}}}}}},
          {"/jobs/{id}",
           {{"get", {{"parameters", {id_param}}, {"responses", {{"200", {{"description", "job status"}}}, {"404", error_response("unknown job")}}}}}}},
          {"/jobs/{id}/result",
           {{"get",
             {{"parameters", {id_param}},
              {"responses",
               {{"200", {{"description", "artifact JSON"}}},
                {"404", error_response("unknown job")},
                {"409", error_response("job not done")},
                {"422", error_response("job failed with a domain error")},
                {"500", error_response("job failed with an internal error")}}}}}}},
          {"/spec", {{"get", {{"responses", {{"200", {{"description", "this document"}}}}}}}}},
          {"/health", {{"get", {{"responses", {{"200", {{"description", "liveness"}}}}}}}}}}}};
    return pipeline::dump(doc);
}

}  // namespace tsfeat::service

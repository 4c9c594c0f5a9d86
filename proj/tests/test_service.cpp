#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <sstream>
#include <thread>

#include "synth.hpp"
#include "tsfeat/pipeline.hpp"
#include "tsfeat/service.hpp"

using namespace tsfeat;
using pipeline::json;
namespace fs = std::filesystem;

namespace {

struct Fixture {
    service::Server server;
    int port;
    httplib::Client client;

    explicit Fixture(service::ServiceConfig cfg = {}) : server(with_port0(std::move(cfg))), port(server.start()), client("127.0.0.1", port) {
        client.set_read_timeout(60, 0);
    }

    static service::ServiceConfig with_port0(service::ServiceConfig cfg) {
        cfg.port = 0;
        return cfg;
    }

    httplib::Result post_json(const std::string& path, const json& body) {
        return client.Post(path, body.dump(), "application/json");
    }
};

const std::string& labeled_csv() {
    static const std::string csv = synth::long_csv(synth::three_class(31, 8, 48));
    return csv;
}

std::string upload(Fixture& f, const std::string& csv = labeled_csv()) {
    auto r = f.client.Post("/datasets?group=group", csv, "text/csv");
    REQUIRE(r);
    REQUIRE((r->status == 201 || r->status == 200));
    return json::parse(r->body)["dataset_id"];
}

json body_of(const httplib::Result& r) { return json::parse(r->body); }

}  // namespace

TEST_CASE("health and OpenAPI document") {
    Fixture f;
    auto h = f.client.Get("/health");
    REQUIRE(h);
    CHECK(h->status == 200);
    CHECK(body_of(h)["status"] == "ok");
    auto s = f.client.Get("/spec");
    REQUIRE(s);
    const json spec = body_of(s);
    CHECK(spec.contains("openapi"));
    for (const char* p : {"/datasets", "/datasets/{id}", "/datasets/{id}/features.csv", "/jobs", "/jobs/{id}",
                          "/jobs/{id}/result"})
        CHECK(spec["paths"].contains(p));
}

TEST_CASE("dataset upload is content addressed") {
    Fixture f;
    auto r = f.client.Post("/datasets?group=group", labeled_csv(), "text/csv");
    REQUIRE(r);
    CHECK(r->status == 201);
    const json info = body_of(r);
    CHECK(info["dataset_id"].get<std::string>().size() == 64);
    CHECK(info["series"] == 24);
    CHECK(info["labeled"] == true);
    CHECK(info["classes"] == json{"ar1", "noise", "sine"});

    auto again = f.client.Post("/datasets?group=group", labeled_csv(), "text/csv");
    CHECK(again->status == 200);
    CHECK(body_of(again)["dataset_id"] == info["dataset_id"]);

    // Same bytes through JSON and multipart map to the same id.
    auto j = f.post_json("/datasets", {{"csv", labeled_csv()}, {"group", "group"}});
    CHECK(j->status == 200);
    CHECK(body_of(j)["dataset_id"] == info["dataset_id"]);
    httplib::MultipartFormDataItems items{{"file", labeled_csv(), "data.csv", "text/csv"}, {"group", "group", "", ""}};
    auto m = f.client.Post("/datasets", items);
    CHECK(m->status == 200);
    CHECK(body_of(m)["dataset_id"] == info["dataset_id"]);

    // Different interpretation, different id.
    auto unlabeled = f.client.Post("/datasets", labeled_csv(), "text/csv");
    CHECK(unlabeled->status == 201);
    CHECK(body_of(unlabeled)["dataset_id"] != info["dataset_id"]);
    CHECK(body_of(unlabeled)["labeled"] == false);

    auto get = f.client.Get("/datasets/" + info["dataset_id"].get<std::string>());
    CHECK(get->status == 200);
    CHECK(body_of(get)["series"] == 24);
}

TEST_CASE("upload errors") {
    Fixture f;
    auto dup = f.client.Post("/datasets", "id,timepoint,values\na,1,1\na,1,2\n", "text/csv");
    CHECK(dup->status == 400);
    CHECK(body_of(dup)["error"] == "DuplicateTimepoint");
    auto flat = f.client.Post("/datasets?zscore=true", "id,timepoint,values\na,0,1\na,1,1\n", "text/csv");
    CHECK(flat->status == 422);
    CHECK(body_of(flat)["error"] == "ConstantSeries");
    CHECK(f.client.Post("/datasets", "", "text/csv")->status == 400);
    CHECK(f.client.Post("/datasets", "{not json", "application/json")->status == 400);
    CHECK(f.client.Get("/datasets/00ff")->status == 404);
    CHECK(body_of(f.client.Get("/datasets/00ff"))["error"] == "NotFound");
}

TEST_CASE("upload size cap") {
    service::ServiceConfig cfg;
    cfg.max_upload_bytes = 1024;
    Fixture f(cfg);
    auto r = f.client.Post("/datasets", labeled_csv(), "text/csv");
    REQUIRE(r);
    CHECK(r->status == 413);
    CHECK(body_of(r)["error"] == "PayloadTooLarge");
}

TEST_CASE("features.csv matches the library") {
    Fixture f;
    const std::string id = upload(f);
    auto r = f.client.Get("/datasets/" + id + "/features.csv");
    REQUIRE(r);
    CHECK(r->status == 200);
    std::istringstream in(labeled_csv());
    std::ostringstream want;
    write_feature_csv(extract_features(ingest_long_csv(in, ColumnSpec{"id", "timepoint", "values", "group"}),
                                       native_catalog()),
                      want);
    CHECK(r->body == want.str());
}

TEST_CASE("job lifecycle, caching by canonical params, and result identity") {
    Fixture f;
    const std::string id = upload(f);
    f.server.pause_workers();
    const json req = {{"dataset_id", id}, {"kind", "project"}, {"params", {{"method", "tsne"}, {"perplexity", 5}, {"seed", 7}, {"iterations", 300}}}};
    auto first = f.post_json("/jobs", req);
    REQUIRE(first);
    CHECK(first->status == 202);
    const json st = body_of(first);
    CHECK(st["state"] == "queued");
    CHECK(st["cached"] == false);
    const std::string job = st["job_id"];

    auto early = f.client.Get("/jobs/" + job + "/result");
    CHECK(early->status == 409);
    CHECK(body_of(early)["error"] == "JobNotDone");

    // Equal canonical params (integer vs float, explicit defaults) hit the cache.
    json same = req;
    same["params"]["perplexity"] = 5.0;
    same["params"]["normalization"] = "z-score";
    auto second = f.post_json("/jobs", same);
    CHECK(second->status == 200);
    CHECK(body_of(second)["job_id"] == job);
    CHECK(body_of(second)["cached"] == true);

    f.server.resume_workers();
    f.server.drain();
    auto status = f.client.Get("/jobs/" + job);
    CHECK(body_of(status)["state"] == "done");
    auto result = f.client.Get("/jobs/" + job + "/result");
    REQUIRE(result->status == 200);

    std::istringstream in(labeled_csv());
    const FeatureTable ft =
        extract_features(ingest_long_csv(in, ColumnSpec{"id", "timepoint", "values", "group"}), native_catalog());
    const json canon = pipeline::canonical_params(pipeline::Stage::Project, req["params"]);
    CHECK(result->body == pipeline::dump(pipeline::run_analysis(pipeline::Stage::Project, ft, canon)));
    CHECK(f.client.Get("/jobs/" + job + "/result")->body == result->body);

    json other = req;
    other["params"]["seed"] = 8;
    auto third = f.post_json("/jobs", other);
    CHECK(third->status == 202);
    CHECK(body_of(third)["job_id"] != job);
}

TEST_CASE("job request errors") {
    Fixture f;
    const std::string id = upload(f);
    auto bad = [&](const json& body, int status, const char* name) {
        auto r = f.post_json("/jobs", body);
        REQUIRE(r);
        CHECK(r->status == status);
        CHECK(body_of(r)["error"] == name);
    };
    bad({{"dataset_id", id}, {"kind", "sideways"}}, 400, "BadRequest");
    bad({{"dataset_id", id}, {"kind", "extract"}}, 400, "BadRequest");
    bad({{"kind", "matrix"}}, 400, "BadRequest");
    bad({{"dataset_id", id}, {"kind", "matrix"}, {"params", {{"method", "L7"}}}}, 400, "InvalidParameter");
    bad({{"dataset_id", id}, {"kind", "matrix"}, {"params", {{"unknown", 1}}}}, 400, "InvalidParameter");
    bad({{"dataset_id", std::string(64, 'a')}, {"kind", "matrix"}}, 404, "NotFound");
    auto malformed = f.client.Post("/jobs", "{", "application/json");
    CHECK(malformed->status == 400);
    CHECK(f.client.Get("/jobs/" + std::string(64, 'b'))->status == 404);
    CHECK(f.client.Get("/jobs/" + std::string(64, 'b') + "/result")->status == 404);
}

TEST_CASE("domain failures surface as 422 with the error name") {
    Fixture f;
    auto up = f.client.Post("/datasets", labeled_csv(), "text/csv");  // unlabeled interpretation
    const std::string id = body_of(up)["dataset_id"];
    auto r = f.post_json("/jobs", {{"dataset_id", id}, {"kind", "classify"}});
    const std::string job = body_of(r)["job_id"];
    f.server.drain();
    const json st = body_of(f.client.Get("/jobs/" + job));
    CHECK(st["state"] == "failed");
    CHECK(st["error"]["error"] == "UnlabeledSeries");
    auto res = f.client.Get("/jobs/" + job + "/result");
    CHECK(res->status == 422);
    CHECK(body_of(res)["error"] == "UnlabeledSeries");
}

TEST_CASE("CORS headers and preflight") {
    Fixture f;
    auto h = f.client.Get("/health");
    CHECK(h->get_header_value("Access-Control-Allow-Origin") == "*");
    auto o = f.client.Options("/jobs");
    REQUIRE(o);
    CHECK(o->status == 204);
    CHECK(o->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);
}

TEST_CASE("datasets and finished jobs persist across restarts") {
    const fs::path dir = fs::temp_directory_path() / ("tsfeat_service_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    service::ServiceConfig cfg;
    cfg.data_dir = dir;
    std::string id, job, result;
    {
        Fixture f(cfg);
        id = upload(f);
        job = body_of(f.post_json("/jobs", {{"dataset_id", id}, {"kind", "matrix"}}))["job_id"];
        f.server.drain();
        result = f.client.Get("/jobs/" + job + "/result")->body;
        f.server.stop();
    }
    {
        Fixture f(cfg);
        CHECK(f.client.Get("/datasets/" + id)->status == 200);
        auto r = f.client.Get("/jobs/" + job + "/result");
        REQUIRE(r);
        CHECK(r->status == 200);
        CHECK(r->body == result);
        auto again = f.post_json("/jobs", {{"dataset_id", id}, {"kind", "matrix"}});
        CHECK(again->status == 200);
        CHECK(body_of(again)["cached"] == true);
    }
    fs::remove_all(dir);
}

TEST_CASE("concurrent clients agree on ids and results") {
    service::ServiceConfig cfg;
    cfg.workers = 4;
    Fixture f(cfg);
    constexpr int kClients = 32;
    std::vector<std::string> ids(kClients), jobs(kClients), results(kClients);
    std::atomic<int> created{0}, failures{0};
    std::vector<std::thread> threads;
    for (int c = 0; c < kClients; ++c)
        threads.emplace_back([&, c] {
            httplib::Client cl("127.0.0.1", f.port);
            cl.set_read_timeout(120, 0);
            auto up = cl.Post("/datasets?group=group", labeled_csv(), "text/csv");
            if (!up || (up->status != 200 && up->status != 201)) {
                failures++;
                return;
            }
            if (up->status == 201) created++;
            ids[c] = json::parse(up->body)["dataset_id"];
            const json req = {{"dataset_id", ids[c]}, {"kind", c % 2 ? "matrix" : "project"}};
            auto r = cl.Post("/jobs", req.dump(), "application/json");
            if (!r || (r->status != 200 && r->status != 202)) {
                failures++;
                return;
            }
            jobs[c] = json::parse(r->body)["job_id"];
            for (int attempt = 0; attempt < 2000; ++attempt) {
                auto res = cl.Get("/jobs/" + jobs[c] + "/result");
                if (res && res->status == 200) {
                    results[c] = res->body;
                    return;
                }
                std::this_thread::sleep_for(std::chrono::milliseconds(10));
            }
            failures++;
        });
    for (auto& t : threads) t.join();
    CHECK(failures == 0);
    CHECK(created == 1);
    for (int c = 2; c < kClients; ++c) {
        CHECK(ids[c] == ids[0]);
        CHECK(jobs[c] == jobs[c % 2]);
        CHECK(results[c] == results[c % 2]);
    }
}

#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace tsfeat::service {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::optional<std::filesystem::path> data_dir;
    std::optional<std::filesystem::path> static_dir;
    std::size_t max_upload_bytes = 256u * 1024u * 1024u;
    std::size_t workers = 1;
};

/// SHA-256 of `data` as lowercase hex.
std::string sha256_hex(const std::string& data);

/// OpenAPI description of the REST surface.
std::string openapi_document();

/// HTTP facade over the pipeline. Datasets and job results are content
/// addressed: identical uploads and identical (dataset, kind, params) jobs
/// map to the same ids, and a finished job's result never changes.
class Server {
public:
    explicit Server(ServiceConfig config);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds and serves until stop(); returns false if binding fails.
    bool listen();
    /// Binds, serves on a background thread and returns the bound port.
    int start();
    void stop();

    /// Blocks until the job queue is empty and no job is running.
    void drain();
    /// Holds queued jobs in the queue until resume(); used to observe
    /// queued states deterministically.
    void pause_workers();
    void resume_workers();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace tsfeat::service

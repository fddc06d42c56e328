// SPDX-License-Identifier: Apache-2.0
#include "codetrans/gerrit.hpp"

#include <chrono>
#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "codetrans/util.hpp"

namespace codetrans {

using nlohmann::json;

namespace {

std::string url_encode_path(const std::string& path) {
    std::string out;
    for (unsigned char c : path) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            char buf[4];
            std::snprintf(buf, sizeof(buf), "%%%02X", c);
            out += buf;
        }
    }
    return out;
}

std::string strip_xssi_prefix(const std::string& body) {
    if (body.rfind(")]}'", 0) == 0) {
        auto nl = body.find('\n');
        return nl == std::string::npos ? std::string() : body.substr(nl + 1);
    }
    return body;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

struct GerritClient::Impl {
    GerritClientConfig config;
    httplib::Client http;
    std::mutex rate_mutex;
    std::chrono::steady_clock::time_point last_request{};

    explicit Impl(GerritClientConfig cfg) : config(std::move(cfg)), http(config.base_url) {
        http.set_connection_timeout(10);
        http.set_read_timeout(30);
    }

    void rate_limit() {
        if (config.min_interval_ms <= 0) return;
        std::unique_lock<std::mutex> lock(rate_mutex);
        auto now = std::chrono::steady_clock::now();
        auto elapsed =
            std::chrono::duration_cast<std::chrono::milliseconds>(now - last_request).count();
        if (elapsed < config.min_interval_ms) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(config.min_interval_ms - elapsed));
        }
        last_request = std::chrono::steady_clock::now();
    }

    // GET with retry-with-backoff on transient failures. Returns the
    // response for terminal statuses (2xx and 404, which callers interpret);
    // other 4xx raise UserError, exhausted retries raise NetworkError.
    httplib::Result get_with_retry(const std::string& path) {
        int backoff = config.backoff_ms;
        for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
                backoff *= 2;
            }
            rate_limit();
            auto res = http.Get(path);
            if (!res) continue;  // connection-level failure, retry
            if (res->status >= 200 && res->status < 300) return res;
            if (res->status == 404) return res;
            if (res->status == 429 || res->status >= 500) continue;
            throw UserError("server rejected request (" + std::to_string(res->status) +
                            "): " + path);
        }
        throw NetworkError("request failed after " + std::to_string(config.max_retries) +
                           " retries: " + path);
    }
};

GerritClient::GerritClient(GerritClientConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

GerritClient::~GerritClient() = default;

int GerritClient::workers() const { return impl_->config.workers; }

std::pair<std::vector<ChangeRef>, PageCursor> GerritClient::list_merged_changes(
    const std::string& project, PageCursor cursor) {
    if (cursor.at_end) return {{}, cursor};
    std::string path = "/changes/?q=status:merged+project:" + url_encode_path(project) +
                       "&n=" + std::to_string(impl_->config.page_size) +
                       "&start=" + std::to_string(cursor.start) +
                       "&o=CURRENT_REVISION&o=CURRENT_FILES";
    auto res = impl_->get_with_retry(path);
    if (res->status == 404) throw UserError("unknown project: " + project);

    json changes = json::parse(strip_xssi_prefix(res->body));
    if (!changes.is_array()) throw UserError("unexpected change-list payload");

    std::vector<ChangeRef> out;
    bool more = false;
    for (const auto& c : changes) {
        ChangeRef ref;
        ref.change_id = c.value("id", "");
        ref.project = c.value("project", project);
        ref.status = c.value("status", "") == "MERGED" ? ChangeStatus::Merged
                                                       : ChangeStatus::Other;
        if (c.contains("revisions")) {
            for (const auto& [rev, info] : c.at("revisions").items()) {
                if (info.contains("files")) {
                    for (const auto& [file_path, meta] : info.at("files").items()) {
                        if (!file_path.empty() && file_path[0] != '/')  // skip /COMMIT_MSG
                            ref.file_paths.push_back(file_path);
                    }
                }
            }
        }
        if (c.value("_more_changes", false)) more = true;
        if (ref.status == ChangeStatus::Merged) out.push_back(std::move(ref));
    }

    PageCursor next;
    next.start = cursor.start + changes.size();
    next.at_end = !more;
    return {out, next};
}

std::optional<FilePair> GerritClient::fetch_file_pair(const ChangeRef& change,
                                                      const std::string& path) {
    if (!ends_with(path, ".java"))
        throw UserError("non-Java path rejected: " + path);

    std::string base = "/changes/" + url_encode_path(change.change_id) +
                       "/revisions/current/files/" + url_encode_path(path) + "/content";

    auto pre = impl_->get_with_retry(base + "?parent=1");
    if (pre->status == 404) return std::nullopt;  // created in the PR
    auto post = impl_->get_with_retry(base);
    if (post->status == 404) return std::nullopt;  // deleted by the PR

    FilePair pair;
    pair.change_id = change.change_id;
    pair.path = path;
    pair.pre_text = base64_decode(pre->body);
    pair.post_text = base64_decode(post->body);
    if (pair.pre_text.empty() || pair.post_text.empty()) return std::nullopt;
    return pair;
}

MineStats mine_project(GerritClient& client, const std::string& project,
                       const std::filesystem::path& out_file,
                       const std::function<void(const std::string&)>& log) {
    MineStats stats;
    auto cursor_file = out_file;
    cursor_file += ".cursor";

    PageCursor cursor;
    if (std::filesystem::exists(cursor_file)) {
        std::ifstream in(cursor_file);
        std::string state;
        in >> cursor.start >> state;
        cursor.at_end = state == "end";
    }

    std::ofstream out(out_file, std::ios::app | std::ios::binary);
    if (!out) throw UserError("cannot open output file: " + out_file.string());

    while (!cursor.at_end) {
        auto [changes, next] = client.list_merged_changes(project, cursor);
        stats.changes_seen += changes.size();

        // Fetch tasks for this page, run with bounded parallelism; results
        // land in per-task slots so the single consumer below writes them in
        // deterministic (change, path) order.
        std::vector<std::pair<const ChangeRef*, std::string>> tasks;
        for (const auto& change : changes) {
            for (const auto& path : change.file_paths) {
                if (ends_with(path, ".java")) tasks.emplace_back(&change, path);
            }
        }
        std::vector<std::optional<FilePair>> results(tasks.size());
        parallel_for(tasks.size(), static_cast<unsigned>(std::max(1, client.workers())),
                     [&](std::size_t i) {
                         results[i] = client.fetch_file_pair(*tasks[i].first, tasks[i].second);
                     });
        for (auto& r : results) {
            if (r) {
                out << file_pair_to_ndjson_line(*r) << '\n';
                ++stats.pairs_written;
            } else {
                ++stats.files_skipped;
            }
        }
        out.flush();

        cursor = next;
        std::ofstream cur(cursor_file, std::ios::trunc);
        cur << cursor.start << ' ' << (cursor.at_end ? "end" : "more") << '\n';
        if (log)
            log("page done, cursor=" + std::to_string(cursor.start) + ", pairs=" +
                std::to_string(stats.pairs_written));
    }
    return stats;
}

}  // namespace codetrans

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "codetrans/corpus.hpp"

namespace codetrans {

// Transient failure (connection refused, 5xx, timeout) that persisted past
// the retry budget. Fatal conditions (unknown project, bad request) raise
// UserError instead.
class NetworkError : public std::runtime_error {
public:
    explicit NetworkError(const std::string& msg) : std::runtime_error(msg) {}
};

struct PageCursor {
    std::size_t start = 0;
    bool at_end = false;
};

struct GerritClientConfig {
    std::string base_url;       // e.g. http://review.example.org
    int page_size = 100;
    int max_retries = 4;        // retry-with-backoff for transient failures
    int backoff_ms = 1000;      // doubles per attempt
    int min_interval_ms = 0;    // rate limit between requests
    int workers = 4;            // bounded fetch parallelism
};

// Read-only client for a Gerrit-style code review REST API:
//   GET /changes/?q=status:merged+project:P&n=N&start=S&o=CURRENT_REVISION&o=CURRENT_FILES
//   GET /changes/{id}/revisions/current/files/{path}/content          (merged content, base64)
//   GET /changes/{id}/revisions/current/files/{path}/content?parent=1 (pre-change, base64)
// Responses may carry the ")]}'"-style XSSI prefix line.
class GerritClient {
public:
    explicit GerritClient(GerritClientConfig config);
    ~GerritClient();

    GerritClient(const GerritClient&) = delete;
    GerritClient& operator=(const GerritClient&) = delete;

    // One page of merged changes for the project plus the cursor to resume
    // from. Non-merged entries in the server response are dropped.
    std::pair<std::vector<ChangeRef>, PageCursor> list_merged_changes(const std::string& project,
                                                                      PageCursor cursor);

    // FilePair when the file exists both before and after the change;
    // nullopt (skip) when it was created or deleted by it. Non-Java paths
    // are rejected before any request.
    std::optional<FilePair> fetch_file_pair(const ChangeRef& change, const std::string& path);

    int workers() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct MineStats {
    std::size_t changes_seen = 0;
    std::size_t pairs_written = 0;
    std::size_t files_skipped = 0;
};

// Crawls every merged change of a project and appends FilePair records to
// out_file. File fetches run on config.workers threads; a single consumer
// appends records in deterministic (change, path) order. The cursor is
// persisted next to out_file so an interrupted crawl resumes without
// duplicating changes.
MineStats mine_project(GerritClient& client, const std::string& project,
                       const std::filesystem::path& out_file,
                       const std::function<void(const std::string&)>& log = {});

}  // namespace codetrans

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace codetrans {

enum class ChangeStatus { Merged, Other };

struct ChangeRef {
    std::string change_id;
    std::string project;
    ChangeStatus status = ChangeStatus::Other;
    std::vector<std::string> file_paths;
};

struct FilePair {
    std::string change_id;
    std::string path;
    std::string pre_text;
    std::string post_text;
};

// One JSON object per line, texts base64-encoded.
std::string file_pair_to_ndjson_line(const FilePair& pair);
FilePair file_pair_from_ndjson_line(const std::string& line);

void save_file_pairs(const std::filesystem::path& out_file, const std::vector<FilePair>& pairs);
std::vector<FilePair> load_file_pairs(const std::filesystem::path& in_file);

// Reads a local corpus laid out as <root>/<change_id>/pre/**.java and
// <root>/<change_id>/post/**.java. Emits one FilePair per .java path present
// in both trees of a change, sorted by change_id then path. Files present on
// only one side are skipped, mirroring the crawler rule for created/deleted
// files. A change directory missing both subtrees is a fatal error.
std::vector<FilePair> ingest_local_corpus(const std::filesystem::path& root);

}  // namespace codetrans

// SPDX-License-Identifier: Apache-2.0
#include "codetrans/corpus.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "codetrans/util.hpp"

namespace codetrans {

using nlohmann::json;

std::string file_pair_to_ndjson_line(const FilePair& pair) {
    json j;
    j["change_id"] = pair.change_id;
    j["path"] = pair.path;
    j["pre_b64"] = base64_encode(pair.pre_text);
    j["post_b64"] = base64_encode(pair.post_text);
    return j.dump();
}

FilePair file_pair_from_ndjson_line(const std::string& line) {
    json j = json::parse(line);
    FilePair p;
    p.change_id = j.at("change_id").get<std::string>();
    p.path = j.at("path").get<std::string>();
    p.pre_text = base64_decode(j.at("pre_b64").get<std::string>());
    p.post_text = base64_decode(j.at("post_b64").get<std::string>());
    return p;
}

void save_file_pairs(const std::filesystem::path& out_file, const std::vector<FilePair>& pairs) {
    std::string buf;
    for (const FilePair& p : pairs) {
        buf += file_pair_to_ndjson_line(p);
        buf += '\n';
    }
    write_file_atomic(out_file, buf);
}

std::vector<FilePair> load_file_pairs(const std::filesystem::path& in_file) {
    std::ifstream in(in_file);
    if (!in) throw UserError("cannot open corpus file: " + in_file.string());
    std::vector<FilePair> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(file_pair_from_ndjson_line(line));
    }
    return out;
}

namespace {

// Relative .java paths under dir, sorted.
std::vector<std::string> java_files_under(const std::filesystem::path& dir) {
    std::vector<std::string> out;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        if (entry.path().extension() != ".java") continue;
        out.push_back(std::filesystem::relative(entry.path(), dir).generic_string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::vector<FilePair> ingest_local_corpus(const std::filesystem::path& root) {
    if (!std::filesystem::is_directory(root))
        throw UserError("corpus root is not a directory: " + root.string());

    std::vector<std::string> change_ids;
    for (const auto& entry : std::filesystem::directory_iterator(root)) {
        if (entry.is_directory()) change_ids.push_back(entry.path().filename().string());
    }
    std::sort(change_ids.begin(), change_ids.end());

    std::vector<FilePair> out;
    for (const std::string& change_id : change_ids) {
        auto pre_dir = root / change_id / "pre";
        auto post_dir = root / change_id / "post";
        bool has_pre = std::filesystem::is_directory(pre_dir);
        bool has_post = std::filesystem::is_directory(post_dir);
        if (!has_pre && !has_post)
            throw UserError("malformed corpus tree, no pre/ or post/ under: " +
                            (root / change_id).string());
        if (!has_pre || !has_post) continue;  // nothing ever exists on both sides

        auto pre_files = java_files_under(pre_dir);
        auto post_files = java_files_under(post_dir);
        std::vector<std::string> both;
        std::set_intersection(pre_files.begin(), pre_files.end(), post_files.begin(),
                              post_files.end(), std::back_inserter(both));
        for (const std::string& rel : both) {
            FilePair p;
            p.change_id = change_id;
            p.path = rel;
            p.pre_text = read_file(pre_dir / rel);
            p.post_text = read_file(post_dir / rel);
            if (p.pre_text.empty() || p.post_text.empty()) continue;
            out.push_back(std::move(p));
        }
    }
    return out;
}

}  // namespace codetrans

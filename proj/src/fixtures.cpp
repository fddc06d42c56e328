// SPDX-License-Identifier: Apache-2.0
#include "codetrans/fixtures.hpp"

#include <cctype>
#include <cstdio>
#include <unordered_set>

namespace codetrans::fixtures {

namespace {

const std::vector<std::string> kVerbs = {"load",  "fetch", "parse", "merge", "scan",
                                         "apply", "build", "send",  "read",  "write",
                                         "sync",  "emit",  "track", "probe", "mark"};
const std::vector<std::string> kNouns = {"Config", "Record", "Batch",  "Token",  "Entry",
                                         "Packet", "Widget", "Report", "Session", "Handle",
                                         "Metric", "Signal", "Job",    "Route",  "Chunk"};
const std::vector<std::string> kLiterals = {"0", "1", "2", "10"};
const std::vector<std::string> kRenameTargets = {"value", "input"};

template <typename T>
const T& choose(SplitMix64& rng, const std::vector<T>& pool) {
    return pool[rng.next_below(pool.size())];
}

std::string lower_first(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
    return s;
}

std::string random_method_name(SplitMix64& rng) {
    return choose(rng, kVerbs) + choose(rng, kNouns) + std::to_string(rng.next_below(100));
}

std::string random_type_name(SplitMix64& rng) {
    return choose(rng, kNouns) + "Info" + std::to_string(rng.next_below(100));
}

std::string random_var_name(SplitMix64& rng) {
    return lower_first(choose(rng, kNouns)) + std::to_string(rng.next_below(100));
}

// Frequent-pool name with probability num/den, fresh random name otherwise.
std::string name_slot(SplitMix64& rng, int num, int den, std::string (*fallback)(SplitMix64&)) {
    if (rng.next_below(den) < static_cast<std::uint64_t>(num))
        return choose(rng, frequent_names());
    return fallback(rng);
}

std::string filler_statement(SplitMix64& rng, int indent) {
    std::string pad(indent, ' ');
    return pad + "int " + name_slot(rng, 1, 2, random_var_name) + " = " +
           choose(rng, kLiterals) + ";\n";
}

MethodPair finish(std::string before, std::string after) {
    MethodPair p;
    p.before.source_text = std::move(before);
    p.after.source_text = std::move(after);
    return p;
}

MethodPair gen_null_check(SplitMix64& rng) {
    std::string m = name_slot(rng, 1, 2, random_method_name);
    std::string type = name_slot(rng, 1, 3, random_type_name);
    std::string v = name_slot(rng, 1, 2, random_var_name);
    std::string callee = name_slot(rng, 1, 2, random_method_name);
    int lead = static_cast<int>(rng.next_below(3));
    bool trail = rng.next_below(2) == 0;

    std::string head = "void " + m + "(" + type + " " + v + ") {\n";
    std::string fillers;
    for (int i = 0; i < lead; ++i) fillers += filler_statement(rng, 4);
    std::string tail = trail ? filler_statement(rng, 4) : "";

    std::string call = "    " + v + "." + callee + "();\n";
    std::string guarded = "    if (" + v + " != null) {\n        " + v + "." + callee +
                          "();\n    }\n";
    return finish(head + fillers + call + tail + "}",
                  head + fillers + guarded + tail + "}");
}

MethodPair gen_rename_parameter(SplitMix64& rng, bool ambiguous) {
    // Deliberately low structural variety: identical abstract inputs with
    // different rename targets should exist, so beam width pays off.
    std::string m = choose(rng, frequent_names());
    std::string old_name = random_var_name(rng);
    std::string lit = rng.next_below(2) == 0 ? "0" : "1";
    std::string op = rng.next_below(2) == 0 ? "+" : "*";
    std::string target = ambiguous ? choose(rng, kRenameTargets) : kRenameTargets[0];

    auto body = [&](const std::string& p) {
        return "int " + m + "(int " + p + ") {\n    return " + p + " " + op + " " + lit +
               ";\n}";
    };
    return finish(body(old_name), body(target));
}

MethodPair gen_relax_comparison(SplitMix64& rng) {
    std::string m = name_slot(rng, 1, 2, random_method_name);
    std::string a = name_slot(rng, 1, 2, random_var_name);
    std::string b = name_slot(rng, 1, 2, random_var_name);
    if (b == a) b = a + "2";
    bool against_literal = rng.next_below(3) == 0;
    std::string rhs = against_literal ? choose(rng, kLiterals) : b;
    int lead = static_cast<int>(rng.next_below(2));

    std::string head = "int " + m + "(int " + a + ", int " + b + ") {\n";
    std::string fillers;
    for (int i = 0; i < lead; ++i) fillers += filler_statement(rng, 4);
    auto body = [&](const std::string& cmp) {
        return head + fillers + "    if (" + a + " " + cmp + " " + rhs +
               ") {\n        return " + a + ";\n    }\n    return " + b + ";\n}";
    };
    return finish(body(">="), body(">"));
}

MethodPair gen_add_final(SplitMix64& rng) {
    static const std::vector<std::string> kModifiers = {"public ", "protected ", ""};
    std::string mod = choose(rng, kModifiers);
    std::string m = name_slot(rng, 1, 2, random_method_name);
    std::string type = name_slot(rng, 1, 3, random_type_name);
    std::string v = name_slot(rng, 1, 2, random_var_name);
    std::string field = name_slot(rng, 1, 2, random_var_name);
    bool second = rng.next_below(3) == 0;

    std::string body = "    this." + field + " = " + v + ";\n";
    if (second) body += "    this." + name_slot(rng, 1, 2, random_var_name) + " = " + v + ";\n";
    auto decl = [&](const std::string& fin) {
        return mod + fin + "void " + m + "(" + type + " " + v + ") {\n" + body + "}";
    };
    return finish(decl(""), decl("final "));
}

MethodPair gen_swap_arguments(SplitMix64& rng) {
    std::string m = name_slot(rng, 1, 2, random_method_name);
    std::string type = rng.next_below(2) == 0 ? "int" : name_slot(rng, 1, 3, random_type_name);
    std::string a = name_slot(rng, 1, 2, random_var_name);
    std::string b = name_slot(rng, 1, 2, random_var_name);
    if (b == a) b = a + "2";
    std::string helper = name_slot(rng, 1, 2, random_method_name);
    int lead = static_cast<int>(rng.next_below(2));

    std::string head = "void " + m + "(" + type + " " + a + ", " + type + " " + b + ") {\n";
    std::string fillers;
    for (int i = 0; i < lead; ++i) fillers += filler_statement(rng, 4);
    auto body = [&](const std::string& x, const std::string& y) {
        return head + fillers + "    " + helper + "(" + x + ", " + y + ");\n}";
    };
    return finish(body(a, b), body(b, a));
}

}  // namespace

const std::vector<std::string>& frequent_names() {
    static const std::vector<std::string> pool = {
        "value", "input", "result", "data",   "size",  "count", "name",  "index", "item",
        "list",  "map",   "key",    "state",  "buffer", "total", "flag",  "text",  "node",
        "next",  "run",   "init",   "update", "check",  "close", "start",
    };
    return pool;
}

const std::vector<std::string>& handwritten_methods() {
    static const std::vector<std::string> methods = {
        "String quote(String s) {\n    return \"a\\\"b\" + s + '\\n';\n}",

        "double mix(int a) {\n    double x = 5.;\n    double y = .5f;\n    double z = 1e3 + "
        "0x1F + 0b101 + 1_000L;\n    return x + y + z + 3.14f + a;\n}",

        "Map<String, List<String>> group(List<String> items) {\n    Map<String, List<String>> "
        "out = new HashMap<>();\n    for (String item : items) {\n        out."
        "computeIfAbsent(item, k -> new ArrayList<>()).add(item);\n    }\n    return out;\n}",

        "int[] copy(int[] src) {\n    int[] dst = new int[src.length];\n    "
        "System.arraycopy(src, 0, dst, 0, src.length);\n    return dst;\n}",

        "Object cast(Object raw) {\n    String s = (String) raw;\n    return s;\n}",

        "Runnable task(final int id) {\n    return new Runnable() {\n        public void run() "
        "{\n            System.out.println(id);\n        }\n    };\n}",

        "int firstPositive(int[][] grid) {\n    outer:\n    for (int i = 0; i < grid.length; "
        "i++) {\n        for (int j = 0; j < grid[i].length; j++) {\n            if (grid[i][j] "
        "> 0) {\n                break outer;\n            }\n        }\n    }\n    return "
        "0;\n}",

        "int pick(boolean flag, int a, int b) {\n    return flag ? a : b;\n}",

        "void drain(java.util.Queue<String> q) {\n    do {\n        q.poll();\n    } while "
        "(!q.isEmpty());\n}",

        "String describe(int code) {\n    switch (code) {\n        case 0:\n            return "
        "\"zero\";\n        case 1:\n            return \"one\";\n        default:\n            "
        "return \"many\";\n    }\n}",

        "@Override\npublic String toString() {\n    return \"<empty>\";\n}",

        "static int sum(int... values) {\n    int total = 0;\n    for (int v : values) {\n     "
        "   total += v;\n    }\n    return total;\n}",

        "boolean isText(Object o) {\n    return o instanceof CharSequence;\n}",

        "long fold(long seed) {\n    long h = seed;\n    h ^= h >>> 33;\n    h *= "
        "0xff51afd7ed558ccdL;\n    h ^= h >> 2;\n    h <<= 1;\n    return h;\n}",

        "java.util.function.Function<String, Integer> parser() {\n    return "
        "Integer::parseInt;\n}",

        "void guard(Object x) throws IllegalStateException {\n    if (x == null) {\n        "
        "throw new IllegalStateException(\"null \\u2260 ok\");\n    }\n}",

        "synchronized void bump() {\n    this.count++;\n}",

        "char grade(int score) {\n    char c = 'F';\n    if (score >= 90) {\n        c = 'A';\n "
        "   }\n    return c;\n}",

        "void tryClose(java.io.Closeable c) {\n    try {\n        c.close();\n    } catch "
        "(java.io.IOException e) {\n        // ignored\n    } finally {\n        "
        "System.gc();\n    }\n}",

        "<T extends Comparable<T>> T max(T a, T b) {\n    return a.compareTo(b) >= 0 ? a : "
        "b;\n}",

        "int shifts(int x) {\n    return (x << 2) | (x >>> 1) & ~x ^ (x % 3);\n}",

        "String trimmed(String raw) {\n    String s = raw == null ? \"\" : raw.trim();\n    "
        "return s.isEmpty() ? \"\\t\" : s;\n}",

        "void fill(int[] a) {\n    java.util.Arrays.fill(a, (byte) 1);\n}",

        "double area(double r) {\n    final double pi = 3.141_592;\n    return pi * r * r;\n}",

        "int parseOct(String s) {\n    int base = 010;\n    return Integer.parseInt(s, "
        "base);\n}",
    };
    return methods;
}

MethodPair make_pair(SplitMix64& rng, ChangeKind kind, bool ambiguous_renames) {
    switch (kind) {
        case ChangeKind::AddNullCheck: return gen_null_check(rng);
        case ChangeKind::RenameParameter: return gen_rename_parameter(rng, ambiguous_renames);
        case ChangeKind::RelaxComparison: return gen_relax_comparison(rng);
        case ChangeKind::AddFinal: return gen_add_final(rng);
        case ChangeKind::SwapArguments: return gen_swap_arguments(rng);
    }
    throw UserError("unknown change kind");
}

std::vector<MethodPair> generate_pairs(const GenOptions& options) {
    SplitMix64 rng(options.seed);
    std::vector<MethodPair> out;
    std::unordered_set<std::string> seen;
    std::size_t attempts = 0;
    while (out.size() < options.pairs && attempts < options.pairs * 50) {
        ++attempts;
        auto kind = static_cast<ChangeKind>(out.size() % kChangeKindCount);
        MethodPair pair = make_pair(rng, kind, options.ambiguous_renames);
        std::string key = pair.before.source_text + "\x1E" + pair.after.source_text;
        if (!seen.insert(key).second) continue;

        // Fill in metadata from the generated source.
        auto decls = extract_methods(pair.before.source_text);
        auto decls_after = extract_methods(pair.after.source_text);
        if (decls.size() != 1 || decls_after.size() != 1) continue;
        std::string change = "change_" + std::to_string(out.size());
        pair.before = decls[0];
        pair.after = decls_after[0];
        pair.change_id = change;
        out.push_back(std::move(pair));
    }
    if (out.size() < options.pairs)
        throw UserError("fixture generator could not produce enough distinct pairs");
    return out;
}

void write_corpus_tree(const std::filesystem::path& root, const std::vector<MethodPair>& pairs) {
    namespace fs = std::filesystem;
    fs::create_directories(root);

    auto indent_method = [](const std::string& source) {
        std::string out = "    ";
        for (char c : source) {
            out += c;
            if (c == '\n') out += "    ";
        }
        return out;
    };

    char change_name[32];
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        std::snprintf(change_name, sizeof(change_name), "change_%04zu", i);
        std::string cls = "C" + std::to_string(i);
        std::string helper =
            "    int tag() {\n        return " + std::to_string(i % 7) + ";\n    }\n";
        auto wrap = [&](const std::string& method_source) {
            return "public class " + cls + " {\n" + indent_method(method_source) + "\n" +
                   helper + "}\n";
        };
        fs::path pre = root / change_name / "pre";
        fs::path post = root / change_name / "post";
        fs::create_directories(pre);
        fs::create_directories(post);
        write_file(pre / (cls + ".java"), wrap(pairs[i].before.source_text));
        write_file(post / (cls + ".java"), wrap(pairs[i].after.source_text));
    }

    // A file created by its change: present only in post/, must be skipped.
    fs::path created = root / "change_created" / "post";
    fs::create_directories(created);
    fs::create_directories(root / "change_created" / "pre");
    write_file(created / "Created.java",
               "public class Created {\n    void fresh() {\n        int x = 0;\n    }\n}\n");
    // Non-Java files are ignored by ingestion.
    write_file(root / "change_created" / "pre" / "notes.txt", "not java\n");
    write_file(root / "change_created" / "post" / "notes.txt", "still not java\n");
}

}  // namespace codetrans::fixtures

// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <regex>
#include <set>

#include "codetrans/abstraction.hpp"
#include "codetrans/fixtures.hpp"
#include "codetrans/util.hpp"

using namespace codetrans;

namespace {

MethodPair pair_of(const std::string& before, const std::string& after) {
    MethodPair p;
    p.before.source_text = before;
    p.after.source_text = after;
    return p;
}

IdiomList idioms_of(std::vector<std::string> entries) {
    IdiomList list;
    list.entries = std::move(entries);
    list.counts.assign(list.entries.size(), 1);
    list.k = static_cast<int>(list.entries.size());
    list.rebuild_index();
    return list;
}

std::vector<std::string> stripped_texts(const std::string& source) {
    return token_texts(strip_nonsemantic(tokenize(source)));
}

// Counting oracle: raw occurrence counts of identifier/literal texts,
// computed with a separate walk over roled tokens.
std::map<std::string, long long> oracle_counts(const std::vector<MethodPair>& corpus) {
    std::map<std::string, long long> counts;
    auto add = [&](const std::string& src) {
        for (const auto& rt : classify_roles(tokenize(src))) {
            if (rt.role == RoleKind::TypeName || rt.role == RoleKind::MethodName ||
                rt.role == RoleKind::VarName || rt.role == RoleKind::Literal) {
                ++counts[rt.token.text];
            }
        }
    };
    for (const auto& p : corpus) {
        add(p.before.source_text);
        add(p.after.source_text);
    }
    return counts;
}

}  // namespace

TEST_CASE("idioms: top-K by the counting oracle on a skewed fixture") {
    // "i" appears far more often than "size"; everything else is rarer.
    std::vector<MethodPair> corpus;
    std::string heavy;
    for (int rep = 0; rep < 50; ++rep) heavy += "i = i + size;\n";  // 100 i, 50 size
    corpus.push_back(pair_of(heavy, "int other = 1;"));
    auto idioms = compute_idioms(corpus, 2, 1);
    REQUIRE(idioms.entries.size() == 2);
    CHECK(idioms.entries[0] == "i");
    CHECK(idioms.entries[1] == "size");

    auto oracle = oracle_counts(corpus);
    CHECK(oracle["i"] == 100);
    CHECK(oracle["size"] == 50);
    CHECK(idioms.counts[0] == oracle["i"]);
    CHECK(idioms.counts[1] == oracle["size"]);
}

TEST_CASE("idioms: ranking matches the oracle on a generated corpus") {
    fixtures::GenOptions opt;
    opt.pairs = 80;
    opt.seed = 31;
    auto corpus = fixtures::generate_pairs(opt);
    auto idioms = compute_idioms(corpus, 25);
    auto oracle = oracle_counts(corpus);

    std::vector<std::pair<std::string, long long>> ranked(oracle.begin(), oracle.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    REQUIRE(idioms.entries.size() == 25);
    for (int i = 0; i < 25; ++i) {
        CHECK(idioms.entries[i] == ranked[i].first);
        CHECK(idioms.counts[i] == ranked[i].second);
    }
}

TEST_CASE("idioms: K beyond the distinct count returns everything; K<=0 errors") {
    std::vector<MethodPair> corpus = {pair_of("int a = 1;", "int b = 2;")};
    auto idioms = compute_idioms(corpus, 1000);
    CHECK(idioms.entries.size() == oracle_counts(corpus).size());
    CHECK_THROWS_AS(compute_idioms(corpus, 0), UserError);
    CHECK_THROWS_AS(compute_idioms(corpus, -3), UserError);
}

TEST_CASE("idioms: ties break lexicographically") {
    std::vector<MethodPair> corpus = {pair_of("zz = aa;", "zz = aa;")};
    auto idioms = compute_idioms(corpus, 1);
    CHECK(idioms.entries[0] == "aa");  // both appear twice
}

TEST_CASE("idiom list survives its text round trip") {
    std::vector<MethodPair> corpus = {pair_of("x = \"a b\\t\";", "y = x;")};
    auto idioms = compute_idioms(corpus, 10);
    auto back = IdiomList::from_text(idioms.to_text());
    CHECK(back.entries == idioms.entries);
    CHECK(back.counts == idioms.counts);
    CHECK(back.contains("\"a b\\t\""));
}

TEST_CASE("hand-traced abstraction of a setter rename") {
    // m_b: setter with parameter a; m_a: parameter renamed to v. The field
    // and the parameter share text "a", so they share VAR_0; the new name v
    // extends the mapping with VAR_1.
    auto pair = pair_of("void setA(int a){this.a=a;}", "void setA(int v){this.a=v;}");
    auto ap = abstract_pair(pair, IdiomList{});
    CHECK(ap.am_b == std::vector<std::string>{"void", "METHOD_0", "(", "int", "VAR_0", ")", "{",
                                              "this", ".", "VAR_0", "=", "VAR_0", ";", "}"});
    CHECK(ap.am_a == std::vector<std::string>{"void", "METHOD_0", "(", "int", "VAR_1", ")", "{",
                                              "this", ".", "VAR_0", "=", "VAR_1", ";", "}"});
    CHECK(ap.mapping.lookup_backward("VAR_0") == std::string("a"));
    CHECK(ap.mapping.lookup_backward("VAR_1") == std::string("v"));
    CHECK(ap.mapping.lookup_backward("METHOD_0") == std::string("setA"));
}

TEST_CASE("identical methods abstract identically") {
    auto pair = pair_of("int get() { return x; }", "int get() { return x; }");
    auto ap = abstract_pair(pair, IdiomList{});
    CHECK(ap.am_b == ap.am_a);
}

TEST_CASE("idiom literals and identifiers stay verbatim") {
    auto idioms = idioms_of({"0", "size"});
    auto pair = pair_of("int f() { return 0; }", "int f() { return size + 0; }");
    auto ap = abstract_pair(pair, idioms);
    CHECK(std::count(ap.am_b.begin(), ap.am_b.end(), "0") == 1);
    CHECK(std::count(ap.am_a.begin(), ap.am_a.end(), "size") == 1);
    for (const auto& t : ap.am_a) CHECK(t != "INT_0");
}

TEST_CASE("same text in different categories gets per-category IDs") {
    auto ap = abstract_pair(pair_of("void run(int run2){run(run2);}",
                                    "void run(int run2){run(run2);run(run2);}"),
                            IdiomList{});
    // "run" is both the declared method and the callee: METHOD_0 throughout.
    CHECK(ap.mapping.lookup_forward(IdCategory::Method, "run") == std::string("METHOD_0"));
    CHECK(ap.mapping.lookup_forward(IdCategory::Var, "run2") == std::string("VAR_0"));
}

TEST_CASE("boolean and null literals pass through as keywords") {
    auto ap = abstract_pair(pair_of("boolean f() { return true; }",
                                    "boolean f() { return x != null && false; }"),
                            IdiomList{});
    for (const char* kept : {"true"}) {
        CHECK(std::count(ap.am_b.begin(), ap.am_b.end(), kept) == 1);
    }
    CHECK(std::count(ap.am_a.begin(), ap.am_a.end(), "null") == 1);
    CHECK(std::count(ap.am_a.begin(), ap.am_a.end(), "false") == 1);
}

TEST_CASE("concretize: simple return") {
    IdMapping m;
    m.get_or_assign(IdCategory::Var, "x");
    CHECK(concretize({"return", "VAR_0", ";"}, m) == "return x;\n");
}

TEST_CASE("concretize: unknown ID raises a named error") {
    IdMapping m;
    m.get_or_assign(IdCategory::Var, "x");
    try {
        concretize({"return", "VAR_9", ";"}, m);
        FAIL("expected ConcretizeError");
    } catch (const ConcretizeError& e) {
        CHECK(e.id == "VAR_9");
    }
}

TEST_CASE("round trip: concretize(abstract(m)) token-equals strip(tokenize(m))") {
    fixtures::GenOptions opt;
    opt.pairs = 60;
    opt.seed = 17;
    auto pairs = fixtures::generate_pairs(opt);
    std::vector<std::string> methods = fixtures::handwritten_methods();
    for (const auto& p : pairs) {
        methods.push_back(p.before.source_text);
        methods.push_back(p.after.source_text);
    }
    auto idioms = compute_idioms(pairs, 20);

    for (const auto& m : methods) {
        CAPTURE(m);
        IdMapping mapping;
        auto tokens = abstract_source(m, idioms, mapping);
        std::string rebuilt = concretize(tokens, mapping);
        CHECK(stripped_texts(rebuilt) == stripped_texts(m));
    }
}

TEST_CASE("shared identifiers get the same ID in both sides") {
    fixtures::GenOptions opt;
    opt.pairs = 120;
    opt.seed = 23;
    auto pairs = fixtures::generate_pairs(opt);
    auto idioms = compute_idioms(pairs, 25);

    for (const auto& pair : pairs) {
        auto ap = abstract_pair(pair, idioms);
        auto before_texts = stripped_texts(pair.before.source_text);
        auto after_texts = stripped_texts(pair.after.source_text);
        REQUIRE(before_texts.size() == ap.am_b.size());
        REQUIRE(after_texts.size() == ap.am_a.size());

        // concrete text -> abstract ID as observed positionally in am_b
        std::map<std::string, std::set<std::string>> b_ids;
        for (std::size_t i = 0; i < ap.am_b.size(); ++i) {
            if (is_abstract_id(ap.am_b[i])) b_ids[before_texts[i]].insert(ap.am_b[i]);
        }
        for (std::size_t i = 0; i < ap.am_a.size(); ++i) {
            if (!is_abstract_id(ap.am_a[i])) continue;
            auto it = b_ids.find(after_texts[i]);
            if (it != b_ids.end()) {
                CAPTURE(after_texts[i]);
                CHECK(it->second.count(ap.am_a[i]) == 1);
            }
        }
    }
}

TEST_CASE("ID suffixes are dense from zero per category") {
    fixtures::GenOptions opt;
    opt.pairs = 100;
    opt.seed = 29;
    auto pairs = fixtures::generate_pairs(opt);
    auto idioms = compute_idioms(pairs, 25);
    for (const auto& pair : pairs) {
        auto ap = abstract_pair(pair, idioms);
        std::map<int, std::set<int>> suffixes;  // category -> numbers seen
        auto collect = [&](const std::vector<std::string>& tokens) {
            for (const auto& t : tokens) {
                int number = -1;
                auto cat = parse_abstract_id(t, &number);
                if (cat) suffixes[int(*cat)].insert(number);
            }
        };
        collect(ap.am_b);
        collect(ap.am_a);
        for (const auto& [cat, numbers] : suffixes) {
            int expected = 0;
            for (int n : numbers) CHECK(n == expected++);
            CHECK(ap.mapping.count(static_cast<IdCategory>(cat)) ==
                  static_cast<int>(numbers.size()));
        }
    }
}

TEST_CASE("abstracted vocabulary stays inside the allowed closure") {
    fixtures::GenOptions opt;
    opt.pairs = 80;
    opt.seed = 41;
    auto pairs = fixtures::generate_pairs(opt);
    auto idioms = compute_idioms(pairs, 25);
    std::regex sep_or_op(R"([(){}\[\];,.@]|::|[-+*/%=<>!~?:&|^]+|\.\.\.)");
    for (const auto& pair : pairs) {
        auto ap = abstract_pair(pair, idioms);
        for (const auto& tokens : {ap.am_b, ap.am_a}) {
            for (const auto& t : tokens) {
                bool ok = is_java_keyword(t) || t == "true" || t == "false" || t == "null" ||
                          idioms.contains(t) || is_abstract_id(t) ||
                          std::regex_match(t, sep_or_op);
                CAPTURE(t);
                CHECK(ok);
            }
        }
    }
}

TEST_CASE("vocab_stats on the one-token rename pair") {
    // Oracle by hand: raw distinct stripped texts {int, a, b, ;} = 4;
    // abstracted {int, VAR_0, VAR_1, ;} = 4 (the shared mapping gives b a
    // fresh ID in am_a).
    std::vector<MethodPair> corpus = {pair_of("int a;", "int b;")};
    auto stats = vocab_stats(corpus, IdiomList{});
    CHECK(stats.raw_vocab_size == 4);
    CHECK(stats.abstracted_vocab_size == 4);
}

TEST_CASE("vocab_stats empty corpus") {
    auto stats = vocab_stats({}, IdiomList{});
    CHECK(stats.raw_vocab_size == 0);
    CHECK(stats.abstracted_vocab_size == 0);
}

TEST_CASE("vocab_stats shrinks substantially on a generated corpus") {
    fixtures::GenOptions opt;
    opt.pairs = 200;
    opt.seed = 3;
    auto pairs = fixtures::generate_pairs(opt);
    auto idioms = compute_idioms(pairs, 30);
    auto stats = vocab_stats(pairs, idioms);
    CHECK(stats.abstracted_vocab_size < stats.raw_vocab_size / 2);
}

TEST_CASE("abstracted pair records round-trip through json") {
    auto ap = abstract_pair(pair_of("void f(int a){this.a=a;}", "void f(int b){this.a=b;}"),
                            IdiomList{});
    ap.origin = PairOrigin{"chg", "X.java", "f", 3};
    auto back = abstracted_pair_from_json_line(abstracted_pair_to_json_line(ap));
    CHECK(back.am_b == ap.am_b);
    CHECK(back.am_a == ap.am_a);
    CHECK(back.origin.change_id == "chg");
    CHECK(back.mapping.lookup_backward("VAR_0") == ap.mapping.lookup_backward("VAR_0"));
    CHECK(back.mapping.lookup_backward("VAR_1") == ap.mapping.lookup_backward("VAR_1"));
}

TEST_CASE("render_source keeps for-loop semicolons inline and indents blocks") {
    std::vector<std::string> tokens = {"void", "f", "(", ")",   "{",  "for", "(",    "int", "i",
                                       "=",    "0", ";", "i",   "<",  "3",   ";",    "i",   "++",
                                       ")",    "{", "g", "(",   "i",  ")",   ";",    "}",   "}"};
    std::string out = render_source(tokens);
    CHECK(out.find("for ( int i = 0; i < 3; i ++ ) {") != std::string::npos);
    CHECK(out.find("\n    for") != std::string::npos);      // depth 1
    CHECK(out.find("\n        g(i);") != std::string::npos);  // depth 2
    CHECK(stripped_texts(out) == tokens);
}

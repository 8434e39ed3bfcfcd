#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "rlcongest/algos.hpp"
#include "rlcongest/graph.hpp"
#include "rlcongest/prng.hpp"
#include "rlcongest/wl.hpp"

using namespace rlc;

namespace {

AttributedGraph connected_er(int n, double p, Word seed) {
    for (Word s = seed;; ++s) {
        auto g = gen_erdos_renyi(n, p, s);
        if (is_connected(g)) return g;
    }
}

using TokenLists = std::vector<std::vector<Token>>;

// Seeded instance with <= L tokens per node and per destination.
TokenLists random_instance(const AttributedGraph& g, int L, Word seed, bool with_dst) {
    Prng rng(seed);
    TokenLists tokens(g.n);
    std::vector<int> dst_load(g.n, 0);
    Word tag = 0;
    for (int u = 0; u < g.n; ++u) {
        int k = static_cast<int>(rng.next_below(L + 1));
        for (int i = 0; i < k; ++i) {
            Token t;
            t.key = {static_cast<Word>(rng.next_below(2 * g.n))};
            t.tag = tag++;
            t.src = u;
            if (with_dst) {
                int d = static_cast<int>(rng.next_below(g.n));
                int tries = 0;
                while (dst_load[d] >= L && tries++ < 4 * g.n) d = (d + 1) % g.n;
                if (dst_load[d] >= L) continue;
                ++dst_load[d];
                t.dst = d;
            }
            tokens[u].push_back(t);
        }
    }
    return tokens;
}

std::multiset<std::tuple<WordList, Word, Word>> token_multiset(const TokenLists& lists) {
    std::multiset<std::tuple<WordList, Word, Word>> out;
    for (const auto& l : lists)
        for (const Token& t : l) out.insert({t.key, t.tag, t.src});
    return out;
}

}  // namespace

TEST_CASE("routing delivers every token to its destination (both backends)") {
    for (auto backend : {RouteBackend::Direct, RouteBackend::Tree}) {
        for (Word seed = 1; seed <= 10; ++seed) {
            auto g = assign_unique_ids(connected_er(16, 0.25, seed + 3));
            auto tokens = random_instance(g, 3, seed, true);
            auto res = expander_route(g, tokens, 4, 3, backend);
            // Dictionary oracle: tokens grouped by dst.
            TokenLists expect(g.n);
            for (const auto& l : tokens)
                for (const Token& t : l) expect[t.dst].push_back(t);
            for (int u = 0; u < g.n; ++u) {
                auto sortkey = [](const Token& a, const Token& b) { return a.tag < b.tag; };
                auto got = res.placement[u];
                auto want = expect[u];
                std::sort(got.begin(), got.end(), sortkey);
                std::sort(want.begin(), want.end(), sortkey);
                REQUIRE(got.size() == want.size());
                for (std::size_t i = 0; i < got.size(); ++i) {
                    CHECK(got[i].key == want[i].key);
                    CHECK(got[i].src == want[i].src);
                }
            }
            CHECK(token_multiset(res.placement) == token_multiset(tokens));
        }
    }
}

TEST_CASE("tokens already at their destinations move nothing") {
    auto g = assign_unique_ids(gen_family(Family::Cycle, 8));
    TokenLists tokens(8);
    for (int u = 0; u < 8; ++u) {
        Token t;
        t.key = {Word{u}};
        t.tag = u;
        t.src = u;
        t.dst = u;
        tokens[u].push_back(t);
    }
    auto direct = expander_route(g, tokens, 2, 1, RouteBackend::Direct);
    CHECK(direct.log.total_words == 0);
    for (int u = 0; u < 8; ++u) REQUIRE(direct.placement[u].size() == 1);
}

TEST_CASE("single token across a path takes one hop per round (direct backend)") {
    int n = 7;
    auto g = assign_unique_ids(gen_family(Family::Path, n));
    TokenLists tokens(n);
    Token t;
    t.key = {5};
    t.tag = 0;
    t.src = 0;
    t.dst = n - 1;
    tokens[0].push_back(t);
    int tw = static_cast<int>(t.key.size()) + 4 + 1;  // words + frame header
    auto res = expander_route(g, tokens, tw, 1, RouteBackend::Direct);
    REQUIRE(res.placement[n - 1].size() == 1);
    // One hop per round plus the final idle round that detects quiescence.
    CHECK(res.log.rounds <= n + 1);
    CHECK(res.log.rounds >= n - 1);
}

TEST_CASE("tree backend stays within its collect-broadcast bound") {
    for (Word seed = 1; seed <= 5; ++seed) {
        auto g = assign_unique_ids(connected_er(12, 0.3, seed + 21));
        auto tokens = random_instance(g, 2, seed, true);
        Word token_words = 0;
        int key_len = 1;
        for (const auto& l : tokens)
            for (const Token& t : l) token_words += static_cast<Word>(t.key.size()) + 4;
        auto tree = flood_bfs(g, 0, 1).tree;
        auto res = expander_route(g, tokens, 3, 2, RouteBackend::Tree);
        CHECK(res.log.rounds <= route_tree_round_bound(tree_depth(tree), token_words, 3));
        (void)key_len;
    }
}

TEST_CASE("bitonic comparator count matches the closed form") {
    CHECK(bitonic_comparator_count(8) == 24);
    CHECK(bitonic_comparator_count(2) == 1);
    CHECK(bitonic_comparator_count(4) == 6);
}

namespace {

// Definition check: node-ID order implies key order, at most L per node.
void check_sorted_placement(const AttributedGraph& g, const TokenLists& placement, int L) {
    WordList prev_key;
    bool have_prev = false;
    for (int u = 0; u < g.n; ++u) {
        CHECK(static_cast<int>(placement[u].size()) <= L);
        auto block = placement[u];
        std::sort(block.begin(), block.end(),
                  [](const Token& a, const Token& b) { return a.key < b.key; });
        for (const Token& t : block) {
            if (have_prev) CHECK(prev_key <= t.key);
            prev_key = t.key;
            have_prev = true;
        }
    }
}

}  // namespace

TEST_CASE("expander_sort produces key order over node ids and conserves tokens") {
    for (Word seed = 1; seed <= 8; ++seed) {
        auto g = assign_unique_ids(connected_er(12, 0.3, seed + 11));
        auto tokens = random_instance(g, 3, seed, false);
        auto res = expander_sort(g, tokens, 4, 3);
        check_sorted_placement(g, res.placement, 3);
        CHECK(token_multiset(res.placement) == token_multiset(tokens));
    }
}

TEST_CASE("sorting an already sorted instance keeps the placement") {
    int n = 8;
    auto g = assign_unique_ids(gen_family(Family::Cycle, n));
    TokenLists tokens(n);
    for (int u = 0; u < n; ++u) {
        Token t;
        t.key = {Word{10 * u}};
        t.tag = u;
        t.src = u;
        tokens[u].push_back(t);
    }
    auto res = expander_sort(g, tokens, 6, 1);
    for (int u = 0; u < n; ++u) {
        REQUIRE(res.placement[u].size() == 1);
        CHECK(res.placement[u][0].key == WordList{10 * u});
    }
}

TEST_CASE("reverse-sorted keys end up fully sorted") {
    int n = 8;
    auto g = assign_unique_ids(gen_family(Family::Complete, n));
    TokenLists tokens(n);
    for (int u = 0; u < n; ++u) {
        Token t;
        t.key = {Word{100 - u}};
        t.tag = u;
        t.src = u;
        tokens[u].push_back(t);
    }
    auto res = expander_sort(g, tokens, 5, 1);
    for (int u = 0; u < n; ++u) {
        REQUIRE(res.placement[u].size() == 1);
        CHECK(res.placement[u][0].key == WordList{100 - (n - 1 - u)});
    }
}

TEST_CASE("token_rank computes distinct-smaller-key counts") {
    // Hand case: keys (5,5,7) -> ranks (0,0,1).
    auto g = assign_unique_ids(gen_family(Family::Path, 3));
    TokenLists tokens(3);
    Word keys[] = {5, 5, 7};
    for (int u = 0; u < 3; ++u) {
        Token t;
        t.key = {keys[u]};
        t.tag = u;
        t.src = u;
        tokens[u].push_back(t);
    }
    auto res = token_rank(g, tokens, 4, 1);
    std::map<Word, Word> rank_by_tag;
    for (const auto& l : res.placement)
        for (const Token& t : l) rank_by_tag[t.tag] = t.rank;
    CHECK(rank_by_tag[0] == 0);
    CHECK(rank_by_tag[1] == 0);
    CHECK(rank_by_tag[2] == 1);

    // All keys equal -> all ranks 0.
    TokenLists same(3);
    for (int u = 0; u < 3; ++u) {
        Token t;
        t.key = {9};
        t.tag = u;
        t.src = u;
        same[u].push_back(t);
    }
    for (const auto& l : token_rank(g, same, 4, 1).placement)
        for (const Token& t : l) CHECK(t.rank == 0);
}

TEST_CASE("token_rank matches a dictionary oracle on random instances") {
    for (Word seed = 1; seed <= 8; ++seed) {
        auto g = assign_unique_ids(connected_er(10, 0.35, seed + 31));
        auto tokens = random_instance(g, 2, seed, false);
        auto res = token_rank(g, tokens, 4, 2);

        // Oracle: rank = number of distinct keys strictly smaller.
        std::set<WordList> distinct;
        for (const auto& l : tokens)
            for (const Token& t : l) distinct.insert(t.key);
        std::map<WordList, Word> expect;
        Word r = 0;
        for (const auto& k : distinct) expect[k] = r++;

        std::size_t total_in = 0, total_out = 0;
        for (const auto& l : tokens) total_in += l.size();
        for (int u = 0; u < g.n; ++u) {
            for (const Token& t : res.placement[u]) {
                ++total_out;
                CHECK(t.src == u);  // routed home
                CHECK(t.rank == expect[t.key]);
            }
        }
        CHECK(total_in == total_out);

        // Distinct keys get the permutation of 0..#distinct-1.
        std::set<Word> got_ranks;
        for (const auto& l : res.placement)
            for (const Token& t : l) got_ranks.insert(t.rank);
        CHECK(got_ranks.size() == distinct.size());
    }
}

TEST_CASE("wl_virtual_edges matches the reference oracle") {
    for (Word seed = 1; seed <= 10; ++seed) {
        auto base = connected_er(12, 0.3, seed + 51);
        auto g = add_virtual_edges(base, 0.6, seed);
        if (!is_connected(g)) continue;
        Prng rng(seed);
        ColorVector x(base.n);
        for (int i = 0; i < base.n; ++i) x[i] = rng.next_below(base.n);
        auto res = wl_virtual_edges(g, x, 4);
        CHECK(res.colors == wl_step_reference(base, x));
    }
}

TEST_CASE("wl_virtual_edges on a cycle overlay keeps uniform colors uniform") {
    auto c8 = gen_family(Family::Cycle, 8);
    auto g = add_virtual_edges(c8, 0.8, 5);
    REQUIRE(is_connected(g));
    auto res = wl_virtual_edges(g, ColorVector(8, 0), 4);
    CHECK(res.colors == ColorVector(8, 1));
}

TEST_CASE("wl_virtual_edges rounds shrink as width grows") {
    auto base = connected_er(24, 0.2, 77);
    auto g = add_virtual_edges(base, 0.6, 7);
    REQUIRE(is_connected(g));
    ColorVector x(base.n, 0);
    Word prev = -1;
    for (int w : {1, 2, 4, 8}) {
        auto res = wl_virtual_edges(g, x, w);
        CHECK(res.colors == wl_step_reference(base, x));
        if (prev >= 0) CHECK(res.log.rounds <= prev);
        prev = res.log.rounds;
    }
}

TEST_CASE("wl_virtual_edges requires overlay flags") {
    auto g = gen_family(Family::Cycle, 6);
    CHECK_THROWS_AS(wl_virtual_edges(g, ColorVector(6, 0), 2), ParameterError);
}

TEST_CASE("route validation rejects overloaded destinations") {
    auto g = assign_unique_ids(gen_family(Family::Cycle, 6));
    TokenLists tokens(6);
    for (int u = 0; u < 3; ++u) {
        Token t;
        t.key = {1};
        t.tag = u;
        t.src = u;
        t.dst = 5;
        tokens[u].push_back(t);
    }
    CHECK_THROWS_AS(expander_route(g, tokens, 2, 2, RouteBackend::Direct), ParameterError);
}

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

Word eccentricity(const AttributedGraph& g, int node) {
    Word e = 0;
    for (Word d : bfs_distances(g, node)) e = std::max(e, d);
    return e;
}

ColorVector random_colors(int n, Word seed) {
    Prng rng(seed);
    ColorVector x(n);
    for (int i = 0; i < n; ++i) x[i] = rng.next_below(std::max<Word>(1, n));
    return x;
}

}  // namespace

TEST_CASE("flood builds a BFS tree within ecc+1 rounds") {
    auto pn = gen_family(Family::Path, 9);
    auto res = flood_bfs(pn, 0, 1);
    REQUIRE(res.status == RunStatus::Completed);
    validate_tree(pn, res.tree);
    CHECK(tree_depth(res.tree) == 8);
    CHECK(res.log.rounds <= flood_round_bound(8));

    auto k5 = gen_family(Family::Complete, 5);
    auto rk = flood_bfs(k5, 2, 1);
    CHECK(tree_depth(rk.tree) == 1);
    CHECK(rk.log.rounds <= 2);

    auto c8 = gen_family(Family::Cycle, 8);
    auto rc = flood_bfs(c8, 3, 1);
    CHECK(tree_depth(rc.tree) == 4);

    for (Word seed = 1; seed <= 8; ++seed) {
        auto g = connected_er(20, 0.2, seed);
        auto r = flood_bfs(g, 0, 1);
        validate_tree(g, r.tree);
        auto dist = bfs_distances(g, 0);
        for (int u = 0; u < g.n; ++u) CHECK(r.tree.depth[u] == dist[u]);
        CHECK(r.log.rounds <= flood_round_bound(eccentricity(g, 0)));
    }
}

TEST_CASE("flood on a disconnected graph times out") {
    AttributedGraph g;
    g.n = 4;
    g.edges = {{0, 1}, {2, 3}};
    auto res = flood_bfs(g, 0, 1, 50);
    CHECK(res.status == RunStatus::Timeout);
}

TEST_CASE("upcast delivers every token within depth + M/w + 2 rounds") {
    // Star with tokens at the leaves.
    auto star = gen_family(Family::Star, 6);
    auto tree = flood_bfs(star, 0, 1).tree;
    std::vector<WordList> tokens(6);
    for (int u = 1; u < 6; ++u) tokens[u] = {100 + u};
    auto res = upcast(star, tree, tokens, 1);
    std::multiset<Word> got(res.tokens_at_root.begin(), res.tokens_at_root.end());
    CHECK(got == std::multiset<Word>{101, 102, 103, 104, 105});
    CHECK(res.log.rounds <= cast_round_bound(1, 5, 1));

    // No tokens at all.
    auto none = upcast(star, tree, std::vector<WordList>(6), 1);
    CHECK(none.tokens_at_root.empty());
    CHECK(none.log.rounds <= 2);

    // P_4 with 6 tokens spread arbitrarily, w = 2.
    auto p4 = gen_family(Family::Path, 4);
    auto tp = flood_bfs(p4, 0, 2).tree;
    std::vector<WordList> spread{{1}, {2, 3}, {}, {4, 5, 6}};
    auto rp = upcast(p4, tp, spread, 2);
    CHECK(rp.tokens_at_root.size() == 6);
    CHECK(rp.log.rounds <= cast_round_bound(3, 6, 2));

    for (Word seed = 1; seed <= 6; ++seed) {
        auto g = connected_er(18, 0.2, seed + 40);
        auto t = flood_bfs(g, 0, 2).tree;
        Prng rng(seed);
        std::vector<WordList> toks(g.n);
        Word total = 0;
        for (int u = 0; u < g.n; ++u) {
            int k = static_cast<int>(rng.next_below(4));
            for (int i = 0; i < k; ++i) toks[u].push_back(rng.next_below(1000));
            total += k;
        }
        auto r = upcast(g, t, toks, 2);
        CHECK(static_cast<Word>(r.tokens_at_root.size()) == total);
        CHECK(r.log.rounds <= cast_round_bound(tree_depth(t), total, 2));
    }
}

TEST_CASE("downcast delivers addressed messages within the same bound") {
    // One message to the root itself: no transmission at all.
    auto p4 = gen_family(Family::Path, 4);
    auto tree = flood_bfs(p4, 0, 1).tree;
    auto solo = downcast(p4, tree, {{0, 42}}, 1);
    CHECK(solo.delivered[0] == WordList{42});
    CHECK(solo.log.total_words == 0);

    // One message per node on a star with w = n-1.
    auto star = gen_family(Family::Star, 6);
    auto ts = flood_bfs(star, 0, 5).tree;
    std::vector<std::pair<int, Word>> msgs;
    for (int u = 1; u < 6; ++u) msgs.push_back({u, 10 * u});
    auto rs = downcast(star, ts, msgs, 5);
    for (int u = 1; u < 6; ++u) CHECK(rs.delivered[u] == WordList{10 * u});
    CHECK(rs.log.rounds <= cast_round_bound(1, 5, 5));

    // Mirror of the upcast P_4 case.
    std::vector<std::pair<int, Word>> six;
    for (int i = 0; i < 6; ++i) six.push_back({1 + (i % 3), 100 + i});
    auto rp = downcast(p4, tree, six, 2);
    CHECK(rp.delivered[1].size() == 2);
    CHECK(rp.delivered[2].size() == 2);
    CHECK(rp.delivered[3].size() == 2);
    CHECK(rp.log.rounds <= cast_round_bound(3, 6, 2));
}

TEST_CASE("wl_congest equals the reference oracle") {
    auto p3 = assign_unique_ids(gen_family(Family::Path, 3));
    for (int w : {1, 2, 4}) {
        auto res = wl_congest(p3, ColorVector(3, 0), w);
        CHECK(res.colors == ColorVector{1, 2, 1});
    }

    auto c6 = assign_unique_ids(gen_family(Family::Cycle, 6));
    auto rc = wl_congest(c6, ColorVector(6, 0), 1);
    CHECK(rc.colors == ColorVector(6, 1));
    CHECK(rc.log.rounds <= wl_congest_round_bound(3, 6, 1));

    for (Word seed = 1; seed <= 30; ++seed) {
        auto g = assign_unique_ids(connected_er(16, 0.25, seed * 3));
        auto x = random_colors(g.n, seed);
        auto expect = wl_step_reference(g, x);
        auto res = wl_congest(g, x, 1 + static_cast<int>(seed % 4));
        CHECK(res.colors == expect);
        CHECK(verify_wl_coloring(g, x, res.colors));
    }
}

TEST_CASE("wl_congest round bound holds across families and widths") {
    for (int w : {1, 2, 8}) {
        for (auto kind : {Family::Path, Family::Cycle, Family::Star, Family::Complete}) {
            auto g = assign_unique_ids(gen_family(kind, 12));
            auto m = metrics(g);
            auto res = wl_congest(g, ColorVector(12, 0), w);
            CHECK(res.colors == wl_step_reference(g, ColorVector(12, 0)));
            CHECK(res.log.rounds <= wl_congest_round_bound(m.diameter, m.m, w));
        }
    }
}

TEST_CASE("wl_congest requires connectivity and unique ids") {
    AttributedGraph g;
    g.n = 4;
    g.edges = {{0, 1}, {2, 3}};
    CHECK_THROWS_AS(wl_congest(assign_unique_ids(g), ColorVector(4, 0), 1), ParameterError);
    auto p3 = gen_family(Family::Path, 3);
    CHECK_THROWS_AS(wl_congest(p3, ColorVector(3, 0), 1), ParameterError);
}

TEST_CASE("global_compute reconstructs the graph at the root") {
    for (Word seed = 1; seed <= 5; ++seed) {
        auto g = assign_unique_ids(connected_er(14, 0.25, seed + 7));
        auto m = metrics(g);

        auto diam = global_compute(
            g, [](const AttributedGraph& gg) {
                return std::vector<Word>(gg.n, metrics(gg).diameter);
            },
            2);
        for (Word d : diam.results) CHECK(d == m.diameter);

        auto edge_count = global_compute(
            g, [](const AttributedGraph& gg) {
                return std::vector<Word>(gg.n, gg.m());
            },
            2);
        for (Word c : edge_count.results) CHECK(c == m.m);
    }
}

TEST_CASE("global_compute carries features and matches the wl oracle") {
    auto g = assign_unique_ids(connected_er(12, 0.3, 19));
    auto x = random_colors(g.n, 4);
    g.features.resize(g.n);
    for (int u = 0; u < g.n; ++u) g.features[u] = {x[u]};
    auto res = global_compute(
        g, [](const AttributedGraph& gg) {
            ColorVector colors(gg.n);
            for (int u = 0; u < gg.n; ++u) colors[u] = gg.features[u][0];
            return wl_step_reference(gg, colors);
        },
        2);
    CHECK(res.results == wl_step_reference(g, x));
}

TEST_CASE("wl_virtual_node matches the oracle and ignores the diameter") {
    auto p3 = add_virtual_node(gen_family(Family::Path, 3));
    auto res = wl_virtual_node(p3, ColorVector(3, 0), 1);
    CHECK(res.colors == ColorVector{1, 2, 1});

    // Star with w = n: two rounds of streaming at most.
    int n = 8;
    auto star = add_virtual_node(gen_family(Family::Star, n));
    auto rs = wl_virtual_node(star, ColorVector(n, 0), n);
    CHECK(rs.log.rounds <= wl_virtual_node_round_bound(n - 1, n));

    // Diameter independence: P_100 and C_100 differ by at most one round.
    auto p100 = add_virtual_node(gen_family(Family::Path, 100));
    auto c100 = add_virtual_node(gen_family(Family::Cycle, 100));
    auto rp = wl_virtual_node(p100, ColorVector(100, 0), 1);
    auto rc = wl_virtual_node(c100, ColorVector(100, 0), 1);
    CHECK(std::abs(rp.log.rounds - rc.log.rounds) <= 1);
    CHECK(rp.log.rounds <= wl_virtual_node_round_bound(2, 1));
    CHECK(rp.colors == wl_step_reference(gen_family(Family::Path, 100), ColorVector(100, 0)));
    CHECK(rc.colors == ColorVector(100, 1));

    for (Word seed = 1; seed <= 15; ++seed) {
        auto base = connected_er(14, 0.3, seed + 60);
        auto x = random_colors(base.n, seed);
        auto g = add_virtual_node(base);
        auto r = wl_virtual_node(g, x, 2);
        CHECK(r.colors == wl_step_reference(base, x));
        Word delta = metrics(base).max_degree;
        CHECK(r.log.rounds <= wl_virtual_node_round_bound(delta, 2));
    }
}

TEST_CASE("wl_virtual_node rejects graphs without the marker") {
    auto g = gen_family(Family::Path, 4);
    CHECK_THROWS_AS(wl_virtual_node(g, ColorVector(3, 0), 1), ParameterError);
}

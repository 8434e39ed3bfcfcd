#include <doctest.h>

#include <cmath>
#include <set>

#include "rlcongest/graph.hpp"
#include "rlcongest/prng.hpp"

using namespace rlc;

TEST_CASE("family generators match their definitions") {
    auto p4 = gen_family(Family::Path, 4);
    validate_graph(p4);
    CHECK(p4.n == 4);
    CHECK(p4.m() == 3);
    CHECK(metrics(p4).diameter == 3);

    auto c6 = gen_family(Family::Cycle, 6);
    validate_graph(c6);
    CHECK(c6.m() == 6);
    CHECK(metrics(c6).diameter == 3);

    auto k3 = gen_family(Family::Complete, 3);
    CHECK(k3.m() == 3);
    CHECK(metrics(k3).diameter == 1);

    auto star5 = gen_family(Family::Star, 5);
    validate_graph(star5);
    CHECK(star5.m() == 4);
    CHECK(metrics(star5).max_degree == 4);

    CHECK_THROWS_AS(gen_family(Family::Path, 1), ParameterError);
    CHECK_THROWS_AS(gen_family(Family::Cycle, 2), ParameterError);
}

TEST_CASE("diameter formulas for paths and cycles") {
    for (int n : {4, 7, 12}) {
        CHECK(metrics(gen_family(Family::Path, n)).diameter == n - 1);
        CHECK(metrics(gen_family(Family::Cycle, n)).diameter == n / 2);
    }
}

TEST_CASE("erdos-renyi extremes and determinism") {
    auto empty = gen_erdos_renyi(4, 0.0, 7);
    CHECK(empty.m() == 0);
    auto full = gen_erdos_renyi(4, 1.0, 7);
    CHECK(full.m() == 6);

    auto a = gen_erdos_renyi(30, 0.2, 42);
    auto b = gen_erdos_renyi(30, 0.2, 42);
    CHECK(a.edges == b.edges);
    auto c = gen_erdos_renyi(30, 0.2, 43);
    CHECK(a.edges != c.edges);
}

TEST_CASE("erdos-renyi edge counts follow binomial statistics") {
    // Oracle: mean of Binomial(C(50,2), 0.1) = 122.5, sd = sqrt(1225*0.1*0.9).
    const double pairs = 1225.0, p = 0.1;
    const double mean = pairs * p;
    const double sd = std::sqrt(pairs * p * (1 - p));
    double total = 0;
    const int trials = 100;
    for (Word seed = 1; seed <= trials; ++seed) total += gen_erdos_renyi(50, p, seed).m();
    double sample_mean = total / trials;
    CHECK(std::abs(sample_mean - mean) < 3.0 * sd / std::sqrt(trials));
}

TEST_CASE("metrics eigenvalues match closed forms") {
    // Complete graph: lambda2 = n/(n-1); cycle: 1 - cos(2 pi / n).
    for (int n : {3, 5, 8}) {
        auto km = metrics(gen_family(Family::Complete, n));
        CHECK(km.lambda2 == doctest::Approx(static_cast<double>(n) / (n - 1)).epsilon(1e-9));
        auto cm = metrics(gen_family(Family::Cycle, n));
        CHECK(cm.lambda2 == doctest::Approx(1.0 - std::cos(2.0 * M_PI / n)).epsilon(1e-9));
        CHECK(cm.conductance_lb == doctest::Approx(cm.lambda2 / 2));
    }
}

TEST_CASE("disconnected graphs get the infinite-diameter sentinel and lambda2 = 0") {
    AttributedGraph g;
    g.n = 4;
    g.edges = {{0, 1}, {2, 3}};
    auto m = metrics(g);
    CHECK(m.diameter == kInfiniteDiameter);
    CHECK(m.lambda2 == 0.0);
}

TEST_CASE("virtual node connects to everything and caps the diameter at 2") {
    auto p3 = gen_family(Family::Path, 3);
    auto g = add_virtual_node(p3);
    validate_graph(g);
    CHECK(g.n == 4);
    CHECK(g.m() == 6);
    CHECK(g.virtual_node == 3);
    CHECK(metrics(g).diameter <= 2);
    CHECK(g.features[3].back() == 1);
    CHECK(g.features[0].back() == 0);

    AttributedGraph empty;
    empty.n = 5;
    auto star = add_virtual_node(empty);
    CHECK(star.m() == 5);
    CHECK(metrics(star).diameter <= 2);

    auto k5 = add_virtual_node(gen_family(Family::Complete, 4));
    CHECK(k5.m() == 10);  // K_5

    for (int n : {2, 6, 11}) {
        auto any = gen_erdos_renyi(n, 0.3, n);
        CHECK(metrics(add_virtual_node(any)).diameter <= 2);
    }
}

TEST_CASE("virtual edges overlay keeps originals and flags additions") {
    auto g = gen_family(Family::Cycle, 12);
    auto over = add_virtual_edges(g, 0.5, 3);
    validate_graph(over);
    std::set<std::pair<int, int>> out(over.edges.begin(), over.edges.end());
    for (auto e : g.edges) CHECK(out.count(e) == 1);
    int flagged = 0;
    for (std::size_t i = 0; i < over.edges.size(); ++i)
        if (over.edge_virtual[i]) {
            ++flagged;
            CHECK(!std::binary_search(g.edges.begin(), g.edges.end(), over.edges[i]));
        }
    CHECK(flagged == over.m() - g.m());
    CHECK_THROWS_AS(add_virtual_edges(g, 0.0, 1), ParameterError);
}

TEST_CASE("virtual edges with p capped at 1 yield the complete union") {
    AttributedGraph g;
    g.n = 3;  // (0.5 + delta) ln 3 / 3 >= 1 for large delta
    auto over = add_virtual_edges(g, 5.0, 1);
    CHECK(over.m() == 3);
}

TEST_CASE("virtual edge overlay on the empty graph is connected with positive conductance bound") {
    AttributedGraph g;
    g.n = 256;
    auto over = add_virtual_edges(g, 0.5, 3);
    auto m = metrics(over);
    CHECK(m.conductance_lb > 0.0);
}

TEST_CASE("assign_unique_ids is the identity labeling and idempotent") {
    auto g = gen_erdos_renyi(9, 0.4, 5);
    auto labeled = assign_unique_ids(g);
    for (int u = 0; u < labeled.n; ++u) CHECK(labeled.labels[u] == u);
    auto twice = assign_unique_ids(labeled);
    CHECK(twice.labels == labeled.labels);

    AttributedGraph single;
    single.n = 1;
    CHECK(assign_unique_ids(single).labels == std::vector<Word>{0});
}

TEST_CASE("k-tuple graph structure") {
    auto g = gen_erdos_renyi(5, 0.4, 11);
    g.features.assign(5, {7});
    auto t2 = build_ktuple_graph(g, 2);
    validate_graph(t2);
    CHECK(t2.n == 25);
    // Every tuple node has exactly k(n-1) Hamming-1 neighbors.
    auto deg = degrees(t2);
    for (Word d : deg) CHECK(d == 2 * (5 - 1));
    CHECK(t2.features[0].size() == 2);

    // k = 1: all pairs differing in the single coordinate, i.e. K_n.
    auto t1 = build_ktuple_graph(g, 1);
    CHECK(t1.n == 5);
    CHECK(t1.m() == 10);

    CHECK_THROWS_AS(build_ktuple_graph(g, 9), ResourceError);
}

TEST_CASE("largest component extraction") {
    AttributedGraph g;
    g.n = 7;
    g.edges = {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {3, 5}, {5, 6}};
    auto big = largest_component(g);
    CHECK(big.n == 4);
    CHECK(big.m() == 4);
    CHECK(is_connected(big));
}

TEST_CASE("prng streams are independent and stable") {
    Prng a(1), b(1), c(2);
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.next_u64() != c.next_u64());
    Prng d(5);
    for (int i = 0; i < 1000; ++i) {
        double x = d.next_double();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
}

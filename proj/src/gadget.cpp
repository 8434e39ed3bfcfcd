#include "rlcongest/gadget.hpp"

#include <algorithm>

#include "rlcongest/algos.hpp"
#include "rlcongest/prng.hpp"

namespace rlc {

std::pair<int, int> gadget_bit_to_pair(int k, int n) {
    return {(k + n - 1) / n, (k - 1) % n + 1};
}

int gadget_pair_to_bit(std::pair<int, int> ij, int n) { return (ij.first - 1) * n + ij.second; }

void validate_gadget_spec(const GadgetSpec& spec) {
    if (spec.n < 1) throw ParameterError("gadget n must be >= 1");
    long long n = spec.n;
    if (spec.m < n || static_cast<long long>(spec.m) > n * n)
        throw ParameterError("gadget m must lie in [n, n^2]");
    if (static_cast<int>(spec.a.size()) != spec.m || static_cast<int>(spec.b.size()) != spec.m)
        throw ParameterError("bitstring length != m");
    if (spec.path_len < 0) throw ParameterError("negative path_len");
}

std::pair<long long, long long> gadget_expected_counts(const GadgetSpec& spec) {
    long long q = (spec.m + spec.n - 1) / spec.n;
    long long nodes = 4LL * spec.n + 2 * q + 2 + spec.path_len;
    long long edges = 2LL * (2 * spec.n - 1) + 2 * q + 1 + 2LL * spec.m + spec.path_len;
    return {nodes, edges};
}

GadgetGraph build_eq_gadget(const GadgetSpec& spec) {
    validate_gadget_spec(spec);
    int n = spec.n;
    int q = (spec.m + n - 1) / n;

    GadgetGraph gg;
    auto add_node = [&](GadgetRole role, Word color) {
        gg.roles.push_back(role);
        gg.initial_colors.push_back(color);
        return gg.graph.n++;
    };

    int xa = add_node(GadgetRole::XA, 0);
    int xb = add_node(GadgetRole::XB, 0);
    std::vector<int> ua(n), ub(n), va(n), vb(n);
    for (int j = 0; j < n; ++j) ua[j] = add_node(GadgetRole::UA, j + 1);
    for (int j = 0; j < n; ++j) va[j] = add_node(GadgetRole::VA, n + j + 1);
    for (int i = 0; i < q; ++i) gg.w_a.push_back(add_node(GadgetRole::WA, 2 * n + i + 1));
    for (int j = 0; j < n; ++j) ub[j] = add_node(GadgetRole::UB, j + 1);
    for (int j = 0; j < n; ++j) vb[j] = add_node(GadgetRole::VB, n + j + 1);
    for (int i = 0; i < q; ++i) gg.w_b.push_back(add_node(GadgetRole::WB, 2 * n + i + 1));

    auto& edges = gg.graph.edges;
    auto add_edge = [&](int u, int v) { edges.emplace_back(std::min(u, v), std::max(u, v)); };

    if (spec.path_len == 0) {
        add_edge(xa, xb);
    } else {
        int prev = xa;
        for (int i = 0; i < spec.path_len; ++i) {
            int p = add_node(GadgetRole::PathNode, 2 * n + q + 1);
            add_edge(prev, p);
            prev = p;
        }
        add_edge(prev, xb);
    }
    for (int i = 0; i < q; ++i) {
        add_edge(xa, gg.w_a[i]);
        add_edge(xb, gg.w_b[i]);
    }
    for (int j = 0; j + 1 < n; ++j) {
        add_edge(ua[j], ua[j + 1]);
        add_edge(va[j], va[j + 1]);
        add_edge(ub[j], ub[j + 1]);
        add_edge(vb[j], vb[j + 1]);
    }
    add_edge(ua[n - 1], va[n - 1]);
    add_edge(ub[n - 1], vb[n - 1]);

    for (int k = 1; k <= spec.m; ++k) {
        auto [i, j] = gadget_bit_to_pair(k, n);
        add_edge(gg.w_a[i - 1], spec.a[k - 1] ? va[j - 1] : ua[j - 1]);
        add_edge(gg.w_b[i - 1], spec.b[k - 1] ? vb[j - 1] : ub[j - 1]);
    }

    std::sort(edges.begin(), edges.end());
    validate_graph(gg.graph);
    return gg;
}

bool verify_gadget_property(const GadgetGraph& gg, const ColorVector& y) {
    if (!verify_wl_coloring(gg.graph, gg.initial_colors, y))
        throw ParameterError("y is not a valid WL coloring for the gadget");
    for (std::size_t i = 0; i < gg.w_a.size(); ++i)
        if (y[gg.w_a[i]] != y[gg.w_b[i]]) return false;
    return true;
}

std::vector<GadgetScanRow> gadget_round_scan(int n, const std::vector<int>& m_list,
                                             const std::vector<int>& w_list, Word seed,
                                             int path_len) {
    std::vector<GadgetScanRow> rows;
    Prng rng(seed);
    for (int m : m_list) {
        GadgetSpec spec;
        spec.n = n;
        spec.m = m;
        spec.path_len = path_len;
        spec.a.resize(m);
        spec.b.resize(m);
        for (int k = 0; k < m; ++k) spec.a[k] = static_cast<char>(rng.next_below(2));
        for (int k = 0; k < m; ++k) spec.b[k] = static_cast<char>(rng.next_below(2));
        GadgetGraph gg = build_eq_gadget(spec);
        AttributedGraph labeled = assign_unique_ids(gg.graph);
        GraphMetrics gm = metrics(labeled);
        for (int w : w_list) {
            auto res = wl_congest(labeled, gg.initial_colors, w);
            GadgetScanRow row;
            row.n = n;
            row.m = m;
            row.w = w;
            row.diameter = gm.diameter;
            row.rounds = res.log.rounds;
            row.total_words = res.log.total_words;
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace rlc

#include "rlcongest/wl.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace rlc {

void validate_colors(const AttributedGraph& g, const ColorVector& x) {
    if (static_cast<int>(x.size()) != g.n)
        throw ParameterError("color vector length != node count");
    Word cap = static_cast<Word>(g.n) * g.n;
    for (Word c : x)
        if (c < 0 || (g.n > 0 && c >= std::max<Word>(cap, 1)))
            throw ParameterError("color outside [0, n^2)");
}

std::vector<WlType> wl_types(const AttributedGraph& g, const ColorVector& x) {
    auto adj = adjacency(g, /*original_only=*/true);
    std::vector<WlType> types(g.n);
    for (int u = 0; u < g.n; ++u) {
        types[u].own = x[u];
        types[u].neigh.reserve(adj[u].size());
        for (int v : adj[u]) types[u].neigh.push_back(x[v]);
        std::sort(types[u].neigh.begin(), types[u].neigh.end());
    }
    return types;
}

namespace {

// Dense 1-based ranks of arbitrary comparable keys.
template <class Key>
ColorVector dense_ranks(const std::vector<Key>& keys) {
    std::vector<int> order(keys.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return keys[a] < keys[b]; });
    ColorVector ranks(keys.size());
    Word rank = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i == 0 || keys[order[i - 1]] < keys[order[i]]) ++rank;
        ranks[order[i]] = rank;
    }
    return ranks;
}

}  // namespace

ColorVector wl_step_reference(const AttributedGraph& g, const ColorVector& x) {
    validate_colors(g, x);
    return dense_ranks(wl_types(g, x));
}

bool verify_wl_coloring(const AttributedGraph& g, const ColorVector& x, const ColorVector& y) {
    validate_colors(g, x);
    validate_colors(g, y);
    auto types = wl_types(g, x);
    // The biconditional holds iff type -> y is well defined and injective.
    std::map<WlType, Word> type_color;
    std::map<Word, const WlType*> color_type;
    for (int u = 0; u < g.n; ++u) {
        auto [it, fresh] = type_color.try_emplace(types[u], y[u]);
        if (!fresh && it->second != y[u]) return false;
        auto [jt, fresh2] = color_type.try_emplace(y[u], &types[u]);
        if (!fresh2 && !(*jt->second == types[u])) return false;
    }
    return true;
}

std::vector<int> partition_ids(const ColorVector& x) {
    std::vector<int> ids(x.size(), -1);
    std::map<Word, int> seen;
    int next = 0;
    for (std::size_t u = 0; u < x.size(); ++u) {
        auto [it, fresh] = seen.try_emplace(x[u], next);
        if (fresh) ++next;
        ids[u] = it->second;
    }
    return ids;
}

std::pair<ColorVector, int> wl_refine_stable(const AttributedGraph& g, const ColorVector& x) {
    ColorVector current = x;
    int iterations = 0;
    while (true) {
        ColorVector next = wl_step_reference(g, current);
        ++iterations;
        if (partition_ids(next) == partition_ids(current)) return {next, iterations};
        current = std::move(next);
    }
}

namespace {

struct TupleSpace {
    int n = 0;
    int k = 0;
    long long count = 1;
    std::vector<long long> stride;

    TupleSpace(const AttributedGraph& g, int k_, long long budget) : n(g.n), k(k_) {
        if (k < 1) throw ParameterError("k must be >= 1");
        stride.resize(k);
        for (int i = k - 1; i >= 0; --i) {
            stride[i] = count;
            count *= n;
            if (count > budget) throw ResourceError("tuple space exceeds budget");
        }
    }

    int coord(long long t, int i) const { return static_cast<int>((t / stride[i]) % n); }
    long long substitute(long long t, int i, int v) const {
        return t + (static_cast<long long>(v) - coord(t, i)) * stride[i];
    }
};

void validate_tuple_colors(const TupleSpace& ts, const TupleColorVector& x) {
    if (static_cast<long long>(x.size()) != ts.count)
        throw ParameterError("tuple color vector length != n^k");
}

}  // namespace

TupleColorVector ktuple_initial_colors(const AttributedGraph& g, int k, const ColorVector& base,
                                       long long tuple_budget) {
    validate_colors(g, base);
    TupleSpace ts(g, k, tuple_budget);
    std::vector<std::vector<char>> adj(g.n, std::vector<char>(g.n, 0));
    for (auto [u, v] : g.edges) {
        adj[u][v] = 1;
        adj[v][u] = 1;
    }
    std::vector<WordList> signatures(ts.count);
    for (long long t = 0; t < ts.count; ++t) {
        WordList sig;
        sig.reserve(static_cast<std::size_t>(k) + static_cast<std::size_t>(k) * k);
        for (int i = 0; i < k; ++i) sig.push_back(base[ts.coord(t, i)]);
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) {
                int a = ts.coord(t, i), b = ts.coord(t, j);
                sig.push_back(a == b ? 2 : adj[a][b]);
            }
        signatures[t] = std::move(sig);
    }
    return dense_ranks(signatures);
}

TupleColorVector kwl_step(const AttributedGraph& g, int k, const TupleColorVector& x,
                          long long tuple_budget) {
    TupleSpace ts(g, k, tuple_budget);
    validate_tuple_colors(ts, x);
    std::vector<WordList> keys(ts.count);
    for (long long t = 0; t < ts.count; ++t) {
        WordList key;
        key.reserve(1 + static_cast<std::size_t>(k) * g.n);
        key.push_back(x[t]);
        for (int i = 0; i < k; ++i) {
            WordList mset(g.n);
            for (int v = 0; v < g.n; ++v) mset[v] = x[ts.substitute(t, i, v)];
            std::sort(mset.begin(), mset.end());
            key.insert(key.end(), mset.begin(), mset.end());
        }
        keys[t] = std::move(key);
    }
    return dense_ranks(keys);
}

TupleColorVector kfwl_step(const AttributedGraph& g, int k, const TupleColorVector& x,
                           long long tuple_budget) {
    TupleSpace ts(g, k, tuple_budget);
    validate_tuple_colors(ts, x);
    std::vector<WordList> keys(ts.count);
    for (long long t = 0; t < ts.count; ++t) {
        std::vector<WordList> rows(g.n, WordList(k));
        for (int w = 0; w < g.n; ++w)
            for (int i = 0; i < k; ++i) rows[w][i] = x[ts.substitute(t, i, w)];
        std::sort(rows.begin(), rows.end());
        WordList key;
        key.reserve(1 + static_cast<std::size_t>(k) * g.n);
        key.push_back(x[t]);
        for (const auto& row : rows) key.insert(key.end(), row.begin(), row.end());
        keys[t] = std::move(key);
    }
    return dense_ranks(keys);
}

ColorVector gdwl_step(const AttributedGraph& g, const DistanceMatrix& dist, const ColorVector& x) {
    validate_colors(g, x);
    if (dist.n != g.n) throw ParameterError("distance matrix size != node count");
    std::vector<std::vector<std::pair<double, Word>>> keys(g.n);
    for (int u = 0; u < g.n; ++u) {
        auto& key = keys[u];
        key.reserve(g.n);
        for (int v = 0; v < g.n; ++v) key.emplace_back(dist(u, v), x[v]);
        std::sort(key.begin(), key.end());
    }
    return dense_ranks(keys);
}

DistanceMatrix spd_matrix(const AttributedGraph& g) {
    if (!is_connected(g)) throw ParameterError("spd_matrix requires a connected graph");
    DistanceMatrix out;
    out.n = g.n;
    out.entries.assign(static_cast<std::size_t>(g.n) * g.n, 0.0);
    for (int s = 0; s < g.n; ++s) {
        auto dist = bfs_distances(g, s);
        for (int v = 0; v < g.n; ++v) out(s, v) = static_cast<double>(dist[v]);
    }
    return out;
}

}  // namespace rlc

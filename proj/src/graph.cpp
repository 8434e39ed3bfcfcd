#include "rlcongest/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>

#include "rlcongest/prng.hpp"

namespace rlc {

Family family_from_string(const std::string& name) {
    if (name == "path") return Family::Path;
    if (name == "cycle") return Family::Cycle;
    if (name == "star") return Family::Star;
    if (name == "complete") return Family::Complete;
    throw ParameterError("unknown graph family: " + name);
}

std::string to_string(Family f) {
    switch (f) {
        case Family::Path: return "path";
        case Family::Cycle: return "cycle";
        case Family::Star: return "star";
        case Family::Complete: return "complete";
    }
    return "?";
}

void validate_graph(const AttributedGraph& g) {
    if (g.n < 0) throw ParameterError("negative node count");
    for (auto [u, v] : g.edges) {
        if (u < 0 || v < 0 || u >= g.n || v >= g.n)
            throw ParameterError("edge endpoint out of range");
        if (u >= v) throw ParameterError("edges must be stored as (u, v) with u < v");
    }
    if (!std::is_sorted(g.edges.begin(), g.edges.end()))
        throw ParameterError("edge list not sorted");
    if (std::adjacent_find(g.edges.begin(), g.edges.end()) != g.edges.end())
        throw ParameterError("duplicate edge");
    if (!g.features.empty()) {
        if (static_cast<int>(g.features.size()) != g.n)
            throw ParameterError("feature count != node count");
        for (const auto& f : g.features)
            if (f.size() != g.features.front().size())
                throw ParameterError("unequal feature lengths");
    }
    if (!g.labels.empty() && static_cast<int>(g.labels.size()) != g.n)
        throw ParameterError("label count != node count");
    if (!g.edge_virtual.empty() && g.edge_virtual.size() != g.edges.size())
        throw ParameterError("edge flag count != edge count");
    if (g.virtual_node >= g.n) throw ParameterError("virtual node out of range");
}

std::vector<std::vector<int>> adjacency(const AttributedGraph& g, bool original_only) {
    std::vector<std::vector<int>> adj(g.n);
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        if (original_only && g.has_edge_flags() && g.edge_virtual[i]) continue;
        auto [u, v] = g.edges[i];
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());
    return adj;
}

std::vector<Word> degrees(const AttributedGraph& g) {
    std::vector<Word> deg(g.n, 0);
    for (auto [u, v] : g.edges) {
        ++deg[u];
        ++deg[v];
    }
    return deg;
}

std::vector<Word> bfs_distances(const AttributedGraph& g, int source) {
    auto adj = adjacency(g);
    std::vector<Word> dist(g.n, kInfiniteDiameter);
    std::deque<int> queue;
    dist[source] = 0;
    queue.push_back(source);
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int v : adj[u])
            if (dist[v] == kInfiniteDiameter) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
    }
    return dist;
}

bool is_connected(const AttributedGraph& g) {
    if (g.n == 0) return true;
    auto dist = bfs_distances(g, 0);
    return std::none_of(dist.begin(), dist.end(),
                        [](Word d) { return d == kInfiniteDiameter; });
}

AttributedGraph largest_component(const AttributedGraph& g) {
    std::vector<int> comp(g.n, -1);
    auto adj = adjacency(g);
    int ncomp = 0;
    for (int s = 0; s < g.n; ++s) {
        if (comp[s] >= 0) continue;
        comp[s] = ncomp;
        std::deque<int> queue{s};
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int v : adj[u])
                if (comp[v] < 0) {
                    comp[v] = ncomp;
                    queue.push_back(v);
                }
        }
        ++ncomp;
    }
    std::vector<int> size(ncomp, 0);
    for (int u = 0; u < g.n; ++u) ++size[comp[u]];
    int best = static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());

    std::vector<int> newid(g.n, -1);
    AttributedGraph out;
    for (int u = 0; u < g.n; ++u)
        if (comp[u] == best) newid[u] = out.n++;
    for (auto [u, v] : g.edges)
        if (newid[u] >= 0 && newid[v] >= 0)
            out.edges.emplace_back(newid[u], newid[v]);
    std::sort(out.edges.begin(), out.edges.end());
    if (!g.features.empty()) {
        out.features.resize(out.n);
        for (int u = 0; u < g.n; ++u)
            if (newid[u] >= 0) out.features[newid[u]] = g.features[u];
    }
    if (!g.labels.empty()) {
        out.labels.resize(out.n);
        for (int u = 0; u < g.n; ++u)
            if (newid[u] >= 0) out.labels[newid[u]] = g.labels[u];
    }
    return out;
}

AttributedGraph gen_family(Family kind, int n) {
    int min_n = kind == Family::Cycle ? 3 : 2;
    if (n < min_n)
        throw ParameterError("n too small for family " + to_string(kind));
    AttributedGraph g;
    g.n = n;
    switch (kind) {
        case Family::Path:
            for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
            break;
        case Family::Cycle:
            for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
            g.edges.emplace_back(0, n - 1);
            break;
        case Family::Star:
            for (int i = 1; i < n; ++i) g.edges.emplace_back(0, i);
            break;
        case Family::Complete:
            for (int u = 0; u < n; ++u)
                for (int v = u + 1; v < n; ++v) g.edges.emplace_back(u, v);
            break;
    }
    std::sort(g.edges.begin(), g.edges.end());
    return g;
}

AttributedGraph gen_erdos_renyi(int n, double p, Word seed) {
    if (n < 0) throw ParameterError("negative n");
    if (p < 0.0 || p > 1.0) throw ParameterError("p outside [0, 1]");
    AttributedGraph g;
    g.n = n;
    Prng rng(seed);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (rng.next_double() < p) g.edges.emplace_back(u, v);
    return g;
}

GraphMetrics metrics(const AttributedGraph& g) {
    GraphMetrics out;
    out.m = static_cast<Word>(g.edges.size());
    auto deg = degrees(g);
    if (g.n > 0) {
        out.max_degree = *std::max_element(deg.begin(), deg.end());
        out.min_degree = *std::min_element(deg.begin(), deg.end());
    }

    Word diameter = 0;
    bool connected = true;
    for (int s = 0; s < g.n && connected; ++s) {
        auto dist = bfs_distances(g, s);
        for (Word d : dist) {
            if (d == kInfiniteDiameter) {
                connected = false;
                break;
            }
            diameter = std::max(diameter, d);
        }
    }
    out.diameter = connected ? diameter : kInfiniteDiameter;

    if (g.n > 0) {
        // Normalized Laplacian I - D^{-1/2} A D^{-1/2}; isolated nodes keep a zero row.
        Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(g.n, g.n);
        for (int u = 0; u < g.n; ++u) lap(u, u) = deg[u] > 0 ? 1.0 : 0.0;
        for (auto [u, v] : g.edges) {
            double w = -1.0 / std::sqrt(static_cast<double>(deg[u]) * static_cast<double>(deg[v]));
            lap(u, v) = w;
            lap(v, u) = w;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap, Eigen::EigenvaluesOnly);
        if (g.n >= 2) out.lambda2 = std::max(0.0, solver.eigenvalues()(1));
    }
    if (!connected) out.lambda2 = 0.0;
    out.conductance_lb = out.lambda2 / 2.0;
    return out;
}

AttributedGraph add_virtual_node(const AttributedGraph& g) {
    AttributedGraph out = g;
    int vn = g.n;
    out.n = g.n + 1;
    out.virtual_node = vn;
    for (int u = 0; u < g.n; ++u) out.edges.emplace_back(u, vn);
    std::sort(out.edges.begin(), out.edges.end());
    if (g.has_edge_flags()) {
        std::set<std::pair<int, int>> overlay;
        for (std::size_t i = 0; i < g.edges.size(); ++i)
            if (g.edge_virtual[i]) overlay.insert(g.edges[i]);
        out.edge_virtual.assign(out.edges.size(), 0);
        for (std::size_t i = 0; i < out.edges.size(); ++i)
            if (overlay.count(out.edges[i])) out.edge_virtual[i] = 1;
    }
    // Marker column: 1 on the virtual node, 0 elsewhere.
    std::size_t base_width = g.features.empty() ? 0 : g.features.front().size();
    out.features.assign(out.n, std::vector<Word>(base_width + 1, 0));
    for (int u = 0; u < g.n; ++u) {
        if (!g.features.empty())
            std::copy(g.features[u].begin(), g.features[u].end(), out.features[u].begin());
    }
    out.features[vn][base_width] = 1;
    if (!g.labels.empty()) out.labels.push_back(vn);
    return out;
}

AttributedGraph add_virtual_edges(const AttributedGraph& g, double delta, Word seed) {
    if (delta <= 0.0) throw ParameterError("delta must be positive");
    AttributedGraph out = g;
    double p = g.n > 1 ? (0.5 + delta) * std::log(static_cast<double>(g.n)) / g.n : 1.0;
    p = std::min(p, 1.0);

    std::set<std::pair<int, int>> original(g.edges.begin(), g.edges.end());
    Prng rng(seed);
    std::vector<std::pair<int, int>> overlay;
    for (int u = 0; u < g.n; ++u)
        for (int v = u + 1; v < g.n; ++v) {
            bool draw = rng.next_double() < p;
            if (draw && !original.count({u, v})) overlay.emplace_back(u, v);
        }

    out.edges.insert(out.edges.end(), overlay.begin(), overlay.end());
    std::sort(out.edges.begin(), out.edges.end());
    out.edge_virtual.assign(out.edges.size(), 0);
    for (std::size_t i = 0; i < out.edges.size(); ++i)
        if (!original.count(out.edges[i])) out.edge_virtual[i] = 1;
    return out;
}

AttributedGraph assign_unique_ids(const AttributedGraph& g) {
    AttributedGraph out = g;
    out.labels.resize(g.n);
    std::iota(out.labels.begin(), out.labels.end(), Word{0});
    return out;
}

AttributedGraph build_ktuple_graph(const AttributedGraph& g, int k, long long tuple_budget) {
    if (k < 1) throw ParameterError("k must be >= 1");
    long long tuples = 1;
    for (int i = 0; i < k; ++i) {
        tuples *= g.n;
        if (tuples > tuple_budget)
            throw ResourceError("k-tuple graph exceeds tuple budget");
    }

    AttributedGraph out;
    out.n = static_cast<int>(tuples);
    // Tuple index is mixed-radix base n, coordinate 0 most significant.
    long long stride_last = 1;
    std::vector<long long> stride(k);
    for (int i = k - 1; i >= 0; --i) {
        stride[i] = stride_last;
        stride_last *= g.n;
    }
    for (long long t = 0; t < tuples; ++t) {
        for (int i = 0; i < k; ++i) {
            int coord = static_cast<int>((t / stride[i]) % g.n);
            // Substitute coordinate i with every larger node value; smaller
            // substitutions are emitted by the partner tuple.
            for (int v = coord + 1; v < g.n; ++v) {
                long long other = t + (static_cast<long long>(v) - coord) * stride[i];
                out.edges.emplace_back(static_cast<int>(t), static_cast<int>(other));
            }
        }
    }
    std::sort(out.edges.begin(), out.edges.end());

    std::size_t base_width = g.features.empty() ? 0 : g.features.front().size();
    if (base_width > 0) {
        out.features.assign(out.n, std::vector<Word>(base_width * k, 0));
        for (long long t = 0; t < tuples; ++t)
            for (int i = 0; i < k; ++i) {
                int coord = static_cast<int>((t / stride[i]) % g.n);
                std::copy(g.features[coord].begin(), g.features[coord].end(),
                          out.features[t].begin() + static_cast<long long>(i) * base_width);
            }
    }
    return out;
}

}  // namespace rlc

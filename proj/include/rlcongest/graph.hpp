#ifndef RLCONGEST_GRAPH_HPP
#define RLCONGEST_GRAPH_HPP

#include <string>
#include <utility>
#include <vector>

#include "rlcongest/types.hpp"

namespace rlc {

// Undirected simple graph with per-node word features and optional labels.
// Edges are stored as (u, v) with u < v, sorted ascending.
struct AttributedGraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<Word>> features;  // empty, or one equal-length vector per node
    std::vector<Word> labels;                 // empty, or one word per node

    // Set by add_virtual_node; -1 when absent.
    int virtual_node = -1;
    // Parallel to edges when nonempty; nonzero marks overlay edges added by
    // add_virtual_edges (they carry no WL-type semantics).
    std::vector<char> edge_virtual;

    int m() const { return static_cast<int>(edges.size()); }
    bool has_edge_flags() const { return !edge_virtual.empty(); }
};

struct GraphMetrics {
    Word diameter = 0;  // kInfiniteDiameter when disconnected
    Word max_degree = 0;
    Word min_degree = 0;
    Word m = 0;
    double lambda2 = 0.0;        // second-smallest eigenvalue of the normalized Laplacian
    double conductance_lb = 0.0; // lambda2 / 2, Cheeger lower bound
};

enum class Family { Path, Cycle, Star, Complete };

Family family_from_string(const std::string& name);
std::string to_string(Family f);

// Throws ParameterError if the graph violates its structural invariants.
void validate_graph(const AttributedGraph& g);

// Sorted adjacency lists. When original_only is set, overlay (virtual) edges
// are skipped; the virtual node's edges are always kept.
std::vector<std::vector<int>> adjacency(const AttributedGraph& g, bool original_only = false);

std::vector<Word> degrees(const AttributedGraph& g);

bool is_connected(const AttributedGraph& g);

// Largest connected component, nodes relabeled to [0, size) preserving order.
AttributedGraph largest_component(const AttributedGraph& g);

AttributedGraph gen_family(Family kind, int n);

// Each unordered pair is drawn independently; pairs are visited in fixed
// lexicographic order so the edge set is a pure function of (n, p, seed).
AttributedGraph gen_erdos_renyi(int n, double p, Word seed);

GraphMetrics metrics(const AttributedGraph& g);

// Single-source BFS hop counts; kInfiniteDiameter for unreachable nodes.
std::vector<Word> bfs_distances(const AttributedGraph& g, int source);

// New node n adjacent to all original nodes, marked by an extra feature
// column (1 on the virtual node, 0 elsewhere).
AttributedGraph add_virtual_node(const AttributedGraph& g);

// Union with an Erdos-Renyi overlay at p = (1/2 + delta) ln(n) / n, capped at 1.
// Overlay edges are flagged in edge_virtual.
AttributedGraph add_virtual_edges(const AttributedGraph& g, double delta, Word seed);

AttributedGraph assign_unique_ids(const AttributedGraph& g);

inline constexpr long long kTupleBudget = 1'000'000;

// Nodes are k-tuples over V, edges the Hamming-distance-1 pairs; features
// concatenate the base features of the coordinates.
AttributedGraph build_ktuple_graph(const AttributedGraph& g, int k,
                                   long long tuple_budget = kTupleBudget);

}  // namespace rlc

#endif

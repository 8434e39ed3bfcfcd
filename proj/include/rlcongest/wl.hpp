#ifndef RLCONGEST_WL_HPP
#define RLCONGEST_WL_HPP

#include <utility>
#include <vector>

#include "rlcongest/graph.hpp"
#include "rlcongest/types.hpp"

namespace rlc {

// One color (word) per node, values in [0, n^2).
using ColorVector = std::vector<Word>;

// The hash-function input of a WL iteration: own color plus the sorted
// multiset of neighbor colors.
struct WlType {
    Word own = 0;
    WordList neigh;  // nondecreasing

    friend bool operator==(const WlType& a, const WlType& b) = default;
    friend auto operator<=>(const WlType& a, const WlType& b) = default;
};

struct DistanceMatrix {
    int n = 0;
    std::vector<double> entries;  // row-major n*n

    double operator()(int i, int j) const { return entries[static_cast<std::size_t>(i) * n + j]; }
    double& operator()(int i, int j) { return entries[static_cast<std::size_t>(i) * n + j]; }
};

void validate_colors(const AttributedGraph& g, const ColorVector& x);

// WL types for every node; overlay edges are excluded from neighborhoods.
std::vector<WlType> wl_types(const AttributedGraph& g, const ColorVector& x);

// One WL iteration: each node's new color is the 1-based dense rank of its
// WL-type under lexicographic order.
ColorVector wl_step_reference(const AttributedGraph& g, const ColorVector& x);

// True iff y_u = y_v <=> (x_u, {{x_z : z in N(u)}}) = (x_v, {{x_z : z in N(v)}})
// for every pair.
bool verify_wl_coloring(const AttributedGraph& g, const ColorVector& x, const ColorVector& y);

// Repeats wl_step_reference until the induced partition stops changing.
// Returns the stable coloring and the number of steps performed (the
// confirming step counts).
std::pair<ColorVector, int> wl_refine_stable(const AttributedGraph& g, const ColorVector& x);

// Canonical partition id: nodes with equal colors share an id; ids are dense
// and assigned by first occurrence. Two colorings induce the same partition
// iff their partition ids are equal elementwise.
std::vector<int> partition_ids(const ColorVector& x);

// Colors indexed by V^k in mixed-radix order (coordinate 0 most significant).
using TupleColorVector = std::vector<Word>;

// Initial k-tuple colors: dense rank of the ordered-subgraph signature
// (coordinate base colors, equality pattern, adjacency pattern).
TupleColorVector ktuple_initial_colors(const AttributedGraph& g, int k, const ColorVector& base,
                                       long long tuple_budget = kTupleBudget);

// One k-WL iteration: rank of (own color, k multisets over coordinate
// substitutions).
TupleColorVector kwl_step(const AttributedGraph& g, int k, const TupleColorVector& x,
                          long long tuple_budget = kTupleBudget);

// One k-FWL iteration: rank of (own color, multiset over w in V of the
// k-tuple of substituted colors).
TupleColorVector kfwl_step(const AttributedGraph& g, int k, const TupleColorVector& x,
                           long long tuple_budget = kTupleBudget);

// One GD-WL iteration: rank of the sorted multiset of (distance, color) pairs
// over all nodes.
ColorVector gdwl_step(const AttributedGraph& g, const DistanceMatrix& dist, const ColorVector& x);

// All-pairs BFS hop counts; throws on disconnected input.
DistanceMatrix spd_matrix(const AttributedGraph& g);

}  // namespace rlc

#endif

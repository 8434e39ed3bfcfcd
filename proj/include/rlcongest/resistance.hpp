#ifndef RLCONGEST_RESISTANCE_HPP
#define RLCONGEST_RESISTANCE_HPP

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rlcongest/graph.hpp"
#include "rlcongest/types.hpp"

namespace rlc {

struct ResistanceMatrix {
    int n = 0;
    std::vector<double> entries;  // row-major, symmetric, zero diagonal

    double operator()(int i, int j) const { return entries[static_cast<std::size_t>(i) * n + j]; }
    double& operator()(int i, int j) { return entries[static_cast<std::size_t>(i) * n + j]; }
};

inline constexpr double kPredicateTol = 1e-6;

// All-pairs resistance distances via eigendecomposition of the Laplacian,
// inverting eigenvalues above 1e-9. Throws on disconnected input.
ResistanceMatrix resistance_matrix(const AttributedGraph& g);

// 0-local bridge predicate: |R(u,v) - 1| <= tol.
bool cut_edge_local(const ResistanceMatrix& R, std::pair<int, int> edge,
                    double tol = kPredicateTol);

// 1-local cut-vertex predicate: some pair of neighbors s, t of u satisfies
// R(s,t) = R(s,u) + R(u,t) within tol.
bool cut_vertex_local(const AttributedGraph& g, const ResistanceMatrix& R, int u,
                      double tol = kPredicateTol);

struct CutSets {
    std::set<std::pair<int, int>> bridges;
    std::set<int> articulation_points;
};

// Classical DFS low-link bridges and articulation points (per component).
CutSets cut_sets_tarjan(const AttributedGraph& g);

inline constexpr int kMatrixTreeMaxN = 64;

// Fraction of spanning trees containing the edge, via matrix-tree
// log-determinants. Oracle-scale only (n <= 64).
double spanning_tree_edge_fraction(const AttributedGraph& g, std::pair<int, int> edge);

struct GraphRecord {
    Word seed = 0;
    int n_sampled = 0;       // node count drawn before taking the component
    int n = 0;               // component size actually used
    int m = 0;
    bool edges_all_correct = false;
    bool nodes_all_correct = false;
};

struct LocalityReport {
    int graphs = 0;
    long long edges_total = 0;
    long long nodes_total = 0;
    long long edge_mismatches = 0;
    long long node_mismatches = 0;
    // Graph-level accuracy: fraction of graphs with every prediction correct;
    // -1 when no graphs were evaluated.
    double edge_accuracy = -1.0;
    double node_accuracy = -1.0;
    std::vector<GraphRecord> records;
};

// Reproduces the biconnectivity experiments: ER graphs with n uniform in
// n_range and p = p_numerator / n, largest component taken, local resistance
// predicates compared against Tarjan.
LocalityReport experiment_locality(int count, std::pair<int, int> n_range, double p_numerator,
                                   Word seed, double tol = kPredicateTol);

}  // namespace rlc

#endif

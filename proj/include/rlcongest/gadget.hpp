#ifndef RLCONGEST_GADGET_HPP
#define RLCONGEST_GADGET_HPP

#include <string>
#include <utility>
#include <vector>

#include "rlcongest/graph.hpp"
#include "rlcongest/types.hpp"
#include "rlcongest/wl.hpp"

namespace rlc {

// An EQ_m instance plus the hard-graph construction parameters.
struct GadgetSpec {
    int n = 0;
    int m = 0;
    std::vector<char> a;  // bits, length m
    std::vector<char> b;
    int path_len = 0;  // extra nodes on the x(A)-x(B) connection; 0 keeps the direct edge
};

enum class GadgetRole { XA, XB, UA, UB, VA, VB, WA, WB, PathNode };

struct GadgetGraph {
    AttributedGraph graph;
    ColorVector initial_colors;
    std::vector<GadgetRole> roles;
    // w-node indices by pair index i in [0, ceil(m/n)), per side.
    std::vector<int> w_a;
    std::vector<int> w_b;
};

// Bijection c((i, j)) = (i - 1) n + j between pair indices and [1, n ceil(m/n)],
// with i in [1, ceil(m/n)] and j in [1, n].
std::pair<int, int> gadget_bit_to_pair(int k, int n);
int gadget_pair_to_bit(std::pair<int, int> ij, int n);

void validate_gadget_spec(const GadgetSpec& spec);

GadgetGraph build_eq_gadget(const GadgetSpec& spec);

// Expected closed-form node and edge counts for a spec.
std::pair<long long, long long> gadget_expected_counts(const GadgetSpec& spec);

// Whether all w-node pairs agree in y. Requires y to be a valid WL output for
// the gadget's initial colors.
bool verify_gadget_property(const GadgetGraph& gg, const ColorVector& y);

struct GadgetScanRow {
    int n = 0;
    int m = 0;
    int w = 0;
    Word diameter = 0;
    Word rounds = 0;
    Word total_words = 0;
};

// Runs the distributed WL step on gadgets over (m, w) grids with random
// instances and checks the monotone round trends.
std::vector<GadgetScanRow> gadget_round_scan(int n, const std::vector<int>& m_list,
                                             const std::vector<int>& w_list, Word seed,
                                             int path_len = 0);

}  // namespace rlc

#endif

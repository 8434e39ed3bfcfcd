#ifndef RLCONGEST_IO_HPP
#define RLCONGEST_IO_HPP

#include <string>

#include "rlcongest/algos.hpp"
#include "rlcongest/gadget.hpp"
#include "rlcongest/graph.hpp"
#include "rlcongest/resistance.hpp"
#include "rlcongest/wl.hpp"

namespace rlc {

// Text format: first line "n m", then m lines "u v", 0-based, ascending.
std::string graph_to_text(const AttributedGraph& g);
AttributedGraph graph_from_text(const std::string& text);

// JSON form adds "features" and "labels" (and virtual-node/edge markers when present).
std::string graph_to_json(const AttributedGraph& g);
AttributedGraph graph_from_json(const std::string& text);

// Reads either format, chosen by content sniffing ("{" starts JSON).
AttributedGraph load_graph(const std::string& path);
void save_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

// One integer per line.
std::string colors_to_text(const ColorVector& x);
ColorVector colors_from_text(const std::string& text);

// Dense CSV.
std::string matrix_to_csv(const DistanceMatrix& m);

// RoundLog export: steps CSV (round,node,steps), words CSV
// (round,edge_u,edge_v,direction,words), summary JSON.
std::string roundlog_steps_csv(const RoundLog& log);
std::string roundlog_words_csv(const RoundLog& log);
std::string roundlog_summary_json(const RoundLog& log);

std::string locality_report_json(const LocalityReport& report);
std::string locality_report_csv(const LocalityReport& report);

std::string gadget_roles_json(const GadgetGraph& gg);

}  // namespace rlc

#endif

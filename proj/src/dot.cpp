#include <map>
#include <sstream>

#include "histree/history.hpp"

namespace histree {

namespace {

std::string escape(const std::string& s) {
  if (s == kInactiveLabel) return "inactive";
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string render(const HistoryGraph& g, const std::vector<char>& keep, const std::vector<std::uint64_t>* anonymity,
                   std::optional<NodeId> bottom) {
  std::vector<std::string> name(g.size());
  for (NodeId i = 0; i < g.size(); ++i)
    if (keep[i]) name[i] = "n" + canonical_code(g, i).digest().substr(0, 12);

  std::map<int, std::vector<NodeId>> levels;
  for (NodeId i = 0; i < g.size(); ++i)
    if (keep[i]) levels[g.node(i).level].push_back(i);

  std::ostringstream os;
  os << "digraph history {\n  rankdir=TB;\n  node [shape=circle];\n";
  for (const auto& [l, ids] : levels) {
    os << "  subgraph \"cluster_L" << l << "\" {\n    label=\"L" << l << "\";\n";
    for (NodeId i : ids) {
      const HNode& n = g.node(i);
      std::string label = i == 0 ? "root" : escape(n.input);
      if (anonymity) label += "\\na=" + std::to_string((*anonymity)[i]);
      os << "    " << name[i] << " [label=\"" << label << "\"";
      if (bottom && *bottom == i) os << ", peripheries=2";
      os << "];\n";
    }
    os << "  }\n";
  }
  for (NodeId i = 1; i < g.size(); ++i) {
    if (!keep[i]) continue;
    const HNode& n = g.node(i);
    os << "  " << name[n.parent] << " -> " << name[i];
    if (n.outdegree) os << " [label=\"" << *n.outdegree << "\", fontcolor=blue]";
    os << ";\n";
    for (const RedEdge& e : n.red_in) {
      os << "  " << name[e.source] << " -> " << name[i] << " [color=red, style=dashed, label=\"×"
         << e.multiplicity;
      if (e.port) os << " p:" << *e.port;
      if (e.sender_outdegree) os << " d:" << *e.sender_outdegree;
      os << "\"];\n";
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace

std::string to_dot(const HistoryTree& ht, std::size_t up_to) {
  std::vector<char> keep(ht.graph.size(), 0);
  for (NodeId i = 0; i < ht.graph.size(); ++i) keep[i] = ht.graph.node(i).level <= static_cast<int>(up_to);
  return render(ht.graph, keep, &ht.anonymity, std::nullopt);
}

std::string to_dot(const View& v) {
  std::vector<char> keep(v.graph.size(), 1);
  return render(v.graph, keep, nullptr, v.bottom);
}

}  // namespace histree

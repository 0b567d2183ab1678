#include "histree/schedule.hpp"

namespace histree {

namespace {

std::vector<Edge> undirected(const std::vector<std::pair<AgentId, AgentId>>& links) {
  std::vector<Edge> edges;
  for (const auto& [a, b] : links) {
    edges.push_back(Edge{a, b, 1, std::nullopt});
    edges.push_back(Edge{b, a, 1, std::nullopt});
  }
  normalize_edges(edges);
  return edges;
}

// Agents 0,1 are cyan (c1, c2), agents 2..5 yellow (y1..y4).
// Pinned: after step 1 the cyan class stays whole and receives three yellow messages per agent;
// yellow splits into {y1,y2} (two cyan messages each) and {y3,y4} (one each). Later steps are
// a path c1-y1-y3-y4-y2-c2 chosen so level 1 is non-branching while b3 reaches the cyan
// agents only at step 3.
DynamicSchedule fig1() {
  DynamicSchedule s;
  s.n = 6;
  s.inputs = {{"cyan", "cyan", "yellow", "yellow", "yellow", "yellow"}};
  s.steps.push_back(StepGraph{undirected({{0, 2}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {1, 5}})});
  const StepGraph path{undirected({{0, 2}, {2, 4}, {4, 5}, {5, 3}, {3, 1}})};
  for (int k = 0; k < 11; ++k) s.steps.push_back(path);
  return s;
}

// Static graph on 8 agents; agent 0 is the distinguished agent p (labelled LEADER), the other
// seven share one label. Pinned: yellow:cyan ratio 7, eccentricity of p is 4 and the levels
// needed for counting are complete in p's view only from step 7.
DynamicSchedule fig3() {
  DynamicSchedule s;
  s.n = 8;
  s.inputs = {{kLeaderLabel, "yellow", "yellow", "yellow", "yellow", "yellow", "yellow", "yellow"}};
  const StepGraph g{undirected({{0, 3}, {0, 7}, {1, 3}, {1, 5}, {1, 6}, {1, 7}, {2, 4}, {2, 6}, {3, 5}, {4, 5}, {5, 7}})};
  s.steps.assign(16, g);
  return s;
}

// Static directed network with late outdegree awareness. Agents: L=0, a,b,c=1..3, d,e=4,5,
// f,g=6,7. Level 2 of its history tree has classes {L},{a,b,c},{d,e},{f,g} with anonymities
// 1,3,2,2 and is non-branching; its message balance is the 4x4 system 3I - P.
DynamicSchedule fig7_level() {
  DynamicSchedule s;
  s.n = 8;
  s.directed = true;
  s.awareness = Awareness::LateOutdegree;
  s.inputs = {{kLeaderLabel, "x", "x", "x", "x", "x", "x", "x"}};
  std::vector<Edge> arcs;
  for (auto [a, b] : std::vector<std::pair<AgentId, AgentId>>{
           {0, 1}, {0, 2}, {0, 3}, {1, 4}, {1, 6}, {2, 5}, {2, 7}, {3, 6}, {3, 7}, {4, 0}, {5, 0}, {6, 4}, {7, 5}})
    arcs.push_back(Edge{a, b, 1, std::nullopt});
  normalize_edges(arcs);
  s.steps.assign(16, StepGraph{arcs});
  return s;
}

}  // namespace

std::map<std::string, DynamicSchedule> gen_figure_fixtures() {
  return {{"fig1", fig1()}, {"fig3", fig3()}, {"fig7-level", fig7_level()}};
}

}  // namespace histree

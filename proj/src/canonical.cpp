#include <algorithm>
#include <cstdio>
#include <map>

#include "histree/history.hpp"
#include "histree/protocol.hpp"

namespace histree {

namespace {

void put_uint(std::string& out, std::uint64_t x) {
  while (x >= 0x80) {
    out.push_back(static_cast<char>((x & 0x7f) | 0x80));
    x >>= 7;
  }
  out.push_back(static_cast<char>(x));
}

template <class T>
void put_opt(std::string& out, const std::optional<T>& x) {
  if (!x) {
    out.push_back(0);
    return;
  }
  out.push_back(1);
  put_uint(out, static_cast<std::uint64_t>(*x));
}

void put_str(std::string& out, const std::string& s) {
  put_uint(out, s.size());
  out += s;
}

struct Layered {
  std::vector<std::uint32_t> rank;
  std::vector<std::string> key;  // per rank
};

Layered layer(const View& v) {
  const HistoryGraph& g = v.graph;
  const std::vector<int> lambda = longest_path_levels(v);
  std::map<int, std::vector<NodeId>> layers;
  for (NodeId i = 0; i < g.size(); ++i) layers[lambda[i]].push_back(i);

  Layered out;
  out.rank.assign(g.size(), 0);
  std::vector<std::string> node_key(g.size());
  std::uint32_t next = 0;
  for (auto& [l, ids] : layers) {
    for (NodeId i : ids) {
      const HNode& n = g.node(i);
      std::string k;
      put_uint(k, static_cast<std::uint64_t>(n.level + 1));
      put_str(k, n.input);
      put_opt(k, n.outdegree);
      put_uint(k, n.parent == kNoNode ? 0 : out.rank[n.parent] + 1);
      std::vector<std::tuple<std::uint32_t, std::optional<std::uint32_t>, std::optional<std::uint64_t>, std::uint64_t>>
          red;
      for (const RedEdge& e : n.red_in) red.emplace_back(out.rank[e.source], e.port, e.sender_outdegree, e.multiplicity);
      std::sort(red.begin(), red.end());
      put_uint(k, red.size());
      for (const auto& [src, port, so, m] : red) {
        put_uint(k, src);
        put_opt(k, port);
        put_opt(k, so);
        put_uint(k, m);
      }
      node_key[i] = std::move(k);
    }
    std::sort(ids.begin(), ids.end(), [&](NodeId a, NodeId b) { return node_key[a] < node_key[b]; });
    for (std::size_t j = 0; j < ids.size(); ++j) {
      if (j > 0 && node_key[ids[j]] == node_key[ids[j - 1]]) {
        out.rank[ids[j]] = out.rank[ids[j - 1]];
        continue;
      }
      out.rank[ids[j]] = next++;
      out.key.push_back(node_key[ids[j]]);
    }
  }
  return out;
}

}  // namespace

std::vector<std::uint32_t> canonical_ranks(const View& v) { return layer(v).rank; }

CanonicalCode canonical_code(const View& v) {
  const Layered l = layer(v);
  CanonicalCode c;
  put_uint(c.bytes, l.key.size());
  for (const std::string& k : l.key) {
    put_uint(c.bytes, k.size());
    c.bytes += k;
  }
  put_uint(c.bytes, l.rank[v.bottom]);
  return c;
}

CanonicalCode canonical_code(const HistoryGraph& g, NodeId node) { return canonical_code(fragment(g, node)); }

std::string prefix_code(const View& v, int level) {
  const Layered l = layer(v);
  std::uint32_t count = 0;
  for (NodeId i = 0; i < v.graph.size(); ++i)
    if (v.graph.node(i).level <= level) count = std::max(count, l.rank[i] + 1);
  std::string out;
  put_uint(out, count);
  for (std::uint32_t r = 0; r < count; ++r) {
    put_uint(out, l.key[r].size());
    out += l.key[r];
  }
  return out;
}

std::size_t serialized_size(const View& v) { return canonical_code(v).bytes.size(); }

std::string CanonicalCode::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace histree

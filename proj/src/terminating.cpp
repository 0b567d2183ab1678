#include <algorithm>
#include <functional>
#include <set>

#include "histree/errors.hpp"
#include "histree/protocol.hpp"

namespace histree {

namespace {

class StatelessEval : public Evaluator {
 public:
  explicit StatelessEval(std::function<Output(const View&)> f) : f_(std::move(f)) {}
  void observe(const View& v) override { out_ = f_(v); }
  Output output() const override { return out_; }
  std::string state() const override { return out_.to_string(); }

 private:
  std::function<Output(const View&)> f_;
  Output out_;
};

class ViewBuilderEval : public Evaluator {
 public:
  void observe(const View& v) override { out_ = Output::node_code(canonical_code(v).digest()); }
  Output output() const override { return out_; }

 private:
  Output out_;
};

// The leader's time-t state depends on the time-l states of at least min(n, t - l + 1) agents,
// so a level l covered by n' confirmed agents with t - l >= n' proves n' = n.
class CountingTermEval : public Evaluator {
 public:
  void observe(const View& v) override {
    if (done_) return;
    const int t = v.height();
    est_ = 0;
    for (const auto& [l, sum] : level_estimates(v, confirm_anonymities(v))) {
      est_ = std::max(est_, sum);
      if (BigInt(t - l) >= sum) {
        done_ = true;
        out_ = Output::number(Ratio(sum));
        return;
      }
    }
  }
  Output output() const override { return out_; }
  bool terminated() const override { return done_; }
  std::string state() const override { return est_.str() + (done_ ? "!" : ""); }

 private:
  BigInt est_ = 0;
  bool done_ = false;
  Output out_;
};

class DirectedCountingTermEval : public Evaluator {
 public:
  explicit DirectedCountingTermEval(std::size_t leaders) : leaders_(leaders) {}

  void observe(const View& v) override {
    if (done_) return;
    const int t = v.height();
    const auto key = confirmed_run(v);
    if (!key) {
      key_.reset();
      return;
    }
    if (key != key_) {
      key_ = key;
      since_ = t;
    }
    // Once the run has lasted sum(U) steps every agent has seen it.
    if (BigInt(t) < BigInt(since_) + key_->second) return;
    const Output ans = evaluate_directed_count(v, leaders_);
    if (ans.is_none()) return;
    done_ = true;
    out_ = ans;
  }
  Output output() const override { return out_; }
  bool terminated() const override { return done_; }
  std::string state() const override {
    return key_ ? std::to_string(key_->first) + ":" + key_->second.str() + "/" + std::to_string(since_) : "-";
  }

 private:
  std::optional<std::pair<int, BigInt>> confirmed_run(const View& v) const {
    const HistoryGraph& g = v.graph;
    for (int f = 0; f < g.max_level();) {
      if (!interval_nonbranching(v, f, f)) {
        ++f;
        continue;
      }
      int end = f;
      while (interval_nonbranching(v, f, end + 1)) ++end;
      UpperBoundTable table;
      try {
        table = propagate_upper_bounds(v, f, end, BigInt(leaders_));
      } catch (const ModelError&) {
        return std::nullopt;
      }
      if (table.status == UpperBoundTable::Status::Complete) {
        BigInt sum = 0;
        for (const auto& [b, u] : table.bound) sum += u;
        return std::make_pair(f, sum);
      }
      f = end + 1;
    }
    return std::nullopt;
  }

  std::size_t leaders_;
  std::optional<std::pair<int, BigInt>> key_;
  int since_ = 0;
  bool done_ = false;
  Output out_;
};

class ElectionTermEval : public Evaluator {
 public:
  explicit ElectionTermEval(std::size_t n) : n_(n) {}

  void observe(const View& v) override {
    if (done_) return;
    // Level l is complete in every view once l + n - 1 steps have passed.
    const auto s = find_deepest_ratio_solution(v, v.height() - static_cast<int>(n_));
    if (!s) return;
    Ratio total = 0;
    for (const auto& [x, r] : s->at_level) total += r;
    const Ratio factor = Ratio(BigInt(n_)) / total;
    std::map<NodeId, Ratio> size;
    for (const auto& [x, r] : s->ratios.ratio) size[x] = r * factor;
    for (const auto& [x, r] : s->at_level) size[x] = r * factor;
    const HistoryGraph& g = v.graph;
    NodeId best = kNoNode;
    std::string best_code;
    for (const auto& [x, a] : size) {
      if (x == g.root() || a != 1) continue;
      const std::string code = canonical_code(g, x).bytes;
      if (best == kNoNode || g.node(x).level < g.node(best).level ||
          (g.node(x).level == g.node(best).level && code < best_code)) {
        best = x;
        best_code = code;
      }
    }
    if (best == kNoNode) return;
    done_ = true;
    out_ = Output::node_code(CanonicalCode{best_code}.digest());
  }
  Output output() const override { return out_; }
  bool terminated() const override { return done_; }

 private:
  std::size_t n_;
  bool done_ = false;
  Output out_;
};

// Output ports identify single recipients, so classes of one agent spread from the leader.
class PortCountingEval : public Evaluator {
 public:
  void observe(const View& v) override {
    if (done_) return;
    const HistoryGraph& g = v.graph;
    std::vector<char> one(g.size(), 0);
    std::vector<std::uint64_t> sent(g.size(), 0);
    for (NodeId x = 1; x < g.size(); ++x) {
      const HNode& n = g.node(x);
      if (n.input == kLeaderLabel || (n.parent != g.root() && one[n.parent])) one[x] = 1;
      for (const RedEdge& e : n.red_in) {
        if (e.port && one[e.source]) one[x] = 1;
        sent[e.source] += e.multiplicity;
      }
    }
    for (int l = 0; l < g.max_level(); ++l) {
      const auto nodes = g.level_nodes(l);
      bool closed = true;
      for (NodeId x : nodes) {
        const auto& ch = g.children(x);
        if (!one[x] || ch.size() != 1 || !g.node(ch[0]).outdegree || *g.node(ch[0]).outdegree != sent[x]) {
          closed = false;
          break;
        }
      }
      if (!closed) continue;
      done_ = true;
      out_ = Output::number(Ratio(BigInt(nodes.size())));
      return;
    }
  }
  Output output() const override { return out_; }
  bool terminated() const override { return done_; }

 private:
  bool done_ = false;
  Output out_;
};

}  // namespace

std::unique_ptr<Evaluator> make_evaluator(const std::string& name, const ProtocolParams& params) {
  const std::size_t ell = params.leaders;
  if (name == "view-builder") return std::make_unique<ViewBuilderEval>();
  if (name == "avg-consensus") return std::make_unique<StatelessEval>(evaluate_mean);
  if (name == "counting-stabilizing" || name == "counting")
    return std::make_unique<StatelessEval>([ell](const View& v) { return evaluate_count(v, ell); });
  if (name == "streaming-avg-consensus") return std::make_unique<StatelessEval>(evaluate_streaming_mean);
  if (name == "election-stabilizing") return std::make_unique<StatelessEval>(evaluate_election);
  if (name == "directed-counting-stabilizing")
    return std::make_unique<StatelessEval>([ell](const View& v) { return evaluate_directed_count(v, ell); });
  if (name == "async-counting")
    return std::make_unique<StatelessEval>([ell](const View& v) { return evaluate_async_count(v, ell); });
  if (name == "counting-terminating") {
    if (ell != 1) throw ConfigurationError("counting-terminating needs exactly one leader");
    return std::make_unique<CountingTermEval>();
  }
  if (name == "directed-counting-terminating") return std::make_unique<DirectedCountingTermEval>(ell);
  if (name == "election-terminating") {
    if (!params.n_known || *params.n_known == 0) throw ConfigurationError("election-terminating needs a known n");
    return std::make_unique<ElectionTermEval>(*params.n_known);
  }
  if (name == "port-counting") return std::make_unique<PortCountingEval>();
  throw ConfigurationError("unknown protocol '" + name + "'");
}

}  // namespace histree

#include <algorithm>
#include <random>

#include "histree/errors.hpp"
#include "histree/protocol.hpp"

namespace histree {

std::string Agent::state_digest() const { return canonical_code(view()).digest(); }

void Agent::corrupt(std::uint64_t) {}

namespace {

View initial_view(const std::string& input) {
  View v;
  v.bottom = v.graph.intern(v.graph.root(), input, {}, {});
  return v;
}

enum class Usable { Full, Black };

View usable_view(const View& v, Usable mode) {
  if (mode == Usable::Black) {
    const auto lambda = longest_path_levels(v);
    for (NodeId i = 0; i < v.graph.size(); ++i)
      if (lambda[i] != v.graph.node(i).level) return equalize_black(v);
    return v;
  }
  return is_equalized(v) ? v : equalize(v);
}

class PlainAgent : public Agent {
 public:
  PlainAgent(std::unique_ptr<Evaluator> eval, const std::string& input0, Usable mode)
      : eval_(std::move(eval)), mode_(mode), view_(std::make_shared<const View>(initial_view(input0))) {
    eval_->observe(*view_);
  }

  std::shared_ptr<const View> message() const override { return view_; }
  void step(const StepContext& ctx) override {
    MergeOptions opt;
    opt.input = ctx.input;
    opt.outdegree = ctx.outdegree;
    opt.strict = std::all_of(ctx.received.begin(), ctx.received.end(),
                             [&](const Received& r) { return r.view->height() == view_->height(); });
    view_ = std::make_shared<const View>(merge_views(*view_, ctx.received, opt));
    eval_->observe(usable_view(*view_, mode_));
  }
  Output output() const override { return eval_->output(); }
  bool terminated() const override { return eval_->terminated(); }
  const View& view() const override { return *view_; }

 private:
  std::unique_ptr<Evaluator> eval_;
  Usable mode_;
  std::shared_ptr<const View> view_;
};

// Buffers messages and merges once every tau steps, so each merge sees a connected union.
class TauBatchAgent : public Agent {
 public:
  TauBatchAgent(std::unique_ptr<Evaluator> eval, const std::string& input0, std::size_t tau)
      : eval_(std::move(eval)), tau_(tau), view_(std::make_shared<const View>(initial_view(input0))) {
    eval_->observe(*view_);
  }

  std::shared_ptr<const View> message() const override { return view_; }
  void step(const StepContext& ctx) override {
    for (const Received& r : ctx.received) pending_.push_back(r);
    if (ctx.outdegree) outdegree_ = outdegree_.value_or(0) + *ctx.outdegree;
    if (++count_ % tau_ != 0) return;
    MergeOptions opt;
    opt.input = ctx.input;
    opt.outdegree = outdegree_;
    // Buffered views are all the last merged one of their senders, so heights agree.
    opt.strict = std::all_of(pending_.begin(), pending_.end(),
                             [&](const Received& r) { return r.view->height() == view_->height(); });
    view_ = std::make_shared<const View>(merge_views(*view_, pending_, opt));
    pending_.clear();
    outdegree_.reset();
    eval_->observe(usable_view(*view_, Usable::Full));
  }
  Output output() const override { return eval_->output(); }
  bool terminated() const override { return eval_->terminated(); }
  const View& view() const override { return *view_; }

 private:
  std::unique_ptr<Evaluator> eval_;
  std::size_t tau_;
  std::size_t count_ = 0;
  std::vector<Received> pending_;
  std::optional<std::uint64_t> outdegree_;
  std::shared_ptr<const View> view_;
};

View trim_to(View v, int height) {
  while (v.height() > height) v = delete_level0_and_remerge(v);
  return v;
}

View garbage_view(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const char* labels[] = {"0", "1", kLeaderLabel, "7"};
  HistoryGraph g;
  std::vector<NodeId> prev{g.root()};
  const int height = static_cast<int>(rng() % 10);
  for (int l = 0; l <= height; ++l) {
    std::vector<NodeId> cur;
    const std::size_t width = 1 + rng() % 3;
    for (std::size_t k = 0; k < width; ++k) {
      std::vector<RedEdge> red;
      if (l > 0 && rng() % 2)
        red.push_back(RedEdge{prev[rng() % prev.size()], 1 + rng() % 3, std::nullopt, std::nullopt});
      std::optional<std::uint64_t> od;
      if (l > 0 && rng() % 2) od = rng() % 4;
      cur.push_back(g.intern(prev[rng() % prev.size()], labels[rng() % 4], od, std::move(red)));
    }
    prev = std::move(cur);
  }
  const NodeId bottom = prev[rng() % prev.size()];
  if (rng() % 4 == 0) {
    View raw;
    raw.graph = std::move(g);
    raw.bottom = bottom;
    return raw;
  }
  return fragment(g, bottom);
}

// Keeps every view at the common minimum height and bounds height growth, so stale or
// corrupted history is eventually deleted from the top.
class SelfStabAgent : public Agent {
 public:
  SelfStabAgent(std::unique_ptr<Evaluator> eval, const std::string& input0, std::optional<std::size_t> n)
      : eval_(std::move(eval)), n_(n), view_(std::make_shared<const View>(initial_view(input0))) {
    eval_->observe(*view_);
  }

  std::shared_ptr<const View> message() const override { return view_; }
  void step(const StepContext& ctx) override {
    if (!is_well_formed(*view_)) {
      view_ = std::make_shared<const View>(initial_view(ctx.input));
      ++resets_;
    }
    std::vector<const Received*> valid;
    int low = view_->height();
    for (const Received& r : ctx.received) {
      if (!is_well_formed(*r.view)) continue;
      valid.push_back(&r);
      low = std::min(low, r.view->height());
    }
    const bool own_taller = view_->height() > low;
    std::map<const View*, std::shared_ptr<const View>> trimmed;
    std::vector<Received> in;
    for (const Received* r : valid) {
      auto& t = trimmed[r->view.get()];
      if (!t) t = r->view->height() > low ? std::make_shared<const View>(trim_to(*r->view, low)) : r->view;
      Received copy = *r;
      copy.view = t;
      in.push_back(std::move(copy));
    }
    MergeOptions opt;
    opt.input = ctx.input;
    opt.outdegree = ctx.outdegree;
    View merged = merge_views(trim_to(*view_, low), in, opt);
    if (n_) {
      const int cap = 2 * static_cast<int>(*n_) - 2;
      merged = trim_to(std::move(merged), std::max(cap, 0));
    } else {
      // Toggle first; an agent that was taller than a neighbour keeps its phase, which puts
      // the shorter (just deleted) agent in step with it.
      if (!own_taller) flag_ = !flag_;
      if (flag_) merged = delete_level0_and_remerge(merged);
    }
    view_ = std::make_shared<const View>(std::move(merged));
    eval_->observe(usable_view(*view_, Usable::Full));
  }
  Output output() const override { return eval_->output(); }
  const View& view() const override { return *view_; }
  std::string state_digest() const override { return Agent::state_digest() + (flag_ ? "+" : "-"); }
  void corrupt(std::uint64_t seed) override {
    view_ = std::make_shared<const View>(garbage_view(seed));
    flag_ = seed % 2 == 1;
  }
  std::size_t resets() const override { return resets_; }

 private:
  std::unique_ptr<Evaluator> eval_;
  std::optional<std::size_t> n_;
  std::shared_ptr<const View> view_;
  bool flag_ = false;
  std::size_t resets_ = 0;
};

// Ignores links to neighbours whose view agrees up to the shallowest suitable level, and stops
// updating once all links are ignored, so the state stops growing in static networks.
class FiniteStateAgent : public Agent {
 public:
  FiniteStateAgent(std::unique_ptr<Evaluator> eval, const std::string& input0)
      : eval_(std::move(eval)), view_(std::make_shared<const View>(initial_view(input0))) {
    eval_->observe(*view_);
  }

  std::shared_ptr<const View> message() const override { return view_; }
  void step(const StepContext& ctx) override {
    const auto own = code_of(view_);
    std::vector<Received> keep;
    for (const Received& r : ctx.received)
      if (!own || code_of(r.view) != own) keep.push_back(r);
    if (keep.empty()) {
      skipped_ = true;
      return;
    }
    skipped_ = false;
    MergeOptions opt;
    opt.input = ctx.input;
    opt.outdegree = ctx.outdegree;
    opt.strict = false;
    view_ = std::make_shared<const View>(merge_views(*view_, keep, opt));
    eval_->observe(usable_view(*view_, Usable::Full));
  }
  Output output() const override { return eval_->output(); }
  const View& view() const override { return *view_; }
  bool skipped_last_step() const override { return skipped_; }

 private:
  std::optional<std::string> code_of(const std::shared_ptr<const View>& v) {
    auto it = cache_.find(v.get());
    if (it != cache_.end() && it->second.first == v) return it->second.second;
    if (cache_.size() > 256) cache_.clear();
    const View e = usable_view(*v, Usable::Full);
    std::optional<std::string> code;
    if (const auto level = shallowest_suitable_level(e)) code = prefix_code(e, *level);
    cache_[v.get()] = {v, code};
    return code;
  }

  std::unique_ptr<Evaluator> eval_;
  std::shared_ptr<const View> view_;
  bool skipped_ = false;
  std::map<const View*, std::pair<std::shared_ptr<const View>, std::optional<std::string>>> cache_;
};

struct Wrapped {
  std::string wrapper;
  std::string inner;
};

Wrapped split_name(const std::string& name) {
  for (const char* w : {"self-stab:", "finite-state:", "tau-batch:"}) {
    const std::string p = w;
    if (name.rfind(p, 0) == 0) return {p.substr(0, p.size() - 1), name.substr(p.size())};
  }
  return {"", name};
}

struct BaseEntry {
  const char* name;
  Requirements::Topology topology;
  bool outdegree, ports, semi, async, terminating;
  Answer answer;
};

using T = Requirements::Topology;
constexpr BaseEntry kBase[] = {
    {"view-builder", T::Any, false, false, true, true, false, Answer::ViewDigest},
    {"avg-consensus", T::Undirected, false, false, true, false, false, Answer::Mean},
    {"counting-stabilizing", T::Undirected, false, false, true, false, false, Answer::Count},
    {"counting", T::Undirected, false, false, true, false, false, Answer::Count},
    {"streaming-avg-consensus", T::Undirected, false, false, false, false, false, Answer::StreamingMean},
    {"election-stabilizing", T::Undirected, false, false, false, false, false, Answer::Election},
    {"election-terminating", T::Undirected, false, false, false, false, true, Answer::Election},
    {"counting-terminating", T::Undirected, false, false, false, false, true, Answer::Count},
    {"directed-counting-stabilizing", T::Any, true, false, false, false, false, Answer::Count},
    {"directed-counting-terminating", T::Any, true, false, false, false, true, Answer::Count},
    {"port-counting", T::Directed, false, true, false, false, true, Answer::Count},
    {"async-counting", T::Any, true, false, false, true, false, Answer::Count},
};

const BaseEntry& base_entry(const std::string& name) {
  for (const BaseEntry& e : kBase)
    if (name == e.name) return e;
  throw ConfigurationError("unknown protocol '" + name + "'");
}

}  // namespace

std::vector<std::string> protocol_names() {
  std::vector<std::string> out;
  for (const BaseEntry& e : kBase) out.emplace_back(e.name);
  return out;
}

ProtocolInfo protocol_info(const std::string& name) {
  const Wrapped w = split_name(name);
  const BaseEntry& e = base_entry(w.inner);
  ProtocolInfo info;
  info.name = name;
  info.terminating = e.terminating;
  info.answer = e.answer;
  info.requirements.topology = e.topology;
  info.requirements.outdegree = e.outdegree;
  info.requirements.ports = e.ports;
  info.requirements.semi_synchronous = e.semi;
  info.requirements.asynchronous = e.async;
  if (!w.wrapper.empty()) {
    info.requirements.semi_synchronous = false;
    info.requirements.asynchronous = false;
    if ((w.wrapper == "self-stab" || w.wrapper == "finite-state") && e.terminating)
      throw ConfigurationError(w.wrapper + " wraps stabilizing protocols only, not '" + w.inner + "'");
    if (w.wrapper == "finite-state") info.requirements.topology = T::Undirected;
  }
  return info;
}

std::unique_ptr<Agent> make_agent(const std::string& name, const std::string& input0, const ProtocolParams& params) {
  const Wrapped w = split_name(name);
  protocol_info(name);
  auto eval = make_evaluator(w.inner, params);
  if (w.wrapper == "self-stab") return std::make_unique<SelfStabAgent>(std::move(eval), input0, params.n_known);
  if (w.wrapper == "finite-state") return std::make_unique<FiniteStateAgent>(std::move(eval), input0);
  if (w.wrapper == "tau-batch") {
    if (params.tau < 1) throw ParameterError("tau must be positive");
    return std::make_unique<TauBatchAgent>(std::move(eval), input0, params.tau);
  }
  return std::make_unique<PlainAgent>(std::move(eval), input0, w.inner == "async-counting" ? Usable::Black : Usable::Full);
}

void check_requirements(const ProtocolInfo& info, const DynamicSchedule& s, ExecModel model) {
  const Requirements& r = info.requirements;
  const std::string who = "protocol '" + info.name + "'";
  if (r.topology == T::Undirected && s.directed) throw ConfigurationError(who + " needs an undirected schedule");
  if (r.topology == T::Directed && !s.directed) throw ConfigurationError(who + " needs a directed schedule");
  if (r.outdegree && s.awareness == Awareness::None)
    throw ConfigurationError(who + " needs outdegree awareness");
  if (r.ports && s.awareness != Awareness::OutputPort) throw ConfigurationError(who + " needs output port awareness");
  switch (model) {
    case ExecModel::Synchronous:
      if (s.activation || s.delays)
        throw ConfigurationError("synchronous execution cannot use activation sets or delays");
      break;
    case ExecModel::SemiSynchronous:
      if (!r.semi_synchronous) throw ConfigurationError(who + " does not support semi-synchronous execution");
      if (s.delays) throw ConfigurationError("semi-synchronous execution cannot use delays");
      break;
    case ExecModel::Asynchronous:
      if (!r.asynchronous) throw ConfigurationError(who + " does not support asynchronous execution");
      if (!s.directed) throw ConfigurationError("asynchronous execution needs a directed schedule");
      if (s.activation) throw ConfigurationError("asynchronous execution cannot use activation sets");
      break;
  }
}

}  // namespace histree

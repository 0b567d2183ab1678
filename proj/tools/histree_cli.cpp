#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "histree/corpus.hpp"
#include "histree/errors.hpp"
#include "histree/witness.hpp"

using namespace histree;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kAssertion = 1, kInput = 2, kConfig = 3 };

struct Source {
  std::string path;
  std::string fixture;
};

void add_source(CLI::App* cmd, Source& src) {
  auto* p = cmd->add_option("--schedule", src.path, "Schedule JSON file");
  auto* f = cmd->add_option("--fixture", src.fixture, "Built-in fixture: fig1, fig3, fig7-level");
  p->excludes(f);
}

DynamicSchedule load(const Source& src) {
  if (!src.fixture.empty()) {
    const auto all = gen_figure_fixtures();
    const auto it = all.find(src.fixture);
    if (it == all.end()) throw ParameterError("unknown fixture '" + src.fixture + "'");
    return it->second;
  }
  if (src.path.empty()) throw ParameterError("one of --schedule or --fixture is required");
  return load_schedule(src.path);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(part);
  return out;
}

std::optional<std::uint64_t> env_seed() {
  if (const char* e = std::getenv("HISTREE_SEED")) {
    try {
      return std::stoull(e);
    } catch (const std::exception&) {
      throw ParameterError(std::string("HISTREE_SEED is not an integer: '") + e + "'");
    }
  }
  return std::nullopt;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

struct SimulateArgs {
  Source src;
  std::string protocol;
  std::size_t leaders = 1;
  std::size_t max_steps = 100;
  std::string model = "synchronous";
  std::uint64_t seed = 0;
  std::string out;
  std::string inputs;
  std::size_t n_known = 0;
  std::size_t tau = 1;
  std::string inactive = "queue";
  bool corrupt = false;
};

int simulate(const SimulateArgs& a) {
  DynamicSchedule s = load(a.src);
  if (!a.inputs.empty()) s = with_inputs(s, split_list(a.inputs));
  ExecutorConfig cfg;
  cfg.model = exec_model_from_string(a.model);
  cfg.max_steps = a.max_steps;
  cfg.params.leaders = a.leaders;
  cfg.params.tau = a.tau;
  if (a.n_known) cfg.params.n_known = a.n_known;
  if (a.inactive == "vanish") cfg.inactive = InactiveDelivery::Vanish;
  else if (a.inactive != "queue") throw ParameterError("--inactive must be queue or vanish");
  const std::uint64_t seed = env_seed().value_or(a.seed);
  if (a.corrupt) cfg.corrupt_seed = seed;

  const RunTrace trace = run(s, a.protocol, cfg);
  const Checker ok = make_checker(s, a.protocol, cfg);
  const ProtocolInfo info = protocol_info(a.protocol);
  const Stabilization st = measure_stabilization(trace, ok);
  json summary;
  summary["protocol"] = a.protocol;
  summary["model"] = to_string(cfg.model);
  summary["n"] = s.n;
  summary["steps"] = trace.final_time();
  summary["stabilization"] = st.stabilized ? json(st.step) : json(nullptr);
  json term = json::array();
  for (const auto& x : trace.termination) term.push_back(x ? json(*x) : json(nullptr));
  if (info.terminating) summary["termination"] = term;
  json finals = json::array();
  for (const Output& o : trace.steps.back().outputs) finals.push_back(o.to_string());
  summary["final_outputs"] = finals;
  if (cfg.model == ExecModel::Asynchronous) {
    summary["rounds"] = trace.rounds.size();
    const auto r = st.stabilized ? rounds_until(trace.rounds, st.step) : std::nullopt;
    summary["stabilization_rounds"] = r ? json(*r) : json(nullptr);
  }
  const std::string line = json{{"summary", summary}}.dump() + "\n";
  if (!a.out.empty()) write_text(a.out, trace.to_jsonl() + line);
  std::cout << line;
  return kOk;
}

int oracle(const Source& src, std::size_t until, const std::string& dot) {
  const DynamicSchedule s = load(src);
  if (until > s.horizon()) throw ParameterError("--until exceeds the schedule horizon");
  const HistoryTree ht = build_ground_truth(s, until);
  if (!dot.empty()) write_text(dot, to_dot(ht, until));
  json levels = json::array();
  for (int l = -1; l <= static_cast<int>(until); ++l) levels.push_back(ht.graph.level_nodes(l).size());
  const std::size_t bad = count_partition_violations(ht);
  json report{{"n", s.n}, {"until", until}, {"level_sizes", levels}, {"partition_violations", bad}};
  std::cout << report.dump() << "\n";
  return bad == 0 ? kOk : kAssertion;
}

int export_dot(const Source& src, std::optional<std::size_t> agent, std::size_t time, bool equalized,
               const std::string& out) {
  const DynamicSchedule s = load(src);
  if (time > s.horizon()) throw ParameterError("--time exceeds the schedule horizon");
  const HistoryTree ht = build_ground_truth(s, time);
  if (!agent) {
    write_text(out, to_dot(ht, time));
    return kOk;
  }
  if (*agent >= s.n) throw ParameterError("--agent out of range");
  const View v = extract_view(ht, static_cast<AgentId>(*agent), time);
  write_text(out, to_dot(equalized ? equalize(v) : v));
  return kOk;
}

int search(std::size_t n, std::size_t cap, const std::string& out) {
  const WitnessResult w = search_lower_bound_witness(n, cap);
  json j{{"n", n}, {"graphs_examined", w.graphs_examined}};
  switch (w.status) {
    case WitnessResult::Status::Found:
      j["status"] = "found";
      j["agree_through"] = w.steps;
      j["recolor_extends"] = w.recolor_extends;
      j["diverge_step"] = w.diverge_step ? json(*w.diverge_step) : json(nullptr);
      j["small"] = json::parse(to_json(w.small));
      j["large"] = json::parse(to_json(w.large));
      break;
    case WitnessResult::Status::NoneFound: j["status"] = "none"; break;
    case WitnessResult::Status::CapExceeded: j["status"] = "cap-exceeded"; break;
  }
  if (!out.empty()) write_text(out, j.dump(2) + "\n");
  std::cout << j.dump() << "\n";
  return w.status == WitnessResult::Status::Found ? kOk : kAssertion;
}

struct SweepArgs {
  std::string corpus;
  std::string protocol;
  std::vector<std::string> asserts;
  std::string csv;
  std::optional<std::uint64_t> seed;
  bool witness = false;
};

int sweep(const SweepArgs& a) {
  CorpusSpec corpus = parse_corpus_spec(a.corpus);
  if (const auto e = env_seed()) corpus.first_seed = *e;
  else if (a.seed) corpus.first_seed = *a.seed;
  for (const std::string& expr : a.asserts)  // reject malformed expressions before running anything
    eval_assertion(expr, {{"n", 0}, {"tau", 0}, {"stabilization", 0}, {"termination", 0}, {"rounds", 0}, {"measured", 0}});

  std::vector<RunMetrics> rows;
  for (const CorpusEntry& e : build_corpus(corpus, a.protocol)) {
    RunMetrics m = measure_run(e.schedule, a.protocol, corpus_config(corpus, e, a.protocol));
    m.seed = e.seed;
    rows.push_back(m);
  }
  std::sort(rows.begin(), rows.end(),
            [](const RunMetrics& x, const RunMetrics& y) { return std::tie(x.n, x.seed) < std::tie(y.n, y.seed); });

  auto opt = [](std::optional<std::size_t> x) { return x ? std::optional<long long>(*x) : std::nullopt; };
  std::ostringstream csv;
  csv << "n,seed,t,measured,correct\n";
  std::vector<std::string> failures;
  for (const RunMetrics& m : rows) {
    const auto measured = m.measured();
    csv << m.n << "," << m.seed << "," << m.horizon << "," << (measured ? std::to_string(*measured) : "") << ","
        << (m.correct ? 1 : 0) << "\n";
    const std::map<std::string, std::optional<long long>> vars{
        {"n", m.n},
        {"tau", corpus.tau},
        {"stabilization", opt(m.stabilization)},
        {"termination", opt(m.termination)},
        {"rounds", opt(m.rounds)},
        {"measured", opt(measured)}};
    for (const std::string& expr : a.asserts)
      if (!m.correct || !eval_assertion(expr, vars))
        failures.push_back("n=" + std::to_string(m.n) + " seed=" + std::to_string(m.seed) + " violates '" + expr +
                           "'" + (m.correct ? "" : " (never correct)"));
  }
  if (!a.csv.empty()) write_text(a.csv, csv.str());
  std::cout << json{{"protocol", a.protocol}, {"runs", rows.size()}, {"violations", failures.size()}}.dump() << "\n";
  if (failures.empty()) return kOk;
  for (const std::string& f : failures) std::cerr << f << "\n";
  if (a.witness) {
    const WitnessResult w = search_lower_bound_witness(3);
    if (w.status == WitnessResult::Status::Found)
      std::cerr << "static pair with indistinguishable leaders through step " << w.steps << ": n=3 edges "
                << json::parse(to_json(w.small))["steps"][0].dump() << ", n=4 edges "
                << json::parse(to_json(w.large))["steps"][0].dump() << "\n";
  }
  return kAssertion;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"History trees for anonymous dynamic networks"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Run a protocol and write a JSON-lines trace");
  add_source(c_sim, sim.src);
  c_sim->add_option("--protocol", sim.protocol, "Protocol name")->required();
  c_sim->add_option("--leaders", sim.leaders, "Number of leaders");
  c_sim->add_option("--max-steps", sim.max_steps, "Step limit");
  c_sim->add_option("--model", sim.model, "synchronous, semi-synchronous or asynchronous");
  c_sim->add_option("--seed", sim.seed, "Seed for corrupted initial states");
  c_sim->add_option("--out", sim.out, "Trace output path");
  c_sim->add_option("--inputs", sim.inputs, "Comma-separated input labels replacing the schedule's");
  c_sim->add_option("--n-known", sim.n_known, "Agent count given to the protocol");
  c_sim->add_option("--tau", sim.tau, "Batch length for tau-batch: protocols");
  c_sim->add_option("--inactive", sim.inactive, "Messages to sleeping agents: queue or vanish");
  c_sim->add_flag("--corrupt", sim.corrupt, "Start every agent from a corrupted state");

  Source or_src;
  std::size_t until = 0;
  std::string or_dot;
  auto* c_or = app.add_subcommand("oracle", "Build the ground-truth history tree");
  add_source(c_or, or_src);
  c_or->add_option("--until", until, "Last level")->required();
  c_or->add_option("--dot", or_dot, "DOT output path");

  Source dot_src;
  std::optional<std::size_t> dot_agent;
  std::size_t dot_time = 0;
  bool dot_eq = false;
  std::string dot_out;
  auto* c_dot = app.add_subcommand("export-dot", "Render a history tree or one agent's view as DOT");
  add_source(c_dot, dot_src);
  c_dot->add_option("--agent", dot_agent, "Render this agent's view instead of the whole tree");
  c_dot->add_option("--time", dot_time, "Time of the view or last level of the tree")->required();
  c_dot->add_flag("--equalized", dot_eq, "Equalize the view first");
  c_dot->add_option("--out", dot_out, "Output path (stdout by default)");

  std::size_t lb_n = 3, lb_cap = 200000;
  std::string lb_out;
  auto* c_lb = app.add_subcommand("search-lower-bound", "Search for indistinguishable leader pairs");
  c_lb->add_option("--n", lb_n, "Size of the smaller network");
  c_lb->add_option("--cap", lb_cap, "Maximum graph pairs to examine");
  c_lb->add_option("--out", lb_out, "Write the witness as JSON");

  SweepArgs sw;
  auto* c_sw = app.add_subcommand("sweep", "Run a corpus and check bound assertions");
  c_sw->add_option("--corpus", sw.corpus, "Corpus description, e.g. 'family=undirected;n=2..8;seeds=50'")
      ->required();
  c_sw->add_option("--protocol", sw.protocol, "Protocol name")->required();
  c_sw->add_option("--assert", sw.asserts, "Bound expression such as 'stabilization <= 2*n-2'");
  c_sw->add_option("--csv", sw.csv, "CSV output path");
  c_sw->add_option("--seed", sw.seed, "First seed of the corpus");
  c_sw->add_flag("--witness", sw.witness, "On failure, search for an indistinguishable pair");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (*c_sim) return simulate(sim);
    if (*c_or) return oracle(or_src, until, or_dot);
    if (*c_dot) return export_dot(dot_src, dot_agent, dot_time, dot_eq, dot_out);
    if (*c_lb) return search(lb_n, lb_cap, lb_out);
    if (*c_sw) return sweep(sw);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what();
    if (e.line) std::cerr << " (line " << e.line << ", column " << e.column << ")";
    std::cerr << "\n";
    return kInput;
  } catch (const ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
  return kOk;
}

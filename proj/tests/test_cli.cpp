#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "histree/schedule.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("histree_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result cli(const std::string& args) {
  const fs::path out = scratch() / "stdout.txt";
  const std::string cmd = std::string("\"") + HISTREE_CLI + "\" " + args + " >\"" + out.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return Result{WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out)};
}

nlohmann::json last_json_line(const std::string& text) {
  std::istringstream in(text);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty() && line[0] == '{') last = line;
  return nlohmann::json::parse(last);
}

}  // namespace

TEST_CASE("simulate") {
  SUBCASE("distinguished-agent fixture counts 8") {
    const fs::path trace = scratch() / "fig3.jsonl";
    const Result r = cli("simulate --fixture fig3 --protocol counting --out \"" + trace.string() + "\"");
    REQUIRE(r.code == 0);
    const auto summary = last_json_line(r.out)["summary"];
    CHECK(summary["stabilization"] == 7);
    CHECK(summary["final_outputs"] == nlohmann::json(std::vector<std::string>(8, "8")));
    CHECK(last_json_line(slurp(trace)) == last_json_line(r.out));
  }
  SUBCASE("inputs override the fixture labels") {
    const Result r = cli("simulate --fixture fig1 --protocol avg-consensus --inputs 0,0,3,3,3,3");
    REQUIRE(r.code == 0);
    CHECK(last_json_line(r.out)["summary"]["final_outputs"][0] == "2");
  }
  SUBCASE("schedule file round trip") {
    const fs::path file = scratch() / "ring.json";
    histree::save_schedule(histree::with_leaders(histree::gen_static(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, 12, false), 1),
                           file.string());
    const Result r = cli("simulate --schedule \"" + file.string() + "\" --protocol counting-terminating");
    REQUIRE(r.code == 0);
    CHECK(last_json_line(r.out)["summary"]["final_outputs"][3] == "4");
  }
  SUBCASE("HISTREE_SEED overrides --seed") {
    const std::string args = "simulate --fixture fig3 --protocol self-stab:counting --corrupt --max-steps 10";
    const Result a = cli("--seed 1 " + args);
    CHECK(a.code == 2);  // options belong to the subcommand
    const Result b = cli(args + " --seed 1");
    const Result c = cli(args + " --seed 2");
    REQUIRE(b.code == 0);
    REQUIRE(c.code == 0);
    const std::string env = std::string("HISTREE_SEED=1 \"") + HISTREE_CLI + "\" " + args + " --seed 2 >\"" +
                            (scratch() / "env.txt").string() + "\" 2>&1";
    REQUIRE(std::system(env.c_str()) == 0);
    CHECK(slurp(scratch() / "env.txt") == b.out);
  }
}

TEST_CASE("error exit codes") {
  CHECK(cli("simulate --schedule /nonexistent/schedule.json --protocol counting").code == 2);
  CHECK(cli("simulate --fixture fig1 --protocol port-counting").code == 3);
  CHECK(cli("simulate --fixture fig1 --protocol no-such-protocol").code == 3);
  CHECK(cli("simulate --fixture fig1").code == 2);
  CHECK(cli("frobnicate").code == 2);

  const fs::path bad = scratch() / "bad.json";
  std::ofstream(bad) << "{\"n\": 2, \"steps\": [";
  const Result r = cli("simulate --schedule \"" + bad.string() + "\" --protocol counting");
  CHECK(r.code == 2);
  CHECK(r.out.find("line") != std::string::npos);
}

TEST_CASE("oracle and export-dot") {
  const Result o = cli("oracle --fixture fig1 --until 3");
  REQUIRE(o.code == 0);
  const auto j = last_json_line(o.out);
  CHECK(j["level_sizes"] == nlohmann::json({1, 2, 3, 3, 3}));
  CHECK(j["partition_violations"] == 0);

  const Result d = cli("export-dot --fixture fig1 --time 2");
  REQUIRE(d.code == 0);
  CHECK(d.out.rfind("digraph", 0) == 0);
  const Result v = cli("export-dot --fixture fig1 --time 3 --agent 0 --equalized");
  CHECK(v.code == 0);
  CHECK(v.out.find("digraph") != std::string::npos);
}

TEST_CASE("search-lower-bound") {
  const Result r = cli("search-lower-bound --n 3");
  REQUIRE(r.code == 0);
  const auto j = last_json_line(r.out);
  CHECK(j["status"] == "found");
  CHECK(j["agree_through"] == 4);
  CHECK(j["small"]["n"] == 3);
  CHECK(j["large"]["n"] == 4);
}

TEST_CASE("sweep") {
  SUBCASE("a true bound passes and the CSV has one row per run") {
    const fs::path csv = scratch() / "sweep.csv";
    const Result r = cli("sweep --corpus 'family=undirected;n=2..5;seeds=5' --protocol counting --assert "
                         "'stabilization <= 2n-2' --csv \"" + csv.string() + "\"");
    CHECK(r.code == 0);
    std::istringstream in(slurp(csv));
    std::string line;
    std::getline(in, line);
    CHECK(line == "n,seed,t,measured,correct");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 20);
  }
  SUBCASE("a false bound fails with exit code 1") {
    const Result r = cli("sweep --corpus 'family=undirected;n=3..4;seeds=40' --protocol counting --assert "
                         "'stabilization <= 2n-5'");
    CHECK(r.code == 1);
  }
  SUBCASE("malformed corpus or assertion") {
    CHECK(cli("sweep --corpus 'family=moon' --protocol counting").code == 2);
    CHECK(cli("sweep --corpus 'n=3;seeds=1' --protocol counting --assert 'width <= n'").code == 2);
  }
}

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "trajopt/cli.hpp"

using namespace trajopt;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / "trajopt_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string write(const std::string& name, const std::string& text) {
  const auto p = scratch() / name;
  io::write_file(p.string(), text);
  return p.string();
}

std::string working_example_file() {
  const auto r = run({"cool", "--demo", "working-example"});
  REQUIRE(r.code == 0);
  return write("working.json", r.out);
}

std::vector<std::vector<double>> parse_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("cool emits the demo instances", "[cli]") {
  const auto we = io::instance_from_json(io::Json::parse(run({"cool", "--demo", "working-example"}).out));
  CHECK(we.lambda.size() == 8);
  CHECK(we.cost[7] == 0.3 + 1.1);
  CHECK(we.initial_populations);

  const auto inc = io::instance_from_json(io::Json::parse(run({"cool", "--demo", "incoherent"}).out));
  CHECK(inc.lambda.size() == 12);
  REQUIRE(inc.conserved);
  CHECK(block_decompose(*inc.conserved).blocks.size() == 5);

  const auto custom = run({"cool", "--system-energies", "0,1", "--machine-energies", "0,0.5,1", "--beta", "50"});
  REQUIRE(custom.code == 0);
  const auto ci = io::instance_from_json(io::Json::parse(custom.out));
  CHECK(ci.lambda.size() == 6);
  CHECK(ci.lambda[0] > 0.9);

  CHECK(run({"cool", "--demo", "nope"}).code == 2);
  CHECK(run({"cool", "--beta", "1"}).code == 2);
}

TEST_CASE("build writes the four-step trajectory and round-trips", "[cli]") {
  const auto spec = working_example_file();
  const auto out_path = (scratch() / "traj.json").string();
  REQUIRE(run({"build", spec, "-o", out_path}).code == 0);
  const auto text = io::read_file(out_path);
  const auto file = io::trajectory_from_json(io::Json::parse(text));
  REQUIRE(file.trajectory.steps.size() == 4);
  CHECK(file.start == "initial_populations");
  CHECK(file.trajectory.steps[3].k == 3);
  CHECK(file.trajectory.steps[3].l == 4);
  CHECK(io::dump(io::trajectory_to_json(file)) == text);

  const auto full = run({"build", spec, "--full"});
  REQUIRE(full.code == 0);
  CHECK(io::trajectory_from_json(io::Json::parse(full.out)).trajectory.steps.size() == 8);
}

TEST_CASE("build reports bad input with stable exit codes", "[cli]") {
  const auto bad = write("bad.json", R"({"eigenvalues": [0.5, 0.5], "cost": [0, 1]})");
  const auto r = run({"build", bad});
  CHECK(r.code == 2);
  CHECK(r.err.find("target") != std::string::npos);

  const auto typed = write("typed.json", R"({"eigenvalues": [0.5, "x"], "target": [1, 0], "cost": [0, 1]})");
  CHECK(run({"build", typed}).err.find("eigenvalues") != std::string::npos);
  CHECK(run({"build", write("junk.json", "{not json")}).code == 2);
  CHECK(run({"build", write("neg.json", R"({"eigenvalues": [1.5, -0.5], "target": [1, 0], "cost": [0, 1]})")}).code == 2);
  CHECK(run({"build", (scratch() / "missing.json").string()}).code == 1);
  CHECK(run({"frobnicate"}).code == 2);
}

TEST_CASE("conserved field selects the generalized path", "[cli]") {
  const auto spec = write("inc.json", run({"cool", "--demo", "incoherent"}).out);
  const auto r = run({"build", spec, "--full"});
  REQUIRE(r.code == 0);
  const auto file = io::trajectory_from_json(io::Json::parse(r.out));
  CHECK(file.trajectory.blocks.size() == 5);
}

TEST_CASE("eval emits CSV rows", "[cli]") {
  const auto spec = working_example_file();
  const auto traj = io::trajectory_from_json(io::Json::parse(run({"build", spec}).out)).trajectory;

  const auto one = run({"eval", spec, "--alpha", cli::fmt(traj.alpha_min())});
  REQUIRE(one.code == 0);
  CHECK(one.out.rfind("alpha,omega,work\n", 0) == 0);
  const auto rows = parse_csv(one.out);
  REQUIRE(rows.size() == 1);
  CHECK(std::abs(rows[0][2]) <= 1e-15);  // alpha_in is the start, so no work yet

  CHECK(run({"eval", spec, "--alpha", "2.0"}).code == 3);
  CHECK(run({"eval", spec}).code == 2);

  const auto grid = parse_csv(run({"eval", spec, "--grid", "100"}).out);
  CHECK(grid.size() >= 100);
  for (const auto& b : traj.breakpoints) {
    const bool present = std::any_of(grid.begin(), grid.end(), [&](const auto& row) {
      return row[0] == b.alpha && row[1] == b.omega;
    });
    CHECK(present);
  }
  CHECK(run({"eval", spec, "--grid", "3"}).out.find('\r') == std::string::npos);
}

TEST_CASE("lift emits a unitary and its unistochastic matrix", "[cli]") {
  const auto spec = working_example_file();
  const auto r = run({"lift", spec, "--alpha", "0.6"});
  REQUIRE(r.code == 0);
  const auto doc = io::Json::parse(r.out);
  const auto u = doc["unitary"].get<std::vector<double>>();
  const auto d = doc["doubly_stochastic"].get<std::vector<double>>();
  REQUIRE(u.size() == 64);
  Eigen::Map<const Eigen::Matrix<double, 8, 8, Eigen::RowMajor>> U(u.data());
  Eigen::Map<const Eigen::Matrix<double, 8, 8, Eigen::RowMajor>> D(d.data());
  CHECK((U.transpose() * U - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((U.cwiseAbs2() - D).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(run({"lift", spec, "--alpha", "0.1"}).code == 3);
}

TEST_CASE("verify passes and catches a tampered trajectory", "[cli]") {
  const auto spec = working_example_file();
  const auto ok = run({"verify", spec, "--samples", "2000", "--seed", "3"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("FAIL") == std::string::npos);

  auto doc = io::Json::parse(run({"build", spec}).out);
  const auto good = write("good.json", io::dump(doc));
  CHECK(run({"verify", spec, "--samples", "200", "--trajectory", good}).code == 0);
  doc["steps"][1]["gradient"] = doc["steps"][1]["gradient"].get<double>() + 1e-6;
  const auto tampered = write("tampered.json", io::dump(doc));
  const auto bad = run({"verify", spec, "--samples", "200", "--trajectory", tampered});
  CHECK(bad.code == 4);
  CHECK(bad.out.find("FAIL") != std::string::npos);

  const auto report = (scratch() / "report.json").string();
  CHECK(run({"verify", spec, "--samples", "100", "--report", report}).code == 0);
  CHECK(io::Json::parse(io::read_file(report))["passed"] == true);
}

TEST_CASE("verify skips enumeration above the cap", "[cli]") {
  io::Json doc;
  std::vector<double> lam(12), a(12), e(12);
  double total = 0;
  for (int i = 0; i < 12; ++i) {
    lam[i] = i + 1;
    total += i + 1;
    a[i] = i % 3;
    e[i] = 0.1 * i * i;
  }
  for (auto& x : lam) x /= total;
  doc["eigenvalues"] = lam;
  doc["target"] = a;
  doc["cost"] = e;
  const auto spec = write("big.json", io::dump(doc));
  const auto r = run({"verify", spec, "--samples", "500"});
  CHECK(r.code == 0);
  CHECK(r.err.find("warning") != std::string::npos);
  CHECK(r.out.find("SKIP envelope") != std::string::npos);
}

TEST_CASE("the installed executable maps exit codes", "[cli]") {
  const std::string exe = TRAJOPT_CLI_PATH;
  const auto spec = working_example_file();
  const auto sink = " > " + (scratch() / "stdout.txt").string() + " 2>&1";
  auto status = [&](const std::string& args) {
    const int raw = std::system((exe + " " + args + sink).c_str());
    return WEXITSTATUS(raw);
  };
  CHECK(status("eval " + spec + " --alpha 0.55") == 0);
  CHECK(status("eval " + spec + " --alpha 2.0") == 3);
  CHECK(status("build /nonexistent/instance.json") == 1);
}

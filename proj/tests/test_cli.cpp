#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

int run_cmd(const std::string& args, const std::string& log) {
  const std::string cmd = std::string(SCBBENCH_PATH) + " " + args + " >" + log + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& stem) : path(fs::path("cli_test_out") / stem) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("run solves the scalar instance and writes both CSVs") {
  TempDir dir("scalar");
  const int rc = run_cmd("run --instance scalar --solver scb --tol 1e-7 --out " +
                             dir.path.string(),
                         (dir.path / "stdout.txt").string());
  CHECK(rc == 0);

  const std::string summary = slurp(dir.path / "summary.csv");
  CHECK(summary.find("name,solver,termination") == 0);
  CHECK(summary.find("qsdp_scalar,scb,tolerance_met") != std::string::npos);

  const std::string log = slurp(dir.path / "log.csv");
  CHECK(log.find("iter,eta") == 0);
  // At least the initial and final residual lines.
  CHECK(std::count(log.begin(), log.end(), '\n') >= 3);
}

TEST_CASE("run exits 2 when the iteration cap is hit") {
  TempDir dir("cap");
  const int rc = run_cmd("run --instance qsdp:n=8,mE=4,rank=2,seed=1 --solver scb --max-iter 1 "
                         "--out " + dir.path.string(),
                         (dir.path / "stdout.txt").string());
  CHECK(rc == 2);
  const std::string summary = slurp(dir.path / "summary.csv");
  CHECK(summary.find("max_iter") != std::string::npos);
}

TEST_CASE("run exits 1 on malformed input and names the offending line") {
  TempDir dir("bad");
  const fs::path bad = dir.path / "bad_instance.txt";
  {
    std::ofstream out(bad);
    out << "2 1\n1 oops 3.5\n";
  }
  const fs::path log = dir.path / "stderr.txt";
  const int rc = run_cmd("run --instance biq:file=" + bad.string() + " --solver scb --out " +
                             dir.path.string(),
                         log.string());
  CHECK(rc == 1);
  const std::string msg = slurp(log);
  CHECK(msg.find(":2:") != std::string::npos);
}

namespace {

// Drop the trailing wall-clock column from every log line; timings are the
// only permitted difference between identical runs.
std::string strip_last_column(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.rfind(',');
    out << (pos == std::string::npos ? line : line.substr(0, pos)) << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("identical runs produce byte-identical summaries") {
  TempDir a("det_a"), b("det_b");
  const std::string spec = "run --instance qsdp:n=8,mE=4,rank=2,seed=7 --solver scb --tol 1e-6 ";
  CHECK(run_cmd(spec + "--out " + a.path.string(), (a.path / "o.txt").string()) == 0);
  CHECK(run_cmd(spec + "--out " + b.path.string(), (b.path / "o.txt").string()) == 0);
  CHECK(slurp(a.path / "summary.csv") == slurp(b.path / "summary.csv"));
  CHECK(strip_last_column(slurp(a.path / "log.csv")) ==
        strip_last_column(slurp(b.path / "log.csv")));
}

TEST_CASE("json spec files configure a run, with flags taking precedence") {
  TempDir dir("spec");
  const fs::path spec = dir.path / "spec.json";
  {
    std::ofstream out(spec);
    out << "{\"instance\": \"scalar\", \"solver\": \"scb\", \"tol\": 1e-7, \"max_iter\": 20000}\n";
  }
  CHECK(run_cmd("run --spec " + spec.string() + " --out " + dir.path.string(),
                (dir.path / "o.txt").string()) == 0);
  CHECK(slurp(dir.path / "summary.csv").find("qsdp_scalar") != std::string::npos);
  // A flag overrides the file: the 1-iteration cap cannot reach tolerance.
  CHECK(run_cmd("run --spec " + spec.string() + " --max-iter 1 --out " + dir.path.string(),
                (dir.path / "o.txt").string()) == 2);
}

TEST_CASE("compare writes paired results and a performance profile") {
  TempDir dir("cmp");
  const int rc = run_cmd(
      "compare --instance qsdp:n=8,mE=4,rank=2,seed=3 --instance qsdp:n=8,mE=4,rank=2,seed=4 "
      "--solver scb --solver direct_admm --jobs 2 --out " + dir.path.string(),
      (dir.path / "o.txt").string());
  CHECK((rc == 0 || rc == 2));

  const std::string table = slurp(dir.path / "compare.csv");
  CHECK(std::count(table.begin(), table.end(), '\n') == 5);  // header + 2x2 runs
  CHECK(table.find(",scb,") != std::string::npos);
  CHECK(table.find(",direct_admm,") != std::string::npos);

  const std::string profile = slurp(dir.path / "profile.csv");
  CHECK(profile.find("ratio,fraction,solver") == 0);
  // Some solver attains the per-problem best: a ratio-1 row must exist.
  CHECK(profile.find("\n1,") != std::string::npos);
}

TEST_CASE("comparing a solver against itself gives all ratios 1") {
  TempDir dir("self");
  const int rc = run_cmd(
      "compare --instance qsdp:n=8,mE=4,rank=2,seed=5 --solver scb --solver scb --out " +
          dir.path.string(),
      (dir.path / "o.txt").string());
  CHECK(rc == 0);
  std::istringstream in(slurp(dir.path / "profile.csv"));
  std::string line;
  std::getline(in, line);  // header
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    CHECK(line.rfind("1,1,", 0) == 0);
  }
  CHECK(rows == 2);
}

TEST_CASE("spadmm2 is rejected for instances with quadratic middle blocks") {
  TempDir dir("reject");
  const int rc = run_cmd("run --instance scalar --solver spadmm2 --out " + dir.path.string(),
                         (dir.path / "o.txt").string());
  CHECK(rc == 1);
}

#include "ccofdma/cli.hpp"
#include "ccofdma/config.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ccofdma;

namespace {

const char* kMinimal = "seed = 5\nsys.n_users = 4\nsys.n_subcarriers = 64\n";

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("ccofdma_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

int run(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "ccp_ofdma");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return rc;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config: minimal file takes the defaults") {
  const RunConfig c = parse_config(kMinimal);
  CHECK(c.seed == 5);
  CHECK(c.experiment.params.n_users == 4);
  CHECK(c.experiment.params.capacity_gap == doctest::Approx(5.0673).epsilon(1e-4));
  CHECK(c.experiment.params.tx_power_per_subcarrier == doctest::Approx(1e9));
  CHECK(c.experiment.params.slots_per_window() == 1000);
  CHECK(c.experiment.min_rate == 20.0);
  CHECK(c.experiment.mode == AllocationMode::reduced);
}

TEST_CASE("config: errors name the key and line") {
  auto fails_on = [](const std::string& text, const std::string& key) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      CHECK(e.key() == key);
      return;
    }
    FAIL("accepted: " << text);
  };
  fails_on(std::string(kMinimal) + "users.outage_tolerance = 1.2\n", "users.outage_tolerance");
  fails_on(std::string(kMinimal) + "sys.colour = red\n", "sys.colour");
  fails_on("sys.n_users = 4\nsys.n_subcarriers = 64\n", "seed");
  fails_on("seed = 1\nsys.n_subcarriers = 64\n", "sys.n_users");
  fails_on(std::string(kMinimal) + "solver.mode = fancy\n", "solver.mode");
  fails_on(std::string(kMinimal) + "cell.shadow_std_db = abc\n", "cell.shadow_std_db");
  fails_on(std::string(kMinimal) + "seed = 6\n", "seed");
  try {
    parse_config(std::string(kMinimal) + "# comment\nusers.outage_tolerance = 1.2\n");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 5);
  }
}

TEST_CASE("config: resolved text loads back to the same run") {
  const RunConfig c = parse_config(std::string(kMinimal) + "users.outage_tolerance = 0.2 # inline\nsolver.mode = full\n");
  const std::string text = resolved_config(c);
  const RunConfig back = parse_config(text);
  CHECK(resolved_config(back) == text);
  CHECK(back.experiment.outage_tolerance == 0.2);
  CHECK(back.experiment.mode == AllocationMode::full);
  CHECK(text.find("# capacity_gap = 5.067") != std::string::npos);
}

TEST_CASE("cli: usage and config failures exit 2") {
  const auto dir = scratch("usage");
  CHECK(run({}) == kExitConfig);
  CHECK(run({"bogus"}) == kExitConfig);
  std::ofstream(dir / "bad.cfg") << kMinimal << "users.outage_tolerance = 1.2\n";
  std::string err;
  CHECK(run({"solve", "--config", (dir / "bad.cfg").string(), "--out", dir.string()}, nullptr, &err) == kExitConfig);
  CHECK(err.find("users.outage_tolerance") != std::string::npos);
  std::string out;
  CHECK(run({"--help"}, &out) == kExitOk);
  CHECK(out.find("windows.csv") != std::string::npos);
}

TEST_CASE("cli: feasibility exit codes") {
  const auto dir = scratch("feas");
  std::ofstream(dir / "hard.cfg") << kMinimal << "users.min_rate_bps = 500\n";
  std::string out;
  CHECK(run({"feasibility", "--config", (dir / "hard.cfg").string(), "--out", dir.string()}, &out) ==
        kExitInfeasible);
  CHECK(out.find("infeasible after") != std::string::npos);
  std::ofstream(dir / "easy.cfg") << kMinimal << "users.min_rate_bps = 1\n";
  CHECK(run({"feasibility", "--config", (dir / "easy.cfg").string(), "--out", dir.string()}) == kExitOk);
  CHECK(std::filesystem::exists(dir / "config.resolved"));
}

TEST_CASE("cli: solve writes allocation and trace") {
  const auto dir = scratch("solve");
  std::ofstream(dir / "c.cfg") << kMinimal << "users.min_rate_bps = 1\n";
  CHECK(run({"solve", "--config", (dir / "c.cfg").string(), "--out", dir.string(), "--trace", "--window", "2"}) ==
        kExitOk);
  const std::string trace = slurp(dir / "trace_2.csv");
  CHECK(trace.rfind("iter,kind_of_cut,objective,potential,n_rows\n", 0) == 0);
  CHECK(slurp(dir / "allocation.csv").rfind("user,subcarrier,fraction\n", 0) == 0);
}

TEST_CASE("cli: sweep grid parsing") {
  const auto dir = scratch("sweep");
  std::ofstream(dir / "c.cfg") << "seed = 3\nsys.n_users = 2\nsys.n_subcarriers = 8\nusers.min_rate_bps = 2\n"
                               << "exp.eval_slots = 200\n";
  CHECK(run({"sweep-eps", "--config", (dir / "c.cfg").string(), "--out", dir.string(), "--grid", "0.05:0.7:8"}) ==
        kExitOk);
  const std::string csv = slurp(dir / "sweep.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
  CHECK(run({"sweep-eps", "--config", (dir / "c.cfg").string(), "--out", dir.string(), "--grid", "0.1:0.2"}) ==
        kExitConfig);
}

#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "zsg/game.hpp"
#include "zsg/game_io.hpp"

using namespace zsg;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ZSG_RUN_BIN) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("zsg_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("matrix mode on matching pennies reaches tol with a uniform equilibrium") {
  const fs::path out = fresh_dir("pennies");
  const fs::path game = out / "pennies.json";
  fs::create_directories(out);
  write_text_file(game.string(),
                  "{\"kind\":\"matrix\",\"rows\":2,\"cols\":2,\"payoff\":[1,-1,-1,1]}");
  const int rc = run_cli("--mode matrix --game " + game.string() +
                         " --tau 0.5 --tol 1e-10 --iters 10000 --out " + out.string());
  CHECK(rc == 0);
  const std::string summary = read_text_file((out / "summary.json").string());
  CHECK(summary.find("\"iterations\": 0") != std::string::npos);  // symmetric: QRE at start
}

TEST_CASE("discounted run exits 0 and writes the documented CSV header") {
  const fs::path out = fresh_dir("disc");
  const int rc = run_cli("--mode discounted --random 4,3,3,0.9 --seed 3 --tau 0.1 --eta 0.02 "
                         "--alpha 0.05 --tol 1e-4 --iters 30000 --out " + out.string());
  CHECK(rc == 0);
  const std::string csv = read_text_file((out / "trace.csv").string());
  CHECK(csv.substr(0, csv.find('\n')) == "iter,kl_zeta,kl_zeta_bar,q_err,dual_gap,elapsed_s");
  const std::string summary = read_text_file((out / "summary.json").string());
  CHECK(summary.find("\"thm1_eq12_holds\": true") != std::string::npos);
}

TEST_CASE("episodic run writes the h column") {
  const fs::path out = fresh_dir("epi");
  const int rc = run_cli("--mode episodic --random 3,2,2 --horizon 2 --seed 4 --tau 0.2 "
                         "--tol 1e-4 --iters 20000 --out " + out.string());
  CHECK(rc == 0);
  const std::string csv = read_text_file((out / "trace.csv").string());
  CHECK(csv.substr(0, csv.find('\n')) == "iter,h,kl_zeta,kl_zeta_bar,q_err,dual_gap,elapsed_s");
}

TEST_CASE("max_iters exhaustion exits 2 but still writes the trace") {
  const fs::path out = fresh_dir("exhaust");
  const int rc = run_cli("--mode discounted --random 4,3,3,0.9 --seed 3 --tau 0.1 --eta 0.02 "
                         "--tol 1e-13 --iters 200 --reference skip --out " + out.string());
  CHECK(rc == 2);
  CHECK(fs::exists(out / "trace.csv"));
  CHECK(fs::exists(out / "summary.json"));
}

TEST_CASE("missing game file exits 1 without artifacts") {
  const fs::path out = fresh_dir("missing");
  const int rc = run_cli("--mode discounted --game /nonexistent/game.json --out " + out.string());
  CHECK(rc == 1);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("malformed game file exits 1") {
  const fs::path out = fresh_dir("malformed");
  fs::create_directories(out);
  const fs::path game = out / "bad.json";
  write_text_file(game.string(), "{\"kind\":\"discounted\"}");
  const int rc = run_cli("--mode discounted --game " + game.string() + " --out " + out.string());
  CHECK(rc == 1);
  CHECK_FALSE(fs::exists(out / "summary.json"));
}

TEST_CASE("identical specs produce byte-identical artifacts under --no-timing") {
  const fs::path out1 = fresh_dir("det1");
  const fs::path out2 = fresh_dir("det2");
  const std::string args = "--mode discounted --random 4,3,3,0.9 --seed 6 --tau 0.1 --eta 0.02 "
                           "--alpha 0.05 --tol 1e-12 --iters 1000 --no-timing --out ";
  CHECK(run_cli(args + out1.string()) == 2);
  CHECK(run_cli(args + out2.string()) == 2);
  CHECK(read_text_file((out1 / "trace.csv").string()) ==
        read_text_file((out2 / "trace.csv").string()));
  CHECK(read_text_file((out1 / "summary.json").string()) ==
        read_text_file((out2 / "summary.json").string()));
}

TEST_CASE("reference cache hit reproduces the summary byte for byte") {
  const fs::path out = fresh_dir("cache");
  const std::string args = "--mode discounted --random 4,3,3,0.9 --seed 8 --tau 0.1 --eta 0.02 "
                           "--alpha 0.05 --tol 1e-6 --iters 30000 --no-timing --out " +
                           out.string();
  REQUIRE(run_cli(args) == 0);
  const std::string first = read_text_file((out / "summary.json").string());
  bool saw_cache = false;
  for (const auto& e : fs::directory_iterator(out))
    if (e.path().filename().string().rfind("reference_", 0) == 0) saw_cache = true;
  REQUIRE(saw_cache);
  REQUIRE(run_cli(args) == 0);  // second run loads the cached reference
  CHECK(read_text_file((out / "summary.json").string()) == first);
}

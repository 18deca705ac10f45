// Copyright 2026 The gauss-certify Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "gausscert/gaussian_state.hpp"
#include "gausscert/scan.hpp"
#include "support.hpp"

using namespace gausscert;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI through the shell; stderr goes to a file next to stdout.
Run cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + GAUSS_CERTIFY_EXE + " " + args + " 2>cli_stderr.txt";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kComb = R"({"n_modes": 4, "squeezing_db": [-5.1, -3.0, -1.5, 0.0],
  "antisqueezing_db": [7.1, 4.0, 2.0, 0.0], "mixing_seed": 7})";
const char* kQuick = R"({"population": 16, "max_generations": 25, "stall_generations": 10})";

struct Workspace {
  Workspace() {
    std::ofstream("comb.json") << kComb;
    std::ofstream("quick.json") << kQuick;
    REQUIRE(cli("synth --input comb.json --out state.json").code == 0);
  }
};

}  // namespace

TEST_CASE_FIXTURE(Workspace, "synth writes a loadable state") {
  const auto st = load_state("state.json");
  CHECK(st.n_modes() == 4);
  CHECK(cli("synth --input comb.json --out state.csv").code == 0);
  CHECK(load_state("state.csv").c_xx() == st.c_xx());
  const auto r = cli("synth --input comb.json");
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["n_modes"] == 4);
}

TEST_CASE_FIXTURE(Workspace, "check reports physicality and lambda") {
  auto r = cli("check --input state.json");
  CHECK(r.code == 0);
  CHECK(r.out.find("physical: yes") != std::string::npos);
  CHECK(r.out.find("lambda: 0") != std::string::npos);
  std::ofstream("bad.json") << R"({"c_xx": [[0.4]], "c_pp": [[0.4]]})";
  r = cli("check --input bad.json --format json");
  CHECK(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK_FALSE(doc["is_physical"].get<bool>());
  CHECK(std::abs(doc["added_noise"].get<double>() - 0.1) < 1e-8);
}

TEST_CASE_FIXTURE(Workspace, "scan emits json, csv and text") {
  auto r = cli("scan --input state.json --ga-config quick.json --format json");
  REQUIRE(r.code == 0);
  const auto report = report_from_json(nlohmann::json::parse(r.out));
  CHECK(report.results.size() == 15);
  CHECK(report.summary.entangled_count == 14);

  r = cli("scan --input state.json --ga-config quick.json --out out.csv");
  REQUIRE(r.code == 0);
  const auto csv = slurp("out.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 16);

  r = cli("scan --input state.json --ga-config quick.json --k 2");
  CHECK(r.code == 0);
  CHECK(r.out.find("lambda") != std::string::npos);
  CHECK(r.out.find("convention") != std::string::npos);

  r = cli("scan --input state.json --ga-config quick.json --partition 1:2:3:4 --partition 1,2:3,4 --format json");
  CHECK(nlohmann::json::parse(r.out)["results"].size() == 2);
  r = cli("scan --input state.json --ga-config quick.json --top 4 --format csv");
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 5);
}

TEST_CASE_FIXTURE(Workspace, "seed precedence: flag, config file, environment, default") {
  auto seed_of = [](const Run& r) { return nlohmann::json::parse(r.out)["ga_config"]["seed"].get<std::uint64_t>(); };
  const std::string base = "scan --input state.json --partition 1:2:3:4 --format json ";
  CHECK(seed_of(cli(base + "--ga-config quick.json")) == 1);
  CHECK(seed_of(cli(base + "--ga-config quick.json", "GAUSS_CERTIFY_SEED=5")) == 5);
  std::ofstream("seeded.toml") << "population = 16\nmax_generations = 25\nseed = 9\n";
  CHECK(seed_of(cli(base + "--ga-config seeded.toml", "GAUSS_CERTIFY_SEED=5")) == 9);
  CHECK(seed_of(cli(base + "--ga-config seeded.toml --seed 11", "GAUSS_CERTIFY_SEED=5")) == 11);
  CHECK(cli(base + "--ga-config quick.json", "GAUSS_CERTIFY_SEED=abc").code == 1);
}

TEST_CASE_FIXTURE(Workspace, "parallel runs and resume give identical output") {
  REQUIRE(cli("scan --input state.json --ga-config quick.json --jobs 1 --out j1.json").code == 0);
  REQUIRE(cli("scan --input state.json --ga-config quick.json --jobs 4 --out j4.json").code == 0);
  CHECK(slurp("j1.json") == slurp("j4.json"));

  fs::remove("ck.jsonl");
  REQUIRE(cli("scan --input state.json --ga-config quick.json --checkpoint ck.jsonl --out c1.json").code == 0);
  std::ifstream in("ck.jsonl");
  std::string keep, line;
  for (int i = 0; i < 5 && std::getline(in, line); ++i) keep += line + "\n";
  in.close();
  std::ofstream("ck.jsonl", std::ios::trunc) << keep;
  REQUIRE(cli("scan --input state.json --ga-config quick.json --checkpoint ck.jsonl --resume --out c2.json").code == 0);
  CHECK(slurp("c1.json") == slurp("c2.json"));
  CHECK(slurp("c1.json") == slurp("j1.json"));
}

TEST_CASE_FIXTURE(Workspace, "extremes from a saved report") {
  REQUIRE(cli("scan --input state.json --ga-config quick.json --out rep.json").code == 0);
  auto r = cli("extremes --input rep.json --format json");
  REQUIRE(r.code == 0);
  const auto rows = nlohmann::json::parse(r.out);
  CHECK(rows.size() == 6);  // K=1 and K=4 once, K=2 and K=3 twice
  CHECK(rows[0]["partition"] == "{1,2,3,4}");
  REQUIRE(cli("scan --input state.json --ga-config quick.json --k 3 --out rep3.json").code == 0);
  CHECK(nlohmann::json::parse(cli("extremes --input rep3.json --format json").out).size() == 2);
  REQUIRE(cli("scan --input state.json --ga-config quick.json --partition 1,3:2,4 --out rep1.json").code == 0);
  CHECK(nlohmann::json::parse(cli("extremes --input rep1.json --format json").out).size() == 1);
  r = cli("extremes --input rep.json");
  CHECK(r.out.find("Sigma") != std::string::npos);
}

TEST_CASE_FIXTURE(Workspace, "supermodes and oracle") {
  auto r = cli("supermodes --input state.json --format json");
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(std::abs(doc["squeezing_db"][0].get<double>() + 5.1) < 1e-6);
  CHECK(std::abs(doc["antisqueezing_db"][0].get<double>() - 7.1) < 1e-6);

  const auto tmsv = testing::two_mode_squeezed(1.0);
  save_state(tmsv, "tmsv.json", StateFormat::kJson);
  r = cli("oracle --input tmsv.json --partition 1:2 --format json");
  REQUIRE(r.code == 0);
  const auto o = nlohmann::json::parse(r.out);
  CHECK(o["relative_difference"].get<double>() < 1e-6);
  CHECK(o["npt"].get<bool>());
  CHECK(o["sigma"].get<double>() < 0.0);
  CHECK(cli("oracle --input state.json --partition 1:2:3:4").code == 2);
  CHECK(cli("oracle --input tmsv.json").code == 1);
}

TEST_CASE_FIXTURE(Workspace, "exit codes") {
  CHECK(cli("").code == 1);
  CHECK(cli("frobnicate").code == 1);
  CHECK(cli("scan --input missing.json").code == 3);
  CHECK(cli("scan --input state.json --k 7").code == 1);
  CHECK(cli("scan --input state.json --partition 1,1:2,3,4").code == 1);
  CHECK(cli("scan --input state.json --format xml").code == 1);
  CHECK(cli("scan --input state.json --ga-config quick.json --out /nonexistent-dir/r.json").code == 3);
  std::vector<std::vector<double>> vac(15, std::vector<double>(15, 0.0));
  for (int i = 0; i < 15; ++i) vac[i][i] = 0.5;
  std::ofstream("big.json") << nlohmann::json{{"c_xx", vac}, {"c_pp", vac}}.dump();
  CHECK(cli("scan --input big.json").code == 2);
  std::ofstream("asym.json") << R"({"c_xx": [[1.0, 0.2], [0.3, 1.0]], "c_pp": [[1.0, 0.0], [0.0, 1.0]]})";
  CHECK(cli("check --input asym.json").code == 1);
  const auto err = slurp("cli_stderr.txt");
  CHECK(err.find("(0,1)") != std::string::npos);
  CHECK(cli("--help").code == 0);
}

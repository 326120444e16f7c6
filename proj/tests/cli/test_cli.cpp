/*
 * Copyright 2026 The lblm-ava Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
// Runs the lblm binary as a subprocess: exit codes, edge cases, output schema.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "support/json_schema.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = [] {
  const fs::path p(LBLM_TEST_WORK_DIR);
  fs::remove_all(p);
  return p;
}();

int run_cli(const std::string& args, const std::string& log = "last.log") {
  fs::create_directories(kWork);
  const std::string cmd =
      "cd '" + kWork.string() + "' && '" + std::string(LBLM_CLI_PATH) + "' " + args + " > '" + log + "' 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

const std::string kCfg = "--config '" + std::string(LBLM_SOURCE_DIR) + "/configs/desk.cfg'";

// One tiny corpus + 1-epoch checkpoint shared by the cases below.
void ensure_trained() {
  if (fs::exists(kWork / "ckpt/manifest.json")) return;
  REQUIRE(run_cli("synth " + kCfg + " --out corpus") == 0);
  REQUIRE(run_cli("train " + kCfg + " --corpus corpus --checkpoint ckpt --epochs 1") == 0);
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(run_cli("") == 1);
  CHECK(run_cli("no-such-command") == 1);
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("train " + kCfg + " --corpus does/not/exist --checkpoint x") == 1);
  CHECK(slurp(kWork / "last.log").find("does/not/exist") != std::string::npos);
  CHECK(run_cli("train --config missing.cfg") == 1);
}

TEST_CASE("synth with zero sequences writes an empty manifest") {
  REQUIRE(run_cli("synth " + kCfg + " --set synth.n_sequences=0 --set synth.n_heldout=0 --out empty") == 0);
  const auto m = nlohmann::json::parse(slurp(kWork / "empty/manifest.json"));
  CHECK(m["train"] == 0);
  CHECK(m["heldout"] == 0);
}

TEST_CASE("zero epochs writes a checkpoint and a header-only report") {
  ensure_trained();
  REQUIRE(run_cli("train " + kCfg + " --corpus corpus --checkpoint ckpt0 --epochs 0") == 0);
  CHECK(fs::exists(kWork / "ckpt0/manifest.json"));
  const std::string csv = slurp(kWork / "ckpt0/report.csv");
  CHECK(!csv.empty());
  CHECK(csv.find('\n') == csv.size() - 1);
}

TEST_CASE("generate and eval") {
  ensure_trained();
  REQUIRE(run_cli("generate " + kCfg + " --checkpoint ckpt --features corpus/heldout --out gen") == 0);
  REQUIRE(run_cli("eval " + kCfg + " --real corpus --gen gen --checkpoint ckpt --out metrics.json") == 0);
  const auto schema = nlohmann::json::parse(slurp(fs::path(LBLM_SOURCE_DIR) / "schemas/metrics.schema.json"));
  const auto metrics = nlohmann::json::parse(slurp(kWork / "metrics.json"));
  const auto errors = lblm::testing::validate_schema(metrics, schema);
  for (const auto& e : errors) MESSAGE(e);
  CHECK(errors.empty());

  SUBCASE("identical directories give zero distances") {
    REQUIRE(run_cli("eval " + kCfg + " --real corpus --gen corpus --out self.json") == 0);
    const auto self = nlohmann::json::parse(slurp(kWork / "self.json"));
    CHECK(self["fgd"].get<double>() < 1e-8);
    CHECK(self["fid"].get<double>() < 1e-8);
    CHECK(self["grs"].is_null());
    CHECK(lblm::testing::validate_schema(self, schema).empty());
  }
  SUBCASE("a malformed gesture file is named in the error") {
    fs::create_directories(kWork / "bad");
    std::ofstream(kWork / "bad/broken.gsq.json") << R"({"schema_version": 1, "fps": 30})";
    CHECK(run_cli("eval " + kCfg + " --real corpus --gen bad --out bad.json") == 1);
    CHECK(slurp(kWork / "last.log").find("broken.gsq.json") != std::string::npos);
  }
  SUBCASE("layout mismatch is a configuration error") {
    fs::path sample;
    for (const auto& entry : fs::directory_iterator(kWork / "gen"))
      if (entry.path().string().find(".gsq.json") != std::string::npos) sample = entry.path();
    REQUIRE(!sample.empty());
    auto layout = nlohmann::json::parse(slurp(sample))["layout"];
    std::ofstream(kWork / "same_layout.json") << layout.dump();
    CHECK(run_cli("generate " + kCfg + " --checkpoint ckpt --features corpus/heldout --out g2 --layout same_layout.json") ==
          0);
    layout["bone_length"][1] = layout["bone_length"][1].get<double>() * 2.0;
    std::ofstream(kWork / "other_layout.json") << layout.dump();
    CHECK(run_cli("generate " + kCfg + " --checkpoint ckpt --features corpus/heldout --out g3 --layout other_layout.json") ==
          1);
    CHECK(slurp(kWork / "last.log").find("layout") != std::string::npos);
  }
}

TEST_CASE("inspect prints json for each artifact kind") {
  ensure_trained();
  REQUIRE(run_cli("generate " + kCfg + " --checkpoint ckpt --features corpus/heldout --out gen") == 0);
  for (const fs::path& p : {fs::path("ckpt"), fs::path("corpus")}) {
    REQUIRE(run_cli("inspect " + p.string(), "inspect.log") == 0);
    CHECK(nlohmann::json::accept(slurp(kWork / "inspect.log")));
  }
  for (const auto& entry : fs::directory_iterator(kWork / "gen")) {
    if (entry.path().string().find(".gsq.json") == std::string::npos) continue;
    REQUIRE(run_cli("inspect '" + entry.path().string() + "'", "inspect.log") == 0);
    const auto j = nlohmann::json::parse(slurp(kWork / "inspect.log"));
    CHECK(j["constraint_violations"] == 0);
  }
}

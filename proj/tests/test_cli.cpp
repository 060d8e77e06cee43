/* Copyright 2026-present sfusim contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "sfu/cli/commands.hpp"

using namespace sfu;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) {
  return std::string(SFUSIM_SOURCE_DIR) + "/fixtures/" + name;
}

std::string scenario(const std::string& name) {
  return std::string(SFUSIM_SOURCE_DIR) + "/scenarios/" + name;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("capacity reproduces the reference figures") {
  auto r = run_cli({"capacity", "--mode", "nra"});
  CHECK(r.code == 0);
  CHECK(r.out.find("nra,3,131072") != std::string::npos);

  r = run_cli({"capacity", "--mode", "ra_sr", "--participants", "10"});
  CHECK(r.out.find("ra_sr,10,4369") != std::string::npos);

  r = run_cli({"capacity", "--mode", "ra_r", "--qualities", "1"});
  CHECK(r.out.find("ra_r,3,131072") != std::string::npos);

  r = run_cli({"capacity", "--mode", "two_party"});
  CHECK(r.out.find("two_party,3,533333") != std::string::npos);
}

TEST_CASE("capacity sweep emits one row per meeting size") {
  auto r = run_cli({"capacity", "--mode", "ra_sr", "--sweep-participants", "2:5"});
  CHECK(r.code == 0);
  int rows = 0;
  std::istringstream is(r.out);
  std::string line;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 5);  // header + 4
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run_cli({"capacity", "--mode", "bogus"}).code == 2);
  CHECK(run_cli({"rewrite-bench", "--loss", "1.5"}).code == 2);
  CHECK(run_cli({"nonsense"}).code == 2);
  CHECK(run_cli({"simulate"}).code == 2);  // missing --config
}

TEST_CASE("rewrite-bench zero loss reports zero overhead") {
  auto r = run_cli({"rewrite-bench", "--heuristic", "slr", "--loss", "0", "--reorder", "0",
                "--packets", "20000", "--seeds", "2"});
  REQUIRE(r.code == 0);
  std::istringstream is(r.out);
  std::string header, row;
  std::getline(is, header);
  CHECK(header == "heuristic,loss,seed,overhead,nacks,nacks_oracle,forwarded");
  int rows = 0;
  while (std::getline(is, row)) {
    CHECK(row.find("slr,0,") == 0);
    CHECK(row.find(",0,0,") != std::string::npos);  // zero overhead, zero nacks
    ++rows;
  }
  CHECK(rows == 2);
}

TEST_CASE("rewrite-bench slr beats slm at matched seeds") {
  auto parse_overheads = [](const std::string& csv) {
    std::vector<double> out;
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
      size_t a = line.find(',');
      size_t b = line.find(',', a + 1);
      size_t c = line.find(',', b + 1);
      size_t d = line.find(',', c + 1);
      out.push_back(std::stod(line.substr(c + 1, d - c - 1)));
    }
    return out;
  };
  std::vector<std::string> common = {"--loss", "0.1", "--reorder", "0.02", "--packets",
                                     "20000", "--seeds", "10", "--seed", "100"};
  std::vector<std::string> slm_args = {"rewrite-bench", "--heuristic", "slm"};
  std::vector<std::string> slr_args = {"rewrite-bench", "--heuristic", "slr"};
  slm_args.insert(slm_args.end(), common.begin(), common.end());
  slr_args.insert(slr_args.end(), common.begin(), common.end());
  auto slm = parse_overheads(run_cli(slm_args).out);
  auto slr = parse_overheads(run_cli(slr_args).out);
  REQUIRE(slm.size() == 10);
  REQUIRE(slr.size() == 10);
  double slm_mean = 0, slr_mean = 0;
  for (double v : slm) slm_mean += v;
  for (double v : slr) slr_mean += v;
  CHECK(slr_mean <= slm_mean);
}

TEST_CASE("simulate on a missing config fails with a diagnostic") {
  auto r = run_cli({"simulate", "--config", "/nonexistent.json"});
  CHECK(r.code == 1);
  CHECK(r.err.find("cannot open") != std::string::npos);
}

TEST_CASE("simulate is byte-deterministic for a fixed seed") {
  // a small scenario written on the fly
  std::string path = "/tmp/sfusim_test_scenario.json";
  {
    std::ofstream of(path);
    of << R"({
      "duration_s": 5,
      "seed": 17,
      "traffic": {"preset": "compact"},
      "meetings": [{"id": 1, "participants": [
        {"id": 1}, {"id": 2}, {"id": 3, "downlink_capacity_bps": 1000000}
      ]}]
    })";
  }
  auto a = run_cli({"simulate", "--config", path});
  auto b = run_cli({"simulate", "--config", path});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  auto c = run_cli({"simulate", "--config", path, "--seed", "99"});
  CHECK(a.out != c.out);
  auto j = nlohmann::json::parse(a.out);
  CHECK(j.contains("plane_split"));
  CHECK(j["plane_split"]["data_packet_pct"].get<double>() > 90.0);
  std::remove(path.c_str());
}

TEST_CASE("simulate writes metrics and csv files") {
  std::string out_path = "/tmp/sfusim_test_metrics.json";
  std::string csv_path = "/tmp/sfusim_test_fps.csv";
  auto r = run_cli({"simulate", "--config", scenario("four_party_feedback.json"), "--out",
                out_path, "--csv", csv_path});
  REQUIRE(r.code == 0);
  std::ifstream jf(out_path);
  REQUIRE(jf.good());
  nlohmann::json j;
  jf >> j;
  CHECK(j.contains("sender_feedback"));
  std::ifstream cf(csv_path);
  std::string header;
  std::getline(cf, header);
  CHECK(header == "stream,window,fps");
  std::remove(out_path.c_str());
  std::remove(csv_path.c_str());
}

TEST_CASE("parse annotates the fixture trace") {
  auto r = run_cli({"parse", fixture("trace.jsonl")});
  REQUIRE(r.code == 0);
  std::vector<nlohmann::json> records;
  std::istringstream is(r.out);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) records.push_back(nlohmann::json::parse(line));
  }
  REQUIRE(records.size() == 9);

  CHECK(records[0]["annotation"]["protocol"] == "rtp");
  CHECK(records[0]["annotation"]["seq"] == 0x0102);
  CHECK(records[0]["annotation"]["payload_len"] == 4);
  CHECK(records[0]["route"] == "data_plane");

  CHECK(records[1]["annotation"]["extensions"].size() == 3);
  CHECK(records[1]["annotation"]["extensions"][1]["padding"] == true);

  CHECK(records[3]["annotation"]["protocol"] == "rtcp");
  CHECK(records[3]["annotation"]["messages"][1]["kind"] == "REMB");
  CHECK(records[3]["annotation"]["messages"][1]["remb_bps"] == 2000000);
  CHECK(records[3]["route"] == "data_plane_with_copy_to_agent");

  CHECK(records[4]["annotation"]["messages"][0]["kind"] == "SR");
  CHECK(records[4]["route"] == "data_plane");

  CHECK(records[5]["annotation"]["protocol"] == "stun");
  CHECK(records[5]["route"] == "control_plane_only");
  CHECK(records[6]["annotation"]["kind"] == "binding_response");
  CHECK(records[6]["annotation"]["xor_mapped_address"] == "192.0.2.1:32853");

  // corrupt record annotated, later records unaffected
  CHECK(records[7].contains("error"));
  CHECK(records[8].contains("error"));  // depth exceeded
  CHECK(records[8]["error"].get<std::string>().find("depth") != std::string::npos);
}

TEST_CASE("parse matches the stored golden output") {
  std::ifstream golden(fixture("trace_expected.jsonl"));
  REQUIRE(golden.good());
  std::stringstream want;
  want << golden.rdbuf();
  auto r = run_cli({"parse", fixture("trace.jsonl")});
  REQUIRE(r.code == 0);
  CHECK(r.out == want.str());
}

TEST_CASE("parse of an empty file succeeds with empty output") {
  std::string path = "/tmp/sfusim_empty_trace.jsonl";
  std::ofstream(path).close();
  auto r = run_cli({"parse", path});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::remove(path.c_str());
}

}  // TEST_SUITE

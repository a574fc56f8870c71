#include <doctest.h>
#include <qhk/problem_io.hpp>
#include <qhk/report.hpp>

#include <json.hpp>

using namespace qhk;
using json = nlohmann::json;

namespace {

std::string problem(const std::string& name) { return read_text_file(std::string(QHK_PROBLEMS_DIR) + "/" + name); }

}  // namespace

TEST_CASE("sha256 known vector") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("validate reports") {
  auto ok = run_validate(problem("example1_stable.json"));
  CHECK(ok.exit_code == kExitOk);
  auto bad = run_validate(problem("hopf_illegal.json"));
  CHECK(bad.exit_code == kExitInvalid);
  auto j = json::parse(bad.payload_json);
  CHECK(j["issues"][0]["code"] == "IllegalSection");
}

TEST_CASE("stability reports and determinism") {
  auto text = problem("example1_stable.json");
  auto a = run_stability(text), b = run_stability(text);
  CHECK(a.to_json() == b.to_json());
  auto j = json::parse(a.to_json());
  CHECK(j["format"] == "qhk-report/1");
  CHECK(j["payload"]["classification"] == "Stable");
  CHECK(j["input_sha256"] == sha256_hex(text));
  CHECK(json::parse(run_stability(problem("example1_unstable.json")).payload_json)["classification"] == "Unstable");
  CHECK(json::parse(run_stability(problem("hopf_eprime.json")).payload_json)["subobject_count"] == 3);
}

TEST_CASE("stored reports re-render identically") {
  auto r = run_stability(problem("example1_semistable.json"));
  auto back = report_from_json(r.to_json());
  CHECK(back.render_human() == r.render_human());
  CHECK(back.to_json() == r.to_json());
  CHECK_THROWS_AS(report_from_json("{}"), Error);
  CHECK_THROWS_AS(report_from_json("not json"), Error);
}

TEST_CASE("chambers artifacts") {
  auto r = run_chambers(problem("example1_stable.json"), std::nullopt);
  REQUIRE(r.artifacts.size() == 2);
  CHECK(r.artifacts[0].name == "walls.csv");
  const auto& w = r.artifacts[0].content;
  CHECK(std::count(w.begin(), w.end(), '\n') == 2);
  auto j = json::parse(r.payload_json);
  CHECK(j["cells"].size() == 2);
  CHECK(run_chambers(problem("example1_stable.json"), std::string("[-1,1]x[-1,1]")).to_json() != r.to_json());
}

TEST_CASE("solve on the unstable constant instance") {
  SolveOptions opt;
  opt.n_theta = 16;
  opt.n_phi = 32;
  auto r = run_solve(problem("constant_unstable.json"), opt);
  CHECK(r.exit_code == kExitNoConvergence);
  auto j = json::parse(r.payload_json);
  CHECK(j["outcome"] == "BlowUp");
  CHECK(j["destabilizer"]["support"] == json::array({"j"}));
}

TEST_CASE("props command is seeded") {
  PropsOptions o;
  o.count = 50;
  auto a = run_props_command(o), b = run_props_command(o);
  CHECK(a.exit_code == kExitOk);
  CHECK(a.to_json() == b.to_json());
}

TEST_CASE("problem without params is rejected by stability") {
  const char* text = R"({"base": {"fixture": "P1"}, "quiver": {"vertices": ["i"]}, "bundle": {"i": [{"m": 0}]}})";
  CHECK(run_validate(text).exit_code == kExitOk);
  CHECK_THROWS_AS(run_stability(text), Error);
}

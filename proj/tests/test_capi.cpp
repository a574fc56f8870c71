#include <doctest.h>
#include <qhk/qhk.h>

#include <cstring>
#include <string>

namespace {

std::string path(const char* name) { return std::string(QHK_PROBLEMS_DIR) + "/" + name; }

}  // namespace

TEST_CASE("version and errors") {
  CHECK(std::strlen(qhk_version()) > 0);
  qhk_problem* p = nullptr;
  CHECK(qhk_problem_load("/nonexistent.json", &p) == QHK_ERR_IO);
  CHECK(p == nullptr);
  CHECK(std::string(qhk_last_error_code()) == "IoFailure");
  const char* junk = "{";
  CHECK(qhk_problem_parse(junk, 1, &p) == QHK_ERR_INVALID);
  CHECK(qhk_problem_parse(nullptr, 0, &p) == QHK_ERR_INVALID);
}

TEST_CASE("stability through the C API") {
  qhk_problem* p = nullptr;
  REQUIRE(qhk_problem_load(path("example1_stable.json").c_str(), &p) == QHK_OK);
  CHECK(std::string(qhk_problem_canonical(p)).find("\"sigma\"") != std::string::npos);
  qhk_result* r = nullptr;
  REQUIRE(qhk_stability(p, &r) == QHK_OK);
  CHECK(qhk_result_exit_code(r) == 0);
  CHECK(std::string(qhk_result_command(r)) == "stability");
  std::string human = qhk_result_render(r, QHK_FORMAT_HUMAN);
  CHECK(human.find("classification: Stable") != std::string::npos);
  std::string js = qhk_result_render(r, QHK_FORMAT_JSON);
  qhk_result* back = nullptr;
  REQUIRE(qhk_report_load(js.data(), js.size(), &back) == QHK_OK);
  CHECK(std::string(qhk_result_render(back, QHK_FORMAT_JSON)) == js);
  qhk_result_free(back);
  qhk_result_free(r);

  REQUIRE(qhk_chambers(p, "[-3,3]x[-3,3]", &r) == QHK_OK);
  CHECK(qhk_result_artifact_count(r) == 2);
  CHECK(std::string(qhk_result_artifact_name(r, 0)) == "walls.csv");
  CHECK(std::string(qhk_result_artifact_name(r, 9)).empty());
  qhk_result_free(r);
  CHECK(qhk_chambers(p, "bad box", &r) == QHK_ERR_INVALID);
  qhk_problem_free(p);
}

TEST_CASE("invalid model through the C API") {
  qhk_problem* p = nullptr;
  REQUIRE(qhk_problem_load(path("hopf_illegal.json").c_str(), &p) == QHK_OK);
  qhk_result* r = nullptr;
  REQUIRE(qhk_validate(p, &r) == QHK_OK);
  CHECK(qhk_result_exit_code(r) == 2);
  qhk_result_free(r);
  CHECK(qhk_stability(p, &r) == QHK_ERR_INVALID);
  CHECK(std::string(qhk_last_error_code()) == "IllegalSection");
  qhk_problem_free(p);
}

TEST_CASE("solve and props through the C API") {
  qhk_problem* p = nullptr;
  REQUIRE(qhk_problem_load(path("constant_stable.json").c_str(), &p) == QHK_OK);
  qhk_solve_options o;
  qhk_solve_options_init(&o);
  o.n_theta = 16;
  o.n_phi = 32;
  o.dump_fields = 1;
  qhk_result* r = nullptr;
  REQUIRE(qhk_solve(p, &o, &r) == QHK_OK);
  CHECK(qhk_result_exit_code(r) == 0);
  CHECK(qhk_result_artifact_count(r) == 2);
  CHECK(std::string(qhk_result_artifact_name(r, 1)) == "u_j.csv");
  qhk_result_free(r);
  qhk_problem_free(p);

  qhk_props_options po;
  qhk_props_options_init(&po);
  po.count = 20;
  REQUIRE(qhk_props(&po, &r) == QHK_OK);
  CHECK(qhk_result_exit_code(r) == 0);
  qhk_result_free(r);
}

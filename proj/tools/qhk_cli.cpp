// Command-line front end. Talks to the library only through the C API.
#include <qhk/qhk.h>

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string problem;
  std::string out_dir;
  bool quiet = false;
  bool json = false;
  std::string box;
  double tol = -1, eps_ratio = -1, eps_floor = -1, blowup = -1;
  int max_newton = 0;
  std::string grid;
  std::string dump_dir;
  uint64_t seed = 1;
  long count = 10000;
  int max_vertices = 4, max_rank = 4;
};

int fail(const char* what) {
  std::cerr << "qhk: " << what;
  const char* code = qhk_last_error_code();
  if (*code) std::cerr << " [" << code << "]";
  std::cerr << ": " << qhk_last_error() << "\n";
  return 2;
}

int exit_for(qhk_status s) {
  switch (s) {
    case QHK_ERR_NONCONVERGENCE:
      return 3;
    case QHK_ERR_PROPERTY:
      return 4;
    case QHK_ERR_INTERNAL:
      return 1;
    default:
      return 2;
  }
}

bool write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
  if (!out) {
    std::cerr << "qhk: cannot write " << p << " [IoFailure]\n";
    return false;
  }
  return true;
}

// Prints the report, writes report.json plus artifacts when an output
// directory is known, and returns the process exit code.
int finish(qhk_result* r, const Flags& f, const std::string& artifact_dir) {
  int code = qhk_result_exit_code(r);
  if (!f.quiet) std::cout << qhk_result_render(r, f.json ? QHK_FORMAT_JSON : QHK_FORMAT_HUMAN);
  bool ok = true;
  if (!f.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(f.out_dir, ec);
    ok = write_file(fs::path(f.out_dir) / (std::string(qhk_result_command(r)) + ".json"), qhk_result_render(r, QHK_FORMAT_JSON));
  }
  std::string dir = artifact_dir.empty() ? f.out_dir : artifact_dir;
  if (!dir.empty()) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    for (size_t i = 0; i < qhk_result_artifact_count(r); ++i)
      ok = write_file(fs::path(dir) / qhk_result_artifact_name(r, i), qhk_result_artifact_content(r, i)) && ok;
  }
  qhk_result_free(r);
  if (!ok && code == 0) code = 2;
  return code;
}

int load(const Flags& f, qhk_problem** p) {
  if (qhk_problem_load(f.problem.c_str(), p) != QHK_OK) return fail("cannot load problem");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quiver bundle stability and Hermitian-Einstein lab"};
  app.set_version_flag("--version", qhk_version());
  app.require_subcommand(1);

  Flags f;
  if (const char* env = std::getenv("QHK_OUT_DIR")) f.out_dir = env;
  app.add_option("--out", f.out_dir, "directory for report.json and artifacts (default $QHK_OUT_DIR)");
  app.add_flag("--quiet", f.quiet, "suppress the report on stdout");
  app.add_flag("--json", f.json, "print the machine report instead of the human summary");
  app.add_option("--seed", f.seed, "seed for randomized commands");

  auto* validate = app.add_subcommand("validate", "check a problem file");
  auto* stability = app.add_subcommand("stability", "classify the model");
  auto* chambers = app.add_subcommand("chambers", "walls and chambers in tau-space");
  auto* solve = app.add_subcommand("solve", "run the continuity method");
  auto* props = app.add_subcommand("props", "seeded sweeps of the matrix inequalities");
  auto* report = app.add_subcommand("report", "re-render a stored machine report");

  for (auto* c : {validate, stability, chambers, solve}) c->add_option("problem", f.problem, "problem file")->required();
  report->add_option("report", f.problem, "report.json")->required();
  chambers->add_option("--box", f.box, "tau window, e.g. [-3,3]x[-3,3]");
  solve->add_option("--tol", f.tol, "residual tolerance");
  solve->add_option("--eps-ratio", f.eps_ratio, "epsilon reduction factor");
  solve->add_option("--eps-floor", f.eps_floor, "smallest positive epsilon");
  solve->add_option("--max-newton", f.max_newton, "Newton iterations per level");
  solve->add_option("--blowup-threshold", f.blowup, "sup|u| that counts as blow-up");
  solve->add_option("--grid", f.grid, "NTHETAxNPHI");
  solve->add_option("--dump-fields", f.dump_dir, "write u_<vertex>.csv here");
  props->add_option("--count", f.count, "instances per sweep");
  props->add_option("--max-vertices", f.max_vertices);
  props->add_option("--max-rank", f.max_rank);
  for (auto* c : {validate, stability, chambers, solve, props, report}) {
    c->add_option("--out", f.out_dir);
    c->add_flag("--quiet", f.quiet);
    c->add_flag("--json", f.json);
    c->add_option("--seed", f.seed);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  qhk_result* r = nullptr;
  qhk_problem* p = nullptr;
  qhk_status s = QHK_OK;

  if (report->parsed()) {
    std::ifstream in(f.problem, std::ios::binary);
    if (!in) {
      std::cerr << "qhk: cannot read " << f.problem << " [IoFailure]\n";
      return 2;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    if (qhk_report_load(text.data(), text.size(), &r) != QHK_OK) return fail("bad report");
    f.out_dir.clear();
    return finish(r, f, "");
  }
  if (props->parsed()) {
    qhk_props_options o;
    qhk_props_options_init(&o);
    o.seed = f.seed;
    o.count = f.count;
    o.max_vertices = f.max_vertices;
    o.max_rank = f.max_rank;
    s = qhk_props(&o, &r);
    if (s != QHK_OK) {
      fail("props failed");
      return exit_for(s);
    }
    return finish(r, f, "");
  }

  if (int rc = load(f, &p)) return rc;
  std::string artifact_dir;
  if (validate->parsed()) {
    s = qhk_validate(p, &r);
  } else if (stability->parsed()) {
    s = qhk_stability(p, &r);
  } else if (chambers->parsed()) {
    s = qhk_chambers(p, f.box.empty() ? nullptr : f.box.c_str(), &r);
  } else if (solve->parsed()) {
    qhk_solve_options o;
    qhk_solve_options_init(&o);
    o.tol = f.tol;
    o.eps_ratio = f.eps_ratio;
    o.eps_floor = f.eps_floor;
    o.blowup_threshold = f.blowup;
    o.max_newton = f.max_newton;
    if (!f.grid.empty()) {
      int nt = 0, np = 0;
      if (std::sscanf(f.grid.c_str(), "%dx%d", &nt, &np) != 2 || nt <= 0 || np <= 0) {
        std::cerr << "qhk: --grid expects NTHETAxNPHI [InvalidInput]\n";
        qhk_problem_free(p);
        return 2;
      }
      o.n_theta = nt;
      o.n_phi = np;
    }
    o.dump_fields = !f.dump_dir.empty();
    artifact_dir = f.dump_dir;
    s = qhk_solve(p, &o, &r);
  }
  qhk_problem_free(p);
  if (s != QHK_OK) {
    fail("command failed");
    return exit_for(s);
  }
  return finish(r, f, artifact_dir);
}

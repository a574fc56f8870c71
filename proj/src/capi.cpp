#include "qhk/qhk.h"

#include <exception>
#include <new>
#include <string>

#include "qhk/problem_io.hpp"
#include "qhk/report.hpp"

struct qhk_problem {
  std::string text;
  std::string canonical;
};

struct qhk_result {
  qhk::Report report;
  std::string human, json;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_code;

void clear_error() {
  g_error.clear();
  g_code.clear();
}

qhk_status status_for(qhk::ErrorCode c) {
  switch (c) {
    case qhk::ErrorCode::IoFailure:
      return QHK_ERR_IO;
    case qhk::ErrorCode::CalibrationAmbiguous:
    case qhk::ErrorCode::LinearSolveFailure:
    case qhk::ErrorCode::LineSearchFailure:
    case qhk::ErrorCode::TransformFailure:
      return QHK_ERR_NONCONVERGENCE;
    case qhk::ErrorCode::VerificationFailure:
      return QHK_ERR_PROPERTY;
    default:
      return QHK_ERR_INVALID;
  }
}

template <class F>
qhk_status guard(F&& f) {
  clear_error();
  try {
    return f();
  } catch (const qhk::Error& e) {
    g_error = e.what();
    g_code = qhk::error_name(e.code());
    return status_for(e.code());
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
    g_code = "Internal";
  } catch (const std::exception& e) {
    g_error = e.what();
    g_code = "Internal";
  } catch (...) {
    g_error = "unknown failure";
    g_code = "Internal";
  }
  return QHK_ERR_INTERNAL;
}

qhk_status null_arg(const char* what) {
  g_error = std::string("null argument: ") + what;
  g_code = "InvalidInput";
  return QHK_ERR_INVALID;
}

qhk_status wrap(qhk::Report r, qhk_result** out) {
  *out = new qhk_result{std::move(r), {}, {}};
  return QHK_OK;
}

}  // namespace

extern "C" {

const char* qhk_version(void) { return QHK_VERSION; }
const char* qhk_last_error(void) { return g_error.c_str(); }
const char* qhk_last_error_code(void) { return g_code.c_str(); }

qhk_status qhk_problem_parse(const char* text, size_t len, qhk_problem** out) {
  if (!text || !out) return null_arg("text/out");
  return guard([&] {
    std::string s(text, len);
    auto p = qhk::parse_problem(s);
    *out = new qhk_problem{s, qhk::serialize_problem(p)};
    return QHK_OK;
  });
}

qhk_status qhk_problem_load(const char* path, qhk_problem** out) {
  if (!path || !out) return null_arg("path/out");
  return guard([&] {
    std::string s = qhk::read_text_file(path);
    auto p = qhk::parse_problem(s);
    *out = new qhk_problem{s, qhk::serialize_problem(p)};
    return QHK_OK;
  });
}

const char* qhk_problem_canonical(const qhk_problem* p) { return p ? p->canonical.c_str() : ""; }
void qhk_problem_free(qhk_problem* p) { delete p; }

qhk_status qhk_validate(const qhk_problem* p, qhk_result** out) {
  if (!p || !out) return null_arg("problem/out");
  return guard([&] { return wrap(qhk::run_validate(p->text), out); });
}

qhk_status qhk_stability(const qhk_problem* p, qhk_result** out) {
  if (!p || !out) return null_arg("problem/out");
  return guard([&] { return wrap(qhk::run_stability(p->text), out); });
}

qhk_status qhk_chambers(const qhk_problem* p, const char* box, qhk_result** out) {
  if (!p || !out) return null_arg("problem/out");
  return guard([&] {
    std::optional<std::string> b;
    if (box) b = box;
    return wrap(qhk::run_chambers(p->text, b), out);
  });
}

void qhk_solve_options_init(qhk_solve_options* o) {
  if (!o) return;
  *o = qhk_solve_options{-1, -1, -1, -1, 0, 0, 0, 0};
}

qhk_status qhk_solve(const qhk_problem* p, const qhk_solve_options* o, qhk_result** out) {
  if (!p || !out) return null_arg("problem/out");
  return guard([&] {
    qhk::SolveOptions opt;
    if (o) {
      if (o->tol > 0) opt.tol = o->tol;
      if (o->eps_ratio > 0) opt.eps_ratio = o->eps_ratio;
      if (o->eps_floor > 0) opt.eps_floor = o->eps_floor;
      if (o->blowup_threshold > 0) opt.blowup_threshold = o->blowup_threshold;
      if (o->max_newton > 0) opt.max_newton = o->max_newton;
      if (o->n_theta > 0) opt.n_theta = o->n_theta;
      if (o->n_phi > 0) opt.n_phi = o->n_phi;
      opt.dump_fields = o->dump_fields != 0;
    }
    return wrap(qhk::run_solve(p->text, opt), out);
  });
}

void qhk_props_options_init(qhk_props_options* o) {
  if (!o) return;
  qhk::PropsOptions d;
  *o = qhk_props_options{d.seed, d.count, d.max_vertices, d.max_rank};
}

qhk_status qhk_props(const qhk_props_options* o, qhk_result** out) {
  if (!out) return null_arg("out");
  return guard([&] {
    qhk::PropsOptions opt;
    if (o) {
      opt.seed = o->seed;
      opt.count = o->count;
      opt.max_vertices = o->max_vertices;
      opt.max_rank = o->max_rank;
    }
    return wrap(qhk::run_props_command(opt), out);
  });
}

qhk_status qhk_report_load(const char* text, size_t len, qhk_result** out) {
  if (!text || !out) return null_arg("text/out");
  return guard([&] { return wrap(qhk::report_from_json(std::string(text, len)), out); });
}

int qhk_result_exit_code(const qhk_result* r) { return r ? r->report.exit_code : QHK_ERR_INTERNAL; }
const char* qhk_result_command(const qhk_result* r) { return r ? r->report.command.c_str() : ""; }

const char* qhk_result_render(qhk_result* r, qhk_format fmt) {
  if (!r) return "";
  clear_error();
  try {
    if (fmt == QHK_FORMAT_JSON) {
      if (r->json.empty()) r->json = r->report.to_json();
      return r->json.c_str();
    }
    if (r->human.empty()) r->human = r->report.render_human();
    return r->human.c_str();
  } catch (const std::exception& e) {
    g_error = e.what();
    g_code = "Internal";
    return "";
  }
}

size_t qhk_result_artifact_count(const qhk_result* r) { return r ? r->report.artifacts.size() : 0; }

const char* qhk_result_artifact_name(const qhk_result* r, size_t i) {
  if (!r || i >= r->report.artifacts.size()) return "";
  return r->report.artifacts[i].name.c_str();
}

const char* qhk_result_artifact_content(const qhk_result* r, size_t i) {
  if (!r || i >= r->report.artifacts.size()) return "";
  return r->report.artifacts[i].content.c_str();
}

void qhk_result_free(qhk_result* r) { delete r; }

}  // extern "C"

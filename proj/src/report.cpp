#include "qhk/report.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <iomanip>
#include <json.hpp>
#include <sstream>

namespace qhk {

using json = nlohmann::ordered_json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::IoFailure, "sha256 failed");
  std::ostringstream os;
  for (unsigned int k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << int(md[k]);
  return os.str();
}

std::string Report::to_json() const {
  json j;
  j["format"] = "qhk-report/1";
  j["command"] = command;
  j["input_sha256"] = input_digest;
  j["tool_version"] = kToolVersion;
  j["exit_code"] = exit_code;
  j["payload"] = json::parse(payload_json);
  json names = json::array();
  for (const auto& a : artifacts) names.push_back(a.name);
  j["artifacts"] = names;
  return j.dump(2) + "\n";
}

Report report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("malformed report: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "qhk-report/1" || !j.contains("payload") || !j.contains("command"))
    throw Error(ErrorCode::InvalidInput, "not a qhk-report/1 document");
  Report r;
  r.command = j.at("command").get<std::string>();
  r.input_digest = j.value("input_sha256", "");
  r.exit_code = j.value("exit_code", 0);
  r.payload_json = j.at("payload").dump();
  return r;
}

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string num_text(const json& v) {
  if (v.is_number()) return fmt(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

void render_validate(const json& p, std::ostream& os) {
  if (p.at("valid").get<bool>()) {
    os << "model is valid: " << p.at("vertices") << " vertices, " << p.at("arrows") << " arrows\n";
    return;
  }
  os << "model is invalid:\n";
  for (const auto& i : p.at("issues")) os << "  " << i.at("code").get<std::string>() << ": " << i.at("message").get<std::string>() << "\n";
}

void render_stability(const json& p, std::ostream& os) {
  os << "classification: " << p.at("classification").get<std::string>() << "\n";
  os << "slope(E) = " << p.at("total").at("slope").get<std::string>() << " over " << p.at("subobject_count")
     << " subobjects\n";
  for (const auto& w : p.at("witnesses"))
    os << "  witness " << w.at("name").get<std::string>() << "  slope " << w.at("slope").get<std::string>() << "\n";
  if (p.contains("max_slope"))
    os << "max-slope subobject: " << p.at("max_slope").at("name").get<std::string>() << " (slope "
       << p.at("max_slope").at("slope").get<std::string>() << ")\n";
  if (p.value("polystable_split", false)) os << "splits as a direct sum of equal-slope stable pieces\n";
}

void render_chambers(const json& p, std::ostream& os) {
  os << p.at("walls").size() << " wall(s)\n";
  for (const auto& w : p.at("walls")) {
    os << "  ";
    bool first = true;
    for (const auto& c : w.at("normal").items()) {
      os << (first ? "" : " + ") << c.value().get<std::string>() << "*tau_" << c.key();
      first = false;
    }
    os << " = " << w.at("offset").get<std::string>() << "   from";
    for (const auto& s : w.at("sources")) os << " " << s.get<std::string>();
    os << "\n";
  }
  for (const auto& s : p.at("everywhere_semistable")) os << "  everywhere semistable: " << s.get<std::string>() << "\n";
  if (p.contains("cells")) {
    os << p.at("cells").size() << " cell(s) in " << p.at("box").get<std::string>() << "\n";
    for (const auto& c : p.at("cells")) {
      os << "  (";
      bool first = true;
      for (const auto& t : c.at("representative")) {
        os << (first ? "" : ", ") << t.get<std::string>();
        first = false;
      }
      os << ")  " << c.at("classification").get<std::string>() << "\n";
    }
  } else if (p.contains("note")) {
    os << p.at("note").get<std::string>() << "\n";
  }
}

void render_solve(const json& p, std::ostream& os) {
  os << "outcome: " << p.at("outcome").get<std::string>();
  if (!p.value("note", "").empty()) os << " (" << p.at("note").get<std::string>() << ")";
  os << "\n";
  os << "classification: " << p.at("classification").get<std::string>() << ", gamma = " << p.at("gamma").get<std::string>()
     << ", lambda = " << num_text(p.at("lambda")) << ", c_delta = " << num_text(p.at("c_delta")) << "\n";
  os << "continuation: " << p.at("trace").size() << " epsilon levels, final epsilon "
     << (p.at("trace").empty() ? "-" : num_text(p.at("trace").back().at("epsilon"))) << "\n";
  os << "residual sup:";
  for (const auto& r : p.at("residual_sup").items()) os << " " << r.key() << "=" << num_text(r.value());
  os << "\n";
  if (p.contains("verification")) {
    const auto& v = p.at("verification");
    os << "verification " << (v.at("passed").get<bool>() ? "passed" : "FAILED") << ": gamma identity "
       << num_text(v.at("gamma_identity")) << ", envelope margin " << num_text(v.at("envelope_min_margin")) << "\n";
    for (const auto& a : v.at("arrow_identity"))
      os << "  arrow " << a.at("arrow").get<std::string>() << ": lhs " << num_text(a.at("lhs")) << " rhs "
         << num_text(a.at("rhs")) << " residual " << num_text(a.at("residual")) << "\n";
  }
  if (p.contains("destabilizer")) {
    const auto& d = p.at("destabilizer");
    os << "destabilizing support " << d.at("support_name").get<std::string>() << ": slope "
       << d.at("slope_sub").get<std::string>() << " >= " << d.at("slope_total").get<std::string>() << " "
       << (d.at("slope_ok").get<bool>() ? "yes" : "NO") << ", arrow-closed " << (d.at("arrow_closed").get<bool>() ? "yes" : "NO")
       << ", matches max-slope " << (d.at("matches_max_slope").get<bool>() ? "yes" : "NO") << "\n";
  }
}

void render_props(const json& p, std::ostream& os) {
  os << p.at("instances") << " random instances (seed " << p.at("seed") << ")\n";
  os << "  min moment-log gap    " << num_text(p.at("moment_log_min")) << "\n";
  os << "  min power-bracket gap " << num_text(p.at("power_bracket_min")) << "\n";
  os << "  max adjoint error     " << num_text(p.at("adjoint_max")) << "\n";
  os << "  failures              " << p.at("failures") << "\n";
}

}  // namespace

std::string Report::render_human() const {
  std::ostringstream os;
  json p = json::parse(payload_json);
  if (command == "validate") render_validate(p, os);
  else if (command == "stability") render_stability(p, os);
  else if (command == "chambers") render_chambers(p, os);
  else if (command == "solve") render_solve(p, os);
  else if (command == "props") render_props(p, os);
  else os << p.dump(2) << "\n";
  return os.str();
}

namespace {

json slope_json(const SlopeReport& s) {
  return {{"degree", to_string(s.degree)}, {"sigma_rank", to_string(s.sigma_rank)}, {"slope", to_string(s.slope)}};
}

json vertex_map(const QBundleModel& m, const std::vector<double>& v) {
  json o = json::object();
  for (std::size_t i = 0; i < v.size(); ++i) o[m.quiver.vertex(i)] = v[i];
  return o;
}

json vertex_list(const QBundleModel& m, const std::vector<std::size_t>& s) {
  json a = json::array();
  for (auto i : s) a.push_back(m.quiver.vertex(i));
  return a;
}

json witness_json(const QBundleModel& m, const Witness& w) {
  json ranks = json::object();
  for (std::size_t i = 0; i < w.sub.rank.size(); ++i) ranks[m.quiver.vertex(i)] = w.sub.rank[i];
  return {{"name", w.sub.name},
          {"provenance", w.sub.provenance == Provenance::Declared ? "declared" : "enumerated"},
          {"ranks", ranks},
          {"degree", to_string(w.slope.degree)},
          {"slope", to_string(w.slope.slope)}};
}

ModelPtr validated(const Problem& p) {
  auto res = validate_model(p.model);
  if (!res.ok()) throw Error(res.issues.front().code, res.issues.front().message);
  return res.model;
}

}  // namespace

Report run_validate(const std::string& text) {
  Report r;
  r.command = "validate";
  r.input_digest = sha256_hex(text);
  Problem p = parse_problem(text);
  auto res = validate_model(p.model);
  json issues = json::array();
  for (const auto& i : res.issues) issues.push_back({{"code", error_name(i.code)}, {"message", i.message}});
  if (res.ok() && p.has_params) {
    try {
      check_params(p.model, p.params);
    } catch (const Error& e) {
      issues.push_back({{"code", error_name(e.code())}, {"message", e.what()}});
    }
  }
  json payload = {{"valid", issues.empty()},
                  {"fixture", fixture_name(p.model.base)},
                  {"vertices", p.model.quiver.num_vertices()},
                  {"arrows", p.model.quiver.num_arrows()},
                  {"issues", issues}};
  r.payload_json = payload.dump();
  r.exit_code = issues.empty() ? kExitOk : kExitInvalid;
  return r;
}

Report run_stability(const std::string& text) {
  Report r;
  r.command = "stability";
  r.input_digest = sha256_hex(text);
  Problem p = parse_problem(text);
  auto model = validated(p);
  const auto& params = require_params(p);
  auto cls = classify(*model, params);
  json payload;
  payload["classification"] = classification_name(cls.kind);
  payload["total"] = slope_json(cls.total);
  payload["subobject_count"] = cls.subobject_count;
  json wit = json::array();
  for (const auto& w : cls.witnesses) wit.push_back(witness_json(p.model, w));
  payload["witnesses"] = wit;
  if (cls.subobject_count > 0) payload["max_slope"] = witness_json(p.model, max_slope_subobject(*model, params));
  payload["polystable_split"] = is_polystable_split(*model, params);
  r.payload_json = payload.dump();
  return r;
}

Report run_chambers(const std::string& text, const std::optional<std::string>& box_flag) {
  Report r;
  r.command = "chambers";
  r.input_digest = sha256_hex(text);
  Problem p = parse_problem(text);
  auto model = validated(p);
  const auto& params = require_params(p);
  auto ws = wall_set(*model, params.alpha, params.sigma);
  const auto& m = p.model;
  json payload;
  json walls = json::array();
  for (const auto& w : ws.walls) {
    json normal = json::object(), sources = json::array(), sides = json::array();
    for (std::size_t i = 0; i < w.normal.size(); ++i) normal[m.quiver.vertex(i)] = to_string(w.normal[i]);
    for (std::size_t s = 0; s < w.sources.size(); ++s) {
      sources.push_back(w.sources[s].name);
      sides.push_back(w.stable_below[s] ? "below" : "above");
    }
    walls.push_back({{"normal", normal}, {"offset", to_string(w.offset)}, {"sources", sources}, {"stable_side", sides}});
  }
  payload["walls"] = walls;
  json ess = json::array(), never = json::array();
  for (const auto& s : ws.everywhere_semistable) ess.push_back(s.name);
  for (const auto& s : ws.never_equal) never.push_back(s.name);
  payload["everywhere_semistable"] = ess;
  payload["never_equal"] = never;
  r.artifacts.push_back({"walls.csv", walls_csv(m, ws.walls)});
  if (ws.dimension == 2) {
    std::string box_text = box_flag ? *box_flag : p.box ? *p.box : "[-3,3]x[-3,3]";
    Box2 box = parse_box(box_text);
    auto arr = arrange_2d(ws, box);
    for (auto& c : arr.cells) c.classification = classify_sample(*model, params.alpha, params.sigma, c.representative);
    json cells = json::array();
    for (const auto& c : arr.cells) {
      json rep = json::array();
      for (const auto& t : c.representative) rep.push_back(to_string(t));
      cells.push_back({{"representative", rep}, {"side", c.side}, {"classification", classification_name(*c.classification)}});
    }
    payload["box"] = box_text;
    payload["cells"] = cells;
    r.artifacts.push_back({"cells.csv", cells_csv(m, arr)});
  } else {
    payload["note"] = "cell geometry is computed for two vertices only; use classify at sample points";
  }
  r.payload_json = payload.dump();
  return r;
}

Report run_solve(const std::string& text, const SolveOptions& opt) {
  Report r;
  r.command = "solve";
  r.input_digest = sha256_hex(text);
  Problem p = parse_problem(text);
  auto model = validated(p);
  const auto& params = require_params(p);
  SolveConfig cfg = p.solver;
  if (opt.tol) cfg.tol = *opt.tol;
  if (opt.eps_ratio) cfg.eps_ratio = *opt.eps_ratio;
  if (opt.eps_floor) cfg.eps_floor = *opt.eps_floor;
  if (opt.blowup_threshold) cfg.blowup_threshold = *opt.blowup_threshold;
  if (opt.max_newton) cfg.max_newton = *opt.max_newton;
  check_config(cfg);
  int nt = opt.n_theta.value_or(p.n_theta), np = opt.n_phi.value_or(p.n_phi);
  SphereGrid grid = make_sphere_grid(nt, np, p.volume);
  auto cls = classify(*model, params);
  auto res = continuity_solve(model, params, grid, cfg);
  const auto& rep = res.report;
  const auto& m = p.model;

  json payload;
  payload["outcome"] = outcome_name(rep.outcome);
  payload["note"] = rep.note;
  payload["classification"] = classification_name(cls.kind);
  payload["grid"] = {nt, np};
  payload["volume"] = to_string(p.volume);
  payload["lambda"] = rep.lambda;
  payload["gamma"] = to_string(rep.gamma);
  payload["c_delta"] = rep.calibration.c_delta;
  payload["calibration"] = {{"ritz_min_plus", rep.calibration.ritz_min_plus},
                            {"ritz_min_minus", rep.calibration.ritz_min_minus},
                            {"plus_solves", rep.calibration.plus_solves},
                            {"minus_solves", rep.calibration.minus_solves}};
  payload["config"] = {{"tol", cfg.tol},           {"eps_start", cfg.eps_start}, {"eps_ratio", cfg.eps_ratio},
                       {"eps_floor", cfg.eps_floor}, {"max_newton", cfg.max_newton},
                       {"blowup_threshold", cfg.blowup_threshold}};
  payload["mK"] = rep.mK;
  payload["residual_sup"] = vertex_map(m, rep.residual_sup);
  payload["residual_l2"] = vertex_map(m, rep.residual_l2);
  json trace = json::array();
  for (const auto& t : rep.trace)
    trace.push_back({{"epsilon", t.epsilon},
                     {"max_abs_u", vertex_map(m, t.max_abs_u)},
                     {"residual", t.residual},
                     {"newton_iterations", t.newton_iterations},
                     {"envelope", t.envelope},
                     {"within_envelope", t.within_envelope}});
  payload["trace"] = trace;
  if (rep.verification) {
    const auto& v = *rep.verification;
    json ids = json::array();
    for (const auto& a : v.arrow_identity)
      ids.push_back({{"arrow", a.arrow}, {"lhs", a.lhs}, {"rhs", a.rhs}, {"residual", a.residual}});
    payload["verification"] = {{"passed", v.passed},
                               {"residual_sup", vertex_map(m, v.residual_sup)},
                               {"residual_l2", vertex_map(m, v.residual_l2)},
                               {"gamma_identity", v.gamma_identity},
                               {"arrow_identity", ids},
                               {"envelope_min_margin", v.envelope_min_margin}};
  }
  if (rep.destabilizer) {
    const auto& d = *rep.destabilizer;
    json scale = json::object();
    for (std::size_t i = 0; i < d.scale.size(); ++i) scale[m.quiver.vertex(i)] = d.scale[i];
    payload["destabilizer"] = {{"support", vertex_list(m, d.support)},
                               {"support_name", support_name(m, d.support)},
                               {"collapsed", vertex_list(m, d.collapsed)},
                               {"scale", scale},
                               {"proper", d.proper},
                               {"arrow_closed", d.arrow_closed},
                               {"idempotent_residual", d.idempotent_residual},
                               {"selfadjoint_residual", d.selfadjoint_residual},
                               {"closure_residual", d.closure_residual},
                               {"slope_sub", to_string(d.slope_sub.slope)},
                               {"slope_total", to_string(d.slope_total.slope)},
                               {"slope_ok", d.slope_ok},
                               {"max_slope_support", vertex_list(m, d.max_slope_support)},
                               {"matches_max_slope", d.matches_max_slope}};
  }
  r.payload_json = payload.dump();
  r.exit_code = rep.outcome == Outcome::Converged ? kExitOk : kExitNoConvergence;
  if (opt.dump_fields) {
    for (std::size_t i = 0; i < res.state.u.size(); ++i)
      r.artifacts.push_back({"u_" + m.quiver.vertex(i) + ".csv", field_csv(grid, res.state.u[i])});
  }
  return r;
}

Report run_props_command(const PropsOptions& opt) {
  Report r;
  r.command = "props";
  std::string input = "props seed=" + std::to_string(opt.seed) + " count=" + std::to_string(opt.count) +
                      " max_vertices=" + std::to_string(opt.max_vertices) + " max_rank=" + std::to_string(opt.max_rank);
  r.input_digest = sha256_hex(input);
  auto s = run_props(opt);
  json payload = {{"seed", opt.seed},
                  {"instances", s.instances},
                  {"moment_log_min", s.moment_log_min},
                  {"power_bracket_min", s.power_bracket_min},
                  {"adjoint_max", s.adjoint_max},
                  {"moment_hermitian_max", s.moment_hermitian_max},
                  {"gap_tol", opt.gap_tol},
                  {"failures", s.failures}};
  r.payload_json = payload.dump();
  r.exit_code = s.failures == 0 ? kExitOk : kExitPropertyFailure;
  if (!s.first_failure.empty()) r.artifacts.push_back({"props_failure.json", s.first_failure + "\n"});
  return r;
}

}  // namespace qhk

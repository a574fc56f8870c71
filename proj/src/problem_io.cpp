#include "qhk/problem_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace qhk {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidInput, what); }

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) bad(where + ": missing '" + key + "'");
  return j.at(key);
}

Rational rational_of(const json& v, const std::string& where) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(mpz_class(v.dump(), 10));
  bad(where + ": rationals are written as strings \"p/q\" or integers");
}

long integer_of(const json& v, const std::string& where) {
  if (!v.is_number_integer()) bad(where + ": integer expected");
  return v.get<long>();
}

Summand summand_of(const json& s, Fixture base, const std::string& where) {
  if (!s.is_object()) bad(where + ": summand must be an object");
  if (s.contains("type")) {
    auto t = s.at("type").get<std::string>();
    long m = integer_of(need(s, "m", where), where);
    if (t == "Lplus") return Summand::lplus(m);
    if (t == "Lminus") return Summand::lminus(m);
    if (t == "O") return Summand::line(m);
    bad(where + ": unknown summand type '" + t + "'");
  }
  if (s.contains("m")) {
    long m = integer_of(s.at("m"), where);
    return base == Fixture::P1 ? Summand::line(m) : Summand{m, m, SummandType::Plain, m};
  }
  Summand out;
  out.deg_plus = integer_of(need(s, "deg_plus", where), where);
  out.deg_minus = integer_of(need(s, "deg_minus", where), where);
  return out;
}

Section section_of(const json& s, const std::string& where) {
  if (s.is_string() && s.get<std::string>() == "zero") return Section::zero();
  if (s.is_number_integer() && s.get<long>() == 0) return Section::zero();
  const json& poly = need(s, "poly", where);
  if (!poly.is_array()) bad(where + ": poly must be an array");
  std::vector<ComplexRational> c;
  for (const auto& x : poly) {
    if (x.is_array()) {
      if (x.size() != 2) bad(where + ": complex coefficient needs [re, im]");
      c.push_back({rational_of(x[0], where), rational_of(x[1], where)});
    } else {
      c.push_back({rational_of(x, where), Rational(0)});
    }
  }
  return Section(std::move(c));
}

std::vector<Rational> per_vertex(const json& block, const Quiver& q, const std::string& where,
                                 std::optional<Rational> fallback) {
  std::vector<Rational> out;
  if (block.is_null()) {
    if (!fallback) bad(where + ": missing");
    return std::vector<Rational>(q.num_vertices(), *fallback);
  }
  if (block.is_array()) {
    if (block.size() != q.num_vertices()) bad(where + ": one value per vertex expected");
    for (const auto& v : block) out.push_back(rational_of(v, where));
    return out;
  }
  if (!block.is_object()) bad(where + ": object keyed by vertex expected");
  for (const auto& key : block.items())
    if (!q.vertex_index(key.key())) bad(where + ": unknown vertex '" + key.key() + "'");
  for (const auto& v : q.vertices()) {
    if (!block.contains(v)) {
      if (!fallback) bad(where + ": no value for vertex '" + v + "'");
      out.push_back(*fallback);
    } else {
      out.push_back(rational_of(block.at(v), where + "." + v));
    }
  }
  return out;
}

void apply_solver(const json& s, SolveConfig& c) {
  auto num = [&](const char* k, double& dst) {
    if (s.contains(k)) {
      if (!s.at(k).is_number()) bad(std::string("solver.") + k + ": number expected");
      dst = s.at(k).get<double>();
    }
  };
  num("tol", c.tol);
  num("eps_start", c.eps_start);
  num("eps_ratio", c.eps_ratio);
  num("eps_floor", c.eps_floor);
  num("level_tol", c.level_tol);
  num("blowup_threshold", c.blowup_threshold);
  num("collapse_threshold", c.collapse_threshold);
  if (s.contains("max_newton")) c.max_newton = static_cast<int>(integer_of(s.at("max_newton"), "solver.max_newton"));
  check_config(c);
}

json rational_json(const Rational& q) { return to_string(q); }

}  // namespace

Problem parse_problem(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
  try {
    if (!j.is_object()) bad("problem must be a JSON object");
    if (j.contains("format") && j.at("format") != "qhk-problem/1") bad("unsupported format tag");
    Problem p;

    const json& base = need(j, "base", "problem");
    auto fixture = need(base, "fixture", "base").get<std::string>();
    if (fixture == "P1") p.model.base = Fixture::P1;
    else if (fixture == "HopfTable") p.model.base = Fixture::HopfTable;
    else bad("base.fixture must be P1 or HopfTable");
    if (base.contains("grid")) {
      const auto& g = base.at("grid");
      if (!g.is_array() || g.size() != 2) bad("base.grid must be [n_theta, n_phi]");
      p.n_theta = static_cast<int>(integer_of(g[0], "base.grid"));
      p.n_phi = static_cast<int>(integer_of(g[1], "base.grid"));
    }
    if (base.contains("volume")) p.volume = rational_of(base.at("volume"), "base.volume");
    if (p.volume <= 0) bad("base.volume must be positive");

    const json& q = need(j, "quiver", "problem");
    std::vector<std::string> verts;
    for (const auto& v : need(q, "vertices", "quiver")) verts.push_back(v.get<std::string>());
    std::vector<ArrowSpec> arrows;
    if (q.contains("arrows")) {
      for (const auto& a : q.at("arrows"))
        arrows.push_back({need(a, "id", "quiver.arrows").get<std::string>(), need(a, "tail", "arrow").get<std::string>(),
                          need(a, "head", "arrow").get<std::string>()});
    }
    p.model.quiver = build_quiver(verts, arrows);
    const Quiver& Q = p.model.quiver;

    const json& bundle = need(j, "bundle", "problem");
    for (const auto& key : bundle.items())
      if (!Q.vertex_index(key.key())) bad("bundle: unknown vertex '" + key.key() + "'");
    for (const auto& v : Q.vertices()) {
      const json& list = need(bundle, v.c_str(), "bundle");
      VertexBundleData vd;
      if (list.is_array()) {
        for (const auto& s : list) vd.summands.push_back(summand_of(s, p.model.base, "bundle." + v));
      } else {
        vd.summands.push_back(summand_of(list, p.model.base, "bundle." + v));
      }
      p.model.vertex_data.push_back(vd);
    }

    json sections = j.contains("arrows") ? j.at("arrows") : json::object();
    for (const auto& key : sections.items())
      if (!Q.arrow_index(key.key())) bad("arrows: unknown arrow '" + key.key() + "'");
    for (const auto& a : Q.arrows()) {
      const json& s = need(sections, a.id.c_str(), "arrows");
      ArrowData ad;
      ad.rows = p.model.vertex_data[a.head].rank();
      ad.cols = p.model.vertex_data[a.tail].rank();
      json grid = s;
      if (!(s.is_array() && !s.empty() && s[0].is_array())) grid = json::array({json::array({s})});
      if (grid.size() != static_cast<std::size_t>(ad.rows)) bad("arrows." + a.id + ": needs head-rank rows");
      for (const auto& row : grid) {
        if (row.size() != static_cast<std::size_t>(ad.cols)) bad("arrows." + a.id + ": needs tail-rank columns");
        for (const auto& cell : row) ad.blocks.push_back(section_of(cell, "arrows." + a.id));
      }
      p.model.arrow_data.push_back(std::move(ad));
    }

    if (j.contains("params")) {
      const json& pr = j.at("params");
      p.has_params = true;
      p.params.alpha = per_vertex(pr.contains("alpha") ? pr.at("alpha") : json(), Q, "params.alpha", Rational(1, 2));
      p.params.sigma = per_vertex(pr.contains("sigma") ? pr.at("sigma") : json(), Q, "params.sigma", std::nullopt);
      p.params.tau = per_vertex(pr.contains("tau") ? pr.at("tau") : json(), Q, "params.tau", std::nullopt);
    }

    if (j.contains("subobjects")) {
      std::vector<SubobjectSpec> subs;
      for (const auto& s : j.at("subobjects")) {
        SubobjectSpec sub;
        sub.name = need(s, "name", "subobjects").get<std::string>();
        sub.provenance = Provenance::Declared;
        auto ints = [&](const char* key, bool required) {
          std::vector<long> out;
          if (!s.contains(key)) {
            if (required) bad("subobject '" + sub.name + "': missing " + key);
            return std::vector<long>(Q.num_vertices(), 0);
          }
          const json& b = s.at(key);
          if (b.is_array()) {
            for (const auto& x : b) out.push_back(integer_of(x, "subobject " + sub.name));
          } else {
            for (const auto& v : Q.vertices()) out.push_back(b.contains(v) ? integer_of(b.at(v), "subobject " + sub.name) : 0);
          }
          return out;
        };
        for (long r : ints("ranks", true)) sub.rank.push_back(static_cast<int>(r));
        sub.deg_plus = ints("deg_plus", false);
        sub.deg_minus = ints("deg_minus", false);
        subs.push_back(std::move(sub));
      }
      p.model.declared_subobjects = std::move(subs);
    }

    if (j.contains("solver")) {
      const json& s = j.at("solver");
      if (!s.is_object()) bad("solver must be an object");
      apply_solver(s, p.solver);
      p.solver_json = s.dump();
    }
    if (j.contains("chambers") && j.at("chambers").contains("box")) {
      const json& b = j.at("chambers").at("box");
      std::string text;
      if (b.is_string()) {
        text = b.get<std::string>();
      } else {
        for (std::size_t k = 0; k < b.size(); ++k) text += (k ? "," : "") + to_string(rational_of(b[k], "chambers.box"));
      }
      parse_box(text);
      p.box = text;
    }
    return p;
  } catch (const json::exception& e) {
    bad(std::string("schema: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Problem load_problem(const std::string& path) { return parse_problem(read_text_file(path)); }

const StabilityParams& require_params(const Problem& p) {
  if (!p.has_params) throw Error(ErrorCode::InvalidInput, "problem has no params block");
  return p.params;
}

std::string serialize_problem(const Problem& p) {
  const auto& m = p.model;
  const auto& Q = m.quiver;
  json j;
  j["format"] = "qhk-problem/1";
  j["base"] = {{"fixture", fixture_name(m.base)},
               {"grid", json::array({p.n_theta, p.n_phi})},
               {"volume", to_string(p.volume)}};
  json verts = json::array(), arrows = json::array();
  for (const auto& v : Q.vertices()) verts.push_back(v);
  for (const auto& a : Q.arrows()) arrows.push_back({{"id", a.id}, {"tail", Q.vertex(a.tail)}, {"head", Q.vertex(a.head)}});
  j["quiver"] = {{"vertices", verts}, {"arrows", arrows}};

  json bundle = json::object();
  for (std::size_t i = 0; i < Q.num_vertices(); ++i) {
    json list = json::array();
    for (const auto& s : m.vertex_data[i].summands) {
      if (s.type == SummandType::Lplus) list.push_back({{"type", "Lplus"}, {"m", s.m}});
      else if (s.type == SummandType::Lminus) list.push_back({{"type", "Lminus"}, {"m", s.m}});
      else if (m.base == Fixture::P1 && s.deg_plus == s.deg_minus) list.push_back({{"m", s.deg_plus}});
      else list.push_back({{"deg_plus", s.deg_plus}, {"deg_minus", s.deg_minus}});
    }
    bundle[Q.vertex(i)] = list;
  }
  j["bundle"] = bundle;

  json sections = json::object();
  for (std::size_t a = 0; a < Q.num_arrows(); ++a) {
    const auto& ad = m.arrow_data[a];
    json grid = json::array();
    for (int r = 0; r < ad.rows; ++r) {
      json row = json::array();
      for (int c = 0; c < ad.cols; ++c) {
        const auto& s = ad.at(r, c);
        if (s.is_zero()) {
          row.push_back("zero");
          continue;
        }
        json poly = json::array();
        for (const auto& z : s.coeffs()) {
          if (z.im == 0) poly.push_back(rational_json(z.re));
          else poly.push_back(json::array({rational_json(z.re), rational_json(z.im)}));
        }
        row.push_back({{"poly", poly}});
      }
      grid.push_back(row);
    }
    sections[Q.arrow(a).id] = grid;
  }
  j["arrows"] = sections;

  if (p.has_params) {
    json alpha = json::object(), sigma = json::object(), tau = json::object();
    for (std::size_t i = 0; i < Q.num_vertices(); ++i) {
      alpha[Q.vertex(i)] = to_string(p.params.alpha[i]);
      sigma[Q.vertex(i)] = to_string(p.params.sigma[i]);
      tau[Q.vertex(i)] = to_string(p.params.tau[i]);
    }
    j["params"] = {{"alpha", alpha}, {"sigma", sigma}, {"tau", tau}};
  }
  if (m.declared_subobjects) {
    json subs = json::array();
    for (const auto& s : *m.declared_subobjects) {
      json ranks = json::object(), dp = json::object(), dm = json::object();
      for (std::size_t i = 0; i < Q.num_vertices(); ++i) {
        ranks[Q.vertex(i)] = s.rank.at(i);
        dp[Q.vertex(i)] = s.deg_plus.at(i);
        dm[Q.vertex(i)] = s.deg_minus.at(i);
      }
      subs.push_back({{"name", s.name}, {"ranks", ranks}, {"deg_plus", dp}, {"deg_minus", dm}});
    }
    j["subobjects"] = subs;
  }
  if (!p.solver_json.empty()) j["solver"] = json::parse(p.solver_json);
  if (p.box) j["chambers"] = {{"box", *p.box}};
  return j.dump(2) + "\n";
}

}  // namespace qhk

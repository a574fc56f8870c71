#include "qhk/chambers.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace qhk {

WallSet wall_set(const ValidatedModel& model, const std::vector<Rational>& alpha,
                 const std::vector<Rational>& sigma) {
  const auto& m = model.model();
  const std::size_t n = m.quiver.num_vertices();
  StabilityParams p{alpha, sigma, std::vector<Rational>(n, Rational(0))};
  check_params(m, p);

  WallSet ws;
  ws.dimension = n;
  const auto full = full_object(m);
  const auto E = slope_from_data(full.rank, full.deg_plus, full.deg_minus, p);  // tau = 0: degree is D(E)

  for (const auto& F : enumerate_subobjects(model)) {
    const auto f = slope_from_data(F.rank, F.deg_plus, F.deg_minus, p);
    Wall w;
    w.normal.resize(n);
    for (std::size_t i = 0; i < n; ++i) w.normal[i] = full.rank[i] * f.sigma_rank - F.rank[i] * E.sigma_rank;
    w.offset = E.degree * f.sigma_rank - f.degree * E.sigma_rank;

    auto lead = std::find_if(w.normal.begin(), w.normal.end(), [](const Rational& c) { return c != 0; });
    if (lead == w.normal.end()) {
      (w.offset == 0 ? ws.everywhere_semistable : ws.never_equal).push_back(F);
      continue;
    }
    Rational scale = abs(*lead);
    bool flip = *lead < 0;
    for (auto& c : w.normal) c = (flip ? -c : c) / scale;
    w.offset = (flip ? -w.offset : w.offset) / scale;

    auto same = std::find_if(ws.walls.begin(), ws.walls.end(),
                             [&](const Wall& o) { return o.normal == w.normal && o.offset == w.offset; });
    if (same == ws.walls.end()) {
      w.sources.push_back(F);
      w.stable_below.push_back(!flip);
      ws.walls.push_back(std::move(w));
    } else {
      same->sources.push_back(F);
      same->stable_below.push_back(!flip);
    }
  }
  return ws;
}

Box2 parse_box(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (c == '[' || c == ']' || c == '(' || c == ')' || c == ' ') continue;
    s += (c == 'x' || c == 'X') ? ',' : c;
  }
  std::vector<Rational> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) v.push_back(parse_rational(tok));
  if (v.size() != 4) throw Error(ErrorCode::InvalidInput, "box needs four bounds: '" + text + "'");
  Box2 b{v[0], v[1], v[2], v[3]};
  if (b.xmin >= b.xmax || b.ymin >= b.ymax) throw Error(ErrorCode::InvalidInput, "box is empty: '" + text + "'");
  return b;
}

ChamberArrangement arrange_2d(const WallSet& ws, const Box2& box) {
  if (ws.dimension != 2)
    throw Error(ErrorCode::DimensionUnsupported,
                "chamber geometry needs exactly 2 vertices, got " + std::to_string(ws.dimension));
  ChamberArrangement arr;
  arr.dimension = 2;
  arr.walls = ws.walls;
  const auto& W = arr.walls;

  auto inside = [&](const Rational& x) { return x > box.xmin && x < box.xmax; };
  std::vector<Rational> xs{box.xmin, box.xmax};
  for (std::size_t k = 0; k < W.size(); ++k) {
    const auto &a = W[k].normal[0], &b = W[k].normal[1], &c = W[k].offset;
    if (b == 0) {
      Rational x = c / a;
      if (inside(x)) xs.push_back(x);
      continue;
    }
    if (a != 0) {
      for (const auto& y : {box.ymin, box.ymax}) {
        Rational x = (c - b * y) / a;
        if (inside(x)) xs.push_back(x);
      }
    }
    for (std::size_t l = 0; l < k; ++l) {
      const auto &a2 = W[l].normal[0], &b2 = W[l].normal[1], &c2 = W[l].offset;
      Rational det = a * b2 - a2 * b;
      if (det == 0) continue;
      Rational x = (c * b2 - c2 * b) / det;
      if (inside(x)) xs.push_back(x);
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  std::map<std::vector<int>, std::size_t> seen;
  for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
    Rational xm = (xs[s] + xs[s + 1]) / 2;
    std::vector<Rational> ys{box.ymin, box.ymax};
    for (const auto& w : W) {
      if (w.normal[1] == 0) continue;
      Rational y = (w.offset - w.normal[0] * xm) / w.normal[1];
      if (y > box.ymin && y < box.ymax) ys.push_back(y);
    }
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    for (std::size_t t = 0; t + 1 < ys.size(); ++t) {
      Rational ym = (ys[t] + ys[t + 1]) / 2;
      std::vector<int> side;
      for (const auto& w : W) side.push_back(sgn(w.normal[0] * xm + w.normal[1] * ym - w.offset));
      if (seen.count(side)) continue;
      seen.emplace(side, arr.cells.size());
      arr.cells.push_back({{xm, ym}, side, std::nullopt});
    }
  }
  return arr;
}

Classification classify_sample(const ValidatedModel& model, const std::vector<Rational>& alpha,
                               const std::vector<Rational>& sigma, const std::vector<Rational>& tau) {
  return classify(model, StabilityParams{alpha, sigma, tau}).kind;
}

ChamberArrangement arrange_chambers(const ValidatedModel& model, const std::vector<Rational>& alpha,
                                    const std::vector<Rational>& sigma, const Box2& box) {
  auto arr = arrange_2d(wall_set(model, alpha, sigma), box);
  for (auto& c : arr.cells) c.classification = classify_sample(model, alpha, sigma, c.representative);
  return arr;
}

std::string walls_csv(const QBundleModel& m, const std::vector<Wall>& walls) {
  std::ostringstream os;
  os << "wall_id";
  for (const auto& v : m.quiver.vertices()) os << ",c_" << v;
  os << ",offset,sources\n";
  for (std::size_t k = 0; k < walls.size(); ++k) {
    os << k;
    for (const auto& c : walls[k].normal) os << ',' << to_string(c);
    os << ',' << to_string(walls[k].offset) << ",\"";
    for (std::size_t s = 0; s < walls[k].sources.size(); ++s) os << (s ? ";" : "") << walls[k].sources[s].name;
    os << "\"\n";
  }
  return os.str();
}

std::string cells_csv(const QBundleModel& m, const ChamberArrangement& arr) {
  std::ostringstream os;
  os << "cell_id";
  for (const auto& v : m.quiver.vertices()) os << ",tau_" << v;
  os << ",classification\n";
  for (std::size_t k = 0; k < arr.cells.size(); ++k) {
    os << k;
    for (const auto& t : arr.cells[k].representative) os << ',' << to_string(t);
    const auto& c = arr.cells[k].classification;
    os << ',' << (c ? classification_name(*c) : "") << '\n';
  }
  return os.str();
}

}  // namespace qhk

#include "qhk/stability.hpp"

#include <algorithm>
#include <numeric>

namespace qhk {

void check_params(const QBundleModel& model, const StabilityParams& p) {
  const std::size_t n = model.quiver.num_vertices();
  if (p.alpha.size() != n || p.sigma.size() != n || p.tau.size() != n)
    throw Error(ErrorCode::InvalidInput, "alpha, sigma, tau need one value per vertex");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = model.quiver.vertex(i);
    if (p.alpha[i] <= 0 || p.alpha[i] >= 1)
      throw Error(ErrorCode::InvalidInput, "alpha at '" + v + "' must lie in (0,1)");
    if (p.sigma[i] <= 0) throw Error(ErrorCode::InvalidInput, "sigma at '" + v + "' must be positive");
  }
}

SlopeReport slope_from_data(const std::vector<int>& rank, const std::vector<long>& deg_plus,
                            const std::vector<long>& deg_minus, const StabilityParams& p) {
  SlopeReport r;
  long total_rank = 0;
  for (std::size_t i = 0; i < rank.size(); ++i) {
    r.degree += p.alpha[i] * p.sigma[i] * deg_plus[i] + (1 - p.alpha[i]) * p.sigma[i] * deg_minus[i] -
                p.tau[i] * rank[i];
    r.sigma_rank += p.sigma[i] * rank[i];
    total_rank += rank[i];
  }
  if (total_rank == 0) throw Error(ErrorCode::ZeroRank, "subobject has total rank 0");
  r.slope = r.degree / r.sigma_rank;
  return r;
}

SubobjectSpec full_object(const QBundleModel& m) {
  SubobjectSpec s;
  s.name = "E";
  for (std::size_t i = 0; i < m.quiver.num_vertices(); ++i) {
    s.rank.push_back(m.vertex_data[i].rank());
    s.deg_plus.push_back(m.vertex_deg_plus(i));
    s.deg_minus.push_back(m.vertex_deg_minus(i));
  }
  return s;
}

SlopeReport deg_slope(const ValidatedModel& model, const SubobjectSpec& sub, const StabilityParams& p) {
  check_params(model.model(), p);
  if (sub.rank.size() != model.quiver().num_vertices())
    throw Error(ErrorCode::InvalidInput, "subobject does not match the model");
  return slope_from_data(sub.rank, sub.deg_plus, sub.deg_minus, p);
}

SlopeReport deg_slope_full(const ValidatedModel& model, const StabilityParams& p) {
  return deg_slope(model, full_object(model.model()), p);
}

bool is_arrow_closed(const QBundleModel& m, const std::vector<bool>& in) {
  for (std::size_t a = 0; a < m.quiver.num_arrows(); ++a) {
    const auto& arr = m.quiver.arrow(a);
    if (in[arr.tail] && !in[arr.head] && !m.arrow_data[a].is_zero()) return false;
  }
  return true;
}

std::string support_name(const QBundleModel& m, const std::vector<std::size_t>& support) {
  std::string s = "{";
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (k) s += ",";
    s += m.quiver.vertex(support[k]);
  }
  return s + "}";
}

SubobjectSpec support_subobject(const QBundleModel& m, const std::vector<bool>& in) {
  SubobjectSpec s;
  std::vector<std::size_t> supp;
  for (std::size_t i = 0; i < in.size(); ++i) {
    bool on = in[i];
    s.rank.push_back(on ? m.vertex_data[i].rank() : 0);
    s.deg_plus.push_back(on ? m.vertex_deg_plus(i) : 0);
    s.deg_minus.push_back(on ? m.vertex_deg_minus(i) : 0);
    if (on) supp.push_back(i);
  }
  s.name = support_name(m, supp);
  s.provenance = Provenance::Enumerated;
  return s;
}

namespace {

bool canonical_less(const SubobjectSpec& a, const SubobjectSpec& b) {
  auto sa = a.support(), sb = b.support();
  if (sa.size() != sb.size()) return sa.size() < sb.size();
  return sa < sb;
}

}  // namespace

std::vector<SubobjectSpec> enumerate_subobjects(const ValidatedModel& model) {
  const auto& m = model.model();
  if (m.declared_subobjects) {
    auto subs = *m.declared_subobjects;
    for (auto& s : subs) s.provenance = Provenance::Declared;
    return subs;
  }
  if (!m.rank_one())
    throw Error(ErrorCode::UnsupportedRank, "vertex of rank >= 2 without a declared subobject lattice");
  const std::size_t n = m.quiver.num_vertices();
  if (n > 20) throw Error(ErrorCode::InvalidInput, "too many vertices to enumerate supports");
  std::vector<SubobjectSpec> out;
  const unsigned long full = (1ul << n) - 1;
  for (unsigned long mask = 1; mask < full; ++mask) {
    std::vector<bool> in(n);
    for (std::size_t i = 0; i < n; ++i) in[i] = (mask >> i) & 1u;
    if (is_arrow_closed(m, in)) out.push_back(support_subobject(m, in));
  }
  std::stable_sort(out.begin(), out.end(), canonical_less);
  return out;
}

const char* classification_name(Classification c) {
  switch (c) {
    case Classification::Stable: return "Stable";
    case Classification::StrictlySemistable: return "StrictlySemistable";
    case Classification::Unstable: return "Unstable";
    case Classification::VacuouslyStable: return "VacuouslyStable";
  }
  return "?";
}

ClassifyResult classify_with(const ValidatedModel& model, const std::vector<SubobjectSpec>& subs,
                             const StabilityParams& p) {
  ClassifyResult r;
  r.total = deg_slope_full(model, p);
  r.subobject_count = subs.size();
  if (subs.empty()) {
    r.kind = Classification::VacuouslyStable;
    return r;
  }
  std::vector<Witness> equal, above;
  for (const auto& s : subs) {
    auto sr = slope_from_data(s.rank, s.deg_plus, s.deg_minus, p);
    int c = cmp(sr.slope, r.total.slope);
    if (c > 0) above.push_back({s, sr});
    else if (c == 0) equal.push_back({s, sr});
  }
  if (!above.empty()) {
    r.kind = Classification::Unstable;
    r.witnesses = std::move(above);
  } else if (!equal.empty()) {
    r.kind = Classification::StrictlySemistable;
    r.witnesses = std::move(equal);
  } else {
    r.kind = Classification::Stable;
  }
  return r;
}

ClassifyResult classify(const ValidatedModel& model, const StabilityParams& p) {
  check_params(model.model(), p);
  return classify_with(model, enumerate_subobjects(model), p);
}

Witness max_slope_subobject(const ValidatedModel& model, const StabilityParams& p) {
  check_params(model.model(), p);
  auto subs = enumerate_subobjects(model);
  if (subs.empty()) throw Error(ErrorCode::NoSubobjects, "model has no proper subobjects");
  std::stable_sort(subs.begin(), subs.end(), canonical_less);
  std::optional<Witness> best;
  for (const auto& s : subs) {
    auto sr = slope_from_data(s.rank, s.deg_plus, s.deg_minus, p);
    if (!best || sr.slope > best->slope.slope) best = Witness{s, sr};
  }
  return *best;
}

bool is_polystable_split(const ValidatedModel& model, const StabilityParams& p) {
  const auto& m = model.model();
  if (!m.rank_one() || m.declared_subobjects) return false;
  auto cls = classify(model, p);
  if (cls.kind != Classification::StrictlySemistable) return false;

  const std::size_t n = m.quiver.num_vertices();
  std::vector<std::size_t> comp(n);
  std::iota(comp.begin(), comp.end(), 0);
  auto find = [&](std::size_t x) {
    while (comp[x] != x) x = comp[x] = comp[comp[x]];
    return x;
  };
  for (std::size_t a = 0; a < m.quiver.num_arrows(); ++a) {
    if (m.arrow_data[a].is_zero()) continue;
    const auto& arr = m.quiver.arrow(a);
    comp[find(arr.tail)] = find(arr.head);
  }
  std::vector<std::vector<std::size_t>> groups;
  std::vector<long> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<long>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(slot[r])].push_back(i);
  }
  if (groups.size() < 2) return false;

  for (const auto& g : groups) {
    std::vector<bool> in(n, false);
    for (auto i : g) in[i] = true;
    auto piece = support_subobject(m, in);
    if (slope_from_data(piece.rank, piece.deg_plus, piece.deg_minus, p).slope != cls.total.slope) return false;

    // Restrict to the component and classify it alone.
    std::vector<std::string> verts;
    std::vector<ArrowSpec> arrows;
    QBundleModel sub;
    sub.base = m.base;
    StabilityParams sp;
    for (auto i : g) {
      verts.push_back(m.quiver.vertex(i));
      sub.vertex_data.push_back(m.vertex_data[i]);
      sp.alpha.push_back(p.alpha[i]);
      sp.sigma.push_back(p.sigma[i]);
      sp.tau.push_back(p.tau[i]);
    }
    for (std::size_t a = 0; a < m.quiver.num_arrows(); ++a) {
      const auto& arr = m.quiver.arrow(a);
      if (!in[arr.tail] || !in[arr.head]) continue;
      arrows.push_back({arr.id, m.quiver.vertex(arr.tail), m.quiver.vertex(arr.head)});
      sub.arrow_data.push_back(m.arrow_data[a]);
    }
    sub.quiver = build_quiver(verts, arrows);
    auto k = classify(*validate_or_throw(sub), sp).kind;
    if (k != Classification::Stable && k != Classification::VacuouslyStable) return false;
  }
  return true;
}

}  // namespace qhk

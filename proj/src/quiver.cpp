#include "qhk/quiver.hpp"

#include <set>

namespace qhk {

const char* fixture_name(Fixture f) { return f == Fixture::P1 ? "P1" : "HopfTable"; }

std::optional<std::size_t> Quiver::vertex_index(const std::string& id) const {
  auto it = vindex_.find(id);
  if (it == vindex_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Quiver::arrow_index(const std::string& id) const {
  auto it = aindex_.find(id);
  if (it == aindex_.end()) return std::nullopt;
  return it->second;
}

Quiver build_quiver(const std::vector<std::string>& vertices, const std::vector<ArrowSpec>& arrows) {
  Quiver q;
  for (const auto& v : vertices) {
    if (v.empty()) throw Error(ErrorCode::InvalidInput, "empty vertex id");
    if (!q.vindex_.emplace(v, q.vertices_.size()).second)
      throw Error(ErrorCode::DuplicateId, "vertex '" + v + "' declared twice");
    q.vertices_.push_back(v);
  }
  for (const auto& a : arrows) {
    if (a.id.empty()) throw Error(ErrorCode::InvalidInput, "empty arrow id");
    if (q.aindex_.count(a.id)) throw Error(ErrorCode::DuplicateId, "arrow '" + a.id + "' declared twice");
    auto t = q.vertex_index(a.tail), h = q.vertex_index(a.head);
    if (!t) throw Error(ErrorCode::DanglingEndpoint, "arrow '" + a.id + "' tail '" + a.tail + "' is not a vertex");
    if (!h) throw Error(ErrorCode::DanglingEndpoint, "arrow '" + a.id + "' head '" + a.head + "' is not a vertex");
    q.aindex_.emplace(a.id, q.arrows_.size());
    q.arrows_.push_back({a.id, *t, *h});
  }
  return q;
}

Section::Section(std::vector<ComplexRational> coeffs) : coeffs_(std::move(coeffs)) {
  while (!coeffs_.empty() && coeffs_.back().is_zero()) coeffs_.pop_back();
}

bool ArrowData::is_zero() const {
  for (const auto& s : blocks)
    if (!s.is_zero()) return false;
  return true;
}

std::vector<std::size_t> SubobjectSpec::support() const {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < rank.size(); ++i)
    if (rank[i] > 0) s.push_back(i);
  return s;
}

long QBundleModel::vertex_deg_plus(std::size_t i) const {
  long d = 0;
  for (const auto& s : vertex_data.at(i).summands) d += s.deg_plus;
  return d;
}

long QBundleModel::vertex_deg_minus(std::size_t i) const {
  long d = 0;
  for (const auto& s : vertex_data.at(i).summands) d += s.deg_minus;
  return d;
}

bool QBundleModel::rank_one() const {
  for (const auto& v : vertex_data)
    if (v.rank() != 1) return false;
  return true;
}

namespace {

void check_summands(const QBundleModel& m, IssueList& out) {
  for (std::size_t i = 0; i < m.vertex_data.size(); ++i) {
    const auto& vid = m.quiver.vertex(i);
    const auto& vd = m.vertex_data[i];
    if (vd.summands.empty()) out.push_back({ErrorCode::InvalidInput, "vertex '" + vid + "' has rank 0"});
    for (const auto& s : vd.summands) {
      if (m.base == Fixture::P1) {
        if (s.type != SummandType::Plain)
          out.push_back({ErrorCode::FixtureViolation, "vertex '" + vid + "': Hopf summand type on the P1 fixture"});
        else if (s.deg_plus != s.deg_minus)
          out.push_back({ErrorCode::FixtureViolation, "vertex '" + vid + "': deg_plus != deg_minus on P1"});
      } else {
        if (s.type == SummandType::Lplus && s.deg_minus != -s.deg_plus)
          out.push_back({ErrorCode::FixtureViolation, "vertex '" + vid + "': Lplus summand needs deg_minus = -deg_plus"});
        if (s.type == SummandType::Lminus && s.deg_plus != -s.deg_minus)
          out.push_back({ErrorCode::FixtureViolation, "vertex '" + vid + "': Lminus summand needs deg_plus = -deg_minus"});
      }
    }
  }
}

void check_arrows(const QBundleModel& m, IssueList& out) {
  for (std::size_t a = 0; a < m.arrow_data.size(); ++a) {
    const auto& arr = m.quiver.arrow(a);
    const auto& ad = m.arrow_data[a];
    const auto& tail = m.vertex_data[arr.tail].summands;
    const auto& head = m.vertex_data[arr.head].summands;
    if (ad.rows != static_cast<int>(head.size()) || ad.cols != static_cast<int>(tail.size()) ||
        ad.blocks.size() != static_cast<std::size_t>(ad.rows * ad.cols)) {
      out.push_back({ErrorCode::InvalidInput, "arrow '" + arr.id + "': block shape must be head rank x tail rank"});
      continue;
    }
    for (int r = 0; r < ad.rows; ++r) {
      for (int c = 0; c < ad.cols; ++c) {
        const Section& s = ad.at(r, c);
        if (s.is_zero()) continue;
        std::string where = "arrow '" + arr.id + "' block (" + std::to_string(r) + "," + std::to_string(c) + ")";
        if (m.base == Fixture::P1) {
          long d = head[r].deg_plus - tail[c].deg_plus;
          if (h0_dimension(d) == 0)
            out.push_back({ErrorCode::IllegalSection, where + ": H0(O(" + std::to_string(d) + ")) = 0"});
          else if (s.degree() > d)
            out.push_back({ErrorCode::DegreeMismatch, where + ": polynomial degree " + std::to_string(s.degree()) +
                                                          " exceeds " + std::to_string(d)});
        } else {
          if (head[r].deg_plus != tail[c].deg_plus || head[r].deg_minus != tail[c].deg_minus)
            out.push_back({ErrorCode::IllegalSection, where + ": source and target bidegrees differ"});
          else if (s.degree() > 0)
            out.push_back({ErrorCode::DegreeMismatch, where + ": Hopf sections are constants"});
        }
      }
    }
  }
}

void check_declared(const QBundleModel& m, IssueList& out) {
  if (!m.declared_subobjects) return;
  const std::size_t n = m.quiver.num_vertices();
  for (const auto& sub : *m.declared_subobjects) {
    std::string who = "subobject '" + sub.name + "'";
    if (sub.rank.size() != n || sub.deg_plus.size() != n || sub.deg_minus.size() != n) {
      out.push_back({ErrorCode::InvalidInput, who + ": needs one entry per vertex"});
      continue;
    }
    bool any = false, full = true;
    for (std::size_t i = 0; i < n; ++i) {
      int rk = m.vertex_data[i].rank();
      if (sub.rank[i] < 0 || sub.rank[i] > rk)
        out.push_back({ErrorCode::InvalidInput, who + ": rank out of range at '" + m.quiver.vertex(i) + "'"});
      if (sub.rank[i] == 0 && (sub.deg_plus[i] != 0 || sub.deg_minus[i] != 0))
        out.push_back({ErrorCode::InvalidInput, who + ": rank 0 with nonzero degree at '" + m.quiver.vertex(i) + "'"});
      any = any || sub.rank[i] > 0;
      full = full && sub.rank[i] == rk && sub.deg_plus[i] == m.vertex_deg_plus(i) &&
             sub.deg_minus[i] == m.vertex_deg_minus(i);
    }
    if (!any) out.push_back({ErrorCode::InvalidInput, who + ": all ranks are 0"});
    if (full) out.push_back({ErrorCode::InvalidInput, who + ": equals the whole model"});
  }
}

}  // namespace

ValidationResult validate_model(const QBundleModel& model) {
  ValidationResult res;
  if (model.vertex_data.size() != model.quiver.num_vertices())
    res.issues.push_back({ErrorCode::InvalidInput, "bundle data must cover every vertex"});
  if (model.arrow_data.size() != model.quiver.num_arrows())
    res.issues.push_back({ErrorCode::InvalidInput, "section data must cover every arrow"});
  if (!res.issues.empty()) return res;
  check_summands(model, res.issues);
  if (res.issues.empty()) check_arrows(model, res.issues);
  check_declared(model, res.issues);
  if (res.issues.empty()) res.model = ModelPtr(new ValidatedModel(model));
  return res;
}

ValidationResult validate_model(const ModelPtr& model) {
  ValidationResult res;
  res.model = model;
  if (!model) res.issues.push_back({ErrorCode::InvalidInput, "null model"});
  return res;
}

ModelPtr validate_or_throw(const QBundleModel& model) {
  auto res = validate_model(model);
  if (!res.ok()) throw Error(res.issues.front().code, res.issues.front().message);
  return res.model;
}

}  // namespace qhk

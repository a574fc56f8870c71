#include "qhk/props.hpp"

#include <json.hpp>
#include <random>

#include "qhk/endo.hpp"

namespace qhk {

namespace {

using json = nlohmann::ordered_json;

json matrix_json(const CMatrix& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back({M(r, c).real(), M(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

json instance_json(const RandomInstance& in, long index, const std::string& what) {
  json j;
  j["index"] = index;
  j["failed"] = what;
  j["ranks"] = in.shape.rank;
  json arrows = json::array();
  for (std::size_t a = 0; a < in.shape.num_arrows(); ++a) arrows.push_back({in.shape.tail[a], in.shape.head[a]});
  j["arrows"] = arrows;
  json H = json::array(), f = json::array(), phi = json::array();
  for (const auto& m : in.H.H) H.push_back(matrix_json(m));
  for (const auto& m : in.f.f) f.push_back(matrix_json(m));
  for (const auto& m : in.phi.phi) phi.push_back(matrix_json(m));
  j["H"] = H;
  j["f"] = f;
  j["phi"] = phi;
  return j;
}

}  // namespace

PropsSummary run_props(const PropsOptions& opt) {
  PropsSummary s;
  std::mt19937_64 rng(opt.seed);
  s.moment_log_min = s.power_bracket_min = INFINITY;
  for (long n = 0; n < opt.count; ++n) {
    RandomInstance in = random_instance(rng, opt.max_vertices, opt.max_rank);
    std::string failed;
    double gml = moment_log_gap(in.shape, in.f, in.phi, in.H);
    s.moment_log_min = std::min(s.moment_log_min, gml);
    if (gml < -opt.gap_tol) failed = "moment_log_gap";
    for (double vs : {0.25, 0.5, 1.0}) {
      double g = power_bracket_gap(in.shape, in.f, vs, in.phi, in.H);
      s.power_bracket_min = std::min(s.power_bracket_min, g);
      if (g < -opt.gap_tol && failed.empty()) failed = "power_bracket_gap";
    }
    double adj = adjoint_identity_residual(in.shape, in.phi, in.H, rng);
    s.adjoint_max = std::max(s.adjoint_max, adj);
    if (adj >= opt.adjoint_tol && failed.empty()) failed = "adjoint_identity";
    for (std::size_t i = 0; i < in.shape.num_vertices(); ++i) {
      // moment_term(i) is self-adjoint for the metric H_i f_i.
      CMatrix Hf = in.H.H[i] * in.f.f[i];
      CMatrix S = Hf * moment_term(in.shape, i, in.phi, in.f, in.H);
      double h = (S - S.adjoint()).norm() / std::max(1.0, S.norm());
      s.moment_hermitian_max = std::max(s.moment_hermitian_max, h);
    }
    ++s.instances;
    if (!failed.empty()) {
      if (s.failures == 0) s.first_failure = instance_json(in, n, failed).dump(2);
      ++s.failures;
    }
  }
  if (s.instances == 0) s.moment_log_min = s.power_bracket_min = 0;
  return s;
}

}  // namespace qhk

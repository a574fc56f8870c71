#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qhk/quiver.hpp"
#include "qhk/rational.hpp"

namespace qhk {

// Indexed like the quiver's vertices.
struct StabilityParams {
  std::vector<Rational> alpha;
  std::vector<Rational> sigma;
  std::vector<Rational> tau;
};

// Throws InvalidInput unless sizes match and 0 < alpha < 1, sigma > 0.
void check_params(const QBundleModel& model, const StabilityParams& params);

struct SlopeReport {
  Rational degree;
  Rational sigma_rank;
  Rational slope;
};

SlopeReport slope_from_data(const std::vector<int>& rank, const std::vector<long>& deg_plus,
                            const std::vector<long>& deg_minus, const StabilityParams& params);
SlopeReport deg_slope(const ValidatedModel& model, const SubobjectSpec& sub, const StabilityParams& params);
SlopeReport deg_slope_full(const ValidatedModel& model, const StabilityParams& params);
SubobjectSpec full_object(const QBundleModel& model);

// Rank-1 models: arrow a with nonzero section and tail in the support forces
// the head into the support.
bool is_arrow_closed(const QBundleModel& model, const std::vector<bool>& in_support);

// Subobject carried by a vertex subset of a rank-1 model.
SubobjectSpec support_subobject(const QBundleModel& model, const std::vector<bool>& in_support);
std::string support_name(const QBundleModel& model, const std::vector<std::size_t>& support);

// The declared lattice wins when present; otherwise proper nonempty
// arrow-closed supports, in canonical order (size, then lexicographic).
std::vector<SubobjectSpec> enumerate_subobjects(const ValidatedModel& model);

enum class Classification { Stable, StrictlySemistable, Unstable, VacuouslyStable };
const char* classification_name(Classification c);

struct Witness {
  SubobjectSpec sub;
  SlopeReport slope;
};

struct ClassifyResult {
  Classification kind = Classification::VacuouslyStable;
  SlopeReport total;
  std::vector<Witness> witnesses;  // equalities (semistable) or violators (unstable)
  std::size_t subobject_count = 0;
};

ClassifyResult classify(const ValidatedModel& model, const StabilityParams& params);
ClassifyResult classify_with(const ValidatedModel& model, const std::vector<SubobjectSpec>& subs,
                             const StabilityParams& params);

// Ties: smallest support, then lexicographic, then list order. Throws NoSubobjects.
Witness max_slope_subobject(const ValidatedModel& model, const StabilityParams& params);

// Strictly semistable and the quiver splits into arrow-disconnected pieces of
// equal slope, each of which is stable on its own.
bool is_polystable_split(const ValidatedModel& model, const StabilityParams& params);

}  // namespace qhk

#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qhk/error.hpp"
#include "qhk/rational.hpp"

namespace qhk {

enum class Fixture { P1, HopfTable };

const char* fixture_name(Fixture f);

struct ArrowSpec {
  std::string id;
  std::string tail;
  std::string head;
};

// Vertices and arrows keep their declaration order; that order is the
// canonical order everywhere downstream (tie breaking, CSV columns, ...).
class Quiver {
 public:
  struct Arrow {
    std::string id;
    std::size_t tail;
    std::size_t head;
  };

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_arrows() const { return arrows_.size(); }
  const std::vector<std::string>& vertices() const { return vertices_; }
  const std::vector<Arrow>& arrows() const { return arrows_; }
  const std::string& vertex(std::size_t i) const { return vertices_.at(i); }
  const Arrow& arrow(std::size_t a) const { return arrows_.at(a); }
  std::optional<std::size_t> vertex_index(const std::string& id) const;
  std::optional<std::size_t> arrow_index(const std::string& id) const;

 private:
  friend Quiver build_quiver(const std::vector<std::string>&, const std::vector<ArrowSpec>&);
  std::vector<std::string> vertices_;
  std::vector<Arrow> arrows_;
  std::map<std::string, std::size_t> vindex_, aindex_;
};

// Throws DuplicateId / DanglingEndpoint / InvalidInput (empty identifiers).
Quiver build_quiver(const std::vector<std::string>& vertices, const std::vector<ArrowSpec>& arrows);

enum class SummandType { Plain, Lplus, Lminus };

struct Summand {
  long deg_plus = 0;
  long deg_minus = 0;
  SummandType type = SummandType::Plain;
  long m = 0;  // the twist index for Lplus/Lminus summands

  static Summand line(long m) { return {m, m, SummandType::Plain, m}; }
  static Summand lplus(long m) { return {m, -m, SummandType::Lplus, m}; }
  static Summand lminus(long m) { return {-m, m, SummandType::Lminus, m}; }
};

struct VertexBundleData {
  std::vector<Summand> summands;
  int rank() const { return static_cast<int>(summands.size()); }
};

struct ComplexRational {
  Rational re, im;
  bool is_zero() const { return re == 0 && im == 0; }
};

// A polynomial in the affine coordinate z; trailing zero coefficients are
// dropped on construction so coeffs.empty() means the zero section.
class Section {
 public:
  Section() = default;
  explicit Section(std::vector<ComplexRational> coeffs);
  static Section zero() { return Section(); }
  static Section constant(long c) { return Section({{Rational(c), Rational(0)}}); }

  bool is_zero() const { return coeffs_.empty(); }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<ComplexRational>& coeffs() const { return coeffs_; }

 private:
  std::vector<ComplexRational> coeffs_;
};

// head-rank x tail-rank grid of sections, row major.
struct ArrowData {
  int rows = 0;
  int cols = 0;
  std::vector<Section> blocks;

  static ArrowData single(Section s) { return {1, 1, {std::move(s)}}; }
  const Section& at(int r, int c) const { return blocks.at(static_cast<std::size_t>(r * cols + c)); }
  bool is_zero() const;
};

enum class Provenance { Enumerated, Declared };

struct SubobjectSpec {
  std::string name;
  std::vector<int> rank;         // per vertex
  std::vector<long> deg_plus;    // per vertex
  std::vector<long> deg_minus;   // per vertex
  Provenance provenance = Provenance::Enumerated;

  std::vector<std::size_t> support() const;
};

struct QBundleModel {
  Fixture base = Fixture::P1;
  Quiver quiver;
  std::vector<VertexBundleData> vertex_data;  // indexed like quiver.vertices()
  std::vector<ArrowData> arrow_data;          // indexed like quiver.arrows()
  std::optional<std::vector<SubobjectSpec>> declared_subobjects;

  long vertex_deg_plus(std::size_t i) const;
  long vertex_deg_minus(std::size_t i) const;
  bool rank_one() const;
};

struct ValidationResult;
ValidationResult validate_model(const QBundleModel& model);

// Sealed, immutable, shareable between threads.
class ValidatedModel {
 public:
  const QBundleModel& model() const { return model_; }
  const Quiver& quiver() const { return model_.quiver; }

 private:
  explicit ValidatedModel(QBundleModel m) : model_(std::move(m)) {}
  friend ValidationResult validate_model(const QBundleModel&);
  QBundleModel model_;
};

using ModelPtr = std::shared_ptr<const ValidatedModel>;

struct ValidationResult {
  ModelPtr model;  // null when issues is nonempty
  IssueList issues;
  bool ok() const { return model != nullptr; }
};

ValidationResult validate_model(const QBundleModel& model);
// Already sealed: returned unchanged.
ValidationResult validate_model(const ModelPtr& model);

// Throws the first issue as an Error.
ModelPtr validate_or_throw(const QBundleModel& model);

// dim H^0(O(d)) on P1.
inline long h0_dimension(long d) { return d < 0 ? 0 : d + 1; }

}  // namespace qhk

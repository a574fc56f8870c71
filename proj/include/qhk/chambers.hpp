#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qhk/stability.hpp"

namespace qhk {

// Affine hyperplane {tau : normal . tau = offset}. Normals are scaled so the
// first nonzero coefficient is +1.
struct Wall {
  std::vector<Rational> normal;
  Rational offset;
  std::vector<SubobjectSpec> sources;
  // Per source: true when that subobject has the smaller slope on the side
  // normal . tau < offset.
  std::vector<bool> stable_below;
};

struct WallSet {
  std::size_t dimension = 0;
  std::vector<Wall> walls;
  std::vector<SubobjectSpec> everywhere_semistable;  // slope equal for every tau
  std::vector<SubobjectSpec> never_equal;            // slope difference independent of tau, nonzero
};

WallSet wall_set(const ValidatedModel& model, const std::vector<Rational>& alpha, const std::vector<Rational>& sigma);

struct Box2 {
  Rational xmin, xmax, ymin, ymax;
};

// "[-3,3]x[-3,3]" or "-3,3,-3,3". Throws InvalidInput.
Box2 parse_box(const std::string& text);

struct Cell {
  std::vector<Rational> representative;
  std::vector<int> side;  // per wall: -1 below, +1 above
  std::optional<Classification> classification;
};

struct ChamberArrangement {
  std::size_t dimension = 0;
  std::vector<Wall> walls;
  std::vector<Cell> cells;
};

// Cells of box \ walls for a 2-vertex tau plane. Throws DimensionUnsupported.
ChamberArrangement arrange_2d(const WallSet& walls, const Box2& box);

Classification classify_sample(const ValidatedModel& model, const std::vector<Rational>& alpha,
                               const std::vector<Rational>& sigma, const std::vector<Rational>& tau);

// wall_set + arrange_2d + classification of every representative.
ChamberArrangement arrange_chambers(const ValidatedModel& model, const std::vector<Rational>& alpha,
                                    const std::vector<Rational>& sigma, const Box2& box);

std::string walls_csv(const QBundleModel& model, const std::vector<Wall>& walls);
std::string cells_csv(const QBundleModel& model, const ChamberArrangement& arr);

}  // namespace qhk

#pragma once

#include <span>
#include <vector>

#include "mtreg/statespace.hpp"

namespace mtreg {

// Axis-aligned rectangle in R^d.
struct Rect {
  std::vector<Interval> sides;

  int dim() const { return static_cast<int>(sides.size()); }
  bool contains(std::span<const double> x) const;
  // true iff the interior is nonempty
  bool has_volume() const;
};

// A finite union of axis-aligned rectangles, kept in canonical form:
// the stored rectangles have pairwise disjoint interiors. Together with
// complement() and unite() these events form a field.
//
// Events are treated up to Lebesgue-null sets; degenerate rectangles
// (zero width on some axis) normalize away.
class Event {
public:
  static Event rect(Rect r);
  static Event rect(std::vector<Interval> sides);
  static Event union_of(std::vector<Rect> rs);
  static Event whole(int dim);
  static Event empty(int dim);
  // 1-d conveniences
  static Event interval(double lo, double hi);
  static Event half_line_le(double b);
  static Event half_line_ge(double a);

  int dim() const { return dim_; }
  bool is_empty() const { return rects_.empty(); }
  const std::vector<Rect>& rects() const { return rects_; }

  bool contains(std::span<const double> x) const;

  Event unite(const Event& other) const;
  Event intersect(const Event& other) const;
  Event complement() const;

private:
  Event(int dim, std::vector<Rect> disjoint)
      : dim_(dim), rects_(std::move(disjoint)) {}

  int dim_ = 0;
  std::vector<Rect> rects_;
};

}  // namespace mtreg

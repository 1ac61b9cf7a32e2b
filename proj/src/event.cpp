#include "mtreg/event.hpp"

#include <algorithm>

namespace mtreg {

bool Rect::contains(std::span<const double> x) const {
  if (x.size() != sides.size()) return false;
  for (std::size_t i = 0; i < sides.size(); ++i)
    if (!sides[i].contains(x[i])) return false;
  return true;
}

bool Rect::has_volume() const {
  for (const Interval& s : sides)
    if (!(s.lo < s.hi)) return false;
  return !sides.empty();
}

namespace {

bool overlap_interior(const Rect& a, const Rect& b) {
  for (int j = 0; j < a.dim(); ++j) {
    double lo = std::max(a.sides[j].lo, b.sides[j].lo);
    double hi = std::min(a.sides[j].hi, b.sides[j].hi);
    if (!(lo < hi)) return false;
  }
  return true;
}

// Pieces of `a` outside the interior of `b`: guillotine split, at most two
// slabs per axis.
void subtract_into(const Rect& a, const Rect& b, std::vector<Rect>& out) {
  if (!overlap_interior(a, b)) {
    out.push_back(a);
    return;
  }
  Rect core = a;
  for (int j = 0; j < a.dim(); ++j) {
    double lo = std::max(core.sides[j].lo, b.sides[j].lo);
    double hi = std::min(core.sides[j].hi, b.sides[j].hi);
    if (core.sides[j].lo < lo) {
      Rect piece = core;
      piece.sides[j].hi = lo;
      if (piece.has_volume()) out.push_back(piece);
    }
    if (hi < core.sides[j].hi) {
      Rect piece = core;
      piece.sides[j].lo = hi;
      if (piece.has_volume()) out.push_back(piece);
    }
    core.sides[j].lo = lo;
    core.sides[j].hi = hi;
  }
  // what remains of `core` lies inside b and is dropped
}

std::vector<Rect> normalize(int dim, std::vector<Rect> rs) {
  std::vector<Rect> result;
  for (Rect& r : rs) {
    if (r.dim() != dim) throw DomainError("Event: mixed rectangle dimensions");
    for (const Interval& s : r.sides)
      if (!s.valid()) throw DomainError("Event: invalid interval endpoint");
    std::vector<Rect> pieces;
    pieces.push_back(std::move(r));
    for (const Rect& s : result) {
      std::vector<Rect> next;
      for (const Rect& p : pieces) subtract_into(p, s, next);
      pieces = std::move(next);
      if (pieces.empty()) break;
    }
    for (Rect& p : pieces)
      if (p.has_volume()) result.push_back(std::move(p));
  }
  return result;
}

}  // namespace

Event Event::rect(Rect r) {
  int d = r.dim();
  if (d == 0) throw DomainError("Event: zero-dimensional rectangle");
  std::vector<Rect> rs;
  rs.push_back(std::move(r));
  return Event(d, normalize(d, std::move(rs)));
}

Event Event::rect(std::vector<Interval> sides) {
  return rect(Rect{std::move(sides)});
}

Event Event::union_of(std::vector<Rect> rs) {
  if (rs.empty()) throw DomainError("Event: union_of needs the dimension; use empty()");
  int d = rs.front().dim();
  return Event(d, normalize(d, std::move(rs)));
}

Event Event::whole(int dim) {
  if (dim < 1) throw DomainError("Event: dim must be >= 1");
  return rect(Rect{std::vector<Interval>(static_cast<std::size_t>(dim),
                                         Interval::whole())});
}

Event Event::empty(int dim) {
  if (dim < 1) throw DomainError("Event: dim must be >= 1");
  return Event(dim, {});
}

Event Event::interval(double lo, double hi) {
  return rect(Rect{{Interval{lo, hi}}});
}

Event Event::half_line_le(double b) { return rect(Rect{{Interval::le(b)}}); }

Event Event::half_line_ge(double a) { return rect(Rect{{Interval::ge(a)}}); }

bool Event::contains(std::span<const double> x) const {
  for (const Rect& r : rects_)
    if (r.contains(x)) return true;
  return false;
}

Event Event::unite(const Event& other) const {
  if (other.dim_ != dim_) throw DomainError("Event: dimension mismatch");
  std::vector<Rect> rs = rects_;
  rs.insert(rs.end(), other.rects_.begin(), other.rects_.end());
  return Event(dim_, normalize(dim_, std::move(rs)));
}

Event Event::intersect(const Event& other) const {
  if (other.dim_ != dim_) throw DomainError("Event: dimension mismatch");
  std::vector<Rect> rs;
  for (const Rect& a : rects_) {
    for (const Rect& b : other.rects_) {
      Rect r = a;
      bool nonempty = true;
      for (int j = 0; j < dim_; ++j) {
        r.sides[j].lo = std::max(a.sides[j].lo, b.sides[j].lo);
        r.sides[j].hi = std::min(a.sides[j].hi, b.sides[j].hi);
        if (!(r.sides[j].lo < r.sides[j].hi)) {
          nonempty = false;
          break;
        }
      }
      if (nonempty) rs.push_back(std::move(r));
    }
  }
  // intersections of disjoint families stay disjoint
  return Event(dim_, std::move(rs));
}

Event Event::complement() const {
  std::vector<Rect> result;
  result.push_back(Rect{std::vector<Interval>(static_cast<std::size_t>(dim_),
                                              Interval::whole())});
  for (const Rect& s : rects_) {
    std::vector<Rect> next;
    for (const Rect& p : result) subtract_into(p, s, next);
    result = std::move(next);
    if (result.empty()) break;
  }
  std::vector<Rect> kept;
  for (Rect& r : result)
    if (r.has_volume()) kept.push_back(std::move(r));
  return Event(dim_, std::move(kept));
}

}  // namespace mtreg

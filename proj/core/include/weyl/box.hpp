#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <string>

namespace weyl {

inline constexpr int kMaxDim = 2;

// A point of the coordinate chart. Coordinates past the model dimension are
// ignored and kept at zero.
using Point = std::array<double, kMaxDim>;

// Axis-aligned box [lo, hi] in up to two dimensions. A box is empty when any
// axis has lo > hi; infinite bounds describe unbounded regions.
struct Box {
  int dim = 1;
  std::array<double, kMaxDim> lo{0.0, 0.0};
  std::array<double, kMaxDim> hi{0.0, 0.0};

  static Box interval(double lo, double hi);
  static Box rectangle(double x_lo, double x_hi, double y_lo, double y_hi);
  static Box centered(int dim, double half_width);
  static Box empty(int dim);
  static Box everything(int dim);

  bool is_empty() const;
  bool is_bounded() const;
  bool contains(const Point& p) const;
  // Interior containment with a tolerance band of `pad` on every face.
  bool contains_strictly(const Point& p, double pad = 0.0) const;
  bool contains(const Box& other) const;
  double width(int axis) const { return hi[axis] - lo[axis]; }
  double volume() const;

  Box expanded(double amount) const;
  Box intersect(const Box& other) const;

  // Smallest distance from `inner` to the boundary of this box, over all
  // faces. Negative when `inner` pokes out.
  double clearance(const Box& inner) const;

  std::string to_string() const;
};

}  // namespace weyl

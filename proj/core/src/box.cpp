#include "weyl/box.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace weyl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Box Box::interval(double lo, double hi) {
  Box b;
  b.dim = 1;
  b.lo = {lo, 0.0};
  b.hi = {hi, 0.0};
  return b;
}

Box Box::rectangle(double x_lo, double x_hi, double y_lo, double y_hi) {
  Box b;
  b.dim = 2;
  b.lo = {x_lo, y_lo};
  b.hi = {x_hi, y_hi};
  return b;
}

Box Box::centered(int dim, double half_width) {
  return dim == 1 ? interval(-half_width, half_width)
                  : rectangle(-half_width, half_width, -half_width, half_width);
}

Box Box::empty(int dim) {
  Box b;
  b.dim = dim;
  b.lo = {kInf, kInf};
  b.hi = {-kInf, -kInf};
  return b;
}

Box Box::everything(int dim) {
  Box b;
  b.dim = dim;
  b.lo = {-kInf, -kInf};
  b.hi = {kInf, kInf};
  return b;
}

bool Box::is_empty() const {
  for (int a = 0; a < dim; ++a) {
    if (lo[a] > hi[a]) return true;
  }
  return false;
}

bool Box::is_bounded() const {
  for (int a = 0; a < dim; ++a) {
    if (!std::isfinite(lo[a]) || !std::isfinite(hi[a])) return false;
  }
  return true;
}

bool Box::contains(const Point& p) const {
  for (int a = 0; a < dim; ++a) {
    if (p[a] < lo[a] || p[a] > hi[a]) return false;
  }
  return true;
}

bool Box::contains_strictly(const Point& p, double pad) const {
  for (int a = 0; a < dim; ++a) {
    if (p[a] <= lo[a] + pad || p[a] >= hi[a] - pad) return false;
  }
  return true;
}

bool Box::contains(const Box& other) const {
  if (other.is_empty()) return true;
  for (int a = 0; a < dim; ++a) {
    if (other.lo[a] < lo[a] || other.hi[a] > hi[a]) return false;
  }
  return true;
}

double Box::volume() const {
  if (is_empty()) return 0.0;
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= hi[a] - lo[a];
  return v;
}

Box Box::expanded(double amount) const {
  if (is_empty()) return *this;
  Box b = *this;
  for (int a = 0; a < dim; ++a) {
    b.lo[a] -= amount;
    b.hi[a] += amount;
  }
  return b;
}

Box Box::intersect(const Box& other) const {
  Box b = *this;
  for (int a = 0; a < dim; ++a) {
    b.lo[a] = std::max(lo[a], other.lo[a]);
    b.hi[a] = std::min(hi[a], other.hi[a]);
  }
  return b;
}

double Box::clearance(const Box& inner) const {
  if (inner.is_empty()) return kInf;
  double c = kInf;
  for (int a = 0; a < dim; ++a) {
    c = std::min(c, inner.lo[a] - lo[a]);
    c = std::min(c, hi[a] - inner.hi[a]);
  }
  return c;
}

std::string Box::to_string() const {
  if (is_empty()) return "(empty)";
  std::ostringstream os;
  os.precision(6);
  for (int a = 0; a < dim; ++a) {
    if (a > 0) os << "x";
    os << "[" << lo[a] << ", " << hi[a] << "]";
  }
  return os.str();
}

}  // namespace weyl

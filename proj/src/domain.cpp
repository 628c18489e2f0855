#include "parahom/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "parahom/errors.hpp"

namespace parahom {

double Box::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) v *= std::max(0.0, upper[a] - lower[a]);
  return v;
}

bool Box::contains(std::span<const double> point, double tol) const {
  for (int a = 0; a < dim(); ++a)
    if (point[a] < lower[a] - tol || point[a] > upper[a] + tol) return false;
  return true;
}

namespace {

double ball_volume(int n, double r) {
  switch (n) {
    case 1: return 2.0 * r;
    case 2: return std::numbers::pi * r * r;
    default: return 4.0 / 3.0 * std::numbers::pi * r * r * r;
  }
}

double distance_to_box(std::span<const double> point, std::span<const double> lower,
                       std::span<const double> upper) {
  double sq = 0.0;
  for (std::size_t a = 0; a < point.size(); ++a) {
    const double d = std::max({lower[a] - point[a], 0.0, point[a] - upper[a]});
    sq += d * d;
  }
  return std::sqrt(sq);
}

}  // namespace

Domain::Domain(std::vector<Box> boxes, std::vector<Ball> holes)
    : boxes_(std::move(boxes)), holes_(std::move(holes)) {
  if (boxes_.empty()) throw InvalidInput("domain needs at least one box");
  dim_ = boxes_.front().dim();
  if (dim_ < 1 || dim_ > 3) throw InvalidInput("domain dimension must be 1, 2 or 3");
  for (const auto& b : boxes_) {
    if (b.dim() != dim_ || static_cast<int>(b.upper.size()) != dim_)
      throw DimensionMismatch("domain boxes disagree on dimension");
    for (int a = 0; a < dim_; ++a)
      if (!(b.upper[a] > b.lower[a]) || !std::isfinite(b.lower[a]) || !std::isfinite(b.upper[a]))
        throw InvalidInput("domain boxes must have positive finite extent");
  }
  measure_ = union_volume_within(bounding_box());
  for (std::size_t i = 0; i < holes_.size(); ++i) {
    const auto& h = holes_[i];
    if (static_cast<int>(h.center.size()) != dim_)
      throw DimensionMismatch("hole dimension does not match domain");
    if (!(h.radius > 0.0)) throw InvalidInput("hole radius must be positive");
    Box hull{h.center, h.center};
    for (int a = 0; a < dim_; ++a) {
      hull.lower[a] -= h.radius;
      hull.upper[a] += h.radius;
    }
    if (union_volume_within(hull) < hull.volume() * (1.0 - 1e-12))
      throw InvalidInput("holes must lie inside the union of boxes");
    for (std::size_t j = 0; j < i; ++j) {
      double sq = 0.0;
      for (int a = 0; a < dim_; ++a) sq += std::pow(h.center[a] - holes_[j].center[a], 2);
      if (std::sqrt(sq) <= h.radius + holes_[j].radius)
        throw InvalidInput("holes must be pairwise disjoint");
    }
    measure_ -= ball_volume(dim_, h.radius);
  }
}

Domain Domain::unit_cube(int n) {
  return box(std::vector<double>(n, 0.0), std::vector<double>(n, 1.0));
}

Domain Domain::box(std::vector<double> lower, std::vector<double> upper) {
  return Domain({Box{std::move(lower), std::move(upper)}});
}

bool Domain::contains(std::span<const double> point) const {
  bool inside = false;
  for (const auto& b : boxes_) {
    if (b.contains(point)) {
      inside = true;
      break;
    }
  }
  if (!inside) return false;
  for (const auto& h : holes_) {
    double sq = 0.0;
    for (int a = 0; a < dim_; ++a) sq += (point[a] - h.center[a]) * (point[a] - h.center[a]);
    if (sq <= h.radius * h.radius) return false;
  }
  return true;
}

bool Domain::contains_cube(std::span<const double> lower, double side) const {
  Box cube{std::vector<double>(lower.begin(), lower.end()),
           std::vector<double>(lower.begin(), lower.end())};
  for (auto& u : cube.upper) u += side;
  const double full = cube.volume();
  if (union_volume_within(cube) < full * (1.0 - 1e-10)) return false;
  for (const auto& h : holes_)
    if (distance_to_box(h.center, cube.lower, cube.upper) <= h.radius) return false;
  return true;
}

double Domain::measure() const { return measure_; }

Box Domain::bounding_box() const {
  Box bb = boxes_.front();
  for (const auto& b : boxes_) {
    for (int a = 0; a < dim_; ++a) {
      bb.lower[a] = std::min(bb.lower[a], b.lower[a]);
      bb.upper[a] = std::max(bb.upper[a], b.upper[a]);
    }
  }
  return bb;
}

// Volume of (union of boxes) intersected with `clip`, by coordinate
// compression into elementary boxes.
double Domain::union_volume_within(const Box& clip) const {
  std::vector<std::vector<double>> cuts(dim_);
  for (int a = 0; a < dim_; ++a) {
    cuts[a] = {clip.lower[a], clip.upper[a]};
    for (const auto& b : boxes_) {
      for (double v : {b.lower[a], b.upper[a]})
        if (v > clip.lower[a] && v < clip.upper[a]) cuts[a].push_back(v);
    }
    std::sort(cuts[a].begin(), cuts[a].end());
    cuts[a].erase(std::unique(cuts[a].begin(), cuts[a].end()), cuts[a].end());
  }
  std::vector<std::size_t> idx(dim_, 0);
  std::vector<double> mid(dim_);
  double total = 0.0;
  for (;;) {
    double vol = 1.0;
    for (int a = 0; a < dim_; ++a) {
      vol *= cuts[a][idx[a] + 1] - cuts[a][idx[a]];
      mid[a] = 0.5 * (cuts[a][idx[a] + 1] + cuts[a][idx[a]]);
    }
    for (const auto& b : boxes_) {
      if (b.contains(mid)) {
        total += vol;
        break;
      }
    }
    int a = 0;
    for (; a < dim_; ++a) {
      if (++idx[a] + 1 < cuts[a].size()) break;
      idx[a] = 0;
    }
    if (a == dim_) break;
  }
  return total;
}

namespace {

// Ordering matching generation order (axis 0 fastest).
bool tile_less(std::span<const int> x, std::span<const int> y) {
  for (int a = static_cast<int>(x.size()) - 1; a >= 0; --a) {
    if (x[a] != y[a]) return x[a] < y[a];
  }
  return false;
}

}  // namespace

bool Tiling::contains_tile(std::span<const int> multi) const {
  std::size_t lo = 0, hi = size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (tile_less(tile(mid), multi))
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo < size() && !tile_less(multi, tile(lo));
}

Tiling tile_interior(const Domain& omega, double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidInput("tile size must be positive");
  const int n = omega.dim();
  const Box bb = omega.bounding_box();
  std::vector<long> first(n), last(n);
  for (int a = 0; a < n; ++a) {
    first[a] = static_cast<long>(std::floor(bb.lower[a] / eta));
    last[a] = static_cast<long>(std::ceil(bb.upper[a] / eta));
  }
  Tiling tiling;
  tiling.eta = eta;
  tiling.dim = n;
  std::vector<long> idx = first;
  std::vector<double> lower(n);
  bool any = true;
  for (int a = 0; a < n; ++a)
    if (first[a] >= last[a]) any = false;
  while (any) {
    for (int a = 0; a < n; ++a) lower[a] = static_cast<double>(idx[a]) * eta;
    if (omega.contains_cube(lower, eta)) {
      for (int a = 0; a < n; ++a) tiling.indices.push_back(static_cast<int>(idx[a]));
    }
    int a = 0;
    for (; a < n; ++a) {
      if (++idx[a] < last[a]) break;
      idx[a] = first[a];
    }
    if (a == n) break;
  }
  tiling.tiled_measure = static_cast<double>(tiling.size()) * std::pow(eta, n);
  tiling.remainder_measure = std::max(0.0, omega.measure() - tiling.tiled_measure);
  return tiling;
}

}  // namespace parahom

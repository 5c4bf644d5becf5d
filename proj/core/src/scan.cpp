#include "pgptycho/scan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pgptycho/forward.hpp"

namespace pgptycho {

namespace {

double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

ScanPattern fermat_spiral(std::size_t n_points, double scale) {
  if (n_points == 0) throw ArgumentError("fermat_spiral needs at least one point");
  if (!(scale > 0.0)) throw ArgumentError("fermat_spiral scale must be positive");
  ScanPattern pattern;
  pattern.positions.reserve(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double r = scale * std::sqrt(static_cast<double>(i));
    const double theta = static_cast<double>(i) * kGoldenAngle;
    pattern.positions.push_back({r * std::cos(theta), r * std::sin(theta)});
  }
  return pattern;
}

double mean_nearest_neighbor_distance(const std::vector<Point2>& positions) {
  if (positions.size() < 2) throw ArgumentError("nearest-neighbour distance needs 2+ points");
  double sum = 0.0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < positions.size(); ++j) {
      if (i != j) best = std::min(best, distance(positions[i], positions[j]));
    }
    sum += best;
  }
  return sum / static_cast<double>(positions.size());
}

double mean_linear_overlap(const std::vector<Point2>& positions, double probe_radius) {
  if (!(probe_radius > 0.0)) throw ArgumentError("probe radius must be positive");
  return 1.0 - mean_nearest_neighbor_distance(positions) / (2.0 * probe_radius);
}

double scale_for_overlap(double probe_radius, double target_overlap, std::size_t n_points) {
  if (!(probe_radius > 0.0)) throw ArgumentError("probe radius must be positive");
  if (!(target_overlap >= 0.0 && target_overlap < 1.0)) {
    throw ArgumentError("target overlap must lie in [0, 1), got " +
                        std::to_string(target_overlap));
  }
  if (n_points < 2) throw ArgumentError("overlap needs at least 2 scan points");
  const double unit = mean_nearest_neighbor_distance(fermat_spiral(n_points, 1.0).positions);
  return 2.0 * probe_radius * (1.0 - target_overlap) / unit;
}

double path_length(const std::vector<Point2>& positions) {
  double sum = 0.0;
  for (std::size_t i = 1; i < positions.size(); ++i) sum += distance(positions[i - 1], positions[i]);
  return sum;
}

namespace {

std::vector<std::size_t> nearest_neighbor_tour(const std::vector<Point2>& pts) {
  std::vector<std::size_t> tour{0};
  std::vector<bool> used(pts.size(), false);
  used[0] = true;
  for (std::size_t step = 1; step < pts.size(); ++step) {
    const auto& last = pts[tour.back()];
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (used[j]) continue;
      const double d = distance(last, pts[j]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    used[best] = true;
    tour.push_back(best);
  }
  return tour;
}

double tour_length(const std::vector<Point2>& pts, const std::vector<std::size_t>& tour) {
  double sum = 0.0;
  for (std::size_t i = 1; i < tour.size(); ++i) sum += distance(pts[tour[i - 1]], pts[tour[i]]);
  return sum;
}

// Open-path 2-opt: reversing tour[i..j] replaces edges (i-1, i) and (j, j+1).
void two_opt(const std::vector<Point2>& pts, std::vector<std::size_t>& tour) {
  const std::size_t n = tour.size();
  const std::size_t max_passes = n * n;
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    bool improved = false;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto& a = pts[tour[i - 1]];
        const auto& b = pts[tour[i]];
        const auto& c = pts[tour[j]];
        double before = distance(a, b);
        double after = distance(a, c);
        if (j + 1 < n) {
          const auto& d = pts[tour[j + 1]];
          before += distance(c, d);
          after += distance(b, d);
        }
        if (after < before - 1e-15 * before) {
          std::reverse(tour.begin() + static_cast<std::ptrdiff_t>(i),
                       tour.begin() + static_cast<std::ptrdiff_t>(j) + 1);
          improved = true;
        }
      }
    }
    if (!improved) break;
  }
}

}  // namespace

ScanPattern order_tsp(const ScanPattern& pattern) {
  const auto& pts = pattern.positions;
  ScanPattern out = pattern;
  if (pts.size() <= 3) return out;

  std::vector<std::size_t> identity(pts.size());
  for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;
  auto tour = nearest_neighbor_tour(pts);
  if (tour_length(pts, tour) > tour_length(pts, identity)) tour = identity;
  two_opt(pts, tour);

  for (std::size_t i = 0; i < tour.size(); ++i) out.positions[i] = pts[tour[i]];
  return out;
}

std::vector<PixelOffset> to_pixel_offsets(const std::vector<Point2>& positions, double pitch,
                                          const Shape& object, const Shape& probe) {
  if (!(pitch > 0.0)) throw ArgumentError("pitch must be positive");
  const double row0 = 0.5 * (static_cast<double>(object.height) - static_cast<double>(probe.height));
  const double col0 = 0.5 * (static_cast<double>(object.width) - static_cast<double>(probe.width));
  std::vector<PixelOffset> offsets;
  offsets.reserve(positions.size());
  for (const auto& p : positions) {
    offsets.push_back({static_cast<std::ptrdiff_t>(std::llround(row0 + p.y / pitch)),
                       static_cast<std::ptrdiff_t>(std::llround(col0 + p.x / pitch))});
  }
  validate_positions(object, probe, offsets);
  return offsets;
}

}  // namespace pgptycho

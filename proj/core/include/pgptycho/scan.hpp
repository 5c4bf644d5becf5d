#pragma once

#include <cstddef>
#include <numbers>
#include <vector>

#include "pgptycho/field.hpp"

namespace pgptycho {

struct Point2 {
  double x = 0.0;  // m
  double y = 0.0;  // m

  friend bool operator==(const Point2&, const Point2&) = default;
};

struct ScanPattern {
  std::vector<Point2> positions;
  double probe_radius = 0.0;  // nominal illumination radius, m
  double target_overlap = 0.0;
};

// pi * (3 - sqrt 5) rad, about 137.5078 degrees.
inline constexpr double kGoldenAngle = std::numbers::pi * (3.0 - 2.2360679774997896964);

/// Point i at radius scale*sqrt(i) and angle i*golden angle, i = 0..n-1.
ScanPattern fermat_spiral(std::size_t n_points, double scale);

double mean_nearest_neighbor_distance(const std::vector<Point2>& positions);

// Mean over points of 1 - d_nn / (2 r): 0 when neighbouring discs just touch.
double mean_linear_overlap(const std::vector<Point2>& positions, double probe_radius);

/// Spiral scale whose mean nearest-neighbour overlap equals `target_overlap`.
/// The pattern is linear in scale, so this is exact for the unsnapped points.
double scale_for_overlap(double probe_radius, double target_overlap, std::size_t n_points);

double path_length(const std::vector<Point2>& positions);

/// Reorders the points to shorten the open travel path: nearest-neighbour
/// construction from the first point followed by 2-opt, never longer than the
/// input order.
ScanPattern order_tsp(const ScanPattern& pattern);

/// Snaps positions (relative to the object center) to top-left pixel offsets of
/// the probe window. Throws RangeError if a window leaves the object.
std::vector<PixelOffset> to_pixel_offsets(const std::vector<Point2>& positions, double pitch,
                                          const Shape& object, const Shape& probe);

}  // namespace pgptycho

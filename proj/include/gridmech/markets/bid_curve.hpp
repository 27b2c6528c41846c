#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gridmech/markets/system_data.hpp"

namespace gridmech::markets {

/// A bidder's declared cost over quantities. Exclusive blocks are mutually
/// exclusive (quantity, total price) offers forming a left-continuous step
/// curve; the convex kind is piecewise linear through its breakpoints.
struct BidCurve {
  enum class Kind { ExclusiveBlocks, ConvexPwl };
  Kind kind = Kind::ExclusiveBlocks;
  std::vector<std::pair<double, double>> points;  // (quantity, cumulative price)
  bool zero_at_zero = true;

  /// Declared cost of supplying x. Blocks: cheapest block covering x.
  double value(double x) const;

  double max_quantity() const { return points.empty() ? 0.0 : points.back().first; }
  double min_quantity() const;

  /// Convex piecewise-linear sampling of a*x^2 + b*x on [lo, hi] with the
  /// given grid step; the origin is always a breakpoint.
  static BidCurve quadratic(double a, double b, double lo, double hi, double step);

  static BidCurve blocks(std::vector<std::pair<double, double>> qp);
  static BidCurve pwl(std::vector<std::pair<double, double>> breakpoints);

  void validate() const;
};

}  // namespace gridmech::markets

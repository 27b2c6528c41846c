#include <algorithm>
#include <cmath>
#include <limits>

#include "gridmech/markets/bid_curve.hpp"

namespace gridmech::markets {

double BidCurve::value(double x) const {
  if (x == 0.0 && zero_at_zero) return 0.0;
  if (kind == Kind::ExclusiveBlocks) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [q, c] : points)
      if (q >= x - 1e-9) best = std::min(best, c);
    return best;
  }
  // Convex PWL: interpolate within the domain.
  if (points.empty()) return x == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  if (x < points.front().first - 1e-9 || x > points.back().first + 1e-9)
    return std::numeric_limits<double>::infinity();
  for (size_t k = 1; k < points.size(); ++k) {
    if (x <= points[k].first + 1e-12) {
      auto [q0, c0] = points[k - 1];
      auto [q1, c1] = points[k];
      double t = (q1 == q0) ? 0.0 : (x - q0) / (q1 - q0);
      return c0 + t * (c1 - c0);
    }
  }
  return points.back().second;
}

double BidCurve::min_quantity() const {
  if (kind == Kind::ExclusiveBlocks) return 0.0;
  return points.empty() ? 0.0 : points.front().first;
}

BidCurve BidCurve::quadratic(double a, double b, double lo, double hi, double step) {
  BidCurve curve;
  curve.kind = Kind::ConvexPwl;
  auto cost = [&](double x) { return a * x * x + b * x; };
  std::vector<double> grid;
  for (double x = 0.0; x > lo + 1e-12; x -= step) grid.push_back(x);
  if (lo < 0.0) grid.push_back(lo);
  std::reverse(grid.begin(), grid.end());
  if (grid.empty() || grid.back() < 0.0) grid.push_back(0.0);
  for (double x = step; x < hi - 1e-12; x += step) grid.push_back(x);
  if (hi > 0.0) grid.push_back(hi);
  for (double x : grid) curve.points.emplace_back(x, cost(x));
  curve.validate();
  return curve;
}

BidCurve BidCurve::blocks(std::vector<std::pair<double, double>> qp) {
  BidCurve curve;
  curve.kind = Kind::ExclusiveBlocks;
  curve.points = std::move(qp);
  curve.validate();
  return curve;
}

BidCurve BidCurve::pwl(std::vector<std::pair<double, double>> breakpoints) {
  BidCurve curve;
  curve.kind = Kind::ConvexPwl;
  curve.points = std::move(breakpoints);
  curve.validate();
  return curve;
}

void BidCurve::validate() const {
  for (size_t k = 1; k < points.size(); ++k)
    if (points[k].first <= points[k - 1].first - 1e-12)
      throw MarketError("bid curve: quantities must be strictly increasing");
  if (kind == Kind::ConvexPwl) {
    double prev_slope = -std::numeric_limits<double>::infinity();
    for (size_t k = 1; k < points.size(); ++k) {
      double slope = (points[k].second - points[k - 1].second) /
                     (points[k].first - points[k - 1].first);
      if (slope < prev_slope - 1e-9)
        throw MarketError("bid curve: convex kind needs nondecreasing slopes");
      prev_slope = slope;
    }
    if (zero_at_zero && std::abs(value(0.0)) > 1e-9)
      throw MarketError("bid curve: must vanish at zero quantity");
  } else {
    for (const auto& [q, c] : points)
      if (q <= 0.0) throw MarketError("bid curve: block quantities must be positive");
  }
}

}  // namespace gridmech::markets

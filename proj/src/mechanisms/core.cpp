#include <algorithm>
#include <cmath>

#include "gridmech/mechanisms/core.hpp"
#include "gridmech/mechanisms/mpcs.hpp"

namespace gridmech::mechanisms {

CoreCheck check_in_core(const AuctionProblem& problem, const std::vector<double>& utilities,
                        int max_winners) {
  std::vector<int> winners = problem.winners();
  if (static_cast<int>(winners.size()) > max_winners)
    throw AuctionError("check_in_core: " + std::to_string(winners.size()) +
                       " winners exceed the exhaustive-check guard");
  const AuctionEval& full = problem.evaluate(problem.all());

  CoreCheck out;
  const Subset all = problem.all();
  const int nw = static_cast<int>(winners.size());
  for (Subset pick = 1; pick < (Subset{1} << nw); ++pick) {
    Subset k_mask = 0;
    double usum = 0.0;
    for (int i = 0; i < nw; ++i)
      if (pick >> i & 1) {
        k_mask |= Subset{1} << winners[i];
        usum += utilities[winners[i]];
      }
    const AuctionEval& rest = problem.evaluate(all & ~k_mask);
    double bound = rest.feasible ? rest.cost - full.cost
                                 : std::numeric_limits<double>::infinity();
    double excess = usum - bound;
    if (excess > out.max_excess) {
      out.max_excess = excess;
      out.worst_coalition = k_mask;
    }
  }
  out.in_core = out.max_excess <= 1e-6 * (1.0 + std::abs(full.cost));
  if (out.in_core) out.max_excess = std::max(0.0, out.max_excess);
  return out;
}

SupermodularityReport check_supermodular(const AuctionProblem& problem, int max_bidders) {
  const int n = problem.num_bidders();
  if (n > max_bidders)
    throw AuctionError("check_supermodular: bidder count exceeds the exhaustive guard");
  SupermodularityReport out;
  const Subset all = problem.all();
  auto j = [&](Subset s) {
    const AuctionEval& e = problem.evaluate(s);
    return e.feasible ? e.cost : std::numeric_limits<double>::infinity();
  };
  for (Subset s = 0; s <= all; ++s) {
    for (Subset r = s + 1; r <= all; ++r) {
      double lhs = j(s | r) + j(s & r);
      double rhs = j(s) + j(r);
      if (std::isinf(rhs) && std::isinf(lhs)) continue;
      if (lhs < rhs - 1e-6) {
        out.supermodular = false;
        double gap = rhs - lhs;
        if (gap > out.violation) {
          out.violation = gap;
          out.witness_s = s;
          out.witness_r = r;
        }
      }
    }
  }
  return out;
}

BidConditionReport validate_marginal_increase(const SingleGoodMarket& market) {
  BidConditionReport out;
  const double m = market.increment();
  for (int l = 0; l < market.num_bidders(); ++l) {
    const BidCurve& curve = market.curves()[l];
    int max_k = static_cast<int>(std::llround(curve.max_quantity() / m));
    std::vector<double> price(max_k + 1, std::numeric_limits<double>::infinity());
    price[0] = 0.0;
    for (const auto& [q, c] : curve.points) {
      int k = static_cast<int>(std::llround(q / m));
      price[k] = std::min(price[k], c);
    }
    for (int k = 1; k <= max_k; ++k) {
      if (std::isinf(price[k])) {
        out.valid = false;
        out.findings.push_back("bidder " + market.names()[l] + ": bid price for " +
                               std::to_string(static_cast<long long>(k * m)) +
                               " MW is not submitted");
      }
    }
    double prev = -std::numeric_limits<double>::infinity();
    for (int k = 1; k <= max_k; ++k) {
      if (std::isinf(price[k]) || std::isinf(price[k - 1])) continue;
      double inc = price[k] - price[k - 1];
      if (inc <= prev + 1e-12) {
        out.valid = false;
        out.findings.push_back("bidder " + market.names()[l] +
                               ": marginal prices are not strictly increasing at " +
                               std::to_string(static_cast<long long>(k * m)) + " MW");
      }
      prev = inc;
    }
  }
  return out;
}

BidConditionReport validate_requirement_market(const RequirementMarket& market) {
  BidConditionReport out;
  const int t = market.num_types();
  const std::uint32_t full = (1u << t) - 1;
  if (market.amount(0) != 0.0) {
    out.valid = false;
    out.findings.push_back("requirement function is not normalized (M(empty) != 0)");
  }
  for (std::uint32_t a = 0; a <= full; ++a) {
    for (std::uint32_t b = 0; b <= full; ++b) {
      if ((a & b) == a && market.amount(a) > market.amount(b) + 1e-9 && a != b) {
        out.valid = false;
        out.findings.push_back("requirement function is decreasing on a subset pair");
      }
      double lhs = market.amount(a | b) + market.amount(a & b);
      double rhs = market.amount(a) + market.amount(b);
      if (lhs < rhs - 1e-9) {
        out.valid = false;
        out.findings.push_back("requirement function is not supermodular: M(union) + "
                               "M(intersection) < M(A) + M(B)");
      }
    }
  }
  for (int l = 0; l < market.num_bidders(); ++l) {
    const BidCurve& curve = market.curves()[l];
    double prev_q = 0.0, prev_c = 0.0, prev_slope = 0.0;
    for (const auto& [q, c] : curve.points) {
      double slope = (c - prev_c) / (q - prev_q);
      if (c < prev_c - 1e-9 || slope < prev_slope - 1e-9) {
        out.valid = false;
        out.findings.push_back("bidder " + market.names()[l] +
                               ": bid is not convex increasing");
        break;
      }
      prev_q = q;
      prev_c = c;
      prev_slope = slope;
    }
  }
  // Deduplicate repeated findings from the subset sweep.
  std::sort(out.findings.begin(), out.findings.end());
  out.findings.erase(std::unique(out.findings.begin(), out.findings.end()),
                     out.findings.end());
  return out;
}

CorePrices construct_core_prices(const AuctionProblem& problem_with_costs,
                                 const std::vector<double>& core_point, int grid_samples) {
  const AuctionProblem& problem = problem_with_costs;
  const int n = problem.num_bidders();
  CorePrices out;
  out.tables.resize(n);
  out.bidder_optimality = true;

  const AuctionEval& full = problem.evaluate(problem.all());
  for (int l = 0; l < n; ++l) {
    const BidCurve& cost = problem.curves()[l];
    double lo = cost.min_quantity();
    double hi = cost.max_quantity();
    if (cost.kind == BidCurve::Kind::ExclusiveBlocks) lo = 0.0;
    for (int k = 0; k <= grid_samples; ++k) {
      double x = lo + (hi - lo) * k / grid_samples;
      double c = cost.value(x);
      if (std::isinf(c)) continue;
      double psi = (std::abs(x) < 1e-12) ? 0.0 : c + core_point[l];
      out.tables[l].emplace_back(x, psi);
      // Condition (i): x maximizes psi - c, i.e. the uplift never exceeds u_l.
      if (psi - c > core_point[l] + 1e-9) out.bidder_optimality = false;
    }
    if (core_point[l] < -1e-9) out.bidder_optimality = false;
    if (std::abs(full.x[l]) < 1e-9 && core_point[l] > 1e-9) out.bidder_optimality = false;
  }

  // Condition (ii): no support set undercuts the operator's total payment.
  AuctionProblem::ViolationResult viol = problem.min_cost_coalition(core_point);
  double held = full.cost;
  for (int l : problem.winners()) held += core_point[l];
  out.operator_optimality = viol.z >= held - 1e-6 * (1.0 + std::abs(held));
  return out;
}

}  // namespace gridmech::mechanisms

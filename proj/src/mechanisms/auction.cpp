#include <algorithm>
#include <cmath>
#include <limits>

#include "gridmech/mechanisms/auction.hpp"

namespace gridmech::mechanisms {

using solver::kInf;
using solver::LinearProgram;
using solver::LinExpr;
using solver::MixedIntegerProgram;
using solver::Sense;
using solver::Solution;
using solver::Status;

const AuctionEval& AuctionProblem::evaluate(Subset s) const {
  s &= all();
  auto it = memo_.find(s);
  if (it != memo_.end()) return it->second;
  AuctionEval eval = clear(s);
  return memo_.emplace(s, std::move(eval)).first->second;
}

std::vector<int> AuctionProblem::winners(double tol) const {
  const AuctionEval& eval = evaluate(all());
  if (!eval.feasible) throw AuctionError("market is infeasible under the full bid profile");
  std::vector<int> w;
  for (int l = 0; l < num_bidders(); ++l)
    if (std::abs(eval.x[l]) > tol) w.push_back(l);
  return w;
}

AuctionProblem::ViolationResult AuctionProblem::min_cost_coalition(
    const std::vector<double>& uplift) const {
  if (num_bidders() > 20) throw AuctionError("coalition enumeration beyond 20 bidders");
  ViolationResult best;
  best.z = std::numeric_limits<double>::infinity();
  for (Subset s = 0; s <= all(); ++s) {
    const AuctionEval& eval = evaluate(s);
    if (!eval.feasible) continue;
    double z = eval.cost;
    // Uplifts accrue on the support of the allocation, not on mere membership.
    Subset support = 0;
    for (int l = 0; l < num_bidders(); ++l)
      if (std::abs(eval.x[l]) > 1e-9) support |= Subset{1} << l;
    for (int l = 0; l < num_bidders(); ++l)
      if (support >> l & 1) z += uplift[l];
    if (z < best.z - 1e-12) {
      best.z = z;
      best.coalition = support;
      best.x = eval.x;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// SingleGoodMarket: dynamic program over the quantity grid.

SingleGoodMarket::SingleGoodMarket(std::vector<std::string> names,
                                   std::vector<BidCurve> curves, double target,
                                   double increment)
    : AuctionProblem(std::move(names), std::move(curves), false, false),
      target_(target),
      increment_(increment) {
  if (increment_ <= 0.0) throw AuctionError("single-good market: increment must be positive");
  double steps = target_ / increment_;
  if (std::abs(steps - std::round(steps)) > 1e-9)
    throw AuctionError("single-good market: increment must divide the target");
  for (size_t l = 0; l < curves_.size(); ++l) {
    if (curves_[l].kind != BidCurve::Kind::ExclusiveBlocks)
      throw AuctionError("single-good market: exclusive-block bids expected");
    for (const auto& [q, c] : curves_[l].points) {
      double k = q / increment_;
      if (std::abs(k - std::round(k)) > 1e-9)
        throw AuctionError("single-good market: bid of " + names_[l] +
                           " is off the common quantity grid");
    }
  }
}

std::unique_ptr<AuctionProblem> SingleGoodMarket::with_curve(int bidder,
                                                             BidCurve curve) const {
  auto copy = curves_;
  copy.at(bidder) = std::move(curve);
  return std::make_unique<SingleGoodMarket>(names_, std::move(copy), target_, increment_);
}

AuctionEval SingleGoodMarket::clear(Subset s) const {
  const int n = num_bidders();
  const int grid = static_cast<int>(std::llround(target_ / increment_));
  const double inf = std::numeric_limits<double>::infinity();

  // dp[q] = least cost to procure q grid units; choices remember the block.
  std::vector<double> dp(grid + 1, inf);
  dp[0] = 0.0;
  std::vector<std::vector<int>> choice(n, std::vector<int>(grid + 1, -1));
  std::vector<int> members;
  for (int l = 0; l < n; ++l)
    if (s >> l & 1) members.push_back(l);

  for (int l : members) {
    std::vector<double> next = dp;
    std::vector<int>& pick = choice[l];
    for (int q = 0; q <= grid; ++q) {
      if (dp[q] == inf) continue;
      for (size_t i = 0; i < curves_[l].points.size(); ++i) {
        auto [quant, price] = curves_[l].points[i];
        int q2 = std::min(grid, q + static_cast<int>(std::llround(quant / increment_)));
        double cost = dp[q] + price;
        if (cost < next[q2] - 1e-12) {
          next[q2] = cost;
          pick[q2] = static_cast<int>(i);
        }
      }
    }
    // Keep the provenance usable: a pick at q2 refers to the dp state before l.
    dp = std::move(next);
  }

  AuctionEval eval;
  eval.x.assign(n, 0.0);
  if (dp[grid] == inf) return eval;
  eval.feasible = true;
  eval.cost = dp[grid];

  // Recover one optimal allocation by re-running the DP backwards.
  std::vector<std::vector<double>> table(members.size() + 1,
                                         std::vector<double>(grid + 1, inf));
  table[0][0] = 0.0;
  for (size_t k = 0; k < members.size(); ++k) {
    int l = members[k];
    for (int q = 0; q <= grid; ++q) {
      if (table[k][q] == inf) continue;
      if (table[k][q] < table[k + 1][q]) table[k + 1][q] = table[k][q];
      for (const auto& [quant, price] : curves_[l].points) {
        int q2 = std::min(grid, q + static_cast<int>(std::llround(quant / increment_)));
        table[k + 1][q2] = std::min(table[k + 1][q2], table[k][q] + price);
      }
    }
  }
  int q = grid;
  for (size_t k = members.size(); k-- > 0;) {
    int l = members[k];
    bool assigned = false;
    if (table[k][q] <= table[k + 1][q] + 1e-12) {
      assigned = true;  // bidder l takes nothing
    } else {
      for (const auto& [quant, price] : curves_[l].points) {
        int dq = static_cast<int>(std::llround(quant / increment_));
        for (int q0 = std::max(0, q - dq); q0 <= q; ++q0) {
          int q2 = std::min(grid, q0 + dq);
          if (q2 != q) continue;
          if (std::abs(table[k][q0] + price - table[k + 1][q]) < 1e-9) {
            eval.x[l] = quant;
            q = q0;
            assigned = true;
            break;
          }
        }
        if (assigned) break;
      }
    }
    if (!assigned) throw AuctionError("single-good market: allocation recovery failed");
  }
  return eval;
}

// ---------------------------------------------------------------------------
// RequirementMarket: exhaustive search over block choices.

RequirementMarket::RequirementMarket(std::vector<std::string> names,
                                     std::vector<BidCurve> curves,
                                     std::vector<int> bidder_type, int num_types,
                                     std::vector<Requirement> requirements)
    : AuctionProblem(std::move(names), std::move(curves), false, false),
      bidder_type_(std::move(bidder_type)),
      num_types_(num_types),
      requirements_(std::move(requirements)) {
  if (bidder_type_.size() != curves_.size())
    throw AuctionError("requirement market: one type per bidder expected");
  double options = 1.0;
  for (const auto& c : curves_) options *= static_cast<double>(c.points.size() + 1);
  if (options > 2e6) throw AuctionError("requirement market: too many block combinations");
}

double RequirementMarket::amount(std::uint32_t type_mask) const {
  for (const auto& r : requirements_) {
    std::uint32_t mask = 0;
    for (int t : r.types) mask |= 1u << t;
    if (mask == type_mask) return r.amount;
  }
  return 0.0;
}

std::unique_ptr<AuctionProblem> RequirementMarket::with_curve(int bidder,
                                                              BidCurve curve) const {
  auto copy = curves_;
  copy.at(bidder) = std::move(curve);
  return std::make_unique<RequirementMarket>(names_, std::move(copy), bidder_type_,
                                             num_types_, requirements_);
}

AuctionEval RequirementMarket::clear(Subset s) const {
  const int n = num_bidders();
  std::vector<int> members;
  for (int l = 0; l < n; ++l)
    if (s >> l & 1) members.push_back(l);

  AuctionEval best;
  best.x.assign(n, 0.0);
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<double> quantity(n, 0.0);
  std::vector<double> supplied(num_types_, 0.0);

  std::function<void(size_t, double)> rec = [&](size_t k, double cost) {
    if (cost >= best_cost - 1e-12) return;
    if (k == members.size()) {
      for (const auto& r : requirements_) {
        double total = 0.0;
        for (int t : r.types) total += supplied[t];
        if (total < r.amount - 1e-9) return;
      }
      best_cost = cost;
      best.feasible = true;
      best.cost = cost;
      for (int l = 0; l < n; ++l) best.x[l] = quantity[l];
      return;
    }
    int l = members[k];
    // Skipping the bidder first keeps the recovered optimum lexicographically
    // small in the accepted quantities.
    rec(k + 1, cost);
    for (const auto& [q, price] : curves_[l].points) {
      quantity[l] = q;
      supplied[bidder_type_[l]] += q;
      rec(k + 1, cost + price);
      supplied[bidder_type_[l]] -= q;
      quantity[l] = 0.0;
    }
  };
  rec(0, 0.0);
  return best;
}

// ---------------------------------------------------------------------------
// DcNetworkMarket: LP with convex PWL segment variables, MILP for the
// inflated-bid coalition subproblem.

DcNetworkMarket::DcNetworkMarket(std::vector<std::string> names,
                                 std::vector<BidCurve> curves,
                                 std::vector<int> bidder_node, int num_nodes,
                                 std::vector<NetLine> lines, std::vector<double> demand,
                                 bool exchange)
    : AuctionProblem(std::move(names), std::move(curves), exchange, true),
      bidder_node_(std::move(bidder_node)),
      num_nodes_(num_nodes),
      lines_(std::move(lines)),
      demand_(std::move(demand)) {
  if (bidder_node_.size() != curves_.size())
    throw AuctionError("network market: one node per bidder expected");
  if (static_cast<int>(demand_.size()) != num_nodes_)
    throw AuctionError("network market: one demand entry per node expected");
  for (const auto& c : curves_)
    if (c.kind != BidCurve::Kind::ConvexPwl)
      throw AuctionError("network market: convex piecewise-linear bids expected");
}

std::unique_ptr<AuctionProblem> DcNetworkMarket::with_curve(int bidder,
                                                            BidCurve curve) const {
  auto copy = curves_;
  copy.at(bidder) = std::move(curve);
  return std::make_unique<DcNetworkMarket>(names_, std::move(copy), bidder_node_,
                                           num_nodes_, lines_, demand_, exchange_);
}

MixedIntegerProgram DcNetworkMarket::build(Subset s, const std::vector<double>* uplift,
                                           std::vector<std::vector<int>>* seg_vars,
                                           std::vector<int>* balance_rows) const {
  MixedIntegerProgram mip;
  LinearProgram& lp = mip.lp;
  const int n = num_bidders();
  seg_vars->assign(n, {});

  std::vector<int> gate(n, -1);
  for (int l = 0; l < n; ++l) {
    bool active = (s >> l & 1) != 0;
    const BidCurve& curve = curves_[l];
    // Segment variables around the origin: right segments fill upward in
    // slope order, left segments downward; convexity makes the LP exact.
    size_t origin = 0;
    while (origin + 1 < curve.points.size() && curve.points[origin].first < -1e-12)
      ++origin;
    double lo_total = curve.points.front().first;
    double hi_total = curve.points.back().first;
    for (size_t k = origin; k + 1 < curve.points.size(); ++k) {
      auto [q0, c0] = curve.points[k];
      auto [q1, c1] = curve.points[k + 1];
      double w = active ? q1 - q0 : 0.0;
      int v = lp.add_variable(names_[l] + ":r" + std::to_string(k), 0.0, w,
                              (c1 - c0) / (q1 - q0));
      seg_vars->at(l).push_back(v);
    }
    for (size_t k = origin; k-- > 0;) {
      auto [q0, c0] = curve.points[k];
      auto [q1, c1] = curve.points[k + 1];
      double w = active ? q1 - q0 : 0.0;
      int v = lp.add_variable(names_[l] + ":l" + std::to_string(k), -w, 0.0,
                              (c1 - c0) / (q1 - q0));
      seg_vars->at(l).push_back(v);
    }
    if (uplift != nullptr && active && (*uplift)[l] > 1e-9) {
      int z = lp.add_variable(names_[l] + ":in", 0.0, 1.0, (*uplift)[l]);
      mip.mark_binary(z);
      gate[l] = z;
      std::vector<std::pair<int, double>> sum;
      for (int v : seg_vars->at(l)) sum.emplace_back(v, 1.0);
      auto hi_row = sum;
      hi_row.emplace_back(z, -hi_total);
      lp.add_constraint(names_[l] + ":gate_hi", hi_row, Sense::LessEqual, 0.0);
      auto lo_row = sum;
      lo_row.emplace_back(z, -lo_total);
      lp.add_constraint(names_[l] + ":gate_lo", lo_row, Sense::GreaterEqual, 0.0);
    }
  }

  std::vector<int> f(lines_.size()), th(num_nodes_);
  for (size_t l = 0; l < lines_.size(); ++l)
    f[l] = lp.add_variable("f[" + lines_[l].name + "]", -lines_[l].capacity,
                           lines_[l].capacity, 0.0);
  for (int v = 0; v < num_nodes_; ++v)
    th[v] = lp.add_variable("th" + std::to_string(v), v == 0 ? 0.0 : -kInf,
                            v == 0 ? 0.0 : kInf);

  balance_rows->assign(num_nodes_, -1);
  for (int v = 0; v < num_nodes_; ++v) {
    std::vector<std::pair<int, double>> terms;
    for (int l = 0; l < n; ++l)
      if (bidder_node_[l] == v)
        for (int seg : seg_vars->at(l)) terms.emplace_back(seg, 1.0);
    for (size_t e = 0; e < lines_.size(); ++e) {
      if (lines_[e].to == v) terms.emplace_back(f[e], 1.0);
      if (lines_[e].from == v) terms.emplace_back(f[e], -1.0);
    }
    (*balance_rows)[v] =
        lp.add_constraint("bal" + std::to_string(v), terms, Sense::Equal, demand_[v]);
  }
  for (size_t e = 0; e < lines_.size(); ++e)
    lp.add_constraint("flow[" + lines_[e].name + "]",
                      {{f[e], 1.0},
                       {th[lines_[e].from], -lines_[e].susceptance},
                       {th[lines_[e].to], lines_[e].susceptance}},
                      Sense::Equal, 0.0);
  return mip;
}

AuctionEval DcNetworkMarket::clear(Subset s) const {
  std::vector<std::vector<int>> seg_vars;
  std::vector<int> balance;
  MixedIntegerProgram mip = build(s, nullptr, &seg_vars, &balance);
  Solution sol = solve_lp(mip.lp);
  AuctionEval eval;
  eval.x.assign(num_bidders(), 0.0);
  if (sol.status != Status::Optimal) return eval;
  eval.feasible = true;
  eval.cost = sol.objective;
  eval.nodal_price.assign(num_bidders(), 0.0);
  for (int l = 0; l < num_bidders(); ++l) {
    for (int v : seg_vars[l]) eval.x[l] += sol.x[v];
    eval.nodal_price[l] = sol.dual[balance[bidder_node_[l]]];
  }
  return eval;
}

AuctionProblem::ViolationResult DcNetworkMarket::min_cost_coalition(
    const std::vector<double>& uplift) const {
  std::vector<std::vector<int>> seg_vars;
  std::vector<int> balance;
  MixedIntegerProgram mip = build(all(), &uplift, &seg_vars, &balance);
  Solution sol = solve_milp(mip);
  if (sol.status != Status::Optimal)
    throw AuctionError("coalition subproblem: solver returned " +
                       std::string(solver::status_name(sol.status)));
  ViolationResult out;
  out.z = sol.objective;
  out.x.assign(num_bidders(), 0.0);
  for (int l = 0; l < num_bidders(); ++l) {
    for (int v : seg_vars[l]) out.x[l] += sol.x[v];
    if (std::abs(out.x[l]) > 1e-7) out.coalition |= Subset{1} << l;
  }
  return out;
}

}  // namespace gridmech::mechanisms

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gridmech/markets/bid_curve.hpp"
#include "gridmech/solver/milp.hpp"

namespace gridmech::mechanisms {

using markets::BidCurve;
using Subset = std::uint32_t;

class AuctionError : public std::runtime_error {
 public:
  explicit AuctionError(const std::string& what) : std::runtime_error(what) {}
};

struct AuctionEval {
  bool feasible = false;
  double cost = 0.0;               // J(B_S); +inf represented by !feasible
  std::vector<double> x;           // allocation per bidder (0 outside S)
  std::vector<double> nodal_price; // per bidder, only for network problems
};

/// A market problem bound to a bid profile. evaluate(S) clears the market
/// with bidders outside S forced to zero; results are memoized per subset.
class AuctionProblem {
 public:
  virtual ~AuctionProblem() = default;

  int num_bidders() const { return static_cast<int>(curves_.size()); }
  const std::vector<BidCurve>& curves() const { return curves_; }
  const std::vector<std::string>& names() const { return names_; }
  bool is_exchange() const { return exchange_; }
  bool has_prices() const { return network_; }

  Subset all() const { return (Subset{1} << num_bidders()) - 1; }
  const AuctionEval& evaluate(Subset s) const;
  const AuctionEval& evaluate_without(int bidder) const {
    return evaluate(all() & ~(Subset{1} << bidder));
  }

  /// Winners of the full problem (nonzero allocation).
  std::vector<int> winners(double tol = 1e-7) const;

  /// Same market with one bidder's curve replaced (memo starts fresh).
  virtual std::unique_ptr<AuctionProblem> with_curve(int bidder, BidCurve curve) const = 0;

  /// Blocking-coalition subproblem: minimize J(B_C) + sum_{l in C} uplift_l
  /// over coalitions C. The base implementation enumerates subsets; network
  /// problems override it with the inflated-bid MILP.
  struct ViolationResult {
    double z = 0.0;
    Subset coalition = 0;
    std::vector<double> x;
  };
  virtual ViolationResult min_cost_coalition(const std::vector<double>& uplift) const;

 protected:
  AuctionProblem(std::vector<std::string> names, std::vector<BidCurve> curves,
                 bool exchange, bool network)
      : names_(std::move(names)), curves_(std::move(curves)), exchange_(exchange),
        network_(network) {}
  virtual AuctionEval clear(Subset s) const = 0;

  std::vector<std::string> names_;
  std::vector<BidCurve> curves_;
  bool exchange_ = false;
  bool network_ = false;

 private:
  mutable std::map<Subset, AuctionEval> memo_;
};

/// Reverse auction for one good: procure at least `target`, exclusive-block
/// bids on a common quantity grid.
class SingleGoodMarket : public AuctionProblem {
 public:
  SingleGoodMarket(std::vector<std::string> names, std::vector<BidCurve> curves,
                   double target, double increment);
  std::unique_ptr<AuctionProblem> with_curve(int bidder, BidCurve curve) const override;
  double target() const { return target_; }
  double increment() const { return increment_; }

 protected:
  AuctionEval clear(Subset s) const override;

 private:
  double target_;
  double increment_;
};

/// Procurement of several good types with requirements on type subsets
/// (the amount function M) and all-or-nothing block bids.
class RequirementMarket : public AuctionProblem {
 public:
  struct Requirement {
    std::vector<int> types;  // subset of type indices
    double amount = 0.0;
  };
  RequirementMarket(std::vector<std::string> names, std::vector<BidCurve> curves,
                    std::vector<int> bidder_type, int num_types,
                    std::vector<Requirement> requirements);
  std::unique_ptr<AuctionProblem> with_curve(int bidder, BidCurve curve) const override;

  int num_types() const { return num_types_; }
  const std::vector<Requirement>& requirements() const { return requirements_; }
  /// M(T) for an arbitrary subset of types (0 when unlisted).
  double amount(std::uint32_t type_mask) const;

 protected:
  AuctionEval clear(Subset s) const override;

 private:
  std::vector<int> bidder_type_;
  int num_types_;
  std::vector<Requirement> requirements_;
};

/// DC network dispatch with convex piecewise-linear bids; supports signed
/// quantity domains (exchanges with demand-side bids).
class DcNetworkMarket : public AuctionProblem {
 public:
  struct NetLine {
    std::string name;
    int from = -1, to = -1;
    double susceptance = 1.0;
    double capacity = 0.0;
  };
  DcNetworkMarket(std::vector<std::string> names, std::vector<BidCurve> curves,
                  std::vector<int> bidder_node, int num_nodes, std::vector<NetLine> lines,
                  std::vector<double> demand, bool exchange);
  std::unique_ptr<AuctionProblem> with_curve(int bidder, BidCurve curve) const override;
  ViolationResult min_cost_coalition(const std::vector<double>& uplift) const override;

 protected:
  AuctionEval clear(Subset s) const override;

 private:
  solver::MixedIntegerProgram build(Subset s, const std::vector<double>* uplift,
                                    std::vector<std::vector<int>>* seg_vars,
                                    std::vector<int>* balance_rows) const;
  std::vector<int> bidder_node_;
  int num_nodes_;
  std::vector<NetLine> lines_;
  std::vector<double> demand_;
};

}  // namespace gridmech::mechanisms

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gridmech/mechanisms/core.hpp"
#include "gridmech/mechanisms/mpcs.hpp"
#include "gridmech/mechanisms/payments.hpp"

using namespace gridmech::mechanisms;
using gridmech::markets::BidCurve;

namespace {

// Procure 800 MW; true costs $100/400, $400/400, $600/800.
SingleGoodMarket simple_market(bool collusive = false) {
  std::vector<BidCurve> curves = {
      BidCurve::blocks({{400.0, collusive ? 0.0 : 100.0}}),
      BidCurve::blocks({{400.0, collusive ? 0.0 : 400.0}}),
      BidCurve::blocks({{800.0, 600.0}}),
  };
  return SingleGoodMarket({"1", "2", "3"}, std::move(curves), 800.0, 400.0);
}

std::vector<BidCurve> simple_true_costs() {
  return {BidCurve::blocks({{400.0, 100.0}}), BidCurve::blocks({{400.0, 400.0}}),
          BidCurve::blocks({{800.0, 600.0}})};
}

// Types A/B/C; A replaces B and C. tilde adds the total-quantity row.
RequirementMarket power_market(bool tilde, bool collusive = false) {
  std::vector<BidCurve> curves = {
      BidCurve::blocks({{100.0, 500.0}}),
      BidCurve::blocks({{100.0, collusive ? 0.0 : 350.0}}),
      BidCurve::blocks({{100.0, 400.0}}),
      BidCurve::blocks({{100.0, collusive ? 0.0 : 250.0}}),
      BidCurve::blocks({{100.0, 400.0}}),
  };
  std::vector<RequirementMarket::Requirement> reqs = {{{0, 1}, 100.0}, {{0, 2}, 100.0}};
  if (tilde) reqs.push_back({{0, 1, 2}, 200.0});
  return RequirementMarket({"1", "2", "3", "4", "5"}, std::move(curves), {0, 1, 1, 2, 2},
                           3, std::move(reqs));
}

// Four nodes, generators at 1..3, 20 MWh of demand at node 4, 10 MW lines.
DcNetworkMarket four_node(bool collusive = false) {
  std::vector<BidCurve> curves;
  if (collusive) {
    curves.push_back(BidCurve::pwl({{0.0, 0.0}, {20.0, 0.0}}));
    curves.push_back(BidCurve::pwl({{0.0, 0.0}, {20.0, 0.0}}));
  } else {
    curves.push_back(BidCurve::quadratic(0.1, 12.0, 0.0, 20.0, 1.0));
    curves.push_back(BidCurve::quadratic(0.1, 12.0, 0.0, 20.0, 1.0));
  }
  curves.push_back(BidCurve::quadratic(0.1, 5.0, 0.0, 20.0, 1.0));
  std::vector<DcNetworkMarket::NetLine> lines = {
      {"3-2", 2, 1, 1.0, 10.0}, {"3-1", 2, 0, 1.0, 10.0}, {"1-2", 0, 1, 1.0, 10.0},
      {"1-4", 0, 3, 1.0, 10.0}, {"2-4", 1, 3, 1.0, 10.0},
  };
  return DcNetworkMarket({"1", "2", "3"}, std::move(curves), {0, 1, 2}, 4,
                         std::move(lines), {0.0, 0.0, 0.0, 20.0}, false);
}

std::vector<BidCurve> four_node_true_costs() {
  return {BidCurve::quadratic(0.1, 12.0, 0.0, 20.0, 1.0),
          BidCurve::quadratic(0.1, 12.0, 0.0, 20.0, 1.0),
          BidCurve::quadratic(0.1, 5.0, 0.0, 20.0, 1.0)};
}

// Exchange: generators at nodes 1..3, a buyer at node 4, tight 2 MW lines
// out of node 3.
DcNetworkMarket two_sided() {
  std::vector<BidCurve> curves = {
      BidCurve::quadratic(5.0, 4.0, 0.0, 8.0, 0.01),
      BidCurve::quadratic(4.0, 5.0, 0.0, 8.0, 0.01),
      BidCurve::quadratic(1.0, 1.0, 0.0, 8.0, 0.01),
      BidCurve::quadratic(1.0, 20.0, -8.0, 0.0, 0.01),
  };
  std::vector<DcNetworkMarket::NetLine> lines = {
      {"3-1", 2, 0, 1.0, 2.0},
      {"3-2", 2, 1, 1.0, 2.0},
      {"1-4", 0, 3, 1.0, 10.0},
      {"2-4", 1, 3, 1.0, 10.0},
  };
  return DcNetworkMarket({"1", "2", "3", "4"}, std::move(curves), {0, 1, 2, 3}, 4,
                         std::move(lines), {0.0, 0.0, 0.0, 0.0}, true);
}

std::vector<BidCurve> two_sided_true_costs() {
  return {BidCurve::quadratic(5.0, 4.0, 0.0, 8.0, 0.01),
          BidCurve::quadratic(4.0, 5.0, 0.0, 8.0, 0.01),
          BidCurve::quadratic(1.0, 1.0, 0.0, 8.0, 0.01),
          BidCurve::quadratic(1.0, 20.0, -8.0, 0.0, 0.01)};
}

}  // namespace

TEST_CASE("simple market: pay-as-bid and VCG payments") {
  auto market = simple_market();
  auto costs = simple_true_costs();

  auto pab = pay_as_bid(market, &costs);
  CHECK(pab.payment[0] == doctest::Approx(100.0));
  CHECK(pab.payment[1] == doctest::Approx(400.0));
  CHECK(pab.payment[2] == doctest::Approx(0.0));
  for (double u : pab.revealed_utility) CHECK(u == doctest::Approx(0.0));

  auto v = vcg(market, &costs);
  CHECK(v.payment[0] == doctest::Approx(200.0));
  CHECK(v.payment[1] == doctest::Approx(500.0));
  CHECK(v.payment[2] == doctest::Approx(0.0));
  CHECK(v.revealed_utility[0] == doctest::Approx(100.0));
  CHECK(v.revealed_utility[1] == doctest::Approx(100.0));
}

TEST_CASE("simple market: zero-bid collusion inflates VCG payments to 600 each") {
  auto market = simple_market(/*collusive=*/true);
  auto costs = simple_true_costs();
  auto v = vcg(market, &costs);
  CHECK(v.payment[0] == doctest::Approx(600.0));
  CHECK(v.payment[1] == doctest::Approx(600.0));
}

TEST_CASE("simple market: VCG utilities are blocked by the winner pair") {
  auto market = simple_market();
  auto check = check_in_core(market, {100.0, 100.0, 0.0});
  CHECK_FALSE(check.in_core);
  CHECK(check.worst_coalition == 0b011);
  CHECK(check.max_excess == doctest::Approx(100.0));  // 200 against bound 100

  // Pay-as-bid revealed utilities always sit in the revealed core.
  auto zeros = check_in_core(market, {0.0, 0.0, 0.0});
  CHECK(zeros.in_core);
}

TEST_CASE("simple market: MPCS splits the blocked surplus evenly") {
  auto market = simple_market();
  auto costs = simple_true_costs();
  CcgTrace trace;
  auto m = mpcs(market, &costs, &trace);
  CHECK(m.revealed_utility[0] == doctest::Approx(50.0));
  CHECK(m.revealed_utility[1] == doctest::Approx(50.0));
  CHECK(m.payment[0] == doctest::Approx(150.0));
  CHECK(m.payment[1] == doctest::Approx(450.0));
  CHECK(trace.converged);
  // Fixed point satisfies every reduced core constraint.
  CHECK(check_in_core(market, m.revealed_utility).in_core);
}

TEST_CASE("power market: VCG payment and loser collusion") {
  auto market = power_market(false);
  auto v = vcg(market);
  CHECK(v.payment[0] == doctest::Approx(600.0));
  CHECK(v.allocation[0] == doctest::Approx(100.0));

  auto collusive = power_market(false, /*collusive=*/true);
  auto vc = vcg(collusive);
  CHECK(vc.payment[1] == doctest::Approx(400.0));
  CHECK(vc.payment[3] == doctest::Approx(400.0));
  CHECK(vc.payment[0] == doctest::Approx(0.0));
}

TEST_CASE("power market with the reinforced requirement keeps VCG in the core") {
  auto market = power_market(true);
  auto v = vcg(market);
  CHECK(v.payment[1] == doctest::Approx(400.0));
  CHECK(v.payment[3] == doctest::Approx(400.0));
  CHECK(v.revealed_utility[1] == doctest::Approx(50.0));
  CHECK(v.revealed_utility[3] == doctest::Approx(150.0));
  CHECK(check_in_core(market, v.revealed_utility).in_core);
}

TEST_CASE("supermodularity verdicts on the power market") {
  // Under collusive bids the original requirement set admits a witness.
  auto original = power_market(false, /*collusive=*/true);
  auto report = check_supermodular(original);
  CHECK_FALSE(report.supermodular);
  CHECK(report.violation > 0.0);

  // The reinforced requirement function passes the polymatroid validation
  // and yields a supermodular objective.
  auto tilde = power_market(true, /*collusive=*/true);
  CHECK(check_supermodular(tilde).supermodular);
  auto validation = validate_requirement_market(tilde);
  CHECK(validation.valid);

  auto bad = validate_requirement_market(power_market(false));
  CHECK_FALSE(bad.valid);
  bool mentions_supermodular = false;
  for (const auto& f : bad.findings)
    mentions_supermodular |= f.find("supermodular") != std::string::npos;
  CHECK(mentions_supermodular);

  // Single bidder: vacuously supermodular.
  SingleGoodMarket lone({"1"}, {BidCurve::blocks({{100.0, 10.0}})}, 100.0, 100.0);
  CHECK(check_supermodular(lone).supermodular);
}

TEST_CASE("marginally increasing validation flags the missing block") {
  auto market = simple_market();
  auto report = validate_marginal_increase(market);
  CHECK_FALSE(report.valid);
  bool found = false;
  for (const auto& f : report.findings)
    found |= f.find("bid price for 400 MW is not submitted") != std::string::npos;
  CHECK(found);

  // A strictly convex quantized curve passes.
  SingleGoodMarket convex(
      {"1"}, {BidCurve::blocks({{100.0, 10.0}, {200.0, 25.0}, {300.0, 45.0}})}, 300.0,
      100.0);
  CHECK(validate_marginal_increase(convex).valid);
}

TEST_CASE("four-node network: truthful VCG pays the global bidder 260") {
  auto market = four_node();
  auto costs = four_node_true_costs();
  auto v = vcg(market, &costs);
  CHECK(v.allocation[2] == doctest::Approx(20.0).epsilon(1e-6));
  CHECK(v.allocation[0] == doctest::Approx(0.0));
  CHECK(v.allocation[1] == doctest::Approx(0.0));
  CHECK(std::abs(v.payment[2] - 260.0) < 0.01);
  CHECK(std::abs(v.true_utility[2] - 120.0) < 0.01);
}

TEST_CASE("four-node network: collusion under VCG and MPCS") {
  auto market = four_node(/*collusive=*/true);
  auto costs = four_node_true_costs();

  auto v = vcg(market, &costs);
  CHECK(v.allocation[0] == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(v.allocation[1] == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(std::abs(v.payment[0] - 140.0) < 0.01);
  CHECK(std::abs(v.payment[1] - 140.0) < 0.01);

  CcgTrace trace;
  auto m = mpcs(market, &costs, &trace);
  CHECK(std::abs(m.payment[0] - 70.0) < 0.01);
  CHECK(std::abs(m.payment[1] - 70.0) < 0.01);
  CHECK(std::abs(m.true_utility[0] + 60.0) < 0.01);
  CHECK(std::abs(m.true_utility[1] + 60.0) < 0.01);
  CHECK(trace.converged);

  // Losing-coalition collusion is unprofitable under MPCS: the colluders'
  // joint truthful utility is 0, the collusive one is negative.
  CHECK(m.true_utility[0] + m.true_utility[1] < 0.0);
}

TEST_CASE("four-node collusion: first blocking coalition is the shut-out winner") {
  auto market = four_node(/*collusive=*/true);
  auto costs = four_node_true_costs();
  auto v = vcg(market, &costs);
  auto viol = ccg_violation(market, v.revealed_utility);
  CHECK(viol.coalition == 0b100);  // bidder 3 alone
  CHECK(std::abs(viol.z - 140.0) < 0.01);

  // With zero uplifts the oracle returns the efficient outcome.
  auto base = ccg_violation(market, {0.0, 0.0, 0.0});
  CHECK(std::abs(base.z - market.evaluate(market.all()).cost) < 1e-6);
}

TEST_CASE("dc network coalition oracle agrees with subset enumeration") {
  auto market = four_node(/*collusive=*/true);
  std::mt19937 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> uplift(3);
    for (auto& u : uplift) u = std::uniform_real_distribution<double>(0.0, 150.0)(rng);
    auto milp = market.min_cost_coalition(uplift);
    // Independent route: enumerate subsets directly.
    double best = std::numeric_limits<double>::infinity();
    for (Subset s = 0; s <= market.all(); ++s) {
      const auto& eval = market.evaluate(s);
      if (!eval.feasible) continue;
      double z = eval.cost;
      for (int l = 0; l < 3; ++l)
        if (std::abs(eval.x[l]) > 1e-9) z += uplift[l];
      best = std::min(best, z);
    }
    CHECK(std::abs(milp.z - best) < 1e-5);
  }
}

TEST_CASE("two-sided market: allocation, budgets, and deviation bounds") {
  auto market = two_sided();
  auto costs = two_sided_true_costs();

  auto pab = pay_as_bid(market, &costs);
  CHECK(std::abs(pab.allocation[0] - 0.58) < 0.05);
  CHECK(std::abs(pab.allocation[1] - 0.58) < 0.05);
  CHECK(std::abs(pab.allocation[2] - 4.0) < 0.05);
  CHECK(std::abs(pab.allocation[3] + 5.16) < 0.05);
  CHECK(std::abs(pab.operator_utility - 48.3) < 0.2);

  auto l = lmp(market, &costs);
  CHECK(std::abs(l.operator_utility - 2.8) < 0.2);

  auto m = mpcs(market, &costs);
  CHECK(std::abs(m.operator_utility) < 1e-6);

  auto v = vcg(market, &costs);
  CHECK(std::abs(v.operator_utility + 34.8) < 0.2);

  CHECK(std::abs(deviation_bound(market, costs, 3, "payasbid") - 48.3) < 0.2);
  CHECK(std::abs(deviation_bound(market, costs, 3, "lmp") - 21.7) < 0.2);
  CHECK(std::abs(deviation_bound(market, costs, 3, "mpcs") - 14.9) < 0.2);
  CHECK(std::abs(deviation_bound(market, costs, 3, "vcg")) < 1e-6);

  // LMP payments never exceed VCG payments bidder by bidder.
  for (int b = 0; b < 4; ++b) CHECK(l.payment[b] <= v.payment[b] + 1e-6);
}

TEST_CASE("deviation bound equals the full VCG utility under pay-as-bid") {
  auto market = simple_market();
  auto costs = simple_true_costs();
  CHECK(deviation_bound(market, costs, 0, "payasbid") == doctest::Approx(100.0));
  CHECK(deviation_bound(market, costs, 0, "vcg") == doctest::Approx(0.0));
}

TEST_CASE("core price construction") {
  auto market = simple_market();
  auto costs = simple_true_costs();

  // Pay-as-bid point: psi equals cost on the grid.
  auto prices = construct_core_prices(market, {0.0, 0.0, 0.0});
  CHECK(prices.bidder_optimality);
  CHECK(prices.operator_optimality);
  for (int l = 0; l < 3; ++l)
    for (auto [x, psi] : prices.tables[l])
      CHECK(psi == doctest::Approx(market.curves()[l].value(x)));

  // MPCS point adds the winner uplift of 50 above cost.
  auto m = mpcs(market, &costs);
  auto mp = construct_core_prices(market, m.revealed_utility);
  CHECK(mp.bidder_optimality);
  CHECK(mp.operator_optimality);
  for (auto [x, psi] : mp.tables[0])
    if (x > 0.0) CHECK(psi == doctest::Approx(market.curves()[0].value(x) + 50.0));

  // A non-core point fails the operator-side condition.
  auto bad = construct_core_prices(market, {100.0, 100.0, 0.0});
  CHECK_FALSE(bad.operator_optimality);
}

TEST_CASE("vcg never profits the operator in an unconstrained exchange") {
  // No line limits: one seller node, one buyer node, huge capacity.
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    double a1 = std::uniform_real_distribution<double>(0.5, 3.0)(rng);
    double a2 = std::uniform_real_distribution<double>(0.5, 3.0)(rng);
    double wtp = std::uniform_real_distribution<double>(10.0, 30.0)(rng);
    std::vector<BidCurve> curves = {
        BidCurve::quadratic(a1, 1.0, 0.0, 6.0, 0.05),
        BidCurve::quadratic(a2, 2.0, 0.0, 6.0, 0.05),
        BidCurve::quadratic(1.0, wtp, -6.0, 0.0, 0.05),
    };
    DcNetworkMarket market({"s1", "s2", "b"}, std::move(curves), {0, 0, 1}, 2,
                           {{"l", 0, 1, 1.0, 1e6}}, {0.0, 0.0}, true);
    if (!market.evaluate(market.all()).feasible) continue;
    auto v = vcg(market);
    CHECK(v.operator_utility <= 1e-6);
  }
}

TEST_CASE("supermodular exchange implies no trade") {
  // Any exchange with actual trade must fail the supermodularity test.
  auto market = two_sided();
  auto report = check_supermodular(market);
  double traded = std::abs(market.evaluate(market.all()).x[2]);
  CHECK(traded > 1.0);
  CHECK_FALSE(report.supermodular);
}

TEST_CASE("removal monotonicity under validated marginally increasing bids") {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const double m = 50.0, target = 200.0;
    std::vector<BidCurve> curves;
    std::vector<std::string> names;
    for (int l = 0; l < 4; ++l) {
      std::vector<std::pair<double, double>> blocks;
      double cost = 0.0, inc = std::uniform_real_distribution<double>(1.0, 5.0)(rng);
      for (int k = 1; k <= 4; ++k) {
        inc += std::uniform_real_distribution<double>(0.5, 3.0)(rng);
        cost += inc;
        blocks.emplace_back(k * m, cost);
      }
      curves.push_back(BidCurve::blocks(blocks));
      names.push_back("b" + std::to_string(l));
    }
    SingleGoodMarket market(names, curves, target, m);
    REQUIRE(validate_marginal_increase(market).valid);
    auto full = market.evaluate(market.all());
    REQUIRE(full.feasible);
    for (int drop = 0; drop < 4; ++drop) {
      auto rest = market.evaluate_without(drop);
      if (!rest.feasible) continue;
      for (int l = 0; l < 4; ++l) {
        if (l == drop) continue;
        CHECK(rest.x[l] >= full.x[l] - 1e-9);
      }
    }
  }
}

TEST_CASE("dsic spot check: truthful VCG beats gridded unilateral deviations") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const double m = 100.0, target = 300.0;
    std::vector<BidCurve> truth;
    std::vector<std::string> names;
    for (int l = 0; l < 4; ++l) {
      double c1 = std::uniform_real_distribution<double>(10.0, 40.0)(rng);
      double c2 = c1 + std::uniform_real_distribution<double>(15.0, 50.0)(rng);
      truth.push_back(BidCurve::blocks({{m, c1}, {2 * m, c1 + c2}}));
      names.push_back("b" + std::to_string(l));
    }
    SingleGoodMarket market(names, truth, target, m);
    auto truthful = vcg(market, &truth);
    for (int l = 0; l < 4; ++l) {
      for (double shift : {-20.0, -10.0, 10.0, 25.0, 60.0}) {
        auto pts = truth[l].points;
        for (auto& [q, c] : pts) c = std::max(0.0, c + shift);
        auto deviated = market.with_curve(l, BidCurve::blocks(pts));
        if (!deviated->evaluate(deviated->all()).feasible) continue;
        auto dev = vcg(*deviated, &truth);
        CHECK(dev.true_utility[l] <= truthful.true_utility[l] + 1e-6);
      }
    }
  }
}

TEST_CASE("supermodularity is equivalent to core VCG outcomes on random instances") {
  std::mt19937 rng(4711);
  for (int trial = 0; trial < 30; ++trial) {
    const double m = 100.0;
    const double target = 300.0;
    int n = 3 + static_cast<int>(rng() % 2);
    std::vector<BidCurve> curves;
    std::vector<std::string> names;
    for (int l = 0; l < n; ++l) {
      int blocks = 1 + static_cast<int>(rng() % 3);
      std::vector<std::pair<double, double>> pts;
      double cost = 0.0;
      for (int k = 1; k <= blocks; ++k) {
        cost += std::uniform_real_distribution<double>(5.0, 60.0)(rng);
        pts.emplace_back(k * m, cost);
      }
      curves.push_back(BidCurve::blocks(pts));
      names.push_back("b" + std::to_string(l));
    }
    SingleGoodMarket market(names, curves, target, m);
    if (!market.evaluate(market.all()).feasible) continue;

    auto report = check_supermodular(market);
    if (report.supermodular) {
      // Forward direction: VCG utilities clear the core check on every
      // participating subset R containing the winners' problem.
      bool removable = true;
      for (int w : market.winners())
        removable &= market.evaluate_without(w).feasible;
      if (!removable) continue;
      auto v = vcg(market);
      CHECK(check_in_core(market, v.revealed_utility).in_core);
    } else {
      // Backward direction: some participating subset R has VCG utilities
      // blocked by a winner coalition whose removals stay feasible.
      bool blocked_somewhere = false;
      for (Subset r = 1; r <= market.all() && !blocked_somewhere; ++r) {
        const auto& base = market.evaluate(r);
        if (!base.feasible) continue;
        std::vector<int> winners;
        for (int l = 0; l < n; ++l)
          if ((r >> l & 1) && std::abs(base.x[l]) > 1e-9) winners.push_back(l);
        const int nw = static_cast<int>(winners.size());
        for (Subset pick = 1; pick < (Subset{1} << nw) && !blocked_somewhere; ++pick) {
          Subset k_mask = 0;
          double usum = 0.0;
          bool defined = true;
          for (int i = 0; i < nw && defined; ++i) {
            if (!(pick >> i & 1)) continue;
            const auto& without = market.evaluate(r & ~(Subset{1} << winners[i]));
            if (!without.feasible) {
              defined = false;
              break;
            }
            k_mask |= Subset{1} << winners[i];
            usum += without.cost - base.cost;
          }
          if (!defined) continue;
          const auto& rest = market.evaluate(r & ~k_mask);
          double bound = rest.feasible ? rest.cost - base.cost
                                       : std::numeric_limits<double>::infinity();
          if (usum > bound + 1e-6) blocked_somewhere = true;
        }
      }
      CHECK(blocked_somewhere);
    }
  }
}

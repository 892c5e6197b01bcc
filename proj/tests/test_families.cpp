#include <doctest.h>

#include <algorithm>

#include "dait/conditions.hpp"
#include "dait/engine.hpp"
#include "dait/families.hpp"
#include "dait/pseudocycle.hpp"
#include "static_oracles.hpp"

using namespace dait;

TEST_CASE("routing: line graph fixed points per participant set") {
  const auto [fam, dist] = build_min_routing(oracles::line3_instance());
  CHECK(fam.bottom() == StateVector{0, 5, 5});
  CHECK(find_fixed_point(fam, 0, NodeSet::all(3)).state == StateVector{0, 1, 2});
  // node 1 gone: 2 loses its only path
  CHECK(find_fixed_point(fam, 1, NodeSet::of({0, 2})).state == StateVector{0, 5, 5});
  // destination alone
  CHECK(find_fixed_point(fam, 2, NodeSet::of({0})).state == StateVector{0, 5, 5});
}

TEST_CASE("routing: invalid instances are rejected") {
  RoutingInstance inst = oracles::line3_instance();
  inst.epochs[0].weights[0][1] = 0;  // weights must be positive
  CHECK_THROWS_AS(MinRoutingFamily{inst}, std::invalid_argument);

  inst = oracles::line3_instance();
  inst.destination = 9;
  CHECK_THROWS_AS(MinRoutingFamily{inst}, std::invalid_argument);

  inst = oracles::line3_instance();
  inst.epochs[1].weights.pop_back();
  CHECK_THROWS_AS(MinRoutingFamily{inst}, std::invalid_argument);
}

TEST_CASE("routing: values truncate to the unreachable sentinel above the cap") {
  RoutingInstance inst;
  inst.destination = 0;
  inst.cap = 2;
  inst.epochs.push_back({{{kNoEdge, kNoEdge}, {3, kNoEdge}}, NodeSet::all(2)});
  const MinRoutingFamily fam(inst);
  // 3 + 0 exceeds the cap: unreachable
  CHECK(fam.apply(0, NodeSet::all(2), {0, 0}) == StateVector{0, 3});
  CHECK(fam.unreachable() == 3);
}

TEST_CASE("min-consensus fixed points") {
  const MinConsensusFamily fam = build_min_consensus(2, 9);
  const NodeSet everyone = NodeSet::all(2);
  CHECK(fam.apply(0, everyone, {5, 3}) == StateVector{3, 3});
  CHECK(fam.apply(0, everyone, {3, 3}) == StateVector{3, 3});

  const StateVector top{9, 9};
  CHECK(fam.apply(0, everyone, top) == top);

  // a single participant fixes its own component and drags others down to it
  const NodeSet solo = NodeSet::of({0});
  for (Value a = 0; a <= 9; ++a)
    for (Value b = 0; b <= 9; ++b)
      CHECK(fam.apply(0, solo, {a, b})[0] == a);
  CHECK(find_fixed_point(fam, 0, solo).state == fam.bottom());
}

TEST_CASE("min-consensus converges to the participant minimum after one pseudocycle") {
  const MinConsensusFamily fam = build_min_consensus(3, 9);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    ScheduleConfig cfg;
    cfg.n = 3;
    cfg.horizon = 30;
    cfg.activation_prob = 0.5;
    cfg.delay_max = 3;
    cfg.loss_prob = 0.25;
    cfg.dup_prob = 0.1;
    cfg.seed = seed;
    const auto s = generate_schedule(cfg);

    StateVector x(3);
    Rng rng(seed * 31 + 7);
    for (auto& v : x) v = rng.next_in(0, 9);
    const Value global_min = *std::min_element(x.begin(), x.end());

    const auto pcs = count_disjoint_pseudocycles(s, {0, s.horizon});
    if (pcs.count < 1) continue;
    const Trace tr = run_delta(fam, s, x);
    CAPTURE(seed);
    for (Time t = pcs.periods[0].t2; t <= s.horizon; ++t)
      CHECK(tr.state(t) == StateVector(3, global_min));
  }
}

TEST_CASE("negative controls trip exactly the conditions they name") {
  const auto controls = build_negative_controls();

  CHECK_THROWS_AS(find_fixed_point(controls.flip, 0, NodeSet::all(2)), NoFixedPoint);

  const auto amco_report =
      check_dynamic_amco(controls.identity, DiscreteDistance{}, {{0, NodeSet::all(2)}});
  CHECK(amco_report.failed() == std::vector<std::string>{"DU4"});

  const auto aco_report =
      check_dynamic_aco(controls.da4_family, controls.da4_boxes, controls.da4_pairs);
  CHECK(aco_report.failed() == std::vector<std::string>{"DA4"});
}

TEST_CASE("flip family round-trips between its two states") {
  const FlipFamily flip(3);
  const NodeSet everyone = NodeSet::all(3);
  const StateVector x{0, 1, 0};
  const auto fx = flip.apply(0, everyone, x);
  CHECK(fx == StateVector{1, 0, 1});
  CHECK(flip.apply(0, everyone, fx) == x);
}

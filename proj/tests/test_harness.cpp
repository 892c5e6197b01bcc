#include <doctest.h>

#include <algorithm>

#include "dait/harness.hpp"
#include "static_oracles.hpp"

using namespace dait;

namespace {

HarnessConfig routing_harness(int trials, std::uint64_t seed) {
  const auto inst = oracles::line3_instance();
  HarnessConfig cfg;
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.schedule.n = 3;
  cfg.schedule.horizon = 120;
  cfg.schedule.activation_prob = 0.6;
  cfg.schedule.delay_max = 3;
  cfg.schedule.loss_prob = 0.2;
  cfg.schedule.dup_prob = 0.1;
  ChurnRandomization churn;
  churn.events_min = 2;
  churn.events_max = 4;
  for (const auto& ep : inst.epochs) churn.participant_pool.push_back(ep.participants);
  cfg.churn = churn;
  return cfg;
}

}  // namespace

TEST_CASE("routing trials converge on every qualifying epoch") {
  const auto [fam, dist] = build_min_routing(oracles::line3_instance());
  const auto result = converge_trial(fam, dist, routing_harness(60, 2024));
  CHECK(result.summary.trials == 60);
  CHECK(result.summary.qualifying_epochs > 0);
  CHECK(result.summary.converged_epochs == result.summary.qualifying_epochs);
  CHECK(result.summary.rate == doctest::Approx(1.0));
  CHECK(result.summary.witnesses.empty());

  // per-epoch records carry the counting data
  for (const auto& trial : result.trials)
    for (const auto& epoch : trial.epochs) {
      CHECK(epoch.kstar >= 1);
      if (epoch.qualifying) {
        CHECK(epoch.pseudocycle_count >= epoch.kstar);
        CHECK(epoch.converged);
        CHECK(epoch.convergence_tick >= epoch.start);
      }
    }
}

TEST_CASE("convergence rate is insensitive to loss and duplication") {
  const auto [fam, dist] = build_min_routing(oracles::line3_instance());
  auto lossless = routing_harness(25, 7);
  lossless.schedule.loss_prob = 0.0;
  lossless.schedule.dup_prob = 0.0;
  auto lossy = routing_harness(25, 7);
  lossy.schedule.loss_prob = 0.35;
  lossy.schedule.dup_prob = 0.3;
  CHECK(converge_trial(fam, dist, lossless).summary.rate == doctest::Approx(1.0));
  CHECK(converge_trial(fam, dist, lossy).summary.rate == doctest::Approx(1.0));
}

TEST_CASE("the harness refuses families without fixed points unless exploratory") {
  const FlipFamily flip(2);
  HarnessConfig cfg;
  cfg.trials = 3;
  cfg.seed = 5;
  cfg.schedule.n = 2;
  cfg.schedule.horizon = 12;
  cfg.schedule.activation_prob = 1.0;
  cfg.initial_state = StateVector{0, 1};
  CHECK_THROWS_AS(converge_trial(flip, DiscreteDistance{}, cfg), NoFixedPoint);

  cfg.exploratory = true;
  cfg.exploratory_kstar = 1;
  const auto result = converge_trial(flip, DiscreteDistance{}, cfg);
  CHECK(result.summary.qualifying_epochs > 0);
  CHECK(result.summary.converged_epochs < result.summary.qualifying_epochs);
  CHECK(result.summary.rate < 1.0);
  CHECK(!result.summary.witnesses.empty());
}

TEST_CASE("epochs without enough pseudocycles are reported non-qualifying") {
  const auto [fam, dist] = build_min_routing(oracles::line3_instance());
  HarnessConfig cfg;
  cfg.trials = 2;
  cfg.seed = 9;
  cfg.schedule.n = 3;
  cfg.schedule.horizon = 6;
  cfg.schedule.activation_prob = 0.0;  // nobody ever activates
  const auto result = converge_trial(fam, dist, cfg);
  CHECK(result.summary.qualifying_epochs == 0);
  CHECK(result.summary.rate == doctest::Approx(1.0));  // vacuously
  for (const auto& trial : result.trials)
    for (const auto& epoch : trial.epochs) {
      CHECK(!epoch.qualifying);
      CHECK(epoch.pseudocycle_count == 0);
    }
}

TEST_CASE("strict pair lists are enforced") {
  const auto [fam, dist] = build_min_routing(oracles::line3_instance());
  auto cfg = routing_harness(4, 31);
  cfg.precomputed_pairs = {{0, NodeSet::all(3)}};  // churn will visit others
  CHECK_THROWS_AS(converge_trial(fam, dist, cfg), PreconditionUnmet);
}

TEST_CASE("single-epoch harness runs agree with a static-model reimplementation") {
  const auto [fam, dist] = build_min_routing(oracles::line3_instance());
  HarnessConfig cfg;
  cfg.trials = 20;
  cfg.seed = 77;
  cfg.schedule.n = 3;
  cfg.schedule.horizon = 50;
  cfg.schedule.activation_prob = 0.5;
  cfg.schedule.delay_max = 3;
  cfg.schedule.loss_prob = 0.25;
  cfg.schedule.dup_prob = 0.1;
  cfg.initial_state = fam.bottom();

  const auto result = converge_trial(fam, dist, cfg, ExpiryScope::Horizon);
  const auto fp = find_fixed_point(fam, 0, NodeSet::all(3));
  const int kstar = amco_to_aco(fam, dist, 0, NodeSet::all(3)).kstar(0, NodeSet::all(3));

  for (const auto& trial : result.trials) {
    // regenerate the same schedule and replay it through the static oracle
    ScheduleConfig sched_cfg = cfg.schedule;
    sched_cfg.seed = trial.schedule_seed;
    const auto s = generate_schedule(sched_cfg);
    const auto st = oracles::strip_dynamic(s);
    const int static_count = oracles::static_count_pseudocycles(st, 0, s.horizon);

    REQUIRE(trial.epochs.size() == 1);
    CHECK(trial.epochs[0].pseudocycle_count == static_count);
    CHECK(trial.epochs[0].qualifying == (static_count >= kstar));
    if (trial.epochs[0].qualifying) {
      oracles::StaticDelta oracle(fam, st, fam.bottom());
      for (NodeId i = 0; i < 3; ++i)
        CHECK(oracle.value(s.horizon, i) == fp.state[static_cast<std::size_t>(i)]);
    }
  }
}

TEST_CASE("exhaustive oracle check passes for min-consensus and flip") {
  const MinConsensusFamily consensus = build_min_consensus(2, 5);
  auto result = exhaustive_oracle_check(consensus, {5, 3}, /*horizon_max=*/4);
  CHECK(result.pass);
  CHECK(result.horizon_covered == 3);  // horizon 4 does not fit the default budget
  CHECK(result.schedules_checked > 800'000);

  const FlipFamily flip(2);
  result = exhaustive_oracle_check(flip, {0, 1}, 3);
  CHECK(result.pass);
  CHECK(result.horizon_covered == 3);
}

TEST_CASE("horizon 1 is trivial for the oracle check") {
  const MinConsensusFamily consensus = build_min_consensus(2, 3);
  const auto result = exhaustive_oracle_check(consensus, {1, 2}, 1);
  CHECK(result.pass);
  CHECK(result.schedules_checked == 16);  // 4 activations x 1 beta x 4 epoch options
}

TEST_CASE("a case-order mutant is caught with a witness") {
  const MinConsensusFamily consensus = build_min_consensus(2, 5);
  // evaluator that checks activation before participation: a node that left
  // but still activates keeps computing instead of adopting bottom
  auto swapped = [](const MinConsensusFamily& fam, const DynamicSchedule& s,
                    const StateVector& x) {
    Trace tr;
    tr.n = s.n;
    tr.horizon = s.horizon;
    tr.schedule = s;
    tr.initial = x;
    tr.values.resize(static_cast<std::size_t>((s.horizon + 1) * s.n));
    tr.cases.resize(tr.values.size());
    for (Time t = 0; t <= s.horizon; ++t)
      for (NodeId i = 0; i < s.n; ++i) {
        const auto cell = static_cast<std::size_t>(t * s.n + i);
        if (t == 0) {
          tr.values[cell] = x[static_cast<std::size_t>(i)];
          tr.cases[cell] = StepCase::FreshJoin;
        } else if (s.alpha[static_cast<std::size_t>(t)].contains(i)) {
          StateVector view(static_cast<std::size_t>(s.n));
          for (NodeId j = 0; j < s.n; ++j)
            view[static_cast<std::size_t>(j)] = tr.at(s.beta(t, i, j), j);
          tr.values[cell] = fam.apply_component(s.epoch(t), s.rho(t), view, i);
          tr.cases[cell] = StepCase::Activated;
        } else if (!s.rho(t).contains(i)) {
          tr.values[cell] = fam.bottom()[static_cast<std::size_t>(i)];
          tr.cases[cell] = StepCase::NonParticipant;
        } else if (!s.rho(t - 1).contains(i)) {
          tr.values[cell] = x[static_cast<std::size_t>(i)];
          tr.cases[cell] = StepCase::FreshJoin;
        } else {
          tr.values[cell] = tr.at(t - 1, i);
          tr.cases[cell] = StepCase::Inactive;
        }
      }
    return tr;
  };
  const auto result = exhaustive_oracle_check(consensus, {5, 3}, 2, 1'000'000, false, swapped);
  CHECK(!result.pass);
  REQUIRE(result.first_mismatch.has_value());
  const auto& mm = *result.first_mismatch;
  CHECK(mm.engine_value != mm.oracle_value);
  CHECK(naive_delta(consensus, mm.schedule, StateVector{5, 3}, mm.t, mm.i) == mm.oracle_value);
}

TEST_CASE("strict mode raises BudgetExceeded instead of stopping early") {
  const MinConsensusFamily consensus = build_min_consensus(2, 5);
  CHECK_THROWS_AS(exhaustive_oracle_check(consensus, {5, 3}, 4, 1'000'000, /*strict=*/true),
                  BudgetExceeded);
  CHECK_THROWS_AS(exhaustive_oracle_check(consensus, {5, 3}, 7), std::invalid_argument);
}

TEST_CASE("stale message demo exhibits what the static model cannot express") {
  const auto report = stale_message_demo();

  CHECK(report.consumed_from_nonparticipant);
  CHECK(report.consumer == 0);
  CHECK(report.stale_sender == 1);
  CHECK(report.consume_time == 4);
  CHECK(report.stale_value == 1);
  CHECK(report.trace.case_at(report.consume_time, report.consumer) == StepCase::Activated);
  CHECK(!report.trace.schedule.rho(report.consume_time).contains(report.stale_sender));

  // the stale value steered the result: node 0 dropped to 1 although every
  // participant held 3
  CHECK(report.trace.at(4, 0) == 1);

  CHECK(report.wf_false);
  CHECK(report.wf_false_time == 3);
  CHECK(report.wf_restored);
  CHECK(report.wf_restored_time == 4);

  // in the single-epoch control the same message is an ordinary delivery
  CHECK(!report.control_consumed);
  CHECK(report.control_trace.at(4, 0) == 1);
}

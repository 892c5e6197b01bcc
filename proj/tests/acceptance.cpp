// Acceptance suite: desk-scale checks of the library's end-to-end claims.
// Each criterion prints one PASS/FAIL line; the binary exits nonzero if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "dait/dait.hpp"
#include "static_oracles.hpp"

using namespace dait;

namespace {

int g_failures = 0;
std::vector<std::string> g_notes;

void note(const std::string& s) { g_notes.push_back(s); }

void criterion(int id, const std::string& label, const std::function<bool()>& body) {
  g_notes.clear();
  bool ok = false;
  std::string error;
  const auto start = std::chrono::steady_clock::now();
  try {
    ok = body();
  } catch (const std::exception& e) {
    error = e.what();
  }
  const auto secs =
      std::chrono::duration_cast<std::chrono::duration<double>>(std::chrono::steady_clock::now() - start)
          .count();
  std::printf("[%s] criterion %d: %s (%.1fs)\n", ok ? "PASS" : "FAIL", id, label.c_str(), secs);
  for (const auto& n : g_notes) std::printf("        %s\n", n.c_str());
  if (!error.empty()) std::printf("        error: %s\n", error.c_str());
  if (!ok) ++g_failures;
  std::fflush(stdout);
}

bool expect(bool cond, const std::string& what) {
  if (!cond) note("failed: " + what);
  return cond;
}

// Routing family with one node pinned to a wrong constant (DA2 broken).
struct StuckNodeFamily {
  const MinRoutingFamily* base;
  NodeId stuck;
  Value value;

  int node_count() const { return base->node_count(); }
  const StateVector& bottom() const { return base->bottom(); }
  const std::vector<std::vector<Value>>& domains() const { return base->domains(); }
  Value apply_component(EpochId e, const NodeSet& p, const StateVector& x, NodeId i) const {
    if (i == stuck && p.contains(i)) return value;
    return base->apply_component(e, p, x, i);
  }
  StateVector apply(EpochId e, const NodeSet& p, const StateVector& x) const {
    StateVector out(x.size());
    for (NodeId i = 0; i < node_count(); ++i)
      out[static_cast<std::size_t>(i)] = apply_component(e, p, x, i);
    return out;
  }
};

RoutingInstance diamond4_instance() {
  RoutingInstance inst;
  inst.destination = 0;
  inst.cap = 5;
  RoutingEpoch e0;
  e0.weights = {
      {kNoEdge, kNoEdge, kNoEdge, kNoEdge},
      {1, kNoEdge, 1, kNoEdge},
      {4, 1, kNoEdge, kNoEdge},
      {kNoEdge, 2, 1, kNoEdge},
  };
  e0.participants = NodeSet::all(4);
  inst.epochs.push_back(e0);
  RoutingEpoch e1 = e0;
  e1.participants = NodeSet::of({0, 2, 3});  // node 1 leaves
  inst.epochs.push_back(e1);
  return inst;
}

// --------------------------------------------------------------------------

bool criterion1_oracle_equivalence() {
  const auto started = std::chrono::steady_clock::now();

  const MinConsensusFamily consensus = build_min_consensus(2, 5);
  const auto consensus_result =
      exhaustive_oracle_check(consensus, {5, 3}, /*horizon_max=*/5, /*budget=*/1'000'000);
  note("min-consensus: " + std::to_string(consensus_result.schedules_checked) +
       " schedules, horizons fully covered up to " +
       std::to_string(consensus_result.horizon_covered));

  const FlipFamily flip(2);
  const auto flip_result = exhaustive_oracle_check(flip, {0, 1}, 5, 1'000'000);
  note("flip: " + std::to_string(flip_result.schedules_checked) + " schedules");

  const double secs = std::chrono::duration_cast<std::chrono::duration<double>>(
                          std::chrono::steady_clock::now() - started)
                          .count();
  bool ok = expect(consensus_result.pass, "min-consensus mismatch found");
  ok &= expect(flip_result.pass, "flip mismatch found");
  ok &= expect(consensus_result.schedules_checked <= 1'000'000, "budget exceeded");
  ok &= expect(consensus_result.schedules_checked > 800'000, "enumeration unexpectedly small");
  ok &= expect(consensus_result.horizon_covered >= 3, "horizon coverage too small");
  ok &= expect(secs < 120.0, "runtime over 2 minutes");
  return ok;
}

bool criterion2_theorem3_desk_scale() {
  const auto started = std::chrono::steady_clock::now();
  const auto inst = oracles::line3_instance();
  const auto [fam, dist] = build_min_routing(inst);
  const auto pairs = fam.declared_pairs();

  const auto amco = check_dynamic_amco(fam, dist, pairs);
  bool ok = expect(amco.pass, "check_dynamic_amco failed");

  const auto boxes = build_metric_boxes(fam, dist, pairs);
  const auto aco = check_dynamic_aco(fam, boxes, pairs);
  ok &= expect(aco.pass, "constructed boxes fail check_dynamic_aco");

  HarnessConfig cfg;
  cfg.trials = 500;
  cfg.seed = 20240613;
  cfg.schedule.n = 3;
  cfg.schedule.horizon = 140;
  cfg.schedule.activation_prob = 0.6;
  cfg.schedule.delay_max = 3;
  cfg.schedule.loss_prob = 0.2;
  cfg.schedule.dup_prob = 0.1;
  ChurnRandomization churn;
  churn.events_min = 2;
  churn.events_max = 4;
  for (const auto& ep : inst.epochs) churn.participant_pool.push_back(ep.participants);
  cfg.churn = churn;

  const auto result = converge_trial(fam, dist, cfg);
  note("qualifying epochs: " + std::to_string(result.summary.qualifying_epochs) + " of " +
       std::to_string(result.summary.trials) + " trials, rate " +
       std::to_string(result.summary.rate));
  ok &= expect(result.summary.trials == 500, "trial count");
  ok &= expect(result.summary.qualifying_epochs > 100, "too few qualifying epochs to claim anything");
  ok &= expect(result.summary.converged_epochs == result.summary.qualifying_epochs,
               "a qualifying epoch failed to converge");
  if (!result.summary.witnesses.empty()) note("witness: " + result.summary.witnesses.front());

  const double secs = std::chrono::duration_cast<std::chrono::duration<double>>(
                          std::chrono::steady_clock::now() - started)
                          .count();
  ok &= expect(secs < 300.0, "runtime over 5 minutes");
  return ok;
}

bool criterion3_lemma_suite() {
  const auto inst = oracles::line3_instance();
  const auto [fam, dist] = build_min_routing(inst);
  const auto pairs = fam.declared_pairs();
  const auto boxes = build_metric_boxes(fam, dist, pairs);
  bool ok = expect(check_dynamic_aco(fam, boxes, pairs).pass, "boxes not certified");

  int traces = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    ScheduleConfig cfg;
    cfg.n = 3;
    cfg.horizon = 60;
    cfg.activation_prob = 0.6;
    cfg.delay_max = 2;
    cfg.loss_prob = 0.15;
    cfg.dup_prob = 0.1;
    cfg.seed = seed;
    cfg.epoch_events = {{18, inst.epochs[1].participants},
                        {32, inst.epochs[2].participants},
                        {44, inst.epochs[3].participants}};
    const auto s = generate_schedule(cfg);
    const Trace tr = run_delta(fam, s, fam.bottom());
    const auto report = verify_lemmas(tr, boxes, epoch_pseudocycles(s), pairs);
    ++traces;
    if (!report.pass) {
      for (const auto& l : report.lemmas)
        if (!l.pass) note("seed " + std::to_string(seed) + ": " + l.id + " failed");
      return false;
    }
  }
  note("lemmas L1-L7 pass on " + std::to_string(traces) + " instrumented traces");

  // negative control: DA2 deliberately broken must surface as an L6 failure
  const NodeSet everyone = NodeSet::all(3);
  const std::vector<EpochPair> one_pair{{0, everyone}};
  const auto one_boxes = build_metric_boxes(fam, dist, one_pair);
  const StuckNodeFamily mutant{&fam, 1, 4};
  ok &= expect(!check_dynamic_aco(mutant, one_boxes, one_pair).find("DA2")->pass,
               "mutant unexpectedly satisfies DA2");
  const DynamicSchedule sync = DynamicSchedule::synchronous(3, 12);
  const Trace tr = run_delta(mutant, sync, StateVector{4, 4, 4});
  const auto report = verify_lemmas(tr, one_boxes, epoch_pseudocycles(sync), one_pair);
  const auto* l6 = report.find("L6");
  ok &= expect(l6 != nullptr && !l6->pass, "L6 did not fail for the DA2-broken mutant");
  ok &= expect(l6 != nullptr && l6->witness.has_value(), "L6 failure carries no witness");
  if (l6 != nullptr && l6->witness)
    note("L6 witness: pseudocycle [" + std::to_string(l6->witness->t) + "," +
         std::to_string(l6->witness->t2) + "] expected box " +
         std::to_string(l6->witness->expected) + ", got " + std::to_string(l6->witness->got));
  return ok;
}

bool criterion4_reduction_soundness() {
  bool ok = true;

  // every bundled AMCO-passing family: two routing instances and the
  // constant family under the discrete metric
  {
    const auto [fam, dist] = build_min_routing(oracles::line3_instance());
    const auto pairs = fam.declared_pairs();
    ok &= expect(check_dynamic_amco(fam, dist, pairs).pass, "line3 is not an AMCO");
    const auto report = check_dynamic_aco(fam, build_metric_boxes(fam, dist, pairs), pairs);
    for (const auto& c : report.conditions)
      ok &= expect(c.pass, "line3 boxes fail " + c.condition);
  }
  {
    const auto [fam, dist] = build_min_routing(diamond4_instance());
    const auto pairs = fam.declared_pairs();
    ok &= expect(check_dynamic_amco(fam, dist, pairs).pass, "diamond4 is not an AMCO");
    const auto report = check_dynamic_aco(fam, build_metric_boxes(fam, dist, pairs), pairs);
    for (const auto& c : report.conditions)
      ok &= expect(c.pass, "diamond4 boxes fail " + c.condition);
  }
  {
    const ConstantFamily constant({{0, 1}, {0, 1}}, {1, 1}, {0, 0});
    const std::vector<EpochPair> pairs{{0, NodeSet::all(2)}, {1, NodeSet::of({0})}};
    ok &= expect(check_dynamic_amco(constant, DiscreteDistance{}, pairs).pass,
                 "constant family is not an AMCO");
    const auto boxes = build_metric_boxes(constant, DiscreteDistance{}, pairs);
    const auto report = check_dynamic_aco(constant, boxes, pairs);
    for (const auto& c : report.conditions)
      ok &= expect(c.pass, "constant boxes fail " + c.condition);
  }
  note("DA1-DA5 hold exactly for every bundled AMCO-passing family");
  return ok;
}

bool criterion5_static_recovery() {
  bool ok = true;
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const int n = 2 + static_cast<int>(seed % 3);
    ScheduleConfig cfg;
    cfg.n = n;
    cfg.horizon = 20 + static_cast<Time>((seed * 7) % 31);  // up to 50
    cfg.activation_prob = 0.3 + 0.1 * static_cast<double>(seed % 6);
    cfg.delay_max = 1 + static_cast<Time>(seed % 4);
    cfg.loss_prob = 0.05 * static_cast<double>(seed % 7);
    cfg.dup_prob = 0.05 * static_cast<double>(seed % 5);
    cfg.seed = seed;
    const auto st = oracles::strip_dynamic(generate_schedule(cfg));
    const DynamicSchedule s = embed_static(st);

    const MinConsensusFamily fam = build_min_consensus(n, 9);
    StateVector x(static_cast<std::size_t>(n));
    Rng rng(seed ^ 0xabcdef);
    for (auto& v : x) v = rng.next_in(0, 9);

    const Trace tr = run_delta(fam, s, x);
    oracles::StaticDelta oracle(fam, st, x);
    for (Time t = 0; t <= s.horizon && ok; ++t)
      for (NodeId i = 0; i < n; ++i)
        if (tr.at(t, i) != oracle.value(t, i)) {
          note("mismatch at seed " + std::to_string(seed) + " t=" + std::to_string(t) +
               " i=" + std::to_string(i));
          ok = false;
        }
    ++checked;
  }
  note(std::to_string(checked) + " static schedules replayed tick-for-tick");
  return ok && expect(checked == 100, "wrong schedule count");
}

bool criterion6_figure1_fidelity() {
  const DynamicSchedule s = oracles::figure1_schedule();
  bool ok = expect(validate_schedule(s).empty(), "figure 1 table fails DS1");

  // definition-check oracle: literal quantifier sweep
  auto oracle = [&](NodeId i, Time t1, Time t2) {
    for (Time t = std::max<Time>(t2, 1); t <= s.horizon; ++t)
      for (NodeId j = 0; j < s.n; ++j)
        if (s.beta(t, i, j) < t1) return false;
    return true;
  };
  ok &= expect(oracle(0, 1, 3) == true, "oracle disagrees on [1,3]");
  ok &= expect(oracle(0, 2, 3) == false, "oracle disagrees on [2,3]");
  ok &= expect(is_expiry_period(s, 0, {1, 3}, ExpiryScope::Horizon), "[1,3] must be an expiry period");
  ok &= expect(!is_expiry_period(s, 0, {2, 3}, ExpiryScope::Horizon), "[2,3] must not be one");
  for (Time t1 = 0; t1 <= 10 && ok; ++t1)
    for (Time t2 = t1; t2 <= 10; ++t2)
      ok &= expect(is_expiry_period(s, 0, {t1, t2}, ExpiryScope::Horizon) == oracle(0, t1, t2),
                   "classification diverges from the oracle at [" + std::to_string(t1) + "," +
                       std::to_string(t2) + "]");
  return ok;
}

bool criterion7_negative_controls() {
  const auto controls = build_negative_controls();
  bool ok = true;

  bool threw = false;
  try {
    find_fixed_point(controls.flip, 0, NodeSet::all(2));
  } catch (const NoFixedPoint&) {
    threw = true;
  }
  ok &= expect(threw, "flip family must raise NoFixedPoint");

  const auto amco =
      check_dynamic_amco(controls.identity, DiscreteDistance{}, {{0, NodeSet::all(2)}});
  ok &= expect(amco.failed() == std::vector<std::string>{"DU4"},
               "identity must fail DU4 and nothing else");
  const auto* du4 = amco.find("DU4");
  ok &= expect(du4 != nullptr && du4->witness.has_value() && du4->witness->states.size() == 2,
               "DU4 witness must carry two states");
  if (du4 != nullptr && du4->witness) {
    for (const auto& st : du4->witness->states)
      ok &= expect(controls.identity.apply(0, NodeSet::all(2), st) == st,
                   "DU4 witness states must be fixed points");
  }

  const auto aco = check_dynamic_aco(controls.da4_family, controls.da4_boxes, controls.da4_pairs);
  ok &= expect(aco.failed() == std::vector<std::string>{"DA4"},
               "DA4 control must fail DA4 and nothing else");
  note("flip -> NoFixedPoint, identity -> DU4 only, narrowed boxes -> DA4 only");
  return ok;
}

bool criterion8_expressiveness_demo() {
  const auto report = stale_message_demo();
  bool ok = expect(report.consumed_from_nonparticipant,
                   "no Activated step consumed a non-participant component");
  ok &= expect(report.trace.case_at(report.consume_time, report.consumer) == StepCase::Activated,
               "consumption witness is not an Activated step");
  ok &= expect(!report.trace.schedule.rho(report.consume_time).contains(report.stale_sender),
               "stale sender unexpectedly participates");
  ok &= expect(report.wf_false, "messages_well_formed never failed");
  ok &= expect(!messages_well_formed(report.trace, report.consumer, report.wf_false_time),
               "well-formedness oracle disagrees");
  ok &= expect(!report.control_consumed, "single-epoch control shows stale consumption");
  note("stale value " + std::to_string(report.stale_value) + " from node " +
       std::to_string(report.stale_sender) + " consumed by node " +
       std::to_string(report.consumer) + " at t=" + std::to_string(report.consume_time));
  return ok;
}

}  // namespace

int main() {
  criterion(1, "oracle equivalence within the schedule budget", criterion1_oracle_equivalence);
  criterion(2, "Theorem-3 behaviour on 500 churny routing trials", criterion2_theorem3_desk_scale);
  criterion(3, "lemma suite on 200 instrumented traces plus L6 control", criterion3_lemma_suite);
  criterion(4, "AMCO-to-ACO reduction soundness, exact", criterion4_reduction_soundness);
  criterion(5, "static recovery on 100 embedded schedules", criterion5_static_recovery);
  criterion(6, "figure-1 data-flow table fidelity", criterion6_figure1_fidelity);
  criterion(7, "negative controls name exactly their condition", criterion7_negative_controls);
  criterion(8, "cross-epoch stale message expressiveness demo", criterion8_expressiveness_demo);

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}

#include <doctest.h>

#include <sstream>

#include "dait/json_io.hpp"
#include "static_oracles.hpp"

using namespace dait;

TEST_CASE("schedule JSON uses the documented shape") {
  const DynamicSchedule s = oracles::figure1_schedule();
  const Json j = to_json(s);
  CHECK(j.at("n") == 2);
  CHECK(j.at("horizon") == 10);
  CHECK(j.at("alpha").size() == 10);   // indexed from t=1
  CHECK(j.at("beta").size() == 10);
  CHECK(j.at("eta").size() == 11);     // indexed from t=0
  CHECK(j.at("pi").contains("0"));
  CHECK(j.at("beta")[2][0][1] == 2);   // beta(3, 0, 1)
  CHECK(schedule_from_json(j) == s);
}

TEST_CASE("random schedules round-trip (fuzz)") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    ScheduleConfig cfg;
    cfg.n = 4;
    cfg.horizon = 18;
    cfg.activation_prob = 0.5;
    cfg.delay_max = 3;
    cfg.loss_prob = 0.2;
    cfg.dup_prob = 0.2;
    cfg.seed = seed;
    cfg.epoch_events = {{6, NodeSet::of({0, 1, 2})}, {13, NodeSet::of({0, 3})}};
    const auto s = generate_schedule(cfg);
    CHECK(schedule_from_json(to_json(s)) == s);
    const auto cfg2 = schedule_config_from_json(to_json(cfg));
    CHECK(generate_schedule(cfg2) == s);
  }
}

TEST_CASE("malformed schedules are rejected with the offending key") {
  Json j = to_json(oracles::figure1_schedule());
  j["eta"] = Json::array({0, 0});
  CHECK_THROWS_AS(schedule_from_json(j), std::invalid_argument);
  j = to_json(oracles::figure1_schedule());
  j["pi"] = Json{{"7", Json::array()}};
  CHECK_THROWS_AS(schedule_from_json(j), std::invalid_argument);
}

TEST_CASE("routing instances round-trip") {
  const RoutingInstance inst = oracles::line3_instance();
  const auto back = routing_instance_from_json(to_json(inst));
  CHECK(back.destination == inst.destination);
  CHECK(back.cap == inst.cap);
  REQUIRE(back.epochs.size() == inst.epochs.size());
  for (std::size_t e = 0; e < inst.epochs.size(); ++e) {
    CHECK(back.epochs[e].weights == inst.epochs[e].weights);
    CHECK(back.epochs[e].participants == inst.epochs[e].participants);
  }
}

TEST_CASE("trace JSONL carries one record per cell with the documented keys") {
  const MinConsensusFamily fam = build_min_consensus(2, 5);
  const DynamicSchedule s = DynamicSchedule::synchronous(2, 3);
  const Trace tr = run_delta(fam, s, {5, 3});

  std::ostringstream os;
  write_trace_jsonl(os, tr);
  std::istringstream is(os.str());
  std::string line;
  int records = 0;
  while (std::getline(is, line)) {
    const Json j = Json::parse(line);
    for (const char* key : {"t", "i", "value", "case", "epoch"}) CHECK(j.contains(key));
    ++records;
  }
  CHECK(records == 8);  // (horizon+1) * n
}

TEST_CASE("check reports expose per-condition booleans and the first witness") {
  const IdentityFamily fam(2, {0, 1});
  const auto report = check_dynamic_amco(fam, DiscreteDistance{}, {{0, NodeSet::all(2)}});
  const Json j = to_json(report);
  CHECK(j.at("pass") == false);
  CHECK(j.at("conditions").at("DU1") == true);
  CHECK(j.at("conditions").at("DU4") == false);
  CHECK(j.at("witness").at("condition") == "DU4");
  CHECK(j.at("witness").at("states").size() == 2);
}

TEST_CASE("summary and lemma reports serialize with their documented keys") {
  ConvergenceSummary summary;
  summary.trials = 3;
  summary.qualifying_epochs = 5;
  summary.converged_epochs = 5;
  summary.rate = 1.0;
  const Json js = to_json(summary);
  for (const char* key : {"trials", "qualifying_epochs", "converged", "rate", "witnesses"})
    CHECK(js.contains(key));

  const auto [fam, dist] = build_min_routing(oracles::line3_instance());
  const std::vector<EpochPair> pairs{{0, NodeSet::all(3)}};
  const auto boxes = build_metric_boxes(fam, dist, pairs);
  const DynamicSchedule s = DynamicSchedule::synchronous(3, 10);
  const Trace tr = run_delta(fam, s, fam.bottom());
  const auto lemmas = verify_lemmas(tr, boxes, epoch_pseudocycles(s), pairs);
  const Json jl = to_json(lemmas);
  CHECK(jl.at("pass") == true);
  for (int l = 1; l <= 7; ++l) CHECK(jl.at("lemmas").contains("L" + std::to_string(l)));

  std::ostringstream os;
  write_annotations_jsonl(os, tr, boxes);
  std::istringstream is(os.str());
  std::string line;
  int records = 0;
  while (std::getline(is, line)) {
    const Json j = Json::parse(line);
    for (const char* key : {"t", "i", "state_box", "msgs_box", "well_formed", "computation_box"})
      CHECK(j.contains(key));
    ++records;
  }
  CHECK(records == 33);
}

TEST_CASE("period lists emit t1/t2 records") {
  std::ostringstream os;
  write_periods_jsonl(os, {{0, 3}, {3, 5}});
  CHECK(os.str() == "{\"t1\":0,\"t2\":3}\n{\"t1\":3,\"t2\":5}\n");
}

// dait: schedules, pseudocycles, convergence checkers and the simulation
// harness behind one file-driven command line.
//
// Exit codes: 0 success / all checks pass, 1 checker failure or
// non-convergence (witness emitted), 2 usage or configuration error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <variant>

#include "dait/dait.hpp"

namespace {

using namespace dait;

struct CliOptions {
  std::string config_path;
  std::string out_path;
  std::string dump_schedule_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string scope = "epoch";
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Json load_config(const std::string& path) {
  if (path.empty()) throw ConfigError("missing --config");
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
}

ExpiryScope parse_scope(const std::string& s) {
  if (s == "epoch") return ExpiryScope::Epoch;
  if (s == "horizon") return ExpiryScope::Horizon;
  throw ConfigError("scope must be 'epoch' or 'horizon'");
}

using AnyFamily = std::variant<MinRoutingFamily, MinConsensusFamily, FlipFamily, IdentityFamily>;

AnyFamily family_from_config(const Json& config) {
  if (!config.contains("family")) throw ConfigError("config key 'family' is required");
  const Json& fam = config.at("family");
  const std::string type = fam.value("type", "");
  try {
    if (type == "min_routing")
      return MinRoutingFamily(routing_instance_from_json(fam.at("instance")));
    if (type == "min_consensus")
      return MinConsensusFamily(fam.at("n").get<int>(), fam.at("max_value").get<Value>());
    if (type == "flip") return FlipFamily(fam.at("n").get<int>());
    if (type == "identity")
      return IdentityFamily(fam.at("n").get<int>(),
                            fam.value("values", std::vector<Value>{0, 1}));
  } catch (const Json::exception& e) {
    throw ConfigError("bad 'family' section: " + std::string(e.what()));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("bad 'family' section: " + std::string(e.what()));
  }
  throw ConfigError("family.type must be one of min_routing|min_consensus|flip|identity");
}

template <FunctionFamily F>
std::vector<EpochPair> pairs_for(const F& fam, const Json& config) {
  if (config.contains("family") && config.at("family").contains("pairs")) {
    std::vector<EpochPair> pairs;
    for (const auto& p : config.at("family").at("pairs")) pairs.push_back(epoch_pair_from_json(p));
    return pairs;
  }
  if constexpr (std::is_same_v<F, MinRoutingFamily>) {
    return fam.declared_pairs();
  } else {
    return {{0, NodeSet::all(fam.node_count())}};
  }
}

ScheduleConfig schedule_config(const Json& config, const CliOptions& opt) {
  if (!config.contains("schedule")) throw ConfigError("config key 'schedule' is required");
  try {
    ScheduleConfig cfg = schedule_config_from_json(config.at("schedule"));
    if (opt.seed) cfg.seed = *opt.seed;
    return cfg;
  } catch (const Json::exception& e) {
    throw ConfigError("bad 'schedule' section: " + std::string(e.what()));
  }
}

DynamicSchedule schedule_from_config(const Json& config, const CliOptions& opt) {
  if (config.contains("schedule") && config.at("schedule").contains("table")) {
    try {
      return schedule_from_json(config.at("schedule").at("table"));
    } catch (const Json::exception& e) {
      throw ConfigError("bad 'schedule.table' section: " + std::string(e.what()));
    }
  }
  return generate_schedule(schedule_config(config, opt));
}

void emit(const Json& payload, const CliOptions& opt) {
  std::cout << payload.dump() << "\n";
  if (!opt.out_path.empty()) {
    std::ofstream out(opt.out_path);
    if (!out) throw ConfigError("cannot open output file: " + opt.out_path);
    out << payload.dump(2) << "\n";
  }
}

StateVector initial_state(const Json& config, const StateVector& fallback) {
  if (config.contains("harness") && config.at("harness").contains("initial_state"))
    return config.at("harness").at("initial_state").get<StateVector>();
  return fallback;
}

int run_simulate(const Json& config, const CliOptions& opt) {
  const AnyFamily fam = family_from_config(config);
  const DynamicSchedule s = schedule_from_config(config, opt);
  if (!opt.dump_schedule_path.empty()) {
    std::ofstream out(opt.dump_schedule_path);
    if (!out) throw ConfigError("cannot open schedule dump file: " + opt.dump_schedule_path);
    out << to_json(s).dump(2) << "\n";
  }
  return std::visit(
      [&](const auto& f) {
        const Trace tr = run_delta(f, s, initial_state(config, f.bottom()));
        if (opt.out_path.empty()) {
          write_trace_jsonl(std::cout, tr);
        } else {
          std::ofstream out(opt.out_path);
          if (!out) throw ConfigError("cannot open output file: " + opt.out_path);
          write_trace_jsonl(out, tr);
          std::cout << Json{{"cells", (tr.horizon + 1) * tr.n},
                            {"horizon", tr.horizon},
                            {"out", opt.out_path}}
                           .dump()
                    << "\n";
        }
        return 0;
      },
      fam);
}

int run_pseudocycles(const Json& config, const CliOptions& opt) {
  const DynamicSchedule s = schedule_from_config(config, opt);
  const auto periods = epoch_pseudocycles(s, parse_scope(opt.scope));
  if (opt.out_path.empty()) {
    write_periods_jsonl(std::cout, periods);
  } else {
    std::ofstream out(opt.out_path);
    if (!out) throw ConfigError("cannot open output file: " + opt.out_path);
    write_periods_jsonl(out, periods);
    std::cout << Json{{"pseudocycles", periods.size()}, {"out", opt.out_path}}.dump() << "\n";
  }
  return 0;
}

int run_check_amco(const Json& config, const CliOptions& opt) {
  const AnyFamily fam = family_from_config(config);
  return std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        const auto pairs = pairs_for(f, config);
        CheckReport report;
        if constexpr (std::is_same_v<F, MinRoutingFamily>) {
          report = check_dynamic_amco(f, RoutingDistance(f.instance().cap), pairs);
        } else {
          report = check_dynamic_amco(f, DiscreteDistance{}, pairs);
        }
        emit(to_json(report), opt);
        return report.pass ? 0 : 1;
      },
      fam);
}

template <FunctionFamily F, DistanceFamily D>
Json reduction_json(const F& fam, const D& dist, const std::vector<EpochPair>& pairs) {
  Json out = Json::array();
  for (const auto& pair : pairs) {
    const auto boxes = amco_to_aco(fam, dist, pair.epoch, pair.participants);
    const auto lists = materialize_boxes(fam, boxes, pair.epoch, pair.participants);
    Json boxes_json = Json::array();
    for (const auto& per_node : lists) boxes_json.push_back(per_node);
    out.push_back(Json{{"epoch", pair.epoch},
                       {"participants", to_json(pair.participants)},
                       {"kstar", boxes.kstar(pair.epoch, pair.participants)},
                       {"xstar", boxes.xstar(pair.epoch, pair.participants)},
                       {"boxes", std::move(boxes_json)}});
  }
  return Json{{"pairs", std::move(out)}};
}

int run_reduce(const Json& config, const CliOptions& opt) {
  const AnyFamily fam = family_from_config(config);
  return std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        const auto pairs = pairs_for(f, config);
        if constexpr (std::is_same_v<F, MinRoutingFamily>) {
          emit(reduction_json(f, RoutingDistance(f.instance().cap), pairs), opt);
        } else {
          emit(reduction_json(f, DiscreteDistance{}, pairs), opt);
        }
        return 0;
      },
      fam);
}

int run_check_aco(const Json& config, const CliOptions& opt) {
  if (config.contains("family") && config.at("family").value("type", "") == "da4_control") {
    const auto controls = build_negative_controls();
    const auto report =
        check_dynamic_aco(controls.da4_family, controls.da4_boxes, controls.da4_pairs);
    emit(to_json(report), opt);
    return report.pass ? 0 : 1;
  }
  const AnyFamily fam = family_from_config(config);
  return std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        const auto pairs = pairs_for(f, config);
        CheckReport report;
        if constexpr (std::is_same_v<F, MinRoutingFamily>) {
          const RoutingDistance dist(f.instance().cap);
          report = check_dynamic_aco(f, build_metric_boxes(f, dist, pairs), pairs);
        } else {
          report = check_dynamic_aco(f, build_metric_boxes(f, DiscreteDistance{}, pairs), pairs);
        }
        emit(to_json(report), opt);
        return report.pass ? 0 : 1;
      },
      fam);
}

HarnessConfig harness_config(const Json& config, const CliOptions& opt) {
  HarnessConfig cfg;
  cfg.schedule = schedule_config(config, opt);
  if (config.contains("harness")) {
    const Json& h = config.at("harness");
    try {
      cfg.trials = h.value("trials", 1);
      cfg.seed = h.value("seed", std::uint64_t{0});
      cfg.exploratory = h.value("exploratory", false);
      cfg.exploratory_kstar = h.value("exploratory_kstar", 1);
      cfg.sample_full_space = h.value("sample_full_space", false);
      if (h.contains("initial_state")) cfg.initial_state = h.at("initial_state").get<StateVector>();
      if (h.contains("pairs"))
        for (const auto& p : h.at("pairs")) cfg.precomputed_pairs.push_back(epoch_pair_from_json(p));
      if (h.contains("churn")) {
        ChurnRandomization churn;
        churn.events_min = h.at("churn").value("events_min", 0);
        churn.events_max = h.at("churn").value("events_max", 0);
        for (const auto& p : h.at("churn").at("participant_pool"))
          churn.participant_pool.push_back(node_set_from_json(p));
        cfg.churn = churn;
      }
    } catch (const Json::exception& e) {
      throw ConfigError("bad 'harness' section: " + std::string(e.what()));
    }
  }
  if (opt.trials) cfg.trials = *opt.trials;
  if (opt.seed) cfg.seed = *opt.seed;
  return cfg;
}

int run_converge(const Json& config, const CliOptions& opt) {
  const AnyFamily fam = family_from_config(config);
  const HarnessConfig cfg = harness_config(config, opt);
  return std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        ConvergeResult result;
        if constexpr (std::is_same_v<F, MinRoutingFamily>) {
          result = converge_trial(f, RoutingDistance(f.instance().cap), cfg, parse_scope(opt.scope));
        } else {
          result = converge_trial(f, DiscreteDistance{}, cfg, parse_scope(opt.scope));
        }
        Json payload = to_json(result.summary);
        payload["seed"] = cfg.seed;
        emit(payload, opt);
        return result.summary.converged_epochs == result.summary.qualifying_epochs ? 0 : 1;
      },
      fam);
}

int run_oracle_check(const Json& config, const CliOptions& opt) {
  const AnyFamily fam = family_from_config(config);
  Time horizon_max = 3;
  std::uint64_t budget = 1'000'000;
  std::optional<StateVector> start;
  if (config.contains("harness") && config.at("harness").contains("oracle")) {
    const Json& o = config.at("harness").at("oracle");
    horizon_max = o.value("horizon_max", Time{3});
    budget = o.value("budget", std::uint64_t{1'000'000});
    if (o.contains("initial_state")) start = o.at("initial_state").get<StateVector>();
  }
  return std::visit(
      [&](const auto& f) {
        const StateVector x = start.value_or(f.bottom());
        const auto result = exhaustive_oracle_check(f, x, horizon_max, budget);
        Json payload{{"pass", result.pass},
                     {"schedules_checked", result.schedules_checked},
                     {"horizon_covered", result.horizon_covered}};
        if (result.first_mismatch) {
          payload["mismatch"] = Json{{"t", result.first_mismatch->t},
                                     {"i", result.first_mismatch->i},
                                     {"engine", result.first_mismatch->engine_value},
                                     {"oracle", result.first_mismatch->oracle_value},
                                     {"schedule", to_json(result.first_mismatch->schedule)}};
        }
        emit(payload, opt);
        return result.pass ? 0 : 1;
      },
      fam);
}

int run_demo_stale(const CliOptions& opt) {
  const auto report = stale_message_demo();
  emit(to_json(report), opt);
  return report.consumed_from_nonparticipant && report.wf_false ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic asynchronous iteration toolkit"};
  app.require_subcommand(1);

  CliOptions opt;
  app.add_option("--config", opt.config_path, "JSON config file");
  app.add_option("--out", opt.out_path, "output file (summaries also print to stdout)");
  app.add_option("--seed", opt.seed, "override the configured seed");
  app.add_option("--trials", opt.trials, "override the configured trial count");
  app.add_option("--scope", opt.scope, "expiry quantification: epoch|horizon")
      ->check(CLI::IsMember({"epoch", "horizon"}));
  app.add_option("--dump-schedule", opt.dump_schedule_path,
                 "also write the generated schedule JSON here (simulate)");

  auto* simulate = app.add_subcommand("simulate", "run delta over a schedule, emit the trace");
  auto* pseudocycles = app.add_subcommand("pseudocycles", "list disjoint pseudocycles per epoch");
  auto* check_aco = app.add_subcommand("check-aco", "check DA1-DA5 on constructed boxes");
  auto* check_amco = app.add_subcommand("check-amco", "check DU1-DU5 by enumeration");
  auto* reduce = app.add_subcommand("reduce", "build ACO boxes from the distance family");
  auto* converge = app.add_subcommand("converge", "seeded convergence trials");
  auto* oracle = app.add_subcommand("oracle-check", "exhaustive engine-vs-recursion comparison");
  auto* demo = app.add_subcommand("demo-stale", "cross-epoch stale message demonstration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (demo->parsed()) return run_demo_stale(opt);
    const Json config = load_config(opt.config_path);
    if (simulate->parsed()) return run_simulate(config, opt);
    if (pseudocycles->parsed()) return run_pseudocycles(config, opt);
    if (check_aco->parsed()) return run_check_aco(config, opt);
    if (check_amco->parsed()) return run_check_amco(config, opt);
    if (reduce->parsed()) return run_reduce(config, opt);
    if (converge->parsed()) return run_converge(config, opt);
    if (oracle->parsed()) return run_oracle_check(config, opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NoFixedPoint& e) {
    std::cout << Json{{"pass", false}, {"error", "NoFixedPoint"}, {"witness", e.what()}}.dump()
              << "\n";
    return 1;
  } catch (const EnumerationTooLarge& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const BudgetExceeded& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionUnmet& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

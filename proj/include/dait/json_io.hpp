#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "dait/boxtrace.hpp"
#include "dait/conditions.hpp"
#include "dait/engine.hpp"
#include "dait/families.hpp"
#include "dait/harness.hpp"
#include "dait/pseudocycle.hpp"
#include "dait/schedule.hpp"
#include "dait/types.hpp"

namespace dait {

using Json = nlohmann::json;

inline Json to_json(const NodeSet& s) {
  Json out = Json::array();
  s.for_each([&](NodeId i) { out.push_back(i); });
  return out;
}

inline NodeSet node_set_from_json(const Json& j) {
  NodeSet s;
  for (const auto& v : j) {
    const auto i = v.get<NodeId>();
    if (i < 0 || i >= kMaxNodes) throw std::invalid_argument("node id outside [0,64)");
    s.insert(i);
  }
  return s;
}

// Schedule wire format:
// {"n":..,"horizon":..,"alpha":[[ids] per t from t=1],
//  "beta":[[[t' per j] per i] per t from t=1],"eta":[..from t=0],
//  "pi":{"0":[ids],..}}
inline Json to_json(const DynamicSchedule& s) {
  Json alpha = Json::array();
  for (Time t = 1; t <= s.horizon; ++t) alpha.push_back(to_json(s.alpha[static_cast<std::size_t>(t)]));
  Json beta = Json::array();
  for (Time t = 1; t <= s.horizon; ++t) {
    Json per_i = Json::array();
    for (NodeId i = 0; i < s.n; ++i) {
      Json per_j = Json::array();
      for (NodeId j = 0; j < s.n; ++j) per_j.push_back(s.beta(t, i, j));
      per_i.push_back(std::move(per_j));
    }
    beta.push_back(std::move(per_i));
  }
  Json pi = Json::object();
  for (std::size_t e = 0; e < s.pi.size(); ++e) pi[std::to_string(e)] = to_json(s.pi[e]);
  return Json{{"n", s.n}, {"horizon", s.horizon}, {"alpha", std::move(alpha)},
              {"beta", std::move(beta)}, {"eta", s.eta}, {"pi", std::move(pi)}};
}

inline DynamicSchedule schedule_from_json(const Json& j) {
  DynamicSchedule s;
  s.n = j.at("n").get<int>();
  s.horizon = j.at("horizon").get<Time>();
  if (s.n < 1 || s.n > kMaxNodes || s.horizon < 1)
    throw std::invalid_argument("schedule: n must be in [1,64] and horizon >= 1");
  const auto& alpha = j.at("alpha");
  const auto& beta = j.at("beta");
  const auto& eta = j.at("eta");
  if (static_cast<Time>(alpha.size()) != s.horizon || static_cast<Time>(beta.size()) != s.horizon ||
      static_cast<Time>(eta.size()) != s.horizon + 1)
    throw std::invalid_argument("schedule: alpha/beta/eta lengths disagree with horizon");
  s.alpha.assign(static_cast<std::size_t>(s.horizon + 1), NodeSet{});
  s.beta_table.assign(static_cast<std::size_t>(s.horizon * s.n * s.n), 0);
  for (Time t = 1; t <= s.horizon; ++t) {
    s.alpha[static_cast<std::size_t>(t)] = node_set_from_json(alpha[static_cast<std::size_t>(t - 1)]);
    const auto& per_i = beta[static_cast<std::size_t>(t - 1)];
    if (static_cast<int>(per_i.size()) != s.n) throw std::invalid_argument("schedule: ragged beta");
    for (NodeId i = 0; i < s.n; ++i) {
      const auto& per_j = per_i[static_cast<std::size_t>(i)];
      if (static_cast<int>(per_j.size()) != s.n) throw std::invalid_argument("schedule: ragged beta");
      for (NodeId j2 = 0; j2 < s.n; ++j2)
        s.beta(t, i, j2) = per_j[static_cast<std::size_t>(j2)].get<Time>();
    }
  }
  s.eta.resize(static_cast<std::size_t>(s.horizon + 1));
  for (Time t = 0; t <= s.horizon; ++t) s.eta[static_cast<std::size_t>(t)] = eta[static_cast<std::size_t>(t)].get<EpochId>();
  EpochId max_epoch = 0;
  for (EpochId e : s.eta) max_epoch = std::max(max_epoch, e);
  s.pi.assign(static_cast<std::size_t>(max_epoch + 1), NodeSet{});
  for (const auto& [key, val] : j.at("pi").items()) {
    const int e = std::stoi(key);
    if (e < 0 || e > max_epoch) throw std::invalid_argument("schedule: pi key outside eta range");
    s.pi[static_cast<std::size_t>(e)] = node_set_from_json(val);
  }
  return s;
}

inline Json to_json(const ScheduleConfig& cfg) {
  Json out{{"n", cfg.n},
           {"horizon", cfg.horizon},
           {"activation_prob", cfg.activation_prob},
           {"delay_max", cfg.delay_max},
           {"loss_prob", cfg.loss_prob},
           {"dup_prob", cfg.dup_prob},
           {"allow_nonparticipant_activation", cfg.allow_nonparticipant_activation},
           {"seed", cfg.seed}};
  if (cfg.initial_participants) out["initial_participants"] = to_json(*cfg.initial_participants);
  Json events = Json::array();
  for (const auto& ev : cfg.epoch_events)
    events.push_back(Json{{"at", ev.at}, {"participants", to_json(ev.participants)}});
  out["epoch_events"] = std::move(events);
  return out;
}

inline ScheduleConfig schedule_config_from_json(const Json& j) {
  ScheduleConfig cfg;
  cfg.n = j.at("n").get<int>();
  cfg.horizon = j.at("horizon").get<Time>();
  cfg.activation_prob = j.value("activation_prob", 1.0);
  cfg.delay_max = j.value("delay_max", Time{1});
  cfg.loss_prob = j.value("loss_prob", 0.0);
  cfg.dup_prob = j.value("dup_prob", 0.0);
  cfg.allow_nonparticipant_activation = j.value("allow_nonparticipant_activation", true);
  cfg.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("initial_participants"))
    cfg.initial_participants = node_set_from_json(j.at("initial_participants"));
  if (j.contains("epoch_events"))
    for (const auto& ev : j.at("epoch_events"))
      cfg.epoch_events.push_back({ev.at("at").get<Time>(), node_set_from_json(ev.at("participants"))});
  return cfg;
}

inline Json to_json(const Violation& v) {
  Json out{{"rule", to_string(v.rule)}, {"detail", v.detail}};
  if (v.t >= 0) out["t"] = v.t;
  if (v.i >= 0) out["i"] = v.i;
  if (v.j >= 0) out["j"] = v.j;
  if (v.t2 >= 0) out["t2"] = v.t2;
  return out;
}

inline Json to_json(const RoutingInstance& inst) {
  Json epochs = Json::array();
  for (const auto& ep : inst.epochs)
    epochs.push_back(Json{{"weights", ep.weights}, {"participants", to_json(ep.participants)}});
  return Json{{"epochs", std::move(epochs)}, {"destination", inst.destination}, {"cap", inst.cap}};
}

inline RoutingInstance routing_instance_from_json(const Json& j) {
  RoutingInstance inst;
  inst.destination = j.at("destination").get<NodeId>();
  inst.cap = j.at("cap").get<Value>();
  for (const auto& ep : j.at("epochs")) {
    RoutingEpoch re;
    re.weights = ep.at("weights").get<std::vector<std::vector<Value>>>();
    re.participants = ep.contains("participants")
                          ? node_set_from_json(ep.at("participants"))
                          : NodeSet::all(static_cast<int>(re.weights.size()));
    inst.epochs.push_back(std::move(re));
  }
  return inst;
}

inline Json to_json(const EpochPair& pair) {
  return Json{{"epoch", pair.epoch}, {"participants", to_json(pair.participants)}};
}

inline EpochPair epoch_pair_from_json(const Json& j) {
  return {j.at("epoch").get<EpochId>(), node_set_from_json(j.at("participants"))};
}

inline Json to_json(const CheckWitness& w) {
  Json out{{"condition", w.condition}, {"note", w.note}};
  if (w.epoch >= 0) out["epoch"] = w.epoch;
  out["participants"] = to_json(w.participants);
  if (w.epoch2 >= 0) {
    out["epoch2"] = w.epoch2;
    out["participants2"] = to_json(w.participants2);
  }
  if (w.node >= 0) out["node"] = w.node;
  if (w.box >= 0) out["box"] = w.box;
  if (!w.states.empty()) out["states"] = w.states;
  return out;
}

inline Json to_json(const CheckReport& report) {
  Json conditions = Json::object();
  for (const auto& c : report.conditions) conditions[c.condition] = c.pass;
  Json out{{"pass", report.pass}, {"conditions", std::move(conditions)}};
  if (const CheckWitness* w = report.first_witness()) out["witness"] = to_json(*w);
  return out;
}

inline Json to_json(const LemmaReport& report) {
  Json lemmas = Json::object();
  for (const auto& l : report.lemmas) {
    Json entry{{"pass", l.pass}, {"checks", l.checks}};
    if (l.witness) {
      entry["witness"] = Json{{"t", l.witness->t},     {"node", l.witness->node},
                              {"t2", l.witness->t2},   {"expected", l.witness->expected},
                              {"got", l.witness->got}, {"note", l.witness->note}};
    }
    lemmas[l.id] = std::move(entry);
  }
  return Json{{"pass", report.pass},
              {"lemmas", std::move(lemmas)},
              {"provisional_cells", report.provisional_cells}};
}

inline Json to_json(const ConvergenceSummary& s) {
  return Json{{"trials", s.trials},
              {"qualifying_epochs", s.qualifying_epochs},
              {"converged", s.converged_epochs},
              {"rate", s.rate},
              {"witnesses", s.witnesses}};
}

inline Json to_json(const TrialResult& t) {
  Json epochs = Json::array();
  for (const auto& e : t.epochs) {
    Json entry{{"epoch", e.epoch},
               {"participants", to_json(e.participants)},
               {"start", e.start},
               {"end", e.end},
               {"pseudocycles", e.pseudocycle_count},
               {"kstar", e.kstar},
               {"qualifying", e.qualifying},
               {"converged", e.converged}};
    if (e.convergence_tick >= 0) entry["convergence_tick"] = e.convergence_tick;
    if (!e.witness.empty()) entry["witness"] = e.witness;
    epochs.push_back(std::move(entry));
  }
  return Json{{"seed", t.schedule_seed}, {"initial", t.initial}, {"epochs", std::move(epochs)}};
}

inline Json to_json(const StaleMessageReport& r) {
  return Json{{"consumed_from_nonparticipant", r.consumed_from_nonparticipant},
              {"consume_time", r.consume_time},
              {"consumer", r.consumer},
              {"stale_sender", r.stale_sender},
              {"stale_value", r.stale_value},
              {"well_formed_false_at", r.wf_false_time},
              {"well_formed_restored_at", r.wf_restored_time},
              {"control_consumed", r.control_consumed}};
}

/// One JSONL record per (t, i) cell.
inline void write_trace_jsonl(std::ostream& os, const Trace& tr) {
  for (Time t = 0; t <= tr.horizon; ++t)
    for (NodeId i = 0; i < tr.n; ++i) {
      os << Json{{"t", t},
                 {"i", i},
                 {"value", tr.at(t, i)},
                 {"case", to_string(tr.case_at(t, i))},
                 {"epoch", tr.schedule.epoch(t)}}
                .dump()
         << '\n';
    }
}

inline void write_periods_jsonl(std::ostream& os, const std::vector<Period>& periods) {
  for (const auto& p : periods) os << Json{{"t1", p.t1}, {"t2", p.t2}}.dump() << '\n';
}

template <BoxFamily B>
void write_annotations_jsonl(std::ostream& os, const Trace& tr, const B& boxes) {
  const auto ann = annotate_trace(tr, boxes);
  for (Time t = 0; t <= tr.horizon; ++t)
    for (NodeId i = 0; i < tr.n; ++i) {
      const auto& a = ann[static_cast<std::size_t>(t * tr.n + i)];
      os << Json{{"t", t},
                 {"i", i},
                 {"state_box", a.state_box},
                 {"msgs_box", a.msgs_box},
                 {"well_formed", a.well_formed},
                 {"computation_box", a.computation_box}}
                .dump()
         << '\n';
    }
}

}  // namespace dait

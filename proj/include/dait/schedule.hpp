#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dait/types.hpp"

namespace dait {

/// Finite-horizon dynamic schedule: explicit tables for the activation
/// function alpha, the data-flow function beta, the epoch function eta and
/// the participants function pi. alpha/beta are defined for t in [1,horizon],
/// eta for t in [0,horizon], pi for every epoch id eta takes.
///
/// Tables are stored with a direct time index; alpha[0] is unused padding.
struct DynamicSchedule {
  int n = 0;
  Time horizon = 0;
  std::vector<NodeSet> alpha;     // size horizon+1, [0] unused
  std::vector<Time> beta_table;   // flat (t-1, i, j), size horizon*n*n
  std::vector<EpochId> eta;       // size horizon+1
  std::vector<NodeSet> pi;        // indexed by epoch id

  Time beta(Time t, NodeId i, NodeId j) const {
    return beta_table[static_cast<std::size_t>(((t - 1) * n + i) * n + j)];
  }
  Time& beta(Time t, NodeId i, NodeId j) {
    return beta_table[static_cast<std::size_t>(((t - 1) * n + i) * n + j)];
  }

  EpochId epoch(Time t) const { return eta[static_cast<std::size_t>(t)]; }
  NodeSet participants(EpochId e) const { return pi[static_cast<std::size_t>(e)]; }
  NodeSet rho(Time t) const { return pi[static_cast<std::size_t>(epoch(t))]; }

  friend bool operator==(const DynamicSchedule&, const DynamicSchedule&) = default;

  /// All-active, unit-delay, single-epoch schedule: alpha(t)=V and
  /// beta(t,i,j)=t-1.
  static DynamicSchedule synchronous(int n, Time horizon) {
    DynamicSchedule s;
    s.n = n;
    s.horizon = horizon;
    s.alpha.assign(static_cast<std::size_t>(horizon + 1), NodeSet::all(n));
    s.alpha[0] = NodeSet{};
    s.beta_table.resize(static_cast<std::size_t>(horizon * n * n));
    for (Time t = 1; t <= horizon; ++t)
      for (NodeId i = 0; i < n; ++i)
        for (NodeId j = 0; j < n; ++j) s.beta(t, i, j) = t - 1;
    s.eta.assign(static_cast<std::size_t>(horizon + 1), 0);
    s.pi = {NodeSet::all(n)};
    return s;
  }
};

/// rho(t) = pi(eta(t)), the set of nodes participating at time t.
inline NodeSet rho(const DynamicSchedule& s, Time t) {
  if (t < 0 || t > s.horizon) throw std::out_of_range("rho: time outside schedule horizon");
  return s.rho(t);
}

/// Last tick of eta(t)'s epoch, truncated at the horizon.
inline Time epoch_end(const DynamicSchedule& s, Time t) {
  const EpochId e = s.epoch(t);
  Time u = t;
  while (u + 1 <= s.horizon && s.epoch(u + 1) == e) ++u;
  return u;
}

/// First tick of eta(t)'s epoch.
inline Time epoch_start(const DynamicSchedule& s, Time t) {
  const EpochId e = s.epoch(t);
  Time u = t;
  while (u - 1 >= 0 && s.epoch(u - 1) == e) --u;
  return u;
}

struct EpochWindow {
  EpochId epoch = 0;
  NodeSet participants;
  Time start = 0;
  Time end = 0;
};

/// Maximal constant-epoch intervals covering [0, horizon].
inline std::vector<EpochWindow> epoch_windows(const DynamicSchedule& s) {
  std::vector<EpochWindow> out;
  Time t = 0;
  while (t <= s.horizon) {
    const Time end = epoch_end(s, t);
    out.push_back({s.epoch(t), s.rho(t), t, end});
    t = end + 1;
  }
  return out;
}

enum class ScheduleRule {
  Ds1Causality,      // beta(t,i,j) <= t-1
  Ds2MonotoneEpochs, // eta non-decreasing
  Totality,          // tables defined on their full domains
};

inline const char* to_string(ScheduleRule r) {
  switch (r) {
    case ScheduleRule::Ds1Causality: return "DS1";
    case ScheduleRule::Ds2MonotoneEpochs: return "DS2";
    case ScheduleRule::Totality: return "totality";
  }
  return "?";
}

struct Violation {
  ScheduleRule rule;
  Time t = -1;
  NodeId i = -1;
  NodeId j = -1;
  Time t2 = -1;  // second witness time for DS2
  std::string detail;
};

/// Violations are data, not failures: empty result iff DS1, DS2 and
/// totality all hold.
inline std::vector<Violation> validate_schedule(const DynamicSchedule& s) {
  std::vector<Violation> out;
  if (s.n < 1 || s.n > kMaxNodes || s.horizon < 1) {
    out.push_back({ScheduleRule::Totality, -1, -1, -1, -1, "n must be in [1,64] and horizon >= 1"});
    return out;
  }
  const auto ticks = static_cast<std::size_t>(s.horizon + 1);
  if (s.alpha.size() != ticks || s.eta.size() != ticks ||
      s.beta_table.size() != static_cast<std::size_t>(s.horizon * s.n * s.n)) {
    out.push_back({ScheduleRule::Totality, -1, -1, -1, -1, "table sizes do not match horizon/n"});
    return out;
  }
  const std::uint64_t node_mask = NodeSet::all(s.n).bits();
  for (Time t = 0; t <= s.horizon; ++t) {
    if ((s.alpha[static_cast<std::size_t>(t)].bits() & ~node_mask) != 0)
      out.push_back({ScheduleRule::Totality, t, -1, -1, -1, "alpha references node >= n"});
    const EpochId e = s.epoch(t);
    if (e < 0 || static_cast<std::size_t>(e) >= s.pi.size()) {
      out.push_back({ScheduleRule::Totality, t, -1, -1, -1, "eta(t) has no participant set"});
      continue;
    }
    if ((s.pi[static_cast<std::size_t>(e)].bits() & ~node_mask) != 0)
      out.push_back({ScheduleRule::Totality, t, -1, -1, -1, "pi references node >= n"});
  }
  for (Time t = 1; t <= s.horizon; ++t) {
    for (NodeId i = 0; i < s.n; ++i)
      for (NodeId j = 0; j < s.n; ++j) {
        const Time b = s.beta(t, i, j);
        if (b < 0 || b > t - 1)
          out.push_back({ScheduleRule::Ds1Causality, t, i, j, -1,
                         "beta(t,i,j) must lie in [0, t-1]"});
      }
    if (s.epoch(t) < s.epoch(t - 1))
      out.push_back({ScheduleRule::Ds2MonotoneEpochs, t - 1, -1, -1, t, "epoch decreases"});
  }
  return out;
}

struct EpochEvent {
  Time at = 0;            // first tick of the new epoch
  NodeSet participants;   // pi of the new epoch
};

/// Generator parameters; realizes message delay, loss and duplication over
/// per-(i,j) channels, so generated beta tables always describe messages
/// that were actually sent.
struct ScheduleConfig {
  int n = 0;
  Time horizon = 0;
  double activation_prob = 1.0;
  Time delay_max = 1;  // delays uniform in [1, delay_max]
  double loss_prob = 0.0;
  double dup_prob = 0.0;
  std::optional<NodeSet> initial_participants;  // nullopt: all n nodes
  std::vector<EpochEvent> epoch_events;
  bool allow_nonparticipant_activation = true;
  std::uint64_t seed = 0;
};

inline void validate_config(const ScheduleConfig& cfg) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("schedule config: " + what); };
  if (cfg.n < 1 || cfg.n > kMaxNodes) fail("n must be in [1,64]");
  if (cfg.horizon < 1) fail("horizon must be >= 1");
  if (cfg.activation_prob < 0.0 || cfg.activation_prob > 1.0) fail("activation_prob outside [0,1]");
  if (cfg.loss_prob < 0.0 || cfg.loss_prob > 1.0) fail("loss_prob outside [0,1]");
  if (cfg.dup_prob < 0.0 || cfg.dup_prob > 1.0) fail("dup_prob outside [0,1]");
  if (cfg.delay_max < 1) fail("delay_max must be >= 1");
  Time prev = 0;
  for (const auto& ev : cfg.epoch_events) {
    if (ev.at <= prev) fail("epoch event times must be strictly increasing and >= 1");
    if (ev.at > cfg.horizon) fail("epoch event beyond horizon");
    prev = ev.at;
  }
}

/// Builds a schedule by simulated message passing. For each ordered pair
/// (j -> i), every activation of j emits a message stamped with its send
/// time; the message is lost with loss_prob, otherwise delivered after a
/// uniform delay in [1, delay_max], and with dup_prob a duplicate copy is
/// enqueued with its own delay. beta(t,i,j) is the send time of the
/// latest-arriving message at or before t (ties broken towards the newer
/// send time), carrying the previous value forward when nothing arrives,
/// and 0 before any arrival.
inline DynamicSchedule generate_schedule(const ScheduleConfig& cfg) {
  validate_config(cfg);
  Rng rng(cfg.seed);

  DynamicSchedule s;
  s.n = cfg.n;
  s.horizon = cfg.horizon;
  s.eta.assign(static_cast<std::size_t>(cfg.horizon + 1), 0);
  s.pi.clear();
  s.pi.push_back(cfg.initial_participants.value_or(NodeSet::all(cfg.n)));
  for (const auto& ev : cfg.epoch_events) {
    for (Time t = ev.at; t <= cfg.horizon; ++t) s.eta[static_cast<std::size_t>(t)] += 1;
    s.pi.push_back(ev.participants);
  }

  // Activations
  s.alpha.assign(static_cast<std::size_t>(cfg.horizon + 1), NodeSet{});
  Rng act_rng = rng.fork(0);
  for (Time t = 1; t <= cfg.horizon; ++t) {
    NodeSet a;
    for (NodeId i = 0; i < cfg.n; ++i)
      if (act_rng.bernoulli(cfg.activation_prob)) a.insert(i);
    if (!cfg.allow_nonparticipant_activation) {
      NodeSet restricted;
      const NodeSet r = s.rho(t);
      a.for_each([&](NodeId i) { if (r.contains(i)) restricted.insert(i); });
      a = restricted;
    }
    s.alpha[static_cast<std::size_t>(t)] = a;
  }

  // Message channels
  s.beta_table.assign(static_cast<std::size_t>(cfg.horizon * cfg.n * cfg.n), 0);
  for (NodeId i = 0; i < cfg.n; ++i) {
    for (NodeId j = 0; j < cfg.n; ++j) {
      Rng ch = rng.fork(1 + static_cast<std::uint64_t>(i) * kMaxNodes + j);
      // (arrival, send) pairs for this channel
      std::vector<std::pair<Time, Time>> arrivals;
      for (Time t = 1; t <= cfg.horizon; ++t) {
        if (!s.alpha[static_cast<std::size_t>(t)].contains(j)) continue;
        if (!ch.bernoulli(cfg.loss_prob)) {
          arrivals.emplace_back(t + ch.next_in(1, cfg.delay_max), t);
        }
        if (ch.bernoulli(cfg.dup_prob)) {
          arrivals.emplace_back(t + ch.next_in(1, cfg.delay_max), t);
        }
      }
      std::sort(arrivals.begin(), arrivals.end());
      std::size_t next = 0;
      Time current = 0;
      for (Time t = 1; t <= cfg.horizon; ++t) {
        while (next < arrivals.size() && arrivals[next].first <= t) {
          current = arrivals[next].second;
          ++next;
        }
        s.beta(t, i, j) = current;
      }
    }
  }
  return s;
}

}  // namespace dait

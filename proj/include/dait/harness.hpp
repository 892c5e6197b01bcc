#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "dait/boxtrace.hpp"
#include "dait/conditions.hpp"
#include "dait/engine.hpp"
#include "dait/pseudocycle.hpp"
#include "dait/schedule.hpp"
#include "dait/types.hpp"

namespace dait {

/// Per-trial randomization of the epoch events: between events_min and
/// events_max switches at distinct random times, each drawing its
/// participant set from the pool.
struct ChurnRandomization {
  int events_min = 0;
  int events_max = 0;
  std::vector<NodeSet> participant_pool;
};

struct HarnessConfig {
  int trials = 1;
  ScheduleConfig schedule;
  std::uint64_t seed = 0;
  /// Non-empty: the only pairs whose fixed points are considered available;
  /// a trial touching any other pair raises PreconditionUnmet.
  std::vector<EpochPair> precomputed_pairs;
  /// Keep going when a pair has no fixed point: fall back to
  /// exploratory_kstar pseudocycles and ask for stabilization at a fixed
  /// point instead of equality with a precomputed x*.
  bool exploratory = false;
  int exploratory_kstar = 1;
  /// Sample starting states from all of S instead of the initial box.
  bool sample_full_space = false;
  std::optional<StateVector> initial_state;  // fixed start overrides sampling
  std::optional<ChurnRandomization> churn;
};

struct EpochOutcome {
  EpochId epoch = 0;
  NodeSet participants;
  Time start = 0;
  Time end = 0;
  int pseudocycle_count = 0;
  int kstar = -1;            // -1: unknown (exploratory pair without fixed point)
  bool qualifying = false;   // pseudocycle_count >= kstar
  bool converged = false;    // meaningful only when qualifying
  Time convergence_tick = -1;
  std::string witness;
};

struct TrialResult {
  std::uint64_t schedule_seed = 0;
  StateVector initial;
  std::vector<EpochOutcome> epochs;
};

struct ConvergenceSummary {
  int trials = 0;
  long qualifying_epochs = 0;
  long converged_epochs = 0;
  double rate = 1.0;  // converged / qualifying, vacuously 1
  std::vector<std::string> witnesses;
};

struct ConvergeResult {
  std::vector<TrialResult> trials;
  ConvergenceSummary summary;
};

namespace detail {

inline std::string join_state(const StateVector& x) {
  std::string out = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(x[i]);
  }
  return out + ")";
}

template <FunctionFamily F, BoxFamily B>
StateVector sample_start_state(const F& fam, const B& boxes, bool full_space, Rng& rng) {
  const auto& domains = enumerable_domains(fam);
  StateVector x(domains.size());
  for (NodeId i = 0; i < fam.node_count(); ++i) {
    std::vector<Value> candidates;
    for (Value v : domains[static_cast<std::size_t>(i)])
      if (full_space || boxes.contains(0, NodeSet{}, 0, i, v)) candidates.push_back(v);
    if (candidates.empty()) throw PreconditionUnmet("initial box empty for node " + std::to_string(i));
    x[static_cast<std::size_t>(i)] =
        candidates[static_cast<std::size_t>(rng.next_in(0, static_cast<std::int64_t>(candidates.size()) - 1))];
  }
  return x;
}

inline std::vector<EpochEvent> randomize_churn(const ChurnRandomization& churn, Time horizon,
                                               Rng& rng) {
  const int k = static_cast<int>(rng.next_in(churn.events_min, churn.events_max));
  std::set<Time> times;
  while (static_cast<int>(times.size()) < k && static_cast<Time>(times.size()) < horizon)
    times.insert(rng.next_in(1, horizon));
  std::vector<EpochEvent> events;
  for (Time t : times) {
    const auto pick = rng.next_in(0, static_cast<std::int64_t>(churn.participant_pool.size()) - 1);
    events.push_back({t, churn.participant_pool[static_cast<std::size_t>(pick)]});
  }
  return events;
}

}  // namespace detail

/// Runs seeded trials of delta over generated schedules and checks the
/// convergence contract epoch by epoch: whenever an epoch contains at least
/// kstar disjoint pseudocycles, the state must equal the epoch's fixed point
/// from the end of the kstar-th pseudocycle until the epoch ends. Epochs
/// with fewer pseudocycles are reported as non-qualifying and assert
/// nothing.
template <FunctionFamily F, BoxFamily B>
ConvergeResult converge_trial(const F& fam, const B& boxes, const HarnessConfig& cfg,
                              ExpiryScope scope = ExpiryScope::Epoch) {
  if (cfg.trials < 1) throw std::invalid_argument("harness: trials must be >= 1");
  ConvergeResult result;
  result.summary.trials = cfg.trials;

  for (int trial = 0; trial < cfg.trials; ++trial) {
    Rng rng(Rng::derive_seed(cfg.seed, static_cast<std::uint64_t>(trial)));
    ScheduleConfig sched_cfg = cfg.schedule;
    sched_cfg.seed = rng.next_u64();
    if (cfg.churn) sched_cfg.epoch_events = detail::randomize_churn(*cfg.churn, sched_cfg.horizon, rng);
    const DynamicSchedule schedule = generate_schedule(sched_cfg);

    const StateVector x = cfg.initial_state.value_or(
        detail::sample_start_state(fam, boxes, cfg.sample_full_space, rng));
    const Trace trace = run_delta(fam, schedule, x);

    TrialResult tr;
    tr.schedule_seed = sched_cfg.seed;
    tr.initial = x;

    for (const auto& window : epoch_windows(schedule)) {
      EpochOutcome outcome;
      outcome.epoch = window.epoch;
      outcome.participants = window.participants;
      outcome.start = window.start;
      outcome.end = window.end;

      const EpochPair pair{window.epoch, window.participants};
      if (!cfg.precomputed_pairs.empty() &&
          std::find(cfg.precomputed_pairs.begin(), cfg.precomputed_pairs.end(), pair) ==
              cfg.precomputed_pairs.end())
        throw PreconditionUnmet("trial touches pair without precomputed fixed point (epoch " +
                                std::to_string(window.epoch) + ")");

      std::optional<StateVector> xstar;
      int kstar = -1;
      try {
        kstar = boxes.kstar(window.epoch, window.participants);
        xstar = boxes.xstar(window.epoch, window.participants);
      } catch (const NoFixedPoint&) {
        if (!cfg.exploratory) throw;
        kstar = cfg.exploratory_kstar;
      }
      outcome.kstar = kstar;

      const auto pcs = count_disjoint_pseudocycles(schedule, {window.start, window.end}, scope);
      outcome.pseudocycle_count = pcs.count;
      outcome.qualifying = pcs.count >= kstar;
      if (outcome.qualifying) {
        const Time t2 = kstar == 0 ? window.start
                                   : pcs.periods[static_cast<std::size_t>(kstar - 1)].t2;
        outcome.convergence_tick = t2;
        outcome.converged = true;
        for (Time t3 = t2; t3 <= window.end && outcome.converged; ++t3) {
          const StateVector got = trace.state(t3);
          if (xstar.has_value()) {
            if (got != *xstar) {
              outcome.converged = false;
              outcome.witness = "seed " + std::to_string(tr.schedule_seed) + " epoch " +
                                std::to_string(window.epoch) + " t=" + std::to_string(t3) +
                                ": state " + detail::join_state(got) + " != x* " +
                                detail::join_state(*xstar);
            }
          } else {
            // exploratory: require stabilization at some fixed point of F^{ep}
            const StateVector reference = trace.state(t2);
            if (got != reference ||
                fam.apply(window.epoch, window.participants, got) != got) {
              outcome.converged = false;
              outcome.witness = "seed " + std::to_string(tr.schedule_seed) + " epoch " +
                                std::to_string(window.epoch) + " t=" + std::to_string(t3) +
                                ": no stable fixed point, state " + detail::join_state(got);
            }
          }
        }
        ++result.summary.qualifying_epochs;
        if (outcome.converged)
          ++result.summary.converged_epochs;
        else
          result.summary.witnesses.push_back(outcome.witness);
      }
      tr.epochs.push_back(std::move(outcome));
    }
    result.trials.push_back(std::move(tr));
  }

  if (result.summary.qualifying_epochs > 0)
    result.summary.rate = static_cast<double>(result.summary.converged_epochs) /
                          static_cast<double>(result.summary.qualifying_epochs);
  return result;
}

/// Distance-family convenience: certifies pairs lazily as trials touch them.
template <FunctionFamily F, DistanceFamily D>
ConvergeResult converge_trial(const F& fam, const D& dist, const HarnessConfig& cfg,
                              ExpiryScope scope = ExpiryScope::Epoch) {
  LazyMetricBoxes<F, D> boxes(fam, dist);
  return converge_trial(fam, boxes, cfg, scope);
}

/// The dynamic state function evaluated by literal recursion, with no
/// memoization; the independent oracle for run_delta.
template <FunctionFamily F>
Value naive_delta(const F& fam, const DynamicSchedule& s, const StateVector& x, Time t, NodeId i) {
  if (!s.rho(t).contains(i)) return fam.bottom()[static_cast<std::size_t>(i)];
  if (t == 0 || !s.rho(t - 1).contains(i)) return x[static_cast<std::size_t>(i)];
  if (!s.alpha[static_cast<std::size_t>(t)].contains(i)) return naive_delta(fam, s, x, t - 1, i);
  StateVector view(static_cast<std::size_t>(s.n));
  for (NodeId j = 0; j < s.n; ++j)
    view[static_cast<std::size_t>(j)] = naive_delta(fam, s, x, s.beta(t, i, j), j);
  return fam.apply_component(s.epoch(t), s.rho(t), view, i);
}

struct OracleMismatch {
  DynamicSchedule schedule;
  Time t = -1;
  NodeId i = -1;
  Value engine_value = 0;
  Value oracle_value = 0;
};

struct OracleCheckResult {
  bool pass = true;
  std::uint64_t schedules_checked = 0;
  Time horizon_covered = 0;  // horizons [1..this] were enumerated completely
  std::optional<OracleMismatch> first_mismatch;
};

namespace detail {

inline std::uint64_t schedules_at_horizon(int n, Time h) {
  // activation subsets * beta digit choices * epoch options
  long double total = 1.0L;
  for (Time t = 1; t <= h; ++t) {
    total *= static_cast<long double>(std::uint64_t{1} << n);  // alpha(t)
    for (int d = 0; d < n * n; ++d) total *= static_cast<long double>(t);
  }
  const std::uint64_t proper_subsets = (std::uint64_t{1} << n) - 1;
  total *= static_cast<long double>(1 + static_cast<std::uint64_t>(h) * proper_subsets);
  if (total > 1e18L) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(total);
}

}  // namespace detail

/// Compares run_delta (or a supplied engine evaluator) against the naive
/// recursion over every schedule within bounds: all activation subsets, all
/// DS1-valid beta tables, and one optional epoch switch to one alternative
/// participant set (any proper subset of V). Horizons are enumerated
/// completely in increasing order while the schedule budget lasts; in strict
/// mode an unaffordable horizon raises BudgetExceeded instead of stopping.
template <FunctionFamily F, typename Eval>
OracleCheckResult exhaustive_oracle_check(const F& fam, const StateVector& x, Time horizon_max,
                                          std::uint64_t budget, bool strict, Eval&& eval) {
  const int n = fam.node_count();
  if (n > 2 || horizon_max > 6)
    throw std::invalid_argument("exhaustive_oracle_check: bounds are n <= 2, horizon <= 6");

  OracleCheckResult result;
  const std::uint64_t full_mask = (std::uint64_t{1} << n) - 1;

  for (Time h = 1; h <= horizon_max; ++h) {
    const std::uint64_t count = detail::schedules_at_horizon(n, h);
    if (result.schedules_checked + count > budget) {
      if (strict)
        throw BudgetExceeded("horizon " + std::to_string(h) + " needs " + std::to_string(count) +
                             " schedules; budget exhausted");
      break;
    }

    DynamicSchedule s;
    s.n = n;
    s.horizon = h;
    s.alpha.assign(static_cast<std::size_t>(h + 1), NodeSet{});
    s.beta_table.assign(static_cast<std::size_t>(h * n * n), 0);
    s.eta.assign(static_cast<std::size_t>(h + 1), 0);

    // epoch options: index 0 keeps a single epoch; option m > 0 encodes a
    // switch time and an alternative participant set
    const std::uint64_t epoch_options = 1 + static_cast<std::uint64_t>(h) * full_mask;

    const std::uint64_t alpha_combos = std::uint64_t{1} << (n * static_cast<int>(h));
    for (std::uint64_t a = 0; a < alpha_combos; ++a) {
      for (Time t = 1; t <= h; ++t) {
        NodeSet at;
        for (NodeId i = 0; i < n; ++i)
          if ((a >> ((t - 1) * n + i)) & 1u) at.insert(i);
        s.alpha[static_cast<std::size_t>(t)] = at;
      }

      // odometer over beta digits; digit (t,i,j) ranges over [0, t-1]
      std::vector<Time> digits(static_cast<std::size_t>(h * n * n), 0);
      bool beta_done = false;
      while (!beta_done) {
        std::copy(digits.begin(), digits.end(), s.beta_table.begin());

        for (std::uint64_t opt = 0; opt < epoch_options; ++opt) {
          if (opt == 0) {
            std::fill(s.eta.begin(), s.eta.end(), 0);
            s.pi = {NodeSet::all(n)};
          } else {
            const Time switch_at = static_cast<Time>((opt - 1) / full_mask) + 1;
            const std::uint64_t alt_bits = (opt - 1) % full_mask;  // proper subset
            for (Time t = 0; t <= h; ++t)
              s.eta[static_cast<std::size_t>(t)] = t >= switch_at ? 1 : 0;
            NodeSet alt;
            for (NodeId i = 0; i < n; ++i)
              if ((alt_bits >> i) & 1u) alt.insert(i);
            s.pi = {NodeSet::all(n), alt};
          }

          const Trace got = eval(fam, s, x);
          ++result.schedules_checked;
          for (Time t = 0; t <= h && result.pass; ++t)
            for (NodeId i = 0; i < n; ++i) {
              const Value want = naive_delta(fam, s, x, t, i);
              if (got.at(t, i) != want) {
                result.pass = false;
                result.first_mismatch = OracleMismatch{s, t, i, got.at(t, i), want};
                break;
              }
            }
          if (!result.pass) return result;
        }

        // advance beta odometer
        std::size_t pos = digits.size();
        beta_done = true;
        while (pos > 0) {
          --pos;
          const Time t = static_cast<Time>(pos / static_cast<std::size_t>(n * n)) + 1;
          if (++digits[pos] <= t - 1) {
            beta_done = false;
            break;
          }
          digits[pos] = 0;
        }
      }
    }
    result.horizon_covered = h;
  }
  return result;
}

template <FunctionFamily F>
OracleCheckResult exhaustive_oracle_check(const F& fam, const StateVector& x, Time horizon_max,
                                          std::uint64_t budget = 1'000'000, bool strict = false) {
  return exhaustive_oracle_check(fam, x, horizon_max, budget, strict,
                                 [](const F& f, const DynamicSchedule& s, const StateVector& x0) {
                                   return run_delta(f, s, x0);
                                 });
}

namespace detail {

/// Minimum over every node's view component, participating or not. Sensitive
/// to stale data by construction, which is what the demo needs to show.
class GlobalMinFamily {
 public:
  GlobalMinFamily(int n, Value max_value) : n_(n), max_(max_value) {
    bottom_.assign(static_cast<std::size_t>(n), max_);
    domains_.resize(static_cast<std::size_t>(n));
    for (auto& d : domains_) {
      d.resize(static_cast<std::size_t>(max_ + 1));
      for (Value v = 0; v <= max_; ++v) d[static_cast<std::size_t>(v)] = v;
    }
  }
  int node_count() const { return n_; }
  const StateVector& bottom() const { return bottom_; }
  const std::vector<std::vector<Value>>& domains() const { return domains_; }
  Value apply_component(EpochId, const NodeSet&, const StateVector& x, NodeId) const {
    return *std::min_element(x.begin(), x.end());
  }
  StateVector apply(EpochId e, const NodeSet& p, const StateVector& x) const {
    return StateVector(static_cast<std::size_t>(n_), apply_component(e, p, x, 0));
  }

 private:
  int n_;
  Value max_;
  StateVector bottom_;
  std::vector<std::vector<Value>> domains_;
};

}  // namespace detail

struct StaleMessageReport {
  Trace trace;
  bool consumed_from_nonparticipant = false;
  Time consume_time = -1;
  NodeId consumer = -1;
  NodeId stale_sender = -1;
  Value stale_value = 0;
  bool wf_false = false;        // messages_well_formed(consumer, wf_false_time) is false
  Time wf_false_time = -1;
  bool wf_restored = false;     // ... and true again from wf_restored_time on
  Time wf_restored_time = -1;
  Trace control_trace;          // same alpha/beta, single epoch
  bool control_consumed = false;
};

/// Activated steps whose view contains a non-bottom component from a node
/// outside rho(t); the situation the static model cannot express.
inline std::vector<std::tuple<Time, NodeId, NodeId>> stale_consumptions(const Trace& tr) {
  const DynamicSchedule& s = tr.schedule;
  std::vector<std::tuple<Time, NodeId, NodeId>> out;
  for (Time t = 1; t <= s.horizon; ++t) {
    const NodeSet p = s.rho(t);
    for (NodeId i = 0; i < s.n; ++i) {
      if (tr.case_at(t, i) != StepCase::Activated) continue;
      for (NodeId j = 0; j < s.n; ++j) {
        if (p.contains(j)) continue;
        if (tr.at(s.beta(t, i, j), j) != tr.at(t, j)) out.emplace_back(t, i, j);
      }
    }
  }
  return out;
}

/// The motivating scenario: node 1 sends while participating in epoch 0,
/// leaves at the epoch switch, and node 0 later activates on the
/// pre-departure datum. The report shows the Activated step consuming a
/// non-participant's value and messages_well_formed failing at the epoch's
/// start, then holding again once the stale datum has expired.
inline StaleMessageReport stale_message_demo() {
  const int n = 2;
  const Time horizon = 6;
  detail::GlobalMinFamily fam(n, 5);
  const StateVector x = {3, 1};

  DynamicSchedule s = DynamicSchedule::synchronous(n, horizon);
  for (Time t = 1; t <= horizon; ++t) s.alpha[static_cast<std::size_t>(t)] = NodeSet{};
  s.alpha[1] = NodeSet::of({1});
  s.alpha[4] = NodeSet::of({0});
  s.beta(4, 0, 1) = 1;  // stale: sent before node 1 left
  for (Time t = 0; t <= horizon; ++t) s.eta[static_cast<std::size_t>(t)] = t >= 3 ? 1 : 0;
  s.pi = {NodeSet::all(n), NodeSet::of({0})};

  StaleMessageReport report;
  report.trace = run_delta(fam, s, x);

  const auto consumed = stale_consumptions(report.trace);
  if (!consumed.empty()) {
    report.consumed_from_nonparticipant = true;
    std::tie(report.consume_time, report.consumer, report.stale_sender) = consumed.front();
    report.stale_value =
        report.trace.at(s.beta(report.consume_time, report.consumer, report.stale_sender),
                        report.stale_sender);
  }

  for (Time t = epoch_start(s, horizon); t <= horizon; ++t) {
    const bool wf = messages_well_formed(report.trace, 0, t);
    if (!wf && !report.wf_false) {
      report.wf_false = true;
      report.wf_false_time = t;
    }
    if (report.wf_false && wf && !report.wf_restored) {
      report.wf_restored = true;
      report.wf_restored_time = t;
    }
  }

  DynamicSchedule control = s;
  std::fill(control.eta.begin(), control.eta.end(), 0);
  control.pi = {NodeSet::all(n)};
  report.control_trace = run_delta(fam, control, x);
  report.control_consumed = !stale_consumptions(report.control_trace).empty();
  return report;
}

}  // namespace dait

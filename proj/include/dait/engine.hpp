#pragma once

#include <algorithm>
#include <concepts>
#include <string>
#include <vector>

#include "dait/schedule.hpp"
#include "dait/types.hpp"

namespace dait {

/// Indexed operator family: apply(e, p, x) computes F^{ep}(x) over the full
/// product space, apply_component its i-th component. bottom() is the
/// non-participating state. domains() lists each S_i for enumeration; an
/// empty outer vector marks the domains as opaque (engine-only use).
template <typename F>
concept FunctionFamily = requires(const F f, EpochId e, const NodeSet& p, const StateVector& x,
                                  NodeId i) {
  { f.node_count() } -> std::convertible_to<int>;
  { f.bottom() } -> std::convertible_to<StateVector>;
  { f.domains() } -> std::convertible_to<std::vector<std::vector<Value>>>;
  { f.apply(e, p, x) } -> std::convertible_to<StateVector>;
  { f.apply_component(e, p, x, i) } -> std::convertible_to<Value>;
};

enum class StepCase : std::uint8_t { NonParticipant, FreshJoin, Inactive, Activated };

inline const char* to_string(StepCase c) {
  switch (c) {
    case StepCase::NonParticipant: return "NonParticipant";
    case StepCase::FreshJoin: return "FreshJoin";
    case StepCase::Inactive: return "Inactive";
    case StepCase::Activated: return "Activated";
  }
  return "?";
}

/// Full evaluation of delta over a schedule: value and fired case per (t,i),
/// plus the inputs it was produced from.
struct Trace {
  int n = 0;
  Time horizon = 0;
  DynamicSchedule schedule;
  StateVector initial;
  std::vector<Value> values;       // (horizon+1) * n
  std::vector<StepCase> cases;     // (horizon+1) * n

  Value at(Time t, NodeId i) const { return values[static_cast<std::size_t>(t * n + i)]; }
  StepCase case_at(Time t, NodeId i) const { return cases[static_cast<std::size_t>(t * n + i)]; }

  StateVector state(Time t) const {
    return StateVector(values.begin() + t * n, values.begin() + (t + 1) * n);
  }

  friend bool operator==(const Trace&, const Trace&) = default;
};

namespace detail {

template <FunctionFamily F>
void check_in_domain(const F& fam, NodeId i, Value v, const char* who) {
  const auto& doms = fam.domains();
  if (doms.empty()) return;
  const auto& di = doms[static_cast<std::size_t>(i)];
  if (std::find(di.begin(), di.end(), v) == di.end())
    throw DomainViolation(std::string(who) + ": value outside S_" + std::to_string(i));
}

}  // namespace detail

/// Evaluates the dynamic asynchronous state function bottom-up over the
/// (t, i) grid. Case precedence is: non-participation, then (re)join, then
/// inactivity, then application of F^t = F^{eta(t) rho(t)} to the view
/// assembled through beta. rho(t-1) is never consulted at t = 0.
template <FunctionFamily F>
Trace run_delta(const F& fam, const DynamicSchedule& s, const StateVector& x) {
  const int n = fam.node_count();
  if (s.n != n) throw std::invalid_argument("run_delta: schedule and family disagree on n");
  if (static_cast<int>(x.size()) != n) throw std::invalid_argument("run_delta: bad initial state size");
  for (NodeId i = 0; i < n; ++i) detail::check_in_domain(fam, i, x[static_cast<std::size_t>(i)], "initial state");

  Trace tr;
  tr.n = n;
  tr.horizon = s.horizon;
  tr.schedule = s;
  tr.initial = x;
  tr.values.resize(static_cast<std::size_t>((s.horizon + 1) * n));
  tr.cases.resize(tr.values.size());

  const StateVector bottom = fam.bottom();
  StateVector view(static_cast<std::size_t>(n));
  for (Time t = 0; t <= s.horizon; ++t) {
    const NodeSet now = s.rho(t);
    const NodeSet before = t > 0 ? s.rho(t - 1) : NodeSet{};
    for (NodeId i = 0; i < n; ++i) {
      const auto cell = static_cast<std::size_t>(t * n + i);
      if (!now.contains(i)) {
        tr.values[cell] = bottom[static_cast<std::size_t>(i)];
        tr.cases[cell] = StepCase::NonParticipant;
      } else if (t == 0 || !before.contains(i)) {
        tr.values[cell] = x[static_cast<std::size_t>(i)];
        tr.cases[cell] = StepCase::FreshJoin;
      } else if (!s.alpha[static_cast<std::size_t>(t)].contains(i)) {
        tr.values[cell] = tr.at(t - 1, i);
        tr.cases[cell] = StepCase::Inactive;
      } else {
        for (NodeId j = 0; j < n; ++j)
          view[static_cast<std::size_t>(j)] = tr.at(s.beta(t, i, j), j);
        const Value v = fam.apply_component(s.epoch(t), now, view, i);
        detail::check_in_domain(fam, i, v, "delta");
        tr.values[cell] = v;
        tr.cases[cell] = StepCase::Activated;
      }
    }
  }
  return tr;
}

/// (F^{ep})^k(x).
template <FunctionFamily F>
StateVector run_synchronous(const F& fam, EpochId e, const NodeSet& p, StateVector x, int k) {
  for (int step = 0; step < k; ++step) {
    x = fam.apply(e, p, x);
    for (NodeId i = 0; i < fam.node_count(); ++i)
      detail::check_in_domain(fam, i, x[static_cast<std::size_t>(i)], "synchronous iterate");
  }
  return x;
}

/// Static schedule of the classic model: activation and data-flow tables
/// only, subject to the causality condition SS1.
struct StaticSchedule {
  int n = 0;
  Time horizon = 0;
  std::vector<NodeSet> alpha;    // size horizon+1, [0] unused
  std::vector<Time> beta_table;  // flat (t-1, i, j)

  Time beta(Time t, NodeId i, NodeId j) const {
    return beta_table[static_cast<std::size_t>(((t - 1) * n + i) * n + j)];
  }
};

/// Embeds a static schedule into the dynamic model: eta = 0 everywhere and
/// pi(0) = V, with the alpha/beta tables carried over verbatim.
inline DynamicSchedule embed_static(const StaticSchedule& st) {
  for (Time t = 1; t <= st.horizon; ++t)
    for (NodeId i = 0; i < st.n; ++i)
      for (NodeId j = 0; j < st.n; ++j)
        if (st.beta(t, i, j) < 0 || st.beta(t, i, j) > t - 1)
          throw std::invalid_argument("embed_static: SS1 violated at t=" + std::to_string(t));
  DynamicSchedule s;
  s.n = st.n;
  s.horizon = st.horizon;
  s.alpha = st.alpha;
  s.beta_table = st.beta_table;
  s.eta.assign(static_cast<std::size_t>(st.horizon + 1), 0);
  s.pi = {NodeSet::all(st.n)};
  return s;
}

}  // namespace dait

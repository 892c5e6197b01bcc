#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dait/conditions.hpp"
#include "dait/engine.hpp"
#include "dait/pseudocycle.hpp"
#include "dait/types.hpp"

namespace dait {

/// Per-cell instrumentation against a box family:
///   state_box       largest k <= kstar with delta^t_i(x) in B^t(k)_i
///   msgs_box        largest k with the messages to i in box k at t
///   well_formed     every later same-epoch datum from a non-participant
///                   carries its non-participating component
///   computation_box largest k with state in box k, messages in box k-1 and
///                   messages well formed; 0 when well-formedness fails
///   provisional     the quantified "all later times" was cut at the horizon
///                   inside this epoch, so the value may change if the epoch
///                   were recorded further
struct BoxAnnotation {
  int state_box = -1;
  int msgs_box = -1;
  bool well_formed = true;
  int computation_box = 0;
  bool provisional = false;
};

template <BoxFamily B>
int state_box(const Trace& tr, const B& boxes, NodeId i, Time t) {
  const DynamicSchedule& s = tr.schedule;
  const EpochId e = s.epoch(t);
  const NodeSet p = s.rho(t);
  for (int k = boxes.kstar(e, p); k >= 0; --k)
    if (boxes.contains(e, p, k, i, tr.at(t, i))) return k;
  return -1;
}

/// Every datum arriving at node i strictly after t and within t's epoch lies
/// in B^t(k) componentwise.
template <BoxFamily B>
bool messages_in_box(const Trace& tr, const B& boxes, NodeId i, int k, Time t) {
  const DynamicSchedule& s = tr.schedule;
  const EpochId e = s.epoch(t);
  const NodeSet p = s.rho(t);
  for (Time u = t + 1; u <= s.horizon && s.epoch(u) == e; ++u)
    for (NodeId j = 0; j < s.n; ++j)
      if (!boxes.contains(e, p, k, j, tr.at(s.beta(u, i, j), j))) return false;
  return true;
}

/// Every datum arriving at node i strictly after t, within t's epoch, from a
/// node that is not participating at the arrival time, carries the sender's
/// non-participating component. The non-participating component is read off
/// the trace itself: a non-participant's cell holds exactly bottom_j.
inline bool messages_well_formed(const Trace& tr, NodeId i, Time t) {
  const DynamicSchedule& s = tr.schedule;
  const EpochId e = s.epoch(t);
  for (Time u = t + 1; u <= s.horizon && s.epoch(u) == e; ++u) {
    const NodeSet at_u = s.rho(u);
    for (NodeId j = 0; j < s.n; ++j) {
      if (at_u.contains(j)) continue;
      if (tr.at(s.beta(u, i, j), j) != tr.at(u, j)) return false;
    }
  }
  return true;
}

/// Largest k such that the computation at node i is in box k at time t.
/// Non-participants satisfy every box and are reported at kstar, but callers
/// aggregating over the computation must restrict to rho(t).
template <BoxFamily B>
int computation_in_box(const Trace& tr, const B& boxes, NodeId i, Time t) {
  const DynamicSchedule& s = tr.schedule;
  const EpochId e = s.epoch(t);
  const NodeSet p = s.rho(t);
  const int kstar = boxes.kstar(e, p);
  if (!p.contains(i)) return kstar;
  if (!messages_well_formed(tr, i, t)) return 0;
  const int sb = state_box(tr, boxes, i, t);
  for (int k = std::min(sb, kstar); k >= 1; --k)
    if (messages_in_box(tr, boxes, i, k - 1, t)) return k;
  return 0;
}

template <BoxFamily B>
std::vector<BoxAnnotation> annotate_trace(const Trace& tr, const B& boxes) {
  const DynamicSchedule& s = tr.schedule;
  std::vector<BoxAnnotation> out(static_cast<std::size_t>((s.horizon + 1) * s.n));
  for (Time t = 0; t <= s.horizon; ++t) {
    const EpochId e = s.epoch(t);
    const NodeSet p = s.rho(t);
    const int kstar = boxes.kstar(e, p);
    const bool provisional = epoch_end(s, t) == s.horizon;
    for (NodeId i = 0; i < s.n; ++i) {
      BoxAnnotation a;
      a.provisional = provisional;
      a.state_box = state_box(tr, boxes, i, t);
      a.well_formed = messages_well_formed(tr, i, t);
      a.msgs_box = -1;
      for (int k = kstar; k >= 0; --k)
        if (messages_in_box(tr, boxes, i, k, t)) {
          a.msgs_box = k;
          break;
        }
      if (!p.contains(i)) {
        a.computation_box = kstar;
      } else if (!a.well_formed) {
        a.computation_box = 0;
      } else {
        a.computation_box = 0;
        for (int k = std::min(a.state_box, kstar); k >= 1; --k)
          if (k - 1 <= a.msgs_box) {
            a.computation_box = k;
            break;
          }
      }
      out[static_cast<std::size_t>(t * s.n + i)] = a;
    }
  }
  return out;
}

/// min over participating nodes of computation_box; nullopt when nobody
/// participates (every aggregate claim is vacuous then).
inline std::optional<int> aggregate_computation_box(const DynamicSchedule& s,
                                                    const std::vector<BoxAnnotation>& ann,
                                                    Time t) {
  const NodeSet p = s.rho(t);
  if (p.empty()) return std::nullopt;
  int m = std::numeric_limits<int>::max();
  p.for_each([&](NodeId i) {
    m = std::min(m, ann[static_cast<std::size_t>(t * s.n + i)].computation_box);
  });
  return m;
}

struct LemmaWitness {
  Time t = -1;
  NodeId node = -1;
  Time t2 = -1;
  int expected = -1;
  int got = -1;
  std::string note;
};

struct LemmaCheck {
  std::string id;
  bool pass = true;
  long checks = 0;
  std::optional<LemmaWitness> witness;
};

struct LemmaReport {
  bool pass = true;
  std::vector<LemmaCheck> lemmas;  // L1..L7
  long provisional_cells = 0;

  const LemmaCheck* find(const std::string& id) const {
    for (const auto& l : lemmas)
      if (l.id == id) return &l;
    return nullptr;
  }
};

/// Empirically checks the consequences of the seven box lemmas on a concrete
/// trace:
///   L1 every state sits in box 0            L2 every message sits in box 0
///   L3 once the computation at i reaches box k its state stays >= k within
///      the epoch
///   L4 well-formed messages in box k followed by an activation period put
///      the state in box k+1
///   L5 the computation in box k followed by an expiry period puts the
///      messages in box k
///   L6 each disjoint pseudocycle advances the whole computation one box
///   L7 the first pseudocycle of an epoch puts the computation in box 1
/// The boxes must have been certified (check_dynamic_aco) for every pair the
/// trace touches; certified_pairs names them.
template <BoxFamily B>
LemmaReport verify_lemmas(const Trace& tr, const B& boxes,
                          const std::vector<Period>& pseudocycles,
                          const std::vector<EpochPair>& certified_pairs,
                          ExpiryScope scope = ExpiryScope::Epoch) {
  const DynamicSchedule& s = tr.schedule;
  for (Time t = 0; t <= s.horizon; ++t) {
    const EpochPair touched{s.epoch(t), s.rho(t)};
    if (std::find(certified_pairs.begin(), certified_pairs.end(), touched) ==
        certified_pairs.end())
      throw PreconditionUnmet("trace touches uncertified pair at epoch " +
                              std::to_string(touched.epoch));
  }
  for (NodeId i = 0; i < s.n; ++i)
    if (!boxes.contains(s.epoch(0), s.rho(0), 0, i, tr.initial[static_cast<std::size_t>(i)]))
      throw PreconditionUnmet("initial state outside B(0)");

  const auto ann = annotate_trace(tr, boxes);
  auto cell = [&](Time t, NodeId i) -> const BoxAnnotation& {
    return ann[static_cast<std::size_t>(t * s.n + i)];
  };

  LemmaReport report;
  report.lemmas.resize(7);
  for (int l = 0; l < 7; ++l) report.lemmas[static_cast<std::size_t>(l)].id = "L" + std::to_string(l + 1);
  for (const auto& a : ann)
    if (a.provisional) ++report.provisional_cells;

  auto expect = [&](int lemma, bool ok, LemmaWitness w) {
    auto& check = report.lemmas[static_cast<std::size_t>(lemma - 1)];
    ++check.checks;
    if (!ok && check.pass) {
      check.pass = false;
      check.witness = std::move(w);
    }
  };

  // L1 + L2
  for (Time t = 0; t <= s.horizon; ++t)
    for (NodeId i = 0; i < s.n; ++i) {
      expect(1, cell(t, i).state_box >= 0,
             {t, i, -1, 0, cell(t, i).state_box, "state escapes box 0"});
      expect(2, cell(t, i).msgs_box >= 0,
             {t, i, -1, 0, cell(t, i).msgs_box, "messages escape box 0"});
    }

  // L3: suffix minima of state_box per node within each epoch
  for (NodeId i = 0; i < s.n; ++i) {
    Time t = 0;
    while (t <= s.horizon) {
      const Time end = epoch_end(s, t);
      std::vector<int> suffix(static_cast<std::size_t>(end - t + 1));
      int running = std::numeric_limits<int>::max();
      for (Time u = end; u >= t; --u) {
        running = std::min(running, cell(u, i).state_box);
        suffix[static_cast<std::size_t>(u - t)] = running;
      }
      for (Time u = t; u <= end; ++u) {
        const int reached = cell(u, i).computation_box;
        expect(3, suffix[static_cast<std::size_t>(u - t)] >= reached,
               {u, i, end, reached, suffix[static_cast<std::size_t>(u - t)],
                "state drops below a reached computation box"});
      }
      t = end + 1;
    }
  }

  // Split time of a pseudocycle for one node: earliest expiry end that is
  // followed by an activation period.
  auto split_of = [&](const Period& pc, NodeId i) -> Time {
    for (Time m = pc.t1; m <= pc.t2; ++m)
      if (is_expiry_period(s, i, {pc.t1, m}, scope) && is_activation_period(s, i, {m, pc.t2}))
        return m;
    return -1;
  };

  for (const auto& pc : pseudocycles) {
    const EpochId e = s.epoch(pc.t1);
    const NodeSet p = s.rho(pc.t1);
    const int kstar = boxes.kstar(e, p);
    const auto c1 = aggregate_computation_box(s, ann, pc.t1);
    const auto c2 = aggregate_computation_box(s, ann, pc.t2);

    p.for_each([&](NodeId i) {
      const Time m = split_of(pc, i);
      if (m < 0) return;  // not a pseudocycle for i; caller passed a bad list
      // L4: advance-state across the activation half. The lemma's message
      // precondition covers arrivals strictly after m, so it only applies
      // when i activates strictly after the split (the pseudocycle
      // definition also admits an activation exactly at m).
      bool activates_after_split = false;
      for (Time a = m + 1; a <= pc.t2 && !activates_after_split; ++a)
        activates_after_split = s.alpha[static_cast<std::size_t>(a)].contains(i);
      if (activates_after_split && cell(m, i).well_formed && cell(m, i).msgs_box >= 0) {
        const int want = std::min(cell(m, i).msgs_box + 1, kstar);
        expect(4, cell(pc.t2, i).state_box >= want,
               {m, i, pc.t2, want, cell(pc.t2, i).state_box,
                "activation period fails to advance the state"});
      }
      // L5: advance-messages across the expiry half
      if (c1.has_value()) {
        const int want = std::min(*c1, kstar);
        expect(5, cell(m, i).msgs_box >= want,
               {pc.t1, i, m, want, cell(m, i).msgs_box,
                "expiry period fails to deliver boxed messages"});
      }
    });

    // L6: one pseudocycle advances the whole computation one box
    if (c1.has_value() && c2.has_value()) {
      const int want = std::min(*c1 + 1, kstar);
      expect(6, *c2 >= want,
             {pc.t1, -1, pc.t2, want, *c2, "pseudocycle fails to advance the computation"});
    }

    // L7: the first pseudocycle of an epoch reaches box 1
    if (pc.t1 == epoch_start(s, pc.t1) && c2.has_value()) {
      const int want = std::min(1, kstar);
      expect(7, *c2 >= want,
             {pc.t1, -1, pc.t2, want, *c2, "first pseudocycle fails to reach box 1"});
    }
  }

  for (const auto& l : report.lemmas) report.pass = report.pass && l.pass;
  return report;
}

}  // namespace dait

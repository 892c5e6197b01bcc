#pragma once

#include <algorithm>
#include <vector>

#include "dait/schedule.hpp"
#include "dait/types.hpp"

namespace dait {

struct Period {
  Time t1 = 0;
  Time t2 = 0;
  friend bool operator==(const Period&, const Period&) = default;
};

/// The expiry definition quantifies over "all times t >= t2" with no upper
/// bound. On a finite horizon, Horizon reads that literally (quantify to the
/// recorded horizon) while Epoch quantifies only to the end of eta(t2)'s
/// epoch, which is how the convergence argument consumes expiry periods.
enum class ExpiryScope { Epoch, Horizon };

namespace detail {
inline void require_period(const DynamicSchedule& s, Period p) {
  if (p.t1 < 0 || p.t1 > p.t2 || p.t2 > s.horizon)
    throw std::out_of_range("period must satisfy 0 <= t1 <= t2 <= horizon");
}
}  // namespace detail

/// [t1,t2] is an activation period for node i: both ends share an epoch and
/// i activates at least once inside. alpha is defined from t=1, so the
/// scanned range is [max(t1,1), t2].
inline bool is_activation_period(const DynamicSchedule& s, NodeId i, Period p) {
  detail::require_period(s, p);
  if (s.epoch(p.t1) != s.epoch(p.t2)) return false;
  for (Time t = std::max<Time>(p.t1, 1); t <= p.t2; ++t)
    if (s.alpha[static_cast<std::size_t>(t)].contains(i)) return true;
  return false;
}

/// [t1,t2] is an expiry period for node i: both ends share an epoch and
/// every datum node i consumes from t2 onwards was sent at or after t1.
inline bool is_expiry_period(const DynamicSchedule& s, NodeId i, Period p,
                             ExpiryScope scope = ExpiryScope::Epoch) {
  detail::require_period(s, p);
  if (s.epoch(p.t1) != s.epoch(p.t2)) return false;
  const Time upper = scope == ExpiryScope::Horizon ? s.horizon : epoch_end(s, p.t2);
  for (Time t = std::max<Time>(p.t2, 1); t <= upper; ++t)
    for (NodeId j = 0; j < s.n; ++j)
      if (s.beta(t, i, j) < p.t1) return false;
  return true;
}

/// [t1,t2] is a pseudocycle: every node participating at t1 gets an expiry
/// period followed by an activation period inside it. Zero-width periods
/// are not pseudocycles (activation periods used by the progress argument
/// have non-zero length), so one pseudocycle always spans at least one tick.
inline bool is_pseudocycle(const DynamicSchedule& s, Period p,
                           ExpiryScope scope = ExpiryScope::Epoch) {
  detail::require_period(s, p);
  if (p.t2 <= p.t1) return false;
  if (s.epoch(p.t1) != s.epoch(p.t2)) return false;
  bool ok = true;
  s.rho(p.t1).for_each([&](NodeId i) {
    if (!ok) return;
    bool found = false;
    for (Time t = p.t1; t <= p.t2 && !found; ++t)
      found = is_expiry_period(s, i, {p.t1, t}, scope) &&
              is_activation_period(s, i, {t, p.t2});
    ok = found;
  });
  return ok;
}

struct PseudocycleCount {
  int count = 0;
  std::vector<Period> periods;
};

/// Disjoint pseudocycles of every epoch, counted greedily from each epoch's
/// first tick; pseudocycles never span epochs, so the concatenation is the
/// schedule-wide list.
inline std::vector<Period> epoch_pseudocycles(const DynamicSchedule& s,
                                              ExpiryScope scope = ExpiryScope::Epoch);

/// Greedy earliest-completion scan: repeatedly take the shortest pseudocycle
/// starting at the cursor; consecutive pseudocycles share their boundary
/// tick, mirroring how the pseudocycle definition splits a period at a
/// common time t.
inline PseudocycleCount count_disjoint_pseudocycles(const DynamicSchedule& s, Period p,
                                                    ExpiryScope scope = ExpiryScope::Epoch) {
  detail::require_period(s, p);
  PseudocycleCount out;
  Time cursor = p.t1;
  while (cursor < p.t2) {
    Time found = -1;
    for (Time t = cursor + 1; t <= p.t2; ++t) {
      if (s.epoch(t) != s.epoch(cursor)) break;  // pseudocycles cannot span epochs
      if (is_pseudocycle(s, {cursor, t}, scope)) {
        found = t;
        break;
      }
    }
    if (found < 0) break;
    out.periods.push_back({cursor, found});
    ++out.count;
    cursor = found;
  }
  return out;
}

inline std::vector<Period> epoch_pseudocycles(const DynamicSchedule& s, ExpiryScope scope) {
  std::vector<Period> out;
  for (const auto& w : epoch_windows(s)) {
    auto pcs = count_disjoint_pseudocycles(s, {w.start, w.end}, scope);
    out.insert(out.end(), pcs.periods.begin(), pcs.periods.end());
  }
  return out;
}

}  // namespace dait

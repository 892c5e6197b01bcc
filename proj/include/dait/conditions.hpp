#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dait/engine.hpp"
#include "dait/types.hpp"

namespace dait {

/// Per-(epoch, participants, node) distance over component values, with a
/// finite bound per node. The induced state distance D^{ep} is the max over
/// participating nodes.
template <typename D>
concept DistanceFamily = requires(const D d, EpochId e, const NodeSet& p, NodeId i, Value u,
                                  Value v) {
  { d.distance(e, p, i, u, v) } -> std::convertible_to<std::int64_t>;
  { d.bound(e, p, i) } -> std::convertible_to<std::int64_t>;
};

template <DistanceFamily D>
std::int64_t induced_distance(const D& dist, EpochId e, const NodeSet& p, const StateVector& x,
                              const StateVector& y) {
  std::int64_t m = 0;
  p.for_each([&](NodeId i) {
    m = std::max(m, static_cast<std::int64_t>(
                        dist.distance(e, p, i, x[static_cast<std::size_t>(i)],
                                      y[static_cast<std::size_t>(i)])));
  });
  return m;
}

/// x in A_p: every node outside p carries its non-participating component.
inline bool is_accordant(const StateVector& x, const NodeSet& p, const StateVector& bottom) {
  for (NodeId i = 0; i < static_cast<NodeId>(x.size()); ++i)
    if (!p.contains(i) && x[static_cast<std::size_t>(i)] != bottom[static_cast<std::size_t>(i)])
      return false;
  return true;
}

/// x =_p y: equality restricted to participants.
inline bool equal_on(const NodeSet& p, const StateVector& x, const StateVector& y) {
  bool eq = true;
  p.for_each([&](NodeId i) {
    if (x[static_cast<std::size_t>(i)] != y[static_cast<std::size_t>(i)]) eq = false;
  });
  return eq;
}

struct EpochPair {
  EpochId epoch = 0;
  NodeSet participants;
  friend bool operator==(const EpochPair&, const EpochPair&) = default;
};

namespace detail {

inline std::uint64_t product_size(const std::vector<std::vector<Value>>& per_node) {
  std::uint64_t total = 1;
  for (const auto& d : per_node) {
    if (d.empty()) return 0;
    if (total > std::numeric_limits<std::uint64_t>::max() / d.size())
      return std::numeric_limits<std::uint64_t>::max();
    total *= d.size();
  }
  return total;
}

/// Odometer over per-node candidate lists, in lexicographic order with node
/// 0 most significant. The visitor returns false to stop; so does this.
template <typename Fn>
bool for_each_product(const std::vector<std::vector<Value>>& per_node, Fn&& visit) {
  const std::size_t n = per_node.size();
  for (const auto& d : per_node)
    if (d.empty()) return true;  // empty product: nothing to visit
  std::vector<std::size_t> idx(n, 0);
  StateVector state(n);
  for (std::size_t i = 0; i < n; ++i) state[i] = per_node[i][0];
  while (true) {
    if (!visit(const_cast<const StateVector&>(state))) return false;
    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      if (++idx[pos] < per_node[pos].size()) {
        state[pos] = per_node[pos][idx[pos]];
        break;
      }
      idx[pos] = 0;
      state[pos] = per_node[pos][0];
      if (pos == 0) return true;
    }
    if (n == 0) return true;
  }
}

inline void require_budget(std::uint64_t size, std::uint64_t budget, const char* what) {
  if (size > budget)
    throw EnumerationTooLarge(std::string(what) + ": product space of " + std::to_string(size) +
                              " states exceeds budget " + std::to_string(budget));
}

inline std::vector<std::vector<Value>> accordant_candidates(
    const std::vector<std::vector<Value>>& domains, const NodeSet& p, const StateVector& bottom) {
  std::vector<std::vector<Value>> per_node(domains.size());
  for (NodeId i = 0; i < static_cast<NodeId>(domains.size()); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (p.contains(i))
      per_node[ui] = domains[ui];
    else
      per_node[ui] = {bottom[ui]};
  }
  return per_node;
}

template <FunctionFamily F>
const std::vector<std::vector<Value>>& enumerable_domains(const F& fam) {
  const auto& doms = fam.domains();
  if (doms.empty() || static_cast<int>(doms.size()) != fam.node_count())
    throw std::invalid_argument("checker requires finitely enumerable component domains");
  return doms;
}

}  // namespace detail

struct CheckWitness {
  std::string condition;
  EpochId epoch = -1;
  NodeSet participants;
  EpochId epoch2 = -1;       // second pair, DA4 only
  NodeSet participants2;     // second pair, DA4 only
  NodeId node = -1;
  int box = -1;
  std::vector<StateVector> states;
  std::string note;
};

struct ConditionCheck {
  std::string condition;
  bool pass = true;
  std::optional<CheckWitness> witness;
};

struct CheckReport {
  bool pass = true;
  std::vector<ConditionCheck> conditions;

  const ConditionCheck* find(const std::string& id) const {
    for (const auto& c : conditions)
      if (c.condition == id) return &c;
    return nullptr;
  }

  std::vector<std::string> failed() const {
    std::vector<std::string> out;
    for (const auto& c : conditions)
      if (!c.pass) out.push_back(c.condition);
    return out;
  }

  const CheckWitness* first_witness() const {
    for (const auto& c : conditions)
      if (!c.pass && c.witness) return &*c.witness;
    return nullptr;
  }
};

struct FixedPointResult {
  StateVector state;
  int steps = 0;  // first k with F^k(bottom) = F^{k+1}(bottom)
};

/// Walks the chain bottom, F(bottom), F^2(bottom), ... until two consecutive
/// elements agree. Revisiting an earlier element means the chain cycles and
/// no fixed point is reachable this way, which disqualifies F as a dynamic
/// AMCO for this (epoch, participants).
template <FunctionFamily F>
FixedPointResult find_fixed_point(const F& fam, EpochId e, const NodeSet& p,
                                  int max_steps = 100000) {
  StateVector cur = fam.bottom();
  std::set<StateVector> seen;
  seen.insert(cur);
  for (int k = 0; k < max_steps; ++k) {
    StateVector nxt = fam.apply(e, p, cur);
    if (nxt == cur) return {std::move(cur), k};
    if (!seen.insert(nxt).second)
      throw NoFixedPoint("orbit of bottom cycles without reaching a fixed point (epoch " +
                         std::to_string(e) + ")");
    cur = std::move(nxt);
  }
  throw NoFixedPoint("no fixed point within max_steps");
}

/// Checks DU1-DU5 for every supplied (epoch, participants) pair by
/// exhaustive enumeration. DU3/DU4 quantify over accordant states, DU5 over
/// the whole product space; DU2's supplied bound is cross-validated against
/// the enumerated maximum. States are visited lexicographically, so a
/// failing condition reports its lexicographically smallest witness.
template <FunctionFamily F, DistanceFamily D>
CheckReport check_dynamic_amco(const F& fam, const D& dist, const std::vector<EpochPair>& pairs,
                               std::uint64_t budget = 1'000'000) {
  const auto& domains = detail::enumerable_domains(fam);
  const StateVector bottom = fam.bottom();
  const int n = fam.node_count();

  CheckReport report;
  report.conditions.resize(5);
  for (int c = 0; c < 5; ++c) report.conditions[c].condition = "DU" + std::to_string(c + 1);
  auto fail = [&](int idx, CheckWitness w) {
    auto& cond = report.conditions[static_cast<std::size_t>(idx)];
    if (cond.pass) {
      w.condition = cond.condition;
      cond.pass = false;
      cond.witness = std::move(w);
    }
  };

  for (const auto& [e, p] : pairs) {
    // DU1 + DU2: component-level sweep
    for (NodeId i = 0; i < n; ++i) {
      const auto& di = domains[static_cast<std::size_t>(i)];
      const std::int64_t claimed = dist.bound(e, p, i);
      std::int64_t observed = 0;
      for (Value u : di)
        for (Value v : di) {
          const std::int64_t dv = dist.distance(e, p, i, u, v);
          observed = std::max(observed, dv);
          const bool zero_ok = (dv == 0) == (u == v);
          if (dv < 0 || !zero_ok) {
            CheckWitness w;
            w.epoch = e;
            w.participants = p;
            w.node = i;
            w.states = {{u}, {v}};
            w.note = dv < 0 ? "distance is negative" : "d = 0 must hold exactly for equal values";
            fail(0, std::move(w));
          }
        }
      if (observed > claimed) {
        CheckWitness w;
        w.epoch = e;
        w.participants = p;
        w.node = i;
        w.note = "observed max distance " + std::to_string(observed) + " exceeds supplied bound " +
                 std::to_string(claimed);
        fail(1, std::move(w));
      }
    }

    const auto accordant = detail::accordant_candidates(domains, p, bottom);
    detail::require_budget(detail::product_size(accordant), budget, "check_dynamic_amco");

    // DU3: strict contraction on orbits over accordant states
    if (report.conditions[2].pass) {
      detail::for_each_product(accordant, [&](const StateVector& x) {
        const StateVector fx = fam.apply(e, p, x);
        if (!equal_on(p, x, fx)) {
          const StateVector ffx = fam.apply(e, p, fx);
          if (induced_distance(dist, e, p, x, fx) <= induced_distance(dist, e, p, fx, ffx)) {
            CheckWitness w;
            w.epoch = e;
            w.participants = p;
            w.states = {x, fx, ffx};
            w.note = "D(x,F(x)) <= D(F(x),F2(x))";
            fail(2, std::move(w));
            return false;
          }
        }
        return true;
      });
    }

    // DU4: strict contraction towards accordant fixed points
    if (report.conditions[3].pass) {
      std::vector<StateVector> fixed;
      detail::for_each_product(accordant, [&](const StateVector& x) {
        if (fam.apply(e, p, x) == x) fixed.push_back(x);
        return true;
      });
      for (const auto& xstar : fixed) {
        if (!report.conditions[3].pass) break;
        detail::for_each_product(accordant, [&](const StateVector& x) {
          if (equal_on(p, x, xstar)) return true;
          const StateVector fx = fam.apply(e, p, x);
          if (induced_distance(dist, e, p, xstar, x) <=
              induced_distance(dist, e, p, xstar, fx)) {
            CheckWitness w;
            w.epoch = e;
            w.participants = p;
            w.states = {xstar, x};
            w.note = fam.apply(e, p, x) == x
                         ? "two distinct fixed points; no contraction towards either"
                         : "D(x*,x) <= D(x*,F(x))";
            fail(3, std::move(w));
            return false;
          }
          return true;
        });
      }
    }

    // DU5: F lands in the accordant set from anywhere in S
    if (report.conditions[4].pass) {
      detail::require_budget(detail::product_size(domains), budget, "check_dynamic_amco");
      detail::for_each_product(domains, [&](const StateVector& x) {
        const StateVector fx = fam.apply(e, p, x);
        if (!is_accordant(fx, p, bottom)) {
          CheckWitness w;
          w.epoch = e;
          w.participants = p;
          w.states = {x, fx};
          w.note = "F(x) is not accordant with p";
          fail(4, std::move(w));
          return false;
        }
        return true;
      });
    }
  }

  for (const auto& c : report.conditions) report.pass = report.pass && c.pass;
  return report;
}

/// Nested box families: membership per (epoch, participants, box index,
/// node, value), with a collapse index kstar and the collapsed state xstar
/// per pair. Boxes are constant for k >= kstar.
template <typename B>
concept BoxFamily = requires(const B b, EpochId e, const NodeSet& p, int k, NodeId i, Value v) {
  { b.contains(e, p, k, i, v) } -> std::convertible_to<bool>;
  { b.kstar(e, p) } -> std::convertible_to<int>;
  { b.xstar(e, p) } -> std::convertible_to<StateVector>;
};

/// Boxes induced by a distance family around the per-pair fixed point:
/// B(0)_i = S_i, and for k >= 1
///   B(k)_i = { bottom_i }                                  if i not in p
///   B(k)_i = { v | d_i(v, x*_i) <= d_max - (k - 1) }        if i in p
/// with d_max the largest per-node bound over p and kstar = d_max + 1, the
/// first index whose box is exactly { x* }. The subtraction saturates at 0
/// so boxes stay constant beyond kstar.
template <DistanceFamily D>
class MetricBoxes {
 public:
  MetricBoxes(D dist, StateVector bottom) : dist_(std::move(dist)), bottom_(std::move(bottom)) {}

  void add_pair(EpochId e, const NodeSet& p, StateVector xstar, std::int64_t d_max) {
    entries_[key(e, p)] = Entry{std::move(xstar), d_max};
  }

  bool has_pair(EpochId e, const NodeSet& p) const { return entries_.count(key(e, p)) != 0; }

  bool contains(EpochId e, const NodeSet& p, int k, NodeId i, Value v) const {
    if (k <= 0) return true;  // B(0)_i = S_i
    const Entry& entry = lookup(e, p);
    const auto ui = static_cast<std::size_t>(i);
    if (!p.contains(i)) return v == bottom_[ui];
    const std::int64_t slack = std::max<std::int64_t>(0, entry.d_max - (k - 1));
    return dist_.distance(e, p, i, v, entry.xstar[ui]) <= slack;
  }

  int kstar(EpochId e, const NodeSet& p) const {
    return static_cast<int>(lookup(e, p).d_max) + 1;
  }

  const StateVector& xstar(EpochId e, const NodeSet& p) const { return lookup(e, p).xstar; }

  const StateVector& bottom() const { return bottom_; }
  const D& distance_family() const { return dist_; }

 private:
  struct Entry {
    StateVector xstar;
    std::int64_t d_max = 0;
  };
  static std::pair<EpochId, std::uint64_t> key(EpochId e, const NodeSet& p) {
    return {e, p.bits()};
  }
  const Entry& lookup(EpochId e, const NodeSet& p) const {
    auto it = entries_.find(key(e, p));
    if (it == entries_.end())
      throw PreconditionUnmet("no boxes recorded for epoch " + std::to_string(e) +
                              " with this participant set");
    return it->second;
  }

  D dist_;
  StateVector bottom_;
  std::map<std::pair<EpochId, std::uint64_t>, Entry> entries_;
};

template <FunctionFamily F, DistanceFamily D>
void extend_boxes(MetricBoxes<D>& boxes, const F& fam, EpochId e, const NodeSet& p,
                  int max_steps = 100000) {
  auto fp = find_fixed_point(fam, e, p, max_steps);
  std::int64_t d_max = 0;
  p.for_each([&](NodeId i) {
    d_max = std::max(d_max, static_cast<std::int64_t>(boxes.distance_family().bound(e, p, i)));
  });
  boxes.add_pair(e, p, std::move(fp.state), d_max);
}

/// The AMCO-to-ACO reduction for one (epoch, participants) pair: finds the
/// fixed point by iterating from bottom and wraps the distance family into
/// the induced boxes. Callers wanting several pairs can keep extending the
/// result via extend_boxes.
template <FunctionFamily F, DistanceFamily D>
MetricBoxes<D> amco_to_aco(const F& fam, const D& dist, EpochId e, const NodeSet& p,
                           int max_steps = 100000) {
  MetricBoxes<D> boxes(dist, fam.bottom());
  extend_boxes(boxes, fam, e, p, max_steps);
  return boxes;
}

template <FunctionFamily F, DistanceFamily D>
MetricBoxes<D> build_metric_boxes(const F& fam, const D& dist, const std::vector<EpochPair>& pairs,
                                  int max_steps = 100000) {
  MetricBoxes<D> boxes(dist, fam.bottom());
  for (const auto& [e, p] : pairs) extend_boxes(boxes, fam, e, p, max_steps);
  return boxes;
}

/// Materialized per-box membership lists over the enumerable domains,
/// for boxes 0 .. kstar+1.
template <FunctionFamily F, BoxFamily B>
std::vector<std::vector<std::vector<Value>>> materialize_boxes(const F& fam, const B& boxes,
                                                               EpochId e, const NodeSet& p) {
  const auto& domains = detail::enumerable_domains(fam);
  const int kstar = boxes.kstar(e, p);
  std::vector<std::vector<std::vector<Value>>> lists(static_cast<std::size_t>(kstar + 2));
  for (int k = 0; k <= kstar + 1; ++k) {
    auto& per_node = lists[static_cast<std::size_t>(k)];
    per_node.resize(domains.size());
    for (NodeId i = 0; i < fam.node_count(); ++i)
      for (Value v : domains[static_cast<std::size_t>(i)])
        if (boxes.contains(e, p, k, i, v)) per_node[static_cast<std::size_t>(i)].push_back(v);
  }
  return lists;
}

/// Checks DA1-DA5 for every supplied pair by enumeration:
///   DA1 closure of B(0) under F, DA2 progress on accordant states,
///   DA3 collapse of B(kstar) and B(kstar+1) to { xstar },
///   DA4 equality of all initial boxes across the supplied pairs,
///   DA5 membership of bottom components for non-participants.
template <FunctionFamily F, BoxFamily B>
CheckReport check_dynamic_aco(const F& fam, const B& boxes, const std::vector<EpochPair>& pairs,
                              std::uint64_t budget = 1'000'000) {
  const int n = fam.node_count();
  const StateVector bottom = fam.bottom();

  CheckReport report;
  report.conditions.resize(5);
  for (int c = 0; c < 5; ++c) report.conditions[c].condition = "DA" + std::to_string(c + 1);
  auto fail = [&](int idx, CheckWitness w) {
    auto& cond = report.conditions[static_cast<std::size_t>(idx)];
    if (cond.pass) {
      w.condition = cond.condition;
      cond.pass = false;
      cond.witness = std::move(w);
    }
  };

  std::vector<std::vector<std::vector<std::vector<Value>>>> all_lists;
  all_lists.reserve(pairs.size());
  for (const auto& [e, p] : pairs) all_lists.push_back(materialize_boxes(fam, boxes, e, p));

  for (std::size_t pe = 0; pe < pairs.size(); ++pe) {
    const auto& [e, p] = pairs[pe];
    const auto& lists = all_lists[pe];
    const int kstar = boxes.kstar(e, p);
    const StateVector xstar = boxes.xstar(e, p);
    auto in_box = [&](int k, const StateVector& x) {
      for (NodeId i = 0; i < n; ++i)
        if (!boxes.contains(e, p, k, i, x[static_cast<std::size_t>(i)])) return i;
      return static_cast<NodeId>(-1);
    };

    // DA1
    if (report.conditions[0].pass) {
      detail::require_budget(detail::product_size(lists[0]), budget, "check_dynamic_aco");
      detail::for_each_product(lists[0], [&](const StateVector& x) {
        const StateVector fx = fam.apply(e, p, x);
        const NodeId bad = in_box(0, fx);
        if (bad >= 0) {
          CheckWitness w;
          w.epoch = e;
          w.participants = p;
          w.node = bad;
          w.box = 0;
          w.states = {x, fx};
          w.note = "F(x) escapes B(0)";
          fail(0, std::move(w));
          return false;
        }
        return true;
      });
    }

    // DA2: accordant members of B(k) advance to B(k+1)
    if (report.conditions[1].pass) {
      for (int k = 0; k <= kstar && report.conditions[1].pass; ++k) {
        auto per_node = lists[static_cast<std::size_t>(k)];
        bool feasible = true;
        for (NodeId i = 0; i < n; ++i) {
          if (p.contains(i)) continue;
          const auto ui = static_cast<std::size_t>(i);
          if (boxes.contains(e, p, k, i, bottom[ui]))
            per_node[ui] = {bottom[ui]};
          else
            feasible = false;  // A_p and B(k) are disjoint: nothing to check
        }
        if (!feasible) continue;
        detail::require_budget(detail::product_size(per_node), budget, "check_dynamic_aco");
        detail::for_each_product(per_node, [&](const StateVector& x) {
          const StateVector fx = fam.apply(e, p, x);
          const NodeId bad = in_box(k + 1, fx);
          if (bad >= 0) {
            CheckWitness w;
            w.epoch = e;
            w.participants = p;
            w.node = bad;
            w.box = k;
            w.states = {x, fx};
            w.note = "accordant x in B(k) but F(x) outside B(k+1)";
            fail(1, std::move(w));
            return false;
          }
          return true;
        });
      }
    }

    // DA3: B(kstar) and B(kstar+1) are exactly { xstar }
    if (report.conditions[2].pass) {
      for (int k = kstar; k <= kstar + 1 && report.conditions[2].pass; ++k) {
        for (NodeId i = 0; i < n; ++i) {
          const auto& cell = lists[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
          if (cell.size() != 1 || cell[0] != xstar[static_cast<std::size_t>(i)]) {
            CheckWitness w;
            w.epoch = e;
            w.participants = p;
            w.node = i;
            w.box = k;
            w.states = {xstar};
            w.note = "B(k) is not the singleton { x* } at node " + std::to_string(i);
            fail(2, std::move(w));
            break;
          }
        }
      }
    }

    // DA5: bottom components sit in every box of non-participants
    if (report.conditions[4].pass) {
      for (int k = 0; k <= kstar + 1 && report.conditions[4].pass; ++k)
        for (NodeId i = 0; i < n && report.conditions[4].pass; ++i) {
          if (p.contains(i)) continue;
          if (!boxes.contains(e, p, k, i, bottom[static_cast<std::size_t>(i)])) {
            CheckWitness w;
            w.epoch = e;
            w.participants = p;
            w.node = i;
            w.box = k;
            w.note = "bottom_i missing from B(k)_i for non-participant";
            fail(4, std::move(w));
          }
        }
    }
  }

  // DA4: all initial boxes agree across the supplied pairs
  if (report.conditions[3].pass) {
    for (std::size_t a = 0; a < pairs.size() && report.conditions[3].pass; ++a)
      for (std::size_t b = a + 1; b < pairs.size() && report.conditions[3].pass; ++b)
        for (NodeId i = 0; i < n; ++i) {
          const auto ui = static_cast<std::size_t>(i);
          if (all_lists[a][0][ui] != all_lists[b][0][ui]) {
            CheckWitness w;
            w.epoch = pairs[a].epoch;
            w.participants = pairs[a].participants;
            w.epoch2 = pairs[b].epoch;
            w.participants2 = pairs[b].participants;
            w.node = i;
            w.box = 0;
            w.note = "B(0)_i differs between the two pairs";
            fail(3, std::move(w));
            break;
          }
        }
  }

  for (const auto& c : report.conditions) report.pass = report.pass && c.pass;
  return report;
}

/// Metric boxes computed on first use; lets the harness certify only the
/// (epoch, participants) pairs a given run actually visits. Not safe for
/// concurrent use.
template <FunctionFamily F, DistanceFamily D>
class LazyMetricBoxes {
 public:
  LazyMetricBoxes(const F& fam, D dist, int max_steps = 100000)
      : fam_(&fam), max_steps_(max_steps), boxes_(std::move(dist), fam.bottom()) {}

  bool contains(EpochId e, const NodeSet& p, int k, NodeId i, Value v) const {
    if (k <= 0) return true;
    ensure(e, p);
    return boxes_.contains(e, p, k, i, v);
  }
  int kstar(EpochId e, const NodeSet& p) const {
    ensure(e, p);
    return boxes_.kstar(e, p);
  }
  const StateVector& xstar(EpochId e, const NodeSet& p) const {
    ensure(e, p);
    return boxes_.xstar(e, p);
  }
  const MetricBoxes<D>& materialized() const { return boxes_; }

 private:
  void ensure(EpochId e, const NodeSet& p) const {
    if (!boxes_.has_pair(e, p)) extend_boxes(boxes_, *fam_, e, p, max_steps_);
  }

  const F* fam_;
  int max_steps_;
  mutable MetricBoxes<D> boxes_;
};

}  // namespace dait

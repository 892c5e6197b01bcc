#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dait/conditions.hpp"
#include "dait/engine.hpp"
#include "dait/types.hpp"

namespace dait {

inline constexpr Value kNoEdge = -1;

/// One epoch of a routing scenario: a weighted digraph (weights[i][j] is the
/// cost of the link i -> j, kNoEdge for absent links) and the nodes
/// participating while it is in force.
struct RoutingEpoch {
  std::vector<std::vector<Value>> weights;
  NodeSet participants;
};

/// Shortest-path-to-destination instance with values truncated at cap:
/// component domains are {0..cap} plus cap+1 standing for "unreachable".
struct RoutingInstance {
  std::vector<RoutingEpoch> epochs;
  NodeId destination = 0;
  Value cap = 0;

  int node_count() const {
    return epochs.empty() ? 0 : static_cast<int>(epochs.front().weights.size());
  }
};

/// Distance-vector relaxation towards a single destination. A participating
/// node recomputes its estimate from participating neighbours only; the
/// destination pins itself to 0; everyone else reports the non-participating
/// state. Epoch ids beyond the instance's list reuse its last epoch's
/// weights, so schedules may switch epochs more often than the instance
/// changes topology.
class MinRoutingFamily {
 public:
  explicit MinRoutingFamily(RoutingInstance inst) : inst_(std::move(inst)) {
    const int n = inst_.node_count();
    if (n < 1 || n > kMaxNodes) throw std::invalid_argument("routing: bad node count");
    if (inst_.cap < 1) throw std::invalid_argument("routing: cap must be >= 1");
    if (inst_.destination < 0 || inst_.destination >= n)
      throw std::invalid_argument("routing: destination out of range");
    for (const auto& ep : inst_.epochs) {
      if (static_cast<int>(ep.weights.size()) != n)
        throw std::invalid_argument("routing: ragged weight matrix");
      for (const auto& row : ep.weights) {
        if (static_cast<int>(row.size()) != n)
          throw std::invalid_argument("routing: ragged weight matrix");
        for (Value w : row)
          if (w != kNoEdge && w < 1) throw std::invalid_argument("routing: weights must be >= 1");
      }
    }
    bottom_.assign(static_cast<std::size_t>(n), unreachable());
    bottom_[static_cast<std::size_t>(inst_.destination)] = 0;
    domains_.resize(static_cast<std::size_t>(n));
    for (auto& d : domains_) {
      d.resize(static_cast<std::size_t>(inst_.cap + 2));
      std::iota(d.begin(), d.end(), Value{0});
    }
  }

  Value unreachable() const { return inst_.cap + 1; }
  int node_count() const { return inst_.node_count(); }
  const StateVector& bottom() const { return bottom_; }
  const std::vector<std::vector<Value>>& domains() const { return domains_; }
  const RoutingInstance& instance() const { return inst_; }

  Value apply_component(EpochId e, const NodeSet& p, const StateVector& x, NodeId i) const {
    if (!p.contains(i)) return bottom_[static_cast<std::size_t>(i)];
    if (i == inst_.destination) return 0;
    const auto& w = epoch_weights(e);
    Value best = unreachable();
    p.for_each([&](NodeId j) {
      const Value wij = w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (wij == kNoEdge) return;
      const Value xj = x[static_cast<std::size_t>(j)];
      if (xj >= unreachable()) return;
      const Value cand = wij + xj;
      best = std::min(best, cand > inst_.cap ? unreachable() : cand);
    });
    return best;
  }

  StateVector apply(EpochId e, const NodeSet& p, const StateVector& x) const {
    StateVector out(x.size());
    for (NodeId i = 0; i < node_count(); ++i)
      out[static_cast<std::size_t>(i)] = apply_component(e, p, x, i);
    return out;
  }

  /// The (epoch, participants) pairs the instance declares.
  std::vector<EpochPair> declared_pairs() const {
    std::vector<EpochPair> pairs;
    for (std::size_t e = 0; e < inst_.epochs.size(); ++e)
      pairs.push_back({static_cast<EpochId>(e), inst_.epochs[e].participants});
    return pairs;
  }

 private:
  const std::vector<std::vector<Value>>& epoch_weights(EpochId e) const {
    const auto last = inst_.epochs.size() - 1;
    const auto idx = e < 0 ? 0 : std::min<std::size_t>(static_cast<std::size_t>(e), last);
    return inst_.epochs[idx].weights;
  }

  RoutingInstance inst_;
  StateVector bottom_;
  std::vector<std::vector<Value>> domains_;
};

/// The standard truncated routing distance: d_i(u, v) = 0 when u = v and
/// cap + 2 - min(u, v) otherwise, so disagreements at short path lengths
/// count as large distances. Epoch- and participant-independent.
class RoutingDistance {
 public:
  explicit RoutingDistance(Value cap) : cap_(cap) {}

  std::int64_t distance(EpochId, const NodeSet&, NodeId, Value u, Value v) const {
    if (u == v) return 0;
    return cap_ + 2 - std::min(u, v);
  }
  std::int64_t bound(EpochId, const NodeSet&, NodeId) const { return cap_ + 2; }

 private:
  Value cap_;
};

inline std::pair<MinRoutingFamily, RoutingDistance> build_min_routing(const RoutingInstance& inst) {
  MinRoutingFamily fam(inst);
  RoutingDistance dist(inst.cap);
  return {std::move(fam), std::move(dist)};
}

/// Min-consensus on {0..M}: every node takes the minimum over the
/// participants and itself, so a participating node never forgets its own
/// value. Not a dynamic AMCO (every constant vector is fixed); used to
/// exercise the engine and the oracle checks.
class MinConsensusFamily {
 public:
  MinConsensusFamily(int n, Value max_value) : n_(n), max_(max_value) {
    if (n < 1 || n > kMaxNodes) throw std::invalid_argument("consensus: bad node count");
    if (max_value < 1) throw std::invalid_argument("consensus: M must be >= 1");
    bottom_.assign(static_cast<std::size_t>(n), max_);
    domains_.resize(static_cast<std::size_t>(n));
    for (auto& d : domains_) {
      d.resize(static_cast<std::size_t>(max_ + 1));
      std::iota(d.begin(), d.end(), Value{0});
    }
  }

  int node_count() const { return n_; }
  Value max_value() const { return max_; }
  const StateVector& bottom() const { return bottom_; }
  const std::vector<std::vector<Value>>& domains() const { return domains_; }

  Value apply_component(EpochId, const NodeSet& p, const StateVector& x, NodeId i) const {
    Value best = x[static_cast<std::size_t>(i)];
    p.for_each([&](NodeId j) { best = std::min(best, x[static_cast<std::size_t>(j)]); });
    return best;
  }

  StateVector apply(EpochId e, const NodeSet& p, const StateVector& x) const {
    StateVector out(x.size());
    for (NodeId i = 0; i < n_; ++i) out[static_cast<std::size_t>(i)] = apply_component(e, p, x, i);
    return out;
  }

 private:
  int n_;
  Value max_;
  StateVector bottom_;
  std::vector<std::vector<Value>> domains_;
};

inline MinConsensusFamily build_min_consensus(int n, Value max_value) {
  return MinConsensusFamily(n, max_value);
}

/// F(x) = 1 - x componentwise on {0,1}^n. Two-cycles everywhere: no fixed
/// point, so fixed-point search must fail.
class FlipFamily {
 public:
  explicit FlipFamily(int n) : n_(n) {
    bottom_.assign(static_cast<std::size_t>(n), 0);
    domains_.assign(static_cast<std::size_t>(n), {0, 1});
  }

  int node_count() const { return n_; }
  const StateVector& bottom() const { return bottom_; }
  const std::vector<std::vector<Value>>& domains() const { return domains_; }

  Value apply_component(EpochId, const NodeSet&, const StateVector& x, NodeId i) const {
    return 1 - x[static_cast<std::size_t>(i)];
  }
  StateVector apply(EpochId e, const NodeSet& p, const StateVector& x) const {
    StateVector out(x.size());
    for (NodeId i = 0; i < n_; ++i) out[static_cast<std::size_t>(i)] = apply_component(e, p, x, i);
    return out;
  }

 private:
  int n_;
  StateVector bottom_;
  std::vector<std::vector<Value>> domains_;
};

/// F(x) = x on a shared multi-value domain. Every state is fixed, which
/// breaks contraction towards fixed points (DU4) and nothing else under
/// full participation.
class IdentityFamily {
 public:
  IdentityFamily(int n, std::vector<Value> domain) : n_(n) {
    if (domain.size() < 2) throw std::invalid_argument("identity control needs >= 2 values");
    std::sort(domain.begin(), domain.end());
    bottom_.assign(static_cast<std::size_t>(n), domain.front());
    domains_.assign(static_cast<std::size_t>(n), domain);
  }

  int node_count() const { return n_; }
  const StateVector& bottom() const { return bottom_; }
  const std::vector<std::vector<Value>>& domains() const { return domains_; }

  Value apply_component(EpochId, const NodeSet&, const StateVector& x, NodeId i) const {
    return x[static_cast<std::size_t>(i)];
  }
  StateVector apply(EpochId, const NodeSet&, const StateVector& x) const { return x; }

 private:
  int n_;
  StateVector bottom_;
  std::vector<std::vector<Value>> domains_;
};

/// F(x) = c for a fixed target c, with bottom distinct from c.
class ConstantFamily {
 public:
  ConstantFamily(std::vector<std::vector<Value>> domains, StateVector bottom, StateVector target)
      : domains_(std::move(domains)), bottom_(std::move(bottom)), target_(std::move(target)) {}

  int node_count() const { return static_cast<int>(target_.size()); }
  const StateVector& bottom() const { return bottom_; }
  const std::vector<std::vector<Value>>& domains() const { return domains_; }

  Value apply_component(EpochId, const NodeSet&, const StateVector&, NodeId i) const {
    return target_[static_cast<std::size_t>(i)];
  }
  StateVector apply(EpochId, const NodeSet&, const StateVector&) const { return target_; }

 private:
  std::vector<std::vector<Value>> domains_;
  StateVector bottom_;
  StateVector target_;
};

/// Discrete metric over component values: 0 when equal, 1 otherwise.
class DiscreteDistance {
 public:
  std::int64_t distance(EpochId, const NodeSet&, NodeId, Value u, Value v) const {
    return u == v ? 0 : 1;
  }
  std::int64_t bound(EpochId, const NodeSet&, NodeId) const { return 1; }
};

/// Box family stored as explicit per-pair membership sets; used to hand-
/// build boxes in tests and for the DA4 negative control.
class ExplicitBoxes {
 public:
  struct PairBoxes {
    int kstar = 0;
    StateVector xstar;
    // per box k in [0, kstar+1], per node: allowed values
    std::vector<std::vector<std::set<Value>>> membership;
  };

  void add_pair(EpochId e, const NodeSet& p, PairBoxes pb) {
    entries_[{e, p.bits()}] = std::move(pb);
  }

  bool contains(EpochId e, const NodeSet& p, int k, NodeId i, Value v) const {
    const auto& pb = lookup(e, p);
    const int idx = std::min(k, pb.kstar + 1);  // boxes constant beyond kstar
    return pb.membership[static_cast<std::size_t>(idx)][static_cast<std::size_t>(i)].count(v) != 0;
  }
  int kstar(EpochId e, const NodeSet& p) const { return lookup(e, p).kstar; }
  const StateVector& xstar(EpochId e, const NodeSet& p) const { return lookup(e, p).xstar; }

 private:
  const PairBoxes& lookup(EpochId e, const NodeSet& p) const {
    auto it = entries_.find({e, p.bits()});
    if (it == entries_.end()) throw PreconditionUnmet("no explicit boxes for this pair");
    return it->second;
  }
  std::map<std::pair<EpochId, std::uint64_t>, PairBoxes> entries_;
};

/// Negative controls: the flip family (no fixed point), the identity family
/// (DU4 fails), and a constant family with hand-built boxes whose epoch-1
/// initial box differs from epoch 0's (DA4 fails). Each is built to trip
/// exactly the condition it names.
struct NegativeControls {
  FlipFamily flip;
  IdentityFamily identity;
  ConstantFamily da4_family;
  ExplicitBoxes da4_boxes;
  std::vector<EpochPair> da4_pairs;
};

inline NegativeControls build_negative_controls(int n = 2) {
  FlipFamily flip(n);
  IdentityFamily identity(n, {0, 1});

  const std::vector<std::vector<Value>> domains(static_cast<std::size_t>(n),
                                                std::vector<Value>{0, 1});
  const StateVector bottom(static_cast<std::size_t>(n), 1);
  const StateVector target(static_cast<std::size_t>(n), 0);
  ConstantFamily constant(domains, bottom, target);

  const NodeSet everyone = NodeSet::all(n);
  auto make_pair_boxes = [&](bool narrow_first_box) {
    ExplicitBoxes::PairBoxes pb;
    pb.kstar = 1;
    pb.xstar = target;
    pb.membership.resize(3);
    for (int k = 0; k <= 2; ++k) {
      auto& per_node = pb.membership[static_cast<std::size_t>(k)];
      per_node.resize(static_cast<std::size_t>(n));
      for (NodeId i = 0; i < n; ++i) {
        if (k == 0)
          per_node[static_cast<std::size_t>(i)] =
              (narrow_first_box && i == 0) ? std::set<Value>{0} : std::set<Value>{0, 1};
        else
          per_node[static_cast<std::size_t>(i)] = {0};
      }
    }
    return pb;
  };

  ExplicitBoxes boxes;
  boxes.add_pair(0, everyone, make_pair_boxes(false));
  boxes.add_pair(1, everyone, make_pair_boxes(true));  // B(0)_0 shrinks: DA4 violation

  NegativeControls out{std::move(flip), std::move(identity), std::move(constant),
                       std::move(boxes),
                       {{0, everyone}, {1, everyone}}};
  return out;
}

}  // namespace dait

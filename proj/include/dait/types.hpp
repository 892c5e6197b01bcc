#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dait {

using Time = std::int64_t;
using NodeId = std::int32_t;
using EpochId = std::int32_t;

/// Component values are integers; each node's domain S_i is a finite
/// (or opaque) subset of them.
using Value = std::int64_t;
using StateVector = std::vector<Value>;

/// Node sets are bitmasks, which caps scenarios at 64 nodes.
inline constexpr int kMaxNodes = 64;

class NodeSet {
 public:
  NodeSet() = default;

  static NodeSet all(int n) {
    NodeSet s;
    s.bits_ = (n >= kMaxNodes) ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
    return s;
  }

  static NodeSet of(std::initializer_list<NodeId> ids) {
    NodeSet s;
    for (NodeId i : ids) s.insert(i);
    return s;
  }

  static NodeSet from_members(const std::vector<NodeId>& ids) {
    NodeSet s;
    for (NodeId i : ids) s.insert(i);
    return s;
  }

  bool contains(NodeId i) const { return (bits_ >> i) & 1u; }

  NodeSet& insert(NodeId i) {
    bits_ |= std::uint64_t{1} << i;
    return *this;
  }

  NodeSet& erase(NodeId i) {
    bits_ &= ~(std::uint64_t{1} << i);
    return *this;
  }

  int count() const { return std::popcount(bits_); }
  bool empty() const { return bits_ == 0; }

  std::vector<NodeId> members() const {
    std::vector<NodeId> out;
    out.reserve(static_cast<std::size_t>(count()));
    for_each([&](NodeId i) { out.push_back(i); });
    return out;
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    std::uint64_t rest = bits_;
    while (rest != 0) {
      fn(static_cast<NodeId>(std::countr_zero(rest)));
      rest &= rest - 1;
    }
  }

  std::uint64_t bits() const { return bits_; }

  friend bool operator==(const NodeSet&, const NodeSet&) = default;
  friend bool operator<(const NodeSet& a, const NodeSet& b) { return a.bits_ < b.bits_; }

 private:
  std::uint64_t bits_ = 0;
};

struct EnumerationTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoFixedPoint : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreconditionUnmet : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Seeded RNG with library-defined value derivations. mt19937_64's raw
/// output stream is pinned by the standard, so all derived draws are
/// reproducible across platforms (std::*_distribution is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0,1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t next_in(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  bool bernoulli(double p) { return next_unit() < p; }

  /// Child generator for an independent stream (per trial, per channel...).
  Rng fork(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }

  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over the combined words
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace dait

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "stratexp/utility.hpp"

namespace stratexp {

/// Largest subset count accepted by exhaustive enumeration.
inline constexpr std::uint64_t kMaxSubsets = 2'000'000;

/// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::size_t n, std::size_t k);

/// Throws CombinatorialBlowup when C(k, m) exceeds kMaxSubsets.
void require_enumerable(std::size_t k, std::size_t m);

/// Colexicographic ranking of the size-m subsets of {0, ..., K-1}.
class MetaIndex {
 public:
  MetaIndex(std::size_t experts, std::size_t m);

  std::size_t experts() const { return experts_; }
  std::size_t m() const { return m_; }
  std::size_t size() const { return size_; }

  std::size_t rank(const ExpertSet& s) const;
  ExpertSet unrank(std::size_t rank) const;
  /// Unrank into a caller-owned buffer of length m (sorted ascending).
  void unrank_into(std::size_t rank, std::span<std::size_t> out) const;

 private:
  std::size_t experts_;
  std::size_t m_;
  std::size_t size_;
  std::vector<std::vector<std::uint64_t>> table_;  // table_[n][k] = C(n, k)
};

/// Calls visit(members) for every size-m subset in colex order.
void for_each_subset(std::size_t experts, std::size_t m,
                     const std::function<void(std::span<const std::size_t>)>& visit);

}  // namespace stratexp

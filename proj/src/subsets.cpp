#include "stratexp/subsets.hpp"

#include <limits>
#include <stdexcept>
#include <string>

#include "stratexp/errors.hpp"

namespace stratexp {

std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    acc = acc * (n - k + i) / i;
    if (acc > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(acc);
}

void require_enumerable(std::size_t k, std::size_t m) {
  const auto count = binomial(k, m);
  if (count > kMaxSubsets) {
    throw CombinatorialBlowup("C(" + std::to_string(k) + ", " + std::to_string(m) + ") = " +
                              std::to_string(count) + " subsets exceeds the enumeration cap of " +
                              std::to_string(kMaxSubsets));
  }
}

MetaIndex::MetaIndex(std::size_t experts, std::size_t m) : experts_(experts), m_(m) {
  if (m == 0 || m > experts) throw std::invalid_argument("MetaIndex: need 1 <= m <= K");
  require_enumerable(experts, m);
  size_ = static_cast<std::size_t>(binomial(experts, m));
  table_.assign(experts + 1, std::vector<std::uint64_t>(m + 1, 0));
  for (std::size_t n = 0; n <= experts; ++n) {
    for (std::size_t k = 0; k <= m; ++k) table_[n][k] = binomial(n, k);
  }
}

std::size_t MetaIndex::rank(const ExpertSet& s) const {
  if (s.size() != m_) throw std::invalid_argument("MetaIndex::rank: wrong subset size");
  std::size_t r = 0;
  std::size_t pos = 1;
  for (std::size_t member : s) {
    if (member >= experts_) throw std::out_of_range("MetaIndex::rank: member out of range");
    r += static_cast<std::size_t>(table_[member][pos]);
    ++pos;
  }
  return r;
}

void MetaIndex::unrank_into(std::size_t rank, std::span<std::size_t> out) const {
  if (rank >= size_) throw std::out_of_range("MetaIndex::unrank: rank out of range");
  std::size_t n = experts_;
  for (std::size_t pos = m_; pos >= 1; --pos) {
    // Largest n with C(n, pos) <= rank.
    do {
      --n;
    } while (table_[n][pos] > rank);
    out[pos - 1] = n;
    rank -= static_cast<std::size_t>(table_[n][pos]);
  }
}

ExpertSet MetaIndex::unrank(std::size_t rank) const {
  std::vector<std::size_t> members(m_);
  unrank_into(rank, members);
  return ExpertSet(std::move(members));
}

void for_each_subset(std::size_t experts, std::size_t m,
                     const std::function<void(std::span<const std::size_t>)>& visit) {
  if (m > experts) return;
  std::vector<std::size_t> c(m);
  for (std::size_t i = 0; i < m; ++i) c[i] = i;
  for (;;) {
    visit(c);
    // Colex successor: bump the lowest position that can move.
    std::size_t i = 0;
    while (i < m && c[i] + 1 == (i + 1 < m ? c[i + 1] : experts)) ++i;
    if (i == m) return;
    ++c[i];
    for (std::size_t j = 0; j < i; ++j) c[j] = j;
  }
}

}  // namespace stratexp

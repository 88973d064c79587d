#include "ldiverted/partition.hpp"

#include <algorithm>
#include <queue>

#include "ldiverted/errors.hpp"

namespace ldiverted {

DecoyPartition::DecoyPartition(std::uint32_t l_prime,
                               std::vector<std::vector<GroupMember>> groups)
    : l_prime_(l_prime), groups_(std::move(groups)) {
  for (std::uint32_t g = 0; g < groups_.size(); ++g) {
    for (const GroupMember& m : groups_[g]) id_to_group_.emplace(m.id, g);
  }
}

std::uint32_t DecoyPartition::locate(std::uint32_t id) const {
  auto it = id_to_group_.find(id);
  if (it == id_to_group_.end()) {
    throw DataError("tuple id not in partition: " + std::to_string(id));
  }
  return it->second;
}

namespace {

struct Bucket {
  std::uint32_t code;
  std::uint32_t lex_rank;               // rank of the value string, ascending
  std::vector<std::uint32_t> ids;       // descending, so back() is the smallest
};

struct HeapEntry {
  std::uint32_t size;
  std::uint32_t lex_rank;
  std::uint32_t bucket;
  bool operator<(const HeapEntry& o) const {
    if (size != o.size) return size < o.size;        // larger size first
    return lex_rank > o.lex_rank;                    // then smaller value first
  }
};

}  // namespace

DecoyPartition partition(const SaProjection& ds, std::uint32_t l_prime) {
  if (l_prime == 0) throw DataError("group size must be at least 1");
  const std::uint32_t n = static_cast<std::uint32_t>(ds.ids.size());
  if (n % l_prime != 0) {
    throw InfeasibleError("table size " + std::to_string(n) +
                          " is not a multiple of " + std::to_string(l_prime));
  }

  // Lexicographic rank of each domain code.
  std::vector<std::uint32_t> order(ds.domain.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return ds.domain[a] < ds.domain[b];
  });
  std::vector<std::uint32_t> lex_rank(ds.domain.size());
  for (std::uint32_t r = 0; r < order.size(); ++r) lex_rank[order[r]] = r;

  std::vector<Bucket> buckets;
  std::vector<std::int32_t> bucket_of_code(ds.domain.size(), -1);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint32_t code = ds.codes[i];
    if (code >= ds.domain.size()) throw DataError("sensitive code out of domain");
    if (bucket_of_code[code] < 0) {
      bucket_of_code[code] = static_cast<std::int32_t>(buckets.size());
      buckets.push_back({code, lex_rank[code], {}});
    }
    buckets[bucket_of_code[code]].ids.push_back(ds.ids[i]);
  }
  for (Bucket& b : buckets) {
    std::sort(b.ids.begin(), b.ids.end(), std::greater<std::uint32_t>());
  }

  std::priority_queue<HeapEntry> heap;
  for (std::uint32_t b = 0; b < buckets.size(); ++b) {
    heap.push({static_cast<std::uint32_t>(buckets[b].ids.size()),
               buckets[b].lex_rank, b});
  }

  std::vector<std::vector<GroupMember>> groups;
  groups.reserve(n / l_prime);
  std::vector<HeapEntry> picked;
  picked.reserve(l_prime);
  for (std::uint32_t g = 0; g < n / l_prime; ++g) {
    if (heap.size() < l_prime) {
      throw InfeasibleError("iteration " + std::to_string(g + 1) + " finds only " +
                            std::to_string(heap.size()) + " nonempty buckets, needs " +
                            std::to_string(l_prime) + " (ineligible input)");
    }
    picked.clear();
    std::vector<GroupMember> group;
    group.reserve(l_prime);
    for (std::uint32_t k = 0; k < l_prime; ++k) {
      HeapEntry e = heap.top();
      heap.pop();
      Bucket& b = buckets[e.bucket];
      group.push_back({b.ids.back(), b.code});
      b.ids.pop_back();
      picked.push_back({e.size - 1, e.lex_rank, e.bucket});
    }
    for (const HeapEntry& e : picked) {
      if (e.size > 0) heap.push(e);
    }
    groups.push_back(std::move(group));
  }
  return DecoyPartition(l_prime, std::move(groups));
}

}  // namespace ldiverted

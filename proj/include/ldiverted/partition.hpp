#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace ldiverted {

// Projection of a dataset onto (tuple id, sensitive value) for one sensitive
// attribute. `domain` maps codes to value strings and supplies the
// lexicographic order used for tie-breaking.
struct SaProjection {
  std::vector<std::uint32_t> ids;
  std::vector<std::uint32_t> codes;  // parallel to ids
  std::vector<std::string> domain;
};

struct GroupMember {
  std::uint32_t id;
  std::uint32_t code;
};

// A partition of the projected table into groups of exactly l_prime tuples
// with l_prime distinct sensitive values. Never serialized: the published
// artifacts must carry no trace of it.
class DecoyPartition {
 public:
  DecoyPartition(std::uint32_t l_prime, std::vector<std::vector<GroupMember>> groups);

  std::uint32_t l_prime() const { return l_prime_; }
  std::uint32_t group_count() const { return static_cast<std::uint32_t>(groups_.size()); }
  const std::vector<std::vector<GroupMember>>& groups() const { return groups_; }
  const std::vector<GroupMember>& group(std::uint32_t g) const { return groups_[g]; }

  // Index of the unique group containing `id`; throws DataError if unknown.
  std::uint32_t locate(std::uint32_t id) const;

 private:
  std::uint32_t l_prime_;
  std::vector<std::vector<GroupMember>> groups_;
  std::unordered_map<std::uint32_t, std::uint32_t> id_to_group_;
};

// Deterministic greedy partitioning: tuples are hashed into buckets by
// sensitive value; each iteration takes one tuple from each of the l_prime
// currently largest buckets (bucket ties broken by lexicographically smaller
// value, within a bucket the smallest remaining id wins). Requires an
// eligible input; throws InfeasibleError when an iteration cannot find
// l_prime nonempty buckets.
DecoyPartition partition(const SaProjection& ds, std::uint32_t l_prime);

}  // namespace ldiverted

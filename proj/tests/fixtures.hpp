// Tiny hand-built datasets for the enumeration tests. Rows get unique NSA
// values ("r0", "r1", ...) so published rows match back unambiguously, and
// ids equal row positions (content-independent by construction).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ldiverted/dataset.hpp"
#include "ldiverted/mechanism.hpp"
#include "ldiverted/partition.hpp"

namespace fixtures {

inline ldiverted::Schema tiny_schema(std::uint32_t n_rows,
                                     std::vector<std::string> sa_domain) {
  std::vector<std::string> row_names;
  for (std::uint32_t i = 0; i < n_rows; ++i) row_names.push_back("r" + std::to_string(i));
  ldiverted::Attribute key{"row", std::move(row_names), false, {}};
  ldiverted::Attribute sa{"disease", std::move(sa_domain), true, {}};
  return ldiverted::Schema({key, sa});
}

// Dataset over (row tag, sensitive value); sa_codes[i] indexes sa_domain.
inline ldiverted::Dataset tiny_dataset(const std::vector<std::uint32_t>& sa_codes,
                                       std::vector<std::string> sa_domain) {
  std::uint32_t n = static_cast<std::uint32_t>(sa_codes.size());
  ldiverted::Schema schema = tiny_schema(n, std::move(sa_domain));
  std::vector<std::uint32_t> ids(n), values;
  for (std::uint32_t i = 0; i < n; ++i) {
    ids[i] = i;
    values.push_back(i);            // row tag
    values.push_back(sa_codes[i]);  // sensitive value
  }
  return ldiverted::Dataset(schema, std::move(ids), std::move(values));
}

// Published table over the same schema assigning out_codes[i] to the
// individual of row i (NSA values copied verbatim).
inline ldiverted::PublishedTable tiny_published(const ldiverted::Dataset& d,
                                                const std::vector<std::uint32_t>& out_codes,
                                                std::uint32_t l_prime) {
  std::vector<std::uint32_t> values;
  for (std::uint32_t r = 0; r < d.size(); ++r) {
    values.push_back(d.value(r, 0));
    values.push_back(out_codes[r]);
  }
  return ldiverted::PublishedTable(d.schema(), std::move(values), l_prime, 0);
}

// Neighbor w.r.t. the individual at row_a: swap the NSA values of rows a and
// b, which swaps the two individuals' sensitive values while keeping the
// (id, sensitive value) projection identical.
inline ldiverted::Dataset swap_nsa(const ldiverted::Dataset& d, std::uint32_t row_a,
                                   std::uint32_t row_b) {
  std::vector<std::uint32_t> ids, values;
  for (std::uint32_t r = 0; r < d.size(); ++r) {
    ids.push_back(d.id(r));
    std::uint32_t tag_row = r == row_a ? row_b : (r == row_b ? row_a : r);
    values.push_back(d.value(tag_row, 0));
    values.push_back(d.value(r, 1));
  }
  return ldiverted::Dataset(d.schema(), std::move(ids), std::move(values));
}

// Odometer over assignments: per row, one choice among its candidate codes.
// Calls fn(codes) for every combination.
template <typename Fn>
void for_each_assignment(const std::vector<std::vector<std::uint32_t>>& candidates,
                         Fn&& fn) {
  std::vector<std::size_t> pos(candidates.size(), 0);
  std::vector<std::uint32_t> codes(candidates.size());
  while (true) {
    for (std::size_t i = 0; i < candidates.size(); ++i) codes[i] = candidates[i][pos[i]];
    fn(codes);
    std::size_t i = 0;
    while (i < candidates.size() && ++pos[i] == candidates[i].size()) {
      pos[i] = 0;
      ++i;
    }
    if (i == candidates.size()) break;
  }
}

}  // namespace fixtures

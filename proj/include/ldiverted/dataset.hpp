#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ldiverted/schema.hpp"

namespace ldiverted {

// A microdata table. Values are stored as per-attribute domain codes in
// ingestion/generation order; `ids` holds the randomly assigned tuple id of
// each row. Ids are assigned as a seeded permutation of 0..N-1, independent
// of row contents; after eligibility deletions they may be non-contiguous
// but stay unique.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Schema schema, std::vector<std::uint32_t> ids,
          std::vector<std::uint32_t> values);

  const Schema& schema() const { return schema_; }
  std::uint32_t size() const { return static_cast<std::uint32_t>(ids_.size()); }
  std::uint32_t id(std::uint32_t row) const { return ids_[row]; }
  std::uint32_t value(std::uint32_t row, std::size_t attr) const {
    return values_[static_cast<std::size_t>(row) * schema_.size() + attr];
  }
  const std::string& value_name(std::uint32_t row, std::size_t attr) const {
    return schema_.attribute(attr).domain[value(row, attr)];
  }
  const std::vector<std::uint32_t>& ids() const { return ids_; }

  // Frequency of each domain code of attribute `attr`.
  std::vector<std::uint32_t> value_counts(std::size_t attr) const;

  // New dataset without the rows whose ids appear in `drop` (ids preserved).
  Dataset without_ids(const std::vector<std::uint32_t>& drop) const;

  bool operator==(const Dataset& other) const;

 private:
  Schema schema_;
  std::vector<std::uint32_t> ids_;
  std::vector<std::uint32_t> values_;  // row-major, schema_.size() per row
};

struct EligibilityReport {
  bool eligible = false;
  std::uint32_t max_sa_frequency = 0;      // after any deletions
  std::uint32_t required_deletions = 0;    // in [0, l_prime - 1]
  std::vector<std::uint32_t> deleted_ids;  // empty when none
};

// Reads a CSV table (UTF-8, comma separated, header row of attribute names,
// values matched by exact string equality). Open domains in the config are
// inferred from the data and sorted lexicographically. Tuple ids are a
// seeded random permutation of 0..N-1 over the rows in file order.
Dataset ingest_csv(const std::string& path, const SchemaConfig& config,
                   std::uint64_t seed);
Dataset ingest_csv_text(const std::string& text, const SchemaConfig& config,
                        std::uint64_t seed);

// Writes the dataset in the same CSV format (header in schema order, rows in
// storage order), so ingesting the output with the same seed reproduces the
// dataset exactly, ids included.
void write_csv(const Dataset& d, const std::string& path);
std::string write_csv_text(const Dataset& d);

// Makes the dataset eligible for group size l_prime: N a multiple of l_prime
// and every sensitive value's frequency at most N/l_prime, by deleting at
// most l_prime-1 tuples. Deletion rule: repeatedly remove the largest-id
// tuple of the currently most frequent sensitive bucket (ties: first
// sensitive attribute in schema order, then lexicographically smallest
// value). If no pattern of at most l_prime-1 deletions works, the original
// dataset is returned with eligible=false.
std::pair<Dataset, EligibilityReport> enforce_eligibility(const Dataset& d,
                                                          std::uint32_t l_prime);

// True iff d already satisfies both eligibility conditions for l_prime.
bool is_eligible(const Dataset& d, std::uint32_t l_prime);

// Seeded synthetic generator: values drawn per attribute from its declared
// distribution, ids a seeded permutation of 0..n-1. Deterministic for a
// fixed (config, n, seed).
Dataset generate_synthetic(std::uint32_t n, const SchemaConfig& config,
                           std::uint64_t seed);

}  // namespace ldiverted

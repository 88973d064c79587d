#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ldiverted/dataset.hpp"
#include "ldiverted/partition.hpp"
#include "ldiverted/rng.hpp"

namespace ldiverted {

using Rational = boost::multiprecision::cpp_rational;

// Exact probability, used for configuration so that the sampling path and
// the exact oracle agree on the same p.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 0;  // zero-initialized means "default"
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  Rational to_rational() const { return Rational(num) / den; }
};

enum class MechanismKind { a_prime, global_a, anatomy };

MechanismKind mechanism_from_string(const std::string& name);
std::string to_string(MechanismKind kind);

struct RandomizerConfig {
  std::uint32_t l_prime = 1;
  Fraction p;  // default: 1/l_prime
  std::uint64_t seed = 0;
  MechanismKind mechanism = MechanismKind::a_prime;
  // The zero-differential guarantee only holds at p = 1/l_prime; other values
  // are refused unless this flag is set (used to reproduce the p != q
  // counterexamples).
  bool unsafe_test_mode = false;

  Fraction keep_probability() const {
    if (p.den != 0) return p;
    return Fraction{1, static_cast<std::int64_t>(l_prime)};
  }
  void validate() const;

  static RandomizerConfig from_json(const std::string& text);
};

// The sanitized table: original schema, value rows (no tuple ids), and the
// public group size. Carries no partition information by construction.
class PublishedTable {
 public:
  PublishedTable() = default;
  PublishedTable(Schema schema, std::vector<std::uint32_t> values,
                 std::uint32_t l_prime, std::uint64_t seed_fingerprint);

  const Schema& schema() const { return schema_; }
  std::uint32_t size() const {
    return schema_.size() == 0 ? 0
                               : static_cast<std::uint32_t>(values_.size() / schema_.size());
  }
  std::uint32_t value(std::uint32_t row, std::size_t attr) const {
    return values_[static_cast<std::size_t>(row) * schema_.size() + attr];
  }
  const std::string& value_name(std::uint32_t row, std::size_t attr) const {
    return schema_.attribute(attr).domain[value(row, attr)];
  }
  std::uint32_t l_prime() const { return l_prime_; }
  std::uint64_t seed_fingerprint() const { return seed_fingerprint_; }

  // Occurrence count of a domain code in one column.
  std::uint32_t count(std::size_t attr, std::uint32_t code) const;

 private:
  Schema schema_;
  std::vector<std::uint32_t> values_;
  std::uint32_t l_prime_ = 1;
  std::uint64_t seed_fingerprint_ = 0;
};

// Anatomy-style publication: per-group NSA rows plus exact per-group
// sensitive value counts (single sensitive attribute).
struct AnatomyPublication {
  Schema schema;
  std::size_t sa_attr = 0;
  std::uint32_t l = 1;
  std::uint32_t group_count = 0;
  std::vector<std::uint32_t> nsa_group_ids;  // per published NSA row
  std::vector<std::uint32_t> nsa_values;     // row-major over NSA attributes
  struct SaRow {
    std::uint32_t group;
    std::uint32_t code;
    std::uint32_t count;
  };
  std::vector<SaRow> sa_rows;

  std::size_t nsa_width() const;
  std::uint32_t nsa_row_count() const;
};

// Mechanism A': partitions each sensitive attribute independently into decoy
// groups of size l_prime, draws each published value from the tuple's decoy
// set (own value with probability p, each other decoy with probability
// (1-p)/(l_prime-1)), joins the untouched NSA values back by id and shuffles
// the rows. Throws InfeasibleError on an ineligible dataset or when l_prime
// exceeds a sensitive domain.
PublishedTable anonymize_a_prime(const Dataset& d, const RandomizerConfig& cfg);

// Global randomization baseline: each sensitive value is kept with
// probability p, otherwise replaced by a uniform draw over the other m-1
// domain values.
PublishedTable anonymize_global_a(const Dataset& d, double p, std::uint64_t seed);

// Anatomy baseline: same partitioner, publishes group ids with exact
// per-group sensitive counts (no randomization).
AnatomyPublication anonymize_anatomy(const Dataset& d, std::uint32_t l,
                                     std::uint64_t seed);

// Laplace query-answering baseline for a budget of m counting queries:
// returns true_count + Lap(m/epsilon) (unit sensitivity per query).
double laplace_answer(std::int64_t true_count, std::uint32_t m_queries,
                      double epsilon, std::uint64_t seed);
double sample_laplace(double scale, Engine& eng);

// Exact probability that the mechanism described by `cfg` produces exactly
// d_hat's sensitive assignment from `d`. Rows of d_hat are matched to rows
// of d by their NSA projection, which must be unambiguous; the row shuffle
// is not part of the event. `decoys` is required for a_prime and ignored
// for global_a. Intended for small enumeration fixtures.
Rational output_probability(const Dataset& d, const RandomizerConfig& cfg,
                            const PublishedTable& d_hat,
                            const DecoyPartition* decoys);

// Published-table serialization: CSV with NSA columns then SA columns (each
// in schema order) plus a sidecar JSON {"l_prime", "sensitive",
// "seed_fingerprint"}.
void write_published(const PublishedTable& table, const std::string& csv_path,
                     const std::string& sidecar_path);
PublishedTable read_published(const std::string& csv_path,
                              const std::string& sidecar_path,
                              const SchemaConfig& config);

// Anatomy serialization: `<base>_nsa.csv` (group_id + NSA columns) and
// `<base>_sa.csv` (group_id, sa_value, count).
void write_anatomy(const AnatomyPublication& pub, const std::string& base_path);
AnatomyPublication read_anatomy(const std::string& base_path,
                                const SchemaConfig& config);

}  // namespace ldiverted

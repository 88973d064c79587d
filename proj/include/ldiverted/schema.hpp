#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ldiverted {

// Sampling distribution attached to an attribute for synthetic generation.
// exponent == 0 means uniform; otherwise Zipf over the domain in declared
// order (weight of the k-th value proportional to k^-exponent, 1-based).
struct Distribution {
  double zipf_exponent = 0.0;
  bool is_uniform() const { return zipf_exponent == 0.0; }
};

struct Attribute {
  std::string name;
  std::vector<std::string> domain;  // ordered, duplicate-free category strings
  bool sensitive = false;
  Distribution dist;

  // Index of `value` in the domain, or nullopt.
  std::optional<std::uint32_t> code_of(const std::string& value) const;
};

// Resolved schema: every attribute has a concrete nonempty domain and every
// attribute is either sensitive (SA) or non-sensitive (NSA).
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<Attribute> attributes);

  const std::vector<Attribute>& attributes() const { return attrs_; }
  const Attribute& attribute(std::size_t i) const { return attrs_[i]; }
  std::size_t size() const { return attrs_.size(); }

  // Attribute index by name, or nullopt.
  std::optional<std::size_t> index_of(const std::string& name) const;

  // Indices in declared order.
  const std::vector<std::size_t>& nsa_indices() const { return nsa_; }
  const std::vector<std::size_t>& sa_indices() const { return sa_; }

  bool operator==(const Schema& other) const;

 private:
  std::vector<Attribute> attrs_;
  std::vector<std::size_t> nsa_;
  std::vector<std::size_t> sa_;
};

// Declared schema prior to ingestion: domains may be left open (inferred from
// data, sorted lexicographically). Parsed from the JSON document
//   {"attributes":[{"name":..., "domain":[...]|null,
//                   "dist":"uniform"|{"zipf":s}}, ...],
//    "sensitive":[...]}
struct SchemaConfig {
  struct Entry {
    std::string name;
    std::optional<std::vector<std::string>> domain;  // nullopt = infer
    Distribution dist;
  };
  std::vector<Entry> attributes;
  std::vector<std::string> sensitive;

  static SchemaConfig from_json(const std::string& text);
  static SchemaConfig from_json_file(const std::string& path);

  // Resolve into a Schema; all domains must be declared. Throws DataError on
  // an open or empty domain.
  Schema resolve() const;

  // Resolve using inferred domains for open entries. `inferred[i]` supplies
  // the domain for attribute i when the config leaves it open.
  Schema resolve_with(const std::vector<std::vector<std::string>>& inferred) const;
};

// The built-in census-like schema used by the benchmark and `gen-data`
// defaults: a handful of categorical demographics plus a 50-value sensitive
// occupation column.
SchemaConfig census_like_schema();

}  // namespace ldiverted

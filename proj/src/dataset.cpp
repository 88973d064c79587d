#include "ldiverted/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "ldiverted/errors.hpp"
#include "ldiverted/rng.hpp"

namespace ldiverted {

Dataset::Dataset(Schema schema, std::vector<std::uint32_t> ids,
                 std::vector<std::uint32_t> values)
    : schema_(std::move(schema)), ids_(std::move(ids)), values_(std::move(values)) {
  if (values_.size() != ids_.size() * schema_.size()) {
    throw DataError("dataset value buffer does not match schema width");
  }
  std::unordered_set<std::uint32_t> seen(ids_.begin(), ids_.end());
  if (seen.size() != ids_.size()) throw DataError("duplicate tuple ids");
  for (std::uint32_t r = 0; r < size(); ++r) {
    for (std::size_t a = 0; a < schema_.size(); ++a) {
      if (value(r, a) >= schema_.attribute(a).domain.size()) {
        throw DataError("value code out of domain for attribute " +
                        schema_.attribute(a).name);
      }
    }
  }
}

std::vector<std::uint32_t> Dataset::value_counts(std::size_t attr) const {
  std::vector<std::uint32_t> counts(schema_.attribute(attr).domain.size(), 0);
  for (std::uint32_t r = 0; r < size(); ++r) counts[value(r, attr)]++;
  return counts;
}

Dataset Dataset::without_ids(const std::vector<std::uint32_t>& drop) const {
  std::unordered_set<std::uint32_t> gone(drop.begin(), drop.end());
  std::vector<std::uint32_t> ids, values;
  for (std::uint32_t r = 0; r < size(); ++r) {
    if (gone.count(ids_[r])) continue;
    ids.push_back(ids_[r]);
    for (std::size_t a = 0; a < schema_.size(); ++a) values.push_back(value(r, a));
  }
  return Dataset(schema_, std::move(ids), std::move(values));
}

bool Dataset::operator==(const Dataset& other) const {
  return schema_ == other.schema_ && ids_ == other.ids_ && values_ == other.values_;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

Dataset ingest_csv_text(const std::string& text, const SchemaConfig& config,
                        std::uint64_t seed) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty dataset");
  std::vector<std::string> header = split_csv_line(line);

  // Map file columns onto config attributes by name.
  std::vector<std::size_t> col_to_attr(header.size());
  std::set<std::string> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!seen.insert(header[c]).second) {
      throw DataError("duplicate header column: " + header[c]);
    }
    auto it = std::find_if(config.attributes.begin(), config.attributes.end(),
                           [&](const SchemaConfig::Entry& e) { return e.name == header[c]; });
    if (it == config.attributes.end()) {
      throw DataError("unknown attribute name in header: " + header[c]);
    }
    col_to_attr[c] = static_cast<std::size_t>(it - config.attributes.begin());
  }
  if (header.size() != config.attributes.size()) {
    throw DataError("header does not cover all declared attributes");
  }

  std::vector<std::vector<std::string>> raw(config.attributes.size());
  std::size_t n_rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError("row " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].empty()) {
        throw DataError("empty cell at row " + std::to_string(line_no) +
                        ", column " + header[c]);
      }
      raw[col_to_attr[c]].push_back(cells[c]);
    }
    ++n_rows;
  }
  if (n_rows == 0) throw DataError("empty dataset");

  // Infer open domains from the data, sorted lexicographically.
  std::vector<std::vector<std::string>> inferred(config.attributes.size());
  for (std::size_t a = 0; a < config.attributes.size(); ++a) {
    if (config.attributes[a].domain) continue;
    std::set<std::string> vals(raw[a].begin(), raw[a].end());
    inferred[a].assign(vals.begin(), vals.end());
  }
  Schema schema = config.resolve_with(inferred);

  std::vector<std::uint32_t> values(n_rows * schema.size());
  for (std::size_t a = 0; a < schema.size(); ++a) {
    const Attribute& attr = schema.attribute(a);
    for (std::size_t r = 0; r < n_rows; ++r) {
      auto code = attr.code_of(raw[a][r]);
      if (!code) {
        throw DataError("value \"" + raw[a][r] + "\" at row " + std::to_string(r + 2) +
                        ", column " + attr.name + " is outside the declared domain");
      }
      values[r * schema.size() + a] = *code;
    }
  }

  Engine eng = make_engine(seed, kStreamIds, n_rows);
  std::vector<std::uint32_t> ids = random_permutation(static_cast<std::uint32_t>(n_rows), eng);
  return Dataset(std::move(schema), std::move(ids), std::move(values));
}

Dataset ingest_csv(const std::string& path, const SchemaConfig& config,
                   std::uint64_t seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ingest_csv_text(ss.str(), config, seed);
}

std::string write_csv_text(const Dataset& d) {
  std::ostringstream out;
  const Schema& s = d.schema();
  for (std::size_t a = 0; a < s.size(); ++a) {
    if (a) out << ',';
    out << s.attribute(a).name;
  }
  out << '\n';
  for (std::uint32_t r = 0; r < d.size(); ++r) {
    for (std::size_t a = 0; a < s.size(); ++a) {
      if (a) out << ',';
      out << d.value_name(r, a);
    }
    out << '\n';
  }
  return out.str();
}

void write_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path);
  out << write_csv_text(d);
}

namespace {

// Highest sensitive-value frequency over all sensitive attributes, plus the
// (attr, code) bucket holding it. Ties: first attribute in schema order,
// then lexicographically smallest value.
struct MaxBucket {
  std::uint32_t frequency = 0;
  std::size_t attr = 0;
  std::uint32_t code = 0;
};

MaxBucket max_sa_bucket(const Dataset& d) {
  MaxBucket best;
  for (std::size_t attr : d.schema().sa_indices()) {
    std::vector<std::uint32_t> counts = d.value_counts(attr);
    const auto& domain = d.schema().attribute(attr).domain;
    for (std::uint32_t code = 0; code < counts.size(); ++code) {
      bool better = counts[code] > best.frequency;
      if (counts[code] == best.frequency && best.frequency > 0 && attr == best.attr) {
        better = domain[code] < domain[best.code];
      }
      if (better) best = {counts[code], attr, code};
    }
  }
  return best;
}

}  // namespace

bool is_eligible(const Dataset& d, std::uint32_t l_prime) {
  if (l_prime == 0) throw DataError("group size must be at least 1");
  if (d.size() % l_prime != 0) return false;
  return max_sa_bucket(d).frequency <= d.size() / l_prime;
}

std::pair<Dataset, EligibilityReport> enforce_eligibility(const Dataset& d,
                                                          std::uint32_t l_prime) {
  if (l_prime == 0) throw DataError("group size must be at least 1");
  Dataset cur = d;
  EligibilityReport report;
  while (!is_eligible(cur, l_prime) && report.deleted_ids.size() < l_prime - 1) {
    MaxBucket bucket = max_sa_bucket(cur);
    // Largest id within the chosen bucket.
    std::uint32_t victim = 0;
    bool found = false;
    for (std::uint32_t r = 0; r < cur.size(); ++r) {
      if (cur.value(r, bucket.attr) == bucket.code && (!found || cur.id(r) > victim)) {
        victim = cur.id(r);
        found = true;
      }
    }
    cur = cur.without_ids({victim});
    report.deleted_ids.push_back(victim);
  }
  report.eligible = is_eligible(cur, l_prime);
  if (!report.eligible) {
    report.deleted_ids.clear();
    report.required_deletions = 0;
    report.max_sa_frequency = max_sa_bucket(d).frequency;
    return {d, report};
  }
  report.required_deletions = static_cast<std::uint32_t>(report.deleted_ids.size());
  report.max_sa_frequency = max_sa_bucket(cur).frequency;
  return {cur, report};
}

Dataset generate_synthetic(std::uint32_t n, const SchemaConfig& config,
                           std::uint64_t seed) {
  if (n < 1) throw DataError("synthetic size must be at least 1");
  Schema schema = config.resolve();  // throws on open/empty domains

  std::vector<std::uint32_t> values(static_cast<std::size_t>(n) * schema.size());
  for (std::size_t a = 0; a < schema.size(); ++a) {
    const Attribute& attr = schema.attribute(a);
    std::vector<double> weights(attr.domain.size());
    for (std::size_t k = 0; k < weights.size(); ++k) {
      weights[k] = attr.dist.is_uniform()
                       ? 1.0
                       : std::pow(static_cast<double>(k + 1), -attr.dist.zipf_exponent);
    }
    std::vector<double> cumulative(weights.size());
    double total = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      total += weights[k];
      cumulative[k] = total;
    }
    Engine eng = make_engine(seed, kStreamValues, a);
    for (std::uint32_t r = 0; r < n; ++r) {
      double u = uniform_real(eng) * total;
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      std::size_t k = std::min<std::size_t>(it - cumulative.begin(), weights.size() - 1);
      values[static_cast<std::size_t>(r) * schema.size() + a] =
          static_cast<std::uint32_t>(k);
    }
  }

  Engine eng = make_engine(seed, kStreamIds, n);
  std::vector<std::uint32_t> ids = random_permutation(n, eng);
  return Dataset(std::move(schema), std::move(ids), std::move(values));
}

}  // namespace ldiverted

#include "ldiverted/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "ldiverted/errors.hpp"

namespace ldiverted {

MechanismKind mechanism_from_string(const std::string& name) {
  if (name == "a_prime") return MechanismKind::a_prime;
  if (name == "global_a") return MechanismKind::global_a;
  if (name == "anatomy") return MechanismKind::anatomy;
  throw DataError("unknown mechanism: " + name);
}

std::string to_string(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::a_prime: return "a_prime";
    case MechanismKind::global_a: return "global_a";
    case MechanismKind::anatomy: return "anatomy";
  }
  return "?";
}

void RandomizerConfig::validate() const {
  if (l_prime < 1) throw DataError("l_prime must be at least 1");
  Fraction keep = keep_probability();
  if (keep.den <= 0 || keep.num < 0 || keep.num > keep.den) {
    throw DataError("keep probability must be in [0, 1]");
  }
  if (mechanism == MechanismKind::a_prime && !unsafe_test_mode) {
    // p must equal 1/l_prime exactly.
    if (keep.num * static_cast<std::int64_t>(l_prime) != keep.den) {
      throw InfeasibleError(
          "p != 1/l_prime voids the privacy guarantee; refuse outside test mode");
    }
  }
}

RandomizerConfig RandomizerConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("mechanism config is not valid JSON: ") + e.what());
  }
  RandomizerConfig cfg;
  cfg.mechanism = mechanism_from_string(j.value("mechanism", std::string("a_prime")));
  cfg.l_prime = j.value("l_prime", 1u);
  cfg.seed = j.value("seed", 0ull);
  if (j.contains("p")) {
    const auto& p = j["p"];
    if (p.is_array() && p.size() == 2) {
      cfg.p = Fraction{p[0].get<std::int64_t>(), p[1].get<std::int64_t>()};
    } else {
      throw DataError("config p must be a [numerator, denominator] pair");
    }
  }
  cfg.unsafe_test_mode = j.value("unsafe_test_mode", false);
  cfg.validate();
  return cfg;
}

PublishedTable::PublishedTable(Schema schema, std::vector<std::uint32_t> values,
                               std::uint32_t l_prime, std::uint64_t seed_fingerprint)
    : schema_(std::move(schema)),
      values_(std::move(values)),
      l_prime_(l_prime),
      seed_fingerprint_(seed_fingerprint) {
  if (schema_.size() == 0 || values_.size() % schema_.size() != 0) {
    throw DataError("published value buffer does not match schema width");
  }
}

std::uint32_t PublishedTable::count(std::size_t attr, std::uint32_t code) const {
  std::uint32_t c = 0;
  for (std::uint32_t r = 0; r < size(); ++r) {
    if (value(r, attr) == code) ++c;
  }
  return c;
}

std::size_t AnatomyPublication::nsa_width() const {
  return schema.nsa_indices().size();
}

std::uint32_t AnatomyPublication::nsa_row_count() const {
  return static_cast<std::uint32_t>(nsa_group_ids.size());
}

namespace {

SaProjection project_sa(const Dataset& d, std::size_t attr) {
  SaProjection proj;
  proj.domain = d.schema().attribute(attr).domain;
  proj.ids.reserve(d.size());
  proj.codes.reserve(d.size());
  for (std::uint32_t r = 0; r < d.size(); ++r) {
    proj.ids.push_back(d.id(r));
    proj.codes.push_back(d.value(r, attr));
  }
  return proj;
}

void require_eligible(const Dataset& d, std::uint32_t l_prime) {
  if (!is_eligible(d, l_prime)) {
    throw InfeasibleError(
        "dataset is not eligible for group size " + std::to_string(l_prime) +
        " (size must be a multiple and every sensitive frequency at most size/" +
        std::to_string(l_prime) + ")");
  }
}

std::uint64_t config_fingerprint(std::uint64_t seed, std::uint32_t l_prime) {
  std::uint64_t buf[2] = {seed, l_prime};
  return fnv1a64(buf, sizeof(buf));
}

// Draws the published sensitive codes for one attribute, indexed by row.
// Draws are consumed in ascending tuple-id order (reproducibility contract).
std::vector<std::uint32_t> draw_a_prime_column(const Dataset& d, std::size_t attr,
                                               const DecoyPartition& part,
                                               double keep_p, Engine& eng) {
  std::vector<std::uint32_t> row_of_id_order(d.size());
  for (std::uint32_t r = 0; r < d.size(); ++r) row_of_id_order[r] = r;
  std::sort(row_of_id_order.begin(), row_of_id_order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return d.id(a) < d.id(b); });

  std::vector<std::uint32_t> out(d.size());
  for (std::uint32_t r : row_of_id_order) {
    const std::vector<GroupMember>& group = part.group(part.locate(d.id(r)));
    std::uint32_t own = d.value(r, attr);
    if (group.size() == 1) {
      out[r] = own;
      continue;
    }
    if (uniform_real(eng) < keep_p) {
      out[r] = own;
    } else {
      std::uint64_t k = uniform_index(eng, group.size() - 1);
      // Skip the tuple's own value within the group's creation order.
      for (const GroupMember& m : group) {
        if (m.code == own) continue;
        if (k == 0) {
          out[r] = m.code;
          break;
        }
        --k;
      }
    }
  }
  return out;
}

PublishedTable assemble_published(const Dataset& d,
                                  const std::map<std::size_t, std::vector<std::uint32_t>>&
                                      published_sa_columns,
                                  std::uint32_t l_prime, std::uint64_t seed) {
  const Schema& schema = d.schema();
  std::vector<std::uint32_t> order(d.size());
  for (std::uint32_t r = 0; r < d.size(); ++r) order[r] = r;
  Engine shuffle_eng = make_engine(seed, kStreamShuffle);
  fisher_yates(order, shuffle_eng);

  std::vector<std::uint32_t> values;
  values.reserve(static_cast<std::size_t>(d.size()) * schema.size());
  for (std::uint32_t r : order) {
    for (std::size_t a = 0; a < schema.size(); ++a) {
      auto it = published_sa_columns.find(a);
      values.push_back(it == published_sa_columns.end() ? d.value(r, a)
                                                        : it->second[r]);
    }
  }
  return PublishedTable(schema, std::move(values), l_prime,
                        config_fingerprint(seed, l_prime));
}

}  // namespace

PublishedTable anonymize_a_prime(const Dataset& d, const RandomizerConfig& cfg) {
  cfg.validate();
  require_eligible(d, cfg.l_prime);
  for (std::size_t attr : d.schema().sa_indices()) {
    if (cfg.l_prime > d.schema().attribute(attr).domain.size()) {
      throw InfeasibleError("group size " + std::to_string(cfg.l_prime) +
                            " exceeds the domain of attribute " +
                            d.schema().attribute(attr).name);
    }
  }
  double keep_p = cfg.keep_probability().to_double();
  std::map<std::size_t, std::vector<std::uint32_t>> published;
  for (std::size_t attr : d.schema().sa_indices()) {
    DecoyPartition part = partition(project_sa(d, attr), cfg.l_prime);
    Engine eng = make_engine(cfg.seed, kStreamSaDraws, attr);
    published[attr] = draw_a_prime_column(d, attr, part, keep_p, eng);
  }
  return assemble_published(d, published, cfg.l_prime, cfg.seed);
}

PublishedTable anonymize_global_a(const Dataset& d, double p, std::uint64_t seed) {
  if (p < 0.0 || p > 1.0) throw DataError("keep probability must be in [0, 1]");
  std::map<std::size_t, std::vector<std::uint32_t>> published;
  for (std::size_t attr : d.schema().sa_indices()) {
    std::size_t m = d.schema().attribute(attr).domain.size();
    if (m < 2) {
      throw InfeasibleError("global randomization needs a domain of at least 2: " +
                            d.schema().attribute(attr).name);
    }
    std::vector<std::uint32_t> row_of_id_order(d.size());
    for (std::uint32_t r = 0; r < d.size(); ++r) row_of_id_order[r] = r;
    std::sort(row_of_id_order.begin(), row_of_id_order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return d.id(a) < d.id(b); });
    Engine eng = make_engine(seed, kStreamSaDraws, attr);
    std::vector<std::uint32_t> col(d.size());
    for (std::uint32_t r : row_of_id_order) {
      std::uint32_t own = d.value(r, attr);
      if (uniform_real(eng) < p) {
        col[r] = own;
      } else {
        std::uint32_t k = static_cast<std::uint32_t>(uniform_index(eng, m - 1));
        col[r] = k < own ? k : k + 1;
      }
    }
    published[attr] = std::move(col);
  }
  // Publishing l_prime = 1 here: the decoy-group size is not a parameter of
  // this baseline.
  return assemble_published(d, published, 1, seed);
}

AnatomyPublication anonymize_anatomy(const Dataset& d, std::uint32_t l,
                                     std::uint64_t seed) {
  if (d.schema().sa_indices().size() != 1) {
    throw InfeasibleError("the anatomy baseline supports exactly one sensitive attribute");
  }
  require_eligible(d, l);
  std::size_t sa = d.schema().sa_indices()[0];
  DecoyPartition part = partition(project_sa(d, sa), l);

  AnatomyPublication pub;
  pub.schema = d.schema();
  pub.sa_attr = sa;
  pub.l = l;
  pub.group_count = part.group_count();
  for (std::uint32_t g = 0; g < part.group_count(); ++g) {
    for (const GroupMember& m : part.group(g)) {
      pub.sa_rows.push_back({g, m.code, 1});
    }
  }

  std::vector<std::uint32_t> order(d.size());
  for (std::uint32_t r = 0; r < d.size(); ++r) order[r] = r;
  Engine eng = make_engine(seed, kStreamShuffle);
  fisher_yates(order, eng);
  for (std::uint32_t r : order) {
    pub.nsa_group_ids.push_back(part.locate(d.id(r)));
    for (std::size_t a : d.schema().nsa_indices()) {
      pub.nsa_values.push_back(d.value(r, a));
    }
  }
  return pub;
}

double sample_laplace(double scale, Engine& eng) {
  double u = uniform_real(eng) - 0.5;
  double sign = u < 0 ? -1.0 : 1.0;
  return -scale * sign * std::log(1.0 - 2.0 * std::abs(u));
}

double laplace_answer(std::int64_t true_count, std::uint32_t m_queries,
                      double epsilon, std::uint64_t seed) {
  if (epsilon <= 0.0) throw DataError("epsilon must be positive");
  if (m_queries < 1) throw DataError("query budget must be at least 1");
  Engine eng = make_engine(seed, kStreamSaDraws);
  return static_cast<double>(true_count) +
         sample_laplace(static_cast<double>(m_queries) / epsilon, eng);
}

namespace {

Rational pow_rational(const Rational& base, std::uint64_t exp) {
  Rational result(1);
  Rational b = base;
  while (exp) {
    if (exp & 1) result *= b;
    b *= b;
    exp >>= 1;
  }
  return result;
}

std::vector<std::uint32_t> nsa_key(const std::vector<std::size_t>& nsa,
                                   auto&& value_at) {
  std::vector<std::uint32_t> key;
  key.reserve(nsa.size());
  for (std::size_t a : nsa) key.push_back(value_at(a));
  return key;
}

}  // namespace

Rational output_probability(const Dataset& d, const RandomizerConfig& cfg,
                            const PublishedTable& d_hat,
                            const DecoyPartition* decoys) {
  if (!(d.schema() == d_hat.schema())) {
    throw DataError("published table schema does not match the dataset");
  }
  if (d.schema().sa_indices().size() != 1) {
    throw DataError("the probability oracle supports a single sensitive attribute");
  }
  if (cfg.mechanism == MechanismKind::a_prime && decoys == nullptr) {
    throw DataError("a_prime probability needs the decoy partition");
  }
  std::size_t sa = d.schema().sa_indices()[0];
  const std::vector<std::size_t>& nsa = d.schema().nsa_indices();
  if (d_hat.size() != d.size()) return Rational(0);

  // Match rows by NSA projection (hash buckets with exact key comparison);
  // fixtures must make this unambiguous.
  auto row_hash = [&](auto&& value_at) {
    std::vector<std::uint32_t> key = nsa_key(nsa, value_at);
    return fnv1a64(key.data(), key.size() * sizeof(std::uint32_t));
  };
  auto rows_equal = [&](std::uint32_t r, std::uint32_t hr) {
    for (std::size_t a : nsa) {
      if (d.value(r, a) != d_hat.value(hr, a)) return false;
    }
    return true;
  };
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_nsa;
  by_nsa.reserve(d.size() * 2);
  for (std::uint32_t r = 0; r < d.size(); ++r) {
    std::uint64_t h = row_hash([&](std::size_t a) { return d.value(r, a); });
    std::vector<std::uint32_t>& bucket = by_nsa[h];
    for (std::uint32_t other : bucket) {
      bool same = true;
      for (std::size_t a : nsa) same &= d.value(other, a) == d.value(r, a);
      if (same) {
        throw DataError("ambiguous NSA matching: duplicate NSA row in the dataset");
      }
    }
    bucket.push_back(r);
  }

  Fraction keep = cfg.keep_probability();
  std::uint64_t p_exp = 0, q_exp = 0;
  std::vector<bool> matched(d.size(), false);
  for (std::uint32_t hr = 0; hr < d_hat.size(); ++hr) {
    std::uint64_t h = row_hash([&](std::size_t a) { return d_hat.value(hr, a); });
    auto it = by_nsa.find(h);
    std::int64_t row = -1;
    if (it != by_nsa.end()) {
      for (std::uint32_t r : it->second) {
        if (rows_equal(r, hr)) {
          row = r;
          break;
        }
      }
    }
    if (row < 0) return Rational(0);  // NSA values are never altered
    if (matched[row]) {
      throw DataError("ambiguous NSA matching: duplicate NSA row in the published table");
    }
    matched[row] = true;
    std::uint32_t r = static_cast<std::uint32_t>(row);
    std::uint32_t own = d.value(r, sa);
    std::uint32_t out = d_hat.value(hr, sa);
    if (cfg.mechanism == MechanismKind::a_prime) {
      const std::vector<GroupMember>& group = decoys->group(decoys->locate(d.id(r)));
      if (out == own) {
        ++p_exp;
      } else {
        bool in_decoys = std::any_of(group.begin(), group.end(),
                                     [&](const GroupMember& m) { return m.code == out; });
        if (!in_decoys) return Rational(0);
        ++q_exp;
      }
    } else {
      out == own ? ++p_exp : ++q_exp;
    }
  }

  Rational p = keep.to_rational();
  Rational q(0);
  if (cfg.mechanism == MechanismKind::a_prime) {
    if (cfg.l_prime > 1) q = (Rational(1) - p) / (cfg.l_prime - 1);
  } else {
    std::size_t m = d.schema().attribute(sa).domain.size();
    q = (Rational(1) - p) / (static_cast<std::int64_t>(m) - 1);
  }
  if (q_exp > 0 && q == 0) return Rational(0);
  return pow_rational(p, p_exp) * pow_rational(q, q_exp);
}

void write_published(const PublishedTable& table, const std::string& csv_path,
                     const std::string& sidecar_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + csv_path);
  const Schema& s = table.schema();
  std::vector<std::size_t> cols = s.nsa_indices();
  cols.insert(cols.end(), s.sa_indices().begin(), s.sa_indices().end());
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out << ',';
    out << s.attribute(cols[i]).name;
  }
  out << '\n';
  for (std::uint32_t r = 0; r < table.size(); ++r) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out << ',';
      out << table.value_name(r, cols[i]);
    }
    out << '\n';
  }

  nlohmann::json sidecar;
  sidecar["l_prime"] = table.l_prime();
  std::vector<std::string> sensitive;
  for (std::size_t a : s.sa_indices()) sensitive.push_back(s.attribute(a).name);
  sidecar["sensitive"] = sensitive;
  std::ostringstream fp;
  fp << std::hex << table.seed_fingerprint();
  sidecar["seed_fingerprint"] = fp.str();
  std::ofstream side(sidecar_path, std::ios::binary);
  if (!side) throw DataError("cannot open output file: " + sidecar_path);
  side << sidecar.dump(2) << '\n';
}

PublishedTable read_published(const std::string& csv_path,
                              const std::string& sidecar_path,
                              const SchemaConfig& config) {
  std::ifstream side(sidecar_path);
  if (!side) throw DataError("cannot open sidecar: " + sidecar_path);
  nlohmann::json sidecar;
  try {
    side >> sidecar;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("sidecar is not valid JSON: ") + e.what());
  }
  std::uint32_t l_prime = sidecar.at("l_prime").get<std::uint32_t>();
  auto sensitive = sidecar.at("sensitive").get<std::vector<std::string>>();
  SchemaConfig cfg = config;
  cfg.sensitive = sensitive;

  // Reuse the dataset reader for parsing/validation, then strip the ids.
  Dataset as_dataset = ingest_csv(csv_path, cfg, /*seed=*/0);
  std::vector<std::uint32_t> values;
  values.reserve(static_cast<std::size_t>(as_dataset.size()) * as_dataset.schema().size());
  for (std::uint32_t r = 0; r < as_dataset.size(); ++r) {
    for (std::size_t a = 0; a < as_dataset.schema().size(); ++a) {
      values.push_back(as_dataset.value(r, a));
    }
  }
  std::uint64_t fp = 0;
  if (sidecar.contains("seed_fingerprint")) {
    fp = std::stoull(sidecar["seed_fingerprint"].get<std::string>(), nullptr, 16);
  }
  return PublishedTable(as_dataset.schema(), std::move(values), l_prime, fp);
}

AnatomyPublication read_anatomy(const std::string& base_path,
                                const SchemaConfig& config) {
  Schema schema = config.resolve();
  AnatomyPublication pub;
  pub.schema = schema;
  if (schema.sa_indices().size() != 1) {
    throw DataError("anatomy publications carry exactly one sensitive attribute");
  }
  pub.sa_attr = schema.sa_indices()[0];

  auto open_lines = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open input file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) lines.push_back(line);
    }
    if (lines.size() < 2) throw DataError("empty table: " + path);
    return lines;
  };
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        cells.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    cells.push_back(cur);
    return cells;
  };

  std::uint32_t max_group = 0;
  {
    std::vector<std::string> lines = open_lines(base_path + "_nsa.csv");
    const std::vector<std::size_t>& nsa = schema.nsa_indices();
    std::vector<std::string> header = split(lines[0]);
    if (header.empty() || header[0] != "group_id" || header.size() != nsa.size() + 1) {
      throw DataError("unexpected header in " + base_path + "_nsa.csv");
    }
    for (std::size_t li = 1; li < lines.size(); ++li) {
      std::vector<std::string> cells = split(lines[li]);
      if (cells.size() != nsa.size() + 1) {
        throw DataError("bad row in " + base_path + "_nsa.csv");
      }
      std::uint32_t g = static_cast<std::uint32_t>(std::stoul(cells[0]));
      max_group = std::max(max_group, g);
      pub.nsa_group_ids.push_back(g);
      for (std::size_t i = 0; i < nsa.size(); ++i) {
        auto code = schema.attribute(nsa[i]).code_of(cells[i + 1]);
        if (!code) throw DataError("value outside domain in " + base_path + "_nsa.csv");
        pub.nsa_values.push_back(*code);
      }
    }
  }
  std::uint64_t total = 0;
  {
    std::vector<std::string> lines = open_lines(base_path + "_sa.csv");
    for (std::size_t li = 1; li < lines.size(); ++li) {
      std::vector<std::string> cells = split(lines[li]);
      if (cells.size() != 3) throw DataError("bad row in " + base_path + "_sa.csv");
      std::uint32_t g = static_cast<std::uint32_t>(std::stoul(cells[0]));
      auto code = schema.attribute(pub.sa_attr).code_of(cells[1]);
      if (!code) throw DataError("value outside domain in " + base_path + "_sa.csv");
      std::uint32_t count = static_cast<std::uint32_t>(std::stoul(cells[2]));
      max_group = std::max(max_group, g);
      total += count;
      pub.sa_rows.push_back({g, *code, count});
    }
  }
  pub.group_count = max_group + 1;
  if (total != pub.nsa_row_count() || total % pub.group_count != 0) {
    throw DataError("anatomy tables disagree on the row count");
  }
  pub.l = static_cast<std::uint32_t>(total / pub.group_count);
  return pub;
}

void write_anatomy(const AnatomyPublication& pub, const std::string& base_path) {
  const Schema& s = pub.schema;
  {
    std::ofstream out(base_path + "_nsa.csv", std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + base_path + "_nsa.csv");
    out << "group_id";
    for (std::size_t a : s.nsa_indices()) out << ',' << s.attribute(a).name;
    out << '\n';
    std::size_t w = pub.nsa_width();
    for (std::uint32_t r = 0; r < pub.nsa_row_count(); ++r) {
      out << pub.nsa_group_ids[r];
      for (std::size_t i = 0; i < w; ++i) {
        std::size_t attr = s.nsa_indices()[i];
        out << ',' << s.attribute(attr).domain[pub.nsa_values[r * w + i]];
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(base_path + "_sa.csv", std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + base_path + "_sa.csv");
    out << "group_id," << s.attribute(pub.sa_attr).name << ",count\n";
    for (const auto& row : pub.sa_rows) {
      out << row.group << ',' << s.attribute(pub.sa_attr).domain[row.code] << ','
          << row.count << '\n';
    }
  }
}

}  // namespace ldiverted

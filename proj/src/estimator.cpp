#include "ldiverted/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"

#include "ldiverted/errors.hpp"

namespace ldiverted {

CountQuery CountQuery::from_json(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("query is not valid JSON: ") + e.what());
  }
  CountQuery q;
  if (j.contains("nsa")) {
    for (auto it = j["nsa"].begin(); it != j["nsa"].end(); ++it) {
      q.nsa.emplace_back(it.key(), it.value().get<std::string>());
    }
  }
  if (!j.contains("sa") || j["sa"].empty()) {
    throw DataError("query needs at least one sensitive value");
  }
  for (auto it = j["sa"].begin(); it != j["sa"].end(); ++it) {
    q.sa.emplace_back(it.key(), it.value().get<std::string>());
  }
  return q;
}

std::string CountQuery::to_json() const {
  nlohmann::json j;
  j["nsa"] = nlohmann::json::object();
  for (const auto& [a, v] : nsa) j["nsa"][a] = v;
  j["sa"] = nlohmann::json::object();
  for (const auto& [a, v] : sa) j["sa"][a] = v;
  return j.dump();
}

std::vector<CountQuery> read_query_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open query file: " + path);
  std::vector<CountQuery> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(CountQuery::from_json(line));
  }
  if (out.empty()) throw DataError("query file is empty: " + path);
  return out;
}

namespace {

struct ResolvedPair {
  std::size_t attr;
  std::uint32_t code;
};

ResolvedPair resolve(const Schema& schema, const std::string& attr,
                     const std::string& value, bool want_sensitive) {
  auto idx = schema.index_of(attr);
  if (!idx) throw DataError("unknown attribute: " + attr);
  if (schema.attribute(*idx).sensitive != want_sensitive) {
    throw DataError("attribute " + attr + (want_sensitive
                                               ? " is not sensitive"
                                               : " is sensitive, not a predicate column"));
  }
  auto code = schema.attribute(*idx).code_of(value);
  if (!code) throw DataError("value \"" + value + "\" is not in the domain of " + attr);
  return {*idx, *code};
}

struct ResolvedQuery {
  std::vector<ResolvedPair> nsa;
  std::vector<ResolvedPair> sa;
};

ResolvedQuery resolve_query(const Schema& schema, const CountQuery& q) {
  ResolvedQuery r;
  std::set<std::string> seen;
  for (const auto& [a, v] : q.nsa) {
    if (!seen.insert(a).second) throw DataError("duplicate attribute in query: " + a);
    r.nsa.push_back(resolve(schema, a, v, false));
  }
  for (const auto& [a, v] : q.sa) {
    if (!seen.insert(a).second) throw DataError("duplicate attribute in query: " + a);
    r.sa.push_back(resolve(schema, a, v, true));
  }
  if (r.sa.empty()) throw DataError("query needs at least one sensitive value");
  return r;
}

}  // namespace

std::int64_t estimate_sa_count(const PublishedTable& table,
                               const std::string& sa_attr, const std::string& value) {
  ResolvedPair p = resolve(table.schema(), sa_attr, value, true);
  return table.count(p.attr, p.code);
}

std::int64_t estimate_sa_count(const PublishedTable& table, const std::string& value) {
  if (table.schema().sa_indices().size() != 1) {
    throw DataError("table has several sensitive attributes; name one");
  }
  std::size_t attr = table.schema().sa_indices()[0];
  return estimate_sa_count(table, table.schema().attribute(attr).name, value);
}

TransitionMatrix build_single_sa_matrix(const std::vector<double>& x,
                                        std::uint32_t l_prime, double n) {
  if (x.size() != 4) throw DataError("single-attribute state vector must have 4 components");
  return build_multi_sa_matrix(x, l_prime, n, 1);
}

TransitionMatrix build_multi_sa_matrix(const std::vector<double>& x,
                                       std::uint32_t l_prime, double n,
                                       std::uint32_t w) {
  if (n <= 0) throw DataError("state total must be positive");
  if (l_prime < 1) throw DataError("l_prime must be at least 1");
  std::size_t k = std::size_t{1} << (w + 1);
  if (x.size() != k) {
    throw DataError("state vector has " + std::to_string(x.size()) +
                    " components, expected " + std::to_string(k));
  }

  // Marginal frequency of each queried sensitive value: sum of the states
  // whose bit is set. Bit w-i holds the i-th sensitive value (1-based).
  std::vector<double> freq(w);
  for (std::uint32_t i = 0; i < w; ++i) {
    std::size_t bit = std::size_t{1} << (w - 1 - i);
    double f = 0;
    for (std::size_t s = 0; s < k; ++s) {
      if (s & bit) f += x[s];
    }
    if (f > n * (1.0 + 1e-9)) {
      throw DataError("marginal frequency exceeds the state total");
    }
    freq[i] = f;
  }

  // M = M0 (x) M1 (x) ... (x) Mw with M0 the 2x2 identity and
  // Mi = [[1 - f_i/n, f_i/n], [(l'-1)/l', 1/l']].
  TransitionMatrix m;
  m.k = 1;
  m.a = {1.0};
  auto kron = [](const TransitionMatrix& lhs, const double rhs[4]) {
    TransitionMatrix out;
    out.k = lhs.k * 2;
    out.a.assign(out.k * out.k, 0.0);
    for (std::size_t i = 0; i < lhs.k; ++i) {
      for (std::size_t j = 0; j < lhs.k; ++j) {
        double v = lhs.at(i, j);
        if (v == 0.0) continue;
        for (std::size_t bi = 0; bi < 2; ++bi) {
          for (std::size_t bj = 0; bj < 2; ++bj) {
            out.at(i * 2 + bi, j * 2 + bj) = v * rhs[bi * 2 + bj];
          }
        }
      }
    }
    return out;
  };
  const double identity[4] = {1.0, 0.0, 0.0, 1.0};
  m = kron(m, identity);
  for (std::uint32_t i = 0; i < w; ++i) {
    double theta = freq[i] / n;
    // A value with no occurrences can be neither held nor produced; its
    // factor is the identity (the hold-state row is vacuous since the
    // corresponding components of x are zero).
    if (freq[i] == 0.0) {
      m = kron(m, identity);
      continue;
    }
    const double mi[4] = {1.0 - theta, theta,
                          (l_prime - 1.0) / l_prime, 1.0 / l_prime};
    m = kron(m, mi);
  }
  return m;
}

BayesResult iterative_bayes(const std::vector<double>& y, std::uint32_t l_prime,
                            double n, std::uint32_t w, double tol,
                            std::uint32_t max_iter) {
  if (n <= 0) throw DataError("state total must be positive");
  if (tol <= 0) throw DataError("tolerance must be positive");
  if (max_iter < 1) throw DataError("iteration cap must be at least 1");
  std::size_t k = std::size_t{1} << (w + 1);
  if (y.size() != k) {
    throw DataError("observation vector has " + std::to_string(y.size()) +
                    " components, expected " + std::to_string(k));
  }
  double y_sum = 0;
  for (double v : y) {
    if (v < 0) throw DataError("negative observed count");
    y_sum += v;
  }
  if (std::abs(y_sum - n) > 1e-6 * std::max(1.0, n)) {
    throw DataError("observed counts sum to " + std::to_string(y_sum) +
                    ", expected " + std::to_string(n));
  }

  BayesResult res;
  res.x = y;
  std::vector<double> next(k), col_sum(k);
  for (res.iterations = 1; res.iterations <= max_iter; ++res.iterations) {
    TransitionMatrix m = build_multi_sa_matrix(res.x, l_prime, n, w);
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0;
      for (std::size_t r = 0; r < k; ++r) s += m.at(r, j) * res.x[r];
      col_sum[j] = s;
    }
    for (std::size_t i = 0; i < k; ++i) {
      double acc = 0;
      for (std::size_t j = 0; j < k; ++j) {
        if (y[j] == 0) continue;
        if (col_sum[j] <= 0) {
          ++res.skipped_terms;
          continue;
        }
        acc += y[j] * m.at(i, j) * res.x[i] / col_sum[j];
      }
      next[i] = acc;
    }

    double mass = 0;
    bool converged = true;
    for (std::size_t i = 0; i < k; ++i) {
      if (std::isnan(next[i]) || next[i] < 0) {
        throw DataError("reconstruction diverged: component " + std::to_string(i) +
                        " became " + std::to_string(next[i]));
      }
      mass += next[i];
      double delta = std::abs(next[i] - res.x[i]);
      bool small = res.x[i] < 0.5;
      if (small ? delta > tol / 2 : delta / res.x[i] > tol) converged = false;
    }
    res.max_mass_drift =
        std::max(res.max_mass_drift, std::abs(mass - n) / std::max(1.0, n));
    res.x = next;
    if (converged) {
      res.converged = true;
      break;
    }
  }
  res.iterations = std::min(res.iterations, max_iter);
  return res;
}

QueryEstimate estimate_query(const PublishedTable& table, const CountQuery& q,
                             double tol, std::uint32_t max_iter) {
  ResolvedQuery rq = resolve_query(table.schema(), q);
  std::uint32_t w = static_cast<std::uint32_t>(rq.sa.size());

  if (rq.nsa.empty() && w == 1) {
    return {static_cast<double>(table.count(rq.sa[0].attr, rq.sa[0].code)), 0, true};
  }

  std::size_t k = std::size_t{1} << (w + 1);
  std::vector<double> y(k, 0.0);
  for (std::uint32_t r = 0; r < table.size(); ++r) {
    std::size_t state = 0;
    bool pred = true;
    for (const ResolvedPair& c : rq.nsa) {
      if (table.value(r, c.attr) != c.code) {
        pred = false;
        break;
      }
    }
    if (pred) state |= std::size_t{1} << w;
    for (std::uint32_t i = 0; i < w; ++i) {
      if (table.value(r, rq.sa[i].attr) == rq.sa[i].code) {
        state |= std::size_t{1} << (w - 1 - i);
      }
    }
    y[state] += 1.0;
  }

  // l' = 1 publishes the identity channel; the direct count is exact.
  if (table.l_prime() == 1) return {y[k - 1], 0, true};

  BayesResult res = iterative_bayes(y, table.l_prime(), table.size(), w, tol, max_iter);
  return {res.x[k - 1], res.iterations, res.converged};
}

double estimate_anatomy(const AnatomyPublication& pub, const CountQuery& q) {
  if (q.sa.size() != 1) {
    throw DataError("the anatomy baseline answers single sensitive value queries only");
  }
  ResolvedQuery rq = resolve_query(pub.schema, q);
  if (rq.sa[0].attr != pub.sa_attr) {
    throw DataError("query names a different sensitive attribute than the publication");
  }

  // Matching NSA rows per group.
  std::vector<std::uint32_t> match(pub.group_count, 0);
  const std::vector<std::size_t>& nsa = pub.schema.nsa_indices();
  std::size_t width = pub.nsa_width();
  std::vector<std::pair<std::size_t, std::uint32_t>> conj;  // (column, code)
  for (const ResolvedPair& c : rq.nsa) {
    std::size_t pos = std::find(nsa.begin(), nsa.end(), c.attr) - nsa.begin();
    conj.emplace_back(pos, c.code);
  }
  for (std::uint32_t r = 0; r < pub.nsa_row_count(); ++r) {
    bool ok = true;
    for (const auto& [pos, code] : conj) {
      if (pub.nsa_values[r * width + pos] != code) {
        ok = false;
        break;
      }
    }
    if (ok) ++match[pub.nsa_group_ids[r]];
  }

  double total = 0;
  for (const AnatomyPublication::SaRow& row : pub.sa_rows) {
    if (row.code == rq.sa[0].code) {
      total += static_cast<double>(match[row.group]) * row.count / pub.l;
    }
  }
  return total;
}

double estimate_global_a(const PublishedTable& table, const std::string& sa_attr,
                         const std::string& value, double p) {
  ResolvedPair rp = resolve(table.schema(), sa_attr, value, true);
  std::size_t m = table.schema().attribute(rp.attr).domain.size();
  if (m < 2) throw DataError("domain of " + sa_attr + " is smaller than 2");
  double q = (1.0 - p) / (static_cast<double>(m) - 1.0);
  if (std::abs(p - q) < 1e-12) {
    throw DataError("p = 1/m makes the channel non-invertible");
  }
  double n = table.size();
  double f = table.count(rp.attr, rp.code);
  double est = (f - n * q) / (p - q);
  return std::clamp(est, 0.0, n);
}

double estimate_global_a(const PublishedTable& table, const std::string& value,
                         double p) {
  if (table.schema().sa_indices().size() != 1) {
    throw DataError("table has several sensitive attributes; name one");
  }
  std::size_t attr = table.schema().sa_indices()[0];
  return estimate_global_a(table, table.schema().attribute(attr).name, value, p);
}

}  // namespace ldiverted

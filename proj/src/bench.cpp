#include "ldiverted/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "ldiverted/errors.hpp"
#include "ldiverted/rng.hpp"

namespace ldiverted {

namespace {

constexpr std::uint64_t kStreamPool = 0x9001;
constexpr std::uint64_t kStreamLaplaceAnswers = 0xb37c;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

QueryPool generate_pool(const Schema& schema, const Dataset& d,
                        std::uint32_t pool_size, std::uint64_t seed) {
  if (d.size() == 0) throw DataError("cannot build a pool over an empty dataset");
  if (schema.sa_indices().empty()) throw DataError("schema has no sensitive attribute");
  std::size_t sa = schema.sa_indices()[0];
  const Attribute& sa_attr = schema.attribute(sa);
  std::uint32_t m = static_cast<std::uint32_t>(sa_attr.domain.size());
  if (pool_size < m) {
    throw DataError("pool size " + std::to_string(pool_size) +
                    " is smaller than the sensitive domain (" + std::to_string(m) + ")");
  }

  const std::vector<std::size_t>& nsa = schema.nsa_indices();
  std::uint32_t max_arity = static_cast<std::uint32_t>(std::min<std::size_t>(3, nsa.size()));

  Engine eng = make_engine(seed, kStreamPool);
  QueryPool pool;
  pool.seed = seed;
  pool.pool_size = pool_size;
  pool.queries.reserve(pool_size);
  while (pool.queries.size() < pool_size) {
    std::vector<std::pair<std::string, std::string>> conj;
    if (max_arity > 0) {
      std::uint32_t arity = 1 + static_cast<std::uint32_t>(uniform_index(eng, max_arity));
      std::vector<std::size_t> chosen(nsa);
      for (std::uint32_t i = 0; i < arity; ++i) {
        std::size_t j = i + static_cast<std::size_t>(uniform_index(eng, chosen.size() - i));
        std::swap(chosen[i], chosen[j]);
      }
      chosen.resize(arity);
      std::sort(chosen.begin(), chosen.end());
      for (std::size_t attr : chosen) {
        std::uint32_t row = static_cast<std::uint32_t>(uniform_index(eng, d.size()));
        conj.emplace_back(schema.attribute(attr).name, d.value_name(row, attr));
      }
    }
    for (std::uint32_t code = 0; code < m && pool.queries.size() < pool_size; ++code) {
      CountQuery q;
      q.nsa = conj;
      q.sa.emplace_back(sa_attr.name, sa_attr.domain[code]);
      pool.queries.push_back(std::move(q));
    }
  }
  return pool;
}

namespace {

struct ResolvedConjunct {
  std::size_t attr;
  std::uint32_t code;
};

struct PoolIndex {
  std::size_t sa_attr = 0;
  std::uint32_t m = 0;
  std::vector<std::vector<ResolvedConjunct>> predicates;
  std::vector<std::uint32_t> query_pred;  // per query
  std::vector<std::uint32_t> query_code;  // per query
};

PoolIndex index_pool(const Schema& schema, const std::vector<CountQuery>& queries) {
  PoolIndex idx;
  std::map<std::vector<std::pair<std::size_t, std::uint32_t>>, std::uint32_t> seen;
  for (const CountQuery& q : queries) {
    if (q.sa.size() != 1) {
      throw DataError("the benchmark pool uses single sensitive value queries");
    }
    auto sa_idx = schema.index_of(q.sa[0].first);
    if (!sa_idx || !schema.attribute(*sa_idx).sensitive) {
      throw DataError("query names a non-sensitive attribute as sensitive");
    }
    auto code = schema.attribute(*sa_idx).code_of(q.sa[0].second);
    if (!code) throw DataError("query value outside the sensitive domain");
    if (idx.query_pred.empty()) {
      idx.sa_attr = *sa_idx;
      idx.m = static_cast<std::uint32_t>(schema.attribute(*sa_idx).domain.size());
    } else if (idx.sa_attr != *sa_idx) {
      throw DataError("pool mixes sensitive attributes");
    }

    std::vector<std::pair<std::size_t, std::uint32_t>> key;
    for (const auto& [name, value] : q.nsa) {
      auto a = schema.index_of(name);
      if (!a || schema.attribute(*a).sensitive) {
        throw DataError("bad predicate attribute: " + name);
      }
      auto c = schema.attribute(*a).code_of(value);
      if (!c) throw DataError("predicate value outside domain: " + value);
      key.emplace_back(*a, *c);
    }
    std::sort(key.begin(), key.end());
    auto [it, inserted] = seen.emplace(key, static_cast<std::uint32_t>(idx.predicates.size()));
    if (inserted) {
      std::vector<ResolvedConjunct> conj;
      for (const auto& [a, c] : key) conj.push_back({a, c});
      idx.predicates.push_back(std::move(conj));
    }
    idx.query_pred.push_back(it->second);
    idx.query_code.push_back(*code);
  }
  return idx;
}

// Per-predicate contingency table over (predicate bit, sensitive code),
// computed in one scan per predicate.
struct PredTable {
  std::vector<std::uint64_t> in;   // predicate holds
  std::vector<std::uint64_t> out;  // predicate fails
  std::uint64_t n_in = 0;
  std::uint64_t n = 0;
};

template <typename ValueAt>
PredTable scan_predicate(std::uint32_t rows, std::uint32_t m,
                         const std::vector<ResolvedConjunct>& conj, ValueAt&& value_at,
                         std::size_t sa_attr) {
  PredTable t;
  t.in.assign(m, 0);
  t.out.assign(m, 0);
  t.n = rows;
  for (std::uint32_t r = 0; r < rows; ++r) {
    bool pred = true;
    for (const ResolvedConjunct& c : conj) {
      if (value_at(r, c.attr) != c.code) {
        pred = false;
        break;
      }
    }
    std::uint32_t code = value_at(r, sa_attr);
    if (pred) {
      ++t.in[code];
      ++t.n_in;
    } else {
      ++t.out[code];
    }
  }
  return t;
}

// Value-level inversion for the global randomization channel (same formula
// as estimate_global_a).
double invert_global(double f_prime, double n, std::uint32_t m, double p) {
  double q = (1.0 - p) / (static_cast<double>(m) - 1.0);
  return std::clamp((f_prime - n * q) / (p - q), 0.0, n);
}

struct CellStats {
  // Per bucket: sum of relative errors and observation count (over seeds).
  std::vector<double> err_sum;
  std::vector<std::uint64_t> err_n;
  std::vector<std::vector<std::uint32_t>> iters;  // per bucket
  double anonymize_ms_total = 0.0;
  std::uint32_t anonymize_runs = 0;
  double estimate_ms_total = 0.0;
  std::uint64_t estimates = 0;

  explicit CellStats(std::size_t buckets)
      : err_sum(buckets, 0.0), err_n(buckets, 0), iters(buckets) {}
};

struct BucketIndex {
  std::vector<std::string> names;
  // Bucket memberships per query (bucket ids).
  std::vector<std::vector<std::uint32_t>> of_query;
  std::uint32_t zero_actual = 0;
};

std::string format_bucket(double threshold) {
  std::ostringstream os;
  os << "ge_" << threshold;
  return os.str();
}

BucketIndex make_buckets(const BenchConfig& cfg, const std::vector<std::int64_t>& actual,
                         double n) {
  BucketIndex b;
  for (double t : cfg.selectivity_buckets) b.names.push_back(format_bucket(t));
  std::uint32_t small_id = static_cast<std::uint32_t>(b.names.size());
  b.names.push_back("small_le_" + std::to_string(cfg.small_count_max));
  b.of_query.resize(actual.size());
  for (std::size_t qi = 0; qi < actual.size(); ++qi) {
    if (actual[qi] == 0) {
      ++b.zero_actual;
      continue;
    }
    double sel = static_cast<double>(actual[qi]) / n;
    for (std::uint32_t bi = 0; bi < cfg.selectivity_buckets.size(); ++bi) {
      if (sel >= cfg.selectivity_buckets[bi]) b.of_query[qi].push_back(bi);
    }
    if (actual[qi] <= cfg.small_count_max) b.of_query[qi].push_back(small_id);
  }
  return b;
}

void record(CellStats& stats, const BucketIndex& buckets, std::size_t qi,
            double rel_err, std::uint32_t iter_count) {
  for (std::uint32_t bi : buckets.of_query[qi]) {
    stats.err_sum[bi] += rel_err;
    stats.err_n[bi] += 1;
    stats.iters[bi].push_back(iter_count);
  }
}

void emit_rows(BenchReport& report, const std::string& mechanism,
               const std::string& param, const BucketIndex& buckets,
               CellStats& stats) {
  double anon_ms =
      stats.anonymize_runs ? stats.anonymize_ms_total / stats.anonymize_runs : 0.0;
  double est_ms = stats.estimates ? stats.estimate_ms_total / stats.estimates : 0.0;
  for (std::size_t bi = 0; bi < buckets.names.size(); ++bi) {
    BenchRow row;
    row.mechanism = mechanism;
    row.param = param;
    row.bucket = buckets.names[bi];
    row.n_queries = static_cast<std::uint32_t>(stats.err_n[bi]);
    row.avg_rel_error = stats.err_n[bi]
                            ? stats.err_sum[bi] / static_cast<double>(stats.err_n[bi])
                            : std::numeric_limits<double>::quiet_NaN();
    row.anonymize_ms = anon_ms;
    row.estimate_ms_avg = est_ms;
    std::vector<std::uint32_t>& it = stats.iters[bi];
    if (!it.empty()) {
      std::sort(it.begin(), it.end());
      row.iters_median = it[it.size() / 2];
      double s = 0;
      for (std::uint32_t v : it) s += v;
      row.iters_mean = s / static_cast<double>(it.size());
    }
    report.rows.push_back(std::move(row));
  }
  BenchRow zero;
  zero.mechanism = mechanism;
  zero.param = param;
  zero.bucket = "zero_actual";
  zero.n_queries = buckets.zero_actual;
  zero.avg_rel_error = std::numeric_limits<double>::quiet_NaN();
  zero.anonymize_ms = anon_ms;
  zero.estimate_ms_avg = est_ms;
  report.rows.push_back(std::move(zero));
}

}  // namespace

std::int64_t actual_count(const Dataset& d, const CountQuery& q) {
  PoolIndex idx = index_pool(d.schema(), {q});
  PredTable t = scan_predicate(
      d.size(), idx.m, idx.predicates[0],
      [&](std::uint32_t r, std::size_t a) { return d.value(r, a); }, idx.sa_attr);
  return static_cast<std::int64_t>(t.in[idx.query_code[0]]);
}

double selectivity(const Dataset& d, const CountQuery& q) {
  if (d.size() == 0) return 0.0;
  return static_cast<double>(actual_count(d, q)) / static_cast<double>(d.size());
}

std::string BenchReport::to_csv() const {
  std::ostringstream os;
  os << "mechanism,param,selectivity_bucket,avg_rel_error,n_queries,anonymize_ms,"
        "estimate_ms_avg,iters_median,iters_mean\n";
  for (const BenchRow& r : rows) {
    os << r.mechanism << ',' << r.param << ',' << r.bucket << ',';
    if (std::isnan(r.avg_rel_error)) {
      os << "nan";
    } else {
      os << r.avg_rel_error;
    }
    os << ',' << r.n_queries << ',' << r.anonymize_ms << ',' << r.estimate_ms_avg
       << ',' << r.iters_median << ',' << r.iters_mean << '\n';
  }
  return os.str();
}

const BenchRow* BenchReport::find(const std::string& mechanism, const std::string& param,
                                  const std::string& bucket) const {
  for (const BenchRow& r : rows) {
    if (r.mechanism == mechanism && r.param == param && r.bucket == bucket) return &r;
  }
  return nullptr;
}

BenchReport run_benchmark(const Dataset& d, const BenchConfig& cfg) {
  QueryPool pool = generate_pool(d.schema(), d, cfg.pool_size, cfg.pool_seed);
  PoolIndex idx = index_pool(d.schema(), pool.queries);
  std::size_t n_queries = pool.queries.size();

  // Ground truth (original dataset): actual counts and bucket membership.
  std::vector<std::int64_t> actual(n_queries, 0);
  {
    std::vector<PredTable> truth;
    truth.reserve(idx.predicates.size());
    for (const auto& conj : idx.predicates) {
      truth.push_back(scan_predicate(
          d.size(), idx.m, conj,
          [&](std::uint32_t r, std::size_t a) { return d.value(r, a); }, idx.sa_attr));
    }
    for (std::size_t qi = 0; qi < n_queries; ++qi) {
      actual[qi] =
          static_cast<std::int64_t>(truth[idx.query_pred[qi]].in[idx.query_code[qi]]);
    }
  }
  BucketIndex buckets = make_buckets(cfg, actual, static_cast<double>(d.size()));

  BenchReport report;
  auto has = [&](const std::string& mech) {
    return std::find(cfg.mechanisms.begin(), cfg.mechanisms.end(), mech) !=
           cfg.mechanisms.end();
  };

  // Published-table mechanisms share the estimation loop; `answer` maps a
  // predicate table and query to an estimate.
  auto evaluate_published =
      [&](const PublishedTable& table, CellStats& stats,
          auto&& answer) {
        std::vector<PredTable> tables;
        tables.reserve(idx.predicates.size());
        Clock::time_point t0 = Clock::now();
        for (const auto& conj : idx.predicates) {
          tables.push_back(scan_predicate(
              table.size(), idx.m, conj,
              [&](std::uint32_t r, std::size_t a) { return table.value(r, a); },
              idx.sa_attr));
        }
        for (std::size_t qi = 0; qi < n_queries; ++qi) {
          if (actual[qi] == 0) continue;
          const PredTable& t = tables[idx.query_pred[qi]];
          auto [estimate, iters] =
              answer(t, idx.query_pred[qi], idx.query_code[qi]);
          double rel =
              std::abs(estimate - static_cast<double>(actual[qi])) / actual[qi];
          record(stats, buckets, qi, rel, iters);
        }
        stats.estimate_ms_total += ms_since(t0);
        stats.estimates += n_queries;
      };

  if (has("a_prime")) {
    for (std::uint32_t lp : cfg.l_prime_grid) {
      std::string param = "l_prime=" + std::to_string(lp);
      auto [eligible_d, rep] = enforce_eligibility(d, lp);
      if (!rep.eligible) {
        BenchRow warn;
        warn.mechanism = "a_prime";
        warn.param = param;
        warn.bucket = "ineligible";
        warn.avg_rel_error = std::numeric_limits<double>::quiet_NaN();
        report.rows.push_back(std::move(warn));
        continue;
      }
      CellStats stats(buckets.names.size());
      for (std::uint64_t seed : cfg.seeds) {
        RandomizerConfig rc;
        rc.l_prime = lp;
        rc.seed = seed;
        Clock::time_point t0 = Clock::now();
        PublishedTable table = anonymize_a_prime(eligible_d, rc);
        stats.anonymize_ms_total += ms_since(t0);
        ++stats.anonymize_runs;

        double n = table.size();
        evaluate_published(table, stats,
                           [&](const PredTable& t, std::uint32_t pred, std::uint32_t code)
                               -> std::pair<double, std::uint32_t> {
          double y3 = static_cast<double>(t.in[code]);
          if (lp == 1) return {y3, 0};  // identity channel
          if (idx.predicates[pred].empty()) {
            // Whole-domain value count: the published count is the estimate.
            return {y3, 0};
          }
          std::vector<double> y{static_cast<double>(t.n - t.n_in) - t.out[code],
                                static_cast<double>(t.out[code]),
                                static_cast<double>(t.n_in) - y3, y3};
          BayesResult res = iterative_bayes(y, lp, n, 1, cfg.tol, cfg.max_iter);
          return {res.x[3], res.iterations};
        });
      }
      emit_rows(report, "a_prime", param, buckets, stats);
    }
  }

  if (has("anatomy")) {
    std::string param = "l=" + std::to_string(cfg.anatomy_l);
    auto [eligible_d, rep] = enforce_eligibility(d, cfg.anatomy_l);
    if (!rep.eligible) {
      BenchRow warn;
      warn.mechanism = "anatomy";
      warn.param = param;
      warn.bucket = "ineligible";
      warn.avg_rel_error = std::numeric_limits<double>::quiet_NaN();
      report.rows.push_back(std::move(warn));
    } else {
      CellStats stats(buckets.names.size());
      // The publication is deterministic up to row order; one run suffices.
      Clock::time_point t0 = Clock::now();
      AnatomyPublication pub = anonymize_anatomy(eligible_d, cfg.anatomy_l, cfg.seeds[0]);
      stats.anonymize_ms_total += ms_since(t0);
      ++stats.anonymize_runs;

      // Per-code (group, count) lists.
      std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> per_code(idx.m);
      for (const auto& row : pub.sa_rows) per_code[row.code].push_back({row.group, row.count});

      const std::vector<std::size_t>& nsa = pub.schema.nsa_indices();
      std::size_t width = pub.nsa_width();
      std::vector<std::size_t> col_of_attr(pub.schema.size(), SIZE_MAX);
      for (std::size_t i = 0; i < nsa.size(); ++i) col_of_attr[nsa[i]] = i;

      t0 = Clock::now();
      for (std::uint32_t pi = 0; pi < idx.predicates.size(); ++pi) {
        std::vector<std::uint32_t> match(pub.group_count, 0);
        for (std::uint32_t r = 0; r < pub.nsa_row_count(); ++r) {
          bool ok = true;
          for (const ResolvedConjunct& c : idx.predicates[pi]) {
            if (pub.nsa_values[r * width + col_of_attr[c.attr]] != c.code) {
              ok = false;
              break;
            }
          }
          if (ok) ++match[pub.nsa_group_ids[r]];
        }
        for (std::size_t qi = 0; qi < n_queries; ++qi) {
          if (idx.query_pred[qi] != pi || actual[qi] == 0) continue;
          double est = 0;
          for (const auto& [g, c] : per_code[idx.query_code[qi]]) {
            est += static_cast<double>(match[g]) * c / pub.l;
          }
          double rel = std::abs(est - static_cast<double>(actual[qi])) / actual[qi];
          record(stats, buckets, qi, rel, 0);
        }
      }
      stats.estimate_ms_total += ms_since(t0);
      stats.estimates += n_queries;
      emit_rows(report, "anatomy", param, buckets, stats);
    }
  }

  if (has("global_a")) {
    std::ostringstream ps;
    ps << "p=" << cfg.global_p;
    CellStats stats(buckets.names.size());
    for (std::uint64_t seed : cfg.seeds) {
      Clock::time_point t0 = Clock::now();
      PublishedTable table = anonymize_global_a(d, cfg.global_p, seed);
      stats.anonymize_ms_total += ms_since(t0);
      ++stats.anonymize_runs;
      // This baseline answers conjunctive queries by evaluating them against
      // the randomized table as published; only whole-domain value counts
      // (empty predicate) get the inversion correction. Restricting the
      // inversion to the predicate's subpopulation would turn the baseline
      // into a stronger estimator than the one it benchmarks.
      evaluate_published(table, stats,
                         [&](const PredTable& t, std::uint32_t pred, std::uint32_t code)
                             -> std::pair<double, std::uint32_t> {
        if (idx.predicates[pred].empty()) {
          double est = invert_global(static_cast<double>(t.in[code]),
                                     static_cast<double>(t.n), idx.m, cfg.global_p);
          return {est, 0};
        }
        return {static_cast<double>(t.in[code]), 0};
      });
    }
    emit_rows(report, "global_a", ps.str(), buckets, stats);
  }

  if (has("laplace")) {
    for (double eps : cfg.laplace_epsilons) {
      for (std::uint32_t m_budget : cfg.laplace_budgets) {
        std::ostringstream ps;
        ps << "eps=" << eps << ",m=" << m_budget;
        CellStats stats(buckets.names.size());
        for (std::uint64_t seed : cfg.seeds) {
          Clock::time_point t0 = Clock::now();
          for (std::size_t qi = 0; qi < n_queries; ++qi) {
            if (actual[qi] == 0) continue;
            Engine eng = make_engine(seed, kStreamLaplaceAnswers, qi);
            double answer = static_cast<double>(actual[qi]) +
                            sample_laplace(m_budget / eps, eng);
            double rel = std::abs(answer - static_cast<double>(actual[qi])) / actual[qi];
            record(stats, buckets, qi, rel, 0);
          }
          stats.estimate_ms_total += ms_since(t0);
          stats.estimates += n_queries;
        }
        emit_rows(report, "laplace", ps.str(), buckets, stats);
      }
    }
  }

  return report;
}

}  // namespace ldiverted

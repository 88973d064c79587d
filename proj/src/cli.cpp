#include "ldiverted/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ldiverted/bench.hpp"
#include "ldiverted/errors.hpp"
#include "ldiverted/estimator.hpp"
#include "ldiverted/guarantees.hpp"
#include "ldiverted/mechanism.hpp"

namespace ldiverted {

namespace {

SchemaConfig load_schema(const std::string& spec) {
  if (spec == "census") return census_like_schema();
  return SchemaConfig::from_json_file(spec);
}

std::string sidecar_path_for(const std::string& csv_path) {
  std::size_t dot = csv_path.find_last_of('.');
  std::size_t slash = csv_path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return csv_path + ".json";
  }
  return csv_path.substr(0, dot) + ".json";
}

std::vector<std::uint32_t> parse_grid(const std::string& text) {
  std::vector<std::uint32_t> grid;
  std::size_t dash = text.find('-');
  if (dash != std::string::npos && dash > 0) {
    std::uint32_t lo = std::stoul(text.substr(0, dash));
    std::uint32_t hi = std::stoul(text.substr(dash + 1));
    for (std::uint32_t v = lo; v <= hi; ++v) grid.push_back(v);
    return grid;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) grid.push_back(std::stoul(item));
  return grid;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path);
  out << text;
}

struct GenDataArgs {
  std::uint32_t n = 100000;
  std::string schema = "census";
  std::uint64_t seed = 42;
  std::string out;
};

struct AnonymizeArgs {
  std::string input;
  std::string schema;
  std::string config;  // optional mechanism config JSON
  std::string mechanism = "a_prime";
  std::uint32_t l_prime = 5;
  double p = -1.0;
  std::uint64_t seed = 42;
  std::string out;
  bool unsafe_test_mode = false;
};

struct EstimateArgs {
  std::string input;
  std::string sidecar;
  std::string schema;
  std::string queries;
  std::string sa_value;
  std::string mechanism = "a_prime";
  double p = -1.0;
  double tol = 0.01;
  std::uint32_t max_iter = 10000;
  bool json = false;
  std::string out;
};

struct GuaranteesArgs {
  std::uint32_t l_prime = 5;
  double eps = 0.2;
  double te = 0.02;
  std::uint64_t f_min = 0;
  std::uint64_t f_max = 0;
  std::string out;
};

struct BenchmarkArgs {
  std::string input;
  std::string schema = "census";
  std::uint32_t n = 100000;
  std::uint64_t data_seed = 42;
  std::string mechanisms = "a_prime,anatomy,global_a,laplace";
  std::string l_prime_grid = "2-10";
  std::uint32_t anatomy_l = 5;
  double global_p = 0.2;
  std::string laplace_eps = "0.01,0.05";
  std::string laplace_m = "100";
  std::string seeds = "1,2,3";
  std::uint32_t pool_size = 5000;
  std::uint64_t pool_seed = 7;
  bool json = false;
  std::string out;
};

int run_gen_data(const GenDataArgs& a) {
  Dataset d = generate_synthetic(a.n, load_schema(a.schema), a.seed);
  write_csv(d, a.out);
  std::cerr << "wrote " << d.size() << " rows to " << a.out << "\n";
  return 0;
}

int run_anonymize(const AnonymizeArgs& a) {
  SchemaConfig schema = load_schema(a.schema);

  RandomizerConfig cfg;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw DataError("cannot open mechanism config: " + a.config);
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = RandomizerConfig::from_json(ss.str());
  } else {
    cfg.mechanism = mechanism_from_string(a.mechanism);
    cfg.l_prime = a.l_prime;
    cfg.seed = a.seed;
    cfg.unsafe_test_mode = a.unsafe_test_mode;
    if (a.p >= 0 && cfg.mechanism == MechanismKind::a_prime) {
      // Accept exact fractions through the double flag.
      cfg.p = Fraction{static_cast<std::int64_t>(std::llround(a.p * 1000000)), 1000000};
    }
  }

  Dataset d = ingest_csv(a.input, schema, cfg.seed);

  if (cfg.mechanism == MechanismKind::global_a) {
    if (a.p < 0) throw UsageError("global_a needs --p");
    PublishedTable table = anonymize_global_a(d, a.p, cfg.seed);
    write_published(table, a.out, sidecar_path_for(a.out));
    std::cerr << "published " << table.size() << " rows to " << a.out << "\n";
    return 0;
  }

  auto [eligible_d, report] = enforce_eligibility(d, cfg.l_prime);
  if (!report.eligible) {
    throw InfeasibleError("dataset cannot be made eligible for l_prime=" +
                          std::to_string(cfg.l_prime) + " by deleting at most " +
                          std::to_string(cfg.l_prime - 1) + " tuples");
  }
  if (report.required_deletions > 0) {
    std::cerr << "deleted " << report.required_deletions
              << " tuple(s) to reach eligibility\n";
  }

  if (cfg.mechanism == MechanismKind::anatomy) {
    AnatomyPublication pub = anonymize_anatomy(eligible_d, cfg.l_prime, cfg.seed);
    write_anatomy(pub, a.out);
    std::cerr << "published " << pub.group_count << " groups to " << a.out
              << "_{nsa,sa}.csv\n";
    return 0;
  }

  PublishedTable table = anonymize_a_prime(eligible_d, cfg);
  write_published(table, a.out, sidecar_path_for(a.out));
  std::cerr << "published " << table.size() << " rows to " << a.out << "\n";
  return 0;
}

int run_estimate(const EstimateArgs& a) {
  if (a.queries.empty() && a.sa_value.empty()) {
    throw UsageError("estimate needs --queries or --sa-value");
  }
  if (a.mechanism == "global_a" && a.p < 0) {
    throw UsageError("global_a estimation needs --p");
  }
  SchemaConfig schema = load_schema(a.schema);

  std::vector<CountQuery> queries;
  if (!a.queries.empty()) {
    queries = read_query_file(a.queries);
  } else {
    // Single whole-domain value count: "attr=value" or bare "value".
    CountQuery q;
    std::size_t eq = a.sa_value.find('=');
    if (eq == std::string::npos) {
      if (schema.sensitive.size() != 1) {
        throw UsageError("several sensitive attributes; use attr=value");
      }
      q.sa.emplace_back(schema.sensitive[0], a.sa_value);
    } else {
      q.sa.emplace_back(a.sa_value.substr(0, eq), a.sa_value.substr(eq + 1));
    }
    queries.push_back(std::move(q));
  }

  struct Answer {
    double estimate = 0;
    std::uint32_t iterations = 0;
    bool converged = true;
  };
  std::vector<Answer> answers;
  if (a.mechanism == "anatomy") {
    AnatomyPublication pub = read_anatomy(a.input, schema);
    for (const CountQuery& q : queries) answers.push_back({estimate_anatomy(pub, q)});
  } else {
    std::string sidecar = a.sidecar.empty() ? sidecar_path_for(a.input) : a.sidecar;
    PublishedTable table = read_published(a.input, sidecar, schema);
    for (const CountQuery& q : queries) {
      if (a.mechanism == "global_a") {
        if (q.sa.size() != 1 || !q.nsa.empty()) {
          throw UsageError("global_a estimates whole-domain value counts only");
        }
        answers.push_back(
            {estimate_global_a(table, q.sa[0].first, q.sa[0].second, a.p)});
      } else {
        QueryEstimate qe = estimate_query(table, q, a.tol, a.max_iter);
        answers.push_back({qe.estimate, qe.iterations, qe.converged});
      }
    }
  }

  std::ostringstream os;
  nlohmann::json jout = nlohmann::json::array();
  if (a.sa_value.empty()) {
    if (!a.json) os << "query,estimate,iterations,converged\n";
    for (std::size_t i = 0; i < answers.size(); ++i) {
      if (a.json) {
        jout.push_back({{"query", i},
                        {"estimate", answers[i].estimate},
                        {"iterations", answers[i].iterations},
                        {"converged", answers[i].converged}});
      } else {
        os << i << ',' << answers[i].estimate << ',' << answers[i].iterations << ','
           << (answers[i].converged ? "true" : "false") << '\n';
      }
    }
  } else if (a.json) {
    jout.push_back({{"value", a.sa_value}, {"estimate", answers[0].estimate}});
  } else {
    os << answers[0].estimate << "\n";
  }
  write_text(a.out, a.json ? jout.dump(2) + "\n" : os.str());
  return 0;
}

int run_guarantees(const GuaranteesArgs& a) {
  UtilityThreshold t = utility_threshold(a.l_prime, a.eps, a.te);
  std::cout << "t_f_real=" << t.t_f_real << " t_f_reported=" << t.t_f_reported << "\n";
  if (a.f_min >= 1 && a.f_max >= a.f_min) {
    std::vector<GuaranteeRow> rows = guarantee_tables(a.l_prime, a.eps, a.f_min, a.f_max);
    std::ostringstream os;
    os << "f_s,chebyshev_bound,exact_tail\n";
    for (const GuaranteeRow& r : rows) {
      os << r.f_s << ',' << r.chebyshev_bound << ',' << r.exact_tail << '\n';
    }
    write_text(a.out, os.str());
  }
  return 0;
}

int run_benchmark_cmd(const BenchmarkArgs& a) {
  SchemaConfig schema = load_schema(a.schema);
  Dataset d = a.input.empty() ? generate_synthetic(a.n, schema, a.data_seed)
                              : ingest_csv(a.input, schema, a.data_seed);

  BenchConfig cfg;
  cfg.mechanisms.clear();
  std::stringstream ms(a.mechanisms);
  std::string item;
  while (std::getline(ms, item, ',')) cfg.mechanisms.push_back(item);
  cfg.l_prime_grid = parse_grid(a.l_prime_grid);
  cfg.anatomy_l = a.anatomy_l;
  cfg.global_p = a.global_p;
  cfg.laplace_epsilons.clear();
  std::stringstream es(a.laplace_eps);
  while (std::getline(es, item, ',')) cfg.laplace_epsilons.push_back(std::stod(item));
  cfg.laplace_budgets.clear();
  for (std::uint32_t m : parse_grid(a.laplace_m)) cfg.laplace_budgets.push_back(m);
  cfg.seeds.clear();
  for (std::uint32_t s : parse_grid(a.seeds)) cfg.seeds.push_back(s);
  cfg.pool_size = a.pool_size;
  cfg.pool_seed = a.pool_seed;

  BenchReport report = run_benchmark(d, cfg);
  if (a.json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const BenchRow& r : report.rows) {
      nlohmann::json row{{"mechanism", r.mechanism},
                         {"param", r.param},
                         {"selectivity_bucket", r.bucket},
                         {"n_queries", r.n_queries},
                         {"anonymize_ms", r.anonymize_ms},
                         {"estimate_ms_avg", r.estimate_ms_avg},
                         {"iters_median", r.iters_median},
                         {"iters_mean", r.iters_mean}};
      if (!std::isnan(r.avg_rel_error)) row["avg_rel_error"] = r.avg_rel_error;
      rows.push_back(std::move(row));
    }
    write_text(a.out, rows.dump(2) + "\n");
  } else {
    write_text(a.out, report.to_csv());
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"l'-diverted data publication toolkit"};
  app.require_subcommand(1);

  GenDataArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic dataset");
  gen_cmd->add_option("--n", gen.n, "number of rows");
  gen_cmd->add_option("--schema", gen.schema, "schema JSON path or 'census'");
  gen_cmd->add_option("--seed", gen.seed, "generator seed");
  gen_cmd->add_option("--out", gen.out, "output CSV path")->required();

  AnonymizeArgs anon;
  CLI::App* anon_cmd = app.add_subcommand("anonymize", "publish a sanitized table");
  anon_cmd->add_option("--input", anon.input, "input CSV")->required();
  anon_cmd->add_option("--schema", anon.schema, "schema JSON path or 'census'")->required();
  anon_cmd->add_option("--config", anon.config,
                       "mechanism config JSON (overrides the flags below)");
  anon_cmd->add_option("--mechanism", anon.mechanism, "a_prime | global_a | anatomy");
  anon_cmd->add_option("--l-prime", anon.l_prime, "decoy group size");
  anon_cmd->add_option("--p", anon.p, "keep probability (global_a / test mode)");
  anon_cmd->add_option("--seed", anon.seed, "randomization seed");
  anon_cmd->add_option("--out", anon.out, "output CSV path (sidecar JSON alongside)")
      ->required();
  anon_cmd->add_flag("--unsafe-test-mode", anon.unsafe_test_mode,
                     "allow p != 1/l_prime (voids the guarantee)");

  EstimateArgs est;
  CLI::App* est_cmd = app.add_subcommand("estimate", "estimate counts from a published table");
  est_cmd->add_option("--input", est.input, "published CSV")->required();
  est_cmd->add_option("--sidecar", est.sidecar, "sidecar JSON (default: derived)");
  est_cmd->add_option("--schema", est.schema, "schema JSON path or 'census'")->required();
  est_cmd->add_option("--queries", est.queries, "JSON-lines query file");
  est_cmd->add_option("--sa-value", est.sa_value, "single value count, 'attr=value' or 'value'");
  est_cmd->add_option("--mechanism", est.mechanism, "a_prime | global_a | anatomy");
  est_cmd->add_option("--p", est.p, "keep probability used by global_a");
  est_cmd->add_option("--tol", est.tol, "reconstruction convergence tolerance");
  est_cmd->add_option("--max-iter", est.max_iter, "reconstruction iteration cap");
  est_cmd->add_flag("--json", est.json, "emit JSON instead of CSV");
  est_cmd->add_option("--out", est.out, "output path (default stdout)");

  GuaranteesArgs gua;
  CLI::App* gua_cmd = app.add_subcommand("guarantees", "analytic utility/privacy thresholds");
  gua_cmd->add_option("--l-prime", gua.l_prime, "decoy group size");
  gua_cmd->add_option("--eps", gua.eps, "relative error bound");
  gua_cmd->add_option("--te", gua.te, "error probability threshold");
  gua_cmd->add_option("--f-min", gua.f_min, "table start frequency");
  gua_cmd->add_option("--f-max", gua.f_max, "table end frequency");
  gua_cmd->add_option("--out", gua.out, "table CSV path (default stdout)");

  BenchmarkArgs bench;
  CLI::App* bench_cmd = app.add_subcommand("benchmark", "query-workload benchmark");
  bench_cmd->add_option("--input", bench.input, "input CSV (default: synthetic)");
  bench_cmd->add_option("--schema", bench.schema, "schema JSON path or 'census'");
  bench_cmd->add_option("--n", bench.n, "synthetic dataset size");
  bench_cmd->add_option("--data-seed", bench.data_seed, "synthetic data seed");
  bench_cmd->add_option("--mechanisms", bench.mechanisms, "comma list");
  bench_cmd->add_option("--l-prime-grid", bench.l_prime_grid, "e.g. 2-10 or 2,5,10");
  bench_cmd->add_option("--anatomy-l", bench.anatomy_l, "anatomy group size");
  bench_cmd->add_option("--global-p", bench.global_p, "global randomization keep probability");
  bench_cmd->add_option("--laplace-eps", bench.laplace_eps, "comma list");
  bench_cmd->add_option("--laplace-m", bench.laplace_m, "query budgets, e.g. 100 or 10-100");
  bench_cmd->add_option("--seeds", bench.seeds, "run seeds, e.g. 1,2,3");
  bench_cmd->add_option("--pool-size", bench.pool_size, "query pool size");
  bench_cmd->add_option("--pool-seed", bench.pool_seed, "query pool seed");
  bench_cmd->add_flag("--json", bench.json, "emit JSON instead of CSV");
  bench_cmd->add_option("--out", bench.out, "report CSV path (default stdout)");

  try {
    app.parse(argc, argv);
    if (gen_cmd->parsed()) return run_gen_data(gen);
    if (anon_cmd->parsed()) return run_anonymize(anon);
    if (est_cmd->parsed()) return run_estimate(est);
    if (gua_cmd->parsed()) return run_guarantees(gua);
    if (bench_cmd->parsed()) return run_benchmark_cmd(bench);
    return 2;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 4;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ldiverted

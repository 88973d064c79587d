#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ldiverted/mechanism.hpp"

namespace ldiverted {

// A conjunctive count query: an optional conjunction over non-sensitive
// attributes plus at least one (attribute, value) pair per queried sensitive
// attribute. JSON-lines form:
//   {"nsa":{"attr":"value",...},"sa":{"attr":"value",...}}
struct CountQuery {
  std::vector<std::pair<std::string, std::string>> nsa;
  std::vector<std::pair<std::string, std::string>> sa;

  static CountQuery from_json(const std::string& line);
  std::string to_json() const;
};

std::vector<CountQuery> read_query_file(const std::string& path);

// Row-major square matrix of per-tuple state transition probabilities.
struct TransitionMatrix {
  std::size_t k = 0;
  std::vector<double> a;

  double at(std::size_t i, std::size_t j) const { return a[i * k + j]; }
  double& at(std::size_t i, std::size_t j) { return a[i * k + j]; }
};

// Occurrence count of a sensitive value in the published table; this is the
// maximum-likelihood estimate of its original frequency.
std::int64_t estimate_sa_count(const PublishedTable& table,
                               const std::string& sa_attr, const std::string& value);
// Convenience overload for tables with exactly one sensitive attribute.
std::int64_t estimate_sa_count(const PublishedTable& table, const std::string& value);

// 4x4 transition matrix for one (NSA predicate, sensitive value) pair, with
// states indexed (predicate bit << 1) | value bit. x holds the current state
// counts; n their total.
TransitionMatrix build_single_sa_matrix(const std::vector<double>& x,
                                        std::uint32_t l_prime, double n);

// Kronecker-product transition matrix for w independently randomized
// sensitive attributes (K = 2^(w+1) states; predicate bit highest, then the
// sensitive bits in query order). Per-attribute frequencies are marginals of
// x.
TransitionMatrix build_multi_sa_matrix(const std::vector<double>& x,
                                       std::uint32_t l_prime, double n,
                                       std::uint32_t w);

struct BayesResult {
  std::vector<double> x;
  std::uint32_t iterations = 0;
  bool converged = false;
  // Largest relative drift of the component sum across iterations; the
  // update rule preserves the sum algebraically.
  double max_mass_drift = 0.0;
  // Terms skipped because a column sum vanished while the observation there
  // was positive (inconsistent input).
  std::uint32_t skipped_terms = 0;
};

// Iterative Bayesian reconstruction of the original state counts from the
// observed counts y (x starts at y; the transition matrix is rebuilt from
// the current x each round). Converged when every component moves by at most
// `tol` relatively, with an absolute test of tol/2 for components below 0.5.
BayesResult iterative_bayes(const std::vector<double>& y, std::uint32_t l_prime,
                            double n, std::uint32_t w, double tol = 0.01,
                            std::uint32_t max_iter = 10000);

struct QueryEstimate {
  double estimate = 0.0;
  std::uint32_t iterations = 0;
  bool converged = true;
};

// Count estimate for a conjunctive query against a published table. A query
// with no NSA conjunct and one sensitive value reduces to estimate_sa_count;
// l_prime = 1 tables are the identity channel and are answered by a direct
// count.
QueryEstimate estimate_query(const PublishedTable& table, const CountQuery& q,
                             double tol = 0.01, std::uint32_t max_iter = 10000);

// Anatomy estimate: sum over groups of (matching NSA rows) * (count of the
// queried value in the group) / l. Single sensitive value queries only.
double estimate_anatomy(const AnatomyPublication& pub, const CountQuery& q);

// Inversion estimate for the global randomization baseline:
// (f' - N*q)/(p - q) with q = (1-p)/(m-1), clamped to [0, N].
double estimate_global_a(const PublishedTable& table, const std::string& sa_attr,
                         const std::string& value, double p);
double estimate_global_a(const PublishedTable& table, const std::string& value,
                         double p);

}  // namespace ldiverted

#include "doctest.h"

#include <algorithm>
#include <set>

#include "ldiverted/dataset.hpp"
#include "ldiverted/errors.hpp"

using namespace ldiverted;

namespace {

SchemaConfig two_column_config() {
  SchemaConfig cfg;
  cfg.attributes.push_back({"sex", std::vector<std::string>{"f", "m"}, {}});
  cfg.attributes.push_back(
      {"disease", std::vector<std::string>{"cold", "flu", "ulcer"}, {}});
  cfg.sensitive = {"disease"};
  return cfg;
}

// Dataset with the given sensitive counts (single NSA column, values unique
// per row so nothing collapses).
Dataset counts_dataset(const std::vector<std::pair<std::string, int>>& counts) {
  std::vector<std::string> domain, rows;
  std::vector<std::uint32_t> codes;
  for (const auto& [value, c] : counts) domain.push_back(value);
  for (std::size_t v = 0; v < counts.size(); ++v) {
    for (int i = 0; i < counts[v].second; ++i) codes.push_back(static_cast<std::uint32_t>(v));
  }
  std::uint32_t n = static_cast<std::uint32_t>(codes.size());
  for (std::uint32_t i = 0; i < n; ++i) rows.push_back("row" + std::to_string(i));
  Schema schema({Attribute{"tag", rows, false, {}}, Attribute{"sa", domain, true, {}}});
  std::vector<std::uint32_t> ids, values;
  for (std::uint32_t i = 0; i < n; ++i) {
    ids.push_back(i);
    values.push_back(i);
    values.push_back(codes[i]);
  }
  return Dataset(schema, std::move(ids), std::move(values));
}

std::vector<std::uint32_t> sa_counts(const Dataset& d) {
  return d.value_counts(d.schema().sa_indices()[0]);
}

}  // namespace

TEST_CASE("ingest assigns permutation ids and reads values") {
  Dataset d = ingest_csv_text("sex,disease\nf,cold\nm,flu\nf,ulcer\n",
                              two_column_config(), 11);
  CHECK(d.size() == 3);
  std::set<std::uint32_t> ids(d.ids().begin(), d.ids().end());
  CHECK(ids == std::set<std::uint32_t>{0, 1, 2});
  CHECK(d.value_name(0, 0) == "f");
  CHECK(d.value_name(1, 1) == "flu");
}

TEST_CASE("ingest rejects degenerate inputs") {
  CHECK_THROWS_WITH_AS(ingest_csv_text("sex,disease\n", two_column_config(), 1),
                       doctest::Contains("empty dataset"), DataError);
  CHECK_THROWS_AS(ingest_csv_text("sex,sex\nf,f\n", two_column_config(), 1), DataError);
  CHECK_THROWS_AS(ingest_csv_text("sex,age\nf,3\n", two_column_config(), 1), DataError);
  // Out-of-domain cells name the row and column.
  CHECK_THROWS_WITH_AS(
      ingest_csv_text("sex,disease\nf,cold\nm,plague\n", two_column_config(), 1),
      doctest::Contains("row 3, column disease"), DataError);
}

TEST_CASE("open domains are inferred lexicographically") {
  SchemaConfig cfg = two_column_config();
  cfg.attributes[1].domain.reset();
  Dataset d = ingest_csv_text("sex,disease\nm,zoster\nf,ardor\nm,mumps\n", cfg, 5);
  std::size_t sa = d.schema().sa_indices()[0];
  CHECK(d.schema().attribute(sa).domain ==
        std::vector<std::string>{"ardor", "mumps", "zoster"});
}

TEST_CASE("csv round trip reproduces the dataset exactly") {
  SchemaConfig cfg = two_column_config();
  cfg.attributes[0].dist = Distribution{0.7};
  for (std::uint64_t seed : {1ull, 9ull, 1234ull}) {
    Dataset d = generate_synthetic(257, cfg, seed);
    Dataset back = ingest_csv_text(write_csv_text(d), cfg, seed);
    CHECK(back == d);
  }
}

TEST_CASE("eligibility: already eligible dataset is untouched") {
  Dataset d = counts_dataset({{"a", 2}, {"b", 2}});
  auto [out, report] = enforce_eligibility(d, 2);
  CHECK(report.eligible);
  CHECK(report.required_deletions == 0);
  CHECK(out == d);
  CHECK(report.max_sa_frequency == 2);
}

TEST_CASE("eligibility: one deletion from the most frequent bucket") {
  // Counts {a:2, b:2, c:1}, l'=2: N=5 needs one deletion; ties between a and
  // b break toward a; within a the largest id goes.
  Dataset d = counts_dataset({{"a", 2}, {"b", 2}, {"c", 1}});
  auto [out, report] = enforce_eligibility(d, 2);
  REQUIRE(report.eligible);
  CHECK(report.required_deletions == 1);
  CHECK(out.size() == 4);
  CHECK(report.max_sa_frequency == 2);  // 2 <= 4/2
  std::vector<std::uint32_t> counts = sa_counts(out);
  CHECK(counts == std::vector<std::uint32_t>{1, 2, 1});
  // The deleted tuple is the largest-id holder of value a (ids 0 and 1).
  CHECK(report.deleted_ids == std::vector<std::uint32_t>{1});
}

TEST_CASE("eligibility: infeasible within the deletion budget") {
  Dataset d = counts_dataset({{"a", 5}, {"b", 1}});

  // Exhaustive oracle over every deletion pattern of at most l'-1 = 1 tuple:
  // none may satisfy both conditions.
  for (std::uint32_t drop = 0; drop <= d.size(); ++drop) {
    Dataset candidate = drop == d.size() ? d : d.without_ids({drop});
    CHECK_FALSE(is_eligible(candidate, 2));
  }

  auto [out, report] = enforce_eligibility(d, 2);
  CHECK_FALSE(report.eligible);
  CHECK(out == d);
  CHECK(report.deleted_ids.empty());
}

TEST_CASE("eligibility is idempotent") {
  Dataset d = counts_dataset({{"a", 3}, {"b", 2}, {"c", 2}});
  auto [once, r1] = enforce_eligibility(d, 3);
  REQUIRE(r1.eligible);
  auto [twice, r2] = enforce_eligibility(once, 3);
  CHECK(r2.eligible);
  CHECK(r2.required_deletions == 0);
  CHECK(twice == once);
}

TEST_CASE("l_prime = 1 needs no deletions") {
  Dataset d = counts_dataset({{"a", 7}});
  auto [out, report] = enforce_eligibility(d, 1);
  CHECK(report.eligible);
  CHECK(report.required_deletions == 0);
}

TEST_CASE("ids depend only on seed and size, never on contents") {
  SchemaConfig cfg = two_column_config();
  Dataset a = ingest_csv_text("sex,disease\nf,cold\nm,flu\nf,ulcer\n", cfg, 99);
  Dataset b = ingest_csv_text("sex,disease\nm,ulcer\nm,ulcer\nm,ulcer\n", cfg, 99);
  CHECK(a.ids() == b.ids());
  Dataset c = generate_synthetic(3, cfg, 99);
  CHECK(c.ids() == a.ids());
}

TEST_CASE("synthetic generation is deterministic and respects marginals") {
  SchemaConfig cfg;
  std::vector<std::string> occ;
  for (int i = 1; i <= 50; ++i) occ.push_back("occ" + std::to_string(i));
  cfg.attributes.push_back({"occupation", occ, {}});
  cfg.sensitive = {"occupation"};

  Dataset d = generate_synthetic(100000, cfg, 17);
  CHECK(d.size() == 100000);
  std::vector<std::uint32_t> counts = sa_counts(d);
  // Uniform over 50 values: every frequency near 2000 (5.6 sigma band).
  for (std::uint32_t c : counts) {
    CHECK(c > 1750);
    CHECK(c < 2250);
  }

  CHECK(generate_synthetic(500, cfg, 4) == generate_synthetic(500, cfg, 4));
  CHECK_FALSE(generate_synthetic(500, cfg, 4) == generate_synthetic(500, cfg, 5));

  Dataset single = generate_synthetic(1, cfg, 0);
  CHECK(single.size() == 1);
}

TEST_CASE("zipf marginals decay with rank") {
  SchemaConfig cfg;
  cfg.attributes.push_back(
      {"v", std::vector<std::string>{"top", "mid", "low"}, Distribution{1.0}});
  cfg.sensitive = {"v"};
  Dataset d = generate_synthetic(60000, cfg, 2);
  std::vector<std::uint32_t> counts = sa_counts(d);
  // Weights 1 : 1/2 : 1/3.
  CHECK(counts[0] > counts[1]);
  CHECK(counts[1] > counts[2]);
  CHECK(std::abs(static_cast<double>(counts[0]) / counts[1] - 2.0) < 0.15);
}

TEST_CASE("generation requires declared domains") {
  SchemaConfig cfg;
  cfg.attributes.push_back({"v", std::nullopt, {}});
  cfg.sensitive = {"v"};
  CHECK_THROWS_WITH_AS(generate_synthetic(10, cfg, 1), doctest::Contains("empty domain"),
                       DataError);
}

TEST_CASE("schema config parses dists and rejects junk") {
  SchemaConfig cfg = SchemaConfig::from_json(
      R"({"attributes":[{"name":"a","domain":["x","y"],"dist":{"zipf":1.5}},
          {"name":"s","domain":["u","v"],"dist":"uniform"}],
          "sensitive":["s"]})");
  CHECK(cfg.attributes[0].dist.zipf_exponent == 1.5);
  CHECK(cfg.attributes[1].dist.is_uniform());
  CHECK_THROWS_AS(SchemaConfig::from_json("{"), DataError);
  CHECK_THROWS_AS(
      SchemaConfig::from_json(R"({"attributes":[{"name":"s","domain":["u"]}]})"),
      DataError);
}

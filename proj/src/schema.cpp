#include "ldiverted/schema.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ldiverted/errors.hpp"

namespace ldiverted {

std::optional<std::uint32_t> Attribute::code_of(const std::string& value) const {
  for (std::size_t i = 0; i < domain.size(); ++i) {
    if (domain[i] == value) return static_cast<std::uint32_t>(i);
  }
  return std::nullopt;
}

Schema::Schema(std::vector<Attribute> attributes) : attrs_(std::move(attributes)) {
  std::set<std::string> names;
  for (std::size_t i = 0; i < attrs_.size(); ++i) {
    const Attribute& a = attrs_[i];
    if (!names.insert(a.name).second) {
      throw DataError("duplicate attribute name: " + a.name);
    }
    if (a.domain.empty()) {
      throw DataError("empty domain for attribute: " + a.name);
    }
    std::set<std::string> vals(a.domain.begin(), a.domain.end());
    if (vals.size() != a.domain.size()) {
      throw DataError("duplicate domain value in attribute: " + a.name);
    }
    (a.sensitive ? sa_ : nsa_).push_back(i);
  }
  if (!attrs_.empty() && sa_.empty()) {
    throw DataError("schema declares no sensitive attribute");
  }
}

std::optional<std::size_t> Schema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < attrs_.size(); ++i) {
    if (attrs_[i].name == name) return i;
  }
  return std::nullopt;
}

bool Schema::operator==(const Schema& other) const {
  if (attrs_.size() != other.attrs_.size()) return false;
  for (std::size_t i = 0; i < attrs_.size(); ++i) {
    const Attribute &a = attrs_[i], &b = other.attrs_[i];
    if (a.name != b.name || a.domain != b.domain || a.sensitive != b.sensitive) {
      return false;
    }
  }
  return true;
}

namespace {

Distribution parse_dist(const nlohmann::json& j) {
  Distribution d;
  if (j.is_string()) {
    if (j.get<std::string>() != "uniform") {
      throw DataError("unknown distribution: " + j.get<std::string>());
    }
  } else if (j.is_object() && j.contains("zipf")) {
    d.zipf_exponent = j.at("zipf").get<double>();
    if (d.zipf_exponent < 0) throw DataError("zipf exponent must be non-negative");
  } else {
    throw DataError("distribution must be \"uniform\" or {\"zipf\": s}");
  }
  return d;
}

}  // namespace

SchemaConfig SchemaConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("schema config is not valid JSON: ") + e.what());
  }
  SchemaConfig cfg;
  if (!j.contains("attributes") || !j["attributes"].is_array()) {
    throw DataError("schema config needs an \"attributes\" array");
  }
  for (const auto& a : j["attributes"]) {
    Entry e;
    e.name = a.at("name").get<std::string>();
    if (a.contains("domain") && !a["domain"].is_null()) {
      e.domain = a["domain"].get<std::vector<std::string>>();
    }
    if (a.contains("dist")) e.dist = parse_dist(a["dist"]);
    cfg.attributes.push_back(std::move(e));
  }
  if (j.contains("sensitive")) {
    cfg.sensitive = j["sensitive"].get<std::vector<std::string>>();
  }
  if (cfg.sensitive.empty()) {
    throw DataError("schema config needs a nonempty \"sensitive\" list");
  }
  for (const auto& s : cfg.sensitive) {
    bool found = std::any_of(cfg.attributes.begin(), cfg.attributes.end(),
                             [&](const Entry& e) { return e.name == s; });
    if (!found) throw DataError("sensitive attribute not declared: " + s);
  }
  return cfg;
}

SchemaConfig SchemaConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

Schema SchemaConfig::resolve() const {
  return resolve_with(std::vector<std::vector<std::string>>(attributes.size()));
}

Schema SchemaConfig::resolve_with(
    const std::vector<std::vector<std::string>>& inferred) const {
  std::vector<Attribute> attrs;
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    const Entry& e = attributes[i];
    Attribute a;
    a.name = e.name;
    a.dist = e.dist;
    a.sensitive = std::find(sensitive.begin(), sensitive.end(), e.name) != sensitive.end();
    if (e.domain) {
      a.domain = *e.domain;
    } else if (i < inferred.size() && !inferred[i].empty()) {
      a.domain = inferred[i];
    }
    if (a.domain.empty()) {
      throw DataError("empty domain for attribute: " + e.name);
    }
    attrs.push_back(std::move(a));
  }
  return Schema(std::move(attrs));
}

SchemaConfig census_like_schema() {
  auto values = [](const std::string& prefix, int n) {
    std::vector<std::string> v;
    for (int i = 1; i <= n; ++i) v.push_back(prefix + std::to_string(i));
    return v;
  };
  SchemaConfig cfg;
  // citizenship is dominated by one value, which is what lets conjunctive
  // queries reach the benchmark's high-selectivity buckets.
  cfg.attributes.push_back({"citizenship", std::vector<std::string>{"citizen", "noncitizen"},
                            Distribution{3.17}});
  cfg.attributes.push_back({"sex", std::vector<std::string>{"female", "male"},
                            Distribution{}});
  cfg.attributes.push_back({"age_group", values("age", 10), Distribution{0.4}});
  cfg.attributes.push_back({"education", values("edu", 8), Distribution{0.6}});
  cfg.attributes.push_back({"marital", values("marital", 5), Distribution{}});
  cfg.attributes.push_back({"occupation", values("occ", 50), Distribution{0.28}});
  cfg.sensitive = {"occupation"};
  return cfg;
}

}  // namespace ldiverted

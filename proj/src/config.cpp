#include "sbdp/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sbdp {

namespace {

using nlohmann::json;

void flatten(const json& j, const std::string& prefix, std::map<std::string, std::string>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    return;
  }
  if (prefix.empty()) throw Error(ErrorKind::config_error, "configuration must be a JSON object");
  out[prefix] = j.is_string() ? j.get<std::string>() : j.dump();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config_error, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config_error, origin + ": " + e.what());
  }
}

}  // namespace

Config Config::parse(const std::string& json_text, const std::string& origin) {
  Config c;
  c.origin_ = origin;
  flatten(parse_json(json_text, origin), "", c.values_);
  return c;
}

Config Config::load(const std::string& path) { return parse(read_file(path), path); }

std::optional<std::string> Config::text(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> Config::number(const std::string& key) const {
  auto t = text(key);
  if (!t) return std::nullopt;
  try {
    size_t used = 0;
    double v = std::stod(*t, &used);
    if (used == t->size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::config_error, origin_ + ": '" + key + "' is not a number: " + *t, -1, key);
}

std::optional<int> Config::integer(const std::string& key) const {
  auto v = number(key);
  if (!v) return std::nullopt;
  if (*v != static_cast<double>(static_cast<long>(*v)))
    throw Error(ErrorKind::config_error, origin_ + ": '" + key + "' must be an integer", -1, key);
  return static_cast<int>(*v);
}

std::optional<bool> Config::flag(const std::string& key) const {
  auto t = text(key);
  if (!t) return std::nullopt;
  if (*t == "true" || *t == "1") return true;
  if (*t == "false" || *t == "0") return false;
  throw Error(ErrorKind::config_error, origin_ + ": '" + key + "' must be true or false", -1, key);
}

std::optional<std::vector<double>> Config::numbers(const std::string& key) const {
  auto t = text(key);
  if (!t) return std::nullopt;
  json j = parse_json(*t, origin_ + ": " + key);
  if (!j.is_array())
    throw Error(ErrorKind::config_error, origin_ + ": '" + key + "' must be an array", -1, key);
  std::vector<double> v;
  for (const json& e : j) {
    if (!e.is_number())
      throw Error(ErrorKind::config_error, origin_ + ": '" + key + "' must hold numbers", -1, key);
    v.push_back(e.get<double>());
  }
  return v;
}

std::map<std::string, std::string> Config::section(const std::string& prefix) const {
  std::map<std::string, std::string> out;
  const std::string p = prefix + ".";
  for (const auto& [k, v] : values_)
    if (k.compare(0, p.size(), p) == 0) out[k.substr(p.size())] = v;
  return out;
}

void Config::check_known(const std::vector<std::string>& known) const {
  for (const auto& [k, v] : values_) {
    bool ok = false;
    for (const std::string& n : known) {
      if (n.size() > 2 && n.compare(n.size() - 2, 2, ".*") == 0) {
        const std::string p = n.substr(0, n.size() - 1);
        ok = k.compare(0, p.size(), p) == 0;
      } else {
        ok = k == n;
      }
      if (ok) break;
    }
    if (!ok) throw Error(ErrorKind::config_error, origin_ + ": unknown key '" + k + "'", -1, k);
  }
}

ProblemDefinition parse_problem_definition(const std::string& json_text) {
  json j = parse_json(json_text, "problem definition");
  if (!j.is_object()) throw Error(ErrorKind::config_error, "problem definition must be an object");
  ProblemDefinition d;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      if (k == "benchmark") {
        d.spec.id = it->get<std::string>();
      } else if (k == "initializer") {
        d.spec.initializer = it->get<std::string>();
      } else if (k == "overrides") {
        for (auto o = it->begin(); o != it->end(); ++o)
          d.spec.overrides[o.key()] = o->is_string() ? o->get<std::string>() : o->dump();
      } else if (k == "agents") {
        d.agents = it->get<int>();
      } else if (k == "neighbors") {
        d.neighbors = it->get<std::vector<std::vector<int>>>();
      } else if (k == "dimensions") {
        for (const json& e : *it)
          d.dimensions.push_back({e.at("n").get<int>(), e.value("n_eq", 0), e.value("n_ineq", 0)});
      } else {
        throw Error(ErrorKind::config_error, "problem definition: unknown field '" + k + "'", -1, k);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config_error, std::string("problem definition: ") + e.what());
  }
  if (d.spec.id.empty())
    throw Error(ErrorKind::config_error, "problem definition needs a 'benchmark' id", -1,
                "benchmark");
  return d;
}

ProblemDefinition load_problem_definition(const std::string& path) {
  return parse_problem_definition(read_file(path));
}

void check_problem_definition(const ProblemDefinition& def, const PartitionedNlp& nlp) {
  const int M = nlp.agent_count();
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::config_error, "problem definition does not match the benchmark: " + what);
  };
  if (def.agents && *def.agents != M)
    fail("agents = " + std::to_string(*def.agents) + ", benchmark has " + std::to_string(M));
  if (def.neighbors) {
    if (static_cast<int>(def.neighbors->size()) != M) fail("neighbor list count");
    for (int i = 0; i < M; ++i)
      if ((*def.neighbors)[i] != nlp.graph.neighbors(i))
        fail("neighbors of agent " + std::to_string(i));
  }
  if (!def.dimensions.empty()) {
    if (static_cast<int>(def.dimensions.size()) != M) fail("dimension list count");
    for (int i = 0; i < M; ++i) {
      const auto& dim = def.dimensions[i];
      const auto& a = nlp.agents[i];
      if (dim.size() != 3 || dim[0] != a.n || dim[1] != a.n_eq || dim[2] != a.n_ineq)
        fail("dimensions of agent " + std::to_string(i));
    }
  }
}

}  // namespace sbdp

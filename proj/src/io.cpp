#include "costcode/io.hpp"

#include <fstream>
#include <sstream>

#include "costcode/error.hpp"
#include "json.hpp"

namespace costcode {

using nlohmann::json;

namespace {

json parse(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

std::vector<double> numbers(const json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError("'" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError("'" + key + "' must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

IidSource iid_from(const json& j) {
  return IidSource(numbers(field(j, "pmf"), "pmf"));
}

} // namespace

CostModel cost_model_from_json(std::string_view text) {
  const json j = parse(text, "cost model");
  const json& k = field(j, "K");
  if (!k.is_number_integer() || k.get<long long>() < 2) {
    throw ConfigError("'K' must be an integer >= 2");
  }
  std::map<std::string, std::vector<double>> conditional;
  if (j.contains("conditional")) {
    const json& table = j.at("conditional");
    if (!table.is_object()) throw ConfigError("'conditional' must be an object");
    for (const auto& [context, row] : table.items()) {
      conditional[context] = numbers(row, "conditional." + context);
    }
  }
  std::size_t depth = CostModel::kDefaultContextDepth;
  if (j.contains("max_context_depth")) {
    const json& d = j.at("max_context_depth");
    if (!d.is_number_integer() || d.get<long long>() < 0) {
      throw ConfigError("'max_context_depth' must be a nonnegative integer");
    }
    depth = d.get<std::size_t>();
  }
  return CostModel(k.get<std::size_t>(), numbers(field(j, "costs"), "costs"),
                   std::move(conditional), depth);
}

Source source_from_json(std::string_view text) {
  const json j = parse(text, "source spec");
  const json& type = field(j, "type");
  if (type == "iid") return iid_from(j);
  if (type == "mixed") {
    const auto w = numbers(field(j, "weights"), "weights");
    const json& comps = field(j, "components");
    if (w.size() != 2 || !comps.is_array() || comps.size() != 2) {
      throw ConfigError("mixed source needs exactly two weights and two components");
    }
    return MixedSource({w[0], w[1]}, {iid_from(comps[0]), iid_from(comps[1])});
  }
  throw ConfigError("source 'type' must be \"iid\" or \"mixed\"");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << contents;
}

CostModel load_cost_model(const std::string& path) { return cost_model_from_json(read_file(path)); }

Source load_source(const std::string& path) { return source_from_json(read_file(path)); }

} // namespace costcode

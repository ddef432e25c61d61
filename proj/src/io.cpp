#include "bellbox/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bellbox/error.hpp"

namespace bellbox::io {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

const json& field(const json& doc, const char* name) {
  const auto it = doc.find(name);
  if (it == doc.end()) throw ParseError(std::string("missing field '") + name + "'");
  return *it;
}

template <class T>
T get_as(const json& value, const std::string& name) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ParseError("field '" + name + "' has the wrong type");
  }
}

Scenario scenario_from(const json& doc) {
  const int parties = get_as<int>(field(doc, "parties"), "parties");
  auto inputs = get_as<std::vector<int>>(field(doc, "inputs"), "inputs");
  auto outputs = get_as<std::vector<std::vector<int>>>(field(doc, "outputs"), "outputs");
  if (parties < 1 || static_cast<std::size_t>(parties) != inputs.size())
    throw ValidationError("field 'parties' (" + std::to_string(parties) + ") disagrees with 'inputs'");
  try {
    return Scenario(std::move(inputs), std::move(outputs));
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("field 'outputs': ") + e.what());
  }
}

void put_scenario(ordered_json& doc, const Scenario& s) {
  doc["parties"] = s.parties();
  doc["inputs"] = s.inputs_per_party();
  doc["outputs"] = s.output_table();
}

CMatrix matrix_from(const json& value, std::size_t d, const std::string& name) {
  const auto entries = get_as<std::vector<std::vector<double>>>(value, name);
  if (entries.size() != d * d)
    throw ValidationError("field '" + name + "' needs " + std::to_string(d * d) + " entries, has " +
                          std::to_string(entries.size()));
  std::vector<Complex> data;
  data.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.size() != 2) throw ParseError("field '" + name + "': complex entries are [re, im] pairs");
    data.emplace_back(e[0], e[1]);
  }
  return CMatrix(d, d, std::move(data));
}

ordered_json matrix_to(const CMatrix& m) {
  ordered_json arr = ordered_json::array();
  for (const auto& v : m.data()) arr.push_back({v.real(), v.imag()});
  return arr;
}

MeasurementSet measurements_from(const json& value, std::size_t d, const std::string& name) {
  if (!value.is_array()) throw ParseError("field '" + name + "' must be an array of inputs");
  std::vector<std::vector<CMatrix>> effects;
  for (std::size_t x = 0; x < value.size(); ++x) {
    if (!value[x].is_array()) throw ParseError("field '" + name + "' input " + std::to_string(x) + " must list effects");
    std::vector<CMatrix> povm;
    for (std::size_t a = 0; a < value[x].size(); ++a)
      povm.push_back(matrix_from(value[x][a], d, name + "[" + std::to_string(x) + "][" + std::to_string(a) + "]"));
    effects.push_back(std::move(povm));
  }
  try {
    return MeasurementSet(std::move(effects));
  } catch (const ValidationError& e) {
    throw ValidationError("field '" + name + "': " + e.what());
  }
}

ordered_json measurements_to(const MeasurementSet& m) {
  ordered_json arr = ordered_json::array();
  for (const auto& povm : m.effects()) {
    ordered_json in = ordered_json::array();
    for (const auto& e : povm) in.push_back(matrix_to(e));
    arr.push_back(std::move(in));
  }
  return arr;
}

std::string dump(const ordered_json& doc) { return doc.dump(2) + "\n"; }

} // namespace

Document parse_document(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("line " + std::to_string(line_of(text, e.byte == 0 ? 0 : e.byte - 1)) + ": " +
                     "malformed document (" + std::string(e.what()).substr(std::string(e.what()).find(':') + 2) + ")");
  }
  if (!doc.is_object()) throw ParseError("line 1: document must be a JSON object");
  const auto kind = get_as<std::string>(field(doc, "kind"), "kind");

  if (kind == "scenario") return scenario_from(doc);
  if (kind == "behavior") {
    const Scenario s = scenario_from(doc);
    const auto probs = get_as<std::vector<double>>(field(doc, "probs"), "probs");
    const double tol = doc.contains("tol") ? get_as<double>(doc["tol"], "tol") : kDefaultTol;
    if (!(tol >= 0.0)) throw ValidationError("field 'tol' must be nonnegative");
    try {
      return validate_behavior(s, probs, tol);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("field 'probs': ") + e.what());
    }
  }
  if (kind == "inequality") {
    const Scenario s = scenario_from(doc);
    auto coeffs = get_as<std::vector<double>>(field(doc, "coeffs"), "coeffs");
    if (coeffs.size() != s.dimension())
      throw ValidationError("field 'coeffs' has " + std::to_string(coeffs.size()) + " entries, scenario needs " +
                            std::to_string(s.dimension()));
    const double bound = get_as<double>(field(doc, "local_bound"), "local_bound");
    const std::string note = doc.contains("note") ? get_as<std::string>(doc["note"], "note") : "";
    try {
      return BellFunctional(s, std::move(coeffs), bound, note);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("field 'local_bound': ") + e.what());
    }
  }
  if (kind == "setup") {
    const auto dims = get_as<std::vector<int>>(field(doc, "dims"), "dims");
    if (dims.size() != 2 || dims[0] < 1 || dims[1] < 1)
      throw ValidationError("field 'dims' must hold two positive dimensions");
    const auto da = static_cast<std::size_t>(dims[0]);
    const auto db = static_cast<std::size_t>(dims[1]);
    CMatrix rho = matrix_from(field(doc, "state"), da * db, "state");
    std::optional<QuantumState> state;
    try {
      state.emplace(dims[0], dims[1], std::move(rho));
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("field 'state': ") + e.what());
    }
    auto alice = measurements_from(field(doc, "alice"), da, "alice");
    auto bob = measurements_from(field(doc, "bob"), db, "bob");
    return BellSetup(std::move(*state), std::move(alice), std::move(bob));
  }
  throw ParseError("unknown document kind '" + kind + "' (expected scenario, behavior, inequality or setup)");
}

Document read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_document(ss.str());
}

std::string emit(const Scenario& scenario) {
  ordered_json doc;
  doc["kind"] = "scenario";
  put_scenario(doc, scenario);
  return dump(doc);
}

std::string emit(const Behavior& behavior, double tol) {
  ordered_json doc;
  doc["kind"] = "behavior";
  put_scenario(doc, behavior.scenario());
  doc["probs"] = std::vector<double>(behavior.probs().begin(), behavior.probs().end());
  doc["tol"] = tol;
  return dump(doc);
}

std::string emit(const BellFunctional& functional) {
  ordered_json doc;
  doc["kind"] = "inequality";
  put_scenario(doc, functional.scenario());
  doc["coeffs"] = std::vector<double>(functional.coeffs().begin(), functional.coeffs().end());
  doc["local_bound"] = functional.local_bound();
  if (!functional.note().empty()) doc["note"] = functional.note();
  return dump(doc);
}

std::string emit(const BellSetup& setup) {
  ordered_json doc;
  doc["kind"] = "setup";
  doc["dims"] = {setup.state().dim_a(), setup.state().dim_b()};
  doc["state"] = matrix_to(setup.state().rho());
  doc["alice"] = measurements_to(setup.alice());
  doc["bob"] = measurements_to(setup.bob());
  return dump(doc);
}

std::string emit(const Document& document) {
  return std::visit([](const auto& v) { return emit(v); }, document);
}

std::string kind_of(const Document& document) {
  switch (document.index()) {
  case 0: return "scenario";
  case 1: return "behavior";
  case 2: return "inequality";
  default: return "setup";
  }
}

} // namespace bellbox::io

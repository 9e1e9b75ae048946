#include "geofc/harness/scenario_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "geofc/errors.hpp"

namespace geofc {

using nlohmann::json;

namespace {

// Walks a JSON object while remembering where it is, so every schema error
// names the exact field.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError((path_.empty() ? std::string("<root>") : path_) + ": " + what);
  }

  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!node_.contains(key)) throw ValidationError(child_path(key) + ": required field is missing");
    return node_.at(key);
  }

  double number(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number()) throw ValidationError(child_path(key) + ": expected a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) throw ValidationError(child_path(key) + ": must be finite");
    return x;
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : (seen_.insert(key), fallback); }

  int integer(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number_integer()) throw ValidationError(child_path(key) + ": expected an integer");
    return v.get<int>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_string()) throw ValidationError(child_path(key) + ": expected a string");
    return v.get<std::string>();
  }

  Reader object(const std::string& key) { return Reader(raw(key), child_path(key)); }

  std::optional<Reader> optional_object(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return std::nullopt;
    return Reader(node_.at(key), child_path(key));
  }

  template <typename F>
  void each(const std::string& key, bool required, F&& visit) {
    seen_.insert(key);
    if (!has(key)) {
      if (required) throw ValidationError(child_path(key) + ": required field is missing");
      return;
    }
    const auto& arr = node_.at(key);
    if (!arr.is_array()) throw ValidationError(child_path(key) + ": expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) visit(arr[i], child_path(key) + "[" + std::to_string(i) + "]");
  }

  // Unknown keys are almost always typos; reject them.
  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) throw ValidationError(child_path(it.key()) + ": unknown field");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string describe_position(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

Scenario read_scenario(Reader& root) {
  Scenario sc;
  {
    Reader net = root.object("network");
    double f0 = net.number("f0", 60.0);
    std::vector<Bus> buses;
    net.each("buses", true, [&](const json& node, const std::string& path) {
      Reader r(node, path);
      Bus b;
      b.id = r.integer("id");
      b.p = r.number("p");
      b.D = r.number("D");
      b.droop_gain = r.number("droop_gain", 0.0);
      b.M = r.number("M");
      if (r.has("datacenter")) b.datacenter = r.integer("datacenter");
      r.finish();
      buses.push_back(b);
    });
    std::vector<Line> lines;
    net.each("lines", true, [&](const json& node, const std::string& path) {
      Reader r(node, path);
      Line l;
      l.from = r.integer("from");
      l.to = r.integer("to");
      l.Y = r.number("Y");
      r.finish();
      lines.push_back(l);
    });
    net.finish();
    sc.network = Network(std::move(buses), std::move(lines), f0);
  }
  {
    Reader cloud = root.object("cloud");
    sc.cloud.W = cloud.number("W");
    sc.cloud.gamma = cloud.number("gamma");
    sc.cloud.epsilon = cloud.number("epsilon", 1e-6);
    cloud.each("datacenters", true, [&](const json& node, const std::string& path) {
      Reader r(node, path);
      Datacenter dc;
      dc.id = r.integer("id");
      dc.bus = r.integer("bus");
      dc.a = r.number("a");
      dc.d_min = r.number("d_min");
      dc.d_max = r.number("d_max");
      dc.d_nom = r.number("d_nom");
      dc.eta = r.number("eta");
      r.finish();
      if (dc.d_min > dc.d_max) {
        throw ValidationError(path + ": datacenter " + std::to_string(dc.id) + " has d_min > d_max");
      }
      sc.cloud.datacenters.push_back(dc);
    });
    cloud.finish();
  }
  {
    ControllerConfig defaults;
    if (auto costs = root.optional_object("costs")) {
      sc.controller.alpha = costs->number("alpha", defaults.alpha);
      costs->finish();
    }
    if (auto ctl = root.optional_object("controller")) {
      std::string kind = ctl->text("kind", std::string(to_string(defaults.kind)));
      std::string meas = ctl->text("measurement", std::string(to_string(defaults.measurement)));
      try {
        sc.controller.kind = parse_controller_kind(kind);
        sc.controller.measurement = parse_frequency_measurement(meas);
      } catch (const InvalidInput& e) {
        throw ValidationError(ctl->child_path("kind/measurement") + ": " + e.what());
      }
      sc.controller.beta = ctl->number("beta", defaults.beta);
      sc.controller.mu0 = ctl->number("mu0", defaults.mu0);
      sc.controller.delay = ctl->number("delay", defaults.delay);
      sc.controller.action_period = ctl->number("action_period", defaults.action_period);
      ctl->finish();
    }
  }
  if (auto sim = root.optional_object("simulation")) {
    SimulationConfig d;
    sc.simulation.dt = sim->number("dt", d.dt);
    sc.simulation.t_end = sim->number("t_end", d.t_end);
    sc.simulation.record_every = sim->number("record_every", d.record_every);
    sim->each("events", false, [&](const json& node, const std::string& path) {
      Reader r(node, path);
      DisturbanceEvent ev;
      ev.time = r.number("time");
      ev.bus = r.integer("bus");
      ev.delta_p = r.number("delta_p");
      r.finish();
      sc.events.push_back(ev);
    });
    if (auto det = sim->optional_object("detection")) {
      DetectionConfig d0;
      sc.detection.tol_omega_dot = det->number("tol_omega_dot", d0.tol_omega_dot);
      sc.detection.tol_sync = det->number("tol_sync", d0.tol_sync);
      sc.detection.tol_mu_dot = det->number("tol_mu_dot", d0.tol_mu_dot);
      sc.detection.tol_d_dot = det->number("tol_d_dot", d0.tol_d_dot);
      sc.detection.window = det->number("window", d0.window);
      det->finish();
    }
    sim->finish();
  }
  return sc;
}

json to_json(const Scenario& sc) {
  json buses = json::array();
  for (const auto& b : sc.network.buses()) {
    json jb = {{"id", b.id}, {"p", b.p}, {"D", b.D}, {"droop_gain", b.droop_gain}, {"M", b.M}};
    if (b.datacenter) jb["datacenter"] = *b.datacenter;
    buses.push_back(jb);
  }
  json lines = json::array();
  for (const auto& l : sc.network.lines()) lines.push_back({{"from", l.from}, {"to", l.to}, {"Y", l.Y}});
  json dcs = json::array();
  for (const auto& dc : sc.cloud.datacenters) {
    dcs.push_back({{"id", dc.id},
                   {"bus", dc.bus},
                   {"a", dc.a},
                   {"d_min", dc.d_min},
                   {"d_max", dc.d_max},
                   {"d_nom", dc.d_nom},
                   {"eta", dc.eta}});
  }
  json events = json::array();
  for (const auto& ev : sc.events) events.push_back({{"time", ev.time}, {"bus", ev.bus}, {"delta_p", ev.delta_p}});
  const auto& c = sc.controller;
  const auto& d = sc.detection;
  json out;
  out["schema_version"] = kSchemaVersion;
  out["network"] = {{"f0", sc.network.f0()}, {"buses", buses}, {"lines", lines}};
  out["cloud"] = {{"W", sc.cloud.W}, {"gamma", sc.cloud.gamma}, {"epsilon", sc.cloud.epsilon}, {"datacenters", dcs}};
  out["costs"] = {{"alpha", c.alpha}};
  out["controller"] = {{"kind", std::string(to_string(c.kind))},
                       {"beta", c.beta},
                       {"mu0", c.mu0},
                       {"delay", c.delay},
                       {"action_period", c.action_period},
                       {"measurement", std::string(to_string(c.measurement))}};
  out["simulation"] = {{"dt", sc.simulation.dt},
                       {"t_end", sc.simulation.t_end},
                       {"record_every", sc.simulation.record_every},
                       {"events", events},
                       {"detection",
                        {{"tol_omega_dot", d.tol_omega_dot},
                         {"tol_sync", d.tol_sync},
                         {"tol_mu_dot", d.tol_mu_dot},
                         {"tol_d_dot", d.tol_d_dot},
                         {"window", d.window}}}};
  return out;
}

}  // namespace

ScenarioFile parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    throw ValidationError("parse error at " + describe_position(text, byte) + ": " + e.what());
  }
  Reader root(doc, "");
  const auto& version = root.raw("schema_version");
  if (!version.is_number_integer()) throw ValidationError("schema_version: expected an integer");
  if (version.get<int>() != kSchemaVersion) {
    throw ValidationError("schema_version: unsupported version " + version.dump() + " (expected " +
                          std::to_string(kSchemaVersion) + ")");
  }
  ScenarioFile file;
  file.scenario = read_scenario(root);
  if (auto sweep = root.optional_object("sweep")) {
    SweepSpec spec;
    spec.parameter = sweep->text("parameter", "");
    if (spec.parameter.empty()) throw ValidationError("sweep.parameter: required field is missing");
    sweep->each("values", true, [&](const json& v, const std::string& path) {
      if (!v.is_number()) throw ValidationError(path + ": expected a number");
      spec.values.push_back(v.get<double>());
    });
    sweep->finish();
    file.sweep = std::move(spec);
  }
  root.finish();

  auto diags = validate_scenario(file.scenario);
  if (!diags.empty()) {
    std::string msg = "scenario failed validation:";
    for (const auto& d : diags) msg += "\n  " + d;
    throw ValidationError(msg);
  }
  return file;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string scenario_to_text(const Scenario& scenario, const std::optional<SweepSpec>& sweep) {
  json doc = to_json(scenario);
  if (sweep) doc["sweep"] = {{"parameter", sweep->parameter}, {"values", sweep->values}};
  return doc.dump(2) + "\n";
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path, const std::optional<SweepSpec>& sweep) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << scenario_to_text(scenario, sweep);
  if (!out) throw Error("write failed for " + path.string());
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string scenario_digest(const Scenario& scenario) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(scenario).dump())));
  return buf;
}

}  // namespace geofc

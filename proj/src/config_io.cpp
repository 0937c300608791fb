#include "formsim/config_io.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "atomic_write.hpp"

namespace formsim {

namespace {

// ordered_json keeps insertion order on emit, which is what makes the
// canonical document stable from run to run.
using json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed while reading '" + path + "'");
  return buffer.str();
}

// Every extraction below names the full dotted path of the offending field,
// so a bad document points straight at its mistake.
struct Reader {
  std::string origin;

  [[noreturn]] void parse_fail(const std::string& message) const {
    throw ParseError(origin + ": " + message);
  }
  [[noreturn]] void schema_fail(const std::string& message) const {
    throw ValidationError(origin + ": " + message);
  }

  void check_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) const {
    for (const auto& item : obj.items()) {
      bool known = false;
      for (const char* key : allowed) {
        if (item.key() == key) {
          known = true;
          break;
        }
      }
      if (!known) schema_fail("unknown key '" + item.key() + "' in " + where);
    }
  }

  const json& object_field(const json& obj, const char* key) const {
    const json& v = obj.at(key);
    if (!v.is_object()) parse_fail(std::string("'") + key + "' must be an object");
    return v;
  }

  double number(const json& v, const std::string& field) const {
    if (!v.is_number()) parse_fail("'" + field + "' must be a number");
    return v.get<double>();
  }

  int integer(const json& v, const std::string& field) const {
    if (!v.is_number_integer()) parse_fail("'" + field + "' must be an integer");
    return v.get<int>();
  }

  std::string text(const json& v, const std::string& field) const {
    if (!v.is_string()) parse_fail("'" + field + "' must be a string");
    return v.get<std::string>();
  }

  Eigen::Vector2d vec2(const json& v, const std::string& field) const {
    if (!v.is_array() || v.size() != 2) {
      parse_fail("'" + field + "' must be an array of two numbers");
    }
    return {number(v[0], field), number(v[1], field)};
  }

  Eigen::Vector3d vec3(const json& v, const std::string& field) const {
    if (!v.is_array() || v.size() != 3) {
      parse_fail("'" + field + "' must be an array of three numbers");
    }
    return {number(v[0], field), number(v[1], field), number(v[2], field)};
  }

  std::vector<Eigen::Vector2d> vec2_list(const json& v, const std::string& field) const {
    if (!v.is_array()) parse_fail("'" + field + "' must be an array");
    std::vector<Eigen::Vector2d> out;
    out.reserve(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
      out.push_back(vec2(v[k], field + "[" + std::to_string(k) + "]"));
    }
    return out;
  }

  // Overwrites `target` when the key is present; otherwise keeps the default.
  void take_number(const json& obj, const char* key, const std::string& prefix,
                   double& target) const {
    auto it = obj.find(key);
    if (it != obj.end()) target = number(*it, prefix + key);
  }
};

QuadrotorParams read_params(const Reader& r, const json& block) {
  r.check_keys(block, "'quadrotor'",
               {"m", "ixb", "iyb", "izb", "k_t", "k_tau", "l_a", "g", "omega_max"});
  QuadrotorParams p;
  const std::string prefix = "quadrotor.";
  r.take_number(block, "m", prefix, p.m);
  r.take_number(block, "ixb", prefix, p.ixb);
  r.take_number(block, "iyb", prefix, p.iyb);
  r.take_number(block, "izb", prefix, p.izb);
  r.take_number(block, "k_t", prefix, p.k_t);
  r.take_number(block, "k_tau", prefix, p.k_tau);
  r.take_number(block, "l_a", prefix, p.l_a);
  r.take_number(block, "g", prefix, p.g);
  if (auto it = block.find("omega_max"); it != block.end()) {
    p.omega_max = r.number(*it, "quadrotor.omega_max");
  } else {
    // The default ceiling tracks mass, gravity, and the thrust coefficient;
    // recompute it for whatever this document chose.
    p.omega_max = QuadrotorParams::default_omega_max(p.m, p.g, p.k_t);
  }
  return p;
}

ControllerGains read_gains(const Reader& r, const json& block) {
  r.check_keys(block, "'gains'", {"kp_pos", "kd_pos", "kp_att", "kd_att", "max_tilt"});
  ControllerGains g;
  const std::string prefix = "gains.";
  r.take_number(block, "kp_pos", prefix, g.kp_pos);
  r.take_number(block, "kd_pos", prefix, g.kd_pos);
  r.take_number(block, "kp_att", prefix, g.kp_att);
  r.take_number(block, "kd_att", prefix, g.kd_att);
  r.take_number(block, "max_tilt", prefix, g.max_tilt);
  return g;
}

FormationSpec read_formation(const Reader& r, const json& block) {
  r.check_keys(block, "'formation'",
               {"n", "leaders", "biases", "sensing_radius", "altitude", "yaw"});
  FormationSpec spec;
  if (auto it = block.find("n"); it != block.end()) {
    spec.n = r.integer(*it, "formation.n");
  } else {
    r.schema_fail("'formation.n' is required");
  }
  if (auto it = block.find("leaders"); it != block.end()) {
    if (!it->is_array()) r.parse_fail("'formation.leaders' must be an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      // Documents number agents from 1, matching the telemetry agent column.
      spec.leaders.push_back(
          r.integer((*it)[k], "formation.leaders[" + std::to_string(k) + "]") - 1);
    }
  } else {
    r.schema_fail("'formation.leaders' is required");
  }
  if (auto it = block.find("biases"); it != block.end()) {
    spec.biases = r.vec2_list(*it, "formation.biases");
  } else {
    r.schema_fail("'formation.biases' is required");
  }
  if (auto it = block.find("sensing_radius"); it != block.end()) {
    spec.sensing_radius = r.number(*it, "formation.sensing_radius");
  } else {
    r.schema_fail("'formation.sensing_radius' is required");
  }
  r.take_number(block, "altitude", "formation.", spec.altitude);
  r.take_number(block, "yaw", "formation.", spec.yaw_d);
  return spec;
}

ReferenceTrajectory read_reference(const Reader& r, const json& block) {
  auto it = block.find("type");
  if (it == block.end()) r.schema_fail("'reference.type' is required");
  const std::string type = r.text(*it, "reference.type");
  if (type == "circle") {
    r.check_keys(block, "'reference'", {"type", "amplitude", "angular_rate"});
    CircleReference circle;
    r.take_number(block, "amplitude", "reference.", circle.amplitude);
    r.take_number(block, "angular_rate", "reference.", circle.angular_rate);
    return circle;
  }
  if (type == "polyline") {
    r.check_keys(block, "'reference'", {"type", "times", "points"});
    PolylineReference line;
    if (auto t = block.find("times"); t != block.end()) {
      if (!t->is_array()) r.parse_fail("'reference.times' must be an array");
      for (std::size_t k = 0; k < t->size(); ++k) {
        line.times.push_back(r.number((*t)[k], "reference.times[" + std::to_string(k) + "]"));
      }
    }
    if (auto pts = block.find("points"); pts != block.end()) {
      line.points = r.vec2_list(*pts, "reference.points");
    }
    return line;
  }
  r.schema_fail("'reference.type' must be 'circle' or 'polyline', got '" + type + "'");
}

std::vector<BiasSchedule::Entry> read_switches(const Reader& r, const json& arr) {
  if (!arr.is_array()) r.parse_fail("'bias_switches' must be an array");
  std::vector<BiasSchedule::Entry> out;
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const std::string where = "bias_switches[" + std::to_string(k) + "]";
    const json& entry = arr[k];
    if (!entry.is_object()) r.parse_fail("'" + where + "' must be an object");
    r.check_keys(entry, "'" + where + "'", {"t", "biases"});
    BiasSchedule::Entry e;
    if (auto it = entry.find("t"); it != entry.end()) {
      e.switch_time = r.number(*it, where + ".t");
    } else {
      r.schema_fail("'" + where + ".t' is required");
    }
    if (auto it = entry.find("biases"); it != entry.end()) {
      e.biases = r.vec2_list(*it, where + ".biases");
    } else {
      r.schema_fail("'" + where + ".biases' is required");
    }
    out.push_back(std::move(e));
  }
  return out;
}

json vec2_json(const Eigen::Vector2d& v) { return json::array({v(0), v(1)}); }

json vec2_list_json(const std::vector<Eigen::Vector2d>& list) {
  json arr = json::array();
  for (const auto& v : list) arr.push_back(vec2_json(v));
  return arr;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, const std::string& origin) {
  Reader r{origin};
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    r.parse_fail(e.what());
  }
  if (!doc.is_object()) r.parse_fail("top level must be an object");

  r.check_keys(doc, "the document",
               {"schema_version", "name", "dt", "duration", "quadrotor", "gains",
                "formation", "reference", "bias_switches", "initial_positions",
                "isolation_policy", "neighbor_mode"});

  if (auto it = doc.find("schema_version"); it != doc.end()) {
    const std::string version = r.text(*it, "schema_version");
    if (version != "1") r.schema_fail("unsupported schema_version '" + version + "'");
  }

  ScenarioConfig config;
  if (auto it = doc.find("name"); it != doc.end()) config.name = r.text(*it, "name");
  if (auto it = doc.find("dt"); it != doc.end()) config.dt = r.number(*it, "dt");
  if (auto it = doc.find("duration"); it != doc.end()) {
    config.duration = r.number(*it, "duration");
  }
  if (auto it = doc.find("quadrotor"); it != doc.end()) {
    config.params = read_params(r, r.object_field(doc, "quadrotor"));
  }
  if (auto it = doc.find("gains"); it != doc.end()) {
    config.gains = read_gains(r, r.object_field(doc, "gains"));
  }
  if (doc.find("formation") == doc.end()) r.schema_fail("'formation' is required");
  config.formation = read_formation(r, r.object_field(doc, "formation"));
  if (auto it = doc.find("reference"); it != doc.end()) {
    config.reference_trajectory = read_reference(r, r.object_field(doc, "reference"));
  }
  if (auto it = doc.find("bias_switches"); it != doc.end()) {
    config.bias_switches = read_switches(r, *it);
  }
  if (auto it = doc.find("initial_positions"); it != doc.end()) {
    if (!it->is_array()) r.parse_fail("'initial_positions' must be an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      config.initial_positions.push_back(
          r.vec3((*it)[k], "initial_positions[" + std::to_string(k) + "]"));
    }
  } else {
    r.schema_fail("'initial_positions' is required");
  }
  if (auto it = doc.find("isolation_policy"); it != doc.end()) {
    const std::string policy = r.text(*it, "isolation_policy");
    if (policy == "hold") {
      config.isolation_policy = IsolationPolicy::kHoldLastSetpoint;
    } else if (policy == "abort") {
      config.isolation_policy = IsolationPolicy::kAbort;
    } else {
      r.schema_fail("'isolation_policy' must be 'hold' or 'abort', got '" + policy + "'");
    }
  }
  if (auto it = doc.find("neighbor_mode"); it != doc.end()) {
    const std::string mode = r.text(*it, "neighbor_mode");
    if (mode == "fixed") {
      config.neighbor_mode = NeighborMode::kFixedFromStart;
    } else if (mode == "each-step") {
      config.neighbor_mode = NeighborMode::kEachStep;
    } else {
      r.schema_fail("'neighbor_mode' must be 'fixed' or 'each-step', got '" + mode + "'");
    }
  }

  validate(config);
  return config;
}

ScenarioConfig load_config(const std::string& path) {
  return parse_config(read_file(path), path);
}

std::string emit_config(const ScenarioConfig& config) {
  json doc;
  doc["schema_version"] = "1";
  doc["name"] = config.name;
  doc["dt"] = config.dt;
  doc["duration"] = config.duration;

  json quad;
  quad["m"] = config.params.m;
  quad["ixb"] = config.params.ixb;
  quad["iyb"] = config.params.iyb;
  quad["izb"] = config.params.izb;
  quad["k_t"] = config.params.k_t;
  quad["k_tau"] = config.params.k_tau;
  quad["l_a"] = config.params.l_a;
  quad["g"] = config.params.g;
  quad["omega_max"] = config.params.omega_max;
  doc["quadrotor"] = quad;

  json gains;
  gains["kp_pos"] = config.gains.kp_pos;
  gains["kd_pos"] = config.gains.kd_pos;
  gains["kp_att"] = config.gains.kp_att;
  gains["kd_att"] = config.gains.kd_att;
  gains["max_tilt"] = config.gains.max_tilt;
  doc["gains"] = gains;

  json formation;
  formation["n"] = config.formation.n;
  json leaders = json::array();
  for (int l : config.formation.leaders) leaders.push_back(l + 1);
  formation["leaders"] = leaders;
  formation["biases"] = vec2_list_json(config.formation.biases);
  formation["sensing_radius"] = config.formation.sensing_radius;
  formation["altitude"] = config.formation.altitude;
  formation["yaw"] = config.formation.yaw_d;
  doc["formation"] = formation;

  json reference;
  if (const auto* circle = std::get_if<CircleReference>(&config.reference_trajectory)) {
    reference["type"] = "circle";
    reference["amplitude"] = circle->amplitude;
    reference["angular_rate"] = circle->angular_rate;
  } else {
    const auto& line = std::get<PolylineReference>(config.reference_trajectory);
    reference["type"] = "polyline";
    reference["times"] = line.times;
    reference["points"] = vec2_list_json(line.points);
  }
  doc["reference"] = reference;

  json switches = json::array();
  for (const auto& entry : config.bias_switches) {
    json e;
    e["t"] = entry.switch_time;
    e["biases"] = vec2_list_json(entry.biases);
    switches.push_back(e);
  }
  doc["bias_switches"] = switches;

  json initial = json::array();
  for (const auto& p : config.initial_positions) {
    initial.push_back(json::array({p(0), p(1), p(2)}));
  }
  doc["initial_positions"] = initial;

  doc["isolation_policy"] =
      config.isolation_policy == IsolationPolicy::kAbort ? "abort" : "hold";
  doc["neighbor_mode"] =
      config.neighbor_mode == NeighborMode::kEachStep ? "each-step" : "fixed";

  return doc.dump(2) + "\n";
}

void write_config(const ScenarioConfig& config, const std::string& path) {
  atomic_write_file(path, emit_config(config));
}

}  // namespace formsim

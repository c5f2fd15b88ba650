#include "topotraj/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace topotraj {

ScenarioError::ScenarioError(int line, std::string field, const std::string& what)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         (field.empty() ? std::string() : field + ": ") + what),
      line_(line),
      field_(std::move(field)) {}

int Scenario::vehicleIndex(const std::string& id) const {
    for (std::size_t i = 0; i < vehicles.size(); ++i) {
        if (vehicles[i].id == id) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

int Scenario::obstacleIndex(const std::string& id) const {
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        if (obstacles[i].id == id) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

namespace {

int lineOf(const YAML::Node& node) {
    const auto mark = node.Mark();
    return mark.line >= 0 ? mark.line + 1 : 0;
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& what) {
    throw ScenarioError(lineOf(node), field, what);
}

void checkKeys(const YAML::Node& node, const std::string& field, const std::set<std::string>& allowed) {
    if (!node.IsMap()) {
        fail(node, field, "expected a mapping");
    }
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) {
            fail(kv.first, field, "unknown key '" + key + "'");
        }
    }
}

double readNumber(const YAML::Node& node, const std::string& field) {
    if (!node.IsScalar()) {
        fail(node, field, "expected a number");
    }
    try {
        const double v = node.as<double>();
        if (!std::isfinite(v)) {
            fail(node, field, "value must be finite");
        }
        return v;
    } catch (const YAML::BadConversion&) {
        fail(node, field, "expected a number, got '" + node.Scalar() + "'");
    }
}

std::string readString(const YAML::Node& node, const std::string& field) {
    if (!node.IsScalar()) {
        fail(node, field, "expected a string");
    }
    return node.Scalar();
}

Vec2 readVec2(const YAML::Node& node, const std::string& field) {
    if (!node.IsSequence() || node.size() != 2) {
        fail(node, field, "expected a two-element list [x, y]");
    }
    return {readNumber(node[0], field), readNumber(node[1], field)};
}

void readOptionalNumber(const YAML::Node& parent, const char* key, const std::string& field, double& out) {
    if (const auto n = parent[key]) {
        out = readNumber(n, field + "." + key);
    }
}

BoundaryState readBoundary(const YAML::Node& node, const std::string& field) {
    BoundaryState s;
    if (node.IsSequence()) {
        s.position = readVec2(node, field);
        return s;
    }
    checkKeys(node, field, {"position", "velocity", "acceleration"});
    if (!node["position"]) {
        fail(node, field, "missing position");
    }
    s.position = readVec2(node["position"], field + ".position");
    if (node["velocity"]) {
        s.velocity = readVec2(node["velocity"], field + ".velocity");
    }
    if (node["acceleration"]) {
        s.acceleration = readVec2(node["acceleration"], field + ".acceleration");
    }
    return s;
}

Interaction readInteraction(const YAML::Node& node, const std::string& field) {
    try {
        return parseInteraction(readString(node, field));
    } catch (const std::invalid_argument& e) {
        fail(node, field, e.what());
    }
}

Scenario fromYaml(const YAML::Node& root) {
    checkKeys(root, "scenario",
              {"name", "arena", "limits", "weights", "vehicles", "obstacles", "interactions",
               "default_vehicle_interaction"});
    Scenario sc;
    if (root["name"]) {
        sc.name = readString(root["name"], "name");
    }
    if (const auto arena = root["arena"]) {
        checkKeys(arena, "arena", {"width", "height"});
        readOptionalNumber(arena, "width", "arena", sc.arena.width);
        readOptionalNumber(arena, "height", "arena", sc.arena.height);
        if (!(sc.arena.width > 0.0 && sc.arena.height > 0.0)) {
            fail(arena, "arena", "width and height must be positive");
        }
    }
    if (const auto limits = root["limits"]) {
        checkKeys(limits, "limits", {"v_max", "a_max"});
        readOptionalNumber(limits, "v_max", "limits", sc.weights.max_velocity);
        readOptionalNumber(limits, "a_max", "limits", sc.weights.max_acceleration);
        if (!(sc.weights.max_velocity > 0.0 && sc.weights.max_acceleration > 0.0)) {
            fail(limits, "limits", "limits must be positive");
        }
    }
    if (const auto w = root["weights"]) {
        checkKeys(w, "weights", {"w_T", "w_kin", "w_col", "d_safe", "w_t_stage1", "w_t_stage2"});
        readOptionalNumber(w, "w_T", "weights", sc.weights.time);
        readOptionalNumber(w, "w_kin", "weights", sc.weights.kinodynamic);
        readOptionalNumber(w, "w_col", "weights", sc.weights.collision);
        readOptionalNumber(w, "d_safe", "weights", sc.weights.safe_distance);
        readOptionalNumber(w, "w_t_stage1", "weights", sc.stage_weights.stage1);
        readOptionalNumber(w, "w_t_stage2", "weights", sc.stage_weights.stage2);
        if (sc.weights.time < 0 || sc.weights.kinodynamic < 0 || sc.weights.collision < 0 ||
            sc.stage_weights.stage1 < 0 || sc.stage_weights.stage2 < 0) {
            fail(w, "weights", "weights must be non-negative");
        }
        if (!(sc.weights.safe_distance > 0.0)) {
            fail(w, "weights.d_safe", "safety distance must be positive");
        }
    }

    const auto vehicles = root["vehicles"];
    if (!vehicles || !vehicles.IsSequence() || vehicles.size() == 0) {
        fail(vehicles ? vehicles : root, "vehicles", "expected a non-empty list of vehicles");
    }
    std::set<std::string> ids;
    for (std::size_t i = 0; i < vehicles.size(); ++i) {
        const auto v = vehicles[i];
        const std::string field = "vehicles[" + std::to_string(i) + "]";
        checkKeys(v, field, {"id", "start", "goal", "radius", "pieces", "init_via"});
        if (!v["id"] || !v["start"] || !v["goal"]) {
            fail(v, field, "id, start and goal are required");
        }
        VehicleSpec spec;
        spec.id = readString(v["id"], field + ".id");
        if (!ids.insert(spec.id).second) {
            fail(v["id"], field + ".id", "duplicate id '" + spec.id + "'");
        }
        spec.start = readBoundary(v["start"], field + ".start");
        spec.goal = readBoundary(v["goal"], field + ".goal");
        if (!sc.arena.contains(spec.start.position)) {
            fail(v["start"], field + ".start", "start lies outside the arena");
        }
        if (!sc.arena.contains(spec.goal.position)) {
            fail(v["goal"], field + ".goal", "goal lies outside the arena");
        }
        readOptionalNumber(v, "radius", field, spec.radius);
        if (!(spec.radius > 0.0)) {
            fail(v["radius"], field + ".radius", "radius must be positive");
        }
        if (v["pieces"]) {
            const double pieces = readNumber(v["pieces"], field + ".pieces");
            if (pieces < 1 || pieces != std::floor(pieces) || pieces > 1000) {
                fail(v["pieces"], field + ".pieces", "piece count must be a positive integer");
            }
            spec.pieces = static_cast<int>(pieces);
        }
        if (v["init_via"]) {
            spec.init_via = readVec2(v["init_via"], field + ".init_via");
        }
        sc.vehicles.push_back(std::move(spec));
    }

    if (const auto obstacles = root["obstacles"]) {
        if (!obstacles.IsSequence()) {
            fail(obstacles, "obstacles", "expected a list");
        }
        for (std::size_t i = 0; i < obstacles.size(); ++i) {
            const auto o = obstacles[i];
            const std::string field = "obstacles[" + std::to_string(i) + "]";
            checkKeys(o, field, {"id", "center", "radius"});
            if (!o["id"] || !o["center"]) {
                fail(o, field, "id and center are required");
            }
            Obstacle obs;
            obs.id = readString(o["id"], field + ".id");
            if (!ids.insert(obs.id).second) {
                fail(o["id"], field + ".id", "duplicate id '" + obs.id + "'");
            }
            obs.center = readVec2(o["center"], field + ".center");
            readOptionalNumber(o, "radius", field, obs.radius);
            if (!(obs.radius > 0.0)) {
                fail(o["radius"] ? o["radius"] : o, field + ".radius", "radius must be positive");
            }
            sc.obstacles.push_back(std::move(obs));
        }
    }

    if (const auto interactions = root["interactions"]) {
        if (!interactions.IsSequence()) {
            fail(interactions, "interactions", "expected a list");
        }
        for (std::size_t i = 0; i < interactions.size(); ++i) {
            const auto e = interactions[i];
            const std::string field = "interactions[" + std::to_string(i) + "]";
            checkKeys(e, field, {"pair", "eta"});
            const auto pair = e["pair"];
            if (!pair || !pair.IsSequence() || pair.size() != 2 || !e["eta"]) {
                fail(e, field, "expected {pair: [a, b], eta: label}");
            }
            const std::string a = readString(pair[0], field + ".pair");
            const std::string b = readString(pair[1], field + ".pair");
            for (const auto& id : {a, b}) {
                if (!ids.count(id)) {
                    fail(pair, field + ".pair", "unknown id '" + id + "'");
                }
            }
            if (a == b) {
                fail(pair, field + ".pair", "self pair '" + a + "'");
            }
            if (sc.obstacleIndex(a) >= 0 && sc.obstacleIndex(b) >= 0) {
                fail(pair, field + ".pair", "obstacle-obstacle pairs cannot interact");
            }
            const Interaction value = readInteraction(e["eta"], field + ".eta");
            if (sc.pattern.contains(a, b) && sc.pattern.get(a, b) != value) {
                fail(e, field, "conflicting labels for pair (" + a + ", " + b + ")");
            }
            sc.pattern.set(a, b, value);
        }
    }

    if (const auto fill = root["default_vehicle_interaction"]) {
        const Interaction value = readInteraction(fill, "default_vehicle_interaction");
        for (std::size_t i = 0; i < sc.vehicles.size(); ++i) {
            for (std::size_t j = i + 1; j < sc.vehicles.size(); ++j) {
                if (!sc.pattern.contains(sc.vehicles[i].id, sc.vehicles[j].id)) {
                    sc.pattern.set(sc.vehicles[i].id, sc.vehicles[j].id, value);
                }
            }
        }
    }
    validateScenario(sc);
    return sc;
}

void emitVec(YAML::Emitter& out, const Vec2& v) {
    out << YAML::Flow << YAML::BeginSeq << v.x() << v.y() << YAML::EndSeq;
}

void emitBoundary(YAML::Emitter& out, const BoundaryState& s) {
    out << YAML::BeginMap;
    out << YAML::Key << "position" << YAML::Value;
    emitVec(out, s.position);
    out << YAML::Key << "velocity" << YAML::Value;
    emitVec(out, s.velocity);
    out << YAML::Key << "acceleration" << YAML::Value;
    emitVec(out, s.acceleration);
    out << YAML::EndMap;
}

}  // namespace

void validateScenario(const Scenario& sc) {
    if (sc.vehicles.empty()) {
        throw ScenarioError(0, "vehicles", "scenario has no vehicles");
    }
    std::set<std::string> ids;
    for (const auto& v : sc.vehicles) {
        if (v.id.empty() || !ids.insert(v.id).second) {
            throw ScenarioError(0, "vehicles", "vehicle ids must be unique and non-empty");
        }
        if (!sc.arena.contains(v.start.position) || !sc.arena.contains(v.goal.position)) {
            throw ScenarioError(0, "vehicles", "vehicle '" + v.id + "' starts or ends outside the arena");
        }
        if (!(v.radius > 0.0)) {
            throw ScenarioError(0, "vehicles", "vehicle '" + v.id + "' has a non-positive radius");
        }
    }
    for (const auto& o : sc.obstacles) {
        if (o.id.empty() || !ids.insert(o.id).second) {
            throw ScenarioError(0, "obstacles", "obstacle ids must be unique and non-empty");
        }
        if (!(o.radius > 0.0)) {
            throw ScenarioError(0, "obstacles", "obstacle '" + o.id + "' has a non-positive radius");
        }
    }
    for (const auto& [pair, value] : sc.pattern.entries()) {
        if (!ids.count(pair.first) || !ids.count(pair.second)) {
            throw ScenarioError(0, "interactions", "pattern references an unknown id");
        }
    }
}

Scenario parseScenario(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ScenarioError(e.mark.line >= 0 ? e.mark.line + 1 : 0, "", e.msg);
    }
    if (!root || !root.IsMap()) {
        throw ScenarioError(0, "scenario", "document must be a mapping");
    }
    try {
        return fromYaml(root);
    } catch (const ScenarioError&) {
        throw;
    } catch (const YAML::Exception& e) {
        throw ScenarioError(e.mark.line >= 0 ? e.mark.line + 1 : 0, "", e.msg);
    } catch (const std::exception& e) {
        throw ScenarioError(0, "", e.what());
    }
}

Scenario loadScenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError(0, "", "cannot open scenario file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parseScenario(buf.str());
}

std::string serializeScenario(const Scenario& sc) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << sc.name;
    out << YAML::Key << "arena" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "width"
        << YAML::Value << sc.arena.width << YAML::Key << "height" << YAML::Value << sc.arena.height << YAML::EndMap;
    out << YAML::Key << "limits" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "v_max"
        << YAML::Value << sc.weights.max_velocity << YAML::Key << "a_max" << YAML::Value
        << sc.weights.max_acceleration << YAML::EndMap;
    out << YAML::Key << "weights" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "w_T" << YAML::Value << sc.weights.time;
    out << YAML::Key << "w_kin" << YAML::Value << sc.weights.kinodynamic;
    out << YAML::Key << "w_col" << YAML::Value << sc.weights.collision;
    out << YAML::Key << "d_safe" << YAML::Value << sc.weights.safe_distance;
    out << YAML::Key << "w_t_stage1" << YAML::Value << sc.stage_weights.stage1;
    out << YAML::Key << "w_t_stage2" << YAML::Value << sc.stage_weights.stage2;
    out << YAML::EndMap;

    out << YAML::Key << "vehicles" << YAML::Value << YAML::BeginSeq;
    for (const auto& v : sc.vehicles) {
        out << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value << v.id;
        out << YAML::Key << "start" << YAML::Value;
        emitBoundary(out, v.start);
        out << YAML::Key << "goal" << YAML::Value;
        emitBoundary(out, v.goal);
        out << YAML::Key << "radius" << YAML::Value << v.radius;
        if (v.pieces > 0) {
            out << YAML::Key << "pieces" << YAML::Value << v.pieces;
        }
        if (v.init_via) {
            out << YAML::Key << "init_via" << YAML::Value;
            emitVec(out, *v.init_via);
        }
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    if (!sc.obstacles.empty()) {
        out << YAML::Key << "obstacles" << YAML::Value << YAML::BeginSeq;
        for (const auto& o : sc.obstacles) {
            out << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << o.id << YAML::Key << "center"
                << YAML::Value;
            emitVec(out, o.center);
            out << YAML::Key << "radius" << YAML::Value << o.radius << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }
    if (!sc.pattern.entries().empty()) {
        out << YAML::Key << "interactions" << YAML::Value << YAML::BeginSeq;
        for (const auto& [pair, value] : sc.pattern.entries()) {
            out << YAML::Flow << YAML::BeginMap << YAML::Key << "pair" << YAML::Value << YAML::Flow << YAML::BeginSeq
                << pair.first << pair.second << YAML::EndSeq << YAML::Key << "eta" << YAML::Value
                << interactionName(value) << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace topotraj

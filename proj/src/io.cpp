#include "viewset/io.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>

#include <json.hpp>

namespace viewset {

namespace {

using nlohmann::json;

json parse_json(std::istream& in, const std::string& name) {
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(name + ": " + e.what());
    }
}

const json& require(const json& object, const std::string& field,
                    const std::string& context) {
    auto it = object.find(field);
    if (it == object.end()) {
        throw ParseError(context + ": missing field '" + field + "'");
    }
    return *it;
}

double number_field(const json& object, const std::string& field,
                    const std::string& context) {
    const json& value = require(object, field, context);
    if (!value.is_number()) {
        throw ParseError(context + ": field '" + field + "' must be a number");
    }
    return value.get<double>();
}

Camera camera_from_json(const json& object, const std::string& context) {
    // fields checked in schema order so diagnostics name the first gap
    const double fx = number_field(object, "fx", context);
    const double fy = number_field(object, "fy", context);
    const double cx = number_field(object, "cx", context);
    const double cy = number_field(object, "cy", context);
    const int width = static_cast<int>(number_field(object, "width", context));
    const int height = static_cast<int>(number_field(object, "height", context));
    const json& r = require(object, "R", context);
    const json& t = require(object, "t", context);
    if (!r.is_array() || r.size() != 9) {
        throw ParseError(context + ": field 'R' must hold 9 row-major numbers");
    }
    if (!t.is_array() || t.size() != 3) {
        throw ParseError(context + ": field 't' must hold 3 numbers");
    }
    Eigen::Matrix3d rotation;
    for (int i = 0; i < 9; ++i) {
        rotation(i / 3, i % 3) = r[i].get<double>();
    }
    Eigen::Vector3d translation(t[0].get<double>(), t[1].get<double>(),
                                t[2].get<double>());
    try {
        return Camera(fx, fy, cx, cy, width, height, rotation, translation);
    } catch (const std::invalid_argument& e) {
        throw ParseError(context + ": " + e.what());
    }
}

json camera_to_json(const Camera& camera) {
    json object;
    object["fx"] = camera.fx();
    object["fy"] = camera.fy();
    object["cx"] = camera.cx();
    object["cy"] = camera.cy();
    object["width"] = camera.width();
    object["height"] = camera.height();
    std::vector<double> r(9);
    for (int i = 0; i < 9; ++i) r[i] = camera.rotation()(i / 3, i % 3);
    object["R"] = r;
    object["t"] = {camera.translation().x(), camera.translation().y(),
                   camera.translation().z()};
    return object;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path + ": cannot open file");
    }
    return in;
}

}  // namespace

std::vector<PosedView> parse_trajectory(std::istream& in, const std::string& name) {
    const json root = parse_json(in, name);
    if (!root.is_array()) {
        throw ParseError(name + ": trajectory must be a JSON array of cameras");
    }
    std::vector<PosedView> views;
    views.reserve(root.size());
    for (std::size_t i = 0; i < root.size(); ++i) {
        const std::string context = name + " camera[" + std::to_string(i) + "]";
        const json& entry = root[i];
        const json& id = require(entry, "id", context);
        if (!id.is_string()) {
            throw ParseError(context + ": field 'id' must be a string");
        }
        views.push_back(PosedView{id.get<std::string>(),
                                  camera_from_json(entry, context)});
    }
    return views;
}

std::vector<PosedView> load_trajectory(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    return parse_trajectory(in, path);
}

void save_trajectory(const std::vector<PosedView>& views, std::ostream& out) {
    json root = json::array();
    for (const PosedView& view : views) {
        json entry = camera_to_json(view.camera);
        entry["id"] = view.id;
        root.push_back(std::move(entry));
    }
    out << root.dump(2) << '\n';
}

GenerationPlan parse_plan(std::istream& in, const std::string& name) {
    const json root = parse_json(in, name);
    GenerationPlan plan;
    const json& views = require(root, "views", name);
    if (!views.is_array()) {
        throw ParseError(name + ": field 'views' must be an array");
    }
    for (std::size_t i = 0; i < views.size(); ++i) {
        const std::string context = name + " view[" + std::to_string(i) + "]";
        const json& entry = views[i];
        ViewSpec spec;
        spec.id = require(entry, "id", context).get<std::string>();
        const std::string role = require(entry, "role", context).get<std::string>();
        if (role == "observed") {
            spec.role = ViewRole::Observed;
        } else if (role == "generated") {
            spec.role = ViewRole::Generated;
        } else {
            throw ParseError(context + ": field 'role' must be observed or generated");
        }
        if (entry.contains("camera")) {
            spec.camera = camera_from_json(entry["camera"], context);
        }
        if (!plan.views.emplace(spec.id, spec).second) {
            throw ParseError(context + ": duplicate view id " + spec.id);
        }
    }
    const json& stages = require(root, "stages", name);
    if (!stages.is_array()) {
        throw ParseError(name + ": field 'stages' must be an array");
    }
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const std::string context = name + " stage[" + std::to_string(i) + "]";
        Stage stage;
        for (const json& id : require(stages[i], "generate", context)) {
            stage.generate.push_back(id.get<std::string>());
        }
        for (const json& id : require(stages[i], "condition", context)) {
            stage.condition.push_back(id.get<std::string>());
        }
        plan.stages.push_back(std::move(stage));
    }
    return plan;
}

GenerationPlan load_plan(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    return parse_plan(in, path);
}

void save_plan(const GenerationPlan& plan, std::ostream& out) {
    json root;
    root["views"] = json::array();
    for (const auto& [id, view] : plan.views) {
        json entry;
        entry["id"] = id;
        entry["role"] = view.role == ViewRole::Observed ? "observed" : "generated";
        if (view.camera) {
            entry["camera"] = camera_to_json(*view.camera);
        }
        root["views"].push_back(std::move(entry));
    }
    root["stages"] = json::array();
    for (const Stage& stage : plan.stages) {
        json entry;
        entry["generate"] = stage.generate;
        entry["condition"] = stage.condition;
        root["stages"].push_back(std::move(entry));
    }
    out << root.dump(2) << '\n';
}

MatchSet parse_match_set(std::istream& in, const std::string& name) {
    const json root = parse_json(in, name);
    MatchSet matches;
    const json& pair = require(root, "pair", name);
    if (!pair.is_array() || pair.size() != 2) {
        throw ParseError(name + ": field 'pair' must hold two view ids");
    }
    matches.pair = {pair[0].get<std::string>(), pair[1].get<std::string>()};
    for (const json& row : require(root, "matches", name)) {
        if (!row.is_array() || row.size() != 4) {
            throw ParseError(name + ": each match must hold [ua, va, ub, vb]");
        }
        matches.matches.push_back(
            {Eigen::Vector2d(row[0].get<double>(), row[1].get<double>()),
             Eigen::Vector2d(row[2].get<double>(), row[3].get<double>())});
    }
    return matches;
}

MatchSet load_match_set(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    return parse_match_set(in, path);
}

void save_match_set(const MatchSet& matches, std::ostream& out) {
    json root;
    root["pair"] = {matches.pair.first, matches.pair.second};
    root["matches"] = json::array();
    for (const auto& [a, b] : matches.matches) {
        root["matches"].push_back({a.x(), a.y(), b.x(), b.y()});
    }
    out << root.dump(2) << '\n';
}

void write_encoded_rays(const EncodedRays& encoded, std::ostream& out) {
    out << encoded.width() << ' ' << encoded.height() << ' ' << encoded.channels()
        << '\n';
    out << std::setprecision(17);
    for (std::size_t k = 0; k < encoded.frequencies().size(); ++k) {
        out << encoded.frequencies()[k]
            << (k + 1 == encoded.frequencies().size() ? '\n' : ' ');
    }
    const int channels = encoded.channels();
    const std::size_t pixels =
        static_cast<std::size_t>(encoded.width()) * encoded.height();
    for (std::size_t p = 0; p < pixels; ++p) {
        for (int c = 0; c < channels; ++c) {
            out << encoded.values()[p * channels + c] << (c + 1 == channels ? '\n' : ' ');
        }
    }
}

}  // namespace viewset

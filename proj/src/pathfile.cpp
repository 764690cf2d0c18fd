#include "uhl/pathfile.hpp"

#include <json.hpp>

namespace uhl {

using nlohmann::json;

namespace {

double number_field(const json& j, const char* name, const std::string& where) {
    if (!j.contains(name) || !j[name].is_number())
        throw InvalidInput(where + ": missing or non-numeric field \"" + name + "\"");
    return j[name].get<double>();
}

PathSegment parse_segment(const json& j, size_t index) {
    const std::string where = "segment " + std::to_string(index + 1);
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw InvalidInput(where + ": expected an object with a \"kind\" string");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "meridian")
        return meridian_segment(number_field(j, "fixed", where), number_field(j, "from", where),
                                number_field(j, "to", where));
    if (kind == "parallel")
        return parallel_segment(number_field(j, "fixed", where), number_field(j, "from", where),
                                number_field(j, "to", where));
    if (kind == "custom") {
        if (!j.contains("nodes") || !j["nodes"].is_array())
            throw InvalidInput(where + ": custom segment needs a \"nodes\" array");
        std::vector<std::array<double, 2>> nodes;
        for (const auto& n : j["nodes"]) {
            if (!n.is_array() || n.size() != 2 || !n[0].is_number() || !n[1].is_number())
                throw InvalidInput(where + ": each node must be a [theta, phi] number pair");
            nodes.push_back({n[0].get<double>(), n[1].get<double>()});
        }
        if (nodes.size() < 2) throw InvalidInput(where + ": custom segment needs at least two nodes");
        return custom_nodes_segment(std::move(nodes));
    }
    throw InvalidInput(where + ": unknown kind \"" + kind + "\" (meridian|parallel|custom)");
}

} // namespace

PathSpec parse_path_file(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("path file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InvalidInput("path file: top level must be an object");

    PathSpec spec;
    if (doc.contains("preset")) {
        if (!doc["preset"].is_string())
            throw InvalidInput("path file: \"preset\" must be a string");
        const std::string preset = doc["preset"].get<std::string>();
        const double phi0 = number_field(doc, "phi0", "preset");
        const double phi1 = number_field(doc, "phi1", "preset");
        if (preset == "orange-slice")
            spec = orange_slice(phi0, phi1);
        else if (preset == "figure-8")
            spec = figure_eight(phi0, phi1);
        else
            throw InvalidInput("path file: unknown preset \"" + preset +
                               "\" (orange-slice|figure-8)");
    } else if (doc.contains("segments")) {
        if (!doc["segments"].is_array())
            throw InvalidInput("path file: \"segments\" must be an array");
        for (size_t k = 0; k < doc["segments"].size(); ++k)
            spec.segments.push_back(parse_segment(doc["segments"][k], k));
    } else {
        throw InvalidInput("path file: expected either \"preset\" or \"segments\"");
    }
    spec.validate();
    return spec;
}

std::string serialize_path_spec(const PathSpec& spec) {
    json segments = json::array();
    for (const auto& seg : spec.segments) {
        json j;
        switch (seg.kind) {
            case SegmentKind::Meridian:
                j["kind"] = "meridian";
                j["fixed"] = seg.fixed;
                j["from"] = seg.from;
                j["to"] = seg.to;
                break;
            case SegmentKind::Parallel:
                j["kind"] = "parallel";
                j["fixed"] = seg.fixed;
                j["from"] = seg.from;
                j["to"] = seg.to;
                break;
            case SegmentKind::Custom: {
                j["kind"] = "custom";
                json nodes = json::array();
                if (!seg.nodes.empty()) {
                    for (const auto& n : seg.nodes) nodes.push_back({n[0], n[1]});
                } else {
                    for (int q = 0; q < 129; ++q) {
                        const auto p = seg.point(q / 128.0);
                        nodes.push_back({p[0], p[1]});
                    }
                }
                j["nodes"] = std::move(nodes);
                break;
            }
        }
        segments.push_back(std::move(j));
    }
    json doc;
    doc["segments"] = std::move(segments);
    return doc.dump(2) + "\n";
}

} // namespace uhl

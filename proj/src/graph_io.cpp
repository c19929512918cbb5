#include "cpsdiag/graph_io.hpp"

#include <fstream>
#include <sstream>

#include "cpsdiag/error.hpp"

namespace cpsdiag {

using nlohmann::json;

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        // nlohmann reports "parse error at line L, column C: ..."
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

CausalGraph graph_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("graph: expected a JSON object");
    for (const auto& [key, value] : j.items())
        if (key != "nodes" && key != "edges")
            throw ValidationError("graph: unknown key '" + key + "'");
    if (!j.contains("nodes") || !j["nodes"].is_array())
        throw ValidationError("graph: 'nodes' must be an array of strings");
    std::vector<SubsystemId> nodes;
    for (const auto& n : j["nodes"]) {
        if (!n.is_string()) throw ValidationError("graph: node ids must be strings");
        nodes.push_back(n.get<std::string>());
    }
    std::vector<CausalGraph::Edge> edges;
    if (j.contains("edges")) {
        if (!j["edges"].is_array()) throw ValidationError("graph: 'edges' must be an array");
        std::size_t k = 0;
        for (const auto& e : j["edges"]) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
                throw ValidationError("graph: edge #" + std::to_string(k) +
                                      " must be a [from, to] pair of strings");
            edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
            ++k;
        }
    }
    return CausalGraph(std::move(nodes), edges);
}

json graph_to_json(const CausalGraph& g) {
    json edges = json::array();
    for (const auto& [a, b] : g.edges()) edges.push_back({g.name(a), g.name(b)});
    return json{{"nodes", g.nodes()}, {"edges", std::move(edges)}};
}

CausalGraph load_graph(const std::filesystem::path& path) {
    try {
        return graph_from_json(read_json_file(path));
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        if (msg.rfind(path.string(), 0) == 0) throw;
        throw ValidationError(path.string() + ": " + msg);
    }
}

HealthStateVector health_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("health: expected a JSON object");
    HealthStateVector h;
    const json* states = &j;
    if (j.contains("h")) {
        for (const auto& [key, value] : j.items())
            if (key != "t" && key != "h" && key != "diagnosis")
                throw ValidationError("health: unknown key '" + key + "'");
        states = &j["h"];
        if (j.contains("t")) {
            if (!j["t"].is_number_integer()) throw ValidationError("health: 't' must be an integer");
            h.timestamp = j["t"].get<std::int64_t>();
        }
        if (!states->is_object()) throw ValidationError("health: 'h' must be an object");
    }
    for (const auto& [id, value] : states->items()) {
        if (value.is_boolean()) {
            h.states[id] = value.get<bool>();
        } else if (value.is_number_integer() &&
                   (value.get<std::int64_t>() == 0 || value.get<std::int64_t>() == 1)) {
            h.states[id] = value.get<std::int64_t>() == 1;
        } else {
            throw ValidationError("health: value for '" + id + "' must be 0 or 1");
        }
    }
    return h;
}

json health_to_json(const HealthStateVector& h) {
    json states = json::object();
    for (const auto& [id, bad] : h.states) states[id] = bad ? 1 : 0;
    return json{{"t", h.timestamp}, {"h", std::move(states)}};
}

namespace {

std::string dot_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + '"';
}

}  // namespace

std::string to_dot(const CausalGraph& g, const SubsystemSet& symptomatic,
                   const SubsystemSet& root_causes, const std::string& graph_name) {
    std::ostringstream os;
    os << "digraph " << dot_quote(graph_name) << " {\n";
    os << "  node [shape=circle, style=filled, fillcolor=lightblue];\n";
    for (const auto& id : g.nodes()) {
        os << "  " << dot_quote(id);
        std::vector<std::string> attrs;
        if (symptomatic.contains(id)) attrs.emplace_back("fillcolor=yellow");
        if (root_causes.contains(id)) {
            attrs.emplace_back("penwidth=3");
            attrs.emplace_back("color=red");
        }
        if (!attrs.empty()) {
            os << " [";
            for (std::size_t i = 0; i < attrs.size(); ++i) os << (i ? ", " : "") << attrs[i];
            os << ']';
        }
        os << ";\n";
    }
    for (const auto& [a, b] : g.edges())
        os << "  " << dot_quote(g.name(a)) << " -> " << dot_quote(g.name(b)) << ";\n";
    os << "}\n";
    return os.str();
}

}  // namespace cpsdiag

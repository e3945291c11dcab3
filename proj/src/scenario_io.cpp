#include "supraflow/scenario_io.hpp"

#include "supraflow/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace supraflow {

namespace {

// ---------------------------------------------------------------------------
// Reading

void allow_keys(const YAML::Node& node, const std::string& where,
                std::initializer_list<const char*> keys) {
    if (!node.IsMap()) throw InvalidModel(where + " must be a mapping");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) throw InvalidModel("unknown key '" + key + "' in " + where);
    }
}

const YAML::Node require(const YAML::Node& node, const char* key, const std::string& where) {
    const YAML::Node child = node[key];
    if (!child) throw InvalidModel("missing '" + std::string(key) + "' in " + where);
    return child;
}

template <class T>
T read(const YAML::Node& node, const std::string& what) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw InvalidModel("cannot read " + what);
    }
}

template <class T>
void read_optional(const YAML::Node& parent, const char* key, const std::string& where, T& out) {
    if (const YAML::Node child = parent[key]) out = read<T>(child, where + "." + key);
}

std::vector<double> read_doubles(const YAML::Node& node, const std::string& what) {
    if (!node.IsSequence()) throw InvalidModel(what + " must be a list");
    std::vector<double> out;
    for (const auto& item : node) out.push_back(read<double>(item, what));
    return out;
}

LayerSpec read_layer(const YAML::Node& node, const std::string& where) {
    allow_keys(node, where, {"topology", "weight", "edges", "weights", "diffusion"});
    LayerSpec l;
    l.topology = topology_from_string(read<std::string>(require(node, "topology", where), where + ".topology"));
    read_optional(node, "weight", where, l.weight);
    read_optional(node, "diffusion", where, l.diffusion);
    if (const auto edges = node["edges"]) {
        if (!edges.IsSequence()) throw InvalidModel(where + ".edges must be a list");
        for (const auto& e : edges) {
            const auto v = read_doubles(e, where + ".edges entry");
            if (v.size() != 2 && v.size() != 3) {
                throw InvalidModel(where + ".edges entries are [from, to] or [from, to, weight]");
            }
            l.edges.push_back({static_cast<int>(v[0]) - 1, static_cast<int>(v[1]) - 1,
                               v.size() == 3 ? v[2] : 1.0});
        }
    }
    if (const auto w = node["weights"]) {
        if (!w.IsSequence()) throw InvalidModel(where + ".weights must be a list of rows");
        for (const auto& row : w) l.weights.push_back(read_doubles(row, where + ".weights row"));
    }
    return l;
}

NetworkSpec read_network(const YAML::Node& node) {
    allow_keys(node, "network", {"nodes", "layers", "interlayer"});
    NetworkSpec net;
    net.nodes = read<int>(require(node, "nodes", "network"), "network.nodes");
    const auto layers = require(node, "layers", "network");
    if (!layers.IsSequence()) throw InvalidModel("network.layers must be a list");
    int k = 1;
    for (const auto& l : layers) net.layers.push_back(read_layer(l, "network.layers[" + std::to_string(k++) + "]"));
    if (const auto inter = node["interlayer"]) {
        if (!inter.IsSequence()) throw InvalidModel("network.interlayer must be a list");
        for (const auto& c : inter) {
            allow_keys(c, "network.interlayer entry", {"layers", "diffusion"});
            const auto pair = read_doubles(require(c, "layers", "network.interlayer entry"), "interlayer layers");
            if (pair.size() != 2) throw InvalidModel("interlayer layers must name two layers");
            net.interlayer.push_back({static_cast<int>(pair[0]) - 1, static_cast<int>(pair[1]) - 1,
                                      read<double>(require(c, "diffusion", "network.interlayer entry"),
                                                   "interlayer diffusion")});
        }
    }
    return net;
}

Quadratic read_quadratic(const YAML::Node& node, const std::string& what) {
    const auto v = read_doubles(node, what);
    if (v.size() != 2) throw InvalidModel(what + " must be [curvature, linear]");
    return Quadratic{v[0], v[1]};
}

ObjectiveSpec read_objectives(const YAML::Node& node) {
    allow_keys(node, "objectives", {"generator", "uniform", "costs"});
    ObjectiveSpec o;
    o.generator = objective_generator_from_string(
        read<std::string>(require(node, "generator", "objectives"), "objectives.generator"));
    if (const auto u = node["uniform"]) o.uniform = read_quadratic(u, "objectives.uniform");
    if (const auto costs = node["costs"]) {
        if (!costs.IsSequence()) throw InvalidModel("objectives.costs must be a list");
        for (const auto& c : costs) o.costs.push_back(read_quadratic(c, "objectives.costs entry"));
    }
    return o;
}

DispatchOrder order_from_string(const std::string& text) {
    if (text == "first_order") return DispatchOrder::First;
    if (text == "second_order") return DispatchOrder::Second;
    throw InvalidModel("dynamics.order must be first_order or second_order");
}

const char* to_string(DispatchOrder order) {
    return order == DispatchOrder::First ? "first_order" : "second_order";
}

DynamicsSpec read_dynamics(const YAML::Node& node) {
    allow_keys(node, "dynamics", {"kind", "theta", "rho", "order"});
    DynamicsSpec d;
    d.kind = dynamics_kind_from_string(read<std::string>(require(node, "kind", "dynamics"), "dynamics.kind"));
    read_optional(node, "theta", "dynamics", d.theta);
    read_optional(node, "rho", "dynamics", d.rho);
    if (const auto o = node["order"]) d.order = order_from_string(read<std::string>(o, "dynamics.order"));
    return d;
}

DispatchSpec read_dispatch(const YAML::Node& node) {
    allow_keys(node, "dispatch",
               {"roles", "power_demand", "gas_demand", "phi", "coupling", "clamp", "bounds"});
    DispatchSpec d;
    if (const auto roles = node["roles"]) {
        if (!roles.IsSequence()) throw InvalidModel("dispatch.roles must be a list");
        d.roles.clear();
        for (const auto& r : roles) d.roles.push_back(layer_role_from_string(read<std::string>(r, "dispatch role")));
    }
    read_optional(node, "power_demand", "dispatch", d.power_demand);
    read_optional(node, "gas_demand", "dispatch", d.gas_demand);
    read_optional(node, "phi", "dispatch", d.phi);
    if (const auto c = node["coupling"]) {
        const auto text = read<std::string>(c, "dispatch.coupling");
        if (text == "supra") {
            d.coupling = ConsensusCoupling::Supra;
        } else if (text == "intralayer") {
            d.coupling = ConsensusCoupling::Intralayer;
        } else {
            throw InvalidModel("dispatch.coupling must be supra or intralayer");
        }
    }
    read_optional(node, "clamp", "dispatch", d.clamp);
    if (const auto b = node["bounds"]) {
        if (!b.IsSequence()) throw InvalidModel("dispatch.bounds must be a list");
        for (const auto& entry : b) {
            const auto v = read_doubles(entry, "dispatch.bounds entry");
            if (v.size() != 2) throw InvalidModel("dispatch.bounds entries are [lower, upper]");
            d.bounds.push_back({v[0], v[1]});
        }
    }
    return d;
}

IntegratorConfig read_integrator(const YAML::Node& node) {
    allow_keys(node, "integrator", {"step", "t_end", "record_every"});
    IntegratorConfig c = Scenario{}.integrator;
    read_optional(node, "step", "integrator", c.step);
    read_optional(node, "t_end", "integrator", c.t_end);
    read_optional(node, "record_every", "integrator", c.record_every);
    return c;
}

InitialSpec read_initial(const YAML::Node& node) {
    allow_keys(node, "initial", {"mode", "seed", "range", "y", "lambda"});
    InitialSpec i;
    if (const auto m = node["mode"]) {
        const auto text = read<std::string>(m, "initial.mode");
        if (text == "zero") {
            i.mode = InitialMode::Zero;
        } else if (text == "random") {
            i.mode = InitialMode::Random;
        } else if (text == "explicit") {
            i.mode = InitialMode::Explicit;
        } else {
            throw InvalidModel("initial.mode must be zero, random or explicit");
        }
    }
    if (const auto s = node["seed"]) i.seed = read<std::uint64_t>(s, "initial.seed");
    read_optional(node, "range", "initial", i.range);
    if (const auto y = node["y"]) i.y = read_doubles(y, "initial.y");
    if (const auto l = node["lambda"]) i.lambda = read_doubles(l, "initial.lambda");
    return i;
}

DetectionSpec read_detection(const YAML::Node& node) {
    allow_keys(node, "detection", {"eps", "reference", "xstar"});
    DetectionSpec d;
    read_optional(node, "eps", "detection", d.eps);
    if (const auto r = node["reference"]) {
        const auto text = read<std::string>(r, "detection.reference");
        if (text == "quadratic_optimum") {
            d.reference = ReferenceKind::QuadraticOptimum;
        } else if (text == "explicit") {
            d.reference = ReferenceKind::Explicit;
        } else {
            throw InvalidModel("detection.reference must be quadratic_optimum or explicit");
        }
    }
    read_optional(node, "xstar", "detection", d.xstar);
    return d;
}

// ---------------------------------------------------------------------------
// Writing

// Plain scalar in shortest round-trip form.
std::string num(double v) { return format_double(v); }

void emit_doubles(YAML::Emitter& out, const std::vector<double>& values) {
    out << YAML::Flow << YAML::BeginSeq;
    for (double v : values) out << num(v);
    out << YAML::EndSeq;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw InvalidModel(std::string("malformed scenario document: ") + e.what());
    }
    allow_keys(root, "scenario",
               {"id", "network", "objectives", "dynamics", "dispatch", "integrator", "initial", "detection"});

    Scenario s;
    s.id = read<std::string>(require(root, "id", "scenario"), "id");
    s.network = read_network(require(root, "network", "scenario"));
    s.objectives = read_objectives(require(root, "objectives", "scenario"));
    if (const auto d = root["dynamics"]) s.dynamics = read_dynamics(d);
    if (const auto d = root["dispatch"]) s.dispatch = read_dispatch(d);
    if (const auto i = root["integrator"]) s.integrator = read_integrator(i);
    if (const auto i = root["initial"]) s.initial = read_initial(i);
    if (const auto d = root["detection"]) s.detection = read_detection(d);
    s.validate();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read scenario file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << s.id;

    out << YAML::Key << "network" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "nodes" << YAML::Value << s.network.nodes;
    out << YAML::Key << "layers" << YAML::Value << YAML::BeginSeq;
    for (const auto& l : s.network.layers) {
        out << YAML::BeginMap;
        out << YAML::Key << "topology" << YAML::Value << std::string(to_string(l.topology));
        out << YAML::Key << "weight" << YAML::Value << num(l.weight);
        out << YAML::Key << "diffusion" << YAML::Value << num(l.diffusion);
        if (!l.edges.empty()) {
            out << YAML::Key << "edges" << YAML::Value << YAML::BeginSeq;
            for (const auto& e : l.edges) {
                out << YAML::Flow << YAML::BeginSeq << e.from + 1 << e.to + 1 << num(e.weight) << YAML::EndSeq;
            }
            out << YAML::EndSeq;
        }
        if (!l.weights.empty()) {
            out << YAML::Key << "weights" << YAML::Value << YAML::BeginSeq;
            for (const auto& row : l.weights) emit_doubles(out, row);
            out << YAML::EndSeq;
        }
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "interlayer" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : s.network.interlayer) {
        out << YAML::BeginMap;
        out << YAML::Key << "layers" << YAML::Value << YAML::Flow << YAML::BeginSeq << c.first + 1
            << c.second + 1 << YAML::EndSeq;
        out << YAML::Key << "diffusion" << YAML::Value << num(c.diffusion);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;

    out << YAML::Key << "objectives" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "generator" << YAML::Value << std::string(to_string(s.objectives.generator));
    out << YAML::Key << "uniform" << YAML::Value;
    emit_doubles(out, {s.objectives.uniform.curvature, s.objectives.uniform.linear});
    if (!s.objectives.costs.empty()) {
        out << YAML::Key << "costs" << YAML::Value << YAML::BeginSeq;
        for (const auto& q : s.objectives.costs) emit_doubles(out, {q.curvature, q.linear});
        out << YAML::EndSeq;
    }
    out << YAML::EndMap;

    out << YAML::Key << "dynamics" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << std::string(to_string(s.dynamics.kind));
    out << YAML::Key << "theta" << YAML::Value << num(s.dynamics.theta);
    out << YAML::Key << "rho" << YAML::Value << num(s.dynamics.rho);
    out << YAML::Key << "order" << YAML::Value << to_string(s.dynamics.order);
    out << YAML::EndMap;

    if (s.dispatch) {
        const auto& d = *s.dispatch;
        out << YAML::Key << "dispatch" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "roles" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (auto r : d.roles) out << std::string(to_string(r));
        out << YAML::EndSeq;
        out << YAML::Key << "power_demand" << YAML::Value << num(d.power_demand);
        out << YAML::Key << "gas_demand" << YAML::Value << num(d.gas_demand);
        out << YAML::Key << "phi" << YAML::Value << num(d.phi);
        out << YAML::Key << "coupling" << YAML::Value
            << (d.coupling == ConsensusCoupling::Supra ? "supra" : "intralayer");
        out << YAML::Key << "clamp" << YAML::Value << d.clamp;
        if (!d.bounds.empty()) {
            out << YAML::Key << "bounds" << YAML::Value << YAML::BeginSeq;
            for (const auto& b : d.bounds) emit_doubles(out, {b.lower, b.upper});
            out << YAML::EndSeq;
        }
        out << YAML::EndMap;
    }

    out << YAML::Key << "integrator" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "step" << YAML::Value << num(s.integrator.step);
    out << YAML::Key << "t_end" << YAML::Value << num(s.integrator.t_end);
    out << YAML::Key << "record_every" << YAML::Value << s.integrator.record_every;
    out << YAML::EndMap;

    out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
    const char* mode = s.initial.mode == InitialMode::Zero     ? "zero"
                       : s.initial.mode == InitialMode::Random ? "random"
                                                               : "explicit";
    out << YAML::Key << "mode" << YAML::Value << mode;
    if (s.initial.seed) out << YAML::Key << "seed" << YAML::Value << *s.initial.seed;
    out << YAML::Key << "range" << YAML::Value << num(s.initial.range);
    if (!s.initial.y.empty()) {
        out << YAML::Key << "y" << YAML::Value;
        emit_doubles(out, s.initial.y);
    }
    if (!s.initial.lambda.empty()) {
        out << YAML::Key << "lambda" << YAML::Value;
        emit_doubles(out, s.initial.lambda);
    }
    out << YAML::EndMap;

    out << YAML::Key << "detection" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "eps" << YAML::Value << num(s.detection.eps);
    out << YAML::Key << "reference" << YAML::Value
        << (s.detection.reference == ReferenceKind::QuadraticOptimum ? "quadratic_optimum" : "explicit");
    out << YAML::Key << "xstar" << YAML::Value << num(s.detection.xstar);
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
    write_text_file(path, serialize_scenario(s));
}

std::vector<std::filesystem::path> emit_builtin_scenarios(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> written;
    for (const auto& s : {build_vi_a_scenario(), build_vi_b_scenario(), build_dispatch_scenario()}) {
        auto path = dir / (s.id + ".scenario");
        save_scenario(s, path);
        written.push_back(std::move(path));
    }
    return written;
}

}  // namespace supraflow

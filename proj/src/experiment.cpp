#include "insmkt/experiment.hpp"

#include <algorithm>
#include <cstdlib>

#include "insmkt/errors.hpp"
#include "insmkt/io.hpp"

namespace insmkt {

using nlohmann::json;

json to_json(const ExperimentConfig& cfg) {
    return json{{"market", io::to_json(cfg.market)},
                {"solver", io::to_json(cfg.solver)},
                {"simulation", io::to_json(cfg.simulation)},
                {"sweep", {{"axis", cfg.sweep.axis}, {"values", cfg.sweep.values}}},
                {"output",
                 {{"directory", cfg.output.directory},
                  {"emit_csv", cfg.output.emit_csv},
                  {"emit_svg", cfg.output.emit_svg},
                  {"stride", cfg.output.stride}}}};
}

namespace {

void parse_sweep(const json& j, SweepSpec& out) {
    if (!j.is_object()) throw ConfigError("sweep block must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        if (key == "axis") {
            if (!v.is_string()) throw ConfigError("sweep.axis must be a string");
            out.axis = v.get<std::string>();
        } else if (key == "values") {
            if (!v.is_array()) throw ConfigError("sweep.values must be an array of numbers");
            out.values.clear();
            for (const auto& x : v) {
                if (!x.is_number()) throw ConfigError("sweep.values must be an array of numbers");
                out.values.push_back(x.get<double>());
            }
        } else {
            throw ConfigError("unknown key 'sweep." + key + "'");
        }
    }
    const auto& axes = sweep_axes();
    if (std::find(axes.begin(), axes.end(), out.axis) == axes.end())
        throw ConfigError("sweep.axis '" + out.axis + "' is not a sweepable parameter");
}

void parse_output(const json& j, OutputSpec& out) {
    if (!j.is_object()) throw ConfigError("output block must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        if (key == "directory") {
            if (!v.is_string()) throw ConfigError("output.directory must be a string");
            out.directory = v.get<std::string>();
        } else if (key == "emit_csv" || key == "emit_svg") {
            if (!v.is_boolean()) throw ConfigError("output." + key + " must be a boolean");
            (key == "emit_csv" ? out.emit_csv : out.emit_svg) = v.get<bool>();
        } else if (key == "stride") {
            if (!v.is_number_integer() || v.get<long long>() < 1)
                throw ConfigError("output.stride must be a positive integer");
            out.stride = v.get<std::size_t>();
        } else {
            throw ConfigError("unknown key 'output." + key + "'");
        }
    }
}

}  // namespace

ExperimentConfig experiment_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig cfg;
    for (const auto& [key, v] : j.items()) {
        if (key == "market") io::from_json(v, cfg.market);
        else if (key == "solver") io::from_json(v, cfg.solver);
        else if (key == "simulation") io::from_json(v, cfg.simulation);
        else if (key == "sweep") parse_sweep(v, cfg.sweep);
        else if (key == "output") parse_output(v, cfg.output);
        else throw ConfigError("unknown config block '" + key + "'");
    }
    cfg.simulation.stride = cfg.output.stride;
    return cfg;
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + assignment + "' must look like block.key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);

    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (key.empty()) throw ConfigError("override path '" + path + "' has an empty component");
        if (!node->is_object()) throw ConfigError("override path '" + path + "' is not an object");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

ExperimentConfig load_experiment(const std::optional<std::filesystem::path>& file,
                                 const std::vector<std::string>& overrides) {
    json doc = json::object();
    if (file) {
        doc = io::read_json(*file);
        if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    }
    if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
        if (!doc.contains("output")) doc["output"] = json::object();
        if (!doc["output"].is_object()) throw ConfigError("output block must be a JSON object");
        doc["output"]["directory"] = env;
    }
    for (const auto& o : overrides) apply_override(doc, o);
    ExperimentConfig cfg = experiment_from_json(doc);
    try {
        cfg.market.validate();
        cfg.solver.validate();
    } catch (const InvalidParameters& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

}  // namespace insmkt

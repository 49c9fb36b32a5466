#include "gsn/config.hpp"

#include <json.hpp>

namespace gsn {

namespace {

using nlohmann::json;

// Pulls a field of the requested type, turning nlohmann's type errors into
// ParseError with the dotted field path.
template <typename T>
void read_field(const json& obj, const std::string& path, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParseError("config field '" + path + key + "' has the wrong type");
    }
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ParseError("unknown config field '" + path + key + "'");
    }
}

NurseConfig parse_nurse(const json& obj) {
    reject_unknown(obj, "nurse.", {"loss", "lr0", "cutoff", "inner_steps", "backtrack"});
    NurseConfig nc;
    std::string loss = "com";
    read_field(obj, "nurse.", "loss", loss);
    try {
        nc.loss = LossKind::parse(loss);
    } catch (const ParseError& e) {
        throw ParseError(std::string("config field 'nurse.loss': ") + e.what());
    }
    read_field(obj, "nurse.", "lr0", nc.lr0);
    read_field(obj, "nurse.", "cutoff", nc.cutoff);
    read_field(obj, "nurse.", "inner_steps", nc.inner_steps);
    read_field(obj, "nurse.", "backtrack", nc.backtrack);
    return nc;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("config root must be a JSON object");
    reject_unknown(doc, "",
                   {"grid", "entities", "steps", "seeds", "nurse", "formation", "schedule", "pull", "token_seed",
                    "out"});

    ExperimentConfig cfg;
    if (doc.contains("grid")) {
        const json& g = doc.at("grid");
        if (!g.is_object()) throw ParseError("config field 'grid' must be an object");
        reject_unknown(g, "grid.", {"h", "w", "d"});
        read_field(g, "grid.", "h", cfg.h);
        read_field(g, "grid.", "w", cfg.w);
        read_field(g, "grid.", "d", cfg.d);
    }
    read_field(doc, "", "entities", cfg.entities);
    read_field(doc, "", "steps", cfg.steps);
    if (doc.contains("seeds")) {
        const json& s = doc.at("seeds");
        if (!s.is_object()) throw ParseError("config field 'seeds' must be an object");
        reject_unknown(s, "seeds.", {"start", "count"});
        read_field(s, "seeds.", "start", cfg.seeds.start);
        read_field(s, "seeds.", "count", cfg.seeds.count);
    }
    if (doc.contains("nurse") && !doc.at("nurse").is_null()) {
        if (!doc.at("nurse").is_object()) throw ParseError("config field 'nurse' must be an object or null");
        cfg.nurse = parse_nurse(doc.at("nurse"));
    }
    if (doc.contains("formation")) {
        const json& f = doc.at("formation");
        if (!f.is_object()) throw ParseError("config field 'formation' must be an object");
        reject_unknown(f, "formation.", {"s_min", "tau"});
        read_field(f, "formation.", "s_min", cfg.s_min);
        read_field(f, "formation.", "tau", cfg.tau);
    }
    if (doc.contains("schedule")) {
        const json& s = doc.at("schedule");
        if (!s.is_object()) throw ParseError("config field 'schedule' must be an object");
        reject_unknown(s, "schedule.", {"beta_start", "beta_end"});
        read_field(s, "schedule.", "beta_start", cfg.beta_start);
        read_field(s, "schedule.", "beta_end", cfg.beta_end);
    }
    read_field(doc, "", "pull", cfg.pull);
    read_field(doc, "", "token_seed", cfg.token_seed);
    read_field(doc, "", "out", cfg.out_dir);

    // Collect every violation before reporting.
    std::vector<std::string> bad;
    if (cfg.h < 1) bad.push_back("grid.h must be >= 1");
    if (cfg.w < 1) bad.push_back("grid.w must be >= 1");
    if (cfg.d < 1) bad.push_back("grid.d must be >= 1");
    if (cfg.entities < 2) bad.push_back("entities must be >= 2");
    if (cfg.steps < 1) bad.push_back("steps must be >= 1");
    if (cfg.seeds.count < 1) bad.push_back("seeds.count must be >= 1");
    if (!(cfg.s_min > 0.0 && cfg.s_min <= 1.0)) bad.push_back("formation.s_min must be in (0, 1]");
    if (!(cfg.tau > 0.0 && cfg.tau < 1.0)) bad.push_back("formation.tau must be in (0, 1)");
    if (!(cfg.beta_start > 0.0 && cfg.beta_start <= cfg.beta_end && cfg.beta_end < 1.0))
        bad.push_back("schedule requires 0 < beta_start <= beta_end < 1");
    if (cfg.pull < 0.0) bad.push_back("pull must be >= 0");
    if (cfg.out_dir.empty()) bad.push_back("out must be a non-empty path");
    if (cfg.nurse) {
        if (!(cfg.nurse->lr0 >= 0.0)) bad.push_back("nurse.lr0 must be >= 0");
        if (cfg.nurse->cutoff < 0) bad.push_back("nurse.cutoff must be >= 0");
        if (cfg.nurse->cutoff > cfg.steps) bad.push_back("nurse.cutoff must be <= steps");
        if (cfg.nurse->inner_steps < 1) bad.push_back("nurse.inner_steps must be >= 1");
    }
    if (!bad.empty()) {
        std::string msg = "invalid config:";
        for (const auto& b : bad) msg += "\n  - " + b;
        throw ValidationError(msg);
    }
    return cfg;
}

std::string to_json(const ExperimentConfig& cfg) {
    json doc;
    doc["grid"] = {{"h", cfg.h}, {"w", cfg.w}, {"d", cfg.d}};
    doc["entities"] = cfg.entities;
    doc["steps"] = cfg.steps;
    doc["seeds"] = {{"start", cfg.seeds.start}, {"count", cfg.seeds.count}};
    if (cfg.nurse) {
        doc["nurse"] = {{"loss", cfg.nurse->loss.to_string()},
                        {"lr0", cfg.nurse->lr0},
                        {"cutoff", cfg.nurse->cutoff},
                        {"inner_steps", cfg.nurse->inner_steps},
                        {"backtrack", cfg.nurse->backtrack}};
    } else {
        doc["nurse"] = nullptr;
    }
    doc["formation"] = {{"s_min", cfg.s_min}, {"tau", cfg.tau}};
    doc["schedule"] = {{"beta_start", cfg.beta_start}, {"beta_end", cfg.beta_end}};
    doc["pull"] = cfg.pull;
    doc["token_seed"] = cfg.token_seed;
    doc["out"] = cfg.out_dir;
    return doc.dump(2);
}

}  // namespace gsn

#include "nltf/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace nltf {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    fail_config("config field '" + where + "': " + what);
}

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& known) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!known.count(key)) bad(where.empty() ? key : where + "." + key, "unknown key");
    }
}

const json& field(const json& obj, const std::string& where, const char* name) {
    auto it = obj.find(name);
    if (it == obj.end()) bad(where.empty() ? name : where + "." + name, "missing");
    return *it;
}

int int_field(const json& v, const std::string& where) {
    if (!v.is_number_integer()) bad(where, "must be an integer");
    return v.get<int>();
}

double num_field(const json& v, const std::string& where) {
    if (!v.is_number()) bad(where, "must be a number");
    return v.get<double>();
}

Word parse_word_key(const std::string& key, int alphabet_size, const std::string& where) {
    Word w;
    if (key.empty()) bad(where, "empty word key");
    if (key.find(',') != std::string::npos) {
        std::stringstream ss(key);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                w.push_back(std::stoi(tok));
            } catch (...) {
                bad(where, "bad symbol '" + tok + "' in word key '" + key + "'");
            }
        }
    } else {
        for (char c : key) {
            if (c < '0' || c > '9') bad(where, "bad symbol '" + std::string(1, c) + "' in word key '" + key + "'");
            w.push_back(c - '0');
        }
    }
    for (Symbol s : w)
        if (s < 0 || s >= alphabet_size)
            bad(where, "symbol " + std::to_string(s) + " in word key '" + key + "' outside alphabet of size " +
                           std::to_string(alphabet_size));
    return w;
}

SymbolicSystem parse_system(const json& j) {
    if (!j.is_object()) bad("system", "must be an object");
    reject_unknown(j, "system", {"alphabet_size", "transition"});
    int m = int_field(field(j, "system", "alphabet_size"), "system.alphabet_size");
    const json& tj = field(j, "system", "transition");
    if (!tj.is_array()) bad("system.transition", "must be an array of rows");
    std::vector<std::vector<int>> rows;
    for (std::size_t i = 0; i < tj.size(); ++i) {
        const json& row = tj[i];
        std::string where = "system.transition[" + std::to_string(i) + "]";
        if (!row.is_array()) bad(where, "must be an array of 0/1 entries");
        std::vector<int> r;
        for (std::size_t k = 0; k < row.size(); ++k)
            r.push_back(int_field(row[k], where + "[" + std::to_string(k) + "]"));
        rows.push_back(std::move(r));
    }
    return SymbolicSystem(m, rows); // structural errors surface as config errors
}

Potential parse_potential(const SymbolicSystem& sys, const json& j, const std::string& where) {
    if (!j.is_object()) bad(where, "must be an object");
    reject_unknown(j, where, {"depth", "table"});
    int depth = int_field(field(j, where, "depth"), where + ".depth");
    const json& tj = field(j, where, "table");
    if (!tj.is_object()) bad(where + ".table", "must map words to values");
    std::map<Word, double> table;
    for (const auto& [key, value] : tj.items()) {
        Word w = parse_word_key(key, sys.alphabet_size(), where + ".table");
        table[w] = num_field(value, where + ".table['" + key + "']");
    }
    return Potential::from_map(sys, depth, table);
}

} // namespace

NonlinearOptions RunConfig::nonlinear_options() const {
    NonlinearOptions opts;
    opts.resolution = resolution;
    opts.log_base = log_base;
    opts.caps = caps;
    opts.solve = solve;
    return opts;
}

const FExpr& RunConfig::require_f(const char* command) const {
    if (!f) fail_config(std::string("command '") + command + "' needs an F expression in the config");
    return *f;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        fail_config(origin + ": " + e.what());
    }
    if (!root.is_object()) fail_config(origin + ": top level must be an object");
    reject_unknown(root, "",
                   {"system", "potentials", "F", "log_base", "n_max", "resolution", "caps", "tolerances",
                    "cohomology"});

    SymbolicSystem system = parse_system(field(root, "", "system"));

    const json& pj = field(root, "", "potentials");
    if (!pj.is_array() || pj.empty()) bad("potentials", "must be a non-empty array");
    std::vector<Potential> potentials;
    for (std::size_t i = 0; i < pj.size(); ++i)
        potentials.push_back(parse_potential(system, pj[i], "potentials[" + std::to_string(i) + "]"));

    RunConfig cfg{std::move(system), std::move(potentials), std::nullopt, {}, 2.718281828459045235,
                  "e",               20,                    201,          {}, {},
                  0,                 1,                     12};

    if (auto it = root.find("F"); it != root.end()) {
        const json& fj = *it;
        if (!fj.is_object()) bad("F", "must be an object");
        reject_unknown(fj, "F", {"source", "preset", "params"});
        bool has_source = fj.contains("source");
        bool has_preset = fj.contains("preset");
        if (has_source == has_preset) bad("F", "needs exactly one of 'source' or 'preset'");
        int dim = static_cast<int>(cfg.potentials.size());
        std::string src;
        std::vector<std::string> names;
        if (has_preset) {
            const json& pr = fj["preset"];
            if (!pr.is_string()) bad("F.preset", "must be a string");
            FPreset preset = fexpr_preset(pr.get<std::string>(), dim);
            src = preset.source;
            names = preset.param_names;
        } else {
            const json& sj = fj["source"];
            if (!sj.is_string()) bad("F.source", "must be a string");
            src = sj.get<std::string>();
        }
        std::map<std::string, double> param_map;
        if (fj.contains("params")) {
            const json& pm = fj["params"];
            if (!pm.is_object()) bad("F.params", "must map names to numbers");
            for (const auto& [key, value] : pm.items()) param_map[key] = num_field(value, "F.params." + key);
        }
        if (has_source) {
            names.clear();
            for (const auto& [key, value] : param_map) {
                (void)value;
                names.push_back(key);
            }
        } else {
            for (const auto& [key, value] : param_map) {
                (void)value;
                if (std::find(names.begin(), names.end(), key) == names.end())
                    bad("F.params." + key, "not a parameter of this preset");
            }
        }
        try {
            cfg.f = FExpr::parse(src, dim, names);
        } catch (const ParseError& e) {
            bad("F", std::string(e.what()));
        }
        cfg.param_values.assign(names.size(), 0.0);
        for (std::size_t i = 0; i < names.size(); ++i) {
            auto found = param_map.find(names[i]);
            if (found == param_map.end()) bad("F.params", "missing value for parameter '" + names[i] + "'");
            cfg.param_values[i] = found->second;
        }
    }

    if (auto it = root.find("log_base"); it != root.end()) {
        if (!it->is_string() || (it->get<std::string>() != "e" && it->get<std::string>() != "2"))
            bad("log_base", "must be \"e\" or \"2\"");
        cfg.log_base_label = it->get<std::string>();
        cfg.log_base = cfg.log_base_label == "2" ? 2.0 : 2.718281828459045235;
    }
    if (auto it = root.find("n_max"); it != root.end()) {
        cfg.n_max = int_field(*it, "n_max");
        if (cfg.n_max < 2) bad("n_max", "must be >= 2");
    }
    if (auto it = root.find("resolution"); it != root.end()) {
        cfg.resolution = int_field(*it, "resolution");
        if (cfg.resolution < 2) bad("resolution", "must be >= 2");
    }
    if (auto it = root.find("caps"); it != root.end()) {
        const json& cj = *it;
        if (!cj.is_object()) bad("caps", "must be an object");
        reject_unknown(cj, "caps", {"words", "states", "cycles"});
        if (cj.contains("words")) cfg.caps.words = static_cast<long long>(num_field(cj["words"], "caps.words"));
        if (cj.contains("states")) cfg.caps.states = static_cast<long long>(num_field(cj["states"], "caps.states"));
        if (cj.contains("cycles")) cfg.caps.cycles = static_cast<long long>(num_field(cj["cycles"], "caps.cycles"));
        if (cfg.caps.words < 1 || cfg.caps.states < 1 || cfg.caps.cycles < 1) bad("caps", "must be positive");
    }
    if (auto it = root.find("tolerances"); it != root.end()) {
        const json& tj = *it;
        if (!tj.is_object()) bad("tolerances", "must be an object");
        reject_unknown(tj, "tolerances", {"gradient", "q_max"});
        if (tj.contains("gradient")) cfg.solve.grad_tol = num_field(tj["gradient"], "tolerances.gradient");
        if (tj.contains("q_max")) cfg.solve.q_max = num_field(tj["q_max"], "tolerances.q_max");
        if (cfg.solve.grad_tol <= 0 || cfg.solve.q_max <= 0) bad("tolerances", "must be positive");
    }
    if (auto it = root.find("cohomology"); it != root.end()) {
        const json& cj = *it;
        if (!cj.is_object()) bad("cohomology", "must be an object");
        reject_unknown(cj, "cohomology", {"first", "second", "max_period"});
        if (cj.contains("first")) cfg.coh_first = int_field(cj["first"], "cohomology.first");
        if (cj.contains("second")) cfg.coh_second = int_field(cj["second"], "cohomology.second");
        if (cj.contains("max_period")) cfg.coh_max_period = int_field(cj["max_period"], "cohomology.max_period");
        int np = static_cast<int>(cfg.potentials.size());
        if (cfg.coh_first < 0 || cfg.coh_first >= np || cfg.coh_second < 0 || cfg.coh_second >= np)
            bad("cohomology", "potential index out of range");
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_config("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

void apply_env_overrides(RunConfig& cfg) {
    if (const char* cap = std::getenv("NLP_CAP_WORDS")) {
        char* end = nullptr;
        long long v = std::strtoll(cap, &end, 10);
        if (end == cap || *end != '\0' || v < 1) fail_config("NLP_CAP_WORDS must be a positive integer");
        cfg.caps.words = v;
    }
}

} // namespace nltf

#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "captrap/optimize.hpp"

// Run configuration: a single text file with [section] key = value lines
// mirroring the parameter types, one [scheme <label>] section per scheme.
// Figure-reproduction configs under configs/ are written in this format.

namespace captrap::config {

using model::ModelParams;
using model::SchemeKind;
using model::SchemeSpec;

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class OptimizeTarget { Theta, Barrier };

struct GridSpec {
    std::optional<double> x_min;  // default: largest critical capital
    std::optional<double> x_max;  // default: x_min + 9
    int points = 181;
};

/// A scheme as configured: drift-mapped recipes re-derive (r_ins,
/// x_star_ins) from whatever ModelParams they are materialized against,
/// which is what the alpha-sweep columns need.
struct SchemeRecipe {
    SchemeKind kind = SchemeKind::Uninsured;
    double kappa = 1.0;
    double theta = 0.0;
    double theta_star = 0.0;
    double barrier = 0.0;
    bool drift_mapping = true;
    double r_ins = 0.0;       // used when !drift_mapping
    double x_star_ins = 0.0;  // used when !drift_mapping
    std::string label;

    SchemeSpec materialize(const ModelParams& p) const {
        SchemeSpec s;
        switch (kind) {
            case SchemeKind::Uninsured: s = SchemeSpec::uninsured(p); break;
            case SchemeKind::Insured: s = SchemeSpec::insured(p, kappa, theta); break;
            case SchemeKind::SubsidisedInsured:
                s = SchemeSpec::subsidised(p, kappa, theta, theta_star);
                break;
            case SchemeKind::BarrierSubsidised:
                s = SchemeSpec::barrier_subsidised(p, kappa, theta, barrier, r_ins,
                                                   x_star_ins);
                break;
        }
        if (!drift_mapping && kind != SchemeKind::Uninsured) {
            s.r_ins = r_ins;
            s.x_star_ins = x_star_ins;
        }
        s.label = label;
        s.validate(p);
        return s;
    }
};

struct RunConfig {
    ModelParams model;
    std::vector<double> alpha_list;  // extra psi columns, Fig 1(b)/4(b) style
    std::vector<SchemeRecipe> scheme_recipes;
    welfare::WelfareParams welfare;
    model::SimConfig sim;
    GridSpec grid;
    std::vector<double> laplace_deltas = {0.0, 0.125, 0.03125, 0.0078125};
    std::vector<double> r_list;      // expected-time growth rates
    std::vector<double> b_grid;      // expected-time barrier grid (Fig 7)
    double expected_time_x = 3.5;    // fixed x for the barrier-grid mode
    OptimizeTarget target = OptimizeTarget::Theta;
    std::optional<double> b_max;
    optimize::RootConfig root;

    std::vector<SchemeSpec> schemes() const {
        std::vector<SchemeSpec> out;
        out.reserve(scheme_recipes.size());
        for (const auto& rec : scheme_recipes) out.push_back(rec.materialize(model));
        return out;
    }

    double max_critical_capital() const {
        double xc = model.x_star;
        for (const auto& s : schemes()) xc = std::max(xc, s.critical_capital());
        return xc;
    }

    std::vector<double> x_grid() const {
        const double lo = grid.x_min.value_or(max_critical_capital());
        const double hi = grid.x_max.value_or(lo + 9.0);
        if (!(hi > lo) || grid.points < 2)
            throw config_error("grid: need x_max > x_min and points >= 2");
        std::vector<double> xs(static_cast<std::size_t>(grid.points));
        for (int i = 0; i < grid.points; ++i)
            xs[static_cast<std::size_t>(i)] =
                lo + (hi - lo) * i / (grid.points - 1);
        return xs;
    }
};

namespace detail {

struct Section {
    std::string name;
    std::map<std::string, std::string> kv;

    bool has(const std::string& key) const { return kv.count(key) > 0; }

    std::string str(const std::string& key) const {
        auto it = kv.find(key);
        if (it == kv.end())
            throw config_error("[" + name + "] missing key '" + key + "'");
        return it->second;
    }

    double num(const std::string& key) const {
        const std::string v = str(key);
        try {
            std::size_t pos = 0;
            const double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw config_error("[" + name + "] key '" + key + "': bad number '" + v +
                               "'");
        }
    }

    double num_or(const std::string& key, double fallback) const {
        return has(key) ? num(key) : fallback;
    }

    std::vector<double> num_list(const std::string& key) const {
        std::istringstream in(str(key));
        std::vector<double> out;
        std::string tok;
        while (in >> tok) {
            try {
                out.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw config_error("[" + name + "] key '" + key + "': bad number '" +
                                   tok + "'");
            }
        }
        if (out.empty())
            throw config_error("[" + name + "] key '" + key + "': empty list");
        return out;
    }
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<Section> parse_sections(const std::string& text) {
    std::vector<Section> sections;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error("line " + std::to_string(line_no) +
                                   ": unterminated section header");
            sections.push_back({trim(line.substr(1, line.size() - 2)), {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || sections.empty())
            throw config_error("line " + std::to_string(line_no) +
                               ": expected 'key = value' inside a section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw config_error("line " + std::to_string(line_no) +
                                            ": empty key");
        sections.back().kv[key] = value;
    }
    return sections;
}

inline SchemeRecipe parse_scheme(const Section& sec, const ModelParams& p,
                                 const std::string& label) {
    const std::string type = sec.str("type");
    SchemeRecipe rec;
    if (type == "uninsured") {
        rec.kind = SchemeKind::Uninsured;
    } else if (type == "insured" || type == "subsidised" || type == "barrier") {
        rec.kappa = sec.num("kappa");
        rec.theta = sec.num("theta");
        const std::string mapping = sec.has("mapping") ? sec.str("mapping") : "drift";
        if (type == "insured") {
            rec.kind = SchemeKind::Insured;
        } else if (type == "subsidised") {
            rec.kind = SchemeKind::SubsidisedInsured;
            rec.theta_star = sec.num("theta_star");
        } else {
            rec.kind = SchemeKind::BarrierSubsidised;
            rec.barrier = sec.num("barrier");
            if (!sec.has("r_ins") || !sec.has("x_star_ins"))
                throw config_error("[" + sec.name +
                                   "] barrier scheme needs explicit r_ins and "
                                   "x_star_ins");
        }
        if (mapping == "explicit" || rec.kind == SchemeKind::BarrierSubsidised) {
            rec.drift_mapping = false;
            rec.r_ins = sec.num("r_ins");
            rec.x_star_ins = sec.num("x_star_ins");
        } else if (mapping != "drift") {
            throw config_error("[" + sec.name + "] unknown mapping '" + mapping + "'");
        }
    } else {
        throw config_error("[" + sec.name + "] unknown scheme type '" + type + "'");
    }
    rec.label = label.empty() ? type : label;
    try {
        rec.materialize(p);
    } catch (const std::exception& e) {
        throw config_error("[" + sec.name + "] " + e.what());
    }
    return rec;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    bool saw_model = false;
    for (const auto& sec : detail::parse_sections(text)) {
        if (sec.name == "model") {
            cfg.model.r = sec.num("r");
            cfg.model.lambda = sec.num("lambda");
            cfg.model.alpha = sec.num("alpha");
            cfg.model.x_star = sec.num("x_star");
            if (sec.has("alpha_list")) cfg.alpha_list = sec.num_list("alpha_list");
            try {
                cfg.model.validate();
            } catch (const std::exception& e) {
                throw config_error(std::string("[model] ") + e.what());
            }
            saw_model = true;
        } else if (sec.name == "grid") {
            if (sec.has("x_min")) cfg.grid.x_min = sec.num("x_min");
            if (sec.has("x_max")) cfg.grid.x_max = sec.num("x_max");
            cfg.grid.points = static_cast<int>(sec.num_or("points", 181));
        } else if (sec.name == "welfare") {
            cfg.welfare.delta = sec.num_or("delta", cfg.welfare.delta);
            cfg.welfare.m_cost = sec.num_or("m_cost", cfg.welfare.m_cost);
            if (sec.has("subsidy_rate_mode")) {
                const std::string mode = sec.str("subsidy_rate_mode");
                if (mode == "loading_gap")
                    cfg.welfare.subsidy_rate_mode = welfare::SubsidyRateMode::LoadingGap;
                else if (mode == "premium_scaled")
                    cfg.welfare.subsidy_rate_mode = welfare::SubsidyRateMode::PremiumScaled;
                else
                    throw config_error("[welfare] unknown subsidy_rate_mode '" + mode +
                                       "'");
            }
        } else if (sec.name == "sim") {
            cfg.sim.n_paths = static_cast<std::size_t>(
                sec.num_or("paths", static_cast<double>(cfg.sim.n_paths)));
            cfg.sim.t_max = sec.num_or("t_max", cfg.sim.t_max);
            cfg.sim.seed = static_cast<std::uint64_t>(
                sec.num_or("seed", static_cast<double>(cfg.sim.seed)));
            if (sec.has("threads"))
                cfg.sim.n_threads = static_cast<unsigned>(sec.num("threads"));
            if (sec.has("escape_level"))
                cfg.sim.escape_level = sec.num("escape_level");
        } else if (sec.name == "laplace") {
            cfg.laplace_deltas = sec.num_list("deltas");
        } else if (sec.name == "expected_time") {
            if (sec.has("r_list")) cfg.r_list = sec.num_list("r_list");
            if (sec.has("b_grid")) cfg.b_grid = sec.num_list("b_grid");
            cfg.expected_time_x = sec.num_or("x", cfg.expected_time_x);
        } else if (sec.name == "optimize") {
            const std::string target = sec.has("target") ? sec.str("target") : "theta";
            if (target == "theta")
                cfg.target = OptimizeTarget::Theta;
            else if (target == "barrier")
                cfg.target = OptimizeTarget::Barrier;
            else
                throw config_error("[optimize] unknown target '" + target + "'");
            if (sec.has("b_max")) cfg.b_max = sec.num("b_max");
            cfg.root.abs_tol = sec.num_or("abs_tol", cfg.root.abs_tol);
        } else if (sec.name.rfind("scheme", 0) == 0) {
            std::string label = detail::trim(sec.name.substr(6));
            if (!saw_model)
                throw config_error("scheme sections must come after [model]");
            cfg.scheme_recipes.push_back(detail::parse_scheme(sec, cfg.model, label));
        } else {
            throw config_error("unknown section [" + sec.name + "]");
        }
    }
    if (!saw_model) throw config_error("config needs a [model] section");
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config(buf.str());
}

}  // namespace captrap::config

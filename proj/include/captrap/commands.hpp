#pragma once

#include <filesystem>
#include <iostream>
#include <sstream>

#include "captrap/config.hpp"
#include "captrap/csv.hpp"
#include "captrap/plot.hpp"

// The CLI command bodies. Each command is a pure function of (config, seed):
// identical inputs produce byte-identical files. Per-cell computation errors
// land in errors.log and leave the cell empty; they never abort a sweep.

namespace captrap::commands {

using config::OptimizeTarget;
using config::RunConfig;
using optimize::CellValue;
using optimize::ColumnSpec;
using optimize::SweepTable;

struct Context {
    RunConfig cfg;
    std::filesystem::path out_dir = "out";
    bool emit_plots = false;
};

namespace detail {

inline std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

inline void write_errors_log(const Context& ctx, const std::string& command,
                             const SweepTable& t) {
    std::string log;
    for (const auto& e : t.errors) {
        log += command + "," + csv::format_number(e.x) + "," + sanitize(e.column) +
               "," + e.kind + "," + sanitize(e.message) + "\n";
    }
    csv::write_file((ctx.out_dir / "errors.log").string(), log);
}

inline void emit(const Context& ctx, const std::string& command,
                 const std::string& csv_name, const SweepTable& t,
                 bool verdict_layout = false) {
    std::filesystem::create_directories(ctx.out_dir);
    const std::string content =
        verdict_layout ? csv::verdict_table_to_csv(t) : csv::table_to_csv(t);
    csv::write_file((ctx.out_dir / csv_name).string(), content);
    write_errors_log(ctx, command, t);
    if (ctx.emit_plots) {
        std::string svg_name = csv_name;
        svg_name.replace(svg_name.find(".csv"), 4, ".svg");
        csv::write_file((ctx.out_dir / svg_name).string(),
                        plot::table_to_svg(t, command));
    }
}

inline std::string short_num(double v) { return csv::format_number(v, 6); }

// Scheme- and quantity-dispatched closed forms.
inline double closed_psi(const model::ModelParams& p, const model::SchemeSpec& s,
                         double x) {
    return welfare::scheme_trapping_probability(p, s, x);
}

inline double closed_laplace(const model::ModelParams& p, const model::SchemeSpec& s,
                             double x, double delta) {
    if (s.kind == model::SchemeKind::BarrierSubsidised)
        return barrier::barrier_laplace(p, s, x, delta);
    return analytics::laplace_trapping({p, s, x, delta, {}});
}

// Nudges r so lambda/r sits a full integer_guard away from the nearest
// integer (the derivative series needs c away from the integers).
inline double nudge_rate(double lambda, double r, double guard, bool* nudged) {
    const double ratio = lambda / r;
    const double k = std::round(ratio);
    if (std::abs(ratio - k) > 0.25 * guard) {
        if (nudged) *nudged = false;
        return r;
    }
    if (nudged) *nudged = true;
    return lambda / (k + guard);
}

// Expected trapping time for the barrier scheme: no closed form exists, so
// differentiate the matched transform at delta = 0 with a one-sided
// second-order stencil, E[tau] = [3 m(0) - 4 m(h) + m(2h)] / (2h).
inline double barrier_expected_time(const model::ModelParams& p,
                                    const model::SchemeSpec& s, double x) {
    const double h = 1e-5;
    const double m0 = barrier::barrier_trapping_probability(p, s, x);
    const double m1 = barrier::barrier_laplace(p, s, x, h);
    const double m2 = barrier::barrier_laplace(p, s, x, 2.0 * h);
    return (3.0 * m0 - 4.0 * m1 + m2) / (2.0 * h);
}

}  // namespace detail

/// Trapping probabilities per scheme (and per alpha when alpha_list is set).
inline int cmd_trap_prob(const Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    if (cfg.scheme_recipes.empty())
        throw config::config_error("trap-prob: config declares no schemes");
    std::vector<double> alphas =
        cfg.alpha_list.empty() ? std::vector<double>{cfg.model.alpha} : cfg.alpha_list;

    std::vector<ColumnSpec> cols;
    double max_xc = cfg.model.x_star;
    for (const auto& rec : cfg.scheme_recipes) {
        for (double alpha : alphas) {
            model::ModelParams p = cfg.model;
            p.alpha = alpha;
            const model::SchemeSpec s = rec.materialize(p);
            max_xc = std::max(max_xc, s.critical_capital());
            std::string label = s.label;
            if (alphas.size() > 1) label += "_alpha=" + detail::short_num(alpha);
            cols.push_back({label, [p, s](double x) {
                                return CellValue{detail::closed_psi(p, s, x), ""};
                            }});
        }
    }
    config::RunConfig grid_cfg = cfg;
    if (!grid_cfg.grid.x_min) grid_cfg.grid.x_min = max_xc;
    const SweepTable t = optimize::sweep(grid_cfg.x_grid(), cols);
    detail::emit(ctx, "trap-prob", "trapping_probabilities.csv", t);
    return 0;
}

/// Laplace transforms of the trapping time, one column per (scheme, delta);
/// the delta = 0 column coincides with the trapping probability.
inline int cmd_laplace(const Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    if (cfg.scheme_recipes.empty())
        throw config::config_error("laplace: config declares no schemes");
    for (double d : cfg.laplace_deltas)
        if (d < 0.0) throw config::config_error("laplace: deltas must be >= 0");

    std::vector<ColumnSpec> cols;
    const auto schemes = cfg.schemes();
    for (const auto& s : schemes) {
        for (double delta : cfg.laplace_deltas) {
            std::string label = s.label + "_delta=" + detail::short_num(delta);
            const model::ModelParams p = cfg.model;
            cols.push_back({label, [p, s, delta](double x) {
                                return CellValue{detail::closed_laplace(p, s, x, delta),
                                                 ""};
                            }});
        }
    }
    const SweepTable t = optimize::sweep(cfg.x_grid(), cols);
    detail::emit(ctx, "laplace", "laplace_transforms.csv", t);
    return 0;
}

/// Expected trapping times: over the x-grid for a list of growth rates, or
/// over a barrier grid at fixed x when b_grid is configured.
inline int cmd_expected_time(const Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const specfun::SeriesPolicy pol;

    if (!cfg.b_grid.empty()) {
        const config::SchemeRecipe* barrier_rec = nullptr;
        for (const auto& rec : cfg.scheme_recipes)
            if (rec.kind == model::SchemeKind::BarrierSubsidised) barrier_rec = &rec;
        if (!barrier_rec)
            throw config::config_error(
                "expected-time: b_grid needs a barrier scheme in the config");
        std::vector<double> rates =
            cfg.r_list.empty() ? std::vector<double>{cfg.model.r} : cfg.r_list;
        std::vector<ColumnSpec> cols;
        for (double r : rates) {
            model::ModelParams p = cfg.model;
            p.r = r;
            const config::SchemeRecipe rec = *barrier_rec;
            const double x = cfg.expected_time_x;
            cols.push_back({"r=" + detail::short_num(r), [p, rec, x](double b) {
                                config::SchemeRecipe at_b = rec;
                                at_b.barrier = b;
                                const model::SchemeSpec s = at_b.materialize(p);
                                return CellValue{detail::barrier_expected_time(p, s, x),
                                                 ""};
                            }});
        }
        SweepTable t = optimize::sweep(cfg.b_grid, cols);
        detail::emit(ctx, "expected-time", "expected_trapping_times.csv", t);
        return 0;
    }

    std::vector<double> rates =
        cfg.r_list.empty() ? std::vector<double>{cfg.model.r} : cfg.r_list;
    std::vector<ColumnSpec> cols;
    for (double r : rates) {
        bool nudged = false;
        model::ModelParams p = cfg.model;
        p.r = detail::nudge_rate(p.lambda, r, pol.integer_guard, &nudged);
        if (nudged)
            std::cerr << "expected-time: lambda/r integer at r=" << r
                      << "; using r=" << csv::format_number(p.r) << "\n";
        cols.push_back({"r=" + detail::short_num(r), [p](double x) {
                            return CellValue{
                                analytics::expected_trapping_time(
                                    {p, model::SchemeSpec::uninsured(p), x, 0.0, {}}),
                                ""};
                        }});
    }
    const SweepTable t = optimize::sweep(cfg.x_grid(), cols);
    detail::emit(ctx, "expected-time", "expected_trapping_times.csv", t);
    return 0;
}

/// Optimal subsidised loading theta*(x) or optimal barrier B*(x); the
/// barrier variant reports B* - x, matching the reference figure.
inline int cmd_optimize(const Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const model::ModelParams p = cfg.model;

    if (cfg.target == OptimizeTarget::Theta) {
        const config::SchemeRecipe* rec = nullptr;
        for (const auto& r : cfg.scheme_recipes)
            if (r.kind == model::SchemeKind::Insured ||
                r.kind == model::SchemeKind::SubsidisedInsured)
                rec = &r;
        if (!rec)
            throw config::config_error(
                "optimize: theta target needs an insured or subsidised scheme");
        const double kappa = rec->kappa, theta = rec->theta;
        std::vector<ColumnSpec> cols;
        cols.push_back({"theta_star", [p, kappa, theta, &cfg](double x) {
                            const auto res =
                                optimize::optimal_theta(p, kappa, theta, x, cfg.root);
                            return CellValue{res.value,
                                             optimize::to_string(res.verdict)};
                        }});
        const SweepTable t = optimize::sweep(cfg.x_grid(), cols);
        detail::emit(ctx, "optimize", "optimal_theta.csv", t, /*verdict_layout=*/true);
        return 0;
    }

    const config::SchemeRecipe* rec = nullptr;
    for (const auto& r : cfg.scheme_recipes)
        if (r.kind == model::SchemeKind::BarrierSubsidised) rec = &r;
    if (!rec)
        throw config::config_error("optimize: barrier target needs a barrier scheme");
    const double alpha_k = p.alpha / rec->kappa;
    const double b_max = cfg.b_max.value_or(rec->x_star_ins + 60.0 / alpha_k);
    const config::SchemeRecipe r_copy = *rec;
    std::vector<ColumnSpec> cols;
    cols.push_back({"barrier_minus_x", [p, r_copy, b_max, &cfg](double x) {
                        const auto res = optimize::optimal_barrier(
                            p, r_copy.kappa, r_copy.theta, r_copy.r_ins,
                            r_copy.x_star_ins, x, b_max, cfg.root);
                        return CellValue{res.value - x, optimize::to_string(res.verdict)};
                    }});
    const SweepTable t = optimize::sweep(cfg.x_grid(), cols);
    detail::emit(ctx, "optimize", "optimal_barrier.csv", t, /*verdict_layout=*/true);
    return 0;
}

/// Cost of social protection, one column per scheme.
inline int cmd_cost(const Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    if (cfg.scheme_recipes.empty())
        throw config::config_error("cost: config declares no schemes");
    std::vector<ColumnSpec> cols;
    for (const auto& s : cfg.schemes()) {
        const model::ModelParams p = cfg.model;
        const welfare::WelfareParams w = cfg.welfare;
        cols.push_back({s.label + "_cost", [p, s, w](double x) {
                            return CellValue{
                                welfare::cost_of_social_protection(p, s, x, w), ""};
                        }});
    }
    const SweepTable t = optimize::sweep(cfg.x_grid(), cols);
    detail::emit(ctx, "cost", "cost_of_social_protection.csv", t);
    return 0;
}

/// Monte-Carlo-vs-closed-form validation report. Exit code 0 iff every cell
/// has |z| <= 4 and the quick invariant suite holds.
inline int cmd_validate(const Context& ctx, std::ostream& out = std::cout) {
    const RunConfig& cfg = ctx.cfg;
    if (cfg.scheme_recipes.empty())
        throw config::config_error("validate: config declares no schemes");
    const model::ModelParams p = cfg.model;
    const auto schemes = cfg.schemes();
    const auto grid = cfg.x_grid();

    // five probe points strictly inside the grid
    std::vector<double> probes;
    for (int i = 1; i <= 5; ++i) probes.push_back(grid[i * (grid.size() - 1) / 6]);

    double delta_probe = 1.0 / 32.0;
    for (double d : cfg.laplace_deltas)
        if (d > 0.0) {
            delta_probe = d;
            break;
        }

    std::string report = "scheme,x,quantity,closed_form,mc_mean,mc_std_err,z,pass\n";
    bool all_pass = true;
    // unit_scale is the per-path value range; one path switching outcome
    // moves the mean by about unit_scale/n. Deep in the tail the sample
    // variance is estimated from a handful of events and the z statistic is
    // unreliable, so differences below a few paths' worth of resolution pass
    // regardless of z. Genuine formula errors sit orders of magnitude above
    // this floor.
    auto add_cell = [&](const model::SchemeSpec& s, double x, const std::string& what,
                        double closed, const model::MCEstimate& est,
                        double unit_scale) {
        double z = 0.0;
        const double resolution =
            unit_scale / static_cast<double>(std::max<std::size_t>(est.n_paths, 1));
        bool pass;
        if (est.std_err > 0.0) {
            z = est.z_score(closed);
            pass = std::abs(z) <= 4.0 || std::abs(est.mean - closed) <= 4.0 * resolution;
        } else {
            pass = std::abs(est.mean - closed) <= 4.0 * resolution;
        }
        all_pass = all_pass && pass;
        report += s.label + "," + csv::format_number(x) + "," + what + "," +
                  csv::format_number(closed) + "," + csv::format_number(est.mean) +
                  "," + csv::format_number(est.std_err) + "," + csv::format_number(z) +
                  "," + (pass ? "1" : "0") + "\n";
        out << (pass ? "  ok  " : "  FAIL") << "  " << s.label << " x=" << x << " "
            << what << " closed=" << closed << " mc=" << est.mean << " z=" << z
            << "\n";
    };

    for (const auto& s : schemes) {
        for (double x : probes) {
            if (x < s.critical_capital()) continue;
            const auto psi_est = model::estimate_trapping_probability(p, s, x, cfg.sim);
            add_cell(s, x, "psi", detail::closed_psi(p, s, x), psi_est, 1.0);
            if (s.kappa > 0.0) {
                const auto lap_est =
                    model::estimate_laplace(p, s, x, delta_probe, cfg.sim);
                add_cell(s, x, "laplace",
                         detail::closed_laplace(p, s, x, delta_probe), lap_est, 1.0);
            }
            if (s.kind == model::SchemeKind::SubsidisedInsured) {
                const double rate = welfare::subsidy_rate(p, s, cfg.welfare);
                if (rate > 0.0) {
                    const auto v_est = model::estimate_subsidy_value(
                        p, s, x, cfg.welfare.delta, rate, cfg.sim);
                    add_cell(s, x, "subsidy_value",
                             welfare::subsidy_value_constant(p, s, x, cfg.welfare),
                             v_est, rate / cfg.welfare.delta);
                }
            }
            if (s.kind == model::SchemeKind::BarrierSubsidised) {
                const auto v_est = model::estimate_subsidy_value(
                    p, s, x, cfg.welfare.delta, s.premium(p), cfg.sim);
                add_cell(s, x, "subsidy_value",
                         welfare::subsidy_value_barrier(p, s, x, cfg.welfare), v_est,
                         s.premium(p) / cfg.welfare.delta);
            }
        }
    }

    // quick invariant suite on the closed forms
    auto invariant = [&](const std::string& name, bool ok) {
        all_pass = all_pass && ok;
        out << (ok ? "  ok  " : "  FAIL") << "  invariant: " << name << "\n";
        report += "invariant,," + name + ",,,,," + (ok ? "1" : "0") + "\n";
    };
    for (const auto& s : schemes) {
        const double xc = s.critical_capital();
        invariant(s.label + ": psi(critical) = 1",
                  detail::closed_psi(p, s, xc) == 1.0);
        invariant(s.label + ": m_delta(critical) boundary",
                  std::abs(detail::closed_laplace(p, s, xc, delta_probe) -
                           p.lambda / (p.lambda + delta_probe)) < 1e-10 ||
                      s.kappa == 0.0);
        bool monotone = true;
        double prev = 2.0;
        for (double x : grid) {
            const double v = detail::closed_psi(p, s, x);
            monotone = monotone && v <= prev + 1e-12;
            prev = v;
        }
        invariant(s.label + ": psi non-increasing in x", monotone);
    }
    {
        bool monotone = true;
        const double x_mid = grid[grid.size() / 2];
        std::vector<double> ds = cfg.laplace_deltas;
        std::sort(ds.begin(), ds.end());
        double prev = 2.0;
        for (double d : ds) {
            const double v = detail::closed_laplace(p, schemes.front(), x_mid, d);
            monotone = monotone && v <= prev + 1e-12;
            prev = v;
        }
        invariant("m_delta decreasing in delta", monotone);
    }

    std::filesystem::create_directories(ctx.out_dir);
    csv::write_file((ctx.out_dir / "validation_report.csv").string(), report);
    out << (all_pass ? "VALIDATION PASSED" : "VALIDATION FAILED") << "\n";
    return all_pass ? 0 : 1;
}

}  // namespace captrap::commands

// captrap: poverty-trapping probabilities, trapping-time transforms and
// government social-protection costs for households under microinsurance
// schemes, with Monte Carlo validation of every closed form.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "captrap/commands.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::string> x_grid;  // "min:max:points"
    bool plots = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("-c,--config", o.config_path, "run configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("-o,--out", o.out_dir, "output directory (default: out)");
    cmd->add_option("--seed", o.seed, "override the simulation seed");
    cmd->add_option("--paths", o.paths, "override the Monte Carlo path count");
    cmd->add_option("--x-grid", o.x_grid, "override the grid as min:max:points");
    cmd->add_flag("--plots", o.plots, "also render SVG line charts");
}

captrap::commands::Context make_context(const CommonOpts& o) {
    captrap::commands::Context ctx;
    ctx.cfg = captrap::config::load_config(o.config_path);
    ctx.out_dir = o.out_dir;
    ctx.emit_plots = o.plots;
    if (o.seed) ctx.cfg.sim.seed = *o.seed;
    if (o.paths) ctx.cfg.sim.n_paths = *o.paths;
    if (o.x_grid) {
        double lo = 0.0, hi = 0.0;
        int points = 0;
        char c1 = 0, c2 = 0;
        std::istringstream in(*o.x_grid);
        if (!(in >> lo >> c1 >> hi >> c2 >> points) || c1 != ':' || c2 != ':')
            throw captrap::config::config_error("--x-grid expects min:max:points");
        ctx.cfg.grid.x_min = lo;
        ctx.cfg.grid.x_max = hi;
        ctx.cfg.grid.points = points;
    }
    return ctx;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "captrap: trapping probabilities, trapping-time transforms and social\n"
        "protection costs under microinsurance schemes, Monte Carlo validated"};
    app.require_subcommand(1);
    app.footer(
        "Configuration file keys (one [section] per block):\n"
        "  [model]    r, lambda, alpha, x_star; alpha_list (extra psi columns)\n"
        "  [grid]     x_min, x_max, points (defaults: largest critical capital,\n"
        "             +9, 181)\n"
        "  [welfare]  delta, m_cost, subsidy_rate_mode = loading_gap | premium_scaled\n"
        "  [sim]      paths, t_max, seed, threads, escape_level\n"
        "  [laplace]  deltas = list of forces of interest (0 allowed)\n"
        "  [expected_time]  r_list; b_grid + x for the barrier-grid variant\n"
        "  [optimize] target = theta | barrier, b_max, abs_tol\n"
        "  [scheme <label>]  type = uninsured | insured | subsidised | barrier;\n"
        "             kappa, theta, theta_star, barrier; mapping = drift |\n"
        "             explicit with r_ins, x_star_ins (barrier schemes always\n"
        "             take explicit r_ins and x_star_ins)\n"
        "\n"
        "Exit codes: 0 success, 1 computation/validation failure, 2 usage error.\n"
        "Outputs: CSV per command plus errors.log (one line per failed cell);\n"
        "--plots adds an SVG line chart next to each CSV.");

    CommonOpts opts;
    std::string target_override;

    auto* trap = app.add_subcommand(
        "trap-prob", "trapping probabilities per scheme (and per alpha)");
    add_common(trap, opts);
    auto* lap = app.add_subcommand(
        "laplace", "Laplace transforms of the trapping time per (scheme, delta)");
    add_common(lap, opts);
    auto* etime = app.add_subcommand(
        "expected-time", "expected trapping times over the x-grid or a barrier grid");
    add_common(etime, opts);
    auto* opt = app.add_subcommand(
        "optimize", "optimal subsidised loading theta*(x) or optimal barrier B*(x)");
    add_common(opt, opts);
    opt->add_option("--target", target_override, "theta or barrier");
    auto* cost = app.add_subcommand(
        "cost", "cost of social protection V(x) + M psi(x) per scheme");
    add_common(cost, opts);
    auto* val = app.add_subcommand(
        "validate", "Monte-Carlo-vs-closed-form report; exit 0 iff all |z| <= 4");
    add_common(val, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage errors are exit code 2
    }

    try {
        captrap::commands::Context ctx = make_context(opts);
        if (!target_override.empty()) {
            if (target_override == "theta")
                ctx.cfg.target = captrap::config::OptimizeTarget::Theta;
            else if (target_override == "barrier")
                ctx.cfg.target = captrap::config::OptimizeTarget::Barrier;
            else
                throw captrap::config::config_error("--target expects theta or barrier");
        }
        if (trap->parsed()) return captrap::commands::cmd_trap_prob(ctx);
        if (lap->parsed()) return captrap::commands::cmd_laplace(ctx);
        if (etime->parsed()) return captrap::commands::cmd_expected_time(ctx);
        if (opt->parsed()) return captrap::commands::cmd_optimize(ctx);
        if (cost->parsed()) return captrap::commands::cmd_cost(ctx);
        if (val->parsed()) return captrap::commands::cmd_validate(ctx);
        return 2;
    } catch (const captrap::config::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

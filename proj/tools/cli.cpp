#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gtab/dp_solver.hpp"
#include "gtab/errors.hpp"
#include "gtab/io.hpp"
#include "gtab/pde_limit.hpp"
#include "gtab/prior_search.hpp"
#include "gtab/simulate.hpp"
#include "gtab/strategy_eval.hpp"

namespace gtab::cli {

namespace {

using nlohmann::json;
using io::round6;

/// Options of one subcommand that may also come from the JSON config.
class Binder {
public:
    explicit Binder(CLI::App* app) : app_(app) {}

    template <class T>
    CLI::Option* add(const std::string& name, T& var, const std::string& desc) {
        auto* opt = app_->add_option("--" + name, var, desc)->capture_default_str();
        entries_.push_back({name, opt, [&var](const json& j) { var = j.get<T>(); }});
        return opt;
    }

    CLI::Option* flag(const std::string& name, bool& var, const std::string& desc) {
        auto* opt = app_->add_flag("--" + name, var, desc);
        entries_.push_back({name, opt, [&var](const json& j) { var = j.get<bool>(); }});
        return opt;
    }

    /// Fills options absent from the command line; flags win over config.
    void merge(const json& section) {
        for (auto& e : entries_) {
            if (e.opt->count() > 0) {
                e.given = true;
                continue;
            }
            if (!section.contains(e.name)) continue;
            try {
                e.assign(section.at(e.name));
            } catch (const json::exception& ex) {
                throw ConfigError("config key '" + e.name + "': " + ex.what());
            }
            e.given = true;
        }
    }

    bool given(const std::string& name) const {
        for (const auto& e : entries_) {
            if (e.name == name) return e.given || e.opt->count() > 0;
        }
        return false;
    }

    CLI::App* app() const { return app_; }

private:
    struct Entry {
        std::string name;
        CLI::Option* opt;
        std::function<void(const json&)> assign;
        bool given = false;
    };

    CLI::App* app_;
    std::vector<Entry> entries_;
};

json load_config(const std::string& path, const std::string& command) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config " + path + ": expected a JSON object");
    if (j.contains(command) && j.at(command).is_object()) return j.at(command);
    return j;
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
    } else {
        io::write_file_atomic(path, content);
    }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

SymmetricPrior choose_prior(double d, const std::string& prior_file) {
    if (!prior_file.empty()) return io::load_prior(prior_file);
    if (!(d > 0.0)) throw ConfigError("d must be positive");
    return SymmetricPrior::two_point(d);
}

std::vector<double> d_range(double lo, double hi, double step) {
    if (!(lo > 0.0) || !(hi >= lo)) throw ConfigError("d range: need 0 < d-min <= d-max");
    if (hi > lo && !(step > 0.0)) throw ConfigError("d range: step must be positive");
    std::vector<double> out;
    const long count = hi > lo ? static_cast<long>(std::floor((hi - lo) / step + 1e-3)) + 1 : 1;
    for (long i = 0; i < count; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

// ---------------------------------------------------------------------------

struct SolveArgs {
    double epsilon = 0.02;
    double d = 1.6;
    std::string prior_file;
    double u_max = 4.0;
    double du = 0.01;
    std::string out;
    std::string strategy_out;
};

int cmd_solve(const SolveArgs& a, const Binder&, std::ostream& out) {
    const SymmetricPrior prior = choose_prior(a.d, a.prior_file);
    const DpConfig cfg{a.epsilon, prior, UGrid(a.u_max, a.du)};
    const Lattice lattice = cfg.validate();
    const SolveOutput s = solve_invariant(cfg, {false});
    json j{{"epsilon", round6(a.epsilon)},
           {"d", a.prior_file.empty() ? json(round6(a.d)) : json(nullptr)},
           {"prior", io::prior_to_json(prior)},
           {"bayes_risk", round6(s.bayes_risk)},
           {"bayes_risk_no_initial", round6(s.bayes_risk_no_initial)},
           {"initial_stage_cost", round6(initial_stage_cost(prior, lattice.epsilon()))}};
    if (!a.strategy_out.empty()) {
        io::save_strategy(a.strategy_out, s.strategy, prior);
        j["strategy_file"] = a.strategy_out;
    }
    emit(a.out, dump(j), out);
    return 0;
}

// ---------------------------------------------------------------------------

struct FigureArgs {
    double epsilon = 0.02;
    double d_min = 0.2;
    double d_max = 20.0;
    double step = 0.2;
    double search_min = 0.5;
    double search_max = 2.5;
    double search_step = 0.1;
    double d_star = 0.0;
    bool per_d = false;
    double u_max = 4.0;
    double du = 0.01;
    std::string out;
};

int cmd_figure1(const FigureArgs& a, const Binder& b, std::ostream& out) {
    const UGrid grid(a.u_max, a.du);
    DpConfig{a.epsilon, SymmetricPrior::two_point(1.0), grid}.validate();
    const auto ds = d_range(a.d_min, a.d_max, a.step);

    std::optional<EvalStrategy> frozen;
    if (!a.per_d) {
        double d_star = a.d_star;
        if (!b.given("d-star")) {
            const CachedRisk risk(make_backend({Backend::Dp, a.epsilon, grid}));
            const auto curve = scan(a.search_min, a.search_max, a.search_step, risk);
            d_star = refine(curve, std::cref(risk), 0.01).d_star;
        } else if (!(d_star > 0.0)) {
            throw ConfigError("d-star must be positive");
        }
        const auto s = solve_invariant(DpConfig{a.epsilon, SymmetricPrior::two_point(d_star), grid},
                                       {false});
        frozen = EvalStrategy::from_table(s.strategy);
    }
    const auto rows = risk_curve(frozen, ds, a.epsilon, grid);

    std::ostringstream csv;
    csv << "d,bayes_risk,expected_loss,bayes_risk_no_init,expected_loss_no_init\n";
    for (const auto& r : rows) {
        csv << io::format6(r.d) << ',' << io::format6(r.bayes_risk) << ','
            << io::format6(r.expected_loss) << ',' << io::format6(r.bayes_risk_no_init) << ','
            << io::format6(r.expected_loss_no_init) << '\n';
    }
    emit(a.out, csv.str(), out);
    return 0;
}

// ---------------------------------------------------------------------------

struct PdeArgs {
    double epsilon = 0.001;
    double du = 0.032;
    double u_max = 2.3;
    double d = 1.57;
    std::string prior_file;
    std::string out;
};

int cmd_pde(const PdeArgs& a, const Binder&, std::ostream& out) {
    const PdeConfig cfg{a.epsilon, a.du, a.u_max, choose_prior(a.d, a.prior_file)};
    cfg.validate();
    const PdeOutput r = pde_solve(cfg);
    json j{{"epsilon", round6(a.epsilon)},
           {"du", round6(a.du)},
           {"u_max", round6(cfg.grid().u_max())},
           {"d", a.prior_file.empty() ? json(round6(a.d)) : json(nullptr)},
           {"prior", io::prior_to_json(cfg.prior)},
           {"limit_risk", round6(r.limit_risk)},
           {"limit_risk_no_initial", round6(r.limit_risk_no_initial)}};
    emit(a.out, dump(j), out);
    return 0;
}

// ---------------------------------------------------------------------------

struct SearchArgs {
    std::string backend = "dp";
    double epsilon = 0.0;
    double d_min = 0.5;
    double d_max = 2.5;
    double step = 0.1;
    double tolerance = 0.01;
    double u_max = 0.0;
    double du = 0.0;
    std::string out;
    std::string curve_out;
    bool saddle = false;
    double saddle_cutoff = 16.0;
    double saddle_d_max = 20.0;
    double saddle_step = 0.5;
    double saddle_tolerance = 0.01;
    bool multi_atom = false;
    int atoms = 2;
};

int cmd_search(const SearchArgs& a, const Binder& b, std::ostream& out) {
    const Backend kind = parse_backend(a.backend);
    BackendConfig bc;
    bc.kind = kind;
    bc.epsilon = b.given("epsilon") ? a.epsilon : (kind == Backend::Dp ? 0.02 : 0.001);
    const double u_max = b.given("u-max") ? a.u_max : (kind == Backend::Dp ? 4.0 : 2.3);
    const double du = b.given("du") ? a.du : (kind == Backend::Dp ? 0.01 : 0.032);
    if (kind == Backend::Dp) {
        bc.grid = UGrid(u_max, du);
    } else {
        bc.pde_du = du;
        bc.pde_u_max = u_max;
    }
    if (!(a.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    if (a.multi_atom && a.atoms < 1) throw ConfigError("atoms must be at least 1");
    if (a.saddle && kind != Backend::Dp) throw ConfigError("saddle check requires the dp backend");
    const PriorRisk backend = make_backend(bc);
    const CachedRisk risk(backend);
    d_range(a.d_min, a.d_max, a.step);

    const auto curve = scan(a.d_min, a.d_max, a.step, risk);
    const Refined best = refine(curve, std::cref(risk), a.tolerance);

    json jcurve = json::array();
    std::ostringstream csv;
    csv << "d,risk\n";
    for (const auto& p : curve) {
        jcurve.push_back({{"d", round6(p.d)}, {"risk", round6(p.risk)}});
        csv << io::format6(p.d) << ',' << io::format6(p.risk) << '\n';
    }
    json j{{"backend", to_string(kind)},
           {"epsilon", round6(bc.epsilon)},
           {"grid", {{"u_max", round6(u_max)}, {"du", round6(du)}}},
           {"curve", jcurve},
           {"d_star", round6(best.d_star)},
           {"risk_star", round6(best.risk_star)},
           {"on_boundary", best.on_boundary},
           {"evaluations", risk.evaluations()}};

    if (a.saddle) {
        auto ds = d_range(a.d_min, a.saddle_d_max, a.saddle_step);
        const SaddleReport rep =
            saddle_check(best.d_star, bc.epsilon, bc.grid, ds, a.saddle_cutoff, a.saddle_tolerance);
        json entries = json::array();
        for (const auto& e : rep.entries) {
            entries.push_back({{"d", round6(e.d)},
                               {"expected_loss", round6(e.expected_loss)},
                               {"expected_loss_no_init", round6(e.expected_loss_no_init)},
                               {"exceeds", e.exceeds},
                               {"initial_stage_attributed", e.initial_stage_attributed}});
        }
        j["saddle"] = {{"risk_star", round6(rep.risk_star)},
                       {"loss_at_d_star", round6(rep.loss_at_d_star)},
                       {"max_loss_within_cutoff", round6(rep.max_loss_within_cutoff)},
                       {"cutoff", round6(rep.cutoff)},
                       {"tolerance", round6(rep.tolerance)},
                       {"equality_holds", rep.equality_holds},
                       {"inequality_holds", rep.inequality_holds},
                       {"entries", entries}};
    }

    if (a.multi_atom) {
        std::vector<PriorAtom> start;
        for (int i = 0; i < a.atoms; ++i) {
            start.push_back({best.d_star * (1.0 + 0.25 * i), 1.0 / a.atoms});
        }
        const auto res = search_multi_atom(SymmetricPrior(start), backend, 0.2, 0.01, 40);
        json atoms = json::array();
        for (const auto& at : res.atoms) {
            atoms.push_back({{"w", round6(at.w)}, {"weight", round6(at.weight)}});
        }
        j["multi_atom"] = {{"atoms", atoms}, {"risk", round6(res.risk)}, {"sweeps", res.sweeps}};
    }

    if (!a.curve_out.empty()) io::write_file_atomic(a.curve_out, csv.str());
    emit(a.out, dump(j), out);
    return 0;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    long t = 5000;
    long m = 100;
    double p = 0.5;
    double d = 1.6;
    std::string strategy;
    double strategy_d = 1.6;
    double u_max = 4.0;
    double du = 0.01;
    long reps = 100000;
    std::uint64_t seed = 7;
    std::string model = "bernoulli";
    bool fixed_orientation = false;
    bool per_item = false;
    std::string out;
};

int cmd_simulate(const SimulateArgs& a, const Binder&, std::ostream& out) {
    if (a.model != "bernoulli" && a.model != "gaussian") {
        throw ConfigError("model must be bernoulli or gaussian");
    }
    BatchTrialConfig cfg;
    cfg.T = a.t;
    cfg.M = a.m;
    cfg.p = a.p;
    cfg.d = a.d;
    cfg.replications = a.reps;
    cfg.seed = a.seed;
    cfg.orientation = a.fixed_orientation ? Orientation::ArmOneBetter : Orientation::Random;
    cfg.per_item = a.per_item;
    cfg.validate();

    std::optional<StrategyTable> table;
    if (!a.strategy.empty()) {
        table = io::load_strategy(a.strategy);
    } else {
        const double eps = 1.0 / static_cast<double>(cfg.packets());
        table = solve_invariant(
                    DpConfig{eps, SymmetricPrior::two_point(a.strategy_d), UGrid(a.u_max, a.du)},
                    {false})
                    .strategy;
    }

    TrialResult r;
    if (a.model == "bernoulli") {
        r = simulate_bernoulli(cfg, *table);
    } else {
        GaussianTrialConfig g{cfg.packets(), cfg.d, cfg.replications, cfg.seed, cfg.orientation,
                              false};
        r = simulate_gaussian(g, *table);
    }
    json j{{"model", a.model},
           {"T", cfg.T},
           {"M", cfg.M},
           {"p", round6(cfg.p)},
           {"d", round6(cfg.d)},
           {"replications", r.replications},
           {"seed", cfg.seed},
           {"orientation", a.fixed_orientation ? "arm1-better" : "random"},
           {"mean", round6(r.normalized_loss_mean)},
           {"standard_error", round6(r.standard_error)}};
    emit(a.out, dump(j), out);
    return 0;
}

// ---------------------------------------------------------------------------

struct ExportArgs {
    double epsilon = 0.02;
    double d = 1.6;
    std::string prior_file;
    double u_max = 4.0;
    double du = 0.01;
    std::string out;
};

int cmd_export(const ExportArgs& a, const Binder&, std::ostream& out) {
    if (a.out.empty()) throw ConfigError("export-strategy requires --out");
    const SymmetricPrior prior = choose_prior(a.d, a.prior_file);
    const DpConfig cfg{a.epsilon, prior, UGrid(a.u_max, a.du)};
    cfg.validate();
    const SolveOutput s = solve_invariant(cfg, {false});
    io::save_strategy(a.out, s.strategy, prior);
    out << dump({{"strategy_file", a.out},
                 {"metadata_file", io::metadata_path(a.out).string()},
                 {"bayes_risk", round6(s.bayes_risk)}});
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Minimax and Bayesian strategies for the batched Gaussian two-armed bandit",
                 "gtab"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "JSON config; command-line flags override it");

    SolveArgs solve;
    auto* solve_cmd = app.add_subcommand("solve", "Bayes risk and strategy for one prior");
    Binder solve_b(solve_cmd);
    solve_b.add("epsilon", solve.epsilon, "packet fraction M/N (1/eps integer)");
    auto* solve_d = solve_b.add("d", solve.d, "two-point prior location");
    solve_b.add("prior-file", solve.prior_file, "JSON prior")->excludes(solve_d);
    solve_b.add("u-max", solve.u_max, "u-grid half-width");
    solve_b.add("du", solve.du, "u-grid spacing");
    solve_b.add("out", solve.out, "summary JSON path (stdout if omitted)");
    solve_b.add("strategy-out", solve.strategy_out, "also write the strategy table CSV");

    FigureArgs fig;
    auto* fig_cmd = app.add_subcommand("figure1", "risk and expected-loss curves over d (CSV)");
    Binder fig_b(fig_cmd);
    fig_b.add("epsilon", fig.epsilon, "packet fraction M/N");
    fig_b.add("d-min", fig.d_min, "first d");
    fig_b.add("d-max", fig.d_max, "last d");
    fig_b.add("step", fig.step, "d spacing");
    fig_b.add("search-min", fig.search_min, "worst-case search range start");
    fig_b.add("search-max", fig.search_max, "worst-case search range end");
    fig_b.add("search-step", fig.search_step, "worst-case search spacing");
    fig_b.add("d-star", fig.d_star, "freeze the strategy at this d instead of searching");
    fig_b.flag("per-d", fig.per_d, "use the per-d Bayes strategy for the loss columns");
    fig_b.add("u-max", fig.u_max, "u-grid half-width");
    fig_b.add("du", fig.du, "u-grid spacing");
    fig_b.add("out", fig.out, "CSV path (stdout if omitted)");

    PdeArgs pde;
    auto* pde_cmd = app.add_subcommand("pde", "small-eps limit risk by finite differences");
    Binder pde_b(pde_cmd);
    pde_b.add("epsilon", pde.epsilon, "time step");
    pde_b.add("du", pde.du, "u spacing (needs du^2 >= eps)");
    pde_b.add("u-max", pde.u_max, "u-domain half-width");
    auto* pde_d = pde_b.add("d", pde.d, "two-point prior location");
    pde_b.add("prior-file", pde.prior_file, "JSON prior")->excludes(pde_d);
    pde_b.add("out", pde.out, "summary JSON path (stdout if omitted)");

    SearchArgs search;
    auto* search_cmd = app.add_subcommand("search", "worst-case two-point prior");
    Binder search_b(search_cmd);
    search_b.add("backend", search.backend, "dp or pde")->check(CLI::IsMember({"dp", "pde"}));
    search_b.add("epsilon", search.epsilon, "eps (default 0.02 dp, 0.001 pde)");
    search_b.add("d-min", search.d_min, "scan start");
    search_b.add("d-max", search.d_max, "scan end");
    search_b.add("step", search.step, "scan spacing");
    search_b.add("tolerance", search.tolerance, "golden-section tolerance on d");
    search_b.add("u-max", search.u_max, "u half-width (default 4 dp, 2.3 pde)");
    search_b.add("du", search.du, "u spacing (default 0.01 dp, 0.032 pde)");
    search_b.add("out", search.out, "summary JSON path (stdout if omitted)");
    search_b.add("curve-out", search.curve_out, "also write the scan as CSV d,risk");
    search_b.flag("saddle", search.saddle, "check the saddle-point property (dp only)");
    search_b.add("saddle-cutoff", search.saddle_cutoff, "largest d the inequality must hold for");
    search_b.add("saddle-d-max", search.saddle_d_max, "largest d evaluated by the check");
    search_b.add("saddle-step", search.saddle_step, "d spacing of the check");
    search_b.add("saddle-tolerance", search.saddle_tolerance, "tolerance of the check");
    search_b.flag("multi-atom", search.multi_atom, "experimental multi-atom coordinate ascent");
    search_b.add("atoms", search.atoms, "atom count for --multi-atom");

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo batch processing");
    Binder sim_b(sim_cmd);
    sim_b.add("t", sim.t, "total items T");
    sim_b.add("m", sim.m, "items per packet M");
    sim_b.add("p", sim.p, "baseline success probability");
    sim_b.add("d", sim.d, "normalized separation");
    sim_b.add("strategy", sim.strategy, "strategy CSV from export-strategy");
    sim_b.add("strategy-d", sim.strategy_d, "solve the strategy at this d if no file is given");
    sim_b.add("u-max", sim.u_max, "u half-width for an in-process strategy");
    sim_b.add("du", sim.du, "u spacing for an in-process strategy");
    sim_b.add("reps", sim.reps, "replications");
    sim_b.add("seed", sim.seed, "RNG seed");
    sim_b.add("model", sim.model, "bernoulli or gaussian")
        ->check(CLI::IsMember({"bernoulli", "gaussian"}));
    sim_b.flag("fixed-orientation", sim.fixed_orientation, "arm 1 always the better one");
    sim_b.flag("per-item", sim.per_item, "draw items one by one");
    sim_b.add("out", sim.out, "summary JSON path (stdout if omitted)");

    ExportArgs exp;
    auto* exp_cmd = app.add_subcommand("export-strategy", "write a strategy table CSV + metadata");
    Binder exp_b(exp_cmd);
    exp_b.add("epsilon", exp.epsilon, "packet fraction M/N");
    auto* exp_d = exp_b.add("d", exp.d, "two-point prior location");
    exp_b.add("prior-file", exp.prior_file, "JSON prior")->excludes(exp_d);
    exp_b.add("u-max", exp.u_max, "u-grid half-width");
    exp_b.add("du", exp.du, "u-grid spacing");
    exp_b.add("out", exp.out, "CSV path; metadata goes to <out>.meta.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        std::vector<std::pair<CLI::App*, Binder*>> binders{
            {solve_cmd, &solve_b}, {fig_cmd, &fig_b},    {pde_cmd, &pde_b},
            {search_cmd, &search_b}, {sim_cmd, &sim_b}, {exp_cmd, &exp_b}};
        for (auto& [cmd, binder] : binders) {
            if (!cmd->parsed()) continue;
            if (!config_path.empty()) binder->merge(load_config(config_path, cmd->get_name()));
            if (cmd == solve_cmd) return cmd_solve(solve, *binder, out);
            if (cmd == fig_cmd) return cmd_figure1(fig, *binder, out);
            if (cmd == pde_cmd) return cmd_pde(pde, *binder, out);
            if (cmd == search_cmd) return cmd_search(search, *binder, out);
            if (cmd == sim_cmd) return cmd_simulate(sim, *binder, out);
            if (cmd == exp_cmd) return cmd_export(exp, *binder, out);
        }
        err << "error: no command\n";
        return 2;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const StructureError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace gtab::cli

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "spm/coulomb_mc.hpp"
#include "spm/density.hpp"
#include "spm/errors.hpp"
#include "spm/io.hpp"
#include "spm/one_cut.hpp"
#include "spm/parallel.hpp"
#include "spm/shrink_scan.hpp"
#include "spm/symmetric.hpp"
#include "spm/two_cut.hpp"

namespace fs = std::filesystem;
using namespace spm;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

fs::path prepare_dir(const std::string& out) {
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

void write_json(const fs::path& p, const Json& j) {
    std::ofstream f(p);
    f << j.dump(2) << '\n';
}

void write_metadata(const fs::path& dir, const std::string& command) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[64];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    write_json(dir / "metadata.json", Json{{"command", command}, {"timestamp", stamp}, {"threads", thread_count()}});
}

// ---- solve -------------------------------------------------------------------

struct SolveArgs {
    double a = 0.0, A = 0.0;
    int m = 2;
    std::string out = "out";
};

int cmd_solve(const SolveArgs& s) {
    const fs::path dir = prepare_dir(s.out);
    const PotentialParams params{s.a, s.A, s.m};
    params.validate();
    std::optional<TwoCutSolution> sol;
    Json sol_json;
    if (s.A == 0.0) {
        sol_json = Json{{"a", s.a}, {"A", 0.0}, {"m", s.m}, {"kind", "semicircle"},
                        {"endpoints", {-2.0, 2.0}}, {"alpha", Json::array()}, {"residual_norm", 0.0}};
    } else {
        sol = solve_endpoints(params);
        sol_json = solution_json(*sol);
        sol_json["kind"] = "two-cut";
    }
    const DensityFn rho = sol ? two_cut_density(*sol) : semicircle_density();

    std::ofstream csv(dir / "density.csv");
    write_csv_row(csv, {"lambda", "rho"});
    for (const Cut& c : rho.cuts()) {
        for (int k = 0; k < 1000; ++k) {
            const double x = c.lo + (c.hi - c.lo) * k / 999.0;
            write_csv_row(csv, {format_number(x), format_number(rho(x))});
        }
    }
    const ConstraintReport rep = constraint_report(rho, s.a);
    write_json(dir / "solution.json", sol_json);
    write_json(dir / "constraints.json", constraint_json(rep));

    Json summary{{"solution", sol_json}, {"constraints", constraint_json(rep)}};
    if (sol && s.a == 0.0 && s.m == 2) {
        const SymmetricSolution sym = solve_symmetric(s.A);
        const auto x = sol->support.endpoints();
        const std::array<double, 4> y{-sym.x4, -sym.x3, sym.x3, sym.x4};
        double dx = 0.0, drho = 0.0;
        for (int k = 0; k < 4; ++k) dx = std::max(dx, std::abs(x[k] - y[k]));
        for (const Cut& c : rho.cuts()) {
            for (int k = 1; k < 50; ++k) {
                const double p = c.lo + (c.hi - c.lo) * k / 50.0;
                drho = std::max(drho, std::abs(rho(p) - density_symmetric(sym, p)));
            }
        }
        Json check{{"symmetric", symmetric_json(sym)}, {"max_endpoint_difference", dx},
                   {"max_density_difference", drho}};
        write_json(dir / "symmetric_check.json", check);
        summary["symmetric_check"] = check;
    }
    std::cout << summary.dump(2) << '\n';
    return 0;
}

// ---- mc ----------------------------------------------------------------------

struct McArgs {
    std::string config;
    std::optional<double> a, A, eps, kappa0;
    std::optional<int> m, N, cycles;
    std::optional<std::uint64_t> seed;
    std::optional<long> sweeps, burn_in, tterm;
    std::string out = "out";
    std::string start = "scan";
    int chains = 1;
    int bins = 80;
    bool snapshots = false;
};

MCConfig resolve_mc_config(const McArgs& args) {
    KeyValues kv = args.config.empty() ? KeyValues{} : read_key_values(args.config);
    auto set = [&kv](const char* key, const auto& v) {
        if (!v) return;
        if constexpr (std::is_floating_point_v<std::decay_t<decltype(*v)>>) {
            kv[key] = format_number(*v);
        } else {
            kv[key] = std::to_string(*v);
        }
    };
    set("a", args.a);
    set("A", args.A);
    set("m", args.m);
    set("N", args.N);
    set("seed", args.seed);
    set("sweeps", args.sweeps);
    set("burn_in", args.burn_in);
    set("eps", args.eps);
    set("anneal_tterm", args.tterm);
    set("anneal_kappa0", args.kappa0);
    set("anneal_cycles", args.cycles);
    return mc_config_from(kv);
}

int cmd_mc(const McArgs& args) {
    const MCConfig config = resolve_mc_config(args);
    if (args.chains < 1) throw ConfigError("chains must be at least 1");
    if (args.start != "scan" && args.start != "anneal" && args.start != "analytic") {
        throw ConfigError("start must be scan, anneal or analytic");
    }
    const fs::path dir = prepare_dir(args.out);
    {
        std::ofstream f(dir / "run_config.txt");
        write_key_values(f, to_key_values(config));
    }
    write_metadata(dir, "mc");

    const double a = config.params.a;
    std::optional<TwoCutSolution> sol;
    if (config.params.A != 0.0) sol = solve_endpoints(config.params);
    const DensityFn rho = sol ? two_cut_density(*sol) : semicircle_density();

    // Common start for every chain unless annealing.
    std::optional<EnsembleState> shared;
    Json start_info{{"start", args.start}};
    if (args.start == "scan") {
        const ConditionalScan scan = conditional_energy_scan(config, rho);
        shared = scan.relaxed[scan.n_left_star];
        start_info["n_left_star"] = scan.n_left_star;
    } else if (args.start == "analytic") {
        const double left = interval_mass(rho, std::min(rho.cuts().front().lo, a), a);
        const int nl = static_cast<int>(std::lround(left * config.N));
        auto x = seeded_configuration(rho, a, config.N, nl);
        if (!x) throw Infeasible("analytic filling cannot be seeded with zero sum");
        shared = make_state(std::move(*x), config);
        start_info["n_left_start"] = nl;
    }

    const Histogram empty = histogram_for(rho, args.bins);
    std::vector<std::optional<RunResult>> results(args.chains);
    std::vector<std::string> failures(args.chains);
    std::ofstream snap;
    if (args.snapshots) {
        snap.open(dir / "snapshots.csv");
        snap << "# ";
        for (const auto& [k, v] : to_key_values(config)) snap << k << '=' << v << ' ';
        snap << '\n';
        std::vector<std::string> head{"sweep"};
        for (int i = 0; i < config.N; ++i) head.push_back("x" + std::to_string(i));
        write_csv_row(snap, head);
    }
    parallel_for(static_cast<std::size_t>(args.chains), [&](std::size_t k) {
        try {
            MCConfig c = config;
            c.seed = config.seed + k;
            EnsembleState init;
            if (shared) {
                init = *shared;
            } else {
                if (!c.anneal) c.anneal = AnnealConfig{};
                Rng rng(c.seed);
                init = anneal(c, rng).best;
            }
            SnapshotSink sink;
            if (args.snapshots && k == 0) {
                sink = [&snap](long sweep, const std::vector<double>& x) {
                    std::vector<std::string> row{std::to_string(sweep)};
                    for (double v : x) row.push_back(format_number(v));
                    write_csv_row(snap, row);
                };
            }
            results[k] = run(c, init, empty, sink);
        } catch (const std::exception& e) {
            failures[k] = error_kind(e) + ": " + e.what();
        }
    });

    Histogram merged = empty;
    Json chains = Json::array();
    int ok = 0;
    for (int k = 0; k < args.chains; ++k) {
        if (results[k]) {
            merged.merge(results[k]->histogram);
            Json d = diagnostics_json(*results[k]);
            d["seed"] = config.seed + k;
            chains.push_back(d);
            ++ok;
        } else {
            chains.push_back(Json{{"seed", config.seed + k}, {"error", failures[k]}});
        }
    }
    Json diag{{"chains", chains}};
    diag.update(start_info);
    write_json(dir / "diagnostics.json", diag);
    if (ok == 0) throw NoConvergence("every chain failed", kNaN);

    const double n = static_cast<double>(merged.total + merged.outside);
    std::ofstream csv(dir / "histogram.csv");
    write_csv_row(csv, {"bin_lo", "bin_hi", "count", "empirical_density", "analytic_density"});
    for (std::size_t b = 0; b < merged.counts.size(); ++b) {
        const double lo = merged.edges[b], hi = merged.edges[b + 1];
        write_csv_row(csv, {format_number(lo), format_number(hi), std::to_string(merged.counts[b]),
                            format_number(merged.counts[b] / n / (hi - lo)),
                            format_number(interval_mass(rho, lo, hi) / (hi - lo))});
    }
    const ComparisonMetrics m = compare(merged, rho);
    Json report = comparison_json(m);
    report["samples"] = merged.total + merged.outside;
    report["chains_ok"] = ok;
    write_json(dir / "comparison.json", report);
    std::cout << Json{{"diagnostics", diag}, {"comparison", report}}.dump(2) << '\n';
    return 0;
}

// ---- sweep -------------------------------------------------------------------

struct SweepArgs {
    std::string kind;
    double a = 2.5, A = 0.01;
    int m = 2;
    double from = 0.0, to = 1.0;
    int points = 11;
    bool log = false;
    std::string out = "sweep.csv";
};

struct Row {
    double a = kNaN, A = kNaN, x1 = kNaN, x2 = kNaN, x3 = kNaN, x4 = kNaN;
    double chi = kNaN, psi = kNaN, norm = kNaN, trace = kNaN, min_density = kNaN, A_edge = kNaN;
    std::string status = "ok";
};

std::vector<double> grid(const SweepArgs& s) {
    if (s.points < 1) throw ConfigError("points must be positive");
    if (s.log && !(s.from > 0.0 && s.to > 0.0)) throw ConfigError("log grid needs positive bounds");
    std::vector<double> g;
    for (int k = 0; k < s.points; ++k) {
        const double u = s.points == 1 ? 0.0 : static_cast<double>(k) / (s.points - 1);
        g.push_back(s.log ? s.from * std::pow(s.to / s.from, u) : s.from + (s.to - s.from) * u);
    }
    return g;
}

void fill_two_cut(Row& r, const TwoCutSolution& sol) {
    const auto x = sol.support.endpoints();
    r.x1 = x[0];
    r.x2 = x[1];
    r.x3 = x[2];
    r.x4 = x[3];
    const ConstraintReport rep = constraint_report(sol);
    r.chi = rep.susceptibility;
    r.norm = rep.norm;
    r.trace = rep.trace;
    r.min_density = rep.min_density;
}

Row sweep_point(const SweepArgs& s, double v) {
    Row r;
    try {
        if (s.kind == "endpoints-vs-a") {
            r.a = v;
            r.A = s.A;
            fill_two_cut(r, solve_endpoints({v, s.A, s.m}));
        } else if (s.kind == "chi-vs-A") {
            r.a = s.a;
            r.A = v;
            fill_two_cut(r, solve_endpoints({s.a, v, s.m}));
        } else if (s.kind == "rate-function") {
            r.a = s.a;
            r.chi = v;
            const RatePoint p = rate_point(s.a, v, RateOptions{s.m});
            r.A = p.A;
            r.psi = p.psi;
            if (p.A > 0.0) {
                fill_two_cut(r, p.solution);
                r.chi = v;
            }
        } else if (s.kind == "critical-line") {
            r.a = v;
            const CriticalPoint cp = critical_line(v);
            if (!cp.exists) throw OutOfRange("no critical line below a = 2");
            r.A = cp.A;
            r.x1 = cp.solution.support.y1;
            r.x2 = cp.solution.support.y2;
            r.min_density = cp.solution.min_density;
            if (!cp.degenerate) {
                r.A_edge = edge_zero_line(v).A;
                const ConstraintReport rep = constraint_report(one_cut_density(cp.solution), v);
                r.norm = rep.norm;
                r.trace = rep.trace;
                r.chi = rep.susceptibility;
            } else {
                r.A_edge = 0.0;
                r.norm = 1.0;
                r.trace = 0.0;
            }
        }
    } catch (const std::exception& e) {
        r.status = error_kind(e);
    }
    return r;
}

int cmd_sweep(const SweepArgs& s) {
    static const std::vector<std::string> kinds{"endpoints-vs-a", "chi-vs-A", "rate-function", "critical-line"};
    if (std::find(kinds.begin(), kinds.end(), s.kind) == kinds.end()) throw ConfigError("unknown sweep kind " + s.kind);
    const std::vector<double> g = grid(s);
    std::vector<Row> rows(g.size());
    parallel_for(g.size(), [&](std::size_t k) { rows[k] = sweep_point(s, g[k]); });
    const fs::path path(s.out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream csv(path);
    write_csv_row(csv, {"a", "A", "x1", "x2", "x3", "x4", "chi", "psi", "norm", "trace", "min_density", "A_edge",
                        "status"});
    int failed = 0;
    for (const Row& r : rows) {
        failed += r.status != "ok";
        write_csv_row(csv, {format_number(r.a), format_number(r.A), format_number(r.x1), format_number(r.x2),
                            format_number(r.x3), format_number(r.x4), format_number(r.chi), format_number(r.psi),
                            format_number(r.norm), format_number(r.trace), format_number(r.min_density),
                            format_number(r.A_edge), r.status});
    }
    std::cout << Json{{"kind", s.kind}, {"points", rows.size()}, {"failed", failed}, {"out", s.out}}.dump() << '\n';
    return 0;
}

// ---- scan --------------------------------------------------------------------

struct ScanArgs {
    ShrinkGrid grid;
    std::string relation = "collapse";
    std::optional<double> a, gap;
    std::string out = "scan.csv";
};

int cmd_scan(ScanArgs s) {
    if (s.relation == "collapse") {
        s.grid.relation = ShrinkRelation::Collapse;
    } else if (s.relation == "traceless") {
        s.grid.relation = ShrinkRelation::Traceless;
    } else {
        throw ConfigError("relation must be collapse or traceless");
    }
    ShrinkReport rep;
    if (s.a || s.gap) {
        if (!(s.a && s.gap)) throw ConfigError("a single-point scan needs both --a and --gap");
        rep.points = shrink_points(*s.a, *s.gap, s.grid);
        rep.grid_points = 1;
        for (const ShrinkPoint& p : rep.points) {
            ++rep.roots;
            rep.constraint_points += p.constraints_ok;
            rep.admissible += p.admissible;
        }
    } else {
        rep = shrink_condition_scan(s.grid);
    }
    const fs::path path(s.out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream csv(path);
    write_csv_row(csv, {"a", "gap", "f1", "f2", "A", "firstgood_residual", "admissible", "collapse_residual",
                        "fourth_residual"});
    for (const ShrinkPoint& p : rep.points) {
        write_csv_row(csv, {format_number(p.a), format_number(p.gap), format_number(p.f1), format_number(p.f2),
                            format_number(p.A), format_number(p.firstgood_residual), p.admissible ? "1" : "0",
                            format_number(p.collapse_residual), format_number(p.fourth_residual)});
    }
    std::cout << Json{{"grid_points", rep.grid_points},
                      {"roots", rep.roots},
                      {"constraint_points", rep.constraint_points},
                      {"admissible", rep.admissible},
                      {"out", s.out}}
                     .dump()
              << '\n';
    return 0;
}

int fail(const std::exception& e) {
    std::cerr << error_json(error_kind(e), e.what()).dump() << '\n';
    return exit_code_for(e);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-cut eigenvalue densities, Coulomb-fluid Monte Carlo and parameter sweeps"};
    app.require_subcommand(1);

    SolveArgs solve;
    auto* s = app.add_subcommand("solve", "solve the endpoint system and tabulate the density");
    s->add_option("--a", solve.a, "pole position")->required();
    s->add_option("--A", solve.A, "pole strength")->required();
    s->add_option("--m", solve.m, "pole order");
    s->add_option("--out", solve.out, "output directory");

    McArgs mc;
    auto* c = app.add_subcommand("mc", "Metropolis sampling of the Coulomb fluid");
    c->add_option("--config", mc.config, "key = value config file");
    c->add_option("--a", mc.a);
    c->add_option("--A", mc.A);
    c->add_option("--m", mc.m);
    c->add_option("--N", mc.N);
    c->add_option("--seed", mc.seed);
    c->add_option("--sweeps", mc.sweeps);
    c->add_option("--burn-in", mc.burn_in);
    c->add_option("--eps", mc.eps);
    c->add_option("--anneal-tterm", mc.tterm);
    c->add_option("--anneal-kappa0", mc.kappa0);
    c->add_option("--anneal-cycles", mc.cycles);
    c->add_option("--out", mc.out, "output directory");
    c->add_option("--start", mc.start, "scan (conditional energy N_l*), anneal, or analytic filling");
    c->add_option("--chains", mc.chains, "independent chains with seeds seed, seed+1, ...");
    c->add_option("--bins", mc.bins, "histogram bins");
    c->add_flag("--snapshots", mc.snapshots, "write every recorded configuration of chain 0");

    SweepArgs sweep;
    auto* w = app.add_subcommand("sweep", "parameter sweeps to CSV");
    w->add_option("kind", sweep.kind, "endpoints-vs-a | chi-vs-A | rate-function | critical-line")->required();
    w->add_option("--a", sweep.a, "fixed a (chi-vs-A, rate-function)");
    w->add_option("--A", sweep.A, "fixed A (endpoints-vs-a)");
    w->add_option("--m", sweep.m);
    w->add_option("--from", sweep.from, "first grid value");
    w->add_option("--to", sweep.to, "last grid value");
    w->add_option("--points", sweep.points, "grid size");
    w->add_flag("--log", sweep.log, "geometric grid");
    w->add_option("--out", sweep.out, "CSV path");

    ScanArgs scan;
    auto* n = app.add_subcommand("scan", "scan for x3 = x4 limits of the two-cut system");
    n->add_option("--relation", scan.relation, "relation used to eliminate f2: collapse | traceless");
    n->add_option("--a", scan.a, "single a (with --gap)");
    n->add_option("--gap", scan.gap, "single x3 - a (with --a)");
    n->add_option("--a-max", scan.grid.a_max);
    n->add_option("--a-step", scan.grid.a_step);
    n->add_option("--gap-points", scan.grid.gap_points);
    n->add_option("--f1-samples", scan.grid.f1_samples);
    n->add_option("--out", scan.out, "CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 4;
    }

    try {
        if (*s) return cmd_solve(solve);
        if (*c) return cmd_mc(mc);
        if (*w) return cmd_sweep(sweep);
        if (*n) return cmd_scan(scan);
    } catch (const std::exception& e) {
        return fail(e);
    }
    return 0;
}

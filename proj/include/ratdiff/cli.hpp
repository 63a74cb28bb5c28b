#pragma once

// Command-line front end. Every analysis is a subcommand emitting CSV or JSON:
//
//   simulate    iterate the equation and emit the trajectory
//   forbidden   closed-form forbidden-set membership of a window
//   stability   equilibria, characteristic roots, linearized verdicts
//   cycles      verify a window as a (k+1)-cycle, or detect one by iterating
//   sweep       regime classification over a grid of c values
//
// Exit codes: 0 success, 1 usage or configuration error, 2 a forbidden-set
// blow-up was encountered. CSV rows render doubles with 17 significant digits
// so they round-trip bit-exactly.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ratdiff/equation.hpp"
#include "ratdiff/forbidden.hpp"
#include "ratdiff/semiconjugacy.hpp"
#include "ratdiff/stability.hpp"

namespace ratdiff::cli {

using nlohmann::json;

enum class OutputFormat { Csv, Json };

/// One fully parsed invocation. Exactly one of the (alpha, beta, gamma) or c
/// parameter groups may be supplied (together with k).
struct RunConfig {
    std::string command;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<double> gamma;
    std::optional<double> c;
    int k = 1;
    std::vector<double> window;
    int steps = 0;
    double tol = 0.0;
    double cycle_tol = 1e-6;
    double blowup_tol = kDefaultBlowupTol;
    int horizon = kDefaultHorizon;
    double margin = kDefaultUnitCircleMargin;
    double roots_tol = kDefaultRootsTol;
    OutputFormat format = OutputFormat::Csv;
    std::string out_path;
    double c_from = 0.0;
    double c_to = 0.0;
    double c_step = 0.0;
    std::string config_path;
};

namespace detail {

/// 17 significant digits: enough for a bit-faithful double round-trip.
inline std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Short human-friendly rendering for tolerances in header comments.
inline std::string g6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

inline std::string join_g17(const std::vector<double>& values, char sep = ',') {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out.push_back(sep);
        out += g17(values[i]);
    }
    return out;
}

inline std::vector<double> parse_window(const std::string& text) {
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string piece =
            text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(piece, &used);
        } catch (const std::exception&) {
            throw Error("cannot parse window entry '" + piece + "'");
        }
        if (used != piece.size()) throw Error("cannot parse window entry '" + piece + "'");
        values.push_back(value);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return values;
}

struct ResolvedEquation {
    NormalizedEquation eq;
    std::optional<ParamSet> raw;
};

inline ResolvedEquation resolve_equation(const RunConfig& cfg) {
    const bool have_raw = cfg.alpha || cfg.beta || cfg.gamma;
    const bool have_c = cfg.c.has_value();
    if (have_raw == have_c) {
        throw Error("supply either --c or all of --alpha, --beta, --gamma");
    }
    if (have_raw) {
        if (!(cfg.alpha && cfg.beta && cfg.gamma)) {
            throw Error("raw parameters need all of --alpha, --beta, --gamma");
        }
        const ParamSet raw = validate_params(*cfg.alpha, *cfg.beta, *cfg.gamma, cfg.k);
        return {normalize(raw), raw};
    }
    if (!(*cfg.c > 0.0)) throw NonPositiveParameter("c", *cfg.c);
    if (cfg.k < 1) throw InvalidOrder(cfg.k);
    return {NormalizedEquation{*cfg.c, cfg.k, 1.0}, std::nullopt};
}

inline StateWindow checked_window(const RunConfig& cfg) {
    if (cfg.window.size() != static_cast<std::size_t>(cfg.k) + 1) {
        throw Error("window must have exactly k+1 = " + std::to_string(cfg.k + 1) +
                    " comma-separated entries (oldest first), got " +
                    std::to_string(cfg.window.size()));
    }
    return StateWindow(cfg.window);
}

/// Writes the payload to --out when set, otherwise to the output stream.
inline void emit(const RunConfig& cfg, const std::string& payload, std::ostream& out) {
    if (cfg.out_path.empty()) {
        out << payload;
        return;
    }
    std::ofstream file(cfg.out_path, std::ios::binary);
    if (!file) throw Error("cannot open output file '" + cfg.out_path + "'");
    file << payload;
}

inline std::string equation_header_fields(const RunConfig& cfg, const ResolvedEquation& resolved) {
    std::string fields;
    if (resolved.raw) {
        fields += " alpha=" + g17(resolved.raw->alpha);
        fields += " beta=" + g17(resolved.raw->beta);
        fields += " gamma=" + g17(resolved.raw->gamma);
    }
    fields += " c=" + g17(resolved.eq.c);
    fields += " scale=" + g17(resolved.eq.scale);
    fields += " k=" + std::to_string(cfg.k);
    return fields;
}

inline void equation_json_fields(const RunConfig& cfg, const ResolvedEquation& resolved,
                                 json& object) {
    if (resolved.raw) {
        object["alpha"] = resolved.raw->alpha;
        object["beta"] = resolved.raw->beta;
        object["gamma"] = resolved.raw->gamma;
    }
    object["c"] = resolved.eq.c;
    object["scale"] = resolved.eq.scale;
    object["k"] = cfg.k;
}

// ---------------------------------------------------------------------------
// simulate

inline int cmd_simulate(RunConfig cfg, std::ostream& out) {
    if (!cfg.config_path.empty()) {
        std::ifstream file(cfg.config_path);
        if (!file) throw Error("cannot open config file '" + cfg.config_path + "'");
        json config;
        try {
            file >> config;
        } catch (const json::exception& e) {
            throw Error(std::string("config parse error: ") + e.what());
        }
        if (config.contains("alpha")) {
            cfg.alpha = config.at("alpha").get<double>();
            cfg.beta = config.at("beta").get<double>();
            cfg.gamma = config.at("gamma").get<double>();
        } else {
            cfg.c = config.at("c").get<double>();
        }
        cfg.k = config.at("k").get<int>();
        cfg.window = config.at("init").get<std::vector<double>>();
        cfg.steps = config.at("steps").get<int>();
        cfg.blowup_tol = config.at("blowup_tol").get<double>();
    }

    const ResolvedEquation resolved = resolve_equation(cfg);
    const StateWindow init = checked_window(cfg);
    if (cfg.steps < 0) throw Error("--steps must be >= 0");

    // Simulation runs in the normalized frame; values are reported in the
    // caller's frame (x = scale * y), with the initial window echoed verbatim.
    const double scale = resolved.eq.scale;
    std::vector<double> start(init.begin(), init.end());
    if (scale != 1.0) {
        for (double& v : start) v /= scale;
    }
    const Trajectory traj = iterate(resolved.eq, StateWindow(start), cfg.steps, cfg.blowup_tol);

    std::vector<double> reported(init.begin(), init.end());
    for (std::size_t j = init.size(); j < traj.values.size(); ++j) {
        reported.push_back(scale == 1.0 ? traj.values[j] : scale * traj.values[j]);
    }

    std::string payload;
    if (cfg.format == OutputFormat::Csv) {
        std::string text = "# simulate" + equation_header_fields(cfg, resolved);
        text += " init=" + join_g17(cfg.window);
        text += " steps=" + std::to_string(cfg.steps);
        text += " blowup_tol=" + g6(cfg.blowup_tol) + "\n";
        text += "n,x\n";
        for (std::size_t j = init.size(); j < reported.size(); ++j) {
            const int n = static_cast<int>(j) - cfg.k;
            text += std::to_string(n) + "," + g17(reported[j]) + "\n";
        }
        if (traj.terminated_early) {
            text += "# terminated_early=" + std::to_string(*traj.terminated_early) + "\n";
        }
        payload = std::move(text);
    } else {
        json object;
        object["command"] = "simulate";
        equation_json_fields(cfg, resolved, object);
        object["init"] = cfg.window;
        object["steps"] = cfg.steps;
        object["blowup_tol"] = cfg.blowup_tol;
        object["values"] = reported;
        object["terminated_early"] =
            traj.terminated_early ? json(*traj.terminated_early) : json(nullptr);
        payload = object.dump(2) + "\n";
    }
    emit(cfg, payload, out);
    return traj.terminated_early ? 2 : 0;
}

// ---------------------------------------------------------------------------
// forbidden

inline int cmd_forbidden(const RunConfig& cfg, std::ostream& out) {
    const ResolvedEquation resolved = resolve_equation(cfg);
    const StateWindow window = checked_window(cfg);
    const ForbiddenVerdict verdict =
        is_forbidden(resolved.eq, window, cfg.horizon, cfg.tol);

    std::string payload;
    if (cfg.format == OutputFormat::Csv) {
        std::string text = "# forbidden" + equation_header_fields(cfg, resolved);
        text += " window=" + join_g17(cfg.window);
        text += " horizon=" + std::to_string(cfg.horizon);
        text += " tol=" + g6(cfg.tol) + "\n";
        text += "member,witness_m,threshold,distance,ambiguous\n";
        text += verdict.member ? "true" : "false";
        text += ",";
        if (verdict.witness_m) text += std::to_string(*verdict.witness_m);
        text += ",";
        if (verdict.threshold_value) text += g17(*verdict.threshold_value);
        text += "," + g17(verdict.distance);
        text += verdict.ambiguous_near_accumulation ? ",true\n" : ",false\n";
        payload = std::move(text);
    } else {
        json object;
        object["command"] = "forbidden";
        equation_json_fields(cfg, resolved, object);
        object["window"] = cfg.window;
        object["horizon"] = cfg.horizon;
        object["tol"] = cfg.tol;
        object["member"] = verdict.member;
        object["witness_m"] = verdict.witness_m ? json(*verdict.witness_m) : json(nullptr);
        object["threshold"] =
            verdict.threshold_value ? json(*verdict.threshold_value) : json(nullptr);
        object["distance"] = verdict.distance;
        object["ambiguous_near_accumulation"] = verdict.ambiguous_near_accumulation;
        payload = object.dump(2) + "\n";
    }
    emit(cfg, payload, out);
    return 0;
}

// ---------------------------------------------------------------------------
// stability

inline const char* verdict_name(StabilityVerdict v) {
    switch (v) {
        case StabilityVerdict::AsymptoticallyStable: return "asymptotically_stable";
        case StabilityVerdict::Unstable: return "unstable";
        case StabilityVerdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

inline int cmd_stability(const RunConfig& cfg, std::ostream& out) {
    const ResolvedEquation resolved = resolve_equation(cfg);

    struct Entry {
        Equilibrium equilibrium;
        RootAnalysis analysis;
        std::vector<std::complex<double>> factored;
    };
    std::vector<Entry> entries;
    for (const Equilibrium& e : equilibria(resolved.eq)) {
        Entry entry;
        entry.equilibrium = e;
        const CharPoly poly = e.kind == EquilibriumKind::Origin
                                  ? char_poly_origin(resolved.eq)
                                  : char_poly_positive(resolved.eq);
        entry.analysis = poly_roots(poly, cfg.roots_tol);
        entry.analysis.verdict = classify_linearization(entry.analysis.roots, cfg.margin);
        if (e.kind == EquilibriumKind::Positive) {
            entry.factored = positive_eq_roots_factored(resolved.eq);
        }
        entries.push_back(std::move(entry));
    }

    std::string payload;
    if (cfg.format == OutputFormat::Csv) {
        std::string text = "# stability" + equation_header_fields(cfg, resolved);
        text += " margin=" + g6(cfg.margin) + "\n";
        text += "equilibrium,value,verdict,root_re,root_im,modulus,residual\n";
        for (const Entry& entry : entries) {
            const char* kind =
                entry.equilibrium.kind == EquilibriumKind::Origin ? "origin" : "positive";
            for (std::size_t i = 0; i < entry.analysis.roots.size(); ++i) {
                const auto& root = entry.analysis.roots[i];
                text += std::string(kind) + "," + g17(entry.equilibrium.value) + "," +
                        verdict_name(entry.analysis.verdict) + "," + g17(root.real()) + "," +
                        g17(root.imag()) + "," + g17(std::abs(root)) + "," +
                        g17(entry.analysis.residuals[i]) + "\n";
            }
        }
        payload = std::move(text);
    } else {
        json object;
        object["command"] = "stability";
        equation_json_fields(cfg, resolved, object);
        object["margin"] = cfg.margin;
        object["roots_tol"] = cfg.roots_tol;
        json list = json::array();
        for (const Entry& entry : entries) {
            json item;
            item["kind"] =
                entry.equilibrium.kind == EquilibriumKind::Origin ? "origin" : "positive";
            item["value"] = entry.equilibrium.value;
            item["verdict"] = verdict_name(entry.analysis.verdict);
            item["max_modulus"] = entry.analysis.max_modulus;
            json roots = json::array();
            for (std::size_t i = 0; i < entry.analysis.roots.size(); ++i) {
                const auto& root = entry.analysis.roots[i];
                roots.push_back({{"re", root.real()},
                                 {"im", root.imag()},
                                 {"modulus", std::abs(root)},
                                 {"residual", entry.analysis.residuals[i]}});
            }
            item["roots"] = std::move(roots);
            if (!entry.factored.empty()) {
                json factored = json::array();
                for (const auto& root : entry.factored) {
                    factored.push_back({{"re", root.real()}, {"im", root.imag()}});
                }
                item["factored_roots"] = std::move(factored);
            }
            list.push_back(std::move(item));
        }
        object["equilibria"] = std::move(list);
        payload = object.dump(2) + "\n";
    }
    emit(cfg, payload, out);
    return 0;
}

// ---------------------------------------------------------------------------
// cycles

inline int cmd_cycles(const RunConfig& cfg, std::ostream& out) {
    const ResolvedEquation resolved = resolve_equation(cfg);
    const StateWindow window = checked_window(cfg);
    if (cfg.steps < 0) throw Error("--steps must be >= 0");

    // steps == 0 tests the given window directly; steps > 0 iterates first
    // and tests the final window.
    CycleReport report;
    if (cfg.steps == 0) {
        report = verify_kp1_cycle(resolved.eq, window, cfg.tol, cfg.blowup_tol);
    } else {
        const Trajectory traj = iterate(resolved.eq, window, cfg.steps, cfg.blowup_tol);
        if (traj.terminated_early) {
            throw ForbiddenBlowup("trajectory blew up at step " +
                                  std::to_string(*traj.terminated_early));
        }
        report = detect_cycle(traj, cfg.tol, cfg.blowup_tol);
    }

    std::string payload;
    if (cfg.format == OutputFormat::Csv) {
        std::string text = "# cycles" + equation_header_fields(cfg, resolved);
        text += " window=" + join_g17(cfg.window);
        text += " steps=" + std::to_string(cfg.steps);
        text += " tol=" + g6(cfg.tol) + "\n";
        text += "is_cycle,period,fiber_value,max_deviation,window\n";
        text += std::string(report.is_cycle ? "true" : "false") + "," +
                std::to_string(report.period) + "," + g17(report.fiber_value) + "," +
                g17(report.max_deviation) + "," +
                join_g17(report.cycle_window.values(), ';') + "\n";
        payload = std::move(text);
    } else {
        json object;
        object["command"] = "cycles";
        equation_json_fields(cfg, resolved, object);
        object["window"] = cfg.window;
        object["steps"] = cfg.steps;
        object["tol"] = cfg.tol;
        object["is_cycle"] = report.is_cycle;
        object["period"] = report.period;
        object["fiber_value"] = report.fiber_value;
        object["max_deviation"] = report.max_deviation;
        object["cycle_window"] = report.cycle_window.values();
        payload = object.dump(2) + "\n";
    }
    emit(cfg, payload, out);
    return 0;
}

// ---------------------------------------------------------------------------
// sweep

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::Subcritical: return "subcritical";
        case Regime::Critical: return "critical";
        case Regime::Supercritical: return "supercritical";
    }
    return "critical";
}

inline const char* limit_name(LimitKind l) {
    switch (l) {
        case LimitKind::Origin: return "origin";
        case LimitKind::Cycle: return "cycle";
        case LimitKind::Undetermined: return "undetermined";
    }
    return "undetermined";
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
    if (cfg.k < 1) throw InvalidOrder(cfg.k);
    const StateWindow init = checked_window(cfg);
    if (!(cfg.c_step > 0.0)) throw Error("--c-step must be positive");
    if (cfg.c_to < cfg.c_from) throw Error("--c-to must be >= --c-from");
    if (cfg.steps <= 0) throw Error("--steps must be > 0");

    std::vector<double> grid;
    for (double c = cfg.c_from; c <= cfg.c_to + 0.5 * cfg.c_step; c += cfg.c_step) {
        if (c > 0.0) grid.push_back(c);
    }

    // Rows are independent; compute them concurrently, emit in c order.
    std::vector<std::future<RegimeReport>> futures;
    futures.reserve(grid.size());
    for (double c : grid) {
        futures.push_back(std::async(std::launch::async, [&, c] {
            const NormalizedEquation eq{c, cfg.k, 1.0};
            return analyze_convergence(eq, init, cfg.steps, cfg.tol, cfg.cycle_tol,
                                       cfg.blowup_tol);
        }));
    }
    std::vector<RegimeReport> rows;
    rows.reserve(grid.size());
    for (auto& f : futures) rows.push_back(f.get());

    std::string payload;
    if (cfg.format == OutputFormat::Csv) {
        std::string text = "# sweep k=" + std::to_string(cfg.k);
        text += " init=" + join_g17(cfg.window);
        text += " steps=" + std::to_string(cfg.steps);
        text += " tol=" + g6(cfg.tol);
        text += " cycle_tol=" + g6(cfg.cycle_tol) + "\n";
        text += "c,regime,limit,fiber_gap,rate_estimate,out_of_hypothesis,terminated_early\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const RegimeReport& row = rows[i];
            text += g17(grid[i]);
            text += std::string(",") + regime_name(row.regime) + "," + limit_name(row.limit_kind);
            text += "," + g17(row.fiber_gap) + ",";
            if (row.rate_estimate) text += g17(*row.rate_estimate);
            text += row.out_of_hypothesis ? ",true," : ",false,";
            if (row.terminated_early) text += std::to_string(*row.terminated_early);
            text += "\n";
        }
        payload = std::move(text);
    } else {
        json object;
        object["command"] = "sweep";
        object["k"] = cfg.k;
        object["init"] = cfg.window;
        object["steps"] = cfg.steps;
        object["tol"] = cfg.tol;
        object["cycle_tol"] = cfg.cycle_tol;
        json list = json::array();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const RegimeReport& row = rows[i];
            json item;
            item["c"] = grid[i];
            item["regime"] = regime_name(row.regime);
            item["limit"] = limit_name(row.limit_kind);
            item["fiber_gap"] = row.fiber_gap;
            item["rate_estimate"] = row.rate_estimate ? json(*row.rate_estimate) : json(nullptr);
            item["out_of_hypothesis"] = row.out_of_hypothesis;
            item["terminated_early"] =
                row.terminated_early ? json(*row.terminated_early) : json(nullptr);
            list.push_back(std::move(item));
        }
        object["rows"] = std::move(list);
        payload = object.dump(2) + "\n";
    }
    emit(cfg, payload, out);
    return 0;
}

}  // namespace detail

/// Parse and run one invocation. `args` excludes the program name. Output
/// goes to `out` unless --out redirects it to a file; diagnostics go to `err`.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulation and analysis of the rational difference equation\n"
                 "  x[n+1] = alpha*x[n-k] / (beta + gamma*x[n]*x[n-1]*...*x[n-k])\n"
                 "and of its normalized form with coefficient c = alpha/beta.",
                 "ratdiff"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string init_text;
    std::string window_text;
    std::string format_text = "csv";
    double tol_forbidden = 1e-8;
    double tol_cycles = kDefaultCycleTol;
    double tol_sweep = 1e-8;
    int simulate_steps = 0;
    int cycles_steps = 0;
    int sweep_steps = 2000;

    const auto add_equation = [&](CLI::App* sub) {
        sub->add_option("--c", cfg.c, "normalized coefficient c > 0 (equation already normalized)");
        sub->add_option("--alpha", cfg.alpha, "numerator coefficient of the raw equation");
        sub->add_option("--beta", cfg.beta, "additive denominator coefficient of the raw equation");
        sub->add_option("--gamma", cfg.gamma, "product coefficient of the raw equation");
        sub->add_option("--k", cfg.k, "recurrence order k >= 1 (window length is k+1)");
    };
    const auto add_output = [&](CLI::App* sub) {
        sub->add_option("--format", format_text, "output format")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--out", cfg.out_path, "write output to this file instead of stdout");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "iterate the equation and emit n,x rows");
    add_equation(simulate);
    add_output(simulate);
    simulate->add_option("--init", init_text,
                         "initial window, k+1 comma-separated values, oldest first");
    simulate->add_option("--steps", simulate_steps, "number of steps to iterate");
    simulate->add_option("--blowup-tol", cfg.blowup_tol,
                         "|1 + product| at or below this is a forbidden-set hit");
    simulate->add_option("--config", cfg.config_path,
                         "re-run from a JSON file previously emitted by simulate");

    CLI::App* forbidden = app.add_subcommand("forbidden",
                                             "closed-form forbidden-set membership of a window");
    add_equation(forbidden);
    add_output(forbidden);
    forbidden->add_option("--window", window_text,
                          "window to test, k+1 comma-separated values, oldest first");
    forbidden->add_option("--horizon", cfg.horizon, "number of thresholds scanned");
    forbidden->add_option("--tol", tol_forbidden, "|product - threshold| tolerance")
        ->envname("RATDIFF_TOL");

    CLI::App* stability = app.add_subcommand(
        "stability", "equilibria, characteristic roots, linearized verdicts");
    add_equation(stability);
    add_output(stability);
    stability->add_option("--margin", cfg.margin, "unit-circle classification margin");
    stability->add_option("--roots-tol", cfg.roots_tol, "polynomial root residual tolerance");

    CLI::App* cycles = app.add_subcommand(
        "cycles", "test a window as a (k+1)-cycle (--steps 0) or iterate first (--steps N)");
    add_equation(cycles);
    add_output(cycles);
    cycles->add_option("--window", window_text,
                       "window to test, k+1 comma-separated values, oldest first");
    cycles->add_option("--steps", cycles_steps,
                       "iterate this many steps before testing (0 = direct)");
    cycles->add_option("--tol", tol_cycles, "sup-norm deviation tolerance")->envname("RATDIFF_TOL");
    cycles->add_option("--blowup-tol", cfg.blowup_tol, "forbidden-set hit tolerance");

    CLI::App* sweep =
        app.add_subcommand("sweep", "regime classification over a grid of c values");
    add_output(sweep);
    sweep->add_option("--k", cfg.k, "recurrence order k >= 1");
    sweep->add_option("--c-from", cfg.c_from, "first c of the grid")->required();
    sweep->add_option("--c-to", cfg.c_to, "last c of the grid")->required();
    sweep->add_option("--c-step", cfg.c_step, "grid spacing")->required();
    sweep->add_option("--init", init_text,
                      "initial window, k+1 comma-separated values, oldest first");
    sweep->add_option("--steps", sweep_steps, "steps per grid point");
    sweep->add_option("--tol", tol_sweep, "fiber-gap tolerance for the limit verdict")
        ->envname("RATDIFF_TOL");
    sweep->add_option("--cycle-tol", cfg.cycle_tol, "cycle deviation tolerance");
    sweep->add_option("--blowup-tol", cfg.blowup_tol, "forbidden-set hit tolerance");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    cfg.format = format_text == "json" ? OutputFormat::Json : OutputFormat::Csv;
    try {
        if (app.got_subcommand(simulate)) {
            cfg.command = "simulate";
            cfg.steps = simulate_steps;
            if (!init_text.empty()) cfg.window = detail::parse_window(init_text);
            if (init_text.empty() && cfg.config_path.empty()) {
                throw Error("simulate needs --init (or --config)");
            }
            return detail::cmd_simulate(cfg, out);
        }
        if (app.got_subcommand(forbidden)) {
            cfg.command = "forbidden";
            cfg.tol = tol_forbidden;
            if (window_text.empty()) throw Error("forbidden needs --window");
            cfg.window = detail::parse_window(window_text);
            return detail::cmd_forbidden(cfg, out);
        }
        if (app.got_subcommand(stability)) {
            cfg.command = "stability";
            return detail::cmd_stability(cfg, out);
        }
        if (app.got_subcommand(cycles)) {
            cfg.command = "cycles";
            cfg.steps = cycles_steps;
            cfg.tol = tol_cycles;
            if (window_text.empty()) throw Error("cycles needs --window");
            cfg.window = detail::parse_window(window_text);
            return detail::cmd_cycles(cfg, out);
        }
        if (app.got_subcommand(sweep)) {
            cfg.command = "sweep";
            cfg.steps = sweep_steps;
            cfg.tol = tol_sweep;
            if (init_text.empty()) throw Error("sweep needs --init");
            cfg.window = detail::parse_window(init_text);
            return detail::cmd_sweep(cfg, out);
        }
        err << "error: no subcommand given\n";
        return 1;
    } catch (const ForbiddenBlowup& e) {
        err << "forbidden blow-up: " << e.what() << "\n";
        return 2;
    } catch (const RiccatiBlowup& e) {
        err << "forbidden blow-up: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace ratdiff::cli

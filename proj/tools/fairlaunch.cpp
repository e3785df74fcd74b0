// Batch experiment runner for the token-launch market simulator.
//
// Subcommands: simulate, calibrate, validate-event, validate-sensitivity,
// table-whales, plot-data, synth-data. A JSON config file mirrors the run
// configuration; explicit flags win over config values. Exit codes:
// 0 success, 1 usage/config error, 2 data error, 3 internal invariant
// violation.

#include <CLI11.hpp>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fairlaunch/calibration.hpp"
#include "fairlaunch/data.hpp"
#include "fairlaunch/engine.hpp"
#include "fairlaunch/results.hpp"

namespace fs = std::filesystem;
using namespace fairlaunch;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string market_path;
    bool synthetic = false;
    std::uint64_t synth_seed = 2020;
    double synth_price0 = 30000.0;
    double synth_drift = 0.0;
    double synth_vol = 0.03;
    double synth_fgi_phi = 0.95;
    double synth_fgi_sigma = 10.0;
    std::string out_dir;
    int replicates = 30;
    int workers = 0;
    std::string preset;
    std::string experiment;
    bool entrants_calibrated = false;
};

/// Named experiment presets, each reproducing one published artifact:
/// the three trading-probability figures and the long-horizon equal-split
/// extension. The whale table, event validity and sensitivity analyses
/// have their own subcommands.
struct ExperimentPreset {
    const char* name;
    const char* trading_preset;
    std::optional<Scenario> scenario;
    std::optional<int> t_end;
};

inline constexpr std::array<ExperimentPreset, 4> kExperiments{{
    {"fig-high", "high", std::nullopt, std::nullopt},
    {"fig-medium", "medium", std::nullopt, std::nullopt},
    {"fig-low", "low", std::nullopt, std::nullopt},
    {"bentham-extension", "high", Scenario::Bentham, 545},
}};

void add_common_flags(CLI::App* cmd, CommonArgs& args, RunConfig& cfg) {
    cmd->add_option("--config", args.config_path, "JSON config file (flags override it)");
    cmd->add_option("--seed", cfg.seed, "base seed; replicate k derives child stream k");
    cmd->add_option("--t-start", cfg.t_start, "first simulated day index");
    cmd->add_option("--t-end", cfg.t_end, "last simulated day index (inclusive)");
    cmd->add_option("--scenario", [&cfg](const std::vector<std::string>& v) {
        cfg.scenario.kind = scenario_from_string(v.front());
        return true;
    }, "initial allocation: cronje | bentham | rawls");
    cmd->add_option("--preset", args.preset, "trading probabilities: high | medium | low");
    cmd->add_option("--experiment", args.experiment,
                    "named experiment: fig-high | fig-medium | fig-low | bentham-extension");
    cmd->add_option("--n-initial", cfg.population.n_initial, "agents at t_start");
    cmd->add_option("--dh-share", cfg.population.dh_share, "diamond-hand population share");
    cmd->add_option("--total-supply", cfg.scenario.total_supply, "tokens in circulation");
    cmd->add_option("--entrant-scale", cfg.entrants.scale_divisor,
                    "divide daily entrant counts by this factor");
    cmd->add_flag("--entrants-calibrated", args.entrants_calibrated,
                  "use the re-anchored entrant distribution instead of the literal one");
    cmd->add_flag("--include-zero-holders", cfg.include_zero_holders,
                  "include zero-balance agents in the metric population");
    cmd->add_option("--market-data", args.market_path, "market CSV (date,price_usd,fgi)");
    cmd->add_flag("--synthetic", args.synthetic, "generate a synthetic market series");
    cmd->add_option("--synth-seed", args.synth_seed, "synthetic series seed");
    cmd->add_option("--synth-price0", args.synth_price0, "synthetic starting price");
    cmd->add_option("--synth-drift", args.synth_drift, "synthetic daily log-price drift");
    cmd->add_option("--synth-vol", args.synth_vol, "synthetic daily log-price volatility");
    cmd->add_option("--replicates", args.replicates, "Monte-Carlo replicate count");
    cmd->add_option("--workers", args.workers, "worker threads (0 = all cores)");
    cmd->add_option("--out", args.out_dir, "results directory");
}

void finalize_config(const CLI::App* cmd, CommonArgs& args, RunConfig& cfg) {
    if (!args.config_path.empty()) {
        // Config file first, then every flag the user actually passed on top.
        RunConfig from_file = load_config(args.config_path);
        RunConfig flags_view = cfg;
        cfg = from_file;
        const auto passed = [cmd](const std::string& name) {
            return cmd->count(name) > 0;
        };
        if (passed("--seed")) cfg.seed = flags_view.seed;
        if (passed("--t-start")) cfg.t_start = flags_view.t_start;
        if (passed("--t-end")) cfg.t_end = flags_view.t_end;
        if (passed("--scenario")) cfg.scenario.kind = flags_view.scenario.kind;
        if (passed("--n-initial")) cfg.population.n_initial = flags_view.population.n_initial;
        if (passed("--dh-share")) cfg.population.dh_share = flags_view.population.dh_share;
        if (passed("--total-supply"))
            cfg.scenario.total_supply = flags_view.scenario.total_supply;
        if (passed("--entrant-scale"))
            cfg.entrants.scale_divisor = flags_view.entrants.scale_divisor;
        if (passed("--include-zero-holders"))
            cfg.include_zero_holders = flags_view.include_zero_holders;
    }
    if (!args.experiment.empty()) {
        const ExperimentPreset* found = nullptr;
        for (const auto& e : kExperiments) {
            if (args.experiment == e.name) found = &e;
        }
        if (found == nullptr) {
            throw CLI::ValidationError("--experiment", "unknown experiment '" +
                                                           args.experiment + "'");
        }
        if (args.preset.empty()) args.preset = found->trading_preset;
        if (found->scenario && cmd->count("--scenario") == 0) {
            cfg.scenario.kind = *found->scenario;
        }
        if (found->t_end && cmd->count("--t-end") == 0) {
            cfg.t_end = *found->t_end;
        }
    }
    if (!args.preset.empty()) {
        const BehaviorParams preset = behavior_preset(preset_from_string(args.preset));
        cfg.behavior.p_t_fgi_e = preset.p_t_fgi_e;
        cfg.behavior.p_t_w_h = preset.p_t_w_h;
        cfg.behavior.p_t_fgi_n = preset.p_t_fgi_n;
        cfg.behavior.p_t_w_l = preset.p_t_w_l;
    }
    if (args.entrants_calibrated) {
        cfg.entrants.dist = EntrantModel::calibrated_spec();
    }
}

std::vector<MarketDay> resolve_market(const CommonArgs& args, const RunConfig& cfg) {
    if (!args.market_path.empty()) {
        return load_market_series(args.market_path, cfg.t_start);
    }
    if (args.synthetic) {
        FgiModel fgi;
        fgi.phi = args.synth_fgi_phi;
        fgi.sigma = args.synth_fgi_sigma;
        return synthetic_market_series(args.synth_seed, cfg.t_end - cfg.t_start + 1,
                                       args.synth_price0, args.synth_drift, args.synth_vol,
                                       fgi, cfg.t_start);
    }
    throw CLI::ValidationError(
        "market data", "provide --market-data <csv> or --synthetic");
}

// Launch-day population defaults to the reference's holder count when the
// caller did not pin it explicitly.
void default_n_initial_from(const CLI::App* cmd, const ReferenceSeries& reference,
                            RunConfig& cfg) {
    if (cmd->count("--n-initial") > 0) {
        return;
    }
    const ReferencePoint* first = reference.find(cfg.t_start);
    if (first != nullptr && first->n_holders && *first->n_holders >= 1) {
        cfg.population.n_initial = *first->n_holders;
    }
}

json market_source_json(const CommonArgs& args) {
    if (!args.market_path.empty()) {
        return json{{"path", args.market_path}};
    }
    return json{{"synthetic",
                 {{"seed", args.synth_seed},
                  {"price0", args.synth_price0},
                  {"drift", args.synth_drift},
                  {"vol", args.synth_vol},
                  {"fgi_phi", args.synth_fgi_phi},
                  {"fgi_sigma", args.synth_fgi_sigma}}}};
}

fs::path resolve_out_dir(const CommonArgs& args, const std::string& default_name) {
    if (!args.out_dir.empty()) {
        return fs::path(args.out_dir);
    }
    const char* env_root = std::getenv("FAIRLAUNCH_RESULTS_DIR");
    const fs::path root = env_root != nullptr ? fs::path(env_root) : fs::path("results");
    return root / default_name;
}

std::string run_name(const RunConfig& cfg, const CommonArgs& args) {
    std::string preset = args.preset.empty() ? "custom" : args.preset;
    return std::string(to_string(cfg.scenario.kind)) + "_" + preset + "_s" +
           std::to_string(cfg.seed);
}

int run_simulate(const CLI::App* cmd, CommonArgs& args, RunConfig& cfg) {
    finalize_config(cmd, args, cfg);
    cfg.validate();
    const std::vector<MarketDay> market = resolve_market(args, cfg);

    const fs::path dir = resolve_out_dir(args, run_name(cfg, args));
    fs::create_directories(dir);

    const EnsembleResult ensemble =
        run_ensemble(cfg, market, args.replicates, args.workers);
    const RunResult first = run_replicate(cfg, market, 0);

    write_config_json(dir / "config.json", cfg, args.replicates, args.workers,
                      market_source_json(args));
    write_metrics_csv(dir / "metrics.csv", first);
    write_ensemble_csv(dir / "ensemble.csv", ensemble);
    write_whales_csv(dir / "whales_final.csv", ensemble);
    if (cfg.record_fills) {
        write_fill_log(dir, first);
    }

    const EnsembleRow& last = ensemble.rows.back();
    std::printf("wrote %s\n", dir.string().c_str());
    std::printf("t=%d gini=%.4f 1-nse=%.4f whale=%.4f agents=%.0f (%d replicates)\n",
                cfg.t_end, last.gini_mean, last.nse_mean, last.whale_mean,
                last.n_agents_mean, ensemble.replicates);
    return 0;
}

std::vector<double> parse_double_list(const std::string& csv_values) {
    std::vector<double> values;
    std::string token;
    std::stringstream stream(csv_values);
    while (std::getline(stream, token, ',')) {
        values.push_back(std::stod(token));
    }
    if (values.empty()) {
        throw CLI::ValidationError("values", "expected a comma-separated list");
    }
    return values;
}

std::vector<int> parse_int_list(const std::string& csv_values) {
    std::vector<int> values;
    for (double v : parse_double_list(csv_values)) {
        values.push_back(static_cast<int>(std::lround(v)));
    }
    return values;
}

int run_calibrate(const CLI::App* cmd, CommonArgs& args, RunConfig& cfg,
                  const std::string& reference_path, GridSpec& grid, bool refine,
                  const std::string& objective_name) {
    finalize_config(cmd, args, cfg);
    cfg.validate();
    const std::vector<MarketDay> market = resolve_market(args, cfg);
    const ReferenceSeries reference = load_reference_series(reference_path);
    default_n_initial_from(cmd, reference, cfg);
    const Objective objective =
        objective_name == "mape" ? Objective::MAPE : Objective::RMSE;

    CalibrationResult result =
        grid_search(grid, cfg, market, reference, objective, args.workers);

    if (refine) {
        const auto refine_axis = [](std::vector<double> values, double best) {
            if (values.size() < 2) return values;
            double step = values[1] - values[0];
            for (std::size_t i = 2; i < values.size(); ++i) {
                step = std::min(step, values[i] - values[i - 1]);
            }
            step *= 0.5;
            std::vector<double> out;
            for (double v : {best - step, best, best + step}) {
                if (v >= 0.0 && v <= 1.0) out.push_back(v);
            }
            return out;
        };
        const auto refine_threshold_axis = [](const std::vector<int>& values, int best) {
            if (values.size() < 2) return values;
            int step = values[1] - values[0];
            for (std::size_t i = 2; i < values.size(); ++i) {
                step = std::min(step, values[i] - values[i - 1]);
            }
            step = std::max(step / 2, 1);
            std::vector<int> out;
            for (int v : {best - step, best, best + step}) {
                if (v >= 0 && v <= 100) out.push_back(v);
            }
            return out;
        };
        GridSpec fine = grid;
        fine.th_h_values = refine_threshold_axis(grid.th_h_values, result.best.params.th_h);
        fine.th_l_values = refine_threshold_axis(grid.th_l_values, result.best.params.th_l);
        fine.p_t_fgi_e_values = refine_axis(grid.p_t_fgi_e_values, result.best.params.p_t_fgi_e);
        fine.p_t_w_h_values = refine_axis(grid.p_t_w_h_values, result.best.params.p_t_w_h);
        fine.p_t_fgi_n_values = refine_axis(grid.p_t_fgi_n_values, result.best.params.p_t_fgi_n);
        fine.p_t_w_l_values = refine_axis(grid.p_t_w_l_values, result.best.params.p_t_w_l);
        fine.p_dh_buy_values = refine_axis(grid.p_dh_buy_values, result.best.params.p_dh_buy);
        fine.dh_share_values = refine_axis(grid.dh_share_values, result.best.dh_share);
        CalibrationResult second =
            grid_search(fine, cfg, market, reference, objective, args.workers);
        const double a = objective == Objective::RMSE ? result.best.rmse : result.best.mape;
        const double b = objective == Objective::RMSE ? second.best.rmse : second.best.mape;
        result.table.insert(result.table.end(), second.table.begin(), second.table.end());
        if (b < a) {
            result.best = second.best;
        }
    }

    // Re-score the winning cell with a larger ensemble for the report.
    {
        GridSpec single;
        single.th_h_values = {result.best.params.th_h};
        single.th_l_values = {result.best.params.th_l};
        single.p_t_fgi_e_values = {result.best.params.p_t_fgi_e};
        single.p_t_w_h_values = {result.best.params.p_t_w_h};
        single.p_t_fgi_n_values = {result.best.params.p_t_fgi_n};
        single.p_t_w_l_values = {result.best.params.p_t_w_l};
        single.p_dh_buy_values = {result.best.params.p_dh_buy};
        single.dh_share_values = {result.best.dh_share};
        single.replicates_per_cell = 30;
        const CalibrationResult rescore =
            grid_search(single, cfg, market, reference, objective, args.workers);
        result.best.rmse = rescore.best.rmse;
        result.best.mape = rescore.best.mape;
    }

    const fs::path dir = resolve_out_dir(args, "calibration_s" + std::to_string(cfg.seed));
    fs::create_directories(dir);
    write_calibration_table(dir / "calibration_table.csv", result);
    write_best_json(dir / "best.json", result);

    std::printf("wrote %s (%zu cells)\n", dir.string().c_str(), result.table.size());
    std::printf("best: th=%d/%d probs=%.2f/%.2f/%.2f/%.2f buy=%.2f dh=%.2f rmse=%.6f "
                "mape=%.4f\n",
                result.best.params.th_h, result.best.params.th_l,
                result.best.params.p_t_fgi_e, result.best.params.p_t_w_h,
                result.best.params.p_t_fgi_n, result.best.params.p_t_w_l,
                result.best.params.p_dh_buy, result.best.dh_share, result.best.rmse,
                result.best.mape);
    return 0;
}

int run_validate_event(const CLI::App* cmd, CommonArgs& args, RunConfig& cfg,
                       const std::string& reference_path) {
    finalize_config(cmd, args, cfg);
    const std::vector<MarketDay> market = resolve_market(args, cfg);
    const ReferenceSeries reference = load_reference_series(reference_path);
    default_n_initial_from(cmd, reference, cfg);

    const EventValidityReport report =
        validation_event(cfg, market, reference, args.replicates, args.workers);

    const fs::path dir = resolve_out_dir(args, "event_validity_s" + std::to_string(cfg.seed));
    fs::create_directories(dir);
    std::ofstream out(dir / "event_validity.csv");
    out << "t,sim_whale_share,ref_whale_share\n";
    for (const auto& row : report.rows) {
        out << row.t << ',' << csv::format_double(row.simulated) << ','
            << csv::format_double(row.reference) << '\n';
    }
    std::printf("wrote %s\n", (dir / "event_validity.csv").string().c_str());
    std::printf("final whale-share gap: %.4f percentage points\n", report.final_gap_pp);
    return 0;
}

int run_validate_sensitivity(const CLI::App* cmd, CommonArgs& args, RunConfig& cfg,
                             const std::string& reference_path,
                             const std::string& shares_csv) {
    finalize_config(cmd, args, cfg);
    const std::vector<MarketDay> market = resolve_market(args, cfg);
    const ReferenceSeries reference = load_reference_series(reference_path);
    default_n_initial_from(cmd, reference, cfg);
    const std::vector<double> shares = parse_double_list(shares_csv);

    const SensitivityReport report = validation_sensitivity(
        cfg, market, reference, shares, args.replicates, args.workers);

    const fs::path dir = resolve_out_dir(args, "sensitivity_s" + std::to_string(cfg.seed));
    fs::create_directories(dir);
    std::ofstream out(dir / "sensitivity.csv");
    out << "dh_share,delta_gini,delta_nse\n";
    for (const auto& row : report.rows) {
        out << csv::format_double(row.dh_share) << ',' << csv::format_double(row.delta_gini)
            << ',' << csv::format_double(row.delta_nse) << '\n';
        std::printf("dh=%.0f%%  delta_gini=%.6f  delta_nse=%.6f\n", row.dh_share * 100.0,
                    row.delta_gini, row.delta_nse);
    }
    std::printf("wrote %s\n", (dir / "sensitivity.csv").string().c_str());
    return 0;
}

int run_table_whales(const CLI::App* cmd, CommonArgs& args, RunConfig& cfg,
                     const std::string& root, bool run_matrix) {
    finalize_config(cmd, args, cfg);
    const fs::path out_root =
        root.empty() ? resolve_out_dir(args, "whale_table") : fs::path(root);

    struct CellStat {
        double percentage = 0.0;
        double k = 0.0;
        double n = 0.0;
        bool present = false;
    };
    const Scenario scenarios[] = {Scenario::Cronje, Scenario::Bentham, Scenario::Rawls};
    const Preset presets[] = {Preset::High, Preset::Medium, Preset::Low};
    CellStat stats[3][3];

    if (run_matrix) {
        const std::vector<MarketDay> market = resolve_market(args, cfg);
        fs::create_directories(out_root);
        for (int s = 0; s < 3; ++s) {
            for (int p = 0; p < 3; ++p) {
                RunConfig cell = cfg;
                cell.scenario.kind = scenarios[s];
                const BehaviorParams bp = behavior_preset(presets[p]);
                cell.behavior.p_t_fgi_e = bp.p_t_fgi_e;
                cell.behavior.p_t_w_h = bp.p_t_w_h;
                cell.behavior.p_t_fgi_n = bp.p_t_fgi_n;
                cell.behavior.p_t_w_l = bp.p_t_w_l;
                const EnsembleResult ensemble =
                    run_ensemble(cell, market, args.replicates, args.workers);
                const fs::path dir = out_root / (std::string(to_string(scenarios[s])) + "_" +
                                                 to_string(presets[p]));
                fs::create_directories(dir);
                write_ensemble_csv(dir / "ensemble.csv", ensemble);
                write_whales_csv(dir / "whales_final.csv", ensemble);
                double k = 0.0, n = 0.0, share = 0.0;
                for (const auto& w : ensemble.final_whales) {
                    k += static_cast<double>(w.k);
                    n += static_cast<double>(w.n_agents);
                    share += w.share;
                }
                const double reps = static_cast<double>(ensemble.final_whales.size());
                stats[s][p] = {k / n * 100.0, k / reps, n / reps, true};
            }
        }
    } else {
        for (int s = 0; s < 3; ++s) {
            for (int p = 0; p < 3; ++p) {
                const fs::path file = fs::path(root) /
                                      (std::string(to_string(scenarios[s])) + "_" +
                                       to_string(presets[p])) /
                                      "whales_final.csv";
                if (!fs::exists(file)) {
                    throw LoadError(file.string(), 0, "-",
                                    "missing run for the scenario/preset matrix");
                }
                const auto rows = csv::read_rows(file.string());
                double k = 0.0, n = 0.0;
                for (std::size_t i = 1; i < rows.size(); ++i) {
                    k += csv::parse_double(rows[i][2], file.string(),
                                           static_cast<long>(i) + 1, "whale_k");
                    n += csv::parse_double(rows[i][4], file.string(),
                                           static_cast<long>(i) + 1, "n_agents");
                }
                const double reps = static_cast<double>(rows.size() - 1);
                stats[s][p] = {k / n * 100.0, k / reps, n / reps, true};
            }
        }
    }

    fs::create_directories(out_root);
    std::ofstream out(out_root / "whale_table.csv");
    out << "scenario,preset,percentage,whales_mean,agents_mean\n";
    std::printf("share of agents controlling 90%% of supply at t=%d\n", cfg.t_end);
    for (int s = 0; s < 3; ++s) {
        for (int p = 0; p < 3; ++p) {
            const CellStat& c = stats[s][p];
            out << to_string(scenarios[s]) << ',' << to_string(presets[p]) << ','
                << csv::format_double(c.percentage) << ',' << csv::format_double(c.k) << ','
                << csv::format_double(c.n) << '\n';
            std::printf("%-8s %-7s %6.2f%%  (%.0f / %.0f)\n", to_string(scenarios[s]),
                        to_string(presets[p]), c.percentage, c.k, c.n);
        }
    }
    std::printf("wrote %s\n", (out_root / "whale_table.csv").string().c_str());
    return 0;
}

int run_plot_data(const std::string& run_dir, const std::string& reference_path,
                  const std::string& out_dir) {
    const fs::path dir(run_dir);
    const auto rows = csv::read_rows((dir / "ensemble.csv").string());
    if (rows.size() < 2) {
        throw LoadError((dir / "ensemble.csv").string(), 0, "-", "empty ensemble");
    }
    ReferenceSeries reference;
    if (!reference_path.empty()) {
        reference = load_reference_series(reference_path);
    }

    const fs::path out_root = out_dir.empty() ? dir : fs::path(out_dir);
    fs::create_directories(out_root);
    std::ofstream gini_out(out_root / "gini_panel.csv");
    std::ofstream nse_out(out_root / "nse_panel.csv");
    gini_out << "t,mean,std,reference\n";
    nse_out << "t,mean,std,reference\n";
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r[0].find("_pre") != std::string::npos) {
            continue;  // panels carry one row per simulated day
        }
        const ReferencePoint* ref = reference.find(std::stoi(r[0]));
        gini_out << r[0] << ',' << r[1] << ',' << r[2] << ',';
        if (ref != nullptr) gini_out << csv::format_double(ref->gini);
        gini_out << '\n';
        nse_out << r[0] << ',' << r[3] << ',' << r[4] << ',';
        if (ref != nullptr && ref->one_minus_nse) {
            nse_out << csv::format_double(*ref->one_minus_nse);
        }
        nse_out << '\n';
    }
    std::printf("wrote %s and %s\n", (out_root / "gini_panel.csv").string().c_str(),
                (out_root / "nse_panel.csv").string().c_str());
    return 0;
}

int run_synth_data(std::uint64_t seed, int days, double price0, double drift, double vol,
                   double fgi_phi, double fgi_sigma, const std::string& out_path) {
    FgiModel fgi;
    fgi.phi = fgi_phi;
    fgi.sigma = fgi_sigma;
    const std::vector<MarketDay> series =
        synthetic_market_series(seed, days, price0, drift, vol, fgi);
    save_market_series(out_path, series);
    std::printf("wrote %s (%d days)\n", out_path.c_str(), days);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Agent-based token-launch market simulator"};
    app.require_subcommand(1);

    RunConfig cfg;
    CommonArgs args;

    auto* simulate = app.add_subcommand("simulate", "run a Monte-Carlo simulation ensemble");
    add_common_flags(simulate, args, cfg);
    bool record_fills = false;
    simulate->add_flag("--record-fills", record_fills, "write per-day fill logs");

    auto* calibrate = app.add_subcommand("calibrate", "grid-search behavioral parameters");
    std::string reference_path, shares_csv = "0.1,0.3,0.5", objective_name = "rmse";
    std::string grid_th_h, grid_th_l, grid_pe, grid_ph, grid_pn, grid_pl, grid_pb, grid_ds;
    GridSpec grid;
    bool refine = false;
    add_common_flags(calibrate, args, cfg);
    calibrate->add_option("--reference", reference_path, "reference series CSV")->required();
    calibrate->add_option("--objective-metric", objective_name, "rmse | mape")
        ->check(CLI::IsMember({"rmse", "mape"}));
    calibrate->add_option("--th-h-values", grid_th_h, "comma list, e.g. 60,70,80,90");
    calibrate->add_option("--th-l-values", grid_th_l, "comma list");
    calibrate->add_option("--p-fgi-e-values", grid_pe, "comma list");
    calibrate->add_option("--p-w-h-values", grid_ph, "comma list");
    calibrate->add_option("--p-fgi-n-values", grid_pn, "comma list");
    calibrate->add_option("--p-w-l-values", grid_pl, "comma list");
    calibrate->add_option("--p-dh-buy-values", grid_pb, "comma list");
    calibrate->add_option("--dh-share-values", grid_ds, "comma list");
    calibrate->add_option("--cell-replicates", grid.replicates_per_cell,
                          "ensemble size per cell");
    calibrate->add_option("--max-cells", grid.max_cells,
                          "coarsen the grid until it fits this budget (0 = unlimited)");
    calibrate->add_flag("--refine", refine, "half-step refinement pass around the incumbent");

    auto* validate_event = app.add_subcommand(
        "validate-event", "whale-share trajectory vs the extracted reference");
    std::string event_reference;
    add_common_flags(validate_event, args, cfg);
    validate_event->add_option("--reference", event_reference, "reference series CSV")
        ->required();

    auto* validate_sens = app.add_subcommand(
        "validate-sensitivity", "metric gaps for alternative DH/RT population ratios");
    std::string sens_reference;
    add_common_flags(validate_sens, args, cfg);
    validate_sens->add_option("--reference", sens_reference, "reference series CSV")
        ->required();
    validate_sens->add_option("--dh-shares", shares_csv, "comma list of DH shares");

    auto* table_whales = app.add_subcommand(
        "table-whales", "3x3 scenario/preset whale-concentration table");
    std::string whales_root;
    bool run_matrix = false;
    add_common_flags(table_whales, args, cfg);
    table_whales->add_option("--root", whales_root,
                             "directory of <scenario>_<preset> runs to aggregate");
    table_whales->add_flag("--run-matrix", run_matrix, "run the nine ensembles now");

    auto* plot_data = app.add_subcommand("plot-data", "per-figure CSV panels from a run");
    std::string plot_run, plot_reference, plot_out;
    plot_data->add_option("--run", plot_run, "results directory with ensemble.csv")
        ->required();
    plot_data->add_option("--reference", plot_reference, "reference overlay CSV");
    plot_data->add_option("--out", plot_out, "output directory (default: the run dir)");

    auto* synth_data = app.add_subcommand("synth-data", "write a synthetic market CSV");
    std::uint64_t synth_seed = 2020;
    int synth_days = 348;
    double synth_price0 = 30000.0, synth_drift = 0.0, synth_vol = 0.03;
    double synth_phi = 0.95, synth_sigma = 10.0;
    std::string synth_out = "market_synthetic.csv";
    synth_data->add_option("--seed", synth_seed, "series seed");
    synth_data->add_option("--days", synth_days, "number of days");
    synth_data->add_option("--price0", synth_price0, "starting price");
    synth_data->add_option("--drift", synth_drift, "daily log-price drift");
    synth_data->add_option("--vol", synth_vol, "daily log-price volatility");
    synth_data->add_option("--fgi-phi", synth_phi, "FGI AR(1) coefficient");
    synth_data->add_option("--fgi-sigma", synth_sigma, "FGI AR(1) noise std");
    synth_data->add_option("--out", synth_out, "output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (simulate->parsed()) {
            cfg.record_fills = record_fills;
            return run_simulate(simulate, args, cfg);
        }
        if (calibrate->parsed()) {
            if (!grid_th_h.empty()) grid.th_h_values = parse_int_list(grid_th_h);
            if (!grid_th_l.empty()) grid.th_l_values = parse_int_list(grid_th_l);
            if (!grid_pe.empty()) grid.p_t_fgi_e_values = parse_double_list(grid_pe);
            if (!grid_ph.empty()) grid.p_t_w_h_values = parse_double_list(grid_ph);
            if (!grid_pn.empty()) grid.p_t_fgi_n_values = parse_double_list(grid_pn);
            if (!grid_pl.empty()) grid.p_t_w_l_values = parse_double_list(grid_pl);
            if (!grid_pb.empty()) grid.p_dh_buy_values = parse_double_list(grid_pb);
            if (!grid_ds.empty()) grid.dh_share_values = parse_double_list(grid_ds);
            return run_calibrate(calibrate, args, cfg, reference_path, grid, refine,
                                 objective_name);
        }
        if (validate_event->parsed()) {
            return run_validate_event(validate_event, args, cfg, event_reference);
        }
        if (validate_sens->parsed()) {
            return run_validate_sensitivity(validate_sens, args, cfg, sens_reference,
                                            shares_csv);
        }
        if (table_whales->parsed()) {
            return run_table_whales(table_whales, args, cfg, whales_root, run_matrix);
        }
        if (plot_data->parsed()) {
            return run_plot_data(plot_run, plot_reference, plot_out);
        }
        if (synth_data->parsed()) {
            return run_synth_data(synth_seed, synth_days, synth_price0, synth_drift,
                                  synth_vol, synth_phi, synth_sigma, synth_out);
        }
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const LoadError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::logic_error& e) {
        std::cerr << "internal invariant violation: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

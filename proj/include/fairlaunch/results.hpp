#pragma once

// Result-directory writers and the JSON form of a run configuration.
// Every simulate invocation produces config.json (exact echo, including
// the generator name), metrics.csv (replicate 0), ensemble.csv and
// whales_final.csv; fill logs are opt-in.

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "fairlaunch/calibration.hpp"
#include "fairlaunch/csv.hpp"
#include "fairlaunch/engine.hpp"

namespace fairlaunch {

using json = nlohmann::json;

// ---- config <-> json ------------------------------------------------------------

inline json to_json(const EntrantModel& e) {
    return json{{"kind", to_string(e.dist.kind)},
                {"kappa", e.dist.kappa},
                {"location", e.dist.location},
                {"scale", e.dist.scale},
                {"scale_divisor", e.scale_divisor}};
}

inline json to_json(const RunConfig& cfg) {
    return json{
        {"seed", cfg.seed},
        {"t_start", cfg.t_start},
        {"t_end", cfg.t_end},
        {"rng", RandomSource::generator_name()},
        {"scenario",
         {{"kind", to_string(cfg.scenario.kind)},
          {"lomax_scale", cfg.scenario.lomax_scale},
          {"lomax_shape", cfg.scenario.lomax_shape},
          {"tn_mu", cfg.scenario.tn_mu},
          {"tn_sigma", cfg.scenario.tn_sigma},
          {"total_supply", cfg.scenario.total_supply}}},
        {"population",
         {{"n_initial", cfg.population.n_initial},
          {"dh_share", cfg.population.dh_share},
          {"pareto_shape", cfg.population.pareto_shape},
          {"pareto_min", cfg.population.pareto_min},
          {"exp_rate", cfg.population.exp_rate},
          {"rich_share", cfg.population.rich_share}}},
        {"behavior",
         {{"p_dh_buy", cfg.behavior.p_dh_buy},
          {"p_rt_trade", cfg.behavior.p_rt_trade},
          {"p_rt_buy", cfg.behavior.p_rt_buy},
          {"th_h", cfg.behavior.th_h},
          {"th_l", cfg.behavior.th_l},
          {"p_t_fgi_e", cfg.behavior.p_t_fgi_e},
          {"p_t_w_h", cfg.behavior.p_t_w_h},
          {"p_t_fgi_n", cfg.behavior.p_t_fgi_n},
          {"p_t_w_l", cfg.behavior.p_t_w_l},
          {"wealth_percentile", cfg.behavior.wealth_percentile}}},
        {"entrants", to_json(cfg.entrants)},
        {"include_zero_holders", cfg.include_zero_holders},
        {"record_fills", cfg.record_fills}};
}

namespace detail {

template <typename T>
void get_if_present(const json& j, const char* key, T& dst) {
    if (j.contains(key)) {
        dst = j.at(key).get<T>();
    }
}

} // namespace detail

/// Merge-patch: only keys present in j override the current values.
inline void apply_json(const json& j, RunConfig& cfg) {
    detail::get_if_present(j, "seed", cfg.seed);
    detail::get_if_present(j, "t_start", cfg.t_start);
    detail::get_if_present(j, "t_end", cfg.t_end);
    if (j.contains("scenario")) {
        const json& s = j.at("scenario");
        if (s.contains("kind")) {
            cfg.scenario.kind = scenario_from_string(s.at("kind").get<std::string>());
        }
        detail::get_if_present(s, "lomax_scale", cfg.scenario.lomax_scale);
        detail::get_if_present(s, "lomax_shape", cfg.scenario.lomax_shape);
        detail::get_if_present(s, "tn_mu", cfg.scenario.tn_mu);
        detail::get_if_present(s, "tn_sigma", cfg.scenario.tn_sigma);
        detail::get_if_present(s, "total_supply", cfg.scenario.total_supply);
    }
    if (j.contains("population")) {
        const json& p = j.at("population");
        detail::get_if_present(p, "n_initial", cfg.population.n_initial);
        detail::get_if_present(p, "dh_share", cfg.population.dh_share);
        detail::get_if_present(p, "pareto_shape", cfg.population.pareto_shape);
        detail::get_if_present(p, "pareto_min", cfg.population.pareto_min);
        detail::get_if_present(p, "exp_rate", cfg.population.exp_rate);
        detail::get_if_present(p, "rich_share", cfg.population.rich_share);
    }
    if (j.contains("behavior")) {
        const json& b = j.at("behavior");
        detail::get_if_present(b, "p_dh_buy", cfg.behavior.p_dh_buy);
        detail::get_if_present(b, "p_rt_trade", cfg.behavior.p_rt_trade);
        detail::get_if_present(b, "p_rt_buy", cfg.behavior.p_rt_buy);
        detail::get_if_present(b, "th_h", cfg.behavior.th_h);
        detail::get_if_present(b, "th_l", cfg.behavior.th_l);
        detail::get_if_present(b, "p_t_fgi_e", cfg.behavior.p_t_fgi_e);
        detail::get_if_present(b, "p_t_w_h", cfg.behavior.p_t_w_h);
        detail::get_if_present(b, "p_t_fgi_n", cfg.behavior.p_t_fgi_n);
        detail::get_if_present(b, "p_t_w_l", cfg.behavior.p_t_w_l);
        detail::get_if_present(b, "wealth_percentile", cfg.behavior.wealth_percentile);
    }
    if (j.contains("entrants")) {
        const json& e = j.at("entrants");
        detail::get_if_present(e, "kappa", cfg.entrants.dist.kappa);
        detail::get_if_present(e, "location", cfg.entrants.dist.location);
        detail::get_if_present(e, "scale", cfg.entrants.dist.scale);
        detail::get_if_present(e, "scale_divisor", cfg.entrants.scale_divisor);
    }
    detail::get_if_present(j, "include_zero_holders", cfg.include_zero_holders);
    detail::get_if_present(j, "record_fills", cfg.record_fills);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw LoadError(path, 0, "-", "cannot open config file");
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw LoadError(path, 0, "-", std::string("invalid JSON: ") + e.what());
    }
    RunConfig cfg;
    apply_json(j, cfg);
    return cfg;
}

// ---- result writers ---------------------------------------------------------------

inline void write_config_json(const std::filesystem::path& path, const RunConfig& cfg,
                              int replicates, int workers,
                              const json& market_source = json()) {
    json j = to_json(cfg);
    j["replicates"] = replicates;
    j["workers"] = workers;
    if (!market_source.is_null()) {
        j["market_data"] = market_source;
    }
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

inline void write_metrics_csv(const std::filesystem::path& path, const RunResult& result) {
    std::ofstream out(path);
    out << "t,gini,one_minus_nse,whale_share,n_agents\n";
    const auto row = [&](const std::string& label, const MetricPoint& p) {
        out << label << ',' << csv::format_double(p.gini) << ','
            << csv::format_double(p.one_minus_nse) << ','
            << csv::format_double(p.whale_share) << ',' << p.n_agents << '\n';
    };
    row(std::to_string(result.pre_trade.t) + "_pre", result.pre_trade);
    for (const auto& p : result.series) {
        row(std::to_string(p.t), p);
    }
}

inline void write_ensemble_csv(const std::filesystem::path& path,
                               const EnsembleResult& ensemble) {
    std::ofstream out(path);
    out << "t,gini_mean,gini_std,nse_mean,nse_std,whale_mean,whale_std,n_agents_mean\n";
    for (const auto& r : ensemble.rows) {
        out << r.label << ',' << csv::format_double(r.gini_mean) << ','
            << csv::format_double(r.gini_std) << ',' << csv::format_double(r.nse_mean) << ','
            << csv::format_double(r.nse_std) << ',' << csv::format_double(r.whale_mean) << ','
            << csv::format_double(r.whale_std) << ','
            << csv::format_double(r.n_agents_mean) << '\n';
    }
}

inline void write_whales_csv(const std::filesystem::path& path,
                             const EnsembleResult& ensemble) {
    std::ofstream out(path);
    out << "replicate,whale_share,whale_k,n_holders,n_agents\n";
    for (std::size_t k = 0; k < ensemble.final_whales.size(); ++k) {
        const WhaleStat& w = ensemble.final_whales[k];
        out << k << ',' << csv::format_double(w.share) << ',' << w.k << ',' << w.n_holders
            << ',' << w.n_agents << '\n';
    }
}

inline void write_fill_log(const std::filesystem::path& dir, const RunResult& result) {
    for (const auto& [t, fills] : result.fill_log) {
        if (fills.empty()) continue;
        std::ofstream out(dir / ("fills_" + std::to_string(t) + ".csv"));
        out << "t,buyer,seller,tokens,fiat,price\n";
        for (const auto& f : fills) {
            out << t << ',' << f.buyer_id << ',' << f.seller_id << ','
                << csv::format_double(f.tokens) << ',' << csv::format_double(f.fiat) << ','
                << csv::format_double(f.price) << '\n';
        }
    }
}

inline void write_calibration_table(const std::filesystem::path& path,
                                    const CalibrationResult& result) {
    std::ofstream out(path);
    out << "th_h,th_l,p_t_fgi_e,p_t_w_h,p_t_fgi_n,p_t_w_l,p_dh_buy,dh_share,rmse,mape,"
           "mape_skipped\n";
    for (const auto& c : result.table) {
        out << c.params.th_h << ',' << c.params.th_l << ','
            << csv::format_double(c.params.p_t_fgi_e) << ','
            << csv::format_double(c.params.p_t_w_h) << ','
            << csv::format_double(c.params.p_t_fgi_n) << ','
            << csv::format_double(c.params.p_t_w_l) << ','
            << csv::format_double(c.params.p_dh_buy) << ','
            << csv::format_double(c.dh_share) << ',' << csv::format_double(c.rmse) << ','
            << csv::format_double(c.mape) << ',' << c.mape_skipped << '\n';
    }
}

inline void write_best_json(const std::filesystem::path& path,
                            const CalibrationResult& result) {
    const CalibrationCell& b = result.best;
    json j{{"objective", to_string(result.objective)},
           {"th_h", b.params.th_h},
           {"th_l", b.params.th_l},
           {"p_t_fgi_e", b.params.p_t_fgi_e},
           {"p_t_w_h", b.params.p_t_w_h},
           {"p_t_fgi_n", b.params.p_t_fgi_n},
           {"p_t_w_l", b.params.p_t_w_l},
           {"p_dh_buy", b.params.p_dh_buy},
           {"dh_share", b.dh_share},
           {"rmse", b.rmse},
           {"mape", b.mape},
           {"cells_evaluated", result.table.size()},
           {"infeasible_skipped", result.infeasible_skipped}};
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

} // namespace fairlaunch

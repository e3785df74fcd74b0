#pragma once

// Per-agent, per-day trading decisions. Random traders flip fixed coins;
// diamond hands trade with a probability conditioned on the day's
// sentiment state and their own wealth class. The four conditional
// probabilities in the parameter table are marginal on one factor each, so
// the realized-state cell probability is their arithmetic mean; averaging
// the four cells with equal weights recovers the table's aggregate P(T).

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairlaunch/rng.hpp"
#include "fairlaunch/scenario.hpp"

namespace fairlaunch {

struct BehaviorParams {
    double p_dh_buy = 0.7;
    double p_rt_trade = 0.5;
    double p_rt_buy = 0.5;
    int th_h = 80;
    int th_l = 20;
    double p_t_fgi_e = 0.7;  // trade prob. under extreme sentiment
    double p_t_w_h = 0.7;    // trade prob. under high wealth
    double p_t_fgi_n = 0.8;  // trade prob. under normal sentiment
    double p_t_w_l = 0.9;    // trade prob. under low wealth
    double wealth_percentile = 0.90;

    void validate() const {
        for (double p : {p_dh_buy, p_rt_trade, p_rt_buy, p_t_fgi_e, p_t_w_h, p_t_fgi_n,
                         p_t_w_l, wealth_percentile}) {
            if (p < 0.0 || p > 1.0) {
                throw std::invalid_argument("behavior probabilities must be in [0,1]");
            }
        }
        if (th_l < 0 || th_h > 100 || th_l >= th_h) {
            throw std::invalid_argument("FGI thresholds require 0 <= th_l < th_h <= 100");
        }
    }
};

enum class Preset { High, Medium, Low };

inline const char* to_string(Preset p) {
    switch (p) {
        case Preset::High: return "high";
        case Preset::Medium: return "medium";
        case Preset::Low: return "low";
    }
    return "?";
}

inline Preset preset_from_string(const std::string& s) {
    if (s == "high") return Preset::High;
    if (s == "medium") return Preset::Medium;
    if (s == "low") return Preset::Low;
    throw std::invalid_argument("unknown preset '" + s + "' (high|medium|low)");
}

/// The three published trading-probability columns.
inline BehaviorParams behavior_preset(Preset p) {
    BehaviorParams params;
    switch (p) {
        case Preset::High:
            params.p_t_fgi_e = 0.7;
            params.p_t_w_h = 0.7;
            params.p_t_fgi_n = 0.8;
            params.p_t_w_l = 0.9;
            break;
        case Preset::Medium:
            params.p_t_fgi_e = 0.3;
            params.p_t_w_h = 0.4;
            params.p_t_fgi_n = 0.3;
            params.p_t_w_l = 0.5;
            break;
        case Preset::Low:
            params.p_t_fgi_e = 0.1;
            params.p_t_w_h = 0.1;
            params.p_t_fgi_n = 0.2;
            params.p_t_w_l = 0.2;
            break;
    }
    return params;
}

enum class FgiState { Extreme, Normal };
enum class WealthState { High, Low };
enum class Action { NoTrade, Buy, Sell };

/// Extreme iff fgi > th_h or fgi < th_l; both thresholds themselves are Normal.
inline FgiState classify_fgi(int fgi, const BehaviorParams& params) {
    if (fgi < 0 || fgi > 100) {
        throw std::invalid_argument("classify_fgi: fgi must be in [0,100]");
    }
    return (fgi > params.th_h || fgi < params.th_l) ? FgiState::Extreme : FgiState::Normal;
}

/// High iff fiat is strictly above the percentile threshold.
inline WealthState classify_wealth(double agent_fiat, double fiat_percentile) {
    return agent_fiat > fiat_percentile ? WealthState::High : WealthState::Low;
}

/// Threshold such that floor((1-q)*n) of n distinct values lie strictly above.
inline double wealth_percentile_threshold(std::span<const double> fiat, double q) {
    if (fiat.empty()) {
        throw std::invalid_argument("wealth_percentile_threshold: empty population");
    }
    if (q < 0.0 || q > 1.0) {
        throw std::invalid_argument("wealth_percentile_threshold: q must be in [0,1]");
    }
    std::vector<double> sorted(fiat.begin(), fiat.end());
    const std::size_t above = static_cast<std::size_t>(
        std::floor((1.0 - q) * static_cast<double>(sorted.size())));
    const std::size_t idx = sorted.size() - 1 - std::min(above, sorted.size() - 1);
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(idx), sorted.end());
    return sorted[idx];
}

/// Joint-conditional trade probability for the realized (sentiment, wealth)
/// state: the mean of the two marginal conditionals.
inline double dh_trade_probability(FgiState fgi, WealthState wealth,
                                   const BehaviorParams& params) {
    const double p_fgi = fgi == FgiState::Extreme ? params.p_t_fgi_e : params.p_t_fgi_n;
    const double p_wealth = wealth == WealthState::High ? params.p_t_w_h : params.p_t_w_l;
    return 0.5 * (p_fgi + p_wealth);
}

/// Trade/side decision with feasibility guards: a draw the agent cannot
/// honor (sell with no tokens, buy with no fiat) becomes NoTrade.
inline Action decide_action(RandomSource& rng, const Agent& agent, FgiState fgi,
                            WealthState wealth, const BehaviorParams& params) {
    double p_trade, p_buy;
    if (agent.strategy == Strategy::RandomTrader) {
        p_trade = params.p_rt_trade;
        p_buy = params.p_rt_buy;
    } else {
        p_trade = dh_trade_probability(fgi, wealth, params);
        p_buy = params.p_dh_buy;
    }
    if (!sample_bernoulli(rng, p_trade)) {
        return Action::NoTrade;
    }
    const Action side = sample_bernoulli(rng, p_buy) ? Action::Buy : Action::Sell;
    if (side == Action::Buy && agent.fiat <= 0.0) {
        return Action::NoTrade;
    }
    if (side == Action::Sell && agent.tokens <= 0.0) {
        return Action::NoTrade;
    }
    return side;
}

/// Order size: N(holding/2, sigma_ratio*holding/2) clamped to (0, holding].
/// A nonpositive raw draw returns 0, which suppresses the order.
inline double order_size(RandomSource& rng, double holding, double sigma_ratio = 1.0 / 3.0) {
    if (!(holding > 0.0)) {
        throw std::invalid_argument("order_size: holding must be > 0");
    }
    const double mean = holding / 2.0;
    const double raw =
        sigma_ratio > 0.0 ? sample_normal(rng, mean, mean * sigma_ratio) : mean;
    if (raw <= 0.0) {
        return 0.0;
    }
    return std::min(raw, holding);
}

} // namespace fairlaunch

#pragma once

// Initial population construction: fiat endowments (Pareto top decile +
// exponential bulk), the three launch allocations, strategy assignment,
// and per-day entrant batches.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairlaunch/distributions.hpp"
#include "fairlaunch/rng.hpp"

namespace fairlaunch {

enum class Strategy { DiamondHand, RandomTrader };

struct Agent {
    long id = 0;
    Strategy strategy = Strategy::RandomTrader;
    double fiat = 0.0;    // f_i(t), USD
    double tokens = 0.0;  // y_i(t), TKN
    int entry_day = 0;
};

enum class Scenario { Cronje, Bentham, Rawls };

inline const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::Cronje: return "cronje";
        case Scenario::Bentham: return "bentham";
        case Scenario::Rawls: return "rawls";
    }
    return "?";
}

inline Scenario scenario_from_string(const std::string& s) {
    if (s == "cronje" || s == "s0" || s == "S0") return Scenario::Cronje;
    if (s == "bentham" || s == "s1" || s == "S1") return Scenario::Bentham;
    if (s == "rawls" || s == "s2" || s == "S2") return Scenario::Rawls;
    throw std::invalid_argument("unknown scenario '" + s + "'");
}

struct ScenarioSpec {
    Scenario kind = Scenario::Cronje;
    double lomax_scale = 0.4;   // Cronje
    double lomax_shape = 0.5;   // Cronje
    double tn_mu = 0.103;       // Rawls
    double tn_sigma = 0.192;    // Rawls
    double total_supply = 36666.0;
};

struct PopulationConfig {
    long n_initial = 5000;
    double dh_share = 0.3;
    double pareto_shape = 2.1;
    double pareto_min = 400000.0;
    double exp_rate = 1.0 / 40000.0;
    double rich_share = 0.1;

    void validate() const {
        if (n_initial < 1) throw std::invalid_argument("n_initial must be >= 1");
        if (dh_share < 0.0 || dh_share > 1.0)
            throw std::invalid_argument("dh_share must be in [0,1]");
        if (rich_share < 0.0 || rich_share > 1.0)
            throw std::invalid_argument("rich_share must be in [0,1]");
        if (pareto_shape <= 0.0 || pareto_min <= 0.0 || exp_rate <= 0.0)
            throw std::invalid_argument("fiat endowment parameters must be > 0");
    }
};

namespace detail {

// Fisher-Yates driven by the owned stream.
template <typename T>
void shuffle(RandomSource& rng, std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j =
            static_cast<std::size_t>(rng.uniform01() * static_cast<double>(i));
        std::swap(items[i - 1], items[j < i ? j : i - 1]);
    }
}

} // namespace detail

/// Fiat endowments: exactly round(rich_share*n) Pareto draws, the rest
/// exponential, in shuffled order.
inline std::vector<double> endow_fiat(RandomSource& rng, const PopulationConfig& cfg, long n) {
    if (n < 1) {
        throw std::invalid_argument("endow_fiat: n must be >= 1");
    }
    const long n_rich = std::lround(cfg.rich_share * static_cast<double>(n));
    std::vector<double> fiat;
    fiat.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n_rich; ++i) {
        fiat.push_back(sample_pareto(rng, cfg.pareto_min, cfg.pareto_shape));
    }
    for (long i = n_rich; i < n; ++i) {
        fiat.push_back(sample_exponential(rng, cfg.exp_rate));
    }
    detail::shuffle(rng, fiat);
    return fiat;
}

/// Raw per-agent weights from the scenario's distribution, rescaled so the
/// sum is exactly total_supply (last element absorbs the rounding residue).
inline std::vector<double> allocate_tokens(RandomSource& rng, const ScenarioSpec& spec, long n) {
    if (n < 1) {
        throw std::invalid_argument("allocate_tokens: n must be >= 1");
    }
    std::vector<double> weights(static_cast<std::size_t>(n));
    if (spec.kind == Scenario::Bentham) {
        // Identical shares, bit for bit, so the launch-day Gini is exactly 0.
        const double share = spec.total_supply / static_cast<double>(n);
        for (auto& w : weights) w = share;
        return weights;
    }
    for (int attempt = 0;; ++attempt) {
        double sum = 0.0;
        for (auto& w : weights) {
            switch (spec.kind) {
                case Scenario::Cronje:
                    w = sample_lomax(rng, spec.lomax_scale, spec.lomax_shape);
                    break;
                case Scenario::Bentham:
                    w = 1.0;
                    break;
                case Scenario::Rawls:
                    w = sample_trunc_normal(rng, spec.tn_mu, spec.tn_sigma, 0.0,
                                            std::numeric_limits<double>::infinity());
                    break;
            }
            sum += w;
        }
        if (sum > 0.0) {
            double allocated = 0.0;
            for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
                weights[i] = weights[i] / sum * spec.total_supply;
                allocated += weights[i];
            }
            weights.back() = spec.total_supply - allocated;
            return weights;
        }
        if (attempt >= 10) {
            throw std::runtime_error("allocate_tokens: drew an all-zero weight vector 10 times");
        }
    }
}

/// Exactly round(dh_share*n) DiamondHand agents, picked independently of
/// wealth and tokens.
inline void assign_strategies(RandomSource& rng, const PopulationConfig& cfg,
                              std::span<Agent> agents) {
    if (agents.empty()) {
        throw std::invalid_argument("assign_strategies: empty population");
    }
    const long n = static_cast<long>(agents.size());
    const long n_dh = std::lround(cfg.dh_share * static_cast<double>(n));
    std::vector<long> order(agents.size());
    std::iota(order.begin(), order.end(), 0L);
    detail::shuffle(rng, order);
    for (long i = 0; i < n; ++i) {
        agents[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])].strategy =
            i < n_dh ? Strategy::DiamondHand : Strategy::RandomTrader;
    }
}

/// New market entrants: fiat-only, strategies in the configured proportion,
/// ids assigned densely from first_id.
inline std::vector<Agent> spawn_entrants(RandomSource& rng, const PopulationConfig& cfg,
                                         int day, long count, long first_id) {
    if (count < 0) {
        throw std::invalid_argument("spawn_entrants: count must be >= 0");
    }
    std::vector<Agent> entrants;
    if (count == 0) {
        return entrants;
    }
    const std::vector<double> fiat = endow_fiat(rng, cfg, count);
    entrants.resize(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
        auto& a = entrants[static_cast<std::size_t>(i)];
        a.id = first_id + i;
        a.fiat = fiat[static_cast<std::size_t>(i)];
        a.tokens = 0.0;
        a.entry_day = day;
    }
    assign_strategies(rng, cfg, entrants);
    return entrants;
}

/// Full t_start population: endowments, scenario allocation, strategies.
inline std::vector<Agent> build_initial_population(RandomSource& rng, const ScenarioSpec& spec,
                                                   const PopulationConfig& cfg, int day) {
    cfg.validate();
    const std::vector<double> fiat = endow_fiat(rng, cfg, cfg.n_initial);
    const std::vector<double> tokens = allocate_tokens(rng, spec, cfg.n_initial);
    std::vector<Agent> agents(static_cast<std::size_t>(cfg.n_initial));
    for (long i = 0; i < cfg.n_initial; ++i) {
        auto& a = agents[static_cast<std::size_t>(i)];
        a.id = i;
        a.fiat = fiat[static_cast<std::size_t>(i)];
        a.tokens = tokens[static_cast<std::size_t>(i)];
        a.entry_day = day;
    }
    assign_strategies(rng, cfg, agents);
    return agents;
}

} // namespace fairlaunch

#pragma once

// Exhaustive grid search over the behavioral parameters, scored by
// RMSE/MAPE between the ensemble-mean Gini series and the reference Gini
// series. Cells are independent (seeded from the cell index), evaluated by
// a worker pool and reduced in cell order, so the full table is
// reproducible and the argmin tie-break is lexicographic.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fairlaunch/data.hpp"
#include "fairlaunch/engine.hpp"

namespace fairlaunch {

inline double rmse(std::span<const double> actual, std::span<const double> simulated) {
    if (actual.size() != simulated.size() || actual.empty()) {
        throw std::invalid_argument("rmse: series must be nonempty and equal length");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double d = actual[i] - simulated[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(actual.size()));
}

struct MapeResult {
    double value = 0.0;    // percent
    long skipped = 0;      // zero-valued actuals excluded from the average
};

/// Mean absolute percentage error. Zero actuals are undefined under the
/// percentage form and are skipped with a count.
inline MapeResult mape_detail(std::span<const double> actual,
                              std::span<const double> simulated) {
    if (actual.size() != simulated.size() || actual.empty()) {
        throw std::invalid_argument("mape: series must be nonempty and equal length");
    }
    double sum = 0.0;
    long used = 0;
    long skipped = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] == 0.0) {
            ++skipped;
            continue;
        }
        sum += std::abs((actual[i] - simulated[i]) / actual[i]);
        ++used;
    }
    if (used == 0) {
        throw std::invalid_argument("mape: every actual value is zero");
    }
    return {100.0 * sum / static_cast<double>(used), skipped};
}

inline double mape(std::span<const double> actual, std::span<const double> simulated) {
    return mape_detail(actual, simulated).value;
}

enum class Objective { RMSE, MAPE };

inline const char* to_string(Objective o) {
    return o == Objective::RMSE ? "rmse" : "mape";
}

/// Value lists per calibratable parameter. Singleton lists pin a parameter.
/// Cells with th_l >= th_h are infeasible and skipped.
struct GridSpec {
    std::vector<int> th_h_values{80};
    std::vector<int> th_l_values{20};
    std::vector<double> p_t_fgi_e_values{0.7};
    std::vector<double> p_t_w_h_values{0.7};
    std::vector<double> p_t_fgi_n_values{0.8};
    std::vector<double> p_t_w_l_values{0.9};
    std::vector<double> p_dh_buy_values{0.7};
    std::vector<double> dh_share_values{0.3};
    int replicates_per_cell = 5;
    long max_cells = 0;  // 0 = unlimited

    long product_size() const {
        long cells = 1;
        for (std::size_t n : {th_h_values.size(), th_l_values.size(), p_t_fgi_e_values.size(),
                              p_t_w_h_values.size(), p_t_fgi_n_values.size(),
                              p_t_w_l_values.size(), p_dh_buy_values.size(),
                              dh_share_values.size()}) {
            if (n == 0) {
                throw std::invalid_argument("GridSpec: empty value list");
            }
            cells *= static_cast<long>(n);
        }
        return cells;
    }
};

struct CalibrationCell {
    BehaviorParams params;
    double dh_share = 0.3;
    double rmse = 0.0;
    double mape = 0.0;
    long mape_skipped = 0;
};

struct CalibrationResult {
    CalibrationCell best;
    std::vector<CalibrationCell> table;  // lexicographic cell order
    Objective objective = Objective::RMSE;
    long infeasible_skipped = 0;
};

namespace detail {

// Every-other-value thinning (endpoints kept) until the grid fits the cap.
inline void coarsen(std::vector<double>& values) {
    if (values.size() < 3) return;
    std::vector<double> kept;
    for (std::size_t i = 0; i < values.size(); i += 2) {
        kept.push_back(values[i]);
    }
    if (kept.back() != values.back()) {
        kept.push_back(values.back());
    }
    values = kept;
}

inline void coarsen(std::vector<int>& values) {
    if (values.size() < 3) return;
    std::vector<int> kept;
    for (std::size_t i = 0; i < values.size(); i += 2) {
        kept.push_back(values[i]);
    }
    if (kept.back() != values.back()) {
        kept.push_back(values.back());
    }
    values = kept;
}

} // namespace detail

/// Thin the densest axes until the cell count respects spec.max_cells.
inline GridSpec enforce_cell_budget(GridSpec spec) {
    if (spec.max_cells <= 0) {
        return spec;
    }
    for (int guard = 0; spec.product_size() > spec.max_cells && guard < 64; ++guard) {
        std::size_t densest = 0;
        int which = -1;
        const auto consider = [&](std::size_t size, int id) {
            if (size > densest) {
                densest = size;
                which = id;
            }
        };
        consider(spec.p_t_fgi_e_values.size(), 0);
        consider(spec.p_t_w_h_values.size(), 1);
        consider(spec.p_t_fgi_n_values.size(), 2);
        consider(spec.p_t_w_l_values.size(), 3);
        consider(spec.p_dh_buy_values.size(), 4);
        consider(spec.dh_share_values.size(), 5);
        consider(spec.th_h_values.size(), 6);
        consider(spec.th_l_values.size(), 7);
        if (densest < 3) {
            throw std::invalid_argument(
                "GridSpec: max_cells cannot be met even after coarsening");
        }
        switch (which) {
            case 0: detail::coarsen(spec.p_t_fgi_e_values); break;
            case 1: detail::coarsen(spec.p_t_w_h_values); break;
            case 2: detail::coarsen(spec.p_t_fgi_n_values); break;
            case 3: detail::coarsen(spec.p_t_w_l_values); break;
            case 4: detail::coarsen(spec.p_dh_buy_values); break;
            case 5: detail::coarsen(spec.dh_share_values); break;
            case 6: detail::coarsen(spec.th_h_values); break;
            case 7: detail::coarsen(spec.th_l_values); break;
            default: break;
        }
    }
    return spec;
}

/// Exhaustive search; returns the argmin under the chosen objective with
/// the full per-cell table. Reference days absent from the simulated
/// window are ignored; there must be at least one overlapping day.
inline CalibrationResult grid_search(const GridSpec& grid_in, const RunConfig& base,
                                     std::span<const MarketDay> market,
                                     const ReferenceSeries& reference, Objective objective,
                                     int workers = 0) {
    const GridSpec grid = enforce_cell_budget(grid_in);
    base.validate();

    std::vector<int> ref_days;
    std::vector<double> ref_gini;
    for (const auto& p : reference.points) {
        if (p.t >= base.t_start && p.t <= base.t_end) {
            ref_days.push_back(p.t);
            ref_gini.push_back(p.gini);
        }
    }
    if (ref_days.empty()) {
        throw std::invalid_argument("grid_search: reference does not cover the window");
    }

    struct CellSpec {
        BehaviorParams params;
        double dh_share;
    };
    std::vector<CellSpec> cells;
    long infeasible = 0;
    for (int th_h : grid.th_h_values)
        for (int th_l : grid.th_l_values) {
            if (th_l >= th_h) {
                infeasible += static_cast<long>(
                    grid.p_t_fgi_e_values.size() * grid.p_t_w_h_values.size() *
                    grid.p_t_fgi_n_values.size() * grid.p_t_w_l_values.size() *
                    grid.p_dh_buy_values.size() * grid.dh_share_values.size());
                continue;
            }
            for (double pe : grid.p_t_fgi_e_values)
                for (double ph : grid.p_t_w_h_values)
                    for (double pn : grid.p_t_fgi_n_values)
                        for (double pl : grid.p_t_w_l_values)
                            for (double pb : grid.p_dh_buy_values)
                                for (double ds : grid.dh_share_values) {
                                    CellSpec cell;
                                    cell.params = base.behavior;
                                    cell.params.th_h = th_h;
                                    cell.params.th_l = th_l;
                                    cell.params.p_t_fgi_e = pe;
                                    cell.params.p_t_w_h = ph;
                                    cell.params.p_t_fgi_n = pn;
                                    cell.params.p_t_w_l = pl;
                                    cell.params.p_dh_buy = pb;
                                    cell.dh_share = ds;
                                    cells.push_back(cell);
                                }
        }
    if (cells.empty()) {
        throw std::invalid_argument("grid_search: no feasible cells");
    }

    // Cell seeds hash the parameter values themselves (not the cell index),
    // so a cell's objective is identical in any grid that contains it and
    // growing the grid can only improve the best objective.
    const auto cell_seed = [&](const CellSpec& cell) {
        std::uint64_t h = detail::mix64(base.seed ^ 0xCA11Bull);
        const auto mix_in = [&h](std::uint64_t v) { h = detail::mix64(h ^ v); };
        mix_in(static_cast<std::uint64_t>(cell.params.th_h));
        mix_in(static_cast<std::uint64_t>(cell.params.th_l) + 0x101);
        const auto quantize = [](double p) {
            return static_cast<std::uint64_t>(std::llround(p * 1e9));
        };
        mix_in(quantize(cell.params.p_t_fgi_e));
        mix_in(quantize(cell.params.p_t_w_h));
        mix_in(quantize(cell.params.p_t_fgi_n));
        mix_in(quantize(cell.params.p_t_w_l));
        mix_in(quantize(cell.params.p_dh_buy));
        mix_in(quantize(cell.dh_share));
        return h;
    };

    std::vector<CalibrationCell> table(cells.size());
    const auto evaluate = [&](std::size_t idx) {
        RunConfig cfg = base;
        cfg.behavior = cells[idx].params;
        cfg.population.dh_share = cells[idx].dh_share;
        cfg.seed = cell_seed(cells[idx]);
        const EnsembleResult ensemble =
            run_ensemble(cfg, market, grid.replicates_per_cell, 1);

        std::vector<double> sim;
        sim.reserve(ref_days.size());
        for (std::size_t i = 0; i < ref_days.size(); ++i) {
            const std::size_t row = static_cast<std::size_t>(ref_days[i] - base.t_start) + 1;
            sim.push_back(ensemble.rows[row].gini_mean);
        }
        CalibrationCell& out = table[idx];
        out.params = cells[idx].params;
        out.dh_share = cells[idx].dh_share;
        out.rmse = rmse(ref_gini, sim);
        const MapeResult m = mape_detail(ref_gini, sim);
        out.mape = m.value;
        out.mape_skipped = m.skipped;
    };

    if (workers <= 0) {
        workers = static_cast<int>(std::thread::hardware_concurrency());
        if (workers <= 0) workers = 1;
    }
    workers = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(workers), cells.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) evaluate(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < cells.size();
                     i = next.fetch_add(1)) {
                    evaluate(i);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    CalibrationResult result;
    result.objective = objective;
    result.table = table;
    result.infeasible_skipped = infeasible;
    std::size_t best = 0;
    for (std::size_t i = 1; i < table.size(); ++i) {
        const double current = objective == Objective::RMSE ? table[i].rmse : table[i].mape;
        const double incumbent =
            objective == Objective::RMSE ? table[best].rmse : table[best].mape;
        if (current < incumbent) {
            best = i;
        }
    }
    result.best = table[best];
    return result;
}

} // namespace fairlaunch

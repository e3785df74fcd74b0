#pragma once

// One-day clearing: buys and sells are queued in arrival order and matched
// head against head at the single exogenous day price; the leftover side is
// cancelled. Matching runs in token space: a buy's budget converts to token
// demand once at admission, so both legs of every partial fill are exact
// and a fully consumed order leaves a remainder of exactly zero. Cancelled
// buy remainders convert back to fiat; remainders below the 1e-9 dust
// threshold are forgiven.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "fairlaunch/scenario.hpp"

namespace fairlaunch {

enum class Side { Buy, Sell };

/// amount is a fiat budget for buys and a token quantity for sells.
struct Order {
    long agent_id = 0;
    Side side = Side::Buy;
    double amount = 0.0;
    long arrival_seq = 0;
};

struct Fill {
    long buyer_id = 0;
    long seller_id = 0;
    double tokens = 0.0;
    double fiat = 0.0;  // tokens * price
    double price = 0.0;
};

struct MatchResult {
    std::vector<Fill> fills;
    std::vector<Order> cancelled;  // remainders, in arrival order per side
};

inline constexpr double kFiatDust = 1e-9;

inline MatchResult match_day(std::span<const Order> orders, double price) {
    if (!(price > 0.0)) {
        throw std::invalid_argument("match_day: price must be > 0");
    }

    // A buy leg carries both ledgers. Quantities bind on the remaining fiat
    // as well as the token demand, so every fill's fiat stays within one ulp
    // of what the buyer can actually pay; the token and fiat ledgers would
    // otherwise drift apart by an ulp per partial fill and overdraw large
    // budgets by the accumulated difference.
    struct BuyLeg {
        long agent_id;
        double tokens_remaining;
        double fiat_remaining;
        long arrival_seq;
    };
    struct SellLeg {
        long agent_id;
        double remaining;
        long arrival_seq;
    };
    std::vector<BuyLeg> buys;
    std::vector<SellLeg> sells;
    for (const auto& order : orders) {
        if (!(order.amount > 0.0)) {
            throw std::invalid_argument("match_day: order amounts must be > 0");
        }
        if (order.side == Side::Buy) {
            buys.push_back(
                {order.agent_id, order.amount / price, order.amount, order.arrival_seq});
        } else {
            sells.push_back({order.agent_id, order.amount, order.arrival_seq});
        }
    }
    const auto by_arrival = [](const auto& a, const auto& b) {
        return a.arrival_seq < b.arrival_seq;
    };
    std::sort(buys.begin(), buys.end(), by_arrival);
    std::sort(sells.begin(), sells.end(), by_arrival);

    MatchResult result;
    std::size_t bi = 0, si = 0;
    while (bi < buys.size() && si < sells.size()) {
        BuyLeg& buy = buys[bi];
        SellLeg& sell = sells[si];
        const double quantity = std::min(
            {buy.tokens_remaining, sell.remaining, buy.fiat_remaining / price});
        if (quantity <= 0.0) {
            ++bi;  // fiat ledger exhausted first, token remainder is dust
            continue;
        }
        const double fiat = quantity * price;
        result.fills.push_back({buy.agent_id, sell.agent_id, quantity, fiat, price});
        buy.tokens_remaining -= quantity;
        buy.fiat_remaining -= fiat;
        if (buy.fiat_remaining < 0.0) buy.fiat_remaining = 0.0;
        sell.remaining -= quantity;
        if (buy.tokens_remaining <= 0.0 || buy.fiat_remaining < kFiatDust) ++bi;
        if (sell.remaining <= 0.0) ++si;
    }

    for (; bi < buys.size(); ++bi) {
        if (buys[bi].fiat_remaining >= kFiatDust) {
            result.cancelled.push_back({buys[bi].agent_id, Side::Buy,
                                        buys[bi].fiat_remaining, buys[bi].arrival_seq});
        }
    }
    for (; si < sells.size(); ++si) {
        if (sells[si].remaining * price >= kFiatDust) {
            result.cancelled.push_back(
                {sells[si].agent_id, Side::Sell, sells[si].remaining, sells[si].arrival_seq});
        }
    }
    return result;
}

/// Applies fills to holdings. Agents must be indexed by id (agents[i].id == i).
/// A violated balance precondition indicates a matcher defect and aborts;
/// the guard leaves headroom for budget-conversion rounding, which scales
/// with the fill size, while a genuine defect overdraws by whole order
/// amounts.
inline void settle(std::span<Agent> agents, std::span<const Fill> fills) {
    for (const auto& fill : fills) {
        if (fill.buyer_id < 0 || fill.buyer_id >= static_cast<long>(agents.size()) ||
            fill.seller_id < 0 || fill.seller_id >= static_cast<long>(agents.size())) {
            throw std::logic_error("settle: fill references unknown agent");
        }
        if (fill.buyer_id == fill.seller_id) {
            throw std::logic_error("settle: self-trade");
        }
        Agent& buyer = agents[static_cast<std::size_t>(fill.buyer_id)];
        Agent& seller = agents[static_cast<std::size_t>(fill.seller_id)];
        // Budget-to-token conversion rounding accumulates ulps of the order
        // budget across partial fills, so the headroom scales with the
        // balances involved; a genuine defect overdraws by order amounts.
        const double fiat_tol = kFiatDust + 1e-11 * (buyer.fiat + fill.fiat);
        const double token_tol = kFiatDust + 1e-11 * (seller.tokens + fill.tokens);
        if (buyer.fiat + fiat_tol < fill.fiat || seller.tokens + token_tol < fill.tokens) {
            throw std::logic_error("settle: fill exceeds holdings");
        }
        buyer.fiat -= fill.fiat;
        if (buyer.fiat < 0.0) buyer.fiat = 0.0;  // conversion dust only
        buyer.tokens += fill.tokens;
        seller.tokens -= fill.tokens;
        if (seller.tokens < 0.0) seller.tokens = 0.0;
        seller.fiat += fill.fiat;
    }
}

} // namespace fairlaunch

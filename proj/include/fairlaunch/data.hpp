#pragma once

// Exogenous inputs: the daily token price / Fear & Greed series driving the
// simulation, and the reference concentration series used for calibration
// and validation. Includes a seeded synthetic generator so the full test
// suite runs without the proprietary exchange data.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairlaunch/csv.hpp"
#include "fairlaunch/distributions.hpp"
#include "fairlaunch/rng.hpp"

namespace fairlaunch {

/// One trading day of exogenous input. t counts simulation days; the
/// simulated window starts at t=45 by convention (day indices below that
/// never enter the engine).
struct MarketDay {
    int t = 0;
    std::string date;  // ISO-8601
    double price = 0.0;
    int fgi = 0;
};

struct ReferencePoint {
    int t = 0;
    double gini = 0.0;
    std::optional<double> one_minus_nse;
    std::optional<double> whale_share;
    std::optional<long> n_holders;
};

struct ReferenceSeries {
    std::vector<ReferencePoint> points;

    bool has_whale_share() const {
        for (const auto& p : points) {
            if (p.whale_share) return true;
        }
        return false;
    }

    const ReferencePoint* find(int t) const {
        for (const auto& p : points) {
            if (p.t == t) return &p;
        }
        return nullptr;
    }
};

namespace detail {

inline void check_market_row(const std::string& path, long row, double price, long fgi) {
    if (!(price > 0.0)) {
        throw LoadError(path, row, "price_usd", "price must be > 0");
    }
    if (fgi < 0 || fgi > 100) {
        throw LoadError(path, row, "fgi", "FGI must be in [0,100]");
    }
}

} // namespace detail

/// Reads `date,price_usd,fgi`, sorts by date, fills isolated one-day gaps by
/// linear interpolation (price: mean of neighbors, fgi: rounded mean) and
/// rejects wider gaps. Day indices are assigned t_start, t_start+1, ...
inline std::vector<MarketDay> load_market_series(const std::string& path, int t_start = 45) {
    const auto rows = csv::read_rows(path);
    if (rows.empty()) {
        throw LoadError(path, 0, "-", "empty file");
    }
    const auto& header = rows.front();
    if (header.size() < 3 || header[0] != "date" || header[1] != "price_usd" ||
        header[2] != "fgi") {
        throw LoadError(path, 1, "-", "expected header 'date,price_usd,fgi'");
    }

    struct RawDay {
        long epoch_day;
        double price;
        long fgi;
        long row;
    };
    std::vector<RawDay> raw;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const long row_no = static_cast<long>(i) + 1;
        if (rows[i].size() != 3) {
            throw LoadError(path, row_no, "-", "expected 3 fields");
        }
        const long epoch_day = dates::parse_iso_date(rows[i][0], path, row_no);
        const double price = csv::parse_double(rows[i][1], path, row_no, "price_usd");
        const long fgi = csv::parse_long(rows[i][2], path, row_no, "fgi");
        detail::check_market_row(path, row_no, price, fgi);
        raw.push_back({epoch_day, price, fgi, row_no});
    }
    if (raw.empty()) {
        throw LoadError(path, 1, "-", "no data rows");
    }
    std::sort(raw.begin(), raw.end(),
              [](const RawDay& a, const RawDay& b) { return a.epoch_day < b.epoch_day; });

    std::vector<MarketDay> series;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (i > 0) {
            const long gap = raw[i].epoch_day - raw[i - 1].epoch_day;
            if (gap == 0) {
                throw LoadError(path, raw[i].row, "date", "duplicate date");
            }
            if (gap > 2) {
                throw LoadError(path, raw[i].row, "date",
                                "gap of " + std::to_string(gap - 1) +
                                    " missing days; only single-day gaps are interpolated");
            }
            if (gap == 2) {
                MarketDay filled;
                filled.t = t_start + static_cast<int>(series.size());
                filled.date = dates::format_iso_date(raw[i - 1].epoch_day + 1);
                filled.price = 0.5 * (raw[i - 1].price + raw[i].price);
                filled.fgi = static_cast<int>(
                    std::lround(0.5 * static_cast<double>(raw[i - 1].fgi + raw[i].fgi)));
                series.push_back(filled);
            }
        }
        MarketDay day;
        day.t = t_start + static_cast<int>(series.size());
        day.date = dates::format_iso_date(raw[i].epoch_day);
        day.price = raw[i].price;
        day.fgi = static_cast<int>(raw[i].fgi);
        series.push_back(day);
    }
    return series;
}

inline void save_market_series(const std::string& path, std::span<const MarketDay> series) {
    std::ofstream out(path);
    if (!out) {
        throw LoadError(path, 0, "-", "cannot open file for writing");
    }
    out << "date,price_usd,fgi\n";
    for (const auto& d : series) {
        out << d.date << ',' << csv::format_double(d.price) << ',' << d.fgi << '\n';
    }
}

/// Reads `t,gini[,one_minus_nse][,whale_share][,n_holders]`; columns beyond
/// t and gini are optional and identified by the header.
inline ReferenceSeries load_reference_series(const std::string& path) {
    const auto rows = csv::read_rows(path);
    if (rows.empty()) {
        throw LoadError(path, 0, "-", "empty file");
    }
    const auto& header = rows.front();
    int col_t = -1, col_gini = -1, col_nse = -1, col_whale = -1, col_holders = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "t") col_t = static_cast<int>(c);
        else if (header[c] == "gini") col_gini = static_cast<int>(c);
        else if (header[c] == "one_minus_nse") col_nse = static_cast<int>(c);
        else if (header[c] == "whale_share") col_whale = static_cast<int>(c);
        else if (header[c] == "n_holders") col_holders = static_cast<int>(c);
        else throw LoadError(path, 1, header[c], "unknown column");
    }
    if (col_t < 0 || col_gini < 0) {
        throw LoadError(path, 1, "-", "columns 't' and 'gini' are required");
    }

    ReferenceSeries ref;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const long row_no = static_cast<long>(i) + 1;
        const auto& fields = rows[i];
        if (fields.size() != header.size()) {
            throw LoadError(path, row_no, "-", "field count does not match header");
        }
        ReferencePoint p;
        p.t = static_cast<int>(csv::parse_long(fields[col_t], path, row_no, "t"));
        p.gini = csv::parse_double(fields[col_gini], path, row_no, "gini");
        if (p.gini < 0.0 || p.gini > 1.0) {
            throw LoadError(path, row_no, "gini", "must be in [0,1]");
        }
        if (col_nse >= 0 && !fields[col_nse].empty()) {
            const double v = csv::parse_double(fields[col_nse], path, row_no, "one_minus_nse");
            if (v < 0.0 || v > 1.0) {
                throw LoadError(path, row_no, "one_minus_nse", "must be in [0,1]");
            }
            p.one_minus_nse = v;
        }
        if (col_whale >= 0 && !fields[col_whale].empty()) {
            const double v = csv::parse_double(fields[col_whale], path, row_no, "whale_share");
            if (v < 0.0 || v > 1.0) {
                throw LoadError(path, row_no, "whale_share", "must be in [0,1]");
            }
            p.whale_share = v;
        }
        if (col_holders >= 0 && !fields[col_holders].empty()) {
            const long v = csv::parse_long(fields[col_holders], path, row_no, "n_holders");
            if (v < 0) {
                throw LoadError(path, row_no, "n_holders", "must be >= 0");
            }
            p.n_holders = v;
        }
        if (!ref.points.empty() && p.t <= ref.points.back().t) {
            throw LoadError(path, row_no, "t", "t must be strictly increasing");
        }
        ref.points.push_back(p);
    }
    return ref;
}

inline void save_reference_series(const std::string& path, const ReferenceSeries& ref) {
    std::ofstream out(path);
    if (!out) {
        throw LoadError(path, 0, "-", "cannot open file for writing");
    }
    out << "t,gini,one_minus_nse,whale_share,n_holders\n";
    for (const auto& p : ref.points) {
        out << p.t << ',' << csv::format_double(p.gini) << ',';
        if (p.one_minus_nse) out << csv::format_double(*p.one_minus_nse);
        out << ',';
        if (p.whale_share) out << csv::format_double(*p.whale_share);
        out << ',';
        if (p.n_holders) out << *p.n_holders;
        out << '\n';
    }
}

/// Bounded AR(1) around `mean` for the synthetic Fear & Greed index.
struct FgiModel {
    double start = 50.0;
    double mean = 50.0;
    double phi = 0.95;
    double sigma = 10.0;
};

/// Geometric random walk price plus AR(1) FGI, deterministic in the seed.
/// Dates are anchored so that t=45 falls on 2020-09-01.
inline std::vector<MarketDay> synthetic_market_series(std::uint64_t seed, int days,
                                                      double price0, double drift,
                                                      double vol, const FgiModel& fgi = {},
                                                      int t_start = 45) {
    if (days < 1) {
        throw std::invalid_argument("synthetic_market_series: days must be >= 1");
    }
    if (!(price0 > 0.0)) {
        throw std::invalid_argument("synthetic_market_series: price0 must be > 0");
    }
    if (vol < 0.0 || fgi.sigma < 0.0) {
        throw std::invalid_argument("synthetic_market_series: volatilities must be >= 0");
    }

    const long anchor = dates::days_from_civil(2020, 9, 1) - 45;
    RandomSource rng = RandomSource(seed).child(0x6d6b74);  // market stream

    std::vector<MarketDay> series;
    series.reserve(days);
    double log_price = std::log(price0);
    double fgi_value = fgi.start;
    for (int i = 0; i < days; ++i) {
        MarketDay day;
        day.t = t_start + i;
        day.date = dates::format_iso_date(anchor + day.t);
        day.price = std::exp(log_price);
        day.fgi = static_cast<int>(std::lround(std::min(100.0, std::max(0.0, fgi_value))));
        series.push_back(day);

        const double z_price = vol > 0.0 ? sample_normal(rng, 0.0, 1.0) : 0.0;
        log_price += drift + vol * z_price;
        const double z_fgi = fgi.sigma > 0.0 ? sample_normal(rng, 0.0, 1.0) : 0.0;
        fgi_value = fgi.mean + fgi.phi * (fgi_value - fgi.mean) + fgi.sigma * z_fgi;
    }
    return series;
}

} // namespace fairlaunch

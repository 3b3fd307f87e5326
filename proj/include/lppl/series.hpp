#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lppl/date.hpp"

namespace lppl {

struct PricePoint {
    Date date;
    double price;  // strictly positive

    bool operator==(const PricePoint&) const = default;
};

/// Day offsets of each observation from the first observation date.
struct TimeIndex {
    Date origin;
    std::vector<int> offsets;  // strictly increasing, offsets[0] == 0
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Ordered daily price observations for one asset. Dates are strictly
/// increasing and prices strictly positive; both are enforced on
/// construction, so downstream code can rely on them.
class PriceSeries {
public:
    PriceSeries(std::string asset_id, std::vector<PricePoint> points)
        : asset_id_(std::move(asset_id)), points_(std::move(points)) {
        if (points_.empty())
            throw std::invalid_argument("price series must contain at least one observation");
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (!(points_[i].price > 0.0) || !std::isfinite(points_[i].price))
                throw std::invalid_argument("price must be strictly positive at " +
                                            points_[i].date.to_string());
            if (i > 0 && points_[i].date <= points_[i - 1].date)
                throw std::invalid_argument("dates must be strictly increasing at " +
                                            points_[i].date.to_string());
        }
    }

    const std::string& asset_id() const { return asset_id_; }
    const std::vector<PricePoint>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }

    Date origin() const { return points_.front().date; }
    Date last_date() const { return points_.back().date; }
    /// Day offset of the last observation from the origin.
    int span() const { return last_date() - origin(); }

    TimeIndex time_index() const {
        TimeIndex index{origin(), {}};
        index.offsets.reserve(points_.size());
        for (const auto& p : points_)
            index.offsets.push_back(p.date - index.origin);
        return index;
    }

private:
    std::string asset_id_;
    std::vector<PricePoint> points_;
};

/// Parses "YYYY-MM-DD,<decimal price>" records, one per line. A single
/// leading "date,price" header is skipped. Lines may end in LF or CRLF.
inline PriceSeries parse_csv(std::string_view text, std::string asset_id) {
    std::vector<PricePoint> points;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool saw_record = false;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos)
            eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty()) {
            if (pos >= text.size())
                break;  // trailing newline
            throw ParseError("line " + std::to_string(line_no) + ": empty line");
        }
        if (line_no == 1 && line == "date,price")
            continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string_view::npos)
            throw ParseError("line " + std::to_string(line_no) + ": expected 'date,price'");
        const auto date = Date::parse(line.substr(0, comma));
        if (!date)
            throw ParseError("line " + std::to_string(line_no) + ": invalid date '" +
                             std::string(line.substr(0, comma)) + "'");
        const std::string_view price_text = line.substr(comma + 1);
        double price = 0.0;
        const auto [end, ec] =
            std::from_chars(price_text.data(), price_text.data() + price_text.size(), price);
        if (ec != std::errc{} || end != price_text.data() + price_text.size())
            throw ParseError("line " + std::to_string(line_no) + ": invalid price '" +
                             std::string(price_text) + "'");
        if (!(price > 0.0) || !std::isfinite(price))
            throw ParseError("line " + std::to_string(line_no) + ": price must be positive");
        if (!points.empty()) {
            if (*date == points.back().date)
                throw ParseError("line " + std::to_string(line_no) + ": duplicate date " +
                                 date->to_string());
            if (*date < points.back().date)
                throw ParseError("line " + std::to_string(line_no) + ": decreasing date " +
                                 date->to_string());
        }
        points.push_back({*date, price});
        saw_record = true;
    }
    if (!saw_record)
        throw ParseError("empty input: no price records");
    return PriceSeries(std::move(asset_id), std::move(points));
}

/// Emits the same format parse_csv accepts, with the header line. %.17g
/// preserves doubles bit-exactly through a round trip.
inline std::string serialize_csv(const PriceSeries& series) {
    std::string out = "date,price\n";
    char buf[64];
    for (const auto& p : series.points()) {
        std::snprintf(buf, sizeof buf, "%.17g", p.price);
        out += p.date.to_string();
        out += ',';
        out += buf;
        out += '\n';
    }
    return out;
}

inline std::vector<double> log_prices(const PriceSeries& series) {
    std::vector<double> out;
    out.reserve(series.size());
    for (const auto& p : series.points())
        out.push_back(std::log(p.price));
    return out;
}

/// One-day close-to-close returns, dated at the later observation.
inline std::vector<std::pair<Date, double>> daily_returns(const PriceSeries& series) {
    if (series.size() < 2)
        throw std::invalid_argument("daily_returns needs at least 2 observations");
    std::vector<std::pair<Date, double>> out;
    out.reserve(series.size() - 1);
    const auto& pts = series.points();
    for (std::size_t i = 1; i < pts.size(); ++i)
        out.emplace_back(pts[i].date, pts[i].price / pts[i - 1].price - 1.0);
    return out;
}

/// All points with day offset in [t1, t2], offsets relative to the series
/// origin. The result is a series in its own right (its offsets rebase to
/// its first observation).
inline PriceSeries slice(const PriceSeries& series, int t1, int t2) {
    if (t1 >= t2)
        throw std::invalid_argument("slice requires t1 < t2");
    if (t1 < 0 || t2 > series.span())
        throw std::invalid_argument("slice bounds outside series span");
    const Date origin = series.origin();
    std::vector<PricePoint> points;
    for (const auto& p : series.points()) {
        const int off = p.date - origin;
        if (off >= t1 && off <= t2)
            points.push_back(p);
    }
    if (points.empty())
        throw std::invalid_argument("slice selects no observations");
    return PriceSeries(series.asset_id(), std::move(points));
}

}  // namespace lppl

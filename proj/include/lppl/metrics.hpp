#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lppl/date.hpp"
#include "lppl/series.hpp"

namespace lppl {

/// Largest peak-to-trough drop, relative to the peak.
struct DrawdownReport {
    Date peak_date;
    Date trough_date;
    double relative_drop = 0.0;  // (peak - trough) / peak, in [0, 1]
    double absolute_drop = 0.0;  // price units
};

/// Maximizes the drop (price[i] - price[j]) / price[i], clamped at zero,
/// over all i < j at or after from_date; ties resolve to the earliest peak,
/// then the earliest trough. A region with no decline therefore reports a
/// zero drop on its first two observations.
inline DrawdownReport max_drawdown(const PriceSeries& series, Date from_date) {
    std::vector<const PricePoint*> region;
    for (const auto& p : series.points())
        if (p.date >= from_date)
            region.push_back(&p);
    if (region.size() < 2)
        throw std::invalid_argument("max_drawdown needs at least 2 observations after " +
                                    from_date.to_string());

    double best_drop = -1.0;
    std::size_t best_peak = 0, best_trough = 1;
    std::size_t peak = 0;  // earliest running argmax of price
    for (std::size_t j = 1; j < region.size(); ++j) {
        if (region[j - 1]->price > region[peak]->price)
            peak = j - 1;
        const double drop =
            std::max(0.0, (region[peak]->price - region[j]->price) / region[peak]->price);
        if (drop > best_drop || (drop == best_drop && peak < best_peak)) {
            best_drop = drop;
            best_peak = peak;
            best_trough = j;
        }
    }

    DrawdownReport report;
    report.peak_date = region[best_peak]->date;
    report.trough_date = region[best_trough]->date;
    report.relative_drop = best_drop;
    report.absolute_drop =
        std::max(0.0, region[best_peak]->price - region[best_trough]->price);
    return report;
}

struct UpFractionPoint {
    Date date;
    int window_days;     // number of one-day returns in the window
    double fraction;     // up / (up + non-positive), in [0, 1]
};

/// Fraction of positive one-day close-to-close returns in a trailing
/// window of window_days returns, emitted at each date where a full window
/// exists.
inline std::vector<UpFractionPoint> up_day_fraction(const PriceSeries& series, int window_days) {
    if (window_days < 2)
        throw std::invalid_argument("up-fraction window must cover at least 2 days");
    const auto returns = daily_returns(series);  // throws when size < 2
    if (returns.size() < static_cast<std::size_t>(window_days))
        throw std::invalid_argument("series too short for a " + std::to_string(window_days) +
                                    "-day up-fraction window");
    std::vector<UpFractionPoint> out;
    int ups = 0;
    for (std::size_t i = 0; i < returns.size(); ++i) {
        if (returns[i].second > 0.0)
            ++ups;
        if (i + 1 >= static_cast<std::size_t>(window_days)) {
            out.push_back({returns[i].first, window_days,
                           static_cast<double>(ups) / window_days});
            if (returns[i + 1 - window_days].second > 0.0)
                --ups;
        }
    }
    return out;
}

struct DerivativePoint {
    Date date;
    int window_days;
    double growth_rate;  // d ln P / dt, per day
};

/// First derivative of log-price by centered Savitzky-Golay least squares:
/// at each interior observation, fit a poly_order polynomial to log-price
/// over a window of `window_days` observations (rounded up to odd) against
/// actual day offsets, and report its analytic slope at the center.
/// Unequal spacing from calendar gaps is handled by construction.
inline std::vector<DerivativePoint> sg_derivative(const PriceSeries& series, int window_days,
                                                  int poly_order = 3) {
    if (poly_order < 1)
        throw std::invalid_argument("polynomial order must be at least 1");
    const int n_pts = (window_days % 2 == 1) ? window_days : window_days + 1;
    if (n_pts < poly_order + 2)
        throw std::invalid_argument("window too short for the polynomial order");
    const auto n = static_cast<int>(series.size());
    if (n_pts > n)
        throw std::invalid_argument("window of " + std::to_string(n_pts) +
                                    " points exceeds series length " + std::to_string(n));

    const auto index = series.time_index();
    const auto logp = log_prices(series);
    const int half = n_pts / 2;

    std::vector<DerivativePoint> out;
    Eigen::MatrixXd vandermonde(n_pts, poly_order + 1);
    Eigen::VectorXd rhs(n_pts);
    for (int c = half; c < n - half; ++c) {
        // Normalize abscissae to [-1, 1] for conditioning; the slope scales
        // back by 1/h.
        const double h = std::max(index.offsets[c] - index.offsets[c - half],
                                  index.offsets[c + half] - index.offsets[c]);
        for (int k = -half; k <= half; ++k) {
            const double u = (index.offsets[c + k] - index.offsets[c]) / h;
            double power = 1.0;
            for (int d = 0; d <= poly_order; ++d) {
                vandermonde(k + half, d) = power;
                power *= u;
            }
            rhs(k + half) = logp[c + k];
        }
        const Eigen::VectorXd coef =
            vandermonde.colPivHouseholderQr().solve(rhs);
        out.push_back({series.points()[c].date, window_days, coef(1) / h});
    }
    return out;
}

}  // namespace lppl

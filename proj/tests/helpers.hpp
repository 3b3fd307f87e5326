#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lppl/date.hpp"
#include "lppl/model.hpp"
#include "lppl/rng.hpp"
#include "lppl/series.hpp"

namespace testutil {

inline bool is_weekend(lppl::Date d) {
    const int dow = ((d.serial() % 7) + 7 + 4) % 7;  // 0 = Sunday, 1970-01-01 was a Thursday
    return dow == 0 || dow == 6;
}

/// Synthetic price series sampled from an LPPL curve, optionally with
/// weekend gaps and Gaussian log-price noise. tc in params is a day offset
/// from `start`.
inline lppl::PriceSeries synthetic_lppl_series(const lppl::LpplParams& params, lppl::Date start,
                                               int span_days, bool weekdays_only,
                                               double noise_sigma, std::uint64_t seed,
                                               std::string asset_id = "synthetic") {
    lppl::rng::Stream stream(seed);
    std::vector<lppl::PricePoint> points;
    for (int d = 0; d <= span_days; ++d) {
        const lppl::Date date = start + d;
        if (weekdays_only && is_weekend(date))
            continue;
        double logp = lppl::evaluate(params, static_cast<double>(d));
        if (noise_sigma > 0.0)
            logp += noise_sigma * stream.next_normal();
        points.push_back({date, std::exp(logp)});
    }
    return lppl::PriceSeries(std::move(asset_id), std::move(points));
}

/// Daily geometric random walk (no LPPL structure).
inline lppl::PriceSeries random_walk_series(lppl::Date start, int n_obs, double drift,
                                            double sigma, std::uint64_t seed,
                                            std::string asset_id = "walk") {
    lppl::rng::Stream stream(seed);
    std::vector<lppl::PricePoint> points;
    double logp = std::log(100.0);
    for (int d = 0; d < n_obs; ++d) {
        points.push_back({start + d, std::exp(logp)});
        logp += drift + sigma * stream.next_normal();
    }
    return lppl::PriceSeries(std::move(asset_id), std::move(points));
}

/// Parameters of a clearly identifiable bubble, drawn well inside the
/// default qualification ranges: several visible oscillations (omega) with
/// amplitude above the sigma = 0.01 noise floor used in the recovery tests.
/// tc lands 20 to 80 days past t2.
inline lppl::LpplParams random_bubble_params(lppl::rng::Stream& stream, double t2,
                                             double window_len) {
    lppl::LpplParams p;
    p.alpha = stream.next_uniform(0.15, 0.85);
    p.omega = stream.next_uniform(6.0, 18.0);
    p.phi = stream.next_uniform(0.0, 6.28);
    p.tc = t2 + stream.next_uniform(20.0, 80.0);
    const double scale = std::pow(window_len, p.alpha);
    p.B = -stream.next_uniform(0.3, 0.9) / scale;   // total power-law run-up 0.3..0.9
    p.C = stream.next_uniform(0.10, 0.30) * std::abs(p.B);
    p.A = stream.next_uniform(2.0, 5.0);
    return p;
}

}  // namespace testutil

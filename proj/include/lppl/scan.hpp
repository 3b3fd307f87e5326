#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "lppl/detail/parallel.hpp"
#include "lppl/fit.hpp"
#include "lppl/series.hpp"

namespace lppl {

/// The (t1, t2) window grid: t2 steps back from the last observation in
/// dt2 increments, window lengths run from min_len to max_len in dt1
/// increments.
struct ScanConfig {
    int dt1 = 7;
    int dt2 = 7;
    int min_len = 91;    // days
    int max_len = 1092;  // days
    int n_t2 = 8;
    int top_k = 10;

    void validate() const {
        if (dt1 < 1 || dt2 < 1)
            throw std::invalid_argument("dt1 and dt2 must be at least 1");
        if (!(0 < min_len && min_len <= max_len))
            throw std::invalid_argument("need 0 < min_len <= max_len");
        if (n_t2 < 1)
            throw std::invalid_argument("n_t2 must be at least 1");
        if (top_k < 1)
            throw std::invalid_argument("top_k must be at least 1");
    }
};

struct WindowGrid {
    std::vector<Window> windows;  // ordered by t2 descending, then t1 descending

    bool empty() const { return windows.empty(); }
    std::size_t size() const { return windows.size(); }
};

/// Enumerates the grid over [0, span]: t2 in {T, T-dt2, ...} for n_t2
/// values, and for each t2, t1 from t2-min_len down to max(t2-max_len, 0)
/// in dt1 steps. Series shorter than min_len yield an empty grid.
inline WindowGrid enumerate_windows(const PriceSeries& series, const ScanConfig& cfg) {
    cfg.validate();
    WindowGrid grid;
    const int span = series.span();
    for (int k = 0; k < cfg.n_t2; ++k) {
        const int t2 = span - k * cfg.dt2;
        if (t2 < cfg.min_len)
            break;
        const int t1_floor = std::max(t2 - cfg.max_len, 0);
        for (int t1 = t2 - cfg.min_len; t1 >= t1_floor; t1 -= cfg.dt1)
            grid.windows.push_back({t1, t2});
    }
    return grid;
}

struct WindowFailure {
    Window window;
    std::string reason;
};

/// One fit per eligible window plus a per-window failure log; a failed or
/// under-populated window never aborts the scan.
struct ScanOutcome {
    std::vector<FitResult> results;   // ordered as the grid
    std::vector<WindowFailure> failures;
};

inline ScanOutcome scan(const PriceSeries& series, const ScanConfig& scan_cfg,
                        const FitConfig& fit_cfg, const QualificationFilter& filter = {}) {
    const auto grid = enumerate_windows(series, scan_cfg);
    if (grid.empty())
        throw std::invalid_argument("window grid is empty: series spans " +
                                    std::to_string(series.span()) + " days, minimum is " +
                                    std::to_string(scan_cfg.min_len));

    const auto index = series.time_index();
    const auto logp_all = log_prices(series);

    struct Slot {
        FitResult fit;
        std::string error;
        bool ok = false;
    };
    std::vector<Slot> slots(grid.size());

    detail::parallel_for(grid.size(), [&](std::size_t w) {
        const Window window = grid.windows[w];
        std::vector<double> times;
        std::vector<double> logp;
        for (std::size_t i = 0; i < index.offsets.size(); ++i) {
            const int off = index.offsets[i];
            if (off >= window.t1 && off <= window.t2) {
                times.push_back(off);
                logp.push_back(logp_all[i]);
            }
        }
        if (static_cast<int>(times.size()) < kMinObservations) {
            slots[w].error = "insufficient observations: " + std::to_string(times.size());
            return;
        }
        try {
            slots[w].fit = multistart_fit(times, logp, fit_cfg, filter, window);
            slots[w].ok = true;
        } catch (const std::exception& e) {
            slots[w].error = e.what();
        }
    });

    ScanOutcome outcome;
    for (std::size_t w = 0; w < slots.size(); ++w) {
        if (slots[w].ok)
            outcome.results.push_back(slots[w].fit);
        else
            outcome.failures.push_back({grid.windows[w], slots[w].error});
    }
    return outcome;
}

/// Qualified fits only, strongest signature first: rmse ascending, ties
/// broken by longer window, then earlier t1.
inline std::vector<FitResult> select_candidates(const std::vector<FitResult>& results,
                                                int top_k) {
    std::vector<FitResult> out;
    for (const auto& r : results)
        if (r.qualified)
            out.push_back(r);
    std::stable_sort(out.begin(), out.end(), [](const FitResult& a, const FitResult& b) {
        if (a.rmse != b.rmse)
            return a.rmse < b.rmse;
        if (a.window.length() != b.window.length())
            return a.window.length() > b.window.length();
        return a.window.t1 < b.window.t1;
    });
    if (top_k >= 0 && out.size() > static_cast<std::size_t>(top_k))
        out.resize(static_cast<std::size_t>(top_k));
    return out;
}

}  // namespace lppl

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lppl/date.hpp"
#include "lppl/detail/parallel.hpp"
#include "lppl/fit.hpp"
#include "lppl/rng.hpp"
#include "lppl/scan.hpp"
#include "lppl/series.hpp"

namespace lppl {

struct BootstrapConfig {
    int n_bootstrap = 10;    // synthetic datasets per selected fit
    int horizon_days = 182;  // extrapolation span beyond the last observation
    std::uint64_t seed = 0;

    void validate() const {
        if (n_bootstrap < 1)
            throw std::invalid_argument("n_bootstrap must be at least 1");
        if (horizon_days < 1)
            throw std::invalid_argument("horizon_days must be positive");
    }
};

enum class MemberOrigin { original, bootstrap };

struct EnsembleMember {
    FitResult fit;
    MemberOrigin origin;
};

/// Original fits plus bootstrap refits. All member tc values are day
/// offsets from `origin`.
struct Ensemble {
    std::vector<EnsembleMember> members;
    std::string source_asset;
    Date origin;
    Date last_observation;

    std::size_t size() const { return members.size(); }
};

enum class ForecastStatus { H1, H2 };

inline const char* to_string(ForecastStatus s) { return s == ForecastStatus::H1 ? "H1" : "H2"; }

/// The published forecast: quantile windows of the critical time, present
/// only for H2 status.
struct ForecastRecord {
    std::string asset_id;
    ForecastStatus status = ForecastStatus::H1;
    std::optional<Date> q05;
    std::optional<Date> q20;
    std::optional<Date> q80;
    std::optional<Date> q95;
    int ensemble_size = 0;
    Date last_observation;

    bool operator==(const ForecastRecord&) const = default;
};

/// Residual-bootstrap synthetic series: the fitted curve at the original
/// dates plus residuals resampled i.i.d. with replacement.
inline PriceSeries synthesize(const FitResult& fit, const PriceSeries& sub, rng::Stream& stream) {
    if (!fit.converged)
        throw std::invalid_argument("synthesize requires a converged fit");
    const auto index = sub.time_index();
    const auto logp = log_prices(sub);
    std::vector<double> model(logp.size());
    std::vector<double> residuals(logp.size());
    for (std::size_t i = 0; i < logp.size(); ++i) {
        model[i] = evaluate(fit.params, static_cast<double>(index.offsets[i]));
        residuals[i] = logp[i] - model[i];
    }
    std::vector<PricePoint> points;
    points.reserve(sub.size());
    for (std::size_t i = 0; i < logp.size(); ++i) {
        const double r = residuals[stream.next_index(residuals.size())];
        points.push_back({sub.points()[i].date, std::exp(model[i] + r)});
    }
    return PriceSeries(sub.asset_id(), std::move(points));
}

namespace detail {

/// Warm-started refit used for bootstrap members: descend from the parent
/// triple and two jittered variants, keep the best converged result.
inline std::optional<FitResult> refit(const FitResult& parent, std::span<const double> times,
                                      std::span<const double> logp, const FitConfig& cfg,
                                      rng::Stream& stream) {
    const auto box = make_box(parent.window);
    std::vector<NonlinearTriple> starts;
    starts.push_back({parent.params.tc, parent.params.alpha, parent.params.omega});
    for (int j = 0; j < 2; ++j) {
        std::array<double, 3> x{
            parent.params.tc + stream.next_uniform(-0.05, 0.05) * parent.window.length(),
            parent.params.alpha + stream.next_uniform(-0.05, 0.05),
            parent.params.omega * (1.0 + stream.next_uniform(-0.05, 0.05))};
        box.clamp(x);
        starts.push_back({x[0], x[1], x[2]});
    }
    std::optional<FitResult> best;
    for (const auto& start : starts) {
        try {
            auto fit = local_refine(start, times, logp, cfg, parent.window);
            if (fit.converged && (!best || fit.cost < best->cost))
                best = fit;
        } catch (const std::exception&) {
        }
    }
    return best;
}

}  // namespace detail

/// For every selected candidate, rebuild its window sub-series n_bootstrap
/// times from resampled residuals and refit. Members are the candidates
/// (original) followed by converged bootstrap refits in (candidate,
/// replicate) order; substreams are index-addressed, so the result is
/// deterministic under any execution order.
inline Ensemble build_ensemble(const std::vector<FitResult>& candidates,
                               const PriceSeries& series, const BootstrapConfig& cfg,
                               const FitConfig& fit_cfg, const QualificationFilter& filter = {}) {
    cfg.validate();
    if (candidates.empty())
        throw std::invalid_argument("cannot build an ensemble from zero candidates");
    for (const auto& c : candidates)
        if (!c.qualified)
            throw std::invalid_argument("ensemble candidates must all be qualified");

    Ensemble ensemble;
    ensemble.source_asset = series.asset_id();
    ensemble.origin = series.origin();
    ensemble.last_observation = series.last_date();
    for (const auto& c : candidates)
        ensemble.members.push_back({c, MemberOrigin::original});

    const auto series_index = series.time_index();
    const rng::Stream root(cfg.seed);

    const std::size_t total = candidates.size() * static_cast<std::size_t>(cfg.n_bootstrap);
    std::vector<std::optional<FitResult>> refits(total);
    detail::parallel_for(total, [&](std::size_t job) {
        const std::size_t ci = job / static_cast<std::size_t>(cfg.n_bootstrap);
        const std::size_t b = job % static_cast<std::size_t>(cfg.n_bootstrap);
        const auto& candidate = candidates[ci];
        try {
            const auto sub = slice(series, candidate.window.t1, candidate.window.t2);
            // The candidate lives in the series frame; the sub-series indexes
            // from its own first observation. Translate the fit into the sub
            // frame (exact: only tc shifts), resample and refit there, then
            // shift the result back so member tc values share the ensemble
            // origin.
            const int shift = sub.origin() - series.origin();
            FitResult local = candidate;
            local.params.tc -= shift;
            local.window = {candidate.window.t1 - shift, candidate.window.t2 - shift};
            auto stream = root.substream(0xB007u, ci).substream(0xD4A0u, b);
            const auto synthetic = synthesize(local, sub, stream);
            const auto index = synthetic.time_index();
            std::vector<double> times(index.offsets.begin(), index.offsets.end());
            const auto logp = log_prices(synthetic);
            auto fit = detail::refit(local, times, logp, fit_cfg, stream);
            if (fit) {
                fit->params.tc += shift;
                fit->window = candidate.window;
                fit->qualified = qualify(*fit, filter);
                refits[job] = *fit;
            }
        } catch (const std::exception&) {
        }
    });
    for (const auto& fit : refits)
        if (fit)
            ensemble.members.push_back({*fit, MemberOrigin::bootstrap});
    return ensemble;
}

namespace detail {

/// Nearest-rank quantile offsets (rank = ceil(level * n)) of member tc.
inline std::map<double, double> quantile_offsets(const Ensemble& ensemble,
                                                 const std::vector<double>& levels) {
    if (ensemble.members.empty())
        throw std::invalid_argument("ensemble is empty");
    for (const double level : levels)
        if (!(level > 0.0 && level < 1.0))
            throw std::invalid_argument("quantile levels must lie in (0, 1)");
    std::vector<double> tcs;
    tcs.reserve(ensemble.members.size());
    for (const auto& m : ensemble.members)
        tcs.push_back(m.fit.params.tc);
    std::sort(tcs.begin(), tcs.end());
    std::map<double, double> out;
    for (const double level : levels) {
        const auto rank = static_cast<std::size_t>(
            std::max<long>(1, static_cast<long>(std::ceil(level * double(tcs.size())))));
        out.emplace(level, tcs[std::min(rank, tcs.size()) - 1]);
    }
    return out;
}

}  // namespace detail

/// Nearest-rank quantiles (rank = ceil(level * n)) of member tc values,
/// mapped to calendar dates by rounding to the nearest day and clamped to
/// last_observation + horizon for reporting.
inline std::map<double, Date> tc_quantiles(const Ensemble& ensemble,
                                           const std::vector<double>& levels,
                                           int horizon_days = 182) {
    const auto offsets = detail::quantile_offsets(ensemble, levels);
    const Date cap = ensemble.last_observation + horizon_days;
    std::map<double, Date> out;
    for (const auto& [level, tc] : offsets) {
        Date date = ensemble.origin + static_cast<int>(std::lround(tc));
        if (date > cap)
            date = cap;
        out.emplace(level, date);
    }
    return out;
}

/// H2 when the ensemble is large enough and the 20/80 window lies within
/// the extrapolation horizon; otherwise the asset stays H1 (bubble
/// diagnosed, no published window).
inline ForecastRecord make_forecast(const Ensemble& ensemble, int horizon_days = 182) {
    constexpr int kMinEnsembleForH2 = 10;
    ForecastRecord record;
    record.asset_id = ensemble.source_asset;
    record.ensemble_size = static_cast<int>(ensemble.members.size());
    record.last_observation = ensemble.last_observation;

    const auto raw = detail::quantile_offsets(ensemble, {0.05, 0.20, 0.80, 0.95});
    const Date cap = ensemble.last_observation + horizon_days;
    const Date q80_date =
        ensemble.origin + static_cast<int>(std::lround(raw.at(0.80)));
    if (record.ensemble_size >= kMinEnsembleForH2 && q80_date <= cap) {
        const auto quantiles = tc_quantiles(ensemble, {0.05, 0.20, 0.80, 0.95}, horizon_days);
        record.status = ForecastStatus::H2;
        record.q05 = quantiles.at(0.05);
        record.q20 = quantiles.at(0.20);
        record.q80 = quantiles.at(0.80);
        record.q95 = quantiles.at(0.95);
    } else {
        record.status = ForecastStatus::H1;
    }
    return record;
}

}  // namespace lppl

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lppl/model.hpp"
#include "lppl/rng.hpp"
#include "lppl/series.hpp"

namespace lppl {

/// Fitting window in day offsets, inclusive on both ends.
struct Window {
    int t1 = 0;
    int t2 = 0;

    int length() const { return t2 - t1; }
    bool operator==(const Window&) const = default;
};

struct FitConfig {
    int n_starts = 40;
    /// tc start offsets beyond t2, as fractions of the window length.
    std::vector<double> tc_grid{0.02, 0.1, 0.25, 0.5};
    std::vector<double> alpha_starts{0.2, 0.5, 0.8};
    std::vector<double> omega_starts{5.0, 8.0, 11.0, 15.0};
    int max_iterations = 500;
    double rel_tol = 1e-10;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_starts < 1)
            throw std::invalid_argument("n_starts must be at least 1");
        if (max_iterations < 1)
            throw std::invalid_argument("max_iterations must be at least 1");
        if (!(rel_tol > 0.0))
            throw std::invalid_argument("rel_tol must be positive");
        if (tc_grid.empty() || alpha_starts.empty() || omega_starts.empty())
            throw std::invalid_argument("start grids must be non-empty");
    }
};

struct FitResult {
    LpplParams params;
    double cost = std::numeric_limits<double>::infinity();  // SSE on log-price
    double rmse = std::numeric_limits<double>::infinity();
    Window window;
    int n_points = 0;
    bool converged = false;
    bool qualified = false;
};

inline bool qualify(const FitResult& fit, const QualificationFilter& filter) {
    return qualify(fit.params, fit.window.t1, fit.window.t2, filter);
}

/// Minimum observations per fitted window: 7 effective parameters need
/// margin, and the 91-day minimum window carries ~60 trading days.
inline constexpr int kMinObservations = 30;

namespace detail {

// Search box for the nonlinear triple. tc is confined strictly after the
// window end, up to twice the window length beyond it.
struct SearchBox {
    std::array<double, 3> lo;  // tc, alpha, omega
    std::array<double, 3> hi;

    bool contains(const NonlinearTriple& nl, double slack = 1e-9) const {
        const std::array<double, 3> x{nl.tc, nl.alpha, nl.omega};
        for (int i = 0; i < 3; ++i)
            if (x[i] < lo[i] - slack || x[i] > hi[i] + slack)
                return false;
        return true;
    }

    void clamp(std::array<double, 3>& x) const {
        for (int i = 0; i < 3; ++i)
            x[i] = std::min(std::max(x[i], lo[i]), hi[i]);
    }
};

inline constexpr double kTcMargin = 0.01;  // days past t2 the search may not cross
inline constexpr double kAlphaLo = 0.01;
inline constexpr double kAlphaHi = 0.99;
inline constexpr double kOmegaLo = 0.5;
inline constexpr double kOmegaHi = 50.0;

inline SearchBox make_box(const Window& w) {
    const double t2 = w.t2;
    const double len = w.length();
    return SearchBox{{t2 + kTcMargin, kAlphaLo, kOmegaLo}, {t2 + 2.0 * len, kAlphaHi, kOmegaHi}};
}

struct LinearSolve {
    LinearQuad lq;
    double cost = std::numeric_limits<double>::infinity();
    bool ok = false;
};

/// Least squares over the basis {1, f, f cos(w ln tau), f sin(w ln tau)},
/// f = |t - tc|^alpha, via Householder QR. Returns ok = false instead of
/// throwing when the basis is not computable (tc on a sample, overflow).
inline LinearSolve solve_linear(const NonlinearTriple& nl, std::span<const double> times,
                                std::span<const double> logp) {
    LinearSolve out;
    const auto n = static_cast<Eigen::Index>(times.size());
    Eigen::MatrixXd basis(n, 4);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double tau = std::abs(times[static_cast<std::size_t>(i)] - nl.tc);
        if (tau == 0.0)
            return out;
        const double ln_tau = std::log(tau);
        const double f = std::exp(nl.alpha * ln_tau);
        const double g = nl.omega * ln_tau;
        basis(i, 0) = 1.0;
        basis(i, 1) = f;
        basis(i, 2) = f * std::cos(g);
        basis(i, 3) = f * std::sin(g);
        rhs(i) = logp[static_cast<std::size_t>(i)];
        if (!std::isfinite(f))
            return out;
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
    const Eigen::Vector4d x = qr.solve(rhs);
    const double cost = (basis * x - rhs).squaredNorm();
    if (!std::isfinite(cost))
        return out;
    out.lq = LinearQuad{x(0), x(1), x(2), x(3)};
    out.cost = cost;
    out.ok = true;
    return out;
}

inline bool is_rank_deficient(const NonlinearTriple& nl, std::span<const double> times) {
    const auto n = static_cast<Eigen::Index>(times.size());
    Eigen::MatrixXd basis(n, 4);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double tau = std::abs(times[static_cast<std::size_t>(i)] - nl.tc);
        const double ln_tau = std::log(tau);
        const double f = std::exp(nl.alpha * ln_tau);
        const double g = nl.omega * ln_tau;
        basis(i, 0) = 1.0;
        basis(i, 1) = f;
        basis(i, 2) = f * std::cos(g);
        basis(i, 3) = f * std::sin(g);
    }
    return Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(basis).rank() < 4;
}

}  // namespace detail

/// Exact solve of the linear sub-problem at a fixed nonlinear triple.
/// Returns the coefficient quad and the residual sum of squares.
inline std::pair<LinearQuad, double> subordinate_linear(const NonlinearTriple& nl,
                                                        std::span<const double> times,
                                                        std::span<const double> logp) {
    if (times.size() != logp.size())
        throw std::invalid_argument("times and log-prices differ in length");
    if (times.size() < 8)
        throw std::invalid_argument("subordinate_linear needs at least 8 observations");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("times must be strictly increasing");
    for (const double t : times)
        if (t == nl.tc)
            throw std::invalid_argument("tc coincides with an observation time");
    const auto solve = detail::solve_linear(nl, times, logp);
    if (!solve.ok)
        throw std::runtime_error("linear sub-problem is numerically degenerate");
    if (detail::is_rank_deficient(nl, times))
        throw std::runtime_error("rank-deficient basis in linear sub-problem");
    return {solve.lq, solve.cost};
}

/// Deterministic start grid: tc fraction varies slowest, then alpha, then
/// omega. Starts are clamped into the search box.
inline std::vector<NonlinearTriple> grid_starts(const FitConfig& cfg, const Window& window) {
    const auto box = detail::make_box(window);
    std::vector<NonlinearTriple> starts;
    starts.reserve(cfg.tc_grid.size() * cfg.alpha_starts.size() * cfg.omega_starts.size());
    for (const double frac : cfg.tc_grid)
        for (const double alpha : cfg.alpha_starts)
            for (const double omega : cfg.omega_starts) {
                std::array<double, 3> x{window.t2 + frac * window.length(), alpha, omega};
                box.clamp(x);
                starts.push_back({x[0], x[1], x[2]});
            }
    return starts;
}

/// Nelder-Mead descent on (tc, alpha, omega) with the linear quad solved
/// exactly at every step. The best-vertex cost is non-increasing; the
/// optional trace records it per iteration.
inline FitResult local_refine(const NonlinearTriple& start, std::span<const double> times,
                              std::span<const double> logp, const FitConfig& cfg,
                              std::optional<Window> window = std::nullopt,
                              std::vector<double>* trace = nullptr) {
    cfg.validate();
    if (times.size() != logp.size())
        throw std::invalid_argument("times and log-prices differ in length");
    if (times.size() < 8)
        throw std::invalid_argument("local_refine needs at least 8 observations");
    const Window w = window.value_or(
        Window{static_cast<int>(std::lround(times.front())), static_cast<int>(std::lround(times.back()))});
    const auto box = detail::make_box(w);
    if (!box.contains(start))
        throw std::invalid_argument("start triple outside the search bounds");

    const auto cost_at = [&](std::array<double, 3> x) {
        box.clamp(x);
        const auto solve = detail::solve_linear({x[0], x[1], x[2]}, times, logp);
        return solve.ok ? solve.cost : std::numeric_limits<double>::infinity();
    };

    // Initial simplex: the start plus one step per dimension, stepping
    // inward when the box edge is too close.
    std::array<std::array<double, 3>, 4> xs;
    std::array<double, 4> fs;
    xs[0] = {start.tc, start.alpha, start.omega};
    box.clamp(xs[0]);
    for (int d = 0; d < 3; ++d) {
        auto x = xs[0];
        const double h = 0.02 * (box.hi[d] - box.lo[d]);
        x[d] = (x[d] + h <= box.hi[d]) ? x[d] + h : x[d] - h;
        xs[d + 1] = x;
    }
    for (int v = 0; v < 4; ++v)
        fs[v] = cost_at(xs[v]);

    std::array<int, 4> order{0, 1, 2, 3};
    const auto sort_simplex = [&] {
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    };
    sort_simplex();

    bool converged = false;
    int iter = 0;
    for (; iter < cfg.max_iterations; ++iter) {
        if (trace)
            trace->push_back(fs[order[0]]);
        const double f_best = fs[order[0]];
        const double f_worst = fs[order[3]];
        if (std::isfinite(f_best) &&
            f_worst - f_best <= cfg.rel_tol * std::max(std::abs(f_best), 1e-18 * double(times.size()))) {
            converged = true;
            break;
        }

        std::array<double, 3> centroid{0, 0, 0};
        for (int v = 0; v < 3; ++v)
            for (int d = 0; d < 3; ++d)
                centroid[d] += xs[order[v]][d] / 3.0;

        const auto blend = [&](double coef) {
            std::array<double, 3> x;
            for (int d = 0; d < 3; ++d)
                x[d] = centroid[d] + coef * (xs[order[3]][d] - centroid[d]);
            box.clamp(x);
            return x;
        };

        const auto reflected = blend(-1.0);
        const double f_reflected = cost_at(reflected);
        if (f_reflected < fs[order[0]]) {
            const auto expanded = blend(-2.0);
            const double f_expanded = cost_at(expanded);
            if (f_expanded < f_reflected) {
                xs[order[3]] = expanded;
                fs[order[3]] = f_expanded;
            } else {
                xs[order[3]] = reflected;
                fs[order[3]] = f_reflected;
            }
        } else if (f_reflected < fs[order[2]]) {
            xs[order[3]] = reflected;
            fs[order[3]] = f_reflected;
        } else {
            const bool outside = f_reflected < fs[order[3]];
            const auto contracted = blend(outside ? -0.5 : 0.5);
            const double f_contracted = cost_at(contracted);
            if (f_contracted < std::min(f_reflected, fs[order[3]])) {
                xs[order[3]] = contracted;
                fs[order[3]] = f_contracted;
            } else {
                // Shrink toward the best vertex.
                for (int v = 1; v < 4; ++v) {
                    auto& x = xs[order[v]];
                    for (int d = 0; d < 3; ++d)
                        x[d] = xs[order[0]][d] + 0.5 * (x[d] - xs[order[0]][d]);
                    box.clamp(x);
                    fs[order[v]] = cost_at(x);
                }
            }
        }
        sort_simplex();
    }
    if (trace && (trace->empty() || iter == cfg.max_iterations))
        trace->push_back(fs[order[0]]);

    auto best = xs[order[0]];
    const auto solve = detail::solve_linear({best[0], best[1], best[2]}, times, logp);
    if (!solve.ok)
        throw std::runtime_error("refinement ended on a degenerate point");
    FitResult result;
    result.params = to_canonical({best[0], best[1], best[2]}, solve.lq);
    result.cost = solve.cost;
    result.n_points = static_cast<int>(times.size());
    result.rmse = std::sqrt(solve.cost / result.n_points);
    result.window = w;
    result.converged = converged;
    result.qualified = qualify(result, QualificationFilter{});
    return result;
}

/// Multi-start fit over explicit observation times: the full deterministic
/// grid always runs, topped up with seeded random starts when n_starts
/// exceeds the grid size. Returns the minimum-cost converged result; ties
/// go to the earliest start. Deterministic for fixed (input, config).
inline FitResult multistart_fit(std::span<const double> times, std::span<const double> logp,
                                const FitConfig& cfg, const QualificationFilter& filter,
                                const Window& window) {
    cfg.validate();
    filter.validate();
    if (static_cast<int>(times.size()) < kMinObservations)
        throw std::invalid_argument("too few observations: " + std::to_string(times.size()) +
                                    " < " + std::to_string(kMinObservations));
    const auto box = detail::make_box(window);

    std::vector<NonlinearTriple> starts = grid_starts(cfg, window);
    if (static_cast<int>(starts.size()) < cfg.n_starts) {
        const std::uint64_t window_key =
            (static_cast<std::uint64_t>(static_cast<std::uint32_t>(window.t1)) << 32) |
            static_cast<std::uint32_t>(window.t2);
        auto stream = rng::Stream(cfg.seed).substream(0xF17u, window_key);
        while (static_cast<int>(starts.size()) < cfg.n_starts)
            starts.push_back({stream.next_uniform(box.lo[0], box.hi[0]),
                              stream.next_uniform(0.05, 0.95), stream.next_uniform(2.0, 25.0)});
    }

    FitResult best;
    bool have_best = false;
    for (const auto& start : starts) {
        FitResult candidate;
        try {
            candidate = local_refine(start, times, logp, cfg, window);
        } catch (const std::exception&) {
            continue;
        }
        if (!candidate.converged)
            continue;
        if (!have_best || candidate.cost < best.cost) {
            best = candidate;
            have_best = true;
        }
    }
    if (!have_best)
        throw std::runtime_error("all fit starts failed on window [" +
                                 std::to_string(window.t1) + ", " + std::to_string(window.t2) +
                                 "]");
    best.qualified = qualify(best, filter);
    return best;
}

/// Multi-start fit of a whole sub-series, times taken from its own index.
inline FitResult multistart_fit(const PriceSeries& sub, const FitConfig& cfg,
                                const QualificationFilter& filter = {},
                                std::optional<Window> window_override = std::nullopt) {
    const auto index = sub.time_index();
    const std::vector<double> times(index.offsets.begin(), index.offsets.end());
    const std::vector<double> logp = log_prices(sub);
    const Window window = window_override.value_or(Window{0, sub.span()});
    return multistart_fit(times, logp, cfg, filter, window);
}

}  // namespace lppl

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lppl {

/// Parameters of the log-periodic power law
///   ln P(t) = A + B|t-tc|^alpha + C|t-tc|^alpha cos(omega ln|t-tc| + phi).
/// tc is a day offset in the same frame as the fitted observation times.
struct LpplParams {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double alpha = 0.5;  // in (0, 1)
    double omega = 8.0;  // > 0, rad per unit of ln|t-tc|
    double phi = 0.0;    // rad, reported in [0, 2*pi)
    double tc = 0.0;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("alpha must lie in (0, 1)");
        if (!(omega > 0.0))
            throw std::invalid_argument("omega must be positive");
        if (!std::isfinite(A) || !std::isfinite(B) || !std::isfinite(C) || !std::isfinite(phi) ||
            !std::isfinite(tc))
            throw std::invalid_argument("parameters must be finite");
    }
};

/// The three parameters the nonlinear search runs over.
struct NonlinearTriple {
    double tc;
    double alpha;
    double omega;
};

/// Coefficients of the linear sub-problem: C1 = C cos(phi), C2 = -C sin(phi),
/// so the oscillatory term becomes C1 f cos(omega ln|t-tc|) + C2 f sin(...).
struct LinearQuad {
    double A = 0.0;
    double B = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
};

inline double evaluate(const LpplParams& p, double t) {
    const double tau = std::abs(t - p.tc);
    if (tau == 0.0)
        throw std::invalid_argument("evaluate is singular at t == tc");
    const double f = std::pow(tau, p.alpha);
    return p.A + p.B * f + p.C * f * std::cos(p.omega * std::log(tau) + p.phi);
}

inline double evaluate_linearized(const NonlinearTriple& nl, const LinearQuad& lq, double t) {
    const double tau = std::abs(t - nl.tc);
    if (tau == 0.0)
        throw std::invalid_argument("evaluate is singular at t == tc");
    const double f = std::pow(tau, nl.alpha);
    const double g = nl.omega * std::log(tau);
    return lq.A + lq.B * f + lq.C1 * f * std::cos(g) + lq.C2 * f * std::sin(g);
}

/// Recovers (C, phi) from the linear coefficients; phi normalized to
/// [0, 2*pi), and the degenerate C1 = C2 = 0 case reports phi = 0.
inline LpplParams to_canonical(const NonlinearTriple& nl, const LinearQuad& lq) {
    LpplParams p;
    p.A = lq.A;
    p.B = lq.B;
    p.C = std::hypot(lq.C1, lq.C2);
    p.alpha = nl.alpha;
    p.omega = nl.omega;
    p.tc = nl.tc;
    if (p.C == 0.0) {
        p.phi = 0.0;
    } else {
        p.phi = std::atan2(-lq.C2, lq.C1);
        if (p.phi < 0.0)
            p.phi += 2.0 * std::numbers::pi;
        if (p.phi >= 2.0 * std::numbers::pi)
            p.phi = 0.0;
    }
    return p;
}

/// Partial derivatives of evaluate with respect to the nonlinear triple.
struct ModelPartials {
    double d_tc;
    double d_alpha;
    double d_omega;
};

inline ModelPartials partials(const LpplParams& p, double t) {
    const double signed_tau = t - p.tc;
    const double tau = std::abs(signed_tau);
    if (tau == 0.0)
        throw std::invalid_argument("partials are singular at t == tc");
    const double f = std::pow(tau, p.alpha);
    const double ln_tau = std::log(tau);
    const double g = p.omega * ln_tau + p.phi;
    const double cg = std::cos(g);
    const double sg = std::sin(g);
    ModelPartials out;
    // d f / d tc = -alpha f / (t - tc); d ln|t-tc| / d tc = -1 / (t - tc)
    out.d_tc = (-p.alpha * f / signed_tau) * (p.B + p.C * cg) + p.C * f * p.omega * sg / signed_tau;
    out.d_alpha = (p.B + p.C * cg) * f * ln_tau;
    out.d_omega = -p.C * f * sg * ln_tau;
    return out;
}

/// Parameter ranges a fit must satisfy to count as a bubble signature.
/// The alpha/omega windows and the B < 0, t2 < tc <= t2 + horizon rules are
/// the standard LPPL bubble ranges; min_trend and min_oscillation reject
/// numerically degenerate fits (flat or oscillation-free curves that satisfy
/// the sign conditions only through round-off).
struct QualificationFilter {
    double alpha_min = 0.1;
    double alpha_max = 0.9;
    double omega_min = 2.0;
    double omega_max = 25.0;
    bool require_b_negative = true;
    bool tc_after_t2 = true;
    double tc_max_horizon = 365.0;  // days beyond t2
    double min_trend = 1e-6;        // |B| (t2-t1)^alpha, log-price units
    double min_oscillation = 0.0;   // |C| (t2-t1)^alpha, log-price units

    void validate() const {
        if (!(alpha_min < alpha_max))
            throw std::invalid_argument("alpha_min must be below alpha_max");
        if (!(omega_min < omega_max))
            throw std::invalid_argument("omega_min must be below omega_max");
        if (!(tc_max_horizon > 0.0))
            throw std::invalid_argument("tc_max_horizon must be positive");
    }
};

/// Applies the filter to fitted parameters over the window [t1, t2].
inline bool qualify(const LpplParams& p, double t1, double t2, const QualificationFilter& f) {
    if (p.alpha < f.alpha_min || p.alpha > f.alpha_max)
        return false;
    if (p.omega < f.omega_min || p.omega > f.omega_max)
        return false;
    if (f.require_b_negative && !(p.B < 0.0))
        return false;
    if (f.tc_after_t2 && !(p.tc > t2 && p.tc <= t2 + f.tc_max_horizon))
        return false;
    const double scale = std::pow(t2 - t1, p.alpha);
    if (f.min_trend > 0.0 && std::abs(p.B) * scale < f.min_trend)
        return false;
    if (f.min_oscillation > 0.0 && std::abs(p.C) * scale < f.min_oscillation)
        return false;
    return true;
}

}  // namespace lppl

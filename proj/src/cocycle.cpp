#include "nalab/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nalab {

namespace {

State normalized(const Basis& basis, const State& v) {
    const double n = sup_norm(basis, v);
    if (!(n > 0.0) || !std::isfinite(n)) throw std::runtime_error("principal vector collapsed");
    return (1.0 / n) * v;
}

// ln c along [T_minus, T_plus] on a uniform grid, by propagating e(p.T_minus) and
// renormalizing every grid step. Entry i is ln c(T_minus + i h, p.T_minus).
std::vector<double> propagated_log_norms(const ProblemSpec& spec, BasePoint q, double length, double h,
                                         bool& reliable) {
    const auto est = estimate_principal(spec, q);
    reliable = est.converged;
    State v = est.e_of_p;
    const auto n = static_cast<long>(std::llround(length / h));
    std::vector<double> L(n + 1, 0.0);
    for (long i = 0; i < n; ++i) {
        v = linear_propagate(spec, translate(q, i * h), v, h);
        const double nv = sup_norm(*spec.basis, v);
        L[i + 1] = L[i] + std::log(nv);
        v = (1.0 / nv) * v;
    }
    return L;
}

Flag make_flag(bool value, double statistic, double threshold) { return Flag{value, statistic, threshold}; }

}  // namespace

SeparationEstimate estimate_principal(const ProblemSpec& spec, BasePoint p, double T_pull) {
    if (!(T_pull > 0.0)) throw std::invalid_argument("estimate_principal: T_pull must be > 0");
    const Basis& basis = *spec.basis;
    SeparationEstimate est;
    est.pullback_depth = T_pull;
    if (spec.linear_part == LinearPart::homogeneous) {
        est.e_of_p = basis.e0();
        est.residual = 0.0;
        est.converged = true;
        return est;
    }
    const State v1 = normalized(basis, linear_propagate(spec, translate(p, -T_pull), basis.e0(), T_pull));
    const State v2 =
        normalized(basis, linear_propagate(spec, translate(p, -2.0 * T_pull), basis.e0(), 2.0 * T_pull));
    est.e_of_p = v1;
    est.residual = sup_norm(basis, v1 - v2);
    est.converged = est.residual < 1e-6;
    return est;
}

CocycleValue cocycle_log(const ProblemSpec& spec, BasePoint p, double t, double T_pull) {
    if (spec.linear_part == LinearPart::homogeneous) {
        return CocycleValue{primitive_increment(spec, p, 0.0, t), true};
    }
    if (t == 0.0) return CocycleValue{0.0, true};
    const BasePoint start = t > 0.0 ? p : translate(p, t);
    const double len = std::abs(t);
    const auto est = estimate_principal(spec, start, T_pull);
    const State v = linear_propagate(spec, start, est.e_of_p, len);
    const double l = std::log(sup_norm(*spec.basis, v));
    return CocycleValue{t > 0.0 ? l : -l, est.converged};
}

double lyapunov_estimate(const ProblemSpec& spec, BasePoint p, double T) {
    if (!(T > 0.0)) throw std::invalid_argument("lyapunov_estimate: T must be > 0");
    return cocycle_log(spec, p, T).log_c / T;
}

ClassReport classify_point(const ProblemSpec& spec, BasePoint p, const Window& window,
                           const Thresholds& th) {
    if (!(window.T_minus < 0.0 && window.T_plus > 0.0))
        throw std::invalid_argument("classify_point: need T_minus < 0 < T_plus");
    ClassReport r;
    r.window = window;
    r.thresholds = th;

    if (spec.linear_part == LinearPart::homogeneous) {
        r.stats = window_stats(spec.driver, p, window.T_minus, window.T_plus, window.grid_step, th.eps_rec);
    } else {
        const double h = window.grid_step;
        const long i0 = std::llround(-window.T_minus / h);
        const double T_minus = -i0 * h;
        bool reliable = true;
        const auto L = propagated_log_norms(spec, translate(p, T_minus), window.T_plus - T_minus, h, reliable);
        r.reliable = reliable;
        const auto log_c = [&](double t) {
            auto i = i0 + std::llround(t / h);
            i = std::clamp<long>(i, 0, static_cast<long>(L.size()) - 1);
            return L[i] - L[i0];
        };
        r.stats = window_stats(log_c, T_minus, window.T_plus, h, th.eps_rec);
    }
    const auto& s = r.stats;
    const double log_zero = std::log(th.eps_zero);

    r.f_candidate = make_flag(s.max_log_past <= th.M_cut, s.max_log_past, th.M_cut);
    r.s_candidate = make_flag(!r.f_candidate.value, s.max_log_past, th.M_cut);
    r.a_plus = make_flag(s.max_log_future_tail <= log_zero, s.max_log_future_tail, log_zero);
    r.a_minus = make_flag(s.max_log_past_tail <= log_zero && r.f_candidate.value, s.max_log_past_tail,
                          log_zero);
    const double swing = std::min({-s.min_log_future, s.max_log_future, -s.min_log_past, s.max_log_past});
    r.oscillating = make_flag(swing > th.M_cut, swing, th.M_cut);
    r.recurrent_plus = make_flag(s.returns_future > 0, s.closest_return_future, th.eps_rec);
    r.recurrent_minus = make_flag(s.returns_past > 0, s.closest_return_past, th.eps_rec);
    r.forward_growth = make_flag(s.max_log_future > th.M_cut, s.max_log_future, th.M_cut);
    return r;
}

DominationReport separation_gap_check(const ProblemSpec& spec, BasePoint p, const State& z2, double T,
                                      double dt_sample) {
    if (!(T > 0.0 && dt_sample > 0.0)) throw std::invalid_argument("separation_gap_check: bad horizon");
    const Basis& basis = *spec.basis;
    if (std::abs(z2.coeffs(0)) > 1e-14 * z2.coeffs.norm())
        throw std::invalid_argument("separation_gap_check: z2 must have zero principal coefficient");

    DominationReport rep;
    rep.gap = basis.gap();
    const auto est = estimate_principal(spec, p);
    State u = z2;
    State v = est.e_of_p;
    const auto n = static_cast<long>(std::llround(T / dt_sample));
    const double h = T / n;
    for (long i = 0; i <= n; ++i) {
        if (i > 0) {
            u = linear_propagate(spec, translate(p, (i - 1) * h), u, h);
            v = linear_propagate(spec, translate(p, (i - 1) * h), v, h);
        }
        const double beta = u.coeffs.dot(v.coeffs) / v.coeffs.squaredNorm();
        const double ratio = sup_norm(basis, u - beta * v) / sup_norm(basis, v);
        rep.trace.emplace_back(i * h, ratio);
    }
    // Least squares for ln ratio = ln M - delta t over the last three quarters.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (const auto& [t, ratio] : rep.trace) {
        if (t < 0.25 * T || !(ratio > 1e-300)) continue;
        const double y = std::log(ratio);
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        ++m;
    }
    if (m >= 2) {
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        rep.fitted_rate = -slope;
        rep.fitted_M = std::exp((sy - slope * sx) / m);
    }
    rep.relative_error = std::abs(rep.fitted_rate - rep.gap) / rep.gap;
    return rep;
}

}  // namespace nalab

#include "nalab/attractor.hpp"
#include "nalab/parallel.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace nalab {

namespace {

constexpr double kMonotoneSlack = 1e-8;

std::vector<int> check_schedule(int n_max) {
    std::vector<int> ns;
    for (int n = 1; n < n_max; n *= 2) ns.push_back(n);
    ns.push_back(n_max);
    return ns;
}

PullbackResult pullback(const ProblemSpec& spec, BasePoint p, const PullbackParams& prm, double sign) {
    if (!(prm.t0 > 0.0)) throw std::invalid_argument("pullback: t0 must be > 0");
    if (!(prm.r > 0.0)) throw std::invalid_argument("pullback: r must be > 0");
    if (prm.n_max < 1) throw std::invalid_argument("pullback: n_max must be >= 1");
    const Basis& basis = *spec.basis;
    const State start = (sign * prm.r) * basis.e0();

    PullbackResult res;
    State checkpoint;
    for (int n : check_schedule(prm.n_max)) {
        // b_n and b_{n-1} share the final n-1 periods from p.(-(n-1) t0).
        const BasePoint q = translate(p, -(n - 1) * prm.t0);
        const State w = evolve(spec, translate(p, -n * prm.t0), start, prm.t0);
        const double rest = (n - 1) * prm.t0;
        State bn = evolve(spec, q, w, rest);
        State bprev = n == 1 ? start : evolve(spec, q, start, rest);

        PullbackCheck chk;
        chk.n = n;
        chk.residual = sup_norm(basis, bn - bprev);
        const Eigen::VectorXd d = basis.to_grid(sign * (bn - bprev));
        chk.monotone_violation = std::max(0.0, d.maxCoeff());
        chk.drift = n == 1 ? std::numeric_limits<double>::infinity() : sup_norm(basis, bn - checkpoint);
        res.record.checks.push_back(chk);
        res.record.monotone = res.record.monotone && chk.monotone_violation <= kMonotoneSlack;
        res.record.residual = chk.residual;
        res.record.depth = n * prm.t0;
        checkpoint = bn;
        res.b = std::move(bn);
        // A small step residual alone can sit on a plateau that a deeper past
        // (a dip of the driver further back) later leaves.
        if (chk.residual < prm.tol && chk.drift < prm.tol && n * prm.t0 >= prm.min_depth) {
            res.record.converged = true;
            break;
        }
    }
    return res;
}

double segment_objective(const Eigen::VectorXd& zg, const Eigen::VectorXd& bg, double beta) {
    return (zg - beta * bg).cwiseAbs().maxCoeff();
}

double golden_beta(const Eigen::VectorXd& zg, const Eigen::VectorXd& bg) {
    // The objective is convex in beta (a max of affine functions in absolute value).
    const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = -1.0, hi = 1.0;
    double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
    double f1 = segment_objective(zg, bg, x1), f2 = segment_objective(zg, bg, x2);
    while (hi - lo > 1e-12) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = segment_objective(zg, bg, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = segment_objective(zg, bg, x2);
        }
    }
    double best = 0.5 * (lo + hi);
    double fbest = segment_objective(zg, bg, best);
    for (double edge : {-1.0, 1.0}) {
        const double fe = segment_objective(zg, bg, edge);
        if (fe < fbest) {
            fbest = fe;
            best = edge;
        }
    }
    return best;
}

double interval_distance(const Eigen::VectorXd& zg, const Eigen::VectorXd& bg) {
    double d = 0.0;
    for (Eigen::Index j = 0; j < zg.size(); ++j) {
        const double cap = std::max(bg(j), 0.0);
        d = std::max(d, std::abs(zg(j)) - cap);
    }
    return d;
}

}  // namespace

PullbackParams default_pullback_params(const ProblemSpec& spec) {
    PullbackParams prm;
    const double A = spec.driver.sup_abs_bound();
    // Power forms have |a| unbounded at the kink; the bound 4 stays above every
    // attractor section met in their windows.
    prm.r = std::isfinite(A) ? std::max(absorbing_radius(spec, A), 4.0) : 4.0;
    return prm;
}

PullbackResult pullback_upper_boundary(const ProblemSpec& spec, BasePoint p, const PullbackParams& params) {
    return pullback(spec, p, params, 1.0);
}

PullbackResult pullback_lower_boundary(const ProblemSpec& spec, BasePoint p, const PullbackParams& params) {
    return pullback(spec, p, params, -1.0);
}

std::vector<PullbackResult> pullback_many(const ProblemSpec& spec, const std::vector<BasePoint>& points,
                                          const PullbackParams& params, int threads) {
    std::vector<PullbackResult> out(points.size());
    parallel_for(points.size(), threads,
                 [&](std::size_t i) { out[i] = pullback_upper_boundary(spec, points[i], params); });
    return out;
}

const BoundarySample& BoundaryTrajectory::at(double t) const {
    if (samples.empty()) throw std::out_of_range("BoundaryTrajectory is empty");
    const double t_first = samples.front().t;
    auto i = static_cast<long>(std::llround((t - t_first) / dt_sample));
    i = std::clamp<long>(i, 0, static_cast<long>(samples.size()) - 1);
    return samples[i];
}

BoundaryTrajectory boundary_trajectory(const ProblemSpec& spec, BasePoint p, double t_begin, double t_end,
                                       double dt_sample, const PullbackParams& params, double anchor_every,
                                       int threads) {
    if (!(dt_sample > 0.0) || !(t_end >= t_begin))
        throw std::invalid_argument("boundary_trajectory: bad sample grid");
    const auto n = static_cast<long>(std::llround((t_end - t_begin) / dt_sample));
    long per_anchor = n + 1;
    if (anchor_every > 0.0) per_anchor = std::max<long>(1, std::llround(anchor_every / dt_sample));

    BoundaryTrajectory bt;
    bt.params = params;
    bt.dt_sample = dt_sample;
    std::vector<long> anchor_index;
    for (long i = 0; i <= n; i += per_anchor) anchor_index.push_back(i);
    std::vector<BasePoint> anchors;
    for (long i : anchor_index) {
        bt.anchor_times.push_back(t_begin + i * dt_sample);
        anchors.push_back(translate(p, t_begin + i * dt_sample));
    }

    bt.samples.resize(n + 1);
    parallel_for(anchors.size(), threads, [&](std::size_t a) {
        const auto pb = pullback_upper_boundary(spec, anchors[a], params);
        const long i0 = anchor_index[a];
        const long i1 = a + 1 < anchor_index.size() ? anchor_index[a + 1] : n + 1;
        const long count = i1 - i0 - 1;
        long k = 0;
        auto record = [&](double, const State& s) {
            auto& out = bt.samples[i0 + k];
            out.t = t_begin + (i0 + k) * dt_sample;
            out.b = s;
            out.residual = pb.record.residual;
            out.converged = pb.record.converged;
            ++k;
        };
        if (count > 0) {
            (void)evolve_observed(spec, anchors[a], pb.b, count * dt_sample, dt_sample, record);
        } else {
            record(0.0, pb.b);
        }
    });
    return bt;
}

EquilibriumResidual equilibrium_residual(const ProblemSpec& spec, BasePoint p, const State& b, double T,
                                         int n_checkpoints, const PullbackParams& params, int threads) {
    if (n_checkpoints < 1 || !(T > 0.0)) throw std::invalid_argument("equilibrium_residual: bad checkpoints");
    const double h = T / n_checkpoints;
    std::vector<State> forward;
    (void)evolve_observed(spec, p, b, T, h, [&](double t, const State& s) {
        if (t > 0.0) forward.push_back(s);
    });
    std::vector<BasePoint> pts;
    for (int i = 1; i <= n_checkpoints; ++i) pts.push_back(translate(p, i * h));
    const auto fresh = pullback_many(spec, pts, params, threads);

    EquilibriumResidual out;
    const Basis& basis = *spec.basis;
    // Sections below 10 tol are declared b = 0, an exact equilibrium.
    const double zero_cut = 10.0 * params.tol;
    const bool b_zero = sup_norm(basis, b) < zero_cut;
    for (int i = 0; i < n_checkpoints; ++i) {
        const double nb = sup_norm(basis, fresh[i].b);
        const State fwd = b_zero ? State::zero(b.size()) : forward[i];
        const State ref = nb < zero_cut ? State::zero(b.size()) : fresh[i].b;
        const double diff = sup_norm(basis, fwd - ref);
        const double rel = diff == 0.0 ? 0.0 : diff / std::max(nb, params.tol);
        out.per_checkpoint.emplace_back((i + 1) * h, rel);
        out.value = std::max(out.value, rel);
    }
    return out;
}

double segment_beta(const Basis& basis, const State& z, const State& b) {
    return golden_beta(basis.to_grid(z), basis.to_grid(b));
}

double section_distance(const Basis& basis, const State& z, const SectionModel& model) {
    switch (model.mode) {
    case SectionMode::zero:
        return sup_norm(basis, z);
    case SectionMode::segment: {
        const double beta = segment_beta(basis, z, model.b_ref);
        return sup_norm(basis, z - beta * model.b_ref);
    }
    case SectionMode::order_interval:
        return interval_distance(basis.to_grid(z), basis.to_grid(model.b_ref));
    }
    return 0.0;
}

std::vector<State> sample_initial_conditions(const Basis& basis, double R, int k, std::uint64_t seed) {
    if (!(R > 0.0)) throw std::invalid_argument("sample_initial_conditions: R must be > 0");
    const int n = basis.modes();
    auto scaled = [&](State s) { return (R / sup_norm(basis, s)) * s; };
    std::vector<State> out;
    const State e0 = basis.e0();
    State mixed = basis.unit(0) + basis.unit(1) + basis.unit(2);
    out.push_back(scaled(e0));
    out.push_back(scaled(-e0));
    out.push_back(scaled(mixed));
    out.push_back(scaled(-mixed));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    while (static_cast<int>(out.size()) < k) {
        // sum_k |a_k| (k+1) <= 1/2 keeps e0 + sum a_k e_k positive for the
        // sine and cosine bases; other bases are checked and shrunk.
        State s = e0;
        for (int j = 1; j < n; ++j) s.coeffs(j) = 0.5 * unif(rng) / ((j + 1) * std::ldexp(1.0, j));
        while (basis.to_grid(s).minCoeff() <= 0.0) s.coeffs.tail(n - 1) *= 0.5;
        out.push_back(scaled(s));
    }
    out.resize(static_cast<std::size_t>(std::max(k, 0)));
    return out;
}

std::vector<DistanceSample> forwards_distance_profile(const ProblemSpec& spec, BasePoint p,
                                                      const std::vector<State>& initial,
                                                      const BoundaryTrajectory& boundary, int threads) {
    if (boundary.samples.empty()) return {};
    const Basis& basis = *spec.basis;
    const auto n = boundary.samples.size();
    const double T = boundary.samples.back().t - boundary.samples.front().t;
    const BasePoint start = translate(p, boundary.samples.front().t);

    std::vector<Eigen::VectorXd> bgrid(n);
    for (std::size_t i = 0; i < n; ++i) bgrid[i] = basis.to_grid(boundary.samples[i].b);

    std::vector<std::vector<DistanceSample>> per(initial.size());
    parallel_for(initial.size(), threads, [&](std::size_t s) {
        auto& rows = per[s];
        rows.reserve(n);
        std::size_t i = 0;
        auto observe = [&](double, const State& u) {
            if (i >= n) return;
            const Eigen::VectorXd ug = basis.to_grid(u);
            DistanceSample d;
            d.t = boundary.samples[i].t;
            const double beta = golden_beta(ug, bgrid[i]);
            d.dist_segment = sup_norm(basis, u - beta * boundary.samples[i].b);
            d.dist_interval = interval_distance(ug, bgrid[i]);
            d.dist_zero = sup_norm(basis, u);
            rows.push_back(d);
            ++i;
        };
        if (n == 1) {
            observe(0.0, initial[s]);
        } else {
            (void)evolve_observed(spec, start, initial[s], T, boundary.dt_sample, observe);
        }
    });

    std::vector<DistanceSample> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].t = boundary.samples[i].t;
        out[i].dist_zero_min = std::numeric_limits<double>::infinity();
        for (const auto& rows : per) {
            out[i].dist_segment = std::max(out[i].dist_segment, rows[i].dist_segment);
            out[i].dist_interval = std::max(out[i].dist_interval, rows[i].dist_interval);
            out[i].dist_zero = std::max(out[i].dist_zero, rows[i].dist_zero);
            out[i].dist_zero_min = std::min(out[i].dist_zero_min, rows[i].dist_zero);
        }
    }
    return out;
}

std::vector<DistanceSample> forwards_distance_to_zero(const ProblemSpec& spec, BasePoint p,
                                                      const std::vector<State>& initial, double T,
                                                      double dt_sample, int threads) {
    const Basis& basis = *spec.basis;
    std::vector<std::vector<std::pair<double, double>>> per(initial.size());
    parallel_for(initial.size(), threads, [&](std::size_t s) {
        (void)evolve_observed(spec, p, initial[s], T, dt_sample,
                              [&](double t, const State& u) { per[s].emplace_back(t, sup_norm(basis, u)); });
    });
    std::vector<DistanceSample> out;
    if (per.empty()) return out;
    out.resize(per.front().size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].t = per.front()[i].first;
        out[i].dist_zero_min = std::numeric_limits<double>::infinity();
        for (const auto& rows : per) {
            out[i].dist_zero = std::max(out[i].dist_zero, rows[i].second);
            out[i].dist_zero_min = std::min(out[i].dist_zero_min, rows[i].second);
        }
        out[i].dist_segment = out[i].dist_interval = out[i].dist_zero;
    }
    return out;
}

LiYorkeResult li_yorke_probe(const ProblemSpec& spec, BasePoint p, double lambda1, double lambda2, const State& b,
                             double T, double dt_sample) {
    if (std::abs(lambda1) > 1.0 || std::abs(lambda2) > 1.0)
        throw std::invalid_argument("li_yorke_probe: |lambda| must be <= 1");
    const Basis& basis = *spec.basis;
    std::vector<State> first;
    (void)evolve_observed(spec, p, lambda1 * b, T, dt_sample, [&](double, const State& u) { first.push_back(u); });
    LiYorkeResult res;
    std::size_t i = 0;
    (void)evolve_observed(spec, p, lambda2 * b, T, dt_sample, [&](double t, const State& u) {
        res.trace.emplace_back(t, sup_norm(basis, u - first[i]));
        ++i;
    });
    res.liminf_est = std::numeric_limits<double>::infinity();
    res.limsup_est = 0.0;
    for (const auto& [t, d] : res.trace) {
        if (t < 0.5 * T) continue;
        res.liminf_est = std::min(res.liminf_est, d);
        res.limsup_est = std::max(res.limsup_est, d);
    }
    return res;
}

std::vector<double> crossing_times(const ProblemSpec& spec, const BoundaryTrajectory& boundary) {
    std::vector<double> out;
    const double r0 = spec.nonlinearity.r0;
    double t_prev = 0.0, f_prev = 0.0;
    bool first = true;
    for (const auto& s : boundary.samples) {
        const double f = sup_norm(*spec.basis, s.b) - r0;
        if (!first && ((f_prev < 0.0 && f > 0.0) || (f_prev > 0.0 && f < 0.0))) {
            out.push_back(t_prev + (s.t - t_prev) * f_prev / (f_prev - f));
        }
        if (f != 0.0 || first) {
            t_prev = s.t;
            f_prev = f;
        }
        first = false;
    }
    return out;
}

B1Result compute_b1(const ProblemSpec& spec, BasePoint p, const Window& window, const Thresholds& thresholds) {
    B1Result res;
    const auto rep = classify_point(spec, p, window, thresholds);
    if (rep.s_candidate.value) {
        res.refused = true;
        res.m_hat = std::exp(rep.stats.max_log_past);
        return res;
    }
    double log_m = rep.stats.max_log_past;
    if (spec.linear_part == LinearPart::homogeneous) {
        // Polish the grid maximum of the closed-form ln c within one grid cell.
        const double h = window.grid_step;
        const double lo = std::max(window.T_minus, rep.stats.argmax_past - h);
        const double hi = std::min(0.0, rep.stats.argmax_past + h);
        if (hi > lo) {
            const auto [tm, neg] = boost::math::tools::brent_find_minima(
                [&](double t) { return -cocycle_log_exact(spec.driver, p, t); }, lo, hi, 52);
            (void)tm;
            log_m = std::max(log_m, -neg);
        }
    }
    res.m_hat = std::exp(log_m);
    const auto est = estimate_principal(spec, p);
    res.b1 = (spec.nonlinearity.r0 / res.m_hat) * est.e_of_p;
    return res;
}

Cone cone_membership(const Basis& basis, const State& z, double tol) {
    if (sup_norm(basis, z) <= tol) return Cone::zero;
    const Eigen::VectorXd v = basis.to_grid(z);
    bool pos = v.minCoeff() > 0.0;
    bool neg = v.maxCoeff() < 0.0;
    if (basis.bc().kind == BoundaryKind::dirichlet) {
        const double d0 = basis.eval_dx(z, 0.0);
        const double d1 = -basis.eval_dx(z, std::numbers::pi);
        pos = pos && d0 > 0.0 && d1 > 0.0;
        neg = neg && d0 < 0.0 && d1 < 0.0;
    } else if (basis.bc().kind == BoundaryKind::neumann) {
        const double f0 = basis.eval(z, 0.0);
        const double f1 = basis.eval(z, std::numbers::pi);
        pos = pos && f0 > 0.0 && f1 > 0.0;
        neg = neg && f0 < 0.0 && f1 < 0.0;
    }
    if (pos) return Cone::strictly_positive;
    if (neg) return Cone::strictly_negative;
    return Cone::mixed;
}

SublinearTrace sublinear_convergence_test(const ProblemSpec& spec, BasePoint p, double scale,
                                          const BoundaryTrajectory& boundary, const Window& window,
                                          const Thresholds& thresholds) {
    SublinearTrace out;
    if (boundary.samples.empty()) return out;
    const Basis& basis = *spec.basis;
    const auto rep = classify_point(spec, p, window, thresholds);
    // g(lambda y) < lambda g(y) for y > r0 and lambda > 1 holds whenever kappa > 0.
    const bool sublinear = spec.nonlinearity.kappa > 0.0;
    out.theorem_backed = sublinear && rep.f_candidate.value && rep.forward_growth.value;

    const auto n = boundary.samples.size();
    const double T = boundary.samples.back().t - boundary.samples.front().t;
    const BasePoint start = translate(p, boundary.samples.front().t);
    std::size_t i = 0;
    auto observe = [&](double, const State& u) {
        if (i >= n) return;
        out.trace.emplace_back(boundary.samples[i].t, sup_norm(basis, u - boundary.samples[i].b));
        ++i;
    };
    const State z0 = scale * boundary.samples.front().b;
    if (n == 1) {
        observe(0.0, z0);
    } else {
        (void)evolve_observed(spec, start, z0, T, boundary.dt_sample, observe);
    }
    out.final_value = out.trace.back().second;
    return out;
}

double angle_to_e0(const State& z) {
    const double c0 = std::abs(z.coeffs(0));
    const double rest = z.coeffs.tail(z.size() - 1).norm();
    return std::atan2(rest, c0);
}

}  // namespace nalab

// Pullback boundary b(p) = sup A(p) and the diagnostics built on it.
#pragma once

#include "nalab/cocycle.hpp"

#include <cstdint>
#include <vector>

namespace nalab {

struct PullbackParams {
    double r = 4.0;      ///< initial bound, r >= absorbing radius
    double t0 = 5.0;
    double tol = 1e-6;
    int n_max = 400;
    double min_depth = 100.0;  ///< no convergence is declared at shallower depth
};

/// Defaults with r = max(absorbing_radius(spec), 4).
[[nodiscard]] PullbackParams default_pullback_params(const ProblemSpec& spec);

struct PullbackCheck {
    int n = 0;                  ///< b_n compared with b_{n-1}
    double residual = 0.0;      ///< ||b_n - b_{n-1}||_inf
    double monotone_violation = 0.0;  ///< max over the grid of (b_n - b_{n-1})_+
    double drift = 0.0;         ///< ||b_n - b_m||_inf, m the previous checkpoint (inf at n = 1)
};

struct PullbackRecord {
    std::vector<PullbackCheck> checks;  ///< on the schedule n = 1, 2, 4, ..., n_max
    bool converged = false;
    bool monotone = true;               ///< all violations <= 1e-8
    double residual = 0.0;              ///< last residual
    double depth = 0.0;                 ///< n * t0 of the returned iterate
};

struct PullbackResult {
    State b;
    PullbackRecord record;
};

/// b_n(p) = u(n t0, p.(-n t0), r e0). Consecutive pairs (b_n, b_{n-1}) are
/// compared on the doubling schedule n = 1, 2, 4, ... (and n_max), which costs
/// O(n_max t0) instead of O(n_max^2 t0). Stops once both the residual and the
/// drift from the previous checkpoint are below tol.
[[nodiscard]] PullbackResult pullback_upper_boundary(const ProblemSpec& spec, BasePoint p,
                                                     const PullbackParams& params);

/// Same construction from -r e0: the lower boundary a(p).
[[nodiscard]] PullbackResult pullback_lower_boundary(const ProblemSpec& spec, BasePoint p,
                                                     const PullbackParams& params);

/// Independent pullbacks at several base points, run on `threads` workers and
/// returned in input order.
[[nodiscard]] std::vector<PullbackResult> pullback_many(const ProblemSpec& spec,
                                                        const std::vector<BasePoint>& points,
                                                        const PullbackParams& params, int threads = 0);

struct BoundarySample {
    double t = 0.0;
    State b;
    double residual = 0.0;  ///< residual of the pullback anchoring this sample
    bool converged = false;
};

/// Samples of b(p.t) on [t_begin, t_end]. An anchor is a fresh pullback; between
/// anchors b is carried forward by the semiflow, b(p.(t+h)) = u(h, p.t, b(p.t)).
struct BoundaryTrajectory {
    std::vector<BoundarySample> samples;
    PullbackParams params;
    double dt_sample = 0.5;
    std::vector<double> anchor_times;

    [[nodiscard]] const BoundarySample& at(double t) const;  ///< nearest sample
};

/// anchor_every <= 0 means a single anchor at t_begin.
[[nodiscard]] BoundaryTrajectory boundary_trajectory(const ProblemSpec& spec, BasePoint p, double t_begin,
                                                     double t_end, double dt_sample,
                                                     const PullbackParams& params,
                                                     double anchor_every = 0.0, int threads = 0);

/// max over checkpoints t_i = i T / n of ||u(t_i, p, b) - b(p.t_i)|| / max(||b(p.t_i)||, tol),
/// with b(p.t_i) recomputed by pullback.
struct EquilibriumResidual {
    double value = 0.0;
    std::vector<std::pair<double, double>> per_checkpoint;
};
[[nodiscard]] EquilibriumResidual equilibrium_residual(const ProblemSpec& spec, BasePoint p, const State& b,
                                                       double T, int n_checkpoints,
                                                       const PullbackParams& params, int threads = 0);

enum class SectionMode { segment, order_interval, zero };

struct SectionModel {
    SectionMode mode = SectionMode::segment;
    State b_ref;
};

/// Distance of z to {beta b : |beta| <= 1}, to [-b, b], or to {0}.
[[nodiscard]] double section_distance(const Basis& basis, const State& z, const SectionModel& model);
/// Golden-section minimizer over beta in [-1, 1] used by the segment distance.
[[nodiscard]] double segment_beta(const Basis& basis, const State& z, const State& b);

/// {+-R e0, +-R mixed, R random positive, ...}, first k of them. Sup norm of each is R.
[[nodiscard]] std::vector<State> sample_initial_conditions(const Basis& basis, double R, int k,
                                                           std::uint64_t seed);

struct DistanceSample {
    double t = 0.0;
    double dist_segment = 0.0;
    double dist_interval = 0.0;
    double dist_zero = 0.0;
    double dist_zero_min = 0.0;  ///< min over the initial conditions of ||u||
};

/// For each t of the boundary's grid: max over the initial conditions of the distance
/// from u(t, p, z) to the section model at p.t. Boundary samples are relative to p.
[[nodiscard]] std::vector<DistanceSample> forwards_distance_profile(const ProblemSpec& spec, BasePoint p,
                                                                    const std::vector<State>& initial,
                                                                    const BoundaryTrajectory& boundary,
                                                                    int threads = 0);

/// Same without a boundary, measuring only the distance to {0} on a uniform grid.
[[nodiscard]] std::vector<DistanceSample> forwards_distance_to_zero(const ProblemSpec& spec, BasePoint p,
                                                                    const std::vector<State>& initial, double T,
                                                                    double dt_sample, int threads = 0);

struct LiYorkeResult {
    double liminf_est = 0.0;
    double limsup_est = 0.0;
    std::vector<std::pair<double, double>> trace;  ///< (t, ||u(t,p,z2) - u(t,p,z1)||)
};

/// z_i = lambda_i b(p); running min and max of the distance over the tail half.
[[nodiscard]] LiYorkeResult li_yorke_probe(const ProblemSpec& spec, BasePoint p, double lambda1, double lambda2,
                                           const State& b, double T, double dt_sample);

/// Sign changes of ||b(p.t)|| - r0, located by linear interpolation.
[[nodiscard]] std::vector<double> crossing_times(const ProblemSpec& spec, const BoundaryTrajectory& boundary);

struct B1Result {
    State b1;
    double m_hat = 0.0;
    bool refused = false;   ///< s_candidate evidence: m_hat grows with the window
};

/// b1(p) = (r0 / m_hat) e(p) with m_hat = max over [T_minus, 0] of c(t, p).
[[nodiscard]] B1Result compute_b1(const ProblemSpec& spec, BasePoint p, const Window& window = {},
                                  const Thresholds& thresholds = {});

enum class Cone { strictly_positive, strictly_negative, zero, mixed };

/// ||z|| <= tol is zero. Otherwise the interior grid values must share one
/// strict sign, and for Dirichlet the boundary slopes z'(0), -z'(pi) must too.
[[nodiscard]] Cone cone_membership(const Basis& basis, const State& z, double tol);

struct SublinearTrace {
    std::vector<std::pair<double, double>> trace;  ///< (t, ||u(t,p,z0) - b(p.t)||)
    bool theorem_backed = false;  ///< the nonlinearity is sublinear, f_candidate and forward_growth evidence
    double final_value = 0.0;
};

/// ||u(t, p, scale b(p)) - b(p.t)|| along the boundary's sample grid.
[[nodiscard]] SublinearTrace sublinear_convergence_test(const ProblemSpec& spec, BasePoint p, double scale,
                                                        const BoundaryTrajectory& boundary,
                                                        const Window& window = {},
                                                        const Thresholds& thresholds = {});

/// Angle between z and e0 in the coefficient space, radians.
[[nodiscard]] double angle_to_e0(const State& z);

}  // namespace nalab

// The 1-dim principal cocycle c(t, p), Lyapunov estimates and finite-horizon
// classification of base points.
#pragma once

#include "nalab/dynamics.hpp"

#include <string>
#include <vector>

namespace nalab {

struct SeparationEstimate {
    State e_of_p;             ///< sup-normalized, interior-positive
    double pullback_depth = 0.0;
    double residual = 0.0;    ///< sup distance to the estimate at depth 2 T_pull
    bool converged = false;   ///< residual < 1e-6
};

/// normalize(phi(T_pull, p.(-T_pull)) e0), compared against depth 2 T_pull.
/// Homogeneous mode returns e0 with residual 0.
[[nodiscard]] SeparationEstimate estimate_principal(const ProblemSpec& spec, BasePoint p,
                                                    double T_pull = 20.0);

struct CocycleValue {
    double log_c = 0.0;
    bool reliable = true;
};

/// ln c(t, p). Exact I(s+t) - I(s) in homogeneous mode; otherwise
/// ln ||phi(t, p) e(p)||_inf with e(p) from estimate_principal. t may be negative,
/// via c(t, p) = 1 / c(-t, p.t).
[[nodiscard]] CocycleValue cocycle_log(const ProblemSpec& spec, BasePoint p, double t,
                                       double T_pull = 20.0);

/// ln c(t, p) / t.
[[nodiscard]] double lyapunov_estimate(const ProblemSpec& spec, BasePoint p, double T);

struct Thresholds {
    double M_cut = 8.0;     ///< "bounded" means ln c stays <= M_cut
    double eps_zero = 1e-3; ///< "tends to 0" means c <= eps_zero on the last quarter
    double eps_rec = 0.5;   ///< a return is |ln c| <= eps_rec
};

struct Window {
    double T_minus = -2000.0;
    double T_plus = 2000.0;
    double grid_step = 0.5;
};

/// A boolean with the statistic that decided it and the threshold it was compared to.
struct Flag {
    bool value = false;
    double statistic = 0.0;
    double threshold = 0.0;
};

struct ClassReport {
    Flag f_candidate;      ///< max over [T_minus, 0] of ln c <= M_cut
    Flag s_candidate;      ///< the negation of f_candidate
    Flag a_plus;           ///< ln c <= ln eps_zero on [3 T_plus/4, T_plus]
    Flag a_minus;          ///< ln c <= ln eps_zero on [T_minus, 3 T_minus/4], and f_candidate
    Flag oscillating;      ///< both halves dip below -M_cut and peak above M_cut
    Flag recurrent_plus;   ///< returns to |ln c| <= eps_rec at t >= T_plus / 2
    Flag recurrent_minus;  ///< same on t <= T_minus / 2
    Flag forward_growth;   ///< max over [0, T_plus] of ln c > M_cut (limsup c = inf proxy)
    WindowStats stats;
    Thresholds thresholds;
    Window window;
    bool reliable = true;
};

/// Finite-horizon evidence for the asymptotic classes of p.
[[nodiscard]] ClassReport classify_point(const ProblemSpec& spec, BasePoint p, const Window& window = {},
                                         const Thresholds& thresholds = {});

struct DominationReport {
    double fitted_rate = 0.0;  ///< delta in ratio(t) ~ M exp(-delta t)
    double fitted_M = 0.0;
    double gap = 0.0;          ///< basis gap mu_0 - mu_1
    double relative_error = 0.0;
    std::vector<std::pair<double, double>> trace;  ///< (t, ratio)
};

/// Fits the decay of ||phi(t,p) z2||_perp / ||phi(t,p) e(p)||, where the
/// numerator drops the component of phi(t,p) z2 along phi(t,p) e(p)
/// (coefficient-space projection). In homogeneous mode that component is 0.
[[nodiscard]] DominationReport separation_gap_check(const ProblemSpec& spec, BasePoint p, const State& z2,
                                                    double T, double dt_sample = 0.25);

}  // namespace nalab

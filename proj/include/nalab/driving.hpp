// Base flow and forcing signals.
//
// A Driver is a scalar signal a(t) together with its closed-form primitive
// I(t) = \int_0^t a. The hull of the signal is never built; a base point is a
// time offset s along the one orbit, and p.t is the offset s + t. Along that
// orbit the principal cocycle of a spatially homogeneous linear part is
// ln c(t, p_s) = I(s + t) - I(s), evaluated without quadrature.
#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace nalab {

enum class DriverKind { trig_poly, geometric_limit_periodic, synthetic_window };

/// One term A sin(omega t + phase). omega == 0 gives the constant A sin(phase).
struct TrigTerm {
    double amplitude = 0.0;
    double frequency = 0.0;
    double phase = 0.0;
};

/// I(t) = scale * sign_future * t^beta for t > 0 and
///        scale * sign_past * |t|^beta   for t < 0, with 0 < beta < 1.
///
/// sign_past = sign_future = -1 : even -|t|^beta. I <= 0 and I -> -inf both
///   ways, so the point is asymptotic at +inf and -inf (P_a^+ and P_a^- in P_f).
/// sign_past = sign_future = +1 : even +|t|^beta. Unbounded on t <= 0 (P_s)
///   with forward growth.
/// sign_past = +1, sign_future = -1 : odd -sign(t)|t|^beta. P_s and P_a^+.
/// sign_past = -1, sign_future = +1 : P_a^- (so P_f) with limsup c = inf forward.
///
/// The kink at t = 0 has an infinite one-sided derivative; a(0) is 0 by
/// symmetry convention.
struct PowerForm {
    double beta = 0.5;
    double scale = 1.0;
    double sign_past = -1.0;
    double sign_future = -1.0;
};

/// A C^1 dip centred at `center`: depth * cos^2(pi u / 2) for |u| <= 1 with
/// u = (t - center) / half_width, zero outside.
struct Dip {
    double center = 0.0;
    double depth = 0.0;
    double half_width = 1.0;
};

/// Dip-and-return profile:
///   I(t) = -rho(t) - sum_j dip_j(t),
///   rho(t) = baseline * 4 u^2 / (1 + u^2)^2,   u = t / baseline_scale.
/// rho vanishes at t = 0 and decays like t^-2, so between dips the signal
/// returns towards its supremum 0 as |t| grows in both directions. Depths may
/// grow along the train to model an unbounded cocycle with deep recurrent dips
/// (P_f and recurrent, liminf c = 0). With baseline = 0 every plateau returns
/// exactly to 0.
struct DipTrainForm {
    double baseline = 0.0;
    double baseline_scale = 1.0;
    std::vector<Dip> dips;
};

using WindowForm = std::variant<std::monostate, PowerForm, DipTrainForm>;

class Driver {
public:
    Driver() = default;

    static Driver zero();
    static Driver trig(std::vector<TrigTerm> terms, double mean = 0.0);
    /// a(t) = -sum_{k=1..K} amp_ratio^k sin(freq_ratio^k t); defaults 1/2, 1/4.
    static Driver geometric(int K, double amp_ratio = 0.5, double freq_ratio = 0.25);
    static Driver power(PowerForm form);
    static Driver dip_train(DipTrainForm form);

    /// Dips of depth depth0 + depth_growth*|j| centred at (j + 1/2) * period for
    /// j in [j_min, j_max]; plateaus of width period - 2*half_width separate them.
    static DipTrainForm make_dip_train(double period, double half_width, double depth0,
                                       double depth_growth, int j_min, int j_max,
                                       double baseline, double baseline_scale);

    /// The same signal plus extra zero-mean trig terms k(t). The cocycle picks up
    /// the bounded factor exp(J(s+t) - J(s)), J the primitive of k.
    [[nodiscard]] Driver plus(std::vector<TrigTerm> extra) const;
    [[nodiscard]] const std::vector<TrigTerm>& extra_terms() const { return extra_; }

    [[nodiscard]] double eval(double t) const;
    [[nodiscard]] double primitive(double t) const;

    /// Upper bound for |a(t)| over all t; +inf for power forms.
    [[nodiscard]] double sup_abs_bound() const;
    /// Bound on the discarded tail of a truncated geometric series, 0 otherwise.
    [[nodiscard]] double tail_bound() const { return tail_bound_; }

    [[nodiscard]] DriverKind kind() const { return kind_; }
    [[nodiscard]] const std::vector<TrigTerm>& terms() const { return terms_; }
    [[nodiscard]] double mean() const { return mean_; }
    [[nodiscard]] const WindowForm& window_form() const { return window_; }
    [[nodiscard]] int geometric_order() const { return geometric_k_; }
    [[nodiscard]] double geometric_amp_ratio() const { return amp_ratio_; }
    [[nodiscard]] double geometric_freq_ratio() const { return freq_ratio_; }

    std::string class_hint;

private:
    double base_eval(double t) const;
    double base_primitive(double t) const;
    double base_sup_abs_bound() const;

    DriverKind kind_ = DriverKind::trig_poly;
    std::vector<TrigTerm> terms_;
    double mean_ = 0.0;
    WindowForm window_;
    int geometric_k_ = 0;
    double amp_ratio_ = 0.5;
    double freq_ratio_ = 0.25;
    double tail_bound_ = 0.0;
    std::vector<TrigTerm> extra_;
};

/// Point of the base flow: an offset along the driver orbit.
struct BasePoint {
    double offset = 0.0;
};

[[nodiscard]] inline BasePoint translate(BasePoint p, double t) { return BasePoint{p.offset + t}; }

/// ln c(t, p) for the spatially homogeneous principal mode.
[[nodiscard]] inline double cocycle_log_exact(const Driver& d, BasePoint p, double t) {
    return d.primitive(p.offset + t) - d.primitive(p.offset);
}

struct WindowStats {
    double max_log_past = 0.0;      ///< max of ln c over [T_minus, 0]
    double argmax_past = 0.0;
    double min_log_past = 0.0;
    double max_log_future = 0.0;    ///< max of ln c over [0, T_plus]
    double min_log_future = 0.0;
    double rec_threshold = 0.0;     ///< |t| >= this counts as a late return
    double rec_eps = 0.0;
    int returns_future = 0;         ///< entries into |ln c| <= eps at t >= rec_threshold
    int returns_past = 0;
    double deepest_dip_future = 0.0;  ///< min ln c between late returns
    double deepest_dip_past = 0.0;
    double closest_return_future = 0.0;  ///< min |ln c| at t >= rec_threshold
    double closest_return_past = 0.0;
    double max_log_future_tail = 0.0;  ///< max of ln c over the last quarter [3 T_plus/4, T_plus]
    double max_log_past_tail = 0.0;    ///< max of ln c over [T_minus, 3 T_minus/4]
};

/// Statistics of ln c(t, p) on [T_minus, T_plus] sampled with `grid_step`.
/// Returns within `rec_eps` of 0 are counted for |t| >= rec_threshold.
[[nodiscard]] WindowStats window_stats(const Driver& d, BasePoint p, double T_minus, double T_plus,
                                       double grid_step, double rec_eps = 0.5,
                                       double rec_threshold = -1.0);

/// Same statistics for an arbitrary sampled ln c(t), t relative to the base point.
[[nodiscard]] WindowStats window_stats(const std::function<double(double)>& log_c, double T_minus,
                                       double T_plus, double grid_step, double rec_eps = 0.5,
                                       double rec_threshold = -1.0);

}  // namespace nalab

#include "nalab/driving.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nalab {

namespace {

constexpr double kPi = std::numbers::pi;

double trig_eval(const std::vector<TrigTerm>& terms, double t) {
    double a = 0.0;
    for (const auto& term : terms) a += term.amplitude * std::sin(term.frequency * t + term.phase);
    return a;
}

// Closed form. cos(phase) - cos(w t + phase) = 2 sin(w t/2 + phase) sin(w t/2),
// which avoids the cancellation of the naive difference for small w t.
double trig_primitive(const std::vector<TrigTerm>& terms, double t) {
    double I = 0.0;
    for (const auto& term : terms) {
        const double w = term.frequency;
        if (w == 0.0) {
            I += term.amplitude * std::sin(term.phase) * t;
        } else {
            const double half = 0.5 * w * t;
            I += term.amplitude * 2.0 * std::sin(half + term.phase) * std::sin(half) / w;
        }
    }
    return I;
}

double power_primitive(const PowerForm& f, double t) {
    if (t > 0.0) return f.scale * f.sign_future * std::pow(t, f.beta);
    if (t < 0.0) return f.scale * f.sign_past * std::pow(-t, f.beta);
    return 0.0;
}

double power_eval(const PowerForm& f, double t) {
    if (t > 0.0) return f.scale * f.sign_future * f.beta * std::pow(t, f.beta - 1.0);
    if (t < 0.0) return -f.scale * f.sign_past * f.beta * std::pow(-t, f.beta - 1.0);
    return 0.0;
}

double baseline_value(const DipTrainForm& f, double t) {
    if (f.baseline == 0.0) return 0.0;
    const double u = t / f.baseline_scale;
    const double q = 1.0 + u * u;
    return f.baseline * 4.0 * u * u / (q * q);
}

double baseline_slope(const DipTrainForm& f, double t) {
    if (f.baseline == 0.0) return 0.0;
    const double u = t / f.baseline_scale;
    const double q = 1.0 + u * u;
    return f.baseline * 8.0 * u * (1.0 - u * u) / (q * q * q * f.baseline_scale);
}

double dip_train_primitive(const DipTrainForm& f, double t) {
    double I = -baseline_value(f, t);
    for (const auto& dip : f.dips) {
        const double u = (t - dip.center) / dip.half_width;
        if (std::abs(u) < 1.0) {
            const double c = std::cos(0.5 * kPi * u);
            I -= dip.depth * c * c;
        }
    }
    return I;
}

double dip_train_eval(const DipTrainForm& f, double t) {
    double a = -baseline_slope(f, t);
    for (const auto& dip : f.dips) {
        const double u = (t - dip.center) / dip.half_width;
        if (std::abs(u) < 1.0) {
            // d/dt [-D cos^2(pi u/2)] = D (pi/2) sin(pi u) / w
            a += dip.depth * 0.5 * kPi * std::sin(kPi * u) / dip.half_width;
        }
    }
    return a;
}

}  // namespace

Driver Driver::zero() { return trig({}, 0.0); }

Driver Driver::trig(std::vector<TrigTerm> terms, double mean) {
    Driver d;
    d.kind_ = DriverKind::trig_poly;
    d.terms_ = std::move(terms);
    d.mean_ = mean;
    return d;
}

Driver Driver::geometric(int K, double amp_ratio, double freq_ratio) {
    if (K < 1) throw std::invalid_argument("geometric driver: K must be >= 1");
    if (!(amp_ratio > 0.0 && amp_ratio < 1.0))
        throw std::invalid_argument("geometric driver: amplitude ratio must lie in (0,1)");
    if (!(freq_ratio > 0.0 && freq_ratio < 1.0))
        throw std::invalid_argument("geometric driver: frequency ratio must lie in (0,1)");
    Driver d;
    d.kind_ = DriverKind::geometric_limit_periodic;
    d.geometric_k_ = K;
    d.amp_ratio_ = amp_ratio;
    d.freq_ratio_ = freq_ratio;
    for (int k = 1; k <= K; ++k) {
        d.terms_.push_back(TrigTerm{-std::pow(amp_ratio, k), std::pow(freq_ratio, k), 0.0});
    }
    d.tail_bound_ = std::pow(amp_ratio, K + 1) / (1.0 - amp_ratio);
    return d;
}

Driver Driver::power(PowerForm form) {
    if (!(form.beta > 0.0 && form.beta < 1.0))
        throw std::invalid_argument("power window: beta must lie in (0,1)");
    if (std::abs(form.sign_past) != 1.0 || std::abs(form.sign_future) != 1.0)
        throw std::invalid_argument("power window: signs must be +1 or -1");
    Driver d;
    d.kind_ = DriverKind::synthetic_window;
    d.window_ = form;
    return d;
}

Driver Driver::dip_train(DipTrainForm form) {
    if (form.baseline < 0.0) throw std::invalid_argument("dip train: baseline must be >= 0");
    if (form.baseline > 0.0 && form.baseline_scale <= 0.0)
        throw std::invalid_argument("dip train: baseline_scale must be > 0");
    for (const auto& dip : form.dips) {
        if (dip.depth < 0.0 || dip.half_width <= 0.0)
            throw std::invalid_argument("dip train: dips need depth >= 0 and half_width > 0");
        if (std::abs(dip.center) < dip.half_width)
            throw std::invalid_argument("dip train: a dip may not cover t = 0");
    }
    Driver d;
    d.kind_ = DriverKind::synthetic_window;
    d.window_ = std::move(form);
    return d;
}

DipTrainForm Driver::make_dip_train(double period, double half_width, double depth0,
                                    double depth_growth, int j_min, int j_max, double baseline,
                                    double baseline_scale) {
    if (period <= 0.0 || half_width <= 0.0 || 2.0 * half_width > period)
        throw std::invalid_argument("dip train: need 0 < 2*half_width <= period");
    DipTrainForm f;
    f.baseline = baseline;
    f.baseline_scale = baseline_scale;
    for (int j = j_min; j <= j_max; ++j) {
        const double index = j >= 0 ? j : -j - 1;  // symmetric depth profile about t = 0
        f.dips.push_back(Dip{(j + 0.5) * period, depth0 + depth_growth * index, half_width});
    }
    return f;
}

Driver Driver::plus(std::vector<TrigTerm> extra) const {
    Driver d = *this;
    d.extra_.insert(d.extra_.end(), extra.begin(), extra.end());
    return d;
}

double Driver::eval(double t) const { return base_eval(t) + trig_eval(extra_, t); }

double Driver::primitive(double t) const { return base_primitive(t) + trig_primitive(extra_, t); }

double Driver::base_eval(double t) const {
    switch (kind_) {
        case DriverKind::trig_poly:
        case DriverKind::geometric_limit_periodic:
            return mean_ + trig_eval(terms_, t);
        case DriverKind::synthetic_window:
            if (const auto* f = std::get_if<PowerForm>(&window_)) return power_eval(*f, t);
            if (const auto* f = std::get_if<DipTrainForm>(&window_)) return dip_train_eval(*f, t);
            return 0.0;
    }
    return 0.0;
}

double Driver::base_primitive(double t) const {
    switch (kind_) {
        case DriverKind::trig_poly:
        case DriverKind::geometric_limit_periodic:
            return mean_ * t + trig_primitive(terms_, t);
        case DriverKind::synthetic_window:
            if (const auto* f = std::get_if<PowerForm>(&window_)) return power_primitive(*f, t);
            if (const auto* f = std::get_if<DipTrainForm>(&window_)) return dip_train_primitive(*f, t);
            return 0.0;
    }
    return 0.0;
}

double Driver::sup_abs_bound() const {
    double extra = 0.0;
    for (const auto& term : extra_) extra += std::abs(term.amplitude);
    return extra + base_sup_abs_bound();
}

double Driver::base_sup_abs_bound() const {
    switch (kind_) {
        case DriverKind::trig_poly:
        case DriverKind::geometric_limit_periodic: {
            double A = std::abs(mean_);
            for (const auto& term : terms_) A += std::abs(term.amplitude);
            return A;
        }
        case DriverKind::synthetic_window:
            if (std::holds_alternative<PowerForm>(window_))
                return std::numeric_limits<double>::infinity();
            if (const auto* f = std::get_if<DipTrainForm>(&window_)) {
                // |rho'| <= 1.74 baseline / scale.
                double A = f->baseline > 0.0 ? 2.0 * f->baseline / f->baseline_scale : 0.0;
                double dip_max = 0.0;
                for (const auto& dip : f->dips)
                    dip_max = std::max(dip_max, 0.5 * kPi * dip.depth / dip.half_width);
                return A + dip_max;
            }
            return 0.0;
    }
    return 0.0;
}

WindowStats window_stats(const Driver& d, BasePoint p, double T_minus, double T_plus,
                         double grid_step, double rec_eps, double rec_threshold) {
    const double I0 = d.primitive(p.offset);
    return window_stats([&](double t) { return d.primitive(p.offset + t) - I0; }, T_minus, T_plus,
                        grid_step, rec_eps, rec_threshold);
}

WindowStats window_stats(const std::function<double(double)>& log_c, double T_minus, double T_plus,
                         double grid_step, double rec_eps, double rec_threshold) {
    if (!(grid_step > 0.0)) throw std::invalid_argument("window_stats: grid_step must be > 0");
    if (!(T_minus < 0.0 && T_plus > 0.0))
        throw std::invalid_argument("window_stats: need T_minus < 0 < T_plus");

    WindowStats s;
    s.rec_eps = rec_eps;
    s.rec_threshold = rec_threshold;

    const double inf = std::numeric_limits<double>::infinity();
    s.max_log_past = -inf;
    s.min_log_past = inf;
    s.max_log_future = -inf;
    s.min_log_future = inf;
    s.closest_return_future = inf;
    s.closest_return_past = inf;
    s.max_log_future_tail = -inf;
    s.max_log_past_tail = -inf;

    const double thr_future = rec_threshold >= 0.0 ? rec_threshold : 0.5 * T_plus;
    const double thr_past = rec_threshold >= 0.0 ? rec_threshold : -0.5 * T_minus;

    // Forward half, including t = 0.
    {
        const auto n = static_cast<long>(std::ceil(T_plus / grid_step));
        bool inside = false;
        double dip = inf;
        for (long i = 0; i <= n; ++i) {
            const double t = std::min(i * grid_step, T_plus);
            const double v = log_c(t);
            s.max_log_future = std::max(s.max_log_future, v);
            s.min_log_future = std::min(s.min_log_future, v);
            if (t >= 0.75 * T_plus) s.max_log_future_tail = std::max(s.max_log_future_tail, v);
            if (t >= thr_future) {
                s.closest_return_future = std::min(s.closest_return_future, std::abs(v));
                const bool now = std::abs(v) <= rec_eps;
                if (now && !inside) {
                    ++s.returns_future;
                    if (dip < inf) s.deepest_dip_future = std::min(s.deepest_dip_future, dip);
                    dip = inf;
                }
                if (!now) dip = std::min(dip, v);
                inside = now;
            }
        }
    }
    // Backward half, walking from 0 towards T_minus.
    {
        const auto n = static_cast<long>(std::ceil(-T_minus / grid_step));
        bool inside = false;
        double dip = inf;
        for (long i = 0; i <= n; ++i) {
            const double t = std::max(-i * grid_step, T_minus);
            const double v = log_c(t);
            if (v > s.max_log_past) {
                s.max_log_past = v;
                s.argmax_past = t;
            }
            s.min_log_past = std::min(s.min_log_past, v);
            if (t <= 0.75 * T_minus) s.max_log_past_tail = std::max(s.max_log_past_tail, v);
            if (-t >= thr_past) {
                s.closest_return_past = std::min(s.closest_return_past, std::abs(v));
                const bool now = std::abs(v) <= rec_eps;
                if (now && !inside) {
                    ++s.returns_past;
                    if (dip < inf) s.deepest_dip_past = std::min(s.deepest_dip_past, dip);
                    dip = inf;
                }
                if (!now) dip = std::min(dip, v);
                inside = now;
            }
        }
    }
    return s;
}

}  // namespace nalab

// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance            all criteria
//   acceptance 4 9        selected criteria
//
// Exit status is 0 only if every selected criterion passes.

#include "nalab/lab.hpp"

#include "../support/shooting.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace nalab;

namespace {

constexpr double kPi = std::numbers::pi;

struct Line {
    bool pass = false;
    std::string what;
    std::string measured;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ProblemSpec default_spec(Driver d, BoundaryKind bc = BoundaryKind::dirichlet) {
    ProblemSpec s;
    s.basis = Basis::build({bc}, 64, 256);
    s.driver = std::move(d);
    return s;
}

double sup_diff(const ProblemSpec& s, const State& a, const State& b) { return sup_norm(*s.basis, a - b); }
double min_grid(const ProblemSpec& s, const State& a) { return s.basis->to_grid(a).minCoeff(); }

const fs::path& scratch() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "nalab_acceptance";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

ExperimentConfig shipped(const std::string& name) {
    auto c = load_config(std::string(NALAB_SOURCE_DIR) + "/configs/" + name + ".json");
    c.output.directory = scratch().string();
    return c;
}

RunRecord run(const ExperimentConfig& c) {
    RunOptions o;
    o.use_cache = false;
    return run_experiment(c, o);
}

// Pass if every assertion selected by `keep` passes; lists the measured values.
Line from_record(const RunRecord& r, const std::function<bool(const Assertion&)>& keep, Line line) {
    line.pass = true;
    std::ostringstream os;
    for (const auto& a : r.assertions) {
        if (!keep(a)) continue;
        line.pass = line.pass && a.pass;
        if (!os.str().empty()) os << "; ";
        os << a.name << " = " << num(a.measured) << (a.pass ? "" : " (FAIL)");
    }
    line.measured += (line.measured.empty() ? "" : "; ") + os.str();
    return line;
}

// ---- 1 ---------------------------------------------------------------------

Line semiflow() {
    std::mt19937_64 rng(20261017);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const auto random_driver = [&] {
        if (u01(rng) < 0.2) return Driver::geometric(6);
        std::vector<TrigTerm> terms;
        const int n = 1 + static_cast<int>(3 * u01(rng));
        for (int k = 0; k < n; ++k) terms.push_back({u01(rng), 0.3 + 1.7 * u01(rng), 2 * kPi * u01(rng)});
        return Driver::trig(terms);
    };
    const auto random_state = [&](const ProblemSpec& spec, double scale, bool positive) {
        State s = State::zero(spec.basis->modes());
        for (int k = 0; k < 8; ++k) s.coeffs(k) = scale * (u01(rng) - 0.5) / (k + 1);
        if (positive) {
            s.coeffs(0) = 0.0;
            s.coeffs(0) = std::max(-min_grid(spec, s), 0.0) + scale * u01(rng);
        }
        return s;
    };
    const auto aligned = [&](double lo, double hi) { return std::round((lo + (hi - lo) * u01(rng)) * 100) / 100; };

    double v_cocycle = 0, v_odd = 0, v_mono = 0, v_dom = 0, v_sub = 0, max_tol = 0;
    for (int trial = 0; trial < 50; ++trial) {
        auto spec = default_spec(random_driver());
        auto half = default_spec(spec.driver);
        half.integrator.dt = 0.5 * spec.integrator.dt;
        const BasePoint p{200.0 * u01(rng) - 100.0};
        const double t = aligned(0.5, 3.0), s = aligned(0.5, 3.0);
        const State z = random_state(spec, 12.0 * u01(rng), false);
        const State uz = evolve(spec, p, z, t);
        // Integrator tolerance: Richardson estimate of the dt error of this run.
        const double tol = 4.0 / 3.0 * sup_diff(spec, uz, evolve(half, p, z, t));
        max_tol = std::max(max_tol, tol);
        const auto excess = [&](double v) { return std::max(0.0, v - tol); };

        const State whole = evolve(spec, p, z, t + s);
        const State split = evolve(spec, translate(p, s), evolve(spec, p, z, s), t);
        v_cocycle = std::max(v_cocycle, excess(sup_diff(spec, whole, split)));
        v_odd = std::max(v_odd, excess(sup_diff(spec, evolve(spec, p, -z, t), -uz)));

        const State lo = random_state(spec, 6.0, false);
        const State hi = lo + random_state(spec, 3.0, true);
        v_mono = std::max(v_mono, excess(-min_grid(spec, evolve(spec, p, hi, t) - evolve(spec, p, lo, t))));

        const State pos = random_state(spec, 6.0, true);
        const State upos = evolve(spec, p, pos, t);
        v_dom = std::max(v_dom, excess(-min_grid(spec, linear_propagate(spec, p, pos, t) - upos)));
        const double lam = 1.0 + 2.0 * u01(rng);
        v_sub = std::max(v_sub, excess(-min_grid(spec, lam * upos - evolve(spec, p, lam * pos, t))));
    }

    double order = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 10; ++trial) {
        auto spec = default_spec(random_driver());
        const BasePoint p{100.0 * u01(rng)};
        const State z = random_state(spec, 8.0, false) + 3.0 * spec.basis->e0();
        std::vector<State> runs;
        // Halving from the default step.
        for (double dt : {1e-2, 5e-3, 2.5e-3}) {
            spec.integrator.dt = dt;
            runs.push_back(evolve(spec, p, z, 2.0));
        }
        const double o = std::log2(sup_diff(spec, runs[0], runs[1]) / sup_diff(spec, runs[1], runs[2]));
        order = std::min(order, o);
    }
    const double worst = std::max({v_cocycle, v_odd, v_mono, v_dom, v_sub});
    Line l;
    l.what = "semiflow properties on 50 random instances, self-convergence order";
    l.pass = worst <= 1e-8 && order >= 1.9;
    l.measured = "violations beyond integrator tol: cocycle " + num(v_cocycle) + ", odd " + num(v_odd) +
                 ", monotone " + num(v_mono) + ", linear domination " + num(v_dom) + ", sublinear " +
                 num(v_sub) + " (max tol " + num(max_tol) + "); min order " + num(order);
    return l;
}

// ---- 2 ---------------------------------------------------------------------

Line exact_linear() {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double worst = 0.0;
    for (auto bc : {BoundaryKind::dirichlet, BoundaryKind::neumann}) {
        for (int trial = 0; trial < 10; ++trial) {
            const double A = u01(rng), w = 0.5 + u01(rng), phi = 2 * kPi * u01(rng), mean = 0.2 * (u01(rng) - 0.5);
            const auto spec = default_spec(Driver::trig({{A, w, phi}}, mean), bc);
            const BasePoint p{50.0 * u01(rng)};
            // a = mean + A sin(w t + phi), so I = mean t - (A / w) cos(w t + phi).
            const auto I = [&](double t) { return mean * t - A / w * std::cos(w * t + phi); };
            State z = State::zero(64);
            for (int k = 0; k < 64; ++k) z.coeffs(k) = (u01(rng) - 0.5) / (1 + 0.1 * k);
            for (double T : {0.5, 5.0, 50.0, 100.0}) {
                Eigen::VectorXd exact(64);
                for (int k = 0; k < 64; ++k) {
                    // Laplacian eigenvalue shifted by gamma0, so mode 0 is neutral.
                    const double mu = bc == BoundaryKind::dirichlet ? 1.0 - double((k + 1) * (k + 1)) : -double(k * k);
                    exact(k) = z.coeffs(k) * std::exp(mu * T + I(p.offset + T) - I(p.offset));
                }
                const State lp = linear_propagate(spec, p, z, T);
                State stepped;
                (void)evolve_observed(spec, p, z, T, T, [&](double, const State& s) { stepped = s; }, true);
                worst = std::max(worst, (lp.coeffs - exact).norm() / exact.norm());
                worst = std::max(worst, (stepped.coeffs - exact).norm() / exact.norm());
            }
        }
    }
    return {worst <= 1e-10, "homogeneous linear propagation vs closed form, T <= 100",
            "max relative error " + num(worst)};
}

// ---- 3 ---------------------------------------------------------------------

Line lyapunov_null() {
    const double T = 1000.0;
    const std::vector<std::pair<std::string, Driver>> drivers{
        {"0.5 sin t", Driver::trig({{0.5, 1.0, 0.0}})},
        {"sin t + 0.3 sin(sqrt2 t)", Driver::trig({{1.0, 1.0, 0.0}, {0.3, std::sqrt(2.0), 0.0}})},
        {"geometric K=6", Driver::geometric(6)},
    };
    Line l{true, "Lyapunov exponent of bounded-primitive drivers, mean -0.1 control", ""};
    for (const auto& [name, d] : drivers) {
        const auto spec = default_spec(d);
        for (double s : {0.0, 37.0}) {
            double supI = 0.0;
            for (double t = 0.0; t <= T; t += 0.01) supI = std::max(supI, std::abs(d.primitive(s + t)));
            const double lam = lyapunov_estimate(spec, {s}, T);
            const bool ok = std::abs(lam) <= 2.0 * supI / T;
            l.pass = l.pass && ok;
            l.measured += name + " @" + num(s) + ": |l| " + num(std::abs(lam)) + " vs " + num(2 * supI / T) +
                          (ok ? "" : " (FAIL)") + "; ";
        }
    }
    const auto control = default_spec(Driver::trig({{0.5, 1.0, 0.0}}, -0.1));
    const double lam = lyapunov_estimate(control, {3.0}, T);
    const bool ok = std::abs(lam + 0.1) <= 1e-3;
    l.pass = l.pass && ok;
    l.measured += "control " + std::to_string(lam) + (ok ? "" : " (FAIL)");
    return l;
}

// ---- 4 ---------------------------------------------------------------------

Line pullback_boundary() {
    Line l{true, "pullback boundary: monotone, r-independent, equilibrium, odd, autonomous oracle", ""};
    const auto add = [&](bool ok, const std::string& text) {
        l.pass = l.pass && ok;
        l.measured += text + (ok ? "" : " (FAIL)") + "; ";
    };
    struct Case {
        std::string name;
        Driver driver;
        double offset;
    };
    const std::vector<Case> cases{
        {"0.5 sin t", Driver::trig({{0.5, 1.0, 0.0}}), 0.0},
        {"F&R dip train", Driver::dip_train(Driver::make_dip_train(60, 15, 6, 1, -80, 80, 0.2, 400)), 120.0},
    };
    for (const auto& c : cases) {
        const auto spec = default_spec(c.driver);
        PullbackParams prm;
        const BasePoint p{c.offset};
        const auto b4 = pullback_upper_boundary(spec, p, prm);
        add(b4.record.monotone, c.name + " monotone");
        prm.r = 8.0;
        const auto b8 = pullback_upper_boundary(spec, p, prm);
        prm.r = 4.0;
        add(sup_diff(spec, b4.b, b8.b) <= 2 * prm.tol, c.name + " |b(r=4) - b(r=8)| " + num(sup_diff(spec, b4.b, b8.b)));
        const auto lower = pullback_lower_boundary(spec, p, prm);
        const double odd = sup_norm(*spec.basis, lower.b + b4.b);
        add(odd <= 2 * prm.tol, c.name + " |lower + b| " + num(odd));
        const auto eq = equilibrium_residual(spec, p, b4.b, 50.0, 10, prm, 0);
        add(eq.value <= 5 * prm.tol, c.name + " equilibrium residual " + num(eq.value));
        if (!b4.record.converged) l.measured += c.name + " pullback residual " + num(b4.record.residual) + "; ";
    }

    const auto t0 = std::chrono::steady_clock::now();
    const Nonlinearity nl;
    const double A = oracle::maximal_steady_amplitude(nl);
    const double oracle_seconds = seconds_since(t0);
    const auto aut = default_spec(Driver::zero());
    const auto b = pullback_upper_boundary(aut, {}, PullbackParams{});
    const double err = sup_diff(aut, b.b, A * aut.basis->e0());
    add(err <= 1e-4 && oracle_seconds < 1.0,
        "autonomous |b - oracle| " + num(err) + " (oracle " + num(oracle_seconds) + " s)");
    return l;
}

// ---- 5 to 12 ---------------------------------------------------------------

bool is_prerequisite(const Assertion& a) { return a.name.rfind("pullback", 0) == 0; }

std::string prerequisite_info(const RunRecord& r) {
    std::string out;
    for (const auto& a : r.assertions)
        if (is_prerequisite(a)) out += "; (info) " + a.name + " " + num(a.measured);
    return out;
}

Line b_case() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run(shipped("b_case_forwards"));
    const double secs = seconds_since(t0);
    Line l{secs <= 120.0, "forwards attraction to the segment model, trig driver, R in {1,2,4,8,16}",
           "runtime " + num(secs) + " s"};
    const Line d = from_record(r, [](const Assertion& a) { return a.name.rfind("distance", 0) == 0; }, {});
    l.pass = l.pass && d.pass;
    l.measured += "; " + d.measured;
    l.measured += prerequisite_info(r);
    return l;
}

const auto all = [](const Assertion&) { return true; };

Line pinched() {
    return from_record(run(shipped("pinched_no_forwards")), all,
                       {false, "pinched section, no forwards attraction to {0}", ""});
}

Line asymptotic() {
    return from_record(run(shipped("asymptotic_zero_attractor")), all,
                       {false, "nontrivial b(p), yet forwards decay to zero", ""});
}

const RunRecord& fr_record() {
    static const RunRecord r = run(shipped("fr_segment_liyorke"));
    return r;
}

Line fr_regime() {
    Line l = from_record(fr_record(),
                         [](const Assertion& a) { return a.name.rfind("Li-Yorke", 0) != 0 && !is_prerequisite(a); },
                         {false, "F&R driver: boundary stays in the linear zone along e0", ""});
    l.measured += prerequisite_info(fr_record());
    return l;
}

Line li_yorke() {
    Line l = from_record(fr_record(), [](const Assertion& a) { return a.name.rfind("Li-Yorke", 0) == 0; },
                         {false, "Li-Yorke pair on the F&R driver, bounded trig control", ""});
    const auto spec = default_spec(Driver::trig({{0.5, 1.0, 0.0}}));
    const auto b = pullback_upper_boundary(spec, {}, PullbackParams{}).b;
    const auto ly = li_yorke_probe(spec, {}, 0.2, 0.9, b, 1000.0, 0.5);
    const bool ok = ly.liminf_est >= 0.1 * 0.7;
    l.pass = l.pass && ok;
    l.measured += "; control liminf_est " + num(ly.liminf_est) + (ok ? "" : " (FAIL)");
    return l;
}

Line cone() {
    Line l{true, "200 attractor samples over 4 drivers, none of mixed sign", ""};
    for (const auto& name : {"cone_containment", "fr_segment_liyorke", "asymptotic_zero_attractor",
                             "sublinear_forwards"}) {
        auto c = shipped(name);
        c.experiment.name = "cone_containment";
        c.experiment.samples = 50;
        c.experiment.T = std::min(c.experiment.T, 200.0);
        const auto r = run(c);
        l = from_record(r, [](const Assertion& a) { return a.name.rfind("mixed", 0) == 0; }, l);
        l.measured += std::string(" [") + name + "]";
    }
    return l;
}

Line sublinear() {
    return from_record(run(shipped("sublinear_forwards")), all,
                       {false, "sublinear forwards attraction from 2 b and b/2, b1 formula and order", ""});
}

Line absorbing() {
    const auto c = shipped("absorbing_check");
    const double rstar = absorbing_radius(build_spec(c));
    Line l{std::abs(rstar - 4.0) <= 1e-6, "absorption into ||u|| <= r* from 10 r*", "r* = " + num(rstar)};
    const auto r = run(c);
    const Line d = from_record(r, all, {});
    l.pass = l.pass && d.pass;
    l.measured += "; " + d.measured;
    for (const auto& a : r.assertions) l.measured += "; " + a.detail;
    return l;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Line()>> criteria{semiflow, exact_linear, lyapunov_null, pullback_boundary,
                                                      b_case,   pinched,      asymptotic,    fr_regime,
                                                      li_yorke, cone,         sublinear,     absorbing};
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Line l;
        try {
            l = criteria[i]();
        } catch (const std::exception& e) {
            l = {false, "criterion raised", e.what()};
        }
        failed += !l.pass;
        std::printf("criterion %2d  %s  %s  [%.1f s]\n    %s\n", id, l.pass ? "PASS" : "FAIL", l.what.c_str(),
                    seconds_since(t0), l.measured.c_str());
        std::fflush(stdout);
    }
    fs::remove_all(scratch());
    return failed == 0 ? 0 : 1;
}

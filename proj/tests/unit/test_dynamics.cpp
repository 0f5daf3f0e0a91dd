#include <doctest.h>

#include "nalab/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

using namespace nalab;

namespace {

ProblemSpec default_spec(Driver d, int N = 32, int M = 128) {
    ProblemSpec s;
    s.basis = Basis::build({BoundaryKind::dirichlet}, N, M);
    s.driver = std::move(d);
    return s;
}

double sup_diff(const ProblemSpec& s, const State& a, const State& b) { return sup_norm(*s.basis, a - b); }

double min_grid(const ProblemSpec& s, const State& a) { return s.basis->to_grid(a).minCoeff(); }

}  // namespace

TEST_CASE("nonlinearity examples and structural conditions") {
    const Nonlinearity nl{1.0, 1.0};
    CHECK(g_eval(nl, 0.5) == 0.0);
    CHECK(g_eval(nl, 2.0) == -1.0);
    CHECK(g_eval(nl, 3.0) == -4.0);
    CHECK(g_eval(nl, 3.0) < 2.0 * g_eval(nl, 1.5));
    for (double y = -6.0; y <= 6.0; y += 0.01) {
        CHECK(y * g_eval(nl, y) <= 0.0);
        CHECK(g_eval(nl, -y) == -g_eval(nl, y));
        CHECK((g_eval(nl, y) == 0.0) == (std::abs(y) <= 1.0));
        if (y > 1.0) {
            for (double lam : {1.01, 1.5, 2.0, 5.0}) CHECK(g_eval(nl, lam * y) < lam * g_eval(nl, y));
        }
    }
    // g'(0) = 0 and g(y)/y -> -infinity.
    CHECK(g_eval(nl, 1e-6) / 1e-6 == 0.0);
    double prev = 0.0;
    for (double y = 2.0; y < 1e4; y *= 2.0) {
        const double q = g_eval(nl, y) / y;
        CHECK(q < prev);
        prev = q;
    }
}

TEST_CASE("linear propagation is the closed-form per-mode solution") {
    const auto spec = default_spec(Driver::trig({{0.5, 1.0, 0.0}}));
    const BasePoint p{1.3};
    for (double T : {0.7, 10.0, 100.0}) {
        const double dI = spec.driver.primitive(p.offset + T) - spec.driver.primitive(p.offset);
        const State e0t = linear_propagate(spec, p, 0.3 * spec.basis->e0(), T);
        CHECK(e0t.coeffs(0) == doctest::Approx(0.3 * std::exp(dI)).epsilon(1e-14));
        const State e1t = linear_propagate(spec, p, spec.basis->unit(1), T);
        CHECK(e1t.coeffs(1) == doctest::Approx(std::exp(-3.0 * T + dI)).epsilon(1e-12));
    }
    // The stepper reproduces the closed form when g is off.
    State z = State::zero(32);
    for (int k = 0; k < 6; ++k) z.coeffs(k) = 1.0 / (k + 1);
    State stepped;
    evolve_observed(spec, p, z, 50.0, 5.0, [&](double, const State& s) { stepped = s; }, true);
    const State exact = linear_propagate(spec, p, z, 50.0);
    CHECK((stepped.coeffs - exact.coeffs).norm() / exact.coeffs.norm() < 1e-10);
}

TEST_CASE("zero is a fixed point") {
    const auto spec = default_spec(Driver::geometric(6));
    const State u = evolve(spec, {}, State::zero(32), 20.0);
    CHECK(u.coeffs.norm() == 0.0);
}

TEST_CASE("nonlinear run against a fine-step reference") {
    auto spec = default_spec(Driver::zero());
    const State z = 3.0 * spec.basis->e0();
    const State coarse = evolve(spec, {}, z, 10.0);
    spec.integrator.dt = 1e-4;
    const State fine = evolve(spec, {}, z, 10.0);
    CHECK(sup_diff(spec, coarse, fine) < 1e-5);
}

TEST_CASE("etd2 self-convergence is second order") {
    auto spec = default_spec(Driver::trig({{0.5, 1.0, 0.0}}));
    State z = 4.0 * spec.basis->e0() + 2.0 * spec.basis->unit(2);
    std::vector<State> runs;
    for (double dt : {4e-2, 2e-2, 1e-2, 5e-3}) {
        spec.integrator.dt = dt;
        runs.push_back(evolve(spec, {0.4}, z, 3.0));
    }
    for (size_t i = 0; i + 2 < runs.size(); ++i) {
        const double e1 = sup_diff(spec, runs[i], runs[i + 1]);
        const double e2 = sup_diff(spec, runs[i + 1], runs[i + 2]);
        CHECK(std::log2(e1 / e2) >= 1.9);
    }
}

TEST_CASE("imex cross-check is first order and agrees with etd2") {
    auto spec = default_spec(Driver::trig({{0.5, 1.0, 0.0}}));
    const State z = 3.0 * spec.basis->e0();
    const State ref = evolve(spec, {}, z, 5.0);
    spec.integrator.scheme = Scheme::imex;
    spec.integrator.dt = 1e-3;
    const State a = evolve(spec, {}, z, 5.0);
    spec.integrator.dt = 5e-4;
    const State b = evolve(spec, {}, z, 5.0);
    const double ea = sup_diff(spec, a, ref), eb = sup_diff(spec, b, ref);
    CHECK(ea < 1e-2);
    CHECK(ea / eb == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("semiflow properties on random instances") {
    const auto spec = default_spec(Driver::trig({{0.5, 1.0, 0.0}, {0.3, std::sqrt(2.0), 0.0}}));
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const auto random_state = [&](double scale, bool positive) {
        State s = State::zero(32);
        for (int k = 0; k < 8; ++k) s.coeffs(k) = scale * (u01(rng) - 0.5) / (k + 1);
        if (positive) {
            s.coeffs(0) = 0.0;
            const double m = -min_grid(spec, s);
            s.coeffs(0) = std::max(m, 0.0) + scale * u01(rng);
        }
        return s;
    };
    for (int trial = 0; trial < 5; ++trial) {
        const BasePoint p{100.0 * u01(rng)};
        const double t = 1.0 + 4.0 * u01(rng), s = 1.0 + 4.0 * u01(rng);
        const State z = random_state(6.0, false);
        // Step-aligned split, so the composition is the same discrete map.
        const double ta = std::round(t * 100) / 100, sa = std::round(s * 100) / 100;
        const State whole = evolve(spec, p, z, ta + sa);
        const State split = evolve(spec, translate(p, sa), evolve(spec, p, z, sa), ta);
        CHECK(sup_diff(spec, whole, split) < 1e-10);

        CHECK(sup_diff(spec, evolve(spec, p, -z, t), -evolve(spec, p, z, t)) < 1e-13);

        const State lo = random_state(4.0, true);
        const State hi = lo + random_state(2.0, true);
        CHECK(min_grid(spec, evolve(spec, p, hi, t) - evolve(spec, p, lo, t)) >= -1e-8);
        CHECK(min_grid(spec, linear_propagate(spec, p, lo, t) - evolve(spec, p, lo, t)) >= -1e-8);
        const double lam = 1.0 + 2.0 * u01(rng);
        CHECK(min_grid(spec, lam * evolve(spec, p, lo, t) - evolve(spec, p, lam * lo, t)) >= -1e-8);
    }
}

TEST_CASE("strong positivity of the linear propagator") {
    const auto spec = default_spec(Driver::trig({{0.5, 1.0, 0.0}}));
    const State z = spec.basis->e0() + spec.basis->unit(1);
    CHECK(min_grid(spec, linear_propagate(spec, {}, z, 1.0)) > 0.0);
}

TEST_CASE("absorbing radius") {
    auto spec = default_spec(Driver::zero());
    // Brute-force oracle: smallest 0.5-grid r with G(y) = (gamma0 + A) y + g(y) < 0 on [r, 10 r].
    const auto oracle = [&](double A) {
        for (double r = 0.5;; r += 0.5) {
            bool ok = true;
            for (double y = r; y <= 10.0 * r && ok; y += 1e-3 * r)
                ok = (1.0 + A) * y + g_eval(spec.nonlinearity, y) < 0.0;
            if (ok) return r;
        }
    };
    CHECK(absorbing_radius(spec, 1.0) == 4.0);
    CHECK(absorbing_radius(spec, 1.0) == oracle(1.0));
    CHECK(absorbing_radius(spec, 0.0) == 3.0);
    CHECK(absorbing_radius(spec, 0.0) == oracle(0.0));
    spec.nonlinearity.kappa = 1e6;
    const double r = absorbing_radius(spec, 1.0, 1e-3);
    CHECK(r > 1.0);
    CHECK(r < 1.01);
}

TEST_CASE("perturbed mode at eps = 0 is the homogeneous imex scheme") {
    auto hom = default_spec(Driver::trig({{0.5, 1.0, 0.0}}), 16, 64);
    hom.integrator.scheme = Scheme::imex;
    auto per = hom;
    per.linear_part = LinearPart::perturbed;
    per.perturbation = Perturbation{0.0, Driver::trig({{1.0, std::sqrt(3.0), 0.0}})};
    const State z = 3.0 * hom.basis->e0() + hom.basis->unit(1);
    CHECK(sup_diff(hom, evolve(hom, {}, z, 5.0), evolve(per, {}, z, 5.0)) < 1e-12);
}

TEST_CASE("coupling matrix of sin 2x in the sine basis") {
    // sin 2x sin((k+1)x) is a cosine polynomial, outside the sine span, so the
    // collocation projection only approaches the L2 one, (2/pi) int sin 2x
    // sin((k+1)x) sin((j+1)x), as M grows.
    const auto b = Basis::build({BoundaryKind::dirichlet}, 8, 1024);
    const auto P = coupling_matrix(*b);
    const double pi = std::numbers::pi;
    for (int j = 0; j < 8; ++j) {
        for (int k = 0; k < 8; ++k) {
            // Quadrature oracle on a fine midpoint grid.
            double acc = 0.0;
            const int n = 20000;
            for (int i = 0; i < n; ++i) {
                const double x = (i + 0.5) * pi / n;
                acc += std::sin(2 * x) * std::sin((k + 1) * x) * std::sin((j + 1) * x);
            }
            CHECK(std::abs(P(j, k) - 2.0 / n * acc) < 1e-6);
        }
    }
}

TEST_CASE("evolve rejects bad input") {
    const auto spec = default_spec(Driver::zero());
    CHECK_THROWS_AS((void)evolve(spec, {}, spec.basis->e0(), -1.0), std::invalid_argument);
    State bad = spec.basis->e0();
    bad.coeffs(3) = std::nan("");
    CHECK_THROWS_AS((void)evolve(spec, {}, bad, 1.0), std::invalid_argument);
    auto huge = spec;
    huge.integrator.dt = 5.0;
    CHECK_THROWS_AS((void)evolve(huge, {}, 50.0 * spec.basis->e0(), 50.0), DivergedError);
}

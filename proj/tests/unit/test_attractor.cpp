#include <doctest.h>

#include "nalab/attractor.hpp"

#include "../support/shooting.hpp"

#include <cmath>
#include <numbers>

using namespace nalab;
using nalab::oracle::maximal_steady_amplitude;
using nalab::oracle::quarter_time;

namespace {

constexpr double kPi = std::numbers::pi;

ProblemSpec spec_with(Driver d, int N = 32, int M = 128) {
    ProblemSpec s;
    s.basis = Basis::build({BoundaryKind::dirichlet}, N, M);
    s.driver = std::move(d);
    return s;
}

}  // namespace

TEST_CASE("shooting oracle: maximal positive steady state") {
    const Nonlinearity nl;
    const double A = maximal_steady_amplitude(nl);
    CHECK(A == doctest::Approx(nl.r0).epsilon(1e-4));
    CHECK(std::abs(quarter_time(0.5, nl) - 0.5 * kPi) < 1e-12);
    // Above r0 the softening reaction lengthens the half period.
    CHECK(quarter_time(1.2, nl) > 0.5 * kPi + 1e-5);
}

TEST_CASE("autonomous pullback approaches r0 sin x from above") {
    auto s = spec_with(Driver::zero());
    PullbackParams prm;
    prm.n_max = 16;
    const auto shallow = pullback_upper_boundary(s, {}, prm);
    prm.n_max = 64;
    const auto deep = pullback_upper_boundary(s, {}, prm);
    CHECK(deep.record.monotone);
    CHECK_FALSE(deep.record.converged);
    const State oracle = s.basis->e0();
    const double e_shallow = sup_norm(*s.basis, shallow.b - oracle);
    const double e_deep = sup_norm(*s.basis, deep.b - oracle);
    CHECK(e_deep < e_shallow);
    CHECK(partial_order(*s.basis, oracle, deep.b, 1e-12) == Order::leq);
    // Decay rate is algebraic, far from the exponential rate of a hyperbolic equilibrium.
    CHECK(e_deep > 1e-4);
}

TEST_CASE("pullback on the pinched driver") {
    const auto s = spec_with(Driver::power({0.5, 1.0, 1.0, 1.0}));
    const auto prm = default_pullback_params(s);
    CHECK(prm.r == 4.0);
    for (double off : {-7.0, 0.0, 13.0}) {
        const auto r = pullback_upper_boundary(s, {off}, prm);
        CHECK(r.record.converged);
        CHECK(r.record.monotone);
        CHECK(sup_norm(*s.basis, r.b) < 10 * prm.tol);
    }
    const auto b = pullback_upper_boundary(s, {0.0}, prm).b;
    const auto eq = equilibrium_residual(s, {0.0}, b, 10.0, 2, prm, 1);
    CHECK(eq.value == 0.0);
    CHECK(equilibrium_residual(s, {0.0}, State::zero(32), 10.0, 2, prm, 1).value == 0.0);
}

TEST_CASE("r-independence, odd symmetry and equilibrium on a fast-contracting driver") {
    const auto s = spec_with(Driver::power({0.5, 1.0, -1.0, -1.0}));
    PullbackParams p4;
    PullbackParams p8 = p4;
    p8.r = 8.0;
    const BasePoint p{-3.0};
    const auto b4 = pullback_upper_boundary(s, p, p4);
    const auto b8 = pullback_upper_boundary(s, p, p8);
    REQUIRE(b4.record.converged);
    REQUIRE(b8.record.converged);
    CHECK(sup_norm(*s.basis, b4.b - b8.b) <= 2 * p4.tol);
    const auto a = pullback_lower_boundary(s, p, p4);
    CHECK(sup_norm(*s.basis, a.b + b4.b) <= 2 * p4.tol);
    CHECK(s.basis->to_grid(b4.b).minCoeff() > 0.0);
    const auto eq = equilibrium_residual(s, p, b4.b, 2.0, 2, p4, 2);
    CHECK(eq.value <= 5 * p4.tol);
}

TEST_CASE("pullback_many keeps input order") {
    const auto s = spec_with(Driver::power({0.5, 1.0, -1.0, -1.0}));
    PullbackParams prm;
    prm.n_max = 8;
    const std::vector<BasePoint> pts{{-5.0}, {-1.0}, {-9.0}};
    const auto many = pullback_many(s, pts, prm, 3);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto one = pullback_upper_boundary(s, pts[i], prm);
        CHECK((many[i].b.coeffs - one.b.coeffs).norm() == 0.0);
    }
}

TEST_CASE("section distances") {
    const auto basis = Basis::build({BoundaryKind::dirichlet}, 16, 64);
    const State b = 0.8 * basis->e0();
    SectionModel seg{SectionMode::segment, b};
    SectionModel box{SectionMode::order_interval, b};
    CHECK(section_distance(*basis, 0.5 * b, seg) < 1e-10);
    CHECK(section_distance(*basis, -0.25 * b, seg) < 1e-10);
    // Beyond the segment end the nearest point is b itself.
    CHECK(section_distance(*basis, 2.0 * b, seg) == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(section_distance(*basis, 2.0 * b, box) == doctest::Approx(0.8).epsilon(1e-2));
    CHECK(section_distance(*basis, 0.5 * b, box) == 0.0);

    // Golden section against a brute-force scan of the convex objective.
    const State z = 0.3 * basis->e0() + 0.2 * basis->unit(1) - 0.05 * basis->unit(4);
    const auto zg = basis->to_grid(z);
    const auto bg = basis->to_grid(b);
    double best = INFINITY;
    for (int i = 0; i <= 200000; ++i) {
        const double beta = -1.0 + i * 1e-5;
        best = std::min(best, (zg - beta * bg).cwiseAbs().maxCoeff());
    }
    const double beta = segment_beta(*basis, z, b);
    CHECK((zg - beta * bg).cwiseAbs().maxCoeff() <= best + 1e-9);
    // The order interval is the larger set.
    CHECK(section_distance(*basis, z, box) <= section_distance(*basis, z, seg) + 1e-12);
}

TEST_CASE("initial-condition samples") {
    const auto basis = Basis::build({BoundaryKind::dirichlet}, 16, 64);
    const auto z = sample_initial_conditions(*basis, 3.0, 8, 42);
    REQUIRE(z.size() == 8);
    for (const auto& s : z) CHECK(sup_norm(*basis, s) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(cone_membership(*basis, z[0], 1e-12) == Cone::strictly_positive);
    CHECK(cone_membership(*basis, z[1], 1e-12) == Cone::strictly_negative);
    CHECK(cone_membership(*basis, z[2], 1e-12) == Cone::mixed);
    for (int i = 4; i < 8; ++i) CHECK(cone_membership(*basis, z[i], 1e-12) == Cone::strictly_positive);
    const auto again = sample_initial_conditions(*basis, 3.0, 8, 42);
    CHECK((again[6].coeffs - z[6].coeffs).norm() == 0.0);
    CHECK((sample_initial_conditions(*basis, 3.0, 8, 43)[6].coeffs - z[6].coeffs).norm() > 0.0);
    CHECK(sample_initial_conditions(*basis, 3.0, 2, 42).size() == 2);
}

TEST_CASE("cone membership") {
    const auto dir = Basis::build({BoundaryKind::dirichlet}, 16, 64);
    CHECK(cone_membership(*dir, 0.3 * dir->e0(), 1e-8) == Cone::strictly_positive);
    CHECK(cone_membership(*dir, -0.3 * dir->e0(), 1e-8) == Cone::strictly_negative);
    CHECK(cone_membership(*dir, dir->unit(1), 1e-8) == Cone::mixed);
    CHECK(cone_membership(*dir, 1e-10 * dir->e0(), 1e-8) == Cone::zero);
    // Positive inside but flat at x = 0: sin x - sin 2x / 2 has zero slope there.
    CHECK(cone_membership(*dir, dir->e0() - 0.5 * dir->unit(1), 1e-8) == Cone::mixed);
    const auto neu = Basis::build({BoundaryKind::neumann}, 16, 64);
    CHECK(cone_membership(*neu, neu->e0(), 1e-8) == Cone::strictly_positive);
    CHECK(cone_membership(*neu, neu->e0() + neu->unit(1), 1e-8) == Cone::mixed);
}

TEST_CASE("li_yorke probe with equal data is identically zero") {
    const auto s = spec_with(Driver::trig({{0.5, 1.0, 0.0}}), 16, 64);
    const auto r = li_yorke_probe(s, {}, 0.4, 0.4, 0.5 * s.basis->e0(), 20.0, 0.5);
    for (const auto& [t, d] : r.trace) CHECK(d == 0.0);
    CHECK(r.liminf_est == 0.0);
    CHECK(r.limsup_est == 0.0);
    CHECK_THROWS_AS((void)li_yorke_probe(s, {}, 1.5, 0.4, s.basis->e0(), 1.0, 0.5), std::invalid_argument);
    // In the linear zone the difference is |l2 - l1| ||b(p.t)|| = 0.3 * 0.5 * c(t).
    const auto lin = li_yorke_probe(s, {}, 0.2, 0.5, 0.5 * s.basis->e0(), 20.0, 0.5);
    for (const auto& [t, d] : lin.trace) {
        CHECK(d == doctest::Approx(0.15 * std::exp(0.5 * (1 - std::cos(t)))).epsilon(1e-6));
    }
}

TEST_CASE("crossing times by interpolation") {
    const auto s = spec_with(Driver::zero(), 16, 64);
    BoundaryTrajectory bt;
    bt.dt_sample = 0.01;
    for (int i = 0; i <= 1000; ++i) {
        const double t = i * 0.01;
        bt.samples.push_back({t, (1.0 + 0.5 * std::sin(t)) * s.basis->e0(), 0.0, true});
    }
    const auto c = crossing_times(s, bt);
    REQUIRE(c.size() == 3);
    CHECK(c[0] == doctest::Approx(kPi).epsilon(1e-4));
    CHECK(c[1] == doctest::Approx(2 * kPi).epsilon(1e-4));
    CHECK(c[2] == doctest::Approx(3 * kPi).epsilon(1e-4));

    BoundaryTrajectory zero;
    for (int i = 0; i <= 10; ++i) zero.samples.push_back({0.5 * i, State::zero(16), 0.0, true});
    CHECK(crossing_times(s, zero).empty());
}

TEST_CASE("b1 formula") {
    const Window w{-400.0, 400.0, 0.5};
    const auto flat = compute_b1(spec_with(Driver::zero()), {}, w);
    CHECK_FALSE(flat.refused);
    CHECK(flat.m_hat == 1.0);
    CHECK((flat.b1.coeffs - spec_with(Driver::zero()).basis->e0().coeffs).norm() == 0.0);

    const auto geo = compute_b1(spec_with(Driver::geometric(6)), {}, w);
    CHECK(geo.m_hat == 1.0);

    const auto trig = compute_b1(spec_with(Driver::trig({{0.5, 1.0, 0.0}})), {}, w);
    CHECK(trig.m_hat == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    CHECK(trig.b1.coeffs(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    CHECK(compute_b1(spec_with(Driver::power({0.5, 1.0, 1.0, 1.0})), {}, w).refused);
}

TEST_CASE("boundary trajectory and sublinear convergence") {
    const auto s = spec_with(Driver::power({0.5, 1.0, -1.0, 1.0}));
    PullbackParams prm;
    const Window w{-400.0, 400.0, 0.5};
    const auto bt = boundary_trajectory(s, {}, 0.0, 40.0, 0.5, prm, 20.0, 2);
    REQUIRE(bt.samples.size() == 81);
    CHECK(bt.anchor_times == std::vector<double>{0.0, 20.0, 40.0});
    for (const auto& x : bt.samples) {
        CHECK(x.converged);
        CHECK(s.basis->to_grid(x.b).minCoeff() >= 0.0);
    }
    CHECK(bt.at(20.2).t == 20.0);
    // The anchor at t = 20 agrees with the semiflow carried from t = 0.
    const State carried = evolve(s, {}, bt.samples[0].b, 20.0);
    CHECK(sup_norm(*s.basis, carried - bt.at(20.0).b) < 1e-5);
    // a > 0 throughout, so b saturates above r0 and never crosses back.
    for (const auto& x : bt.samples) CHECK(sup_norm(*s.basis, x.b) > s.nonlinearity.r0);
    CHECK(crossing_times(s, bt).empty());

    const auto same = sublinear_convergence_test(s, {}, 1.0, bt, w);
    for (std::size_t i = 0; i < 40; ++i) CHECK(same.trace[i].second == 0.0);
    CHECK(same.theorem_backed);
    const auto up = sublinear_convergence_test(s, {}, 2.0, bt, w);
    const auto down = sublinear_convergence_test(s, {}, 0.5, bt, w);
    CHECK(up.final_value < 1e-2);
    CHECK(down.final_value < 1e-2);
    CHECK(up.trace.front().second > 0.5);

    const auto trig = spec_with(Driver::trig({{0.5, 1.0, 0.0}}));
    const auto bt2 = boundary_trajectory(trig, {}, 0.0, 1.0, 0.5, prm);
    CHECK_FALSE(sublinear_convergence_test(trig, {}, 2.0, bt2, w).theorem_backed);
}

TEST_CASE("forwards distance to zero") {
    const auto odd = spec_with(Driver::power({0.5, 1.0, 1.0, -1.0}));
    const auto z = sample_initial_conditions(*odd.basis, 4.0, 5, 1);
    const auto decay = forwards_distance_to_zero(odd, {}, z, 100.0, 0.5, 2);
    CHECK(decay.back().dist_zero < 1e-3);
    const auto pin = spec_with(Driver::power({0.5, 1.0, 1.0, 1.0}));
    const auto stay = forwards_distance_to_zero(pin, {}, z, 100.0, 0.5, 2);
    CHECK(stay.back().dist_zero >= 0.5);
}

TEST_CASE("forwards profile against a boundary") {
    const auto s = spec_with(Driver::power({0.5, 1.0, -1.0, 1.0}));
    PullbackParams prm;
    const auto bt = boundary_trajectory(s, {}, 0.0, 30.0, 0.5, prm);
    const auto z = sample_initial_conditions(*s.basis, 2.0, 5, 7);
    const auto prof = forwards_distance_profile(s, {}, z, bt, 2);
    REQUIRE(prof.size() == bt.samples.size());
    CHECK(prof.front().dist_zero == doctest::Approx(2.0).epsilon(1e-12));
    for (const auto& d : prof) CHECK(d.dist_interval <= d.dist_segment + 1e-12);
    CHECK(prof.back().dist_segment < 1e-2);
}

// Time integration of y_t = y_xx + h(p.t, x) y + g(y) and of its linearization.
#pragma once

#include "nalab/driving.hpp"
#include "nalab/spatial.hpp"

#include <functional>
#include <stdexcept>

namespace nalab {

/// g(y) = -kappa sign(y) (|y| - r0)_+^2. C^1, odd, zero on the linear zone |y| <= r0.
struct Nonlinearity {
    double r0 = 1.0;
    double kappa = 1.0;
};

[[nodiscard]] inline double g_eval(const Nonlinearity& nl, double y) {
    const double excess = std::abs(y) - nl.r0;
    if (excess <= 0.0) return 0.0;
    return y > 0.0 ? -nl.kappa * excess * excess : nl.kappa * excess * excess;
}

enum class LinearPart { homogeneous, perturbed };
enum class Scheme { etd2, imex };

/// Extra reaction term eps * sin(2x) * chi(p.t) of the perturbed linear part.
/// chi is a second driver read along the same offset as the main one.
struct Perturbation {
    double epsilon = 0.0;
    Driver chi;
};

struct IntegratorSettings {
    double dt = 1e-2;
    Scheme scheme = Scheme::etd2;
};

struct ProblemSpec {
    BasisPtr basis;
    Driver driver;
    LinearPart linear_part = LinearPart::homogeneous;
    Perturbation perturbation;
    Nonlinearity nonlinearity;
    IntegratorSettings integrator;
};

class DivergedError : public std::runtime_error {
public:
    DivergedError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
    double time;
};

/// I(s + t1) - I(s + t0).
[[nodiscard]] double primitive_increment(const ProblemSpec& spec, BasePoint p, double t0, double t1);

/// u(T, p, z). The integrator runs with a uniform step T / ceil(T / dt).
[[nodiscard]] State evolve(const ProblemSpec& spec, BasePoint p, const State& z, double T);

/// phi(T, p) z: the same stepper with g switched off. In homogeneous mode the
/// result is the closed-form per-mode solution.
[[nodiscard]] State linear_propagate(const ProblemSpec& spec, BasePoint p, const State& z, double T);

/// Observer receives (t, state) at t = 0, dt_obs, 2 dt_obs, ..., T.
using Observer = std::function<void(double, const State&)>;

/// Evolve and report the state on a uniform observation grid. Between
/// observations the step is dt_obs / ceil(dt_obs / dt). Returns u(T).
State evolve_observed(const ProblemSpec& spec, BasePoint p, const State& z, double T, double dt_obs,
                      const Observer& observe, bool linear = false);

/// Smallest r on a grid of spacing `grid` with kappa (r - r0)^2 > (gamma0 + A) r,
/// where A bounds |a| over the window. Beyond r the reaction term strictly
/// pushes |y| down, so the ball of radius r is absorbing.
[[nodiscard]] double absorbing_radius(const ProblemSpec& spec, double A, double grid = 0.5);
/// Same with A = sup |a| from the driver.
[[nodiscard]] double absorbing_radius(const ProblemSpec& spec);

/// Coupling matrix of multiplication by sin(2x) in the basis (perturbed mode).
[[nodiscard]] Eigen::MatrixXd coupling_matrix(const Basis& basis);

}  // namespace nalab

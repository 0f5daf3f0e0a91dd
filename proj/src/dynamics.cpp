#include "nalab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace nalab {

namespace {

// phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2 given E = e^z.
// Taylor series near 0 where the closed forms cancel.
inline void phi_functions(double z, double E, double& phi1, double& phi2) {
    if (std::abs(z) < 0.2) {
        double term = 1.0, s1 = 0.0, s2 = 0.0;
        // term = z^j / j!
        for (int j = 0; j < 14; ++j) {
            s1 += term / (j + 1);
            s2 += term / ((j + 1) * (j + 2));
            term *= z / (j + 1);
        }
        phi1 = s1;
        phi2 = s2;
    } else {
        phi1 = (E - 1.0) / z;
        phi2 = (E - 1.0 - z) / (z * z);
    }
}

class Stepper {
public:
    Stepper(const ProblemSpec& spec, BasePoint p, bool linear)
        : spec_(spec), basis_(*spec.basis), p_(p), linear_(linear) {
        if (!spec.basis) throw std::invalid_argument("ProblemSpec has no basis");
        n_ = basis_.modes();
        m_ = basis_.grid_size();
        lam_ = basis_.eigenvalues().array() + basis_.gamma0();
        ws_ = basis_.make_workspace();
        grid_.resize(m_);
        gbuf_.resize(m_);
        n0_.resize(n_);
        n1_.resize(n_);
        a_.resize(n_);
        if (spec.linear_part == LinearPart::perturbed) {
            coupling_ = coupling_matrix(basis_);
        }
    }

    // Advance z over [t, t + count * h].
    void run(State& z, double t, double h, long count) {
        if (z.size() != n_) throw std::invalid_argument("evolve: state dimension mismatch");
        prepare(h);
        double I_prev = spec_.driver.primitive(p_.offset + t);
        for (long i = 0; i < count; ++i) {
            const double t1 = t + (i + 1) * h;
            const double I_next = spec_.driver.primitive(p_.offset + t1);
            const double dI = I_next - I_prev;
            I_prev = I_next;
            if (spec_.linear_part == LinearPart::perturbed) {
                perturbed_step(z.coeffs, h, dI, t1);
            } else if (spec_.integrator.scheme == Scheme::imex) {
                imex_step(z.coeffs, h, dI);
            } else {
                etd2_step(z.coeffs, h, dI);
            }
            if (!z.coeffs.allFinite()) {
                throw DivergedError("integration diverged (dt too large?) at t = " +
                                        std::to_string(t1),
                                    t1);
            }
        }
    }

private:
    void prepare(double h) {
        if (h == h_) return;
        h_ = h;
        base_ = (lam_ * h).exp();
    }

    // Collocation projection of g(u). Returns false, leaving out untouched,
    // when every grid value sits in the linear zone.
    bool nonlinear(const Eigen::VectorXd& u, Eigen::VectorXd& out) {
        if (linear_) return false;
        const double r0 = spec_.nonlinearity.r0;
        // Every basis function has sup 1, so sum |c_k| bounds the grid values.
        if (u.lpNorm<1>() <= r0) return false;
        basis_.to_grid(u.data(), grid_.data(), ws_);
        bool active = false;
        for (int j = 0; j < m_; ++j) {
            const double y = grid_[j];
            if (std::abs(y) > r0) active = true;
            gbuf_[j] = g_eval(spec_.nonlinearity, y);
        }
        if (!active) return false;
        basis_.to_coeffs(gbuf_.data(), out.data(), ws_);
        return true;
    }

    // Cox-Matthews ETD2RK per mode. Over one step the linear rate of mode k is
    // lam_k + a(t), whose exact integral lam_k h + dI is used in the exponential
    // and in the phi functions.
    void etd2_step(Eigen::VectorXd& u, double h, double dI) {
        const double eI = std::exp(dI);
        const bool act0 = nonlinear(u, n0_);
        if (!act0) {
            a_ = u.array() * base_ * eI;
            const bool act1 = nonlinear(a_, n1_);
            if (!act1) {
                u = a_;
                return;
            }
            for (int k = 0; k < n_; ++k) {
                const double z = lam_(k) * h + dI;
                const double E = base_(k) * eI;
                double p1, p2;
                phi_functions(z, E, p1, p2);
                u(k) = a_(k) + h * p2 * n1_(k);
            }
            return;
        }
        phi1_.resize(n_);
        phi2_.resize(n_);
        for (int k = 0; k < n_; ++k) {
            const double z = lam_(k) * h + dI;
            const double E = base_(k) * eI;
            phi_functions(z, E, phi1_(k), phi2_(k));
            a_(k) = E * u(k) + h * phi1_(k) * n0_(k);
        }
        if (!nonlinear(a_, n1_)) n1_.setZero();
        u = a_.array() + h * phi2_.array() * (n1_ - n0_).array();
    }

    // Implicit Euler on the diagonal linear part, explicit g, exact e^{dI}.
    void imex_step(Eigen::VectorXd& u, double h, double dI) {
        const double eI = std::exp(dI);
        if (nonlinear(u, n0_)) u += h * n0_;
        u = eI * u.array() / (1.0 - h * lam_);
    }

    // Dense implicit Euler for diag(lam) + eps chi(t) P, explicit g, exact e^{dI}.
    void perturbed_step(Eigen::VectorXd& u, double h, double dI, double t1) {
        const double eI = std::exp(dI);
        if (nonlinear(u, n0_)) u += h * n0_;
        const double c = spec_.perturbation.epsilon * spec_.perturbation.chi.eval(p_.offset + t1);
        Eigen::MatrixXd A = -h * c * coupling_;
        A.diagonal().array() += 1.0 - h * lam_;
        u = eI * A.partialPivLu().solve(u);
    }

    const ProblemSpec& spec_;
    const Basis& basis_;
    BasePoint p_;
    bool linear_;
    int n_ = 0;
    int m_ = 0;
    Eigen::ArrayXd lam_;
    Eigen::ArrayXd base_;
    double h_ = -1.0;
    TransformWorkspace ws_;
    std::vector<double> grid_;
    std::vector<double> gbuf_;
    Eigen::VectorXd n0_, n1_, a_;
    Eigen::ArrayXd phi1_, phi2_;
    Eigen::MatrixXd coupling_;
};

long step_count(double T, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("integrator dt must be > 0");
    return std::max(1L, static_cast<long>(std::ceil(T / dt - 1e-9)));
}

State integrate(const ProblemSpec& spec, BasePoint p, const State& z, double T, bool linear) {
    if (!(T >= 0.0)) throw std::invalid_argument("evolve: T must be >= 0");
    if (!z.finite()) throw std::invalid_argument("evolve: initial state is not finite");
    State u = z;
    if (T == 0.0) return u;
    Stepper stepper(spec, p, linear);
    const long n = step_count(T, spec.integrator.dt);
    stepper.run(u, 0.0, T / n, n);
    return u;
}

}  // namespace

double primitive_increment(const ProblemSpec& spec, BasePoint p, double t0, double t1) {
    return spec.driver.primitive(p.offset + t1) - spec.driver.primitive(p.offset + t0);
}

State evolve(const ProblemSpec& spec, BasePoint p, const State& z, double T) {
    return integrate(spec, p, z, T, false);
}

State linear_propagate(const ProblemSpec& spec, BasePoint p, const State& z, double T) {
    if (spec.linear_part == LinearPart::homogeneous) {
        if (!(T >= 0.0)) throw std::invalid_argument("linear_propagate: T must be >= 0");
        if (z.size() != spec.basis->modes())
            throw std::invalid_argument("linear_propagate: state dimension mismatch");
        const double dI = primitive_increment(spec, p, 0.0, T);
        const Eigen::ArrayXd lam = spec.basis->eigenvalues().array() + spec.basis->gamma0();
        return State(((lam * T + dI).exp() * z.coeffs.array()).matrix());
    }
    return integrate(spec, p, z, T, true);
}

State evolve_observed(const ProblemSpec& spec, BasePoint p, const State& z, double T, double dt_obs,
                      const Observer& observe, bool linear) {
    if (!(T >= 0.0)) throw std::invalid_argument("evolve: T must be >= 0");
    if (!(dt_obs > 0.0)) throw std::invalid_argument("evolve: observation step must be > 0");
    if (!z.finite()) throw std::invalid_argument("evolve: initial state is not finite");
    State u = z;
    observe(0.0, u);
    Stepper stepper(spec, p, linear);
    const long chunks = step_count(T, dt_obs);
    const double h_obs = T / chunks;
    const long sub = step_count(h_obs, spec.integrator.dt);
    for (long c = 0; c < chunks; ++c) {
        stepper.run(u, c * h_obs, h_obs / sub, sub);
        observe((c + 1) * h_obs, u);
    }
    return u;
}

double absorbing_radius(const ProblemSpec& spec, double A, double grid) {
    if (!(grid > 0.0)) throw std::invalid_argument("absorbing_radius: grid must be > 0");
    const auto& nl = spec.nonlinearity;
    const double rate = spec.basis->gamma0() + A;
    // Larger root of kappa (r - r0)^2 = rate r.
    const double b = 2.0 * nl.r0 + rate / nl.kappa;
    const double root = 0.5 * (b + std::sqrt(b * b - 4.0 * nl.r0 * nl.r0));
    double r = std::floor(root / grid) * grid;
    while (!(nl.kappa * (r - nl.r0) * (r - nl.r0) > rate * r && r > nl.r0)) r += grid;
    return r;
}

double absorbing_radius(const ProblemSpec& spec) {
    return absorbing_radius(spec, spec.driver.sup_abs_bound());
}

Eigen::MatrixXd coupling_matrix(const Basis& basis) {
    const int n = basis.modes();
    Eigen::MatrixXd P(n, n);
    const Eigen::VectorXd psi = (2.0 * basis.grid().array()).sin().matrix();
    for (int k = 0; k < n; ++k) {
        const Eigen::VectorXd f = basis.eigenfunction(k).cwiseProduct(psi);
        P.col(k) = basis.to_coeffs(f).coeffs;
    }
    return P;
}

}  // namespace nalab

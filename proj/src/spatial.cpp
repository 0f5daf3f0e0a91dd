#include "nalab/spatial.hpp"

#include <boost/math/tools/roots.hpp>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace nalab {

namespace {

constexpr double kPi = std::numbers::pi;

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

double robin_characteristic(double alpha, double omega) {
    return 2.0 * alpha * omega * std::cos(omega * kPi) +
           (alpha * alpha - omega * omega) * std::sin(omega * kPi);
}

// Root omega_k of the characteristic equation in (k, k+1); alpha > 0.
double robin_omega(double alpha, int k) {
    const double lo = k == 0 ? 1e-12 : static_cast<double>(k);
    const double hi = k + 1.0;
    std::uintmax_t iters = 200;
    const auto f = [alpha](double w) { return robin_characteristic(alpha, w); };
    const auto r = boost::math::tools::toms748_solve(
        f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
}

constexpr unsigned kPlanFlags = FFTW_ESTIMATE;

}  // namespace

void TransformWorkspace::Free::operator()(double* p) const { fftw_free(p); }

TransformWorkspace::TransformWorkspace(int m)
    : m_(m), in_(m > 0 ? fftw_alloc_real(m) : nullptr), out_(m > 0 ? fftw_alloc_real(m) : nullptr) {
    if (m > 0 && (!in_ || !out_)) throw std::bad_alloc();
    for (int j = 0; j < m; ++j) in_[j] = out_[j] = 0.0;
}

double robin_gamma0_exact(double alpha) {
    if (alpha < 0.0) throw std::invalid_argument("robin: alpha must be >= 0");
    if (alpha == 0.0) return 0.0;
    const double w = robin_omega(alpha, 0);
    return w * w;
}

BasisPtr Basis::build(BoundaryCondition bc, int N, int M) {
    if (N < 2) throw std::invalid_argument("build_basis: N must be >= 2");
    if (M < 4 * N) throw std::invalid_argument("build_basis: M must be >= 4N");
    if (bc.kind == BoundaryKind::robin && bc.alpha < 0.0)
        throw std::invalid_argument("build_basis: robin alpha must be >= 0");

    std::shared_ptr<Basis> b(new Basis());
    b->bc_ = bc;
    b->n_ = N;
    b->m_ = M;
    b->mu_.resize(N);
    b->x_.resize(M);

    switch (bc.kind) {
        case BoundaryKind::dirichlet:
        case BoundaryKind::neumann: {
            // Uniform midpoint grid x_j = (j + 1/2) pi / M for both: DST-II/III
            // and DCT-II/III are exact there and fast for M = 2^k.
            const bool dir = bc.kind == BoundaryKind::dirichlet;
            for (int k = 0; k < N; ++k) b->mu_(k) = dir ? -double(k + 1) * (k + 1) : -double(k) * k;
            for (int j = 0; j < M; ++j) b->x_(j) = (j + 0.5) * kPi / M;
            b->w_ = kPi / M;
            TransformWorkspace ws(M);
            std::lock_guard lock(planner_mutex());
            b->plan_forward_ = fftw_plan_r2r_1d(M, ws.in(), ws.out(), dir ? FFTW_RODFT01 : FFTW_REDFT01,
                                                kPlanFlags);
            b->plan_backward_ = fftw_plan_r2r_1d(M, ws.in(), ws.out(), dir ? FFTW_RODFT10 : FFTW_REDFT10,
                                                 kPlanFlags);
            break;
        }
        case BoundaryKind::robin: {
            // Cell-centred grid, ghost value from the discrete BC
            // alpha (y_0 + y_-1)/2 - (y_0 - y_-1)/h = 0, which keeps the matrix symmetric.
            const double h = kPi / M;
            for (int j = 0; j < M; ++j) b->x_(j) = (j + 0.5) * h;
            b->w_ = h;
            const double rho = (2.0 - bc.alpha * h) / (2.0 + bc.alpha * h);
            Eigen::VectorXd diag = Eigen::VectorXd::Constant(M, -2.0 / (h * h));
            diag(0) += rho / (h * h);
            diag(M - 1) += rho / (h * h);
            Eigen::VectorXd sub = Eigen::VectorXd::Constant(M - 1, 1.0 / (h * h));
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
            es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
            if (es.info() != Eigen::Success) throw std::runtime_error("robin eigensolve failed");

            b->phi_.resize(M, N);
            b->phi_norm2_.resize(N);
            for (int k = 0; k < N; ++k) {
                // Ascending order from the solver; we want the least negative first.
                Eigen::VectorXd v = es.eigenvectors().col(M - 1 - k);
                Eigen::Index imax = 0;
                v.cwiseAbs().maxCoeff(&imax);
                const double s = k == 0 ? (v(imax) > 0 ? 1.0 : -1.0) : (v(0) > 0 ? 1.0 : -1.0);
                v *= s / std::abs(v(imax));
                b->phi_.col(k) = v;
                b->phi_norm2_(k) = v.squaredNorm();
                // Eigenvalue refined to the root of the characteristic equation.
                if (bc.alpha == 0.0) {
                    b->mu_(k) = -double(k) * k;
                } else {
                    const double w = robin_omega(bc.alpha, k);
                    b->mu_(k) = -w * w;
                }
            }
            break;
        }
    }
    return b;
}

Basis::~Basis() {
    if (plan_forward_ || plan_backward_) {
        std::lock_guard lock(planner_mutex());
        if (plan_forward_) fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
        if (plan_backward_) fftw_destroy_plan(static_cast<fftw_plan>(plan_backward_));
    }
}

State Basis::e0() const { return unit(0); }

State Basis::unit(int k) const {
    if (k < 0 || k >= n_) throw std::invalid_argument("basis: mode index out of range");
    State s = State::zero(n_);
    s.coeffs(k) = 1.0;
    return s;
}

Eigen::VectorXd Basis::eigenfunction(int k) const { return to_grid(unit(k)); }

TransformWorkspace Basis::make_workspace() const { return TransformWorkspace(m_); }

// Transforms run out of place between the aligned workspace buffers.
void Basis::to_grid(const double* c, double* f, TransformWorkspace& ws) const {
    double* in = ws.in();
    double* out = ws.out();
    switch (bc_.kind) {
        case BoundaryKind::dirichlet:
            // RODFT01: Y_j = (-1)^j X_{M-1} + 2 sum_{k<M-1} X_k sin(pi (j+1/2)(k+1)/M).
            for (int k = 0; k < n_; ++k) in[k] = 0.5 * c[k];
            std::fill(in + n_, in + m_, 0.0);
            break;
        case BoundaryKind::neumann:
            // REDFT01: Y_j = X_0 + 2 sum_{k>=1} X_k cos(pi k (j+1/2)/M).
            in[0] = c[0];
            for (int k = 1; k < n_; ++k) in[k] = 0.5 * c[k];
            std::fill(in + n_, in + m_, 0.0);
            break;
        case BoundaryKind::robin:
            Eigen::Map<Eigen::VectorXd>(f, m_) = phi_ * Eigen::Map<const Eigen::VectorXd>(c, n_);
            return;
    }
    fftw_execute_r2r(static_cast<fftw_plan>(plan_forward_), in, out);
    std::copy(out, out + m_, f);
}

void Basis::to_coeffs(const double* f, double* c, TransformWorkspace& ws) const {
    if (bc_.kind == BoundaryKind::robin) {
        Eigen::Map<Eigen::VectorXd> out(c, n_);
        out = (phi_.transpose() * Eigen::Map<const Eigen::VectorXd>(f, m_)).cwiseQuotient(phi_norm2_);
        return;
    }
    double* in = ws.in();
    double* out = ws.out();
    std::copy(f, f + m_, in);
    // RODFT10 / REDFT10: Y_k = 2 sum_j X_j sin(pi (j+1/2)(k+1)/M) / cos(pi k (j+1/2)/M).
    fftw_execute_r2r(static_cast<fftw_plan>(plan_backward_), in, out);
    const double s = 1.0 / m_;
    if (bc_.kind == BoundaryKind::dirichlet) {
        for (int k = 0; k < n_; ++k) c[k] = s * out[k];
    } else {
        c[0] = 0.5 * s * out[0];
        for (int k = 1; k < n_; ++k) c[k] = s * out[k];
    }
}

Eigen::VectorXd Basis::to_grid(const State& s) const {
    if (s.size() != n_) throw std::invalid_argument("to_grid: dimension mismatch");
    Eigen::VectorXd f(m_);
    auto ws = make_workspace();
    to_grid(s.coeffs.data(), f.data(), ws);
    return f;
}

State Basis::to_coeffs(const Eigen::VectorXd& profile) const {
    if (profile.size() != m_) throw std::invalid_argument("to_coeffs: dimension mismatch");
    State s = State::zero(n_);
    auto ws = make_workspace();
    to_coeffs(profile.data(), s.coeffs.data(), ws);
    return s;
}

double Basis::eval(const State& s, double x) const {
    double v = 0.0;
    if (bc_.kind == BoundaryKind::dirichlet) {
        for (int k = 0; k < n_; ++k) v += s.coeffs(k) * std::sin((k + 1) * x);
    } else if (bc_.kind == BoundaryKind::neumann) {
        for (int k = 0; k < n_; ++k) v += s.coeffs(k) * std::cos(k * x);
    } else {
        throw std::logic_error("eval: robin basis has no closed form");
    }
    return v;
}

double Basis::eval_dx(const State& s, double x) const {
    double v = 0.0;
    if (bc_.kind == BoundaryKind::dirichlet) {
        for (int k = 0; k < n_; ++k) v += s.coeffs(k) * (k + 1) * std::cos((k + 1) * x);
    } else if (bc_.kind == BoundaryKind::neumann) {
        for (int k = 0; k < n_; ++k) v -= s.coeffs(k) * k * std::sin(k * x);
    } else {
        throw std::logic_error("eval_dx: robin basis has no closed form");
    }
    return v;
}

double Basis::eval_dxx(const State& s, double x) const {
    double v = 0.0;
    if (bc_.kind == BoundaryKind::dirichlet) {
        for (int k = 0; k < n_; ++k)
            v -= s.coeffs(k) * double(k + 1) * (k + 1) * std::sin((k + 1) * x);
    } else if (bc_.kind == BoundaryKind::neumann) {
        for (int k = 0; k < n_; ++k) v -= s.coeffs(k) * double(k) * k * std::cos(k * x);
    } else {
        throw std::logic_error("eval_dxx: robin basis has no closed form");
    }
    return v;
}

double Basis::inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
    if (f.size() != m_ || g.size() != m_) throw std::invalid_argument("inner: dimension mismatch");
    return w_ * f.dot(g);
}

double sup_norm_grid(const Basis&, const Eigen::VectorXd& grid_values) {
    return grid_values.size() ? grid_values.cwiseAbs().maxCoeff() : 0.0;
}

double sup_norm(const Basis& basis, const State& z) {
    const Eigen::VectorXd f = basis.to_grid(z);
    Eigen::Index j = 0;
    double best = f.cwiseAbs().maxCoeff(&j);
    if (!basis.analytic()) return best;

    const auto& x = basis.grid();
    const double lo = j > 0 ? x(j - 1) : 0.0;
    const double hi = j + 1 < x.size() ? x(j + 1) : kPi;
    double xi = x(j);
    for (int it = 0; it < 8; ++it) {
        const double d2 = basis.eval_dxx(z, xi);
        if (d2 == 0.0) break;
        const double step = -basis.eval_dx(z, xi) / d2;
        xi = std::clamp(xi + step, lo, hi);
        if (std::abs(step) < 1e-14) break;
    }
    best = std::max(best, std::abs(basis.eval(z, xi)));
    if (basis.bc().kind == BoundaryKind::neumann) {
        best = std::max(best, std::abs(basis.eval(z, 0.0)));
        best = std::max(best, std::abs(basis.eval(z, kPi)));
    }
    return best;
}

Order partial_order(const Basis& basis, const State& s1, const State& s2, double tol) {
    if (s1.size() != s2.size()) throw std::invalid_argument("partial_order: dimension mismatch");
    const Eigen::VectorXd d = basis.to_grid(s2 - s1);
    const double lo = d.minCoeff();
    const double hi = d.maxCoeff();
    if (lo >= -tol && hi <= tol) return Order::equal;
    if (lo >= -tol) return Order::leq;
    if (hi <= tol) return Order::geq;
    return Order::incomparable;
}

}  // namespace nalab

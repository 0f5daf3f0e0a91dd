// Laplacian eigenbasis on U = (0, pi) and the spatial state type.
#pragma once

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace nalab {

enum class BoundaryKind { dirichlet, neumann, robin };

struct BoundaryCondition {
    BoundaryKind kind = BoundaryKind::dirichlet;
    double alpha = 0.0;  ///< Robin coefficient, alpha y + dy/dn = 0
};

/// Coefficient vector in a Basis. Grid values are derived on demand.
struct State {
    Eigen::VectorXd coeffs;

    State() = default;
    explicit State(Eigen::VectorXd c) : coeffs(std::move(c)) {}
    static State zero(int n) { return State(Eigen::VectorXd::Zero(n)); }

    [[nodiscard]] int size() const { return static_cast<int>(coeffs.size()); }
    [[nodiscard]] bool finite() const { return coeffs.allFinite(); }

    State& operator+=(const State& o) { coeffs += o.coeffs; return *this; }
    State& operator-=(const State& o) { coeffs -= o.coeffs; return *this; }
    State& operator*=(double s) { coeffs *= s; return *this; }
    friend State operator+(State a, const State& b) { return a += b; }
    friend State operator-(State a, const State& b) { return a -= b; }
    friend State operator*(double s, State a) { return a *= s; }
    friend State operator-(State a) { a.coeffs = -a.coeffs; return a; }
};

enum class Order { equal, leq, geq, incomparable };

class Basis;
using BasisPtr = std::shared_ptr<const Basis>;

/// FFTW-aligned scratch buffers for transforms; one per thread.
class TransformWorkspace {
public:
    explicit TransformWorkspace(int m = 0);
    TransformWorkspace(TransformWorkspace&&) noexcept = default;
    TransformWorkspace& operator=(TransformWorkspace&&) noexcept = default;
    double* in() { return in_.get(); }
    double* out() { return out_.get(); }
    [[nodiscard]] int size() const { return m_; }

private:
    struct Free {
        void operator()(double* p) const;
    };
    int m_ = 0;
    std::unique_ptr<double[], Free> in_;
    std::unique_ptr<double[], Free> out_;
};

class Basis {
public:
    /// N >= 2 modes on M >= 4N collocation points.
    static BasisPtr build(BoundaryCondition bc, int N, int M);

    Basis(const Basis&) = delete;
    Basis& operator=(const Basis&) = delete;
    ~Basis();

    [[nodiscard]] const BoundaryCondition& bc() const { return bc_; }
    [[nodiscard]] int modes() const { return n_; }
    [[nodiscard]] int grid_size() const { return m_; }
    /// mu_0 > mu_1 > ... , the eigenvalues of the Laplacian with this BC.
    [[nodiscard]] const Eigen::VectorXd& eigenvalues() const { return mu_; }
    /// First eigenvalue of Delta u + lambda u = 0, i.e. -mu_0.
    [[nodiscard]] double gamma0() const { return -mu_(0); }
    [[nodiscard]] double gap() const { return mu_(0) - mu_(1); }
    [[nodiscard]] const Eigen::VectorXd& grid() const { return x_; }

    /// Principal eigenfunction: unit vector on mode 0 (sup-normalized, positive).
    [[nodiscard]] State e0() const;
    [[nodiscard]] State unit(int k) const;
    /// Grid samples of eigenfunction k.
    [[nodiscard]] Eigen::VectorXd eigenfunction(int k) const;

    [[nodiscard]] Eigen::VectorXd to_grid(const State& s) const;
    [[nodiscard]] State to_coeffs(const Eigen::VectorXd& profile) const;
    /// Low-level transforms. coeffs has length N, grid has length M.
    void to_grid(const double* coeffs, double* grid, TransformWorkspace& ws) const;
    void to_coeffs(const double* grid, double* coeffs, TransformWorkspace& ws) const;
    [[nodiscard]] TransformWorkspace make_workspace() const;

    /// Series value and x-derivatives at an arbitrary point (analytic bases only).
    [[nodiscard]] double eval(const State& s, double x) const;
    [[nodiscard]] double eval_dx(const State& s, double x) const;
    [[nodiscard]] double eval_dxx(const State& s, double x) const;
    [[nodiscard]] bool analytic() const { return bc_.kind != BoundaryKind::robin; }

    /// L^2 inner product by the grid quadrature.
    [[nodiscard]] double inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;
    [[nodiscard]] double quadrature_weight() const { return w_; }

private:
    Basis() = default;

    BoundaryCondition bc_;
    int n_ = 0;
    int m_ = 0;
    Eigen::VectorXd mu_;
    Eigen::VectorXd x_;
    double w_ = 0.0;
    // Robin: FD eigenvectors as columns (M x N) and their squared grid norms.
    Eigen::MatrixXd phi_;
    Eigen::VectorXd phi_norm2_;
    void* plan_forward_ = nullptr;   // coeffs -> grid
    void* plan_backward_ = nullptr;  // grid -> coeffs
};

/// max |z| over [0, pi]. For analytic bases the grid maximum is polished by
/// Newton steps on the truncated series, so the value is the sup of the series
/// and not of its samples; Dirichlet endpoints are structurally 0 and skipped.
[[nodiscard]] double sup_norm(const Basis& basis, const State& z);
[[nodiscard]] double sup_norm_grid(const Basis& basis, const Eigen::VectorXd& grid_values);

/// Pointwise comparison on the grid with tolerance tol.
[[nodiscard]] Order partial_order(const Basis& basis, const State& s1, const State& s2, double tol);

/// Smallest Robin eigenvalue gamma0 = omega^2 from the characteristic equation
/// 2 alpha omega cos(omega pi) + (alpha^2 - omega^2) sin(omega pi) = 0.
[[nodiscard]] double robin_gamma0_exact(double alpha);

}  // namespace nalab

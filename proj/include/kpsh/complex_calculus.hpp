#pragma once

#include "kpsh/core.hpp"
#include "kpsh/symmetric_functions.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

namespace kpsh {

/// n x n complex Hermitian matrix; symmetrized on construction.
class HermitianMatrix {
public:
    HermitianMatrix() = default;

    explicit HermitianMatrix(Eigen::MatrixXcd m) : m_(std::move(m))
    {
        if (m_.rows() != m_.cols() || m_.rows() == 0) {
            throw DomainError("Hermitian matrix must be square and non-empty");
        }
        Eigen::MatrixXcd sym = 0.5 * (m_ + m_.adjoint());
        m_ = std::move(sym);
        for (Eigen::Index i = 0; i < m_.rows(); ++i) {
            m_(i, i) = Complex(m_(i, i).real(), 0.0);
        }
    }

    static HermitianMatrix identity(int n) { return HermitianMatrix(Eigen::MatrixXcd::Identity(n, n)); }
    static HermitianMatrix zero(int n) { return HermitianMatrix(Eigen::MatrixXcd::Zero(n, n)); }

    static HermitianMatrix diagonal(const Spectrum& lambda)
    {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(lambda.size(), lambda.size());
        for (int i = 0; i < lambda.size(); ++i) {
            m(i, i) = lambda[i];
        }
        return HermitianMatrix(std::move(m));
    }

    [[nodiscard]] int size() const { return static_cast<int>(m_.rows()); }
    [[nodiscard]] Complex operator()(int i, int j) const { return m_(i, j); }
    [[nodiscard]] const Eigen::MatrixXcd& matrix() const { return m_; }
    [[nodiscard]] double trace() const { return m_.trace().real(); }
    [[nodiscard]] double frobenius_norm() const { return m_.norm(); }

    /// H + s I.
    [[nodiscard]] HermitianMatrix shifted(double s) const
    {
        Eigen::MatrixXcd m = m_;
        m.diagonal().array() += s;
        return HermitianMatrix(std::move(m));
    }

    /// H + eps trace(H) I, the regularized argument of F^eps.
    [[nodiscard]] HermitianMatrix regularized(double eps) const { return shifted(eps * trace()); }

    friend HermitianMatrix operator+(const HermitianMatrix& a, const HermitianMatrix& b)
    {
        return HermitianMatrix(a.m_ + b.m_);
    }
    friend HermitianMatrix operator-(const HermitianMatrix& a, const HermitianMatrix& b)
    {
        return HermitianMatrix(a.m_ - b.m_);
    }
    friend HermitianMatrix operator*(double t, const HermitianMatrix& a) { return HermitianMatrix(t * a.m_); }

private:
    Eigen::MatrixXcd m_;
};

/// 2n x 2n real symmetric matrix in the (x_1..x_n, y_1..y_n) ordering.
class RealSymmetricMatrix {
public:
    RealSymmetricMatrix() = default;

    explicit RealSymmetricMatrix(Eigen::MatrixXd m) : m_(std::move(m))
    {
        if (m_.rows() != m_.cols() || m_.rows() == 0) {
            throw DomainError("real symmetric matrix must be square and non-empty");
        }
        Eigen::MatrixXd sym = 0.5 * (m_ + m_.transpose());
        m_ = std::move(sym);
    }

    [[nodiscard]] int size() const { return static_cast<int>(m_.rows()); }
    [[nodiscard]] double operator()(int i, int j) const { return m_(i, j); }
    [[nodiscard]] const Eigen::MatrixXd& matrix() const { return m_; }
    [[nodiscard]] double trace() const { return m_.trace(); }

private:
    Eigen::MatrixXd m_;
};

/// J := (1/2)(I_n, -i I_n).
[[nodiscard]] inline Eigen::MatrixXcd j_matrix(int n)
{
    if (n < 1) {
        throw DomainError("J matrix needs n >= 1");
    }
    Eigen::MatrixXcd j = Eigen::MatrixXcd::Zero(n, 2 * n);
    for (int i = 0; i < n; ++i) {
        j(i, i) = 0.5;
        j(i, n + i) = Complex(0.0, -0.5);
    }
    return j;
}

/// J m conj(J)^T, entrywise 1/4 [(m_xx + m_yy) + i (m_xy - m_yx)].
[[nodiscard]] inline HermitianMatrix complex_hessian(const RealSymmetricMatrix& m)
{
    if (m.size() % 2 != 0) {
        throw DomainError("real Hessian must have even size");
    }
    const int n = m.size() / 2;
    Eigen::MatrixXcd h(n, n);
    for (int j = 0; j < n; ++j) {
        for (int l = 0; l < n; ++l) {
            h(j, l) = 0.25 * Complex(m(j, l) + m(n + j, n + l), m(j, n + l) - m(n + j, l));
        }
    }
    return HermitianMatrix(std::move(h));
}

/// J Du = (u_{z_1}, ..., u_{z_n}).
[[nodiscard]] inline ComplexVector wirtinger_gradient(const RealVector& du)
{
    if (du.size() == 0 || du.size() % 2 != 0) {
        throw DomainError("real gradient must have even, positive size");
    }
    const auto n = du.size() / 2;
    ComplexVector g(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        g(j) = 0.5 * Complex(du(j), -du(n + j));
    }
    return g;
}

inline constexpr int kJacobiSweepCap = 40;

/// Eigenvalues (ascending) by cyclic complex Jacobi rotations, iterated until the
/// off-diagonal Frobenius norm falls below 1e-14 ||h||_F.
[[nodiscard]] inline Spectrum hermitian_eigenvalues(const HermitianMatrix& h)
{
    const int n = h.size();
    Eigen::MatrixXcd a = h.matrix();
    const double fro = a.norm();
    auto off_norm = [&]() {
        double s = 0.0;
        for (int p = 0; p < n; ++p) {
            for (int q = 0; q < n; ++q) {
                if (p != q) {
                    s += std::norm(a(p, q));
                }
            }
        }
        return std::sqrt(s);
    };
    const double target = 1e-14 * fro;
    int sweep = 0;
    double off = off_norm();
    while (off > target && fro > 0.0) {
        if (sweep == kJacobiSweepCap) {
            std::ostringstream msg;
            msg << "complex Jacobi did not converge after " << kJacobiSweepCap
                << " sweeps: off-diagonal norm " << off << " vs target " << target << " (n=" << n
                << ", |h|_F=" << fro << ")";
            throw NumericalError(msg.str());
        }
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const Complex c = a(p, q);
                const double mag = std::abs(c);
                if (mag == 0.0) {
                    continue;
                }
                const Complex phase = c / mag; // e^{i phi}
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * mag);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double cs = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * cs;
                // U = diag(1, conj(phase)) * [[cs, sn], [-sn, cs]]
                const Complex upp = cs;
                const Complex upq = sn;
                const Complex uqp = -sn * std::conj(phase);
                const Complex uqq = cs * std::conj(phase);
                for (int k = 0; k < n; ++k) {
                    const Complex akp = a(k, p);
                    const Complex akq = a(k, q);
                    a(k, p) = akp * upp + akq * uqp;
                    a(k, q) = akp * upq + akq * uqq;
                }
                for (int k = 0; k < n; ++k) {
                    const Complex apk = a(p, k);
                    const Complex aqk = a(q, k);
                    a(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
                    a(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
            }
        }
        ++sweep;
        off = off_norm();
    }
    std::vector<double> ev(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        ev[static_cast<std::size_t>(i)] = a(i, i).real();
    }
    std::sort(ev.begin(), ev.end());
    return Spectrum(std::move(ev));
}

/// Point evaluation of a function: position, value, real gradient, optional real
/// Hessian and the complex Hessian.
struct Jet {
    Point z;
    double u = 0.0;
    RealVector du;
    std::optional<RealSymmetricMatrix> d2u;
    HermitianMatrix hc;

    static Jet from_real(Point z, double u, RealVector du, RealSymmetricMatrix d2u)
    {
        Jet jet;
        jet.hc = complex_hessian(d2u);
        jet.z = std::move(z);
        jet.u = u;
        jet.du = std::move(du);
        jet.d2u = std::move(d2u);
        return jet;
    }

    static Jet from_complex(Point z, double u, RealVector du, HermitianMatrix hc)
    {
        Jet jet;
        jet.z = std::move(z);
        jet.u = u;
        jet.du = std::move(du);
        jet.hc = std::move(hc);
        return jet;
    }

    [[nodiscard]] int dimension() const { return hc.size(); }
};

} // namespace kpsh

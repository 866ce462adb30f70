#pragma once

// Dense real symmetric-matrix primitives: cyclic Jacobi eigensolver, operator
// norm, normalized trace powers, self-adjoint dilation, singular values, and
// the covariance-derived parameters sigma(S) and v(S).
//
// Real entries only. The complex case never occurs in the supported models
// (block Markov chains, fixed-edge-count graphs, real Wigner matrices).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "freeconc/errors.hpp"
#include "freeconc/rng.hpp"

namespace freeconc {

class RectMatrix {
  public:
    RectMatrix() = default;
    RectMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {
        if (rows == 0 || cols == 0) throw ShapeError("RectMatrix: zero dimension");
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

/// Symmetric matrix; symmetry holds by construction (writes mirror both
/// triangles), never by after-the-fact tolerance checks.
class SymMatrix {
  public:
    SymMatrix() = default;
    explicit SymMatrix(std::size_t dim) : dim_(dim), a_(dim * dim, 0.0) {
        if (dim == 0) throw ShapeError("SymMatrix: zero dimension");
    }

    static SymMatrix identity(std::size_t dim) {
        SymMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m.set(i, i, 1.0);
        return m;
    }

    std::size_t dim() const { return dim_; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * dim_ + j]; }

    void set(std::size_t i, std::size_t j, double v) {
        a_[i * dim_ + j] = v;
        a_[j * dim_ + i] = v;
    }
    void add(std::size_t i, std::size_t j, double v) {
        a_[i * dim_ + j] += v;
        if (i != j) a_[j * dim_ + i] += v;
    }

    const std::vector<double>& data() const { return a_; }

    bool all_finite() const {
        for (double v : a_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : a_) s += v * v;
        return std::sqrt(s);
    }

  private:
    std::size_t dim_ = 0;
    std::vector<double> a_;
};

/// Entry covariance Cov(S)_{ij,km}, stored dense as a d^2 x d^2 symmetric
/// matrix. Dense storage caps practical use at d <= 64; larger models must go
/// through analytic parameter paths.
class CovTensor {
  public:
    CovTensor() = default;
    explicit CovTensor(std::size_t dim) : dim_(dim), m_(dim * dim) {}

    std::size_t dim() const { return dim_; }
    std::size_t flat_dim() const { return dim_ * dim_; }

    double operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t m) const {
        return m_(i * dim_ + j, k * dim_ + m);
    }
    void set(std::size_t i, std::size_t j, std::size_t k, std::size_t m, double v) {
        m_.set(i * dim_ + j, k * dim_ + m, v);
    }

    const SymMatrix& flat() const { return m_; }
    SymMatrix& flat() { return m_; }

  private:
    std::size_t dim_ = 0;
    SymMatrix m_;
};

// ---------------------------------------------------------------------------
// Eigensolver: cyclic Jacobi rotations with a deterministic sweep order.
// Convergence when the off-diagonal Frobenius norm drops below
// 1e-12 * ||A||_F.
// ---------------------------------------------------------------------------

namespace detail {

inline double offdiag_frobenius(const std::vector<double>& a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) s += a[i * n + j] * a[i * n + j];
    return std::sqrt(2.0 * s);
}

}  // namespace detail

/// Eigenvalues of a symmetric matrix in descending order. If `vectors` is
/// non-null it receives the matching eigenvectors as columns.
inline std::vector<double> jacobi_eigenvalues(const SymMatrix& A,
                                              RectMatrix* vectors = nullptr) {
    const std::size_t n = A.dim();
    if (!A.all_finite()) throw NumericError("jacobi_eigenvalues: non-finite entries");
    std::vector<double> a = A.data();
    std::vector<double> v;
    if (vectors) {
        v.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
    }

    const double anorm = std::sqrt([&] {
        double s = 0.0;
        for (double x : a) s += x * x;
        return s;
    }());
    const double tol = 1e-12 * (anorm > 0.0 ? anorm : 1.0);
    const int max_sweeps = 60;

    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        if (detail::offdiag_frobenius(a, n) < tol) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                // Stable rotation choice: smaller root of t^2 + 2 theta t - 1.
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k];
                    const double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                if (vectors) {
                    for (std::size_t k = 0; k < n; ++k) {
                        const double vkp = v[k * n + p];
                        const double vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }

    if (sweep == max_sweeps && detail::offdiag_frobenius(a, n) >= tol)
        throw NumericError("jacobi_eigenvalues: no convergence in 60 sweeps");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a[i * n + i] > a[j * n + j]; });

    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a[order[i] * n + order[i]];
    if (vectors) {
        *vectors = RectMatrix(n, n);
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t r = 0; r < n; ++r) (*vectors)(r, c) = v[r * n + order[c]];
    }
    return eig;
}

/// Largest absolute eigenvalue. Tolerance follows the eigensolver
/// (absolute 1e-10 * dim scale).
inline double operator_norm(const SymMatrix& A) {
    if (!A.all_finite()) throw NumericError("operator_norm: non-finite entries");
    const std::vector<double> eig = jacobi_eigenvalues(A);
    return std::max(std::abs(eig.front()), std::abs(eig.back()));
}

/// (1/d) Tr(A^p) from the eigenvalues.
inline double normalized_trace_power(const SymMatrix& A, int p) {
    if (p < 1) throw DomainError("normalized_trace_power: p must be >= 1");
    const std::vector<double> eig = jacobi_eigenvalues(A);
    double s = 0.0;
    for (double l : eig) s += std::pow(l, p);
    return s / static_cast<double>(A.dim());
}

/// [[0, M],[M^T, 0]] for square M; its norm is the largest singular value.
inline SymMatrix selfadjoint_dilation(const RectMatrix& M) {
    if (M.rows() != M.cols())
        throw ShapeError("selfadjoint_dilation: matrix must be square");
    const std::size_t d = M.rows();
    SymMatrix S(2 * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) S.set(i, d + j, M(i, j));
    return S;
}

/// Singular values s_i(M) = sqrt(lambda_i(M M^T)), descending.
inline std::vector<double> singular_values(const RectMatrix& M) {
    const std::size_t r = M.rows(), c = M.cols();
    SymMatrix MMt(r);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = i; j < r; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < c; ++k) s += M(i, k) * M(j, k);
            MMt.set(i, j, s);
        }
    }
    std::vector<double> eig = jacobi_eigenvalues(MMt);
    for (double& l : eig) l = std::sqrt(std::max(l, 0.0));
    return eig;
}

// ---------------------------------------------------------------------------
// Lanczos extreme eigenvalue, for matrices too large for Jacobi (empirical
// d^2 x d^2 covariances, Wigner norms at d ~ 1000). Full reorthogonalization,
// deterministic start vector.
// ---------------------------------------------------------------------------

/// Largest |eigenvalue| of a symmetric operator given as a matvec.
inline double lanczos_extreme_abs(const std::function<void(const double*, double*)>& matvec,
                                  std::size_t n, double rel_tol = 1e-10,
                                  std::size_t max_steps = 400) {
    max_steps = std::min(max_steps, n);
    std::vector<std::vector<double>> basis;
    std::vector<double> alpha, beta;
    std::vector<double> v(n), w(n);

    Rng rng(0x5EEDF00DULL);  // fixed: the start vector is part of the algorithm
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = rng.normal();
        nrm += v[i] * v[i];
    }
    nrm = std::sqrt(nrm);
    for (double& x : v) x /= nrm;

    double prev_extreme = 0.0;
    bool have_prev = false;
    auto tridiag_extreme = [&]() {
        const std::size_t m = alpha.size();
        SymMatrix T(m);
        for (std::size_t i = 0; i < m; ++i) {
            T.set(i, i, alpha[i]);
            if (i + 1 < m) T.set(i, i + 1, beta[i]);
        }
        const std::vector<double> eig = jacobi_eigenvalues(T);
        return std::max(std::abs(eig.front()), std::abs(eig.back()));
    };

    for (std::size_t step = 0; step < max_steps; ++step) {
        basis.push_back(v);
        matvec(v.data(), w.data());
        double a = 0.0;
        for (std::size_t i = 0; i < n; ++i) a += v[i] * w[i];
        alpha.push_back(a);
        // Full reorthogonalization keeps the Krylov basis clean.
        for (const auto& b : basis) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += b[i] * w[i];
            for (std::size_t i = 0; i < n; ++i) w[i] -= dot * b[i];
        }
        double bnorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) bnorm += w[i] * w[i];
        bnorm = std::sqrt(bnorm);

        if ((step + 1) % 10 == 0 || bnorm < 1e-14 || step + 1 == max_steps) {
            const double ext = tridiag_extreme();
            if (have_prev && std::abs(ext - prev_extreme) <= rel_tol * std::max(1.0, std::abs(ext)))
                return ext;
            prev_extreme = ext;
            have_prev = true;
        }
        if (bnorm < 1e-14) return tridiag_extreme();  // invariant subspace found
        beta.push_back(bnorm);
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / bnorm;
    }
    return tridiag_extreme();
}

inline double lanczos_extreme_abs(const SymMatrix& A, double rel_tol = 1e-10) {
    const std::size_t n = A.dim();
    const std::vector<double>& a = A.data();
    auto mv = [&a, n](const double* x, double* y) {
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = &a[i * n];
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
            y[i] = s;
        }
    };
    return lanczos_extreme_abs(mv, n, rel_tol);
}

// ---------------------------------------------------------------------------
// Covariance-derived parameters.
// ---------------------------------------------------------------------------

namespace detail {

// Jacobi below this flat dimension, Lanczos above; the two agree to 1e-10
// relative on PSD inputs (cross-checked in the test suite).
inline constexpr std::size_t kJacobiNormLimit = 300;

inline void require_psd(const std::vector<double>& eig, double norm, const char* who) {
    const double floor = -1e-9 * (norm > 0.0 ? norm : 1.0);
    if (!eig.empty() && eig.back() < floor)
        throw DomainError(std::string(who) + ": matrix is not PSD within tolerance");
}

}  // namespace detail

/// sigma(S) = ||E[(S - ES)^2]||^{1/2}; the caller supplies the second moment.
inline double sigma_param(const SymMatrix& S2) {
    const std::vector<double> eig = jacobi_eigenvalues(S2);
    const double norm = std::max(std::abs(eig.front()), std::abs(eig.back()));
    detail::require_psd(eig, norm, "sigma_param");
    return std::sqrt(std::max(eig.front(), 0.0));
}

/// v(S) = ||Cov(S)||^{1/2}, the operator norm of the d^2 x d^2 matrix.
inline double v_param(const CovTensor& C) {
    const std::size_t n = C.flat_dim();
    if (n <= detail::kJacobiNormLimit) {
        const std::vector<double> eig = jacobi_eigenvalues(C.flat());
        const double norm = std::max(std::abs(eig.front()), std::abs(eig.back()));
        detail::require_psd(eig, norm, "v_param");
        return std::sqrt(std::max(eig.front(), 0.0));
    }
    // Large PSD input: extreme |eigenvalue| is the top eigenvalue.
    return std::sqrt(std::max(lanczos_extreme_abs(C.flat()), 0.0));
}

// ---------------------------------------------------------------------------
// Small dense helpers shared by the model and Monte Carlo layers.
// ---------------------------------------------------------------------------

/// C = A * B for symmetric operands, cache-blocked; returns a plain buffer.
inline std::vector<double> sym_square(const SymMatrix& A) {
    const std::size_t n = A.dim();
    const std::vector<double>& a = A.data();
    std::vector<double> c(n * n, 0.0);
    constexpr std::size_t B = 64;
    for (std::size_t ii = 0; ii < n; ii += B)
        for (std::size_t kk = 0; kk < n; kk += B)
            for (std::size_t i = ii; i < std::min(ii + B, n); ++i) {
                const std::size_t kmax = std::min(kk + B, n);
                for (std::size_t k = kk; k < kmax; ++k) {
                    const double aik = a[i * n + k];
                    if (aik == 0.0) continue;
                    const double* brow = &a[k * n];
                    double* crow = &c[i * n];
                    for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
                }
            }
    return c;
}

/// tr A^p / d for p in {1,...,6} without an eigendecomposition; used on
/// matrices far beyond the Jacobi size range.
inline std::vector<double> normalized_trace_powers_up_to6(const SymMatrix& A, int pmax) {
    const std::size_t n = A.dim();
    if (pmax < 1 || pmax > 6)
        throw DomainError("normalized_trace_powers_up_to6: need 1 <= pmax <= 6");
    const std::vector<double>& a = A.data();
    std::vector<double> out(static_cast<std::size_t>(pmax), 0.0);

    double t1 = 0.0, t2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) t1 += a[i * n + i];
    for (double x : a) t2 += x * x;
    out[0] = t1 / n;
    if (pmax >= 2) out[1] = t2 / n;
    if (pmax <= 2) return out;

    const std::vector<double> b = sym_square(A);  // b = A^2
    double t3 = 0.0, t4 = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) {
        t3 += a[i] * b[i];  // tr A^3 = <A, A^2>       (both symmetric)
        t4 += b[i] * b[i];  // tr A^4 = ||A^2||_F^2
    }
    out[2] = t3 / n;
    if (pmax >= 4) out[3] = t4 / n;
    if (pmax <= 4) return out;

    SymMatrix B(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) B.set(i, j, b[i * n + j]);
    const std::vector<double> c = sym_square(B);  // c = A^4
    double t5 = 0.0, t6 = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) {
        t5 += a[i] * c[i];
        t6 += b[i] * c[i];
    }
    out[4] = t5 / n;
    if (pmax >= 6) out[5] = t6 / n;
    return out;
}

}  // namespace freeconc

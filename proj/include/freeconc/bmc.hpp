#pragma once

// Block Markov chains: model construction and simulation, sample frequency
// matrices, exact expected frequencies, the analytic entry covariance, the
// frak-parameter family (c1..c3, frak d/g/v/u/E), and the assembled explicit
// concentration bound.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iostream>
#include <vector>

#include "freeconc/dependence.hpp"
#include "freeconc/dyson.hpp"
#include "freeconc/errors.hpp"
#include "freeconc/free_bounds.hpp"
#include "freeconc/matrix.hpp"
#include "freeconc/rng.hpp"

namespace freeconc {

/// Stationary distribution of an ergodic row-stochastic matrix by power
/// iteration (1e-14 stopping, 1e6 cap). Ergodicity itself is verified by
/// squaring the kernel towards its rank-one limit; periodic or reducible
/// chains fail that check.
inline std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& p) {
    const std::size_t K = p.size();
    if (K == 0) throw ShapeError("stationary_distribution: empty matrix");
    for (const auto& row : p) {
        if (row.size() != K) throw ShapeError("stationary_distribution: not square");
        double s = 0.0;
        for (double v : row) {
            if (v < 0.0) throw DomainError("stationary_distribution: negative entry");
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-12)
            throw DomainError("stationary_distribution: rows must sum to 1");
    }

    std::vector<double> mu(K, 1.0 / static_cast<double>(K)), next(K);
    bool converged = false;
    for (std::size_t iter = 0; iter < 1000000 && !converged; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = 0; j < K; ++j) next[j] += mu[i] * p[i][j];
        double s = 0.0;
        for (double v : next) s += v;
        for (double& v : next) v /= s;
        double diff = 0.0;
        for (std::size_t i = 0; i < K; ++i) diff += std::abs(next[i] - mu[i]);
        mu = next;
        converged = diff < 1e-14;
    }
    if (!converged)
        throw ConvergenceError("stationary_distribution: no convergence in 1e6 steps");

    // p^(2^30) must approach the rank-one matrix with rows mu.
    std::vector<std::vector<double>> Pt = p;
    for (int sq = 0; sq < 30; ++sq) {
        std::vector<std::vector<double>> nx(K, std::vector<double>(K, 0.0));
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t k = 0; k < K; ++k) {
                const double v = Pt[i][k];
                if (v == 0.0) continue;
                for (std::size_t j = 0; j < K; ++j) nx[i][j] += v * Pt[k][j];
            }
        for (auto& row : nx) {
            double s = 0.0;
            for (double v : row) s += v;
            if (s > 0.0)
                for (double& v : row) v /= s;
        }
        Pt = std::move(nx);
    }
    double gap = 0.0;
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j) gap = std::max(gap, std::abs(Pt[i][j] - mu[j]));
    if (gap > 1e-9)
        throw ConvergenceError("stationary_distribution: chain is not ergodic");

    double check = 0.0;
    for (std::size_t j = 0; j < K; ++j) {
        double v = 0.0;
        for (std::size_t i = 0; i < K; ++i) v += mu[i] * p[i][j];
        check += std::abs(v - mu[j]);
    }
    if (check > 1e-12)
        throw ConvergenceError("stationary_distribution: residual above tolerance");
    return mu;
}

/// Block Markov chain: K clusters, cluster transition matrix p, integer
/// cluster sizes, path length n. The state chain has
///   P(Z_t = j | Z_{t-1} = i) = p_{k,m} / #V_m  for i in V_k, j in V_m,
/// and starts from equilibrium: P(Z_1 = i) = pi_k / #V_k.
struct BmcSpec {
    std::size_t K = 0;
    std::vector<std::vector<double>> p;
    std::vector<std::size_t> cluster_sizes;
    std::size_t n = 0;

    std::size_t d = 0;                       // derived: sum of cluster sizes
    std::vector<double> pi;                  // derived: stationary of p
    std::vector<std::size_t> cluster_start;  // derived: first state of each cluster

    void finalize() {
        if (K == 0 || p.size() != K || cluster_sizes.size() != K)
            throw ConfigError("BmcSpec: bad shapes");
        d = 0;
        cluster_start.assign(K, 0);
        for (std::size_t k = 0; k < K; ++k) {
            if (cluster_sizes[k] < 1) throw ConfigError("BmcSpec: cluster sizes must be >= 1");
            cluster_start[k] = d;
            d += cluster_sizes[k];
        }
        if (n < 2) throw ConfigError("BmcSpec: path length n must be >= 2");
        pi = stationary_distribution(p);  // also verifies ergodicity
    }

    std::size_t cluster_of(std::size_t state) const {
        std::size_t k = K - 1;
        while (cluster_start[k] > state) --k;
        return k;
    }

    double alpha_hat(std::size_t k) const {
        return static_cast<double>(cluster_sizes[k]) / static_cast<double>(d);
    }

    double alpha_hat_min() const {
        double m = 1.0;
        for (std::size_t k = 0; k < K; ++k) m = std::min(m, alpha_hat(k));
        return m;
    }

    /// P(E_1 = (i,j)) = pi_a p_ab / (#V_a #V_b).
    double edge_prob(std::size_t i, std::size_t j) const {
        const std::size_t a = cluster_of(i), b = cluster_of(j);
        return pi[a] * p[a][b] /
               (static_cast<double>(cluster_sizes[a]) * static_cast<double>(cluster_sizes[b]));
    }

    /// The cluster chain as a FiniteChain at equilibrium.
    FiniteChain cluster_chain() const {
        FiniteChain c;
        c.P = p;
        c.initial = pi;
        c.n = n;
        return c;
    }
};

/// Equilibrium-start sample path of length n, deterministic given the seed.
inline std::vector<std::size_t> simulate_path(const BmcSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t K = spec.K;
    std::vector<std::size_t> path(spec.n);

    auto draw_cluster = [&](const std::vector<double>& w) {
        const double u = rng.uniform01();
        double acc = 0.0;
        for (std::size_t k = 0; k + 1 < K; ++k) {
            acc += w[k];
            if (u < acc) return k;
        }
        return K - 1;
    };
    auto draw_state_in = [&](std::size_t k) {
        return spec.cluster_start[k] + rng.uniform_below(spec.cluster_sizes[k]);
    };

    std::size_t cl = draw_cluster(spec.pi);
    path[0] = draw_state_in(cl);
    for (std::size_t t = 1; t < spec.n; ++t) {
        cl = draw_cluster(spec.p[cl]);
        path[t] = draw_state_in(cl);
    }
    return path;
}

/// N-hat_{ij} = #{t <= n-1 : (Z_t, Z_{t+1}) = (i,j)}; entries sum to n-1.
inline RectMatrix frequency_matrix(const std::vector<std::size_t>& path, std::size_t d) {
    if (path.size() < 2) throw DomainError("frequency_matrix: path length must be >= 2");
    RectMatrix N(d, d);
    for (std::size_t t = 0; t + 1 < path.size(); ++t) N(path[t], path[t + 1]) += 1.0;
    return N;
}

/// E N-hat_{ij} = (n-1) pi_a p_ab / (#V_a #V_b) by stationarity.
inline RectMatrix expected_frequency(const BmcSpec& spec) {
    RectMatrix E(spec.d, spec.d);
    const double scale = static_cast<double>(spec.n - 1);
    for (std::size_t i = 0; i < spec.d; ++i)
        for (std::size_t j = 0; j < spec.d; ++j) E(i, j) = scale * spec.edge_prob(i, j);
    return E;
}

/// M = sqrt(d/n) (N-hat - E N-hat).
inline RectMatrix centered_scaled(const BmcSpec& spec, const RectMatrix& N) {
    if (N.rows() != spec.d || N.cols() != spec.d)
        throw ShapeError("centered_scaled: shape mismatch");
    const double scale =
        std::sqrt(static_cast<double>(spec.d) / static_cast<double>(spec.n));
    RectMatrix M = expected_frequency(spec);
    for (std::size_t i = 0; i < spec.d; ++i)
        for (std::size_t j = 0; j < spec.d; ++j) M(i, j) = scale * (N(i, j) - M(i, j));
    return M;
}

// ---------------------------------------------------------------------------
// frak parameters.
// ---------------------------------------------------------------------------

struct FrakParams {
    double c1 = 0.0, c2 = 0.0, c3 = 0.0;
    double frak_d = 0.0;
    double frak_g = 0.0, frak_v = 0.0;
    double frak_u = 0.0, frak_E = 0.0;
    std::size_t PsiC = 1;
    bool frakd_by_bruteforce = false;
};

namespace detail {

/// T = sum_{t=1}^{n-3} (n-2-t) (p^t - Pi); equals n * q of the alternative
/// exact expression. Row-reduced inverse of (p - Pi - I) with a 1-norm
/// condition estimate; the caller falls back to the direct sum past 1e12.
struct FrakdMatrices {
    std::vector<std::vector<double>> T;
    bool ok = false;
};

inline std::vector<std::vector<double>> mat_mul(const std::vector<std::vector<double>>& A,
                                                const std::vector<std::vector<double>>& B) {
    const std::size_t K = A.size();
    std::vector<std::vector<double>> C(K, std::vector<double>(K, 0.0));
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t k = 0; k < K; ++k) {
            const double v = A[i][k];
            if (v == 0.0) continue;
            for (std::size_t j = 0; j < K; ++j) C[i][j] += v * B[k][j];
        }
    return C;
}

inline std::vector<std::vector<double>> mat_pow(std::vector<std::vector<double>> A,
                                                std::uint64_t e) {
    const std::size_t K = A.size();
    std::vector<std::vector<double>> R(K, std::vector<double>(K, 0.0));
    for (std::size_t i = 0; i < K; ++i) R[i][i] = 1.0;
    while (e > 0) {
        if (e & 1) R = mat_mul(R, A);
        A = mat_mul(A, A);
        e >>= 1;
    }
    return R;
}

/// Partial-pivot LU inverse; returns false on a vanishing pivot.
inline bool mat_inverse(std::vector<std::vector<double>> A,
                        std::vector<std::vector<double>>& inv) {
    const std::size_t K = A.size();
    inv.assign(K, std::vector<double>(K, 0.0));
    for (std::size_t i = 0; i < K; ++i) inv[i][i] = 1.0;
    for (std::size_t col = 0; col < K; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < K; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        if (std::abs(A[piv][col]) < 1e-300) return false;
        std::swap(A[piv], A[col]);
        std::swap(inv[piv], inv[col]);
        const double pv = A[col][col];
        for (std::size_t j = 0; j < K; ++j) {
            A[col][j] /= pv;
            inv[col][j] /= pv;
        }
        for (std::size_t r = 0; r < K; ++r) {
            if (r == col) continue;
            const double f = A[r][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < K; ++j) {
                A[r][j] -= f * A[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    return true;
}

inline double one_norm(const std::vector<std::vector<double>>& A) {
    const std::size_t K = A.size();
    double best = 0.0;
    for (std::size_t j = 0; j < K; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < K; ++i) s += std::abs(A[i][j]);
        best = std::max(best, s);
    }
    return best;
}

inline FrakdMatrices frakd_T_exact(const BmcSpec& spec) {
    FrakdMatrices out;
    const std::size_t K = spec.K;
    if (spec.n < 4) {
        out.T.assign(K, std::vector<double>(K, 0.0));
        out.ok = true;
        return out;
    }
    std::vector<std::vector<double>> pmPi(K, std::vector<double>(K));
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j) pmPi[i][j] = spec.p[i][j] - spec.pi[j];

    std::vector<std::vector<double>> A = pmPi;  // A = p - Pi - I
    for (std::size_t i = 0; i < K; ++i) A[i][i] -= 1.0;
    std::vector<std::vector<double>> Ainv;
    if (!mat_inverse(A, Ainv)) return out;
    if (one_norm(A) * one_norm(Ainv) > 1e12) return out;

    const auto Pn1 = mat_pow(pmPi, static_cast<std::uint64_t>(spec.n) - 1);
    const auto P2 = mat_mul(pmPi, pmPi);
    const double n = static_cast<double>(spec.n);
    std::vector<std::vector<double>> poly(K, std::vector<double>(K));
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j)
            poly[i][j] = Pn1[i][j] - (n - 2.0) * P2[i][j] + (n - 3.0) * pmPi[i][j];
    // T = n * q = (p - Pi - I)^{-2} poly
    out.T = mat_mul(mat_mul(Ainv, Ainv), poly);
    out.ok = true;
    return out;
}

inline std::vector<std::vector<double>> frakd_T_direct(const BmcSpec& spec) {
    const std::size_t K = spec.K;
    std::vector<std::vector<double>> T(K, std::vector<double>(K, 0.0));
    if (spec.n < 4) return T;
    std::vector<std::vector<double>> Pt = spec.p;
    for (std::size_t t = 1; t + 3 <= spec.n; ++t) {
        if (t > 1) Pt = mat_mul(Pt, spec.p);
        const double w = static_cast<double>(spec.n) - 2.0 - static_cast<double>(t);
        for (std::size_t u = 0; u < K; ++u)
            for (std::size_t v = 0; v < K; ++v) T[u][v] += w * (Pt[u][v] - spec.pi[v]);
    }
    return T;
}

inline double frakd_from_T(const BmcSpec& spec, const std::vector<std::vector<double>>& T) {
    const double d = static_cast<double>(spec.d);
    const double n = static_cast<double>(spec.n);
    double best = 0.0;
    for (std::size_t u = 0; u < spec.K; ++u)
        for (std::size_t v = 0; v < spec.K; ++v)
            for (std::size_t w = 0; w < spec.K; ++w) {
                const double val = std::abs(T[u][v] / n) /
                                   static_cast<double>(spec.cluster_sizes[v]) * spec.p[v][w] /
                                   static_cast<double>(spec.cluster_sizes[w]);
                best = std::max(best, val);
            }
    return d * d * best;
}

}  // namespace detail

/// Direct evaluation of the frak-d double sum (O(n K^3)); the independent
/// oracle for the exact q-matrix expression.
inline double frakd_bruteforce(const BmcSpec& spec) {
    if (spec.n > 10000) throw DomainError("frakd_bruteforce: capped at n <= 1e4");
    return detail::frakd_from_T(spec, detail::frakd_T_direct(spec));
}

/// Psi of the cluster chain, formula over p and pi directly.
inline std::size_t psi_cluster(const BmcSpec& spec) { return capital_psi(spec.cluster_chain()); }

/// All frak parameters, analytically. frak d uses the exact q-matrix
/// expression for n >= 4, with a brute-force fallback when (p - Pi - I) is
/// ill-conditioned; frak d = 0 when n <= 3.
inline FrakParams frak_params(const BmcSpec& spec) {
    FrakParams f;
    const double d = static_cast<double>(spec.d);
    const double n = static_cast<double>(spec.n);

    for (std::size_t v = 0; v < spec.K; ++v) {
        const double pv = spec.pi[v] / static_cast<double>(spec.cluster_sizes[v]);
        f.c1 = std::max(f.c1, d * pv);
        for (std::size_t w = 0; w < spec.K; ++w) {
            const double pw = spec.p[v][w] / static_cast<double>(spec.cluster_sizes[w]);
            f.c2 = std::max(f.c2, d * d * pv * pw);
            for (std::size_t u = 0; u < spec.K; ++u) {
                const double pu = spec.pi[u] / static_cast<double>(spec.cluster_sizes[u]);
                const double puv = spec.p[u][v] / static_cast<double>(spec.cluster_sizes[v]);
                f.c3 = std::max(f.c3, d * d * d * pu * puv * pw);
            }
        }
    }

    const detail::FrakdMatrices tm = detail::frakd_T_exact(spec);
    if (tm.ok) {
        f.frak_d = detail::frakd_from_T(spec, tm.T);
    } else {
        std::cerr << "warning: (p - Pi - 1) ill-conditioned; frak d by direct summation\n";
        f.frak_d = detail::frakd_from_T(spec, detail::frakd_T_direct(spec));
        f.frakd_by_bruteforce = true;
    }

    f.PsiC = psi_cluster(spec);

    f.frak_g = f.c1 + (11.0 * f.c2 * f.c2 + 6.0 * f.c3 + 8.0 * f.c2 * f.frak_d) / d;
    f.frak_v = 2.0 * (f.c2 + 3.0 * f.c2 * f.c2 + 4.0 * f.c3 + 2.0 * f.c2 * f.frak_d) +
               (2.0 / d) * (2.0 * f.c3 + 8.0 * f.c2 * f.c2 + 6.0 * f.c2 * f.frak_d);

    // frak u = max_i min_j 2 sqrt(c1) / chat_{ij} over the positive entries.
    const double twosqrt = 2.0 * std::sqrt(f.c1);
    double u_max = 0.0;
    for (std::size_t i = 0; i < 2 * spec.K; ++i) {
        double row_min = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < 2 * spec.K; ++j) {
            double chat = 0.0;
            if (i < spec.K && j >= spec.K)
                chat = spec.pi[i] * spec.p[i][j - spec.K] / spec.alpha_hat(i);
            else if (i >= spec.K && j < spec.K)
                chat = spec.pi[j] * spec.p[j][i - spec.K] / spec.alpha_hat(i - spec.K);
            if (chat > 0.0) row_min = std::min(row_min, twosqrt / chat);
        }
        if (!std::isfinite(row_min))
            throw DomainError("frak_params: a dilation row has no positive coefficient");
        u_max = std::max(u_max, row_min);
    }
    f.frak_u = u_max;

    f.frak_E = f.frak_u * ((d / n) * f.c2 + 3.0 * f.c2 * f.c2 + 5.0 * f.c3 +
                           2.0 * f.c2 * f.frak_d) +
               (f.frak_u / d) * (8.0 * f.c2 * f.c2 + 6.0 * f.c2 * f.frak_d);
    return f;
}

// ---------------------------------------------------------------------------
// Block profiles and limiting values.
// ---------------------------------------------------------------------------

/// 2K x 2K dilation profile with coefficients c-hat built from alpha-hat.
inline BlockProfile dilation_profile(const BmcSpec& spec) {
    const std::size_t K = spec.K;
    BlockProfile prof;
    prof.weights.assign(2 * K, 0.0);
    prof.c.assign(2 * K, std::vector<double>(2 * K, 0.0));
    for (std::size_t k = 0; k < K; ++k) {
        prof.weights[k] = 0.5 * spec.alpha_hat(k);
        prof.weights[K + k] = 0.5 * spec.alpha_hat(k);
    }
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j) {
            prof.c[i][K + j] = spec.pi[i] * spec.p[i][j] / spec.alpha_hat(i);
            prof.c[K + i][j] = spec.pi[j] * spec.p[j][i] / spec.alpha_hat(i);
        }
    return prof;
}

/// Same construction from asymptotic weights alpha (the theorem's c table).
inline BlockProfile limiting_profile(const std::vector<double>& alpha,
                                     const std::vector<double>& pi,
                                     const std::vector<std::vector<double>>& p) {
    const std::size_t K = alpha.size();
    if (pi.size() != K || p.size() != K) throw ShapeError("limiting_profile: bad shapes");
    BlockProfile prof;
    prof.weights.assign(2 * K, 0.0);
    prof.c.assign(2 * K, std::vector<double>(2 * K, 0.0));
    for (std::size_t k = 0; k < K; ++k) {
        prof.weights[k] = 0.5 * alpha[k];
        prof.weights[K + k] = 0.5 * alpha[k];
    }
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j) {
            prof.c[i][K + j] = pi[i] * p[i][j] / alpha[i];
            prof.c[K + i][j] = pi[j] * p[j][i] / alpha[i];
        }
    return prof;
}

/// The limit of ||M||: min-max over the limiting 2K profile.
inline double limiting_m(const std::vector<double>& alpha, const std::vector<double>& pi,
                         const std::vector<std::vector<double>>& p) {
    double s = 0.0;
    for (double a : alpha) {
        if (a <= 0.0) throw DomainError("limiting_m: alpha must be positive");
        s += a;
    }
    if (std::abs(s - 1.0) > 1e-10) throw DomainError("limiting_m: alpha must sum to 1");
    double drift = 0.0;
    for (std::size_t j = 0; j < pi.size(); ++j) {
        double v = 0.0;
        for (std::size_t i = 0; i < pi.size(); ++i) v += pi[i] * p[i][j];
        drift += std::abs(v - pi[j]);
    }
    if (drift > 1e-10) throw DomainError("limiting_m: pi is not stationary for p");
    return minmax_m(limiting_profile(alpha, pi, p)).value;
}

/// m-hat for the finite-d spec.
inline double bmc_mhat(const BmcSpec& spec) { return mhat(dilation_profile(spec)); }

/// DysonSystem matching the spec at its finite-d weights.
inline DysonSystem dyson_system(const BmcSpec& spec) {
    DysonSystem sys;
    sys.K = spec.K;
    sys.alpha.resize(spec.K);
    for (std::size_t k = 0; k < spec.K; ++k) sys.alpha[k] = spec.alpha_hat(k);
    sys.pi = spec.pi;
    sys.p = spec.p;
    return sys;
}

// ---------------------------------------------------------------------------
// Analytic covariance of M (exact, for small d).
// ---------------------------------------------------------------------------

/// Exact Cov(M)_{ij,km} from the stationary two-time structure of the
/// transition chain. Dense d^2 x d^2 output, so small d only.
inline CovTensor analytic_covariance(const BmcSpec& spec) {
    const std::size_t d = spec.d;
    if (d > 64) throw DomainError("analytic_covariance: dense path capped at d <= 64");
    const double n = static_cast<double>(spec.n);
    const double scale = static_cast<double>(d) / n;

    // trans(i,j) = P(Z_{t+1} = j | Z_t = i)
    auto trans = [&](std::size_t i, std::size_t j) {
        const std::size_t a = spec.cluster_of(i), b = spec.cluster_of(j);
        return spec.p[a][b] / static_cast<double>(spec.cluster_sizes[b]);
    };
    const std::vector<std::vector<double>> T = spec.n >= 4
                                                   ? [&] {
                                                         auto tm = detail::frakd_T_exact(spec);
                                                         return tm.ok
                                                                    ? tm.T
                                                                    : detail::frakd_T_direct(
                                                                          spec);
                                                     }()
                                                   : std::vector<std::vector<double>>(
                                                         spec.K,
                                                         std::vector<double>(spec.K, 0.0));

    std::vector<double> P(d * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) P[i * d + j] = spec.edge_prob(i, j);

    CovTensor C(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const std::size_t ij = i * d + j;
            const std::size_t bj = spec.cluster_of(j);
            const std::size_t ci = spec.cluster_of(i);
            for (std::size_t k = 0; k < d; ++k) {
                const std::size_t ck = spec.cluster_of(k);
                const std::size_t bm_base = k * d;
                for (std::size_t m = 0; m < d; ++m) {
                    const std::size_t km = bm_base + m;
                    if (km < ij) continue;  // symmetric fill below
                    double acc = 0.0;
                    // t1 = t2
                    if (ij == km) acc += (n - 1.0) * P[ij];
                    acc -= (n - 1.0) * P[ij] * P[km];
                    // |t1 - t2| = 1
                    if (j == k) acc += (n - 2.0) * P[ij] * trans(j, m);
                    if (m == i) acc += (n - 2.0) * P[km] * trans(i, j);
                    acc -= 2.0 * (n - 2.0) * P[ij] * P[km];
                    // |t1 - t2| > 1 via T
                    acc += P[ij] * trans(k, m) * T[bj][ck] /
                           static_cast<double>(spec.cluster_sizes[ck]);
                    acc += P[km] * trans(i, j) * T[spec.cluster_of(m)][ci] /
                           static_cast<double>(spec.cluster_sizes[ci]);
                    const double v = scale * acc;
                    C.flat().set(ij, km, v);
                }
            }
        }
    return C;
}

/// Cov of the dilation S = [[0, M],[M^T, 0]] from Cov(M): entries of S are
/// S_{i, d+j} = S_{d+j, i} = M_{ij}, everything else deterministic zero.
inline CovTensor dilation_covariance(const CovTensor& covM) {
    const std::size_t d = covM.dim();
    CovTensor C(2 * d);
    auto put = [&](std::size_t r1, std::size_t c1, std::size_t r2, std::size_t c2, double v) {
        C.set(r1, c1, r2, c2, v);
        C.set(c1, r1, r2, c2, v);
        C.set(r1, c1, c2, r2, v);
        C.set(c1, r1, c2, r2, v);
    };
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = 0; k < d; ++k)
                for (std::size_t m = 0; m < d; ++m)
                    put(i, d + j, k, d + m, covM(i, j, k, m));
    return C;
}

// ---------------------------------------------------------------------------
// Assembled explicit concentration bound.
// ---------------------------------------------------------------------------

/// Everything the explicit BMC concentration theorem needs, with the tail
/// curve P(||M|| >= threshold(p) x) <= d x^{-2p}.
struct BoundReport {
    FrakParams frak;
    double mhat = 0.0;
    double R_bound = 0.0;         // R(X)     <= 2 sqrt(d/n)
    double varsigma_sq = 0.0;     // vs(X)^2  <= c1
    double sigma_sq = 0.0;        // sigma^2  <= frak g
    double v_sq = 0.0;            // v^2      <= frak v / d
    double free_norm_bound = 0.0; // ||S_free|| <= mhat + frak E / d
    std::size_t PsiE = 2;         // Psi(E)   <= Psi(C) + 1
    std::size_t d = 0, n = 0;

    /// threshold(p) = mhat + E/d + 2 (v g / d)^{1/4} p^{3/4}
    ///                + 60 (4 (d/n) PsiE^4 c1^2)^{1/6} p^{2/3}
    ///                + 120 (d/n)^{1/2} PsiE p.
    double threshold(int p) const {
        if (p < 1) throw DomainError("BoundReport::threshold: p must be >= 1");
        const double q = static_cast<double>(p);
        const double dn = static_cast<double>(d) / static_cast<double>(n);
        const double psi = static_cast<double>(PsiE);
        return free_norm_bound +
               2.0 * std::pow(frak.frak_v * frak.frak_g / static_cast<double>(d), 0.25) *
                   std::pow(q, 0.75) +
               60.0 * std::pow(4.0 * dn * std::pow(psi, 4.0) * frak.c1 * frak.c1, 1.0 / 6.0) *
                   std::pow(q, 2.0 / 3.0) +
               120.0 * std::sqrt(dn) * psi * q;
    }

    /// P(||M|| >= threshold(p) x) <= d x^{-2p}, clamped to [0,1].
    double tail(int p, double x) const {
        if (x <= 0.0) throw DomainError("BoundReport::tail: x must be positive");
        const double raw = static_cast<double>(d) * std::pow(x, -2.0 * p);
        return std::clamp(raw, 0.0, 1.0);
    }

    /// Parameter bounds packaged for the universality machinery.
    MarkovBoundParams markov_params() const {
        MarkovBoundParams mp;
        mp.sigma = std::sqrt(sigma_sq);
        mp.v = std::sqrt(v_sq);
        mp.varsigma = std::sqrt(varsigma_sq);
        mp.R = R_bound;
        mp.Psi = PsiE;
        mp.d = 2 * d;  // the dilation dimension
        return mp;
    }
};

inline BoundReport bound_report(const BmcSpec& spec) {
    BoundReport r;
    r.frak = frak_params(spec);
    r.mhat = bmc_mhat(spec);
    r.d = spec.d;
    r.n = spec.n;
    const double d = static_cast<double>(spec.d);
    const double n = static_cast<double>(spec.n);
    r.R_bound = 2.0 * std::sqrt(d / n);
    r.varsigma_sq = r.frak.c1;
    r.sigma_sq = r.frak.frak_g;
    r.v_sq = r.frak.frak_v / d;
    r.free_norm_bound = r.mhat + r.frak.frak_E / d;
    r.PsiE = r.frak.PsiC + 1;
    return r;
}

/// The transition chain E_t = (Z_t, Z_{t+1}) as a d^2-state FiniteChain;
/// small d only, used to check Psi(E) <= Psi(C) + 1 directly.
inline FiniteChain transition_chain(const BmcSpec& spec) {
    const std::size_t d = spec.d;
    if (d > 16) throw DomainError("transition_chain: capped at d <= 16");
    FiniteChain c;
    const std::size_t S = d * d;
    c.P.assign(S, std::vector<double>(S, 0.0));
    c.initial.assign(S, 0.0);
    c.n = spec.n;
    auto trans = [&](std::size_t i, std::size_t j) {
        const std::size_t a = spec.cluster_of(i), b = spec.cluster_of(j);
        return spec.p[a][b] / static_cast<double>(spec.cluster_sizes[b]);
    };
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            c.initial[i * d + j] = spec.edge_prob(i, j);
            for (std::size_t m = 0; m < d; ++m) c.P[i * d + j][j * d + m] = trans(j, m);
        }
    return c;
}

}  // namespace freeconc

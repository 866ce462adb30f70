#pragma once

// psi-dependence coefficients and Psi(Z) for finite-state Markov chains,
// total-variation mixing time, and the mixing-time bound on Psi.
//
// All lag-t joint laws come from the exact pmf pi_i (P^t)_{ij}, never from
// samples. The 1/4 in Psi is fixed and not exposed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "freeconc/errors.hpp"

namespace freeconc {

/// Ergodic finite-state chain: row-stochastic P, initial distribution, and
/// the path length n that caps Psi.
struct FiniteChain {
    std::vector<std::vector<double>> P;
    std::vector<double> initial;
    std::size_t n = 0;

    std::size_t states() const { return P.size(); }

    void validate() const {
        const std::size_t S = P.size();
        if (S == 0 || initial.size() != S) throw ShapeError("FiniteChain: bad shapes");
        for (const auto& row : P) {
            if (row.size() != S) throw ShapeError("FiniteChain: ragged transition matrix");
            double s = 0.0;
            for (double v : row) {
                if (v < 0.0) throw DomainError("FiniteChain: negative transition probability");
                s += v;
            }
            if (std::abs(s - 1.0) > 1e-12) throw DomainError("FiniteChain: rows must sum to 1");
        }
        double s = 0.0;
        for (double v : initial) {
            if (v < 0.0) throw DomainError("FiniteChain: negative initial probability");
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-12) throw DomainError("FiniteChain: initial must sum to 1");
        if (n < 1) throw DomainError("FiniteChain: n must be >= 1");
    }
};

/// Joint pmf of a pair of finitely supported variables.
struct JointPmf {
    std::size_t A = 0, B = 0;
    std::vector<double> p;  // row-major A x B

    double operator()(std::size_t x, std::size_t y) const { return p[x * B + y]; }
};

/// psi(X | Y) for finite supports: max over cells with positive marginals of
/// |P(x,y) - P(x)P(y)| / (P(x)P(y)). A zero marginal under positive joint
/// mass yields +infinity (infinity is a value, not an error).
inline double psi_coefficient(const JointPmf& j) {
    std::vector<double> px(j.A, 0.0), py(j.B, 0.0);
    for (std::size_t x = 0; x < j.A; ++x)
        for (std::size_t y = 0; y < j.B; ++y) {
            px[x] += j(x, y);
            py[y] += j(x, y);
        }
    double best = 0.0;
    for (std::size_t x = 0; x < j.A; ++x)
        for (std::size_t y = 0; y < j.B; ++y) {
            const double m = px[x] * py[y];
            if (m > 0.0) {
                best = std::max(best, std::abs(j(x, y) - m) / m);
            } else if (j(x, y) > 0.0) {
                return std::numeric_limits<double>::infinity();
            }
        }
    return best;
}

namespace detail {

/// One multiplication step with row renormalization; long-horizon powers
/// drift off the stochastic simplex otherwise.
inline void stochastic_multiply(std::vector<std::vector<double>>& Pt,
                                const std::vector<std::vector<double>>& P) {
    const std::size_t S = P.size();
    std::vector<std::vector<double>> next(S, std::vector<double>(S, 0.0));
    for (std::size_t i = 0; i < S; ++i)
        for (std::size_t k = 0; k < S; ++k) {
            const double v = Pt[i][k];
            if (v == 0.0) continue;
            for (std::size_t jj = 0; jj < S; ++jj) next[i][jj] += v * P[k][jj];
        }
    for (auto& row : next) {
        double s = 0.0;
        for (double v : row) s += v;
        if (std::abs(s - 1.0) > 1e-14 && s > 0.0)
            for (double& v : row) v /= s;
    }
    Pt = std::move(next);
}

inline std::vector<double> stationary_of(const FiniteChain& c) {
    const std::size_t S = c.states();
    std::vector<double> mu(S, 1.0 / static_cast<double>(S)), next(S);
    for (std::size_t iter = 0; iter < 1000000; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < S; ++i)
            for (std::size_t jj = 0; jj < S; ++jj) next[jj] += mu[i] * c.P[i][jj];
        double s = 0.0;
        for (double v : next) s += v;
        for (double& v : next) v /= s;
        double diff = 0.0;
        for (std::size_t i = 0; i < S; ++i) diff += std::abs(next[i] - mu[i]);
        mu = next;
        if (diff < 1e-14) return mu;
    }
    throw ConvergenceError("stationary distribution: no convergence in 1e6 steps");
}

inline void require_stationary_start(const FiniteChain& c, const std::vector<double>& pi) {
    double l1 = 0.0;
    for (std::size_t i = 0; i < c.states(); ++i) l1 += std::abs(c.initial[i] - pi[i]);
    if (l1 > 1e-10)
        throw DomainError("chain must start from equilibrium (||mu0 - pi||_1 > 1e-10)");
}

}  // namespace detail

/// Exact joint pmf of (Z_1, Z_{1+lag}) for a stationary chain:
/// P(x, y) = pi_x (P^lag)_{xy}.
inline JointPmf lag_joint_pmf(const FiniteChain& c, std::size_t lag) {
    c.validate();
    const std::vector<double> pi = detail::stationary_of(c);
    detail::require_stationary_start(c, pi);
    const std::size_t S = c.states();
    std::vector<std::vector<double>> Pt(S, std::vector<double>(S, 0.0));
    for (std::size_t i = 0; i < S; ++i) Pt[i][i] = 1.0;
    for (std::size_t t = 0; t < lag; ++t) detail::stochastic_multiply(Pt, c.P);
    JointPmf j;
    j.A = j.B = S;
    j.p.assign(S * S, 0.0);
    for (std::size_t x = 0; x < S; ++x)
        for (std::size_t y = 0; y < S; ++y) j.p[x * S + y] = pi[x] * Pt[x][y];
    return j;
}

/// psi between chain states at the given lag, from the exact joint pmf.
inline double psi_at_lag(const FiniteChain& c, std::size_t lag) {
    return psi_coefficient(lag_joint_pmf(c, lag));
}

/// Psi(Z) = min{ n, min{ t >= 1 : max_{ij} |(P^t)_{ij} - pi_j| / pi_j <= 1/4 } }
/// for an ergodic stationary chain. States outside the support of pi carry no
/// mass from a stationary start and are excluded.
inline std::size_t capital_psi(const FiniteChain& c) {
    c.validate();
    const std::vector<double> pi = detail::stationary_of(c);
    detail::require_stationary_start(c, pi);
    const std::size_t S = c.states();
    std::vector<std::vector<double>> Pt = c.P;
    for (std::size_t t = 1; t <= c.n; ++t) {
        if (t > 1) detail::stochastic_multiply(Pt, c.P);
        double worst = 0.0;
        for (std::size_t i = 0; i < S; ++i) {
            if (pi[i] <= 1e-15) continue;
            for (std::size_t jj = 0; jj < S; ++jj) {
                if (pi[jj] <= 1e-15) continue;
                worst = std::max(worst, std::abs(Pt[i][jj] - pi[jj]) / pi[jj]);
            }
        }
        if (worst <= 0.25) return t;
    }
    return c.n;
}

/// Total variation distance (1/2) sum |mu_i - nu_i|.
inline double tv_distance(const std::vector<double>& mu, const std::vector<double>& nu) {
    if (mu.size() != nu.size()) throw ShapeError("tv_distance: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) s += std::abs(mu[i] - nu[i]);
    return 0.5 * s;
}

/// min{ t >= 1 : max_i d_TV(P^t(i,.), pi) <= eps }; default eps = 1/4.
inline std::size_t mixing_time(const FiniteChain& c, double eps = 0.25) {
    c.validate();
    if (eps <= 0.0 || eps >= 1.0) throw DomainError("mixing_time: need eps in (0,1)");
    const std::vector<double> pi = detail::stationary_of(c);
    const std::size_t S = c.states();
    std::vector<std::vector<double>> Pt = c.P;
    for (std::size_t t = 1; t <= 1000000; ++t) {
        if (t > 1) detail::stochastic_multiply(Pt, c.P);
        double worst = 0.0;
        for (std::size_t i = 0; i < S; ++i) worst = std::max(worst, tv_distance(Pt[i], pi));
        if (worst <= eps) return t;
    }
    throw ConvergenceError("mixing_time: no convergence within 1e6 steps");
}

/// Mixing-time bound on Psi: ceil of (log2(1/pi_min) + 3) * t_mix.
/// capital_psi(c) <= psipi_bound(c) for every ergodic stationary chain.
inline std::size_t psipi_bound(const FiniteChain& c) {
    c.validate();
    const std::vector<double> pi = detail::stationary_of(c);
    detail::require_stationary_start(c, pi);
    double pi_min = 1.0;
    for (double v : pi)
        if (v > 1e-15) pi_min = std::min(pi_min, v);
    const double tmix = static_cast<double>(mixing_time(c));
    const double bound = (std::log2(1.0 / pi_min) + 3.0) * tmix;
    return static_cast<std::size_t>(std::ceil(bound - 1e-9));
}

}  // namespace freeconc

#pragma once

// ||S_free|| evaluators and the explicit error terms of the concentration
// theorems: the block-profile min-max (exact reduction), a diagonal-restricted
// Lehner upper bound for general covariance maps, the Pisier bracket, and the
// epsilon/tail/moment-gap formulas with their absolute constants exposed as
// named configuration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "freeconc/errors.hpp"
#include "freeconc/matrix.hpp"

namespace freeconc {

/// Upper bounds on the absolute constants, as stated by the concentration
/// theorems. They multiply the epsilon terms; nothing here is baked into the
/// formulas themselves.
struct AbsoluteConstants {
    double markov_tail = 120.0;         // c    in the Markovian tail bound
    double markov_expectation = 240.0;  // c~   in the Markovian expectation bound
    double series_tail = 8.0;           // c    in the matrix-series tail bound (as c^{1+gamma})
    double moments = 60.0;              // c    in the moment bounds
};

inline const AbsoluteConstants& absolute_constants() {
    static const AbsoluteConstants k{};
    return k;
}

/// Block variance profile: weights alpha (positive, summing to 1) and a
/// nonnegative coefficient matrix c. Every row and every column of c must
/// contain a positive entry, otherwise the min-max domain is unbounded.
struct BlockProfile {
    std::vector<double> weights;
    std::vector<std::vector<double>> c;

    std::size_t blocks() const { return weights.size(); }

    void validate() const {
        const std::size_t L = weights.size();
        if (L == 0 || c.size() != L) throw ShapeError("BlockProfile: bad shapes");
        double ws = 0.0;
        for (double w : weights) {
            if (w <= 0.0) throw DomainError("BlockProfile: weights must be positive");
            ws += w;
        }
        if (std::abs(ws - 1.0) > 1e-12) throw DomainError("BlockProfile: weights must sum to 1");
        for (const auto& row : c) {
            if (row.size() != L) throw ShapeError("BlockProfile: ragged coefficients");
            for (double v : row)
                if (v < 0.0) throw DomainError("BlockProfile: coefficients must be >= 0");
        }
        for (std::size_t j = 0; j < L; ++j) {
            bool col = false, row = false;
            for (std::size_t i = 0; i < L; ++i) {
                col = col || c[i][j] > 0.0;
                row = row || c[j][i] > 0.0;
            }
            if (!col || !row)
                throw DomainError("BlockProfile: a zero row/column makes the domain unbounded");
        }
    }
};

struct MinMaxResult {
    double value = 0.0;
    std::vector<double> minimizer;
};

/// inf over x > 0 of max_i { 1/x_i + sum_j c_ij x_j }, with the minimizer.
///
/// Solved by bisection on the value m with a monotone fixed-point feasibility
/// test: x <- 1/(m - Cx) starting from x_i = 1/m increases monotonically and
/// stays below every feasible point, so it either converges to the minimal
/// solution at level m or certifies infeasibility by pushing some (Cx)_i to m.
/// This certifies the value to better than 1e-8.
inline MinMaxResult minmax_m(const BlockProfile& profile) {
    profile.validate();
    const std::size_t L = profile.blocks();
    const auto& c = profile.c;

    double row_sum_max = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < L; ++j) s += c[i][j];
        row_sum_max = std::max(row_sum_max, s);
    }
    // Pisier: with ES = 0 the value sits in [sigma, 2 sigma], sigma^2 = max row sum.
    double lo = std::sqrt(row_sum_max);
    double hi = 2.0 * std::sqrt(row_sum_max) + 1e-12;

    std::vector<double> x(L), cx(L), feasible_x;
    auto feasible = [&](double m) {
        for (std::size_t i = 0; i < L; ++i) x[i] = 1.0 / m;
        for (std::size_t iter = 0; iter < 200000; ++iter) {
            double step = 0.0;
            for (std::size_t i = 0; i < L; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < L; ++j) s += c[i][j] * x[j];
                cx[i] = s;
                if (s >= m) return false;  // witnesses infeasibility
            }
            for (std::size_t i = 0; i < L; ++i) {
                const double nx = 1.0 / (m - cx[i]);
                step = std::max(step, nx - x[i]);
                x[i] = nx;
                if (!(x[i] < 1e14)) return false;
            }
            if (step < 1e-15 * m) return true;
        }
        // Did not settle: treat as infeasible; bisection keeps a feasible hi.
        return false;
    };

    if (!feasible(hi)) {
        // The Pisier endpoint is feasible mathematically; widen for safety.
        hi = 4.0 * std::sqrt(row_sum_max) + 1.0;
        if (!feasible(hi)) throw ConvergenceError("minmax_m: no feasible bracket");
    }
    feasible_x = x;
    while (hi - lo > 1e-9 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid)) {
            hi = mid;
            feasible_x = x;
        } else {
            lo = mid;
        }
    }

    MinMaxResult r;
    r.minimizer = feasible_x;
    double val = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < L; ++j) s += c[i][j] * feasible_x[j];
        val = std::max(val, 1.0 / feasible_x[i] + s);
    }
    r.value = val;
    return r;
}

/// Same optimization over finite-d coefficients c-hat; the profile must be
/// built with alpha-hat_i = #V_i / d. Kept as a named entry point because the
/// finite-d and limiting values play different roles downstream.
inline double mhat(const BlockProfile& finite_d_profile) {
    return minmax_m(finite_d_profile).value;
}

/// Pisier sandwich max{||ES||, sigma} <= ||S_free|| <= ||ES|| + 2 sigma.
struct PisierBracket {
    double lo = 0.0, hi = 0.0;
};

inline PisierBracket pisier_bracket(double es_norm, double sigma) {
    if (es_norm < 0.0 || sigma < 0.0) throw DomainError("pisier_bracket: negative input");
    return {std::max(es_norm, sigma), es_norm + 2.0 * sigma};
}

// ---------------------------------------------------------------------------
// Diagonal-restricted Lehner bound.
// ---------------------------------------------------------------------------

/// Upper bound on ||S_free||:
///   max_{eta = +-1} inf over positive DIAGONAL W of
///       lambda_max(W^{-1} + eta E[S] + map(W)),
/// where map(W) = E[(S-ES) W (S-ES)] is supplied by the caller on diagonal W.
/// Restricting the infimum to diagonal W shrinks its feasible set, so any
/// returned value dominates the true ||S_free||; for block-constant
/// covariance profiles the restriction is exact.
///
/// `groups` optionally ties diagonal entries together (one optimization
/// variable per group); an empty vector means one variable per entry.
inline double lehner_diagonal_upper(
    const SymMatrix& mean,
    const std::function<SymMatrix(const std::vector<double>&)>& second_moment_map,
    std::vector<std::vector<std::size_t>> groups = {}) {
    const std::size_t d = mean.dim();
    if (d > 64) throw DomainError("lehner_diagonal_upper: dense path capped at d <= 64");
    if (groups.empty()) {
        groups.resize(d);
        for (std::size_t i = 0; i < d; ++i) groups[i] = {i};
    }
    const std::size_t G = groups.size();

    // tau = 0 gives lambda_max; tau > 0 gives the softmax-smoothed
    // tau log sum exp(lambda_j / tau), which removes the kinks that stall
    // coordinate descent while staying an upper bound on lambda_max.
    auto evaluate = [&](double eta, const std::vector<double>& u, double tau) {
        std::vector<double> w(d, 0.0);
        for (std::size_t g = 0; g < G; ++g)
            for (std::size_t i : groups[g]) w[i] = std::exp(u[g]);
        SymMatrix A = second_moment_map(w);
        for (std::size_t i = 0; i < d; ++i) A.add(i, i, 1.0 / w[i]);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j)
                if (eta * mean(i, j) != 0.0) A.add(i, j, eta * mean(i, j));
        const std::vector<double> eig = jacobi_eigenvalues(A);
        if (tau <= 0.0) return eig.front();  // lambda_max, not the absolute norm
        double acc = 0.0;
        for (double l : eig) acc += std::exp((l - eig.front()) / tau);
        return eig.front() + tau * std::log(acc);
    };

    const double golden = 0.6180339887498949;
    auto golden_min = [&](const std::function<double(double)>& f, double a, double b) {
        double x1 = b - golden * (b - a), x2 = a + golden * (b - a);
        double f1 = f(x1), f2 = f(x2);
        while (b - a > 1e-10) {
            if (f1 < f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - golden * (b - a);
                f1 = f(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + golden * (b - a);
                f2 = f(x2);
            }
        }
        return 0.5 * (a + b);
    };

    double best_over_eta = -std::numeric_limits<double>::infinity();
    for (double eta : {1.0, -1.0}) {
        std::vector<double> u(G, 0.0);
        // Wide common-scale pass first; the deterministic (map = 0) corner
        // needs W to run off to +infinity.
        const double s = golden_min(
            [&](double t) {
                std::vector<double> us(G, t);
                return evaluate(eta, us, 0.0);
            },
            -20.0, 25.0);
        std::fill(u.begin(), u.end(), s);
        double fu = evaluate(eta, u, 0.0);

        auto coordinate_passes = [&](double tau, int max_passes) {
            for (int pass = 0; pass < max_passes; ++pass) {
                const double before = evaluate(eta, u, tau);
                for (std::size_t g = 0; g < G; ++g) {
                    u[g] = golden_min(
                        [&](double t) {
                            std::vector<double> ut = u;
                            ut[g] = t;
                            return evaluate(eta, ut, tau);
                        },
                        u[g] - 2.0, u[g] + 2.0);
                }
                if (before - evaluate(eta, u, tau) < 1e-11 * std::max(1.0, std::abs(before)))
                    break;
            }
        };
        // Joint moves of two entries escape kinks that block single moves;
        // quadratic in G, so small group counts only.
        auto pair_pass = [&](double tau) {
            for (std::size_t g = 0; g + 1 < G; ++g)
                for (std::size_t h = g + 1; h < G; ++h)
                    for (double dir : {1.0, -1.0}) {
                        const double t0 = golden_min(
                            [&](double t) {
                                std::vector<double> ut = u;
                                ut[g] += t;
                                ut[h] += dir * t;
                                return evaluate(eta, ut, tau);
                            },
                            -1.5, 1.5);
                        u[g] += t0;
                        u[h] += dir * t0;
                    }
        };

        if (G <= 16) {
            // annealed smoothing; the temperature scale follows the value
            const double scale = std::max(1.0, std::abs(fu));
            double tau = 0.1 * scale;
            while (tau > 1e-11 * scale) {
                coordinate_passes(tau, 60);
                pair_pass(tau);
                coordinate_passes(tau, 20);
                tau /= 3.0;
            }
            coordinate_passes(0.0, 60);
            pair_pass(0.0);
            coordinate_passes(0.0, 20);
        } else {
            coordinate_passes(0.0, 60);
        }
        fu = evaluate(eta, u, 0.0);
        best_over_eta = std::max(best_over_eta, fu);
    }
    return best_over_eta;
}

// ---------------------------------------------------------------------------
// Explicit epsilon terms.
// ---------------------------------------------------------------------------

/// Parameters consumed by the Markovian-model bounds.
struct MarkovBoundParams {
    double sigma = 0.0;     // sigma(S)
    double v = 0.0;         // v(S)
    double varsigma = 0.0;  // varsigma(X)
    double R = 0.0;         // R(X)
    std::size_t Psi = 1;    // Psi(Z)
    std::size_t d = 1;

    void validate() const {
        if (sigma < 0 || v < 0 || varsigma < 0 || R < 0)
            throw DomainError("MarkovBoundParams: negative parameter");
        if (Psi < 1 || d < 1) throw DomainError("MarkovBoundParams: Psi, d must be >= 1");
    }
};

/// Parameters consumed by the matrix-series bounds.
struct SeriesBoundParams {
    double sigma = 0.0;
    double v = 0.0;
    double varsigmaA = 0.0;
    double RA = 0.0;
    double Dgam = 0.0;  // D^{eta,gamma}_infinity(Y)
    double eta = 1.0;
    double gamma = 0.0;
    std::size_t d = 1;

    void validate() const {
        if (sigma < 0 || v < 0 || varsigmaA < 0 || RA < 0 || Dgam < 0 || gamma < 0)
            throw DomainError("SeriesBoundParams: negative parameter");
        if (eta <= 0.0) throw DomainError("SeriesBoundParams: eta must be positive");
    }
};

/// eps(x) = v^{1/2} sigma^{1/2} x^{3/4} + R^{1/3} Psi^{2/3} vs^{2/3} x^{2/3} + R Psi x.
inline double markov_epsilon(const MarkovBoundParams& p, double x) {
    p.validate();
    if (x < 0.0) throw DomainError("markov_epsilon: x must be >= 0");
    const double Psi = static_cast<double>(p.Psi);
    return std::sqrt(p.v) * std::sqrt(p.sigma) * std::pow(x, 0.75) +
           std::cbrt(p.R) * std::pow(Psi, 2.0 / 3.0) * std::pow(p.varsigma, 2.0 / 3.0) *
               std::pow(x, 2.0 / 3.0) +
           p.R * Psi * x;
}

struct TailBound {
    double threshold = 0.0;
    double prob_bound = 1.0;
    double expectation_bound = 0.0;
};

/// Tail of the Markovian concentration theorem:
///   P(||S|| >= (1+delta) free_norm + c eps(x)) <= (d+1)(1+delta)^{-x},
/// clamped to [0,1], plus the companion expectation bound with constant c~.
inline TailBound markov_tail(const MarkovBoundParams& p, double delta, double x,
                             double free_norm) {
    p.validate();
    if (delta <= 0.0 || delta > 1.0) throw DomainError("markov_tail: need 0 < delta <= 1");
    if (x < 0.0) throw DomainError("markov_tail: x must be >= 0");
    const AbsoluteConstants& k = absolute_constants();
    TailBound t;
    t.threshold = (1.0 + delta) * free_norm + k.markov_tail * markov_epsilon(p, x);
    const double raw = (static_cast<double>(p.d) + 1.0) * std::pow(1.0 + delta, -x);
    t.prob_bound = std::clamp(raw, 0.0, 1.0);
    const double xstar = std::log(static_cast<double>(p.d) + 1.0) / std::log1p(delta);
    t.expectation_bound =
        (1.0 + delta) * free_norm + k.markov_expectation * markov_epsilon(p, xstar);
    return t;
}

/// eps'(p) = 2 v^{1/2} sigma^{1/2} p^{3/4} + 60 R^{1/3} Psi^{2/3} vs^{2/3} p^{2/3}
///           + 60 R Psi p, the moment-level variant with better constants.
inline double moments_epsilon(const MarkovBoundParams& p, int p_order) {
    p.validate();
    if (p_order < 1) throw DomainError("moments_epsilon: p must be >= 1");
    const double c = absolute_constants().moments;
    const double x = static_cast<double>(p_order);
    const double Psi = static_cast<double>(p.Psi);
    return 2.0 * std::sqrt(p.v) * std::sqrt(p.sigma) * std::pow(x, 0.75) +
           c * std::cbrt(p.R) * std::pow(Psi, 2.0 / 3.0) * std::pow(p.varsigma, 2.0 / 3.0) *
               std::pow(x, 2.0 / 3.0) +
           c * p.R * Psi * x;
}

/// eps^{(gamma)}(x) with exponents (3/4, (2+3 gamma)/3, 1+gamma).
inline double series_epsilon(const SeriesBoundParams& p, double x) {
    p.validate();
    if (x < 0.0) throw DomainError("series_epsilon: x must be >= 0");
    return std::sqrt(p.v) * std::sqrt(p.sigma) * std::pow(x, 0.75) +
           std::cbrt(p.eta) * std::cbrt(p.RA) * p.Dgam * std::pow(p.varsigmaA, 2.0 / 3.0) *
               std::pow(x, (2.0 + 3.0 * p.gamma) / 3.0) +
           p.RA * p.Dgam * std::pow(x, 1.0 + p.gamma);
}

/// Companion tail for the series model; the constant enters as 8^{1+gamma}.
inline TailBound series_tail(const SeriesBoundParams& p, double delta, double x,
                             double free_norm) {
    p.validate();
    if (delta <= 0.0 || delta > 1.0) throw DomainError("series_tail: need 0 < delta <= 1");
    const double c = std::pow(absolute_constants().series_tail, 1.0 + p.gamma);
    TailBound t;
    t.threshold = (1.0 + delta) * free_norm + c * series_epsilon(p, x);
    const double raw = (static_cast<double>(p.d) + 1.0) * std::pow(1.0 + delta, -x);
    t.prob_bound = std::clamp(raw, 0.0, 1.0);
    const double xstar = std::log(static_cast<double>(p.d) + 1.0) / std::log1p(delta);
    t.expectation_bound = (1.0 + delta) * free_norm +
                          std::pow(2.0 * absolute_constants().series_tail, 1.0 + p.gamma) *
                              series_epsilon(p, xstar);
    return t;
}

struct UniversalityBound {
    double H = 0.0;
    double moment_gap_bound = 0.0;  // c^p p^3 R Psi^2 vs^2 H^{p-3}
};

/// H_p = (tr X_0^{2p})^{1/2p} + sigma + v^{1/2} sigma^{1/2} p^{3/4}
///       + R^{1/3} Psi^{2/3} vs^{2/3} p^{2/3} + R Psi p,
/// with the full moment-gap bound c^p p^3 R Psi^2 vs^2 H^{p-3}, c = 60.
inline UniversalityBound universality_H(const MarkovBoundParams& p, double x0_moment,
                                        int p_order) {
    p.validate();
    if (p_order < 3) throw DomainError("universality_H: p must be >= 3");
    if (x0_moment < 0.0) throw DomainError("universality_H: x0_moment must be >= 0");
    const double c = absolute_constants().moments;
    const double q = static_cast<double>(p_order);
    const double Psi = static_cast<double>(p.Psi);
    UniversalityBound u;
    u.H = x0_moment + p.sigma + std::sqrt(p.v) * std::sqrt(p.sigma) * std::pow(q, 0.75) +
          std::cbrt(p.R) * std::pow(Psi, 2.0 / 3.0) * std::pow(p.varsigma, 2.0 / 3.0) *
              std::pow(q, 2.0 / 3.0) +
          p.R * Psi * q;
    u.moment_gap_bound = std::pow(c, q) * q * q * q * p.R * Psi * Psi * p.varsigma *
                         p.varsigma * std::pow(u.H, q - 3.0);
    return u;
}

}  // namespace freeconc

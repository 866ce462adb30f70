#pragma once

// The other two ensembles: fixed-edge-count random graphs G(d,m) and Wigner
// matrices with sub-Weibull entries, plus their bound formulas.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iostream>
#include <numeric>
#include <vector>

#include "freeconc/errors.hpp"
#include "freeconc/matrix.hpp"
#include "freeconc/rng.hpp"

namespace freeconc {

/// Uniform simple graph on d nodes with exactly m edges.
struct GnmSpec {
    std::size_t d = 0;
    std::size_t m = 0;
    std::uint64_t seed = 0;

    std::size_t max_edges() const { return d * (d - 1) / 2; }

    void validate() const {
        if (d < 2) throw DomainError("GnmSpec: need d >= 2");
        if (m > max_edges()) throw DomainError("GnmSpec: m exceeds d(d-1)/2");
    }
};

namespace detail {

/// Edge index <-> unordered pair over the strict upper triangle.
inline std::pair<std::size_t, std::size_t> edge_decode(std::size_t idx, std::size_t d) {
    // row r owns indices [r d - r(r+1)/2 - r, ...); scan is fine for our sizes
    std::size_t r = 0, base = 0;
    while (idx >= base + (d - 1 - r)) {
        base += d - 1 - r;
        ++r;
    }
    return {r, r + 1 + (idx - base)};
}

/// Draw k distinct values from {0..total-1} by a partial Fisher-Yates pass.
inline std::vector<std::size_t> sample_without_replacement(std::size_t total, std::size_t k,
                                                           Rng& rng) {
    std::vector<std::size_t> pool(total);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.uniform_below(total - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace detail

/// Adjacency matrix of a G(d,m) sample: exactly m distinct unordered edges,
/// symmetric 0/1, zero diagonal, deterministic per seed. Sampling runs over
/// the complement when m > d(d-1)/4 keeps the Fisher-Yates pass short, per
/// the complement duality of the model.
inline SymMatrix sample_gnm(const GnmSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const std::size_t total = spec.max_edges();
    SymMatrix A(spec.d);
    const bool complement = spec.m > total / 2;
    const std::size_t k = complement ? total - spec.m : spec.m;
    const std::vector<std::size_t> chosen = detail::sample_without_replacement(total, k, rng);
    if (complement) {
        for (std::size_t i = 0; i < spec.d; ++i)
            for (std::size_t j = i + 1; j < spec.d; ++j) A.set(i, j, 1.0);
        for (std::size_t e : chosen) {
            const auto [i, j] = detail::edge_decode(e, spec.d);
            A.set(i, j, 0.0);
        }
    } else {
        for (std::size_t e : chosen) {
            const auto [i, j] = detail::edge_decode(e, spec.d);
            A.set(i, j, 1.0);
        }
    }
    return A;
}

/// S = (A - E[A]) / sqrt(p (1-p) d) with p = m / C(d,2); E[A] is p on the
/// off-diagonal, 0 on the diagonal.
inline SymMatrix gnm_centered(const SymMatrix& A, const GnmSpec& spec) {
    spec.validate();
    const std::size_t total = spec.max_edges();
    if (spec.m == 0 || spec.m == total)
        throw DomainError("gnm_centered: degenerate scaling at m = 0 or m = C(d,2)");
    if (spec.m < 10 * spec.d) {
        static bool warned = false;
        if (!warned) {
            warned = true;
            std::cerr << "warning: gnm_centered with m < 10 d; the semicircle regime needs "
                         "d/min(m, C(d,2)-m) -> 0\n";
        }
    }
    const double p = static_cast<double>(spec.m) / static_cast<double>(total);
    const double scale = 1.0 / std::sqrt(p * (1.0 - p) * static_cast<double>(spec.d));
    SymMatrix S(spec.d);
    for (std::size_t i = 0; i < spec.d; ++i)
        for (std::size_t j = i + 1; j < spec.d; ++j)
            S.set(i, j, (A(i, j) - p) * scale);
    return S;
}

/// Wigner matrix with i.i.d. sub-Weibull entries X = sign * L * E^theta
/// (E standard exponential), standardized to mean 0 and variance 1 with the
/// analytic constant E[E^{2 theta}] = Gamma(2 theta + 1).
struct SubWeibullSpec {
    std::size_t d = 0;
    double theta = 1.0;
    double L = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (d < 1) throw DomainError("SubWeibullSpec: need d >= 1");
        if (theta < 1.0) throw DomainError("SubWeibullSpec: need theta >= 1");
        if (L <= 0.0) throw DomainError("SubWeibullSpec: need L > 0");
    }
};

inline double sample_subweibull_entry(const SubWeibullSpec& spec, Rng& rng) {
    const double sd = spec.L * std::sqrt(std::tgamma(2.0 * spec.theta + 1.0));
    const double sign = (rng.next_u64() & 1u) ? 1.0 : -1.0;
    const double raw = sign * spec.L * std::pow(rng.exponential(), spec.theta);
    return raw / sd;
}

inline SymMatrix sample_subweibull_wigner(const SubWeibullSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    SymMatrix W(spec.d);
    for (std::size_t i = 0; i < spec.d; ++i)
        for (std::size_t j = i; j < spec.d; ++j)
            W.set(i, j, sample_subweibull_entry(spec, rng));
    return W;
}

/// Bai-Yin-matching error term
///   E^{(theta)}_delta(x) = 2 delta + c'(d^{-1/4} x^{3/4} + d^{-1/6} x^{theta - 1/3}
///                                      + d^{-1/2} x^{theta}),
/// with companion tail (d+1)(1+delta)^{-x}. The constant c' depends only on
/// theta and L and is nonexplicit in the source; the caller must supply it.
struct BaiYinBound {
    double epsilon = 0.0;
    double prob_bound = 1.0;
};

inline BaiYinBound baiyin_epsilon(std::size_t d, double theta, double delta, double x,
                                  double cprime) {
    if (d < 1) throw DomainError("baiyin_epsilon: need d >= 1");
    if (theta < 1.0) throw DomainError("baiyin_epsilon: need theta >= 1");
    if (delta <= 0.0 || delta > 1.0) throw DomainError("baiyin_epsilon: need 0 < delta <= 1");
    if (x <= 1.0) throw DomainError("baiyin_epsilon: need x > 1");
    if (cprime <= 0.0) throw DomainError("baiyin_epsilon: need c' > 0");
    const double dd = static_cast<double>(d);
    BaiYinBound b;
    b.epsilon = 2.0 * delta + cprime * (std::pow(dd, -0.25) * std::pow(x, 0.75) +
                                        std::pow(dd, -1.0 / 6.0) * std::pow(x, theta - 1.0 / 3.0) +
                                        std::pow(dd, -0.5) * std::pow(x, theta));
    b.prob_bound = std::min(1.0, (dd + 1.0) * std::pow(1.0 + delta, -x));
    return b;
}

/// Bound ingredients for the D-parameter of the centered G(d,m) edge
/// variables: p = m/C(d,2), R(B) <= sqrt(2/(dp)), vs(B)^2 <= 2/p, with the
/// natural normalization eta = p, gamma = 0. The constants C_k of the
/// underlying cumulant bound are nonconstructive and must come from the
/// caller.
struct GraphParamBounds {
    double p = 0.0;
    double R_bound = 0.0;
    double varsigma_sq_bound = 0.0;
    double eta = 0.0;
    double gamma = 0.0;
};

inline GraphParamBounds feray_graph_params(std::size_t d, std::size_t m) {
    if (d < 2 || m < 1) throw DomainError("feray_graph_params: need d >= 2, m >= 1");
    GraphParamBounds g;
    g.p = static_cast<double>(m) / (static_cast<double>(d) * (static_cast<double>(d) - 1.0) / 2.0);
    g.R_bound = std::sqrt(2.0 / (static_cast<double>(d) * g.p));
    g.varsigma_sq_bound = 2.0 / g.p;
    g.eta = g.p;
    g.gamma = 0.0;
    return g;
}

/// D^{p,0}_k(W) <= max_{3 <= r <= k} (k^k C_r / r!)^{1/r} given caller C_r.
inline double feray_D_bound(std::size_t k, const std::vector<double>& C_r_from_3) {
    if (k < 3 || C_r_from_3.size() + 2 < k)
        throw DomainError("feray_D_bound: need C_r for r = 3..k");
    double best = 0.0;
    const double kk = static_cast<double>(k) * std::log(static_cast<double>(k));
    for (std::size_t r = 3; r <= k; ++r) {
        double log_rfact = 0.0;
        for (std::size_t f = 2; f <= r; ++f) log_rfact += std::log(static_cast<double>(f));
        const double log_val = kk + std::log(C_r_from_3[r - 3]) - log_rfact;
        best = std::max(best, std::exp(log_val / static_cast<double>(r)));
    }
    return best;
}

}  // namespace freeconc

#pragma once

// Trial harness: Gaussian-model sampling, empirical spectra, histograms, KS
// distances, moment estimators, and comparison reports against theory.
//
// Determinism contract: trial t of a run with base seed s always uses the
// stream mix_seed(s, t); results land in pre-allocated per-trial slots, so
// outputs are bit-identical regardless of thread count or schedule.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "freeconc/bmc.hpp"
#include "freeconc/errors.hpp"
#include "freeconc/free_bounds.hpp"
#include "freeconc/matrix.hpp"
#include "freeconc/models.hpp"
#include "freeconc/rng.hpp"

namespace freeconc {

// ---------------------------------------------------------------------------
// Gaussian model sampling.
// ---------------------------------------------------------------------------

/// Symmetric Gaussian matrix with prescribed mean and entry covariance,
/// drawn through the symmetric square root of the d^2 x d^2 covariance.
/// Eigenvalues in [-1e-9 ||C||, 0) are clipped to zero; anything lower is a
/// domain error. Factors once, samples many times.
class GaussianModel {
  public:
    GaussianModel(SymMatrix mean, const CovTensor& cov) : mean_(std::move(mean)) {
        d_ = mean_.dim();
        if (cov.dim() != d_) throw ShapeError("GaussianModel: mean/cov dimension mismatch");
        if (d_ > 64) throw DomainError("GaussianModel: dense factorization capped at d <= 64");
        const std::size_t n = cov.flat_dim();
        RectMatrix vecs;
        std::vector<double> eig = jacobi_eigenvalues(cov.flat(), &vecs);
        const double norm = std::max(std::abs(eig.front()), std::abs(eig.back()));
        for (double& l : eig) {
            if (l < -1e-9 * std::max(norm, 1e-300))
                throw DomainError("GaussianModel: covariance indefinite beyond tolerance");
            l = std::sqrt(std::max(l, 0.0));
        }
        // sqrt = V diag(sqrt(lambda)) V^T
        sqrt_.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) {
                const double f = vecs(i, k) * eig[k];
                if (f == 0.0) continue;
                for (std::size_t j = 0; j < n; ++j) sqrt_[i * n + j] += f * vecs(j, k);
            }
    }

    std::size_t dim() const { return d_; }

    SymMatrix sample(std::uint64_t seed) const {
        Rng rng(seed);
        const std::size_t n = d_ * d_;
        std::vector<double> u(n);
        for (double& x : u) x = rng.normal();
        SymMatrix G(d_);
        // g = C^{1/2} u, then symmetrize; the swap operator commutes with any
        // covariance of a symmetric matrix, so symmetrizing preserves it.
        for (std::size_t i = 0; i < d_; ++i)
            for (std::size_t j = i; j < d_; ++j) {
                const std::size_t r1 = i * d_ + j, r2 = j * d_ + i;
                double g1 = 0.0, g2 = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    g1 += sqrt_[r1 * n + k] * u[k];
                    if (r2 != r1) g2 += sqrt_[r2 * n + k] * u[k];
                }
                const double v = (r1 == r2) ? g1 : 0.5 * (g1 + g2);
                G.set(i, j, mean_(i, j) + v);
            }
        return G;
    }

  private:
    SymMatrix mean_;
    std::size_t d_ = 0;
    std::vector<double> sqrt_;
};

inline SymMatrix gaussian_model_sample(const SymMatrix& mean, const CovTensor& cov,
                                       std::uint64_t seed) {
    return GaussianModel(mean, cov).sample(seed);
}

// ---------------------------------------------------------------------------
// Trial harness.
// ---------------------------------------------------------------------------

struct TrialConfig {
    std::variant<BmcSpec, GnmSpec, SubWeibullSpec> model;
    std::size_t trials = 1;
    std::uint64_t base_seed = 0;
    bool want_singular_values = true;
    int moment_order = 0;  // tracial moments up to this order (0 = none), <= 12
    unsigned threads = 0;  // 0 = hardware concurrency

    void validate() const {
        if (trials < 1) throw DomainError("TrialConfig: need at least one trial");
        if (moment_order < 0 || moment_order > 12)
            throw DomainError("TrialConfig: moment order capped at 12");
    }
};

/// Spectrum summary of one trial. `values` are singular values, descending
/// when present (for symmetric ensembles these are the absolute eigenvalues);
/// the norm equals the leading value of the full spectrum.
struct SpectralSample {
    std::size_t trial = 0;
    std::vector<double> values;
    double norm = 0.0;
    std::vector<double> moments;  // normalized trace powers 1..moment_order
};

namespace detail {

inline void run_parallel(std::size_t trials, unsigned threads,
                         const std::function<void(std::size_t)>& body) {
    unsigned n = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    n = static_cast<unsigned>(std::min<std::size_t>(n, trials));
    if (n <= 1) {
        for (std::size_t t = 0; t < trials; ++t) body(t);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned w = 0; w < n; ++w)
        pool.emplace_back([=, &body] {
            for (std::size_t t = w; t < trials; t += n) body(t);
        });
    for (auto& th : pool) th.join();
}

/// Moments of the dilation of a matrix with the given singular values:
/// odd powers vanish, even powers average s_i^p over the d singular values.
inline std::vector<double> dilation_moments_from_singvals(const std::vector<double>& s,
                                                          int pmax) {
    std::vector<double> m(static_cast<std::size_t>(pmax), 0.0);
    for (int p = 2; p <= pmax; p += 2) {
        double acc = 0.0;
        for (double v : s) acc += std::pow(v, p);
        m[static_cast<std::size_t>(p - 1)] = acc / static_cast<double>(s.size());
    }
    return m;
}

inline std::vector<double> moments_from_eigenvalues(const std::vector<double>& eig, int pmax) {
    std::vector<double> m(static_cast<std::size_t>(pmax), 0.0);
    for (int p = 1; p <= pmax; ++p) {
        double acc = 0.0;
        for (double v : eig) acc += std::pow(v, p);
        m[static_cast<std::size_t>(p - 1)] = acc / static_cast<double>(eig.size());
    }
    return m;
}

// Jacobi is O(dim^3) per matrix; past this size trials switch to Lanczos for
// norms and the matmul path for low moments.
inline constexpr std::size_t kDenseSpectrumLimit = 520;

inline SpectralSample summarize_symmetric(const SymMatrix& S, const TrialConfig& cfg) {
    SpectralSample out;
    const bool small = S.dim() <= kDenseSpectrumLimit;
    if (cfg.want_singular_values && !small)
        throw DomainError("run_trials: full spectra are capped at dim 520; request norms "
                          "and moments only");
    if (cfg.want_singular_values || small) {
        const std::vector<double> eig = jacobi_eigenvalues(S);
        out.norm = std::max(std::abs(eig.front()), std::abs(eig.back()));
        if (cfg.moment_order > 0) out.moments = moments_from_eigenvalues(eig, cfg.moment_order);
        if (cfg.want_singular_values) {
            // report singular values (|eigenvalues|, descending) so the
            // leading value is the operator norm
            out.values.resize(eig.size());
            for (std::size_t i = 0; i < eig.size(); ++i) out.values[i] = std::abs(eig[i]);
            std::sort(out.values.begin(), out.values.end(), std::greater<>());
        }
        return out;
    }
    out.norm = lanczos_extreme_abs(S, 1e-9);
    if (cfg.moment_order > 0) {
        if (cfg.moment_order > 6)
            throw DomainError("run_trials: moments above order 6 need the dense path");
        out.moments = normalized_trace_powers_up_to6(S, cfg.moment_order);
    }
    return out;
}

}  // namespace detail

/// T independent trials, trial t seeded with mix_seed(base_seed, t).
inline std::vector<SpectralSample> run_trials(const TrialConfig& cfg) {
    cfg.validate();
    std::vector<SpectralSample> out(cfg.trials);

    auto one_trial = [&](std::size_t t) {
        const std::uint64_t seed = mix_seed(cfg.base_seed, t);
        SpectralSample s;
        if (std::holds_alternative<BmcSpec>(cfg.model)) {
            const BmcSpec& spec = std::get<BmcSpec>(cfg.model);
            const auto path = simulate_path(spec, seed);
            const RectMatrix M = centered_scaled(spec, frequency_matrix(path, spec.d));
            if (!cfg.want_singular_values && cfg.moment_order == 0) {
                // norm-only runs avoid the dense spectrum: Lanczos on M^T M
                const std::size_t d = M.rows();
                auto mv = [&](const double* x, double* y) {
                    std::vector<double> t(d, 0.0);
                    for (std::size_t j = 0; j < d; ++j) {
                        const double* row = &M.data()[j * d];
                        double acc = 0.0;
                        for (std::size_t k = 0; k < d; ++k) acc += row[k] * x[k];
                        t[j] = acc;
                    }
                    for (std::size_t i = 0; i < d; ++i) y[i] = 0.0;
                    for (std::size_t j = 0; j < d; ++j) {
                        const double* row = &M.data()[j * d];
                        for (std::size_t i = 0; i < d; ++i) y[i] += row[i] * t[j];
                    }
                };
                s.norm = std::sqrt(std::max(0.0, lanczos_extreme_abs(mv, d, 1e-11)));
            } else {
                if (M.rows() > detail::kDenseSpectrumLimit)
                    throw DomainError("run_trials: BMC spectra are capped at d <= 520");
                s.values = singular_values(M);
                s.norm = s.values.front();
                if (cfg.moment_order > 0)
                    s.moments =
                        detail::dilation_moments_from_singvals(s.values, cfg.moment_order);
                if (!cfg.want_singular_values) s.values.clear();
            }
        } else if (std::holds_alternative<GnmSpec>(cfg.model)) {
            GnmSpec spec = std::get<GnmSpec>(cfg.model);
            spec.seed = seed;
            const SymMatrix S = gnm_centered(sample_gnm(spec), spec);
            s = detail::summarize_symmetric(S, cfg);
        } else {
            SubWeibullSpec spec = std::get<SubWeibullSpec>(cfg.model);
            spec.seed = seed;
            SymMatrix W = sample_subweibull_wigner(spec);
            // report the Bai-Yin normalization W / sqrt(d)
            const double inv = 1.0 / std::sqrt(static_cast<double>(spec.d));
            SymMatrix Wn(spec.d);
            for (std::size_t i = 0; i < spec.d; ++i)
                for (std::size_t j = i; j < spec.d; ++j) Wn.set(i, j, W(i, j) * inv);
            s = detail::summarize_symmetric(Wn, cfg);
        }
        s.trial = t;
        out[t] = std::move(s);
    };

    detail::run_parallel(cfg.trials, cfg.threads, one_trial);
    return out;
}

// ---------------------------------------------------------------------------
// Distances, histograms, moment-gap reports.
// ---------------------------------------------------------------------------

/// sup_x |F_emp(x) - F(x)| over the sample points (both one-sided jumps).
inline double ks_distance(std::vector<double> samples,
                          const std::function<double(double)>& cdf) {
    if (samples.empty()) throw DomainError("ks_distance: no samples");
    std::sort(samples.begin(), samples.end());
    const double N = static_cast<double>(samples.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double F = cdf(samples[i]);
        ks = std::max(ks, std::abs(static_cast<double>(i + 1) / N - F));
        ks = std::max(ks, std::abs(F - static_cast<double>(i) / N));
    }
    return ks;
}

/// CDF by trapezoid integration of a density grid, normalized by the total
/// grid mass, linear interpolation in between.
class GridCdf {
  public:
    GridCdf(std::vector<double> xs, const std::vector<double>& density)
        : xs_(std::move(xs)), F_(xs_.size(), 0.0) {
        if (xs_.size() != density.size() || xs_.size() < 2)
            throw ShapeError("GridCdf: grid/density mismatch");
        for (std::size_t i = 1; i < xs_.size(); ++i)
            F_[i] = F_[i - 1] +
                    0.5 * (density[i] + density[i - 1]) * (xs_[i] - xs_[i - 1]);
        const double total = F_.back();
        if (total <= 0.0) throw DomainError("GridCdf: zero total mass");
        for (double& v : F_) v /= total;
    }

    double operator()(double x) const {
        if (x <= xs_.front()) return 0.0;
        if (x >= xs_.back()) return 1.0;
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        const std::size_t hi = static_cast<std::size_t>(it - xs_.begin());
        const double t = (x - xs_[hi - 1]) / (xs_[hi] - xs_[hi - 1]);
        return F_[hi - 1] + t * (F_[hi] - F_[hi - 1]);
    }

    /// Quantile by bisection on the interpolated CDF.
    double inverse(double q) const {
        double lo = xs_.front(), hi = xs_.back();
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            ((*this)(mid) < q ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

  private:
    std::vector<double> xs_, F_;
};

struct HistogramBin {
    double left = 0.0, right = 0.0, mass = 0.0;
};

/// Fixed-width histogram over [lo, hi); mass is the fraction of samples.
inline std::vector<HistogramBin> histogram(const std::vector<double>& samples, double lo,
                                           double hi, std::size_t bins) {
    if (bins == 0 || !(hi > lo)) throw DomainError("histogram: bad range");
    std::vector<HistogramBin> h(bins);
    const double w = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        h[b].left = lo + w * static_cast<double>(b);
        h[b].right = h[b].left + w;
    }
    const double unit = 1.0 / static_cast<double>(samples.size());
    for (double x : samples) {
        if (x < lo || x >= hi) continue;
        const auto b = static_cast<std::size_t>((x - lo) / w);
        h[std::min(b, bins - 1)].mass += unit;
    }
    return h;
}

/// Monte Carlo moment-gap report: tracial moments of the BMC dilation S and
/// of its Gaussian model G, against the universality bound. The variances of
/// tr S^p and tr G^p are reported side by side as a sanity check; their
/// constant-heavy theoretical bound is not evaluated.
struct MomentGapReport {
    double emp_S_moment = 0.0;
    double emp_G_moment = 0.0;
    double gap = 0.0;
    double theory_bound = 0.0;
    double se_S = 0.0;
    double se_G = 0.0;
    double var_S_moment = 0.0;
    double var_G_moment = 0.0;
    bool within_bound = false;
};

inline MomentGapReport moment_gap(const BmcSpec& spec, int p_order, std::size_t trials,
                                  std::uint64_t base_seed, unsigned threads = 0) {
    if (spec.d > 32) throw DomainError("moment_gap: capped at d <= 32");
    if (p_order < 1 || p_order > 6) throw DomainError("moment_gap: need 1 <= p <= 6");

    TrialConfig cfg;
    cfg.model = spec;
    cfg.trials = trials;
    cfg.base_seed = base_seed;
    cfg.want_singular_values = false;
    cfg.moment_order = p_order;
    cfg.threads = threads;
    const auto s_samples = run_trials(cfg);

    const CovTensor covS = dilation_covariance(analytic_covariance(spec));
    SymMatrix zero(2 * spec.d);
    const GaussianModel model(zero, covS);

    std::vector<double> g_vals(trials, 0.0);
    detail::run_parallel(trials, threads, [&](std::size_t t) {
        const SymMatrix G = model.sample(mix_seed(base_seed ^ 0xABCDEF1234567890ULL, t));
        g_vals[t] = normalized_trace_power(G, p_order);
    });

    struct Stats {
        double mean, se, var;
    };
    auto mean_se = [](const std::vector<double>& v) {
        const double n = static_cast<double>(v.size());
        double m = 0.0;
        for (double x : v) m += x;
        m /= n;
        double var = 0.0;
        for (double x : v) var += (x - m) * (x - m);
        var /= std::max(1.0, n - 1.0);
        return Stats{m, std::sqrt(var / n), var};
    };

    std::vector<double> s_vals(trials);
    for (std::size_t t = 0; t < trials; ++t)
        s_vals[t] = s_samples[t].moments[static_cast<std::size_t>(p_order - 1)];
    const Stats s = mean_se(s_vals);
    const Stats g = mean_se(g_vals);

    MomentGapReport r;
    r.emp_S_moment = s.mean;
    r.emp_G_moment = g.mean;
    r.gap = std::abs(s.mean - g.mean);
    r.se_S = s.se;
    r.se_G = g.se;
    r.var_S_moment = s.var;
    r.var_G_moment = g.var;
    if (p_order >= 3) {
        const BoundReport br = bound_report(spec);
        r.theory_bound = universality_H(br.markov_params(), 0.0, p_order).moment_gap_bound;
    } else {
        r.theory_bound = 0.0;  // moments of order <= 2 match by construction
    }
    r.within_bound = r.gap <= r.theory_bound + 3.0 * std::hypot(s.se, g.se);
    return r;
}

}  // namespace freeconc

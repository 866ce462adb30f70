#include <cmath>
#include <map>
#include <vector>

#include <catch_amalgamated.hpp>

#include "freeconc/bmc.hpp"
#include "freeconc/montecarlo.hpp"

using namespace freeconc;

namespace {

const std::vector<std::vector<double>> kFig1P = {{0.3, 0.7, 0.0, 0.0},
                                                 {0.0, 0.0, 0.2, 0.8},
                                                 {0.2, 0.7, 0.0, 0.1},
                                                 {0.0, 0.0, 0.7, 0.3}};

BmcSpec fig1_spec(std::size_t d, std::size_t n) {
    BmcSpec s;
    s.K = 4;
    s.p = kFig1P;
    const double alpha[4] = {0.2, 0.1, 0.4, 0.3};
    s.cluster_sizes.resize(4);
    for (std::size_t k = 0; k < 4; ++k)
        s.cluster_sizes[k] = static_cast<std::size_t>(alpha[k] * static_cast<double>(d) + 0.5);
    s.n = n;
    s.finalize();
    return s;
}

BmcSpec random_spec(Rng& rng, std::size_t K, std::size_t size_lo, std::size_t size_hi,
                    std::size_t n) {
    BmcSpec s;
    s.K = K;
    s.p.assign(K, std::vector<double>(K));
    for (auto& row : s.p) {
        double tot = 0.0;
        for (double& v : row) {
            v = 0.05 + rng.exponential();
            tot += v;
        }
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < K; ++i) {
            row[i] /= tot;
            acc += row[i];
        }
        row.back() = 1.0 - acc;
    }
    s.cluster_sizes.resize(K);
    for (auto& c : s.cluster_sizes) c = size_lo + rng.uniform_below(size_hi - size_lo + 1);
    s.n = n;
    s.finalize();
    return s;
}

// oracle: solve pi p = pi, sum pi = 1 by Gaussian elimination on the
// augmented (p^T - I) system
std::vector<double> stationary_by_linear_solve(const std::vector<std::vector<double>>& p) {
    const std::size_t K = p.size();
    std::vector<std::vector<double>> A(K, std::vector<double>(K + 1, 0.0));
    for (std::size_t i = 0; i + 1 < K; ++i)
        for (std::size_t j = 0; j < K; ++j) A[i][j] = p[j][i] - (i == j ? 1.0 : 0.0);
    for (std::size_t j = 0; j < K; ++j) A[K - 1][j] = 1.0;
    A[K - 1][K] = 1.0;
    for (std::size_t col = 0; col < K; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < K; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[piv], A[col]);
        for (std::size_t r = 0; r < K; ++r) {
            if (r == col) continue;
            const double f = A[r][col] / A[col][col];
            for (std::size_t j = col; j <= K; ++j) A[r][j] -= f * A[col][j];
        }
    }
    std::vector<double> pi(K);
    for (std::size_t i = 0; i < K; ++i) pi[i] = A[i][K] / A[i][i];
    return pi;
}

}  // namespace

TEST_CASE("stationary distribution") {
    // doubly stochastic -> uniform
    const std::vector<std::vector<double>> ds = {{0.5, 0.3, 0.2},
                                                 {0.2, 0.5, 0.3},
                                                 {0.3, 0.2, 0.5}};
    const auto pi = stationary_distribution(ds);
    for (double v : pi) REQUIRE_THAT(v, Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));

    // periodic chain rejected
    REQUIRE_THROWS_AS(stationary_distribution({{0.0, 1.0}, {1.0, 0.0}}), ConvergenceError);

    // reducible (absorbing) chain rejected
    REQUIRE_THROWS_AS(stationary_distribution({{1.0, 0.0}, {0.0, 1.0}}), ConvergenceError);

    // fig-1 p against a linear-solve oracle
    const auto pi4 = stationary_distribution(kFig1P);
    const auto oracle = stationary_by_linear_solve(kFig1P);
    for (std::size_t k = 0; k < 4; ++k)
        REQUIRE_THAT(pi4[k], Catch::Matchers::WithinAbs(oracle[k], 1e-11));
}

TEST_CASE("simulate path") {
    // determinism: same seed, same path; different seeds, different paths
    const BmcSpec spec = fig1_spec(40, 500);
    const auto p1 = simulate_path(spec, 7);
    const auto p2 = simulate_path(spec, 7);
    const auto p3 = simulate_path(spec, 8);
    REQUIRE(p1 == p2);
    REQUIRE(p1 != p3);
    for (std::size_t s : p1) REQUIRE(s < spec.d);

    // K = 1: i.i.d. uniform states; chi-square over 1e5 steps at the 1e-3
    // level (d = 4, df = 3, critical value 16.27)
    BmcSpec one;
    one.K = 1;
    one.p = {{1.0}};
    one.cluster_sizes = {4};
    one.n = 100000;
    one.finalize();
    const auto path = simulate_path(one, 99);
    std::vector<double> counts(4, 0.0);
    for (std::size_t s : path) counts[s] += 1.0;
    double chi2 = 0.0;
    const double expect = static_cast<double>(one.n) / 4.0;
    for (double c : counts) chi2 += (c - expect) * (c - expect) / expect;
    REQUIRE(chi2 < 16.27);

    // absorbing rows are rejected at construction
    BmcSpec absorbing;
    absorbing.K = 2;
    absorbing.p = {{1.0, 0.0}, {0.0, 1.0}};
    absorbing.cluster_sizes = {2, 2};
    absorbing.n = 10;
    REQUIRE_THROWS_AS(absorbing.finalize(), ConvergenceError);
}

TEST_CASE("frequency matrix") {
    // path (1,1,1) on a single state: N = [[2]]
    const RectMatrix n1 = frequency_matrix({0, 0, 0}, 1);
    REQUIRE(n1(0, 0) == 2.0);

    // hand path on d = 3
    const RectMatrix n3 = frequency_matrix({0, 1, 2, 0}, 3);
    REQUIRE(n3(0, 1) == 1.0);
    REQUIRE(n3(1, 2) == 1.0);
    REQUIRE(n3(2, 0) == 1.0);
    REQUIRE(n3(0, 0) == 0.0);

    // counting identity: entries sum to n - 1 on simulated paths
    const BmcSpec spec = fig1_spec(40, 777);
    const auto path = simulate_path(spec, 3);
    const RectMatrix N = frequency_matrix(path, spec.d);
    double total = 0.0;
    for (std::size_t i = 0; i < spec.d; ++i)
        for (std::size_t j = 0; j < spec.d; ++j) total += N(i, j);
    REQUIRE(total == static_cast<double>(spec.n - 1));

    REQUIRE_THROWS_AS(frequency_matrix({0}, 1), DomainError);
}

TEST_CASE("expected frequency") {
    // K = 1: all entries (n-1)/d^2
    BmcSpec one;
    one.K = 1;
    one.p = {{1.0}};
    one.cluster_sizes = {5};
    one.n = 101;
    one.finalize();
    const RectMatrix E1 = expected_frequency(one);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            REQUIRE_THAT(E1(i, j), Catch::Matchers::WithinAbs(100.0 / 25.0, 1e-12));

    // entry sums equal n - 1 exactly
    const BmcSpec spec = fig1_spec(20, 2000);
    const RectMatrix E = expected_frequency(spec);
    double total = 0.0;
    for (std::size_t i = 0; i < spec.d; ++i)
        for (std::size_t j = 0; j < spec.d; ++j) total += E(i, j);
    REQUIRE_THAT(total, Catch::Matchers::WithinRel(static_cast<double>(spec.n - 1), 1e-12));

    // Monte Carlo: empirical mean of N over 1e4 trials, entrywise within
    // 4 standard errors
    const std::size_t trials = 10000;
    RectMatrix mean(spec.d, spec.d), meansq(spec.d, spec.d);
    for (std::size_t t = 0; t < trials; ++t) {
        const auto path = simulate_path(spec, mix_seed(123, t));
        const RectMatrix N = frequency_matrix(path, spec.d);
        for (std::size_t i = 0; i < spec.d; ++i)
            for (std::size_t j = 0; j < spec.d; ++j) {
                mean(i, j) += N(i, j) / trials;
                meansq(i, j) += N(i, j) * N(i, j) / trials;
            }
    }
    for (std::size_t i = 0; i < spec.d; ++i)
        for (std::size_t j = 0; j < spec.d; ++j) {
            const double var = std::max(meansq(i, j) - mean(i, j) * mean(i, j), 1e-12);
            const double se = std::sqrt(var / trials);
            REQUIRE(std::abs(mean(i, j) - E(i, j)) <= 4.0 * se);
        }
}

TEST_CASE("centered scaled") {
    const BmcSpec spec = fig1_spec(20, 400);
    const RectMatrix E = expected_frequency(spec);
    const RectMatrix M0 = centered_scaled(spec, E);
    for (std::size_t i = 0; i < spec.d; ++i)
        for (std::size_t j = 0; j < spec.d; ++j)
            REQUIRE_THAT(M0(i, j), Catch::Matchers::WithinAbs(0.0, 1e-14));

    // doubling n with N fixed rescales by 1/sqrt(2) (up to the change in E N)
    BmcSpec spec2 = spec;
    spec2.n = 2 * spec.n;
    spec2.finalize();
    const auto path = simulate_path(spec, 5);
    const RectMatrix N = frequency_matrix(path, spec.d);
    const RectMatrix Ma = centered_scaled(spec, N);
    RectMatrix shifted(spec.d, spec.d);
    {
        // pick shifted so that shifted - E N(spec2) = N - E N(spec)
        const RectMatrix E2 = expected_frequency(spec2);
        for (std::size_t i = 0; i < spec.d; ++i)
            for (std::size_t j = 0; j < spec.d; ++j)
                shifted(i, j) = N(i, j) - E(i, j) + E2(i, j);
    }
    const RectMatrix Mb = centered_scaled(spec2, shifted);
    for (std::size_t i = 0; i < spec.d; ++i)
        for (std::size_t j = 0; j < spec.d; ++j)
            REQUIRE_THAT(Mb(i, j),
                         Catch::Matchers::WithinAbs(Ma(i, j) / std::sqrt(2.0), 1e-12));
}

TEST_CASE("frak parameters, K = 1") {
    BmcSpec one;
    one.K = 1;
    one.p = {{1.0}};
    one.cluster_sizes = {6};
    one.n = 50;
    one.finalize();
    const FrakParams f = frak_params(one);
    REQUIRE_THAT(f.c1, Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(f.c2, Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(f.c3, Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE(f.frak_d == 0.0);  // p - Pi vanishes identically
    REQUIRE(f.PsiC == 1);
    REQUIRE_THAT(f.frak_u, Catch::Matchers::WithinAbs(2.0, 1e-12));
}

TEST_CASE("frak parameter inequalities on random specs") {
    Rng rng(55);
    for (int trial = 0; trial < 100; ++trial) {
        const BmcSpec spec = random_spec(rng, 2 + rng.uniform_below(3), 1, 6, 60);
        const FrakParams f = frak_params(spec);
        const double am = spec.alpha_hat_min();
        REQUIRE(f.c1 <= 1.0 / am + 1e-9);
        REQUIRE(f.c2 <= 1.0 / (am * am) + 1e-9);
        REQUIRE(f.c3 <= 1.0 / (am * am * am) + 1e-9);
        REQUIRE(f.frak_d <=
                (4.0 / 3.0) * static_cast<double>(f.PsiC) / (am * am) + 1e-9);
    }
}

TEST_CASE("frak d: exact expression vs brute force") {
    Rng rng(56);

    // n = 3 -> 0 by convention
    {
        BmcSpec s = random_spec(rng, 3, 1, 4, 3);
        REQUIRE(frakd_bruteforce(s) == 0.0);
        REQUIRE(frak_params(s).frak_d == 0.0);
    }

    // K = 1 -> 0 since p^t = pi identically
    {
        BmcSpec one;
        one.K = 1;
        one.p = {{1.0}};
        one.cluster_sizes = {3};
        one.n = 100;
        one.finalize();
        REQUIRE(frakd_bruteforce(one) == 0.0);
    }

    // random specs, K <= 4, n <= 200: relative error < 1e-10
    for (int trial = 0; trial < 50; ++trial) {
        const BmcSpec spec =
            random_spec(rng, 2 + rng.uniform_below(3), 1, 5, 4 + rng.uniform_below(197));
        const double exact = frak_params(spec).frak_d;
        const double brute = frakd_bruteforce(spec);
        REQUIRE_THAT(exact, Catch::Matchers::WithinRel(brute, 1e-10));
    }
}

TEST_CASE("psi of the transition chain") {
    Rng rng(57);
    for (int trial = 0; trial < 5; ++trial) {
        const BmcSpec spec = random_spec(rng, 2, 2, 3, 50);
        const std::size_t psiC = capital_psi(spec.cluster_chain());
        const std::size_t psiZ = [&] {
            FiniteChain z;
            z.P.assign(spec.d, std::vector<double>(spec.d));
            z.initial.assign(spec.d, 0.0);
            z.n = spec.n;
            for (std::size_t i = 0; i < spec.d; ++i) {
                const std::size_t a = spec.cluster_of(i);
                z.initial[i] = spec.pi[a] / static_cast<double>(spec.cluster_sizes[a]);
                for (std::size_t j = 0; j < spec.d; ++j) {
                    const std::size_t b = spec.cluster_of(j);
                    z.P[i][j] = spec.p[a][b] / static_cast<double>(spec.cluster_sizes[b]);
                }
            }
            return capital_psi(z);
        }();
        REQUIRE(psiZ == psiC);  // Psi(Z) = Psi(C)

        const std::size_t psiE = capital_psi(transition_chain(spec));
        REQUIRE(psiE <= psiC + 1);  // Psi(E) <= Psi(C) + 1
    }
}

TEST_CASE("analytic covariance against simulation") {
    const BmcSpec spec = fig1_spec(10, 200);
    const CovTensor C = analytic_covariance(spec);

    const std::size_t trials = 100000;
    const std::size_t d2 = spec.d * spec.d;
    std::vector<double> mean(d2, 0.0), covacc(d2 * d2, 0.0);
    std::vector<double> flat(d2);
    for (std::size_t t = 0; t < trials; ++t) {
        const auto path = simulate_path(spec, mix_seed(777, t));
        const RectMatrix M = centered_scaled(spec, frequency_matrix(path, spec.d));
        for (std::size_t i = 0; i < d2; ++i) flat[i] = M.data()[i];
        for (std::size_t i = 0; i < d2; ++i) {
            mean[i] += flat[i] / trials;
            for (std::size_t j = i; j < d2; ++j) covacc[i * d2 + j] += flat[i] * flat[j] / trials;
        }
    }
    CovTensor emp(spec.d);
    for (std::size_t i = 0; i < d2; ++i)
        for (std::size_t j = i; j < d2; ++j)
            emp.flat().set(i, j, covacc[i * d2 + j] - mean[i] * mean[j]);

    // v agreement within 5 percent
    const double v_analytic = v_param(C);
    const double v_emp = std::sqrt(std::max(lanczos_extreme_abs(emp.flat()), 0.0));
    REQUIRE_THAT(v_emp, Catch::Matchers::WithinRel(v_analytic, 0.05));

    // E tr M M^T from the covariance diagonal matches the simulated mean
    double tr_analytic = 0.0;
    for (std::size_t i = 0; i < d2; ++i) tr_analytic += C.flat()(i, i);
    double tr_emp = 0.0;
    for (std::size_t i = 0; i < d2; ++i) tr_emp += covacc[i * d2 + i];
    REQUIRE_THAT(tr_emp, Catch::Matchers::WithinRel(tr_analytic, 0.02));
}

TEST_CASE("parameter bounds cover the analytic values") {
    // sigma(S)^2 <= frak g and v(S)^2 <= frak v / d for the exact covariance
    const BmcSpec spec = fig1_spec(10, 300);
    const FrakParams f = frak_params(spec);
    const CovTensor covM = analytic_covariance(spec);

    // sigma(S)^2 = max(||E M M^T||, ||E M^T M||)
    SymMatrix MMt(spec.d), MtM(spec.d);
    for (std::size_t i = 0; i < spec.d; ++i)
        for (std::size_t j = i; j < spec.d; ++j) {
            double a = 0.0, b = 0.0;
            for (std::size_t l = 0; l < spec.d; ++l) {
                a += covM(i, l, j, l);
                b += covM(l, i, l, j);
            }
            MMt.set(i, j, a);
            MtM.set(i, j, b);
        }
    const double sigma_sq = std::max(operator_norm(MMt), operator_norm(MtM));
    REQUIRE(sigma_sq <= f.frak_g + 1e-9);

    // the true dilation covariance norm, and the 2 ||Cov(M)|| route above it
    const double v_sq_true = std::pow(v_param(dilation_covariance(covM)), 2.0);
    const double v_sq_route = 2.0 * std::pow(v_param(covM), 2.0);
    REQUIRE(v_sq_true <= v_sq_route + 1e-9);
    REQUIRE(v_sq_route <= f.frak_v / static_cast<double>(spec.d) + 1e-9);

    // varsigma^2 <= c1 via the exact per-step second moment
    double varsigma_sq = 0.0;
    for (std::size_t k = 0; k < spec.K; ++k)
        varsigma_sq = std::max(
            varsigma_sq, static_cast<double>(spec.d) * spec.pi[k] /
                             static_cast<double>(spec.cluster_sizes[k]));
    REQUIRE(varsigma_sq <= f.c1 + 1e-12);
}

TEST_CASE("bound report") {
    // d/n -> 0 limit: threshold(p) approaches the n-free three-term formula;
    // the two remaining terms scale as (d/n)^{1/6} and (d/n)^{1/2}
    {
        auto rest = [&](std::size_t n) {
            const BmcSpec spec = fig1_spec(20, n);
            const BoundReport r = bound_report(spec);
            const double three_terms =
                r.free_norm_bound + 2.0 *
                                        std::pow(r.frak.frak_v * r.frak.frak_g / 20.0, 0.25) *
                                        std::pow(3.0, 0.75);
            return r.threshold(3) - three_terms;
        };
        const double r1 = rest(2000);
        const double r2 = rest(2000000);
        const double r3 = rest(2000000000ULL);
        REQUIRE(r1 > r2);
        REQUIRE(r2 > r3);
        REQUIRE(r3 > 0.0);
        // the (d/n)^{1/6} term dominates: a 10^3 step shrinks it by 10^{-1/2}
        REQUIRE(r2 / r1 < 0.40);
        REQUIRE(r3 / r2 < 0.40);
    }

    // K = 1 with large d and huge n: threshold(1) = 2 plus corrections that
    // decay like d^{-1/4} and (d/n)^{1/6}
    {
        BmcSpec one;
        one.K = 1;
        one.p = {{1.0}};
        one.cluster_sizes.assign(1, 1000000);
        one.n = 9200000000000000000ULL;
        one.finalize();
        const BoundReport r = bound_report(one);
        const double t1 = r.threshold(1);
        REQUIRE(t1 > 2.0);
        REQUIRE(t1 < 3.2);
        REQUIRE_THAT(r.mhat, Catch::Matchers::WithinAbs(2.0, 1e-8));
    }

    // monotone in p and in d/n
    {
        const BmcSpec spec = fig1_spec(40, 4000);
        const BoundReport r = bound_report(spec);
        for (int p = 1; p < 6; ++p) REQUIRE(r.threshold(p + 1) > r.threshold(p));

        BmcSpec sparser = fig1_spec(40, 2000);
        const BoundReport r2 = bound_report(sparser);
        REQUIRE(r2.threshold(3) > r.threshold(3));

        REQUIRE(r.tail(3, 1.2) == 1.0);  // 40 / 1.2^6 clamps to 1
        REQUIRE_THAT(r.tail(3, 3.0), Catch::Matchers::WithinRel(40.0 / 729.0, 1e-12));
    }
}

TEST_CASE("limiting m") {
    // K = 1 by AM-GM
    REQUIRE_THAT(limiting_m({1.0}, {1.0}, {{1.0}}), Catch::Matchers::WithinAbs(2.0, 1e-8));

    // relabeling clusters leaves the value unchanged
    const std::vector<double> alpha = {0.2, 0.1, 0.4, 0.3};
    const std::vector<double> pi = stationary_distribution(kFig1P);
    const double base = limiting_m(alpha, pi, kFig1P);

    const std::vector<std::size_t> perm = {2, 0, 3, 1};
    std::vector<double> alpha_p(4), pi_p(4);
    std::vector<std::vector<double>> p_p(4, std::vector<double>(4));
    for (std::size_t i = 0; i < 4; ++i) {
        alpha_p[i] = alpha[perm[i]];
        pi_p[i] = pi[perm[i]];
        for (std::size_t j = 0; j < 4; ++j) p_p[i][j] = kFig1P[perm[i]][perm[j]];
    }
    REQUIRE_THAT(limiting_m(alpha_p, pi_p, p_p), Catch::Matchers::WithinAbs(base, 1e-8));

    REQUIRE_THROWS_AS(limiting_m({0.5, 0.4}, {0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.5}}),
                      DomainError);
}

#include <cmath>
#include <vector>

#include <catch_amalgamated.hpp>

#include "freeconc/matrix.hpp"
#include "freeconc/rng.hpp"

using namespace freeconc;

namespace {

SymMatrix random_symmetric(std::size_t d, Rng& rng, double scale = 1.0) {
    SymMatrix A(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) A.set(i, j, scale * (2.0 * rng.uniform01() - 1.0));
    return A;
}

RectMatrix random_rect(std::size_t r, std::size_t c, Rng& rng) {
    RectMatrix M(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) M(i, j) = 2.0 * rng.uniform01() - 1.0;
    return M;
}

// Oracle: 10^4-step power iteration on A^2 gives the squared top |eigenvalue|.
double power_iteration_norm(const SymMatrix& A, std::size_t steps = 10000) {
    const std::size_t n = A.dim();
    Rng rng(99);
    std::vector<double> v(n), w(n);
    for (double& x : v) x = rng.normal();
    double lambda = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
        // w = A * (A * v)
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += A(i, j) * v[j];
            w[i] = acc;
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += A(i, j) * w[j];
            v[i] = acc;
            norm += acc * acc;
        }
        norm = std::sqrt(norm);
        lambda = norm;
        for (double& x : v) x /= norm;
    }
    return std::sqrt(lambda);
}

// Oracle: random orthogonal matrix by Gram-Schmidt on a random square matrix.
RectMatrix random_orthogonal(std::size_t d, Rng& rng) {
    RectMatrix Q(d, d);
    for (std::size_t c = 0; c < d; ++c) {
        std::vector<double> v(d);
        for (double& x : v) x = rng.normal();
        for (std::size_t prev = 0; prev < c; ++prev) {
            double dot = 0.0;
            for (std::size_t i = 0; i < d; ++i) dot += v[i] * Q(i, prev);
            for (std::size_t i = 0; i < d; ++i) v[i] -= dot * Q(i, prev);
        }
        double nrm = 0.0;
        for (double x : v) nrm += x * x;
        nrm = std::sqrt(nrm);
        for (std::size_t i = 0; i < d; ++i) Q(i, c) = v[i] / nrm;
    }
    return Q;
}

}  // namespace

TEST_CASE("selfadjoint dilation") {
    RectMatrix Z(1, 1);
    const SymMatrix S0 = selfadjoint_dilation(Z);
    REQUIRE(S0.dim() == 2);
    REQUIRE(operator_norm(S0) == 0.0);

    RectMatrix M1(1, 1);
    M1(0, 0) = 3.0;
    const SymMatrix S1 = selfadjoint_dilation(M1);
    REQUIRE(S1(0, 1) == 3.0);
    REQUIRE(S1(1, 0) == 3.0);
    REQUIRE(S1(0, 0) == 0.0);
    REQUIRE_THAT(operator_norm(S1), Catch::Matchers::WithinAbs(3.0, 1e-12));

    RectMatrix R(2, 3);
    REQUIRE_THROWS_AS(selfadjoint_dilation(R), ShapeError);

    Rng rng(42);
    const RectMatrix M = random_rect(5, 5, rng);
    const double via_dilation = operator_norm(selfadjoint_dilation(M));
    const double via_svd = singular_values(M).front();
    REQUIRE_THAT(via_dilation, Catch::Matchers::WithinRel(via_svd, 1e-9));
}

TEST_CASE("operator norm") {
    REQUIRE_THAT(operator_norm(SymMatrix::identity(4)), Catch::Matchers::WithinAbs(1.0, 1e-12));

    SymMatrix D(2);
    D.set(0, 0, -5.0);
    D.set(1, 1, 2.0);
    REQUIRE_THAT(operator_norm(D), Catch::Matchers::WithinAbs(5.0, 1e-12));

    Rng rng(7);
    const SymMatrix A = random_symmetric(20, rng);
    REQUIRE_THAT(operator_norm(A), Catch::Matchers::WithinRel(power_iteration_norm(A), 1e-8));

    SymMatrix bad(2);
    bad.set(0, 1, std::nan(""));
    REQUIRE_THROWS_AS(operator_norm(bad), NumericError);
}

TEST_CASE("normalized trace power") {
    for (int p : {1, 2, 3, 7})
        REQUIRE_THAT(normalized_trace_power(SymMatrix::identity(5), p),
                     Catch::Matchers::WithinAbs(1.0, 1e-12));

    SymMatrix D(2);
    D.set(0, 0, 1.0);
    D.set(1, 1, -1.0);
    REQUIRE_THAT(normalized_trace_power(D, 2), Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(normalized_trace_power(D, 3), Catch::Matchers::WithinAbs(0.0, 1e-12));

    // index-sum oracle at p = 4
    Rng rng(11);
    const SymMatrix A = random_symmetric(8, rng);
    double oracle = 0.0;
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            for (std::size_t k = 0; k < 8; ++k)
                for (std::size_t l = 0; l < 8; ++l)
                    oracle += A(i, j) * A(j, k) * A(k, l) * A(l, i);
    oracle /= 8.0;
    REQUIRE_THAT(normalized_trace_power(A, 4), Catch::Matchers::WithinRel(oracle, 1e-10));

    // tr A^2 identity: eigenvalue route vs entry-square route
    double fro = 0.0;
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) fro += A(i, j) * A(i, j);
    REQUIRE_THAT(normalized_trace_power(A, 2), Catch::Matchers::WithinRel(fro / 8.0, 1e-10));

    REQUIRE_THROWS_AS(normalized_trace_power(D, 0), DomainError);
}

TEST_CASE("sigma_param") {
    REQUIRE_THAT(sigma_param(SymMatrix::identity(3)), Catch::Matchers::WithinAbs(1.0, 1e-12));

    SymMatrix D(2);
    D.set(0, 0, 4.0);
    D.set(1, 1, 1.0);
    REQUIRE_THAT(sigma_param(D), Catch::Matchers::WithinAbs(2.0, 1e-12));

    SymMatrix notpsd(2);
    notpsd.set(0, 0, 1.0);
    notpsd.set(1, 1, -1.0);
    REQUIRE_THROWS_AS(sigma_param(notpsd), DomainError);

    // Monte Carlo oracle: GOE(8), entries N(0, 1/d) off-diagonal and
    // N(0, 2/d) on the diagonal; analytic sigma = sqrt((d+1)/d).
    const std::size_t d = 8, trials = 100000;
    Rng rng(123);
    SymMatrix S2(d);
    for (std::size_t t = 0; t < trials; ++t) {
        SymMatrix S(d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j) {
                const double sd = (i == j) ? std::sqrt(2.0 / d) : std::sqrt(1.0 / d);
                S.set(i, j, sd * rng.normal());
            }
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < d; ++k) acc += S(i, k) * S(k, j);
                S2.add(i, j, acc / trials);
            }
    }
    const double analytic = std::sqrt((d + 1.0) / d);
    REQUIRE_THAT(sigma_param(S2), Catch::Matchers::WithinRel(analytic, 0.03));
}

TEST_CASE("v_param") {
    CovTensor I3(3);
    for (std::size_t i = 0; i < 9; ++i) I3.flat().set(i, i, 1.0);
    REQUIRE_THAT(v_param(I3), Catch::Matchers::WithinAbs(1.0, 1e-12));

    // rank-1 C = u u^T with ||u|| = 3
    CovTensor C(2);
    Rng rng(5);
    std::vector<double> u(4);
    double nrm = 0.0;
    for (double& x : u) {
        x = rng.normal();
        nrm += x * x;
    }
    for (double& x : u) x *= 3.0 / std::sqrt(nrm);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i; j < 4; ++j) C.flat().set(i, j, u[i] * u[j]);
    REQUIRE_THAT(v_param(C), Catch::Matchers::WithinRel(3.0, 1e-10));
}

TEST_CASE("singular values") {
    RectMatrix D(2, 2);
    D(0, 0) = 2.0;
    D(1, 1) = -3.0;
    const auto s = singular_values(D);
    REQUIRE_THAT(s[0], Catch::Matchers::WithinAbs(3.0, 1e-12));
    REQUIRE_THAT(s[1], Catch::Matchers::WithinAbs(2.0, 1e-12));

    const auto z = singular_values(RectMatrix(3, 3));
    for (double v : z) REQUIRE(v == 0.0);

    // cross-check: squared singular values vs dilation eigenvalues
    Rng rng(21);
    const RectMatrix M = random_rect(6, 6, rng);
    const auto sv = singular_values(M);
    const auto dil = jacobi_eigenvalues(selfadjoint_dilation(M));
    for (std::size_t i = 0; i < 6; ++i)
        REQUIRE_THAT(dil[i], Catch::Matchers::WithinAbs(sv[i], 1e-10));
}

TEST_CASE("orthogonal conjugation invariance of sigma and v") {
    Rng rng(31);
    const std::size_t d = 5;
    // a PSD second moment
    SymMatrix S2(d);
    {
        const RectMatrix B = random_rect(d, d, rng);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < d; ++k) acc += B(i, k) * B(j, k);
                S2.set(i, j, acc);
            }
    }
    const RectMatrix Q = random_orthogonal(d, rng);
    SymMatrix S2c(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k)
                for (std::size_t l = 0; l < d; ++l) acc += Q(i, k) * S2(k, l) * Q(j, l);
            S2c.set(i, j, acc);
        }
    REQUIRE_THAT(sigma_param(S2c), Catch::Matchers::WithinRel(sigma_param(S2), 1e-9));

    // v invariance under C -> (Q (x) Q) C (Q (x) Q)^T
    const std::size_t dd = 3;
    CovTensor C(dd);
    {
        const RectMatrix B = random_rect(dd * dd, dd * dd, rng);
        for (std::size_t i = 0; i < dd * dd; ++i)
            for (std::size_t j = i; j < dd * dd; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < dd * dd; ++k) acc += B(i, k) * B(j, k);
                C.flat().set(i, j, acc);
            }
    }
    const RectMatrix Q2 = random_orthogonal(dd, rng);
    RectMatrix QQ(dd * dd, dd * dd);
    for (std::size_t i = 0; i < dd; ++i)
        for (std::size_t j = 0; j < dd; ++j)
            for (std::size_t k = 0; k < dd; ++k)
                for (std::size_t l = 0; l < dd; ++l)
                    QQ(i * dd + j, k * dd + l) = Q2(i, k) * Q2(j, l);
    CovTensor Cc(dd);
    const std::size_t n = dd * dd;
    std::vector<double> tmp(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t l = 0; l < n; ++l) acc += QQ(i, l) * C.flat()(l, k);
            tmp[i * n + k] = acc;
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += tmp[i * n + k] * QQ(j, k);
            Cc.flat().set(i, j, acc);
        }
    REQUIRE_THAT(v_param(Cc), Catch::Matchers::WithinRel(v_param(C), 1e-9));
}

TEST_CASE("lanczos extreme eigenvalue agrees with jacobi") {
    Rng rng(77);
    const SymMatrix A = random_symmetric(200, rng);
    const double jac = operator_norm(A);
    const double lan = lanczos_extreme_abs(A, 1e-11);
    REQUIRE_THAT(lan, Catch::Matchers::WithinRel(jac, 1e-9));
}

TEST_CASE("trace powers without eigendecomposition") {
    Rng rng(13);
    const SymMatrix A = random_symmetric(30, rng);
    const auto fast = normalized_trace_powers_up_to6(A, 6);
    for (int p = 1; p <= 6; ++p)
        REQUIRE_THAT(fast[static_cast<std::size_t>(p - 1)],
                     Catch::Matchers::WithinRel(normalized_trace_power(A, p), 1e-9));
}

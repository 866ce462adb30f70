#include <cmath>
#include <vector>

#include <catch_amalgamated.hpp>

#include "freeconc/dependence.hpp"
#include "freeconc/rng.hpp"

using namespace freeconc;

namespace {

FiniteChain two_state_09(std::size_t n = 1000) {
    FiniteChain c;
    c.P = {{0.9, 0.1}, {0.1, 0.9}};
    c.initial = {0.5, 0.5};
    c.n = n;
    return c;
}

// the K = 4 cluster chain of the headline experiment
FiniteChain fig1_chain(std::size_t n = 1000) {
    FiniteChain c;
    c.P = {{0.3, 0.7, 0.0, 0.0},
           {0.0, 0.0, 0.2, 0.8},
           {0.2, 0.7, 0.0, 0.1},
           {0.0, 0.0, 0.7, 0.3}};
    c.initial = detail::stationary_of([&] {
        FiniteChain t;
        t.P = c.P;
        t.initial = {0.25, 0.25, 0.25, 0.25};
        t.n = n;
        return t;
    }());
    c.n = n;
    return c;
}

FiniteChain random_ergodic_chain(std::size_t S, Rng& rng, std::size_t n = 500) {
    FiniteChain c;
    c.P.assign(S, std::vector<double>(S));
    for (auto& row : c.P) {
        double tot = 0.0;
        for (double& v : row) {
            v = 0.05 + rng.exponential();  // bounded away from zero: ergodic
            tot += v;
        }
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < S; ++i) {
            row[i] /= tot;
            acc += row[i];
        }
        row.back() = 1.0 - acc;
    }
    FiniteChain probe = c;
    probe.initial.assign(S, 1.0 / static_cast<double>(S));
    probe.n = n;
    c.initial = detail::stationary_of(probe);
    c.n = n;
    return c;
}

}  // namespace

TEST_CASE("psi coefficient") {
    // product pmf -> 0
    JointPmf prod;
    prod.A = 2;
    prod.B = 3;
    const std::vector<double> px = {0.4, 0.6}, py = {0.2, 0.5, 0.3};
    prod.p.resize(6);
    for (std::size_t x = 0; x < 2; ++x)
        for (std::size_t y = 0; y < 3; ++y) prod.p[x * 3 + y] = px[x] * py[y];
    REQUIRE_THAT(psi_coefficient(prod), Catch::Matchers::WithinAbs(0.0, 1e-12));

    // X = Y uniform on {0,1}: psi = |1/2 - 1/4| / (1/4) = 1
    JointPmf eq;
    eq.A = eq.B = 2;
    eq.p = {0.5, 0.0, 0.0, 0.5};
    REQUIRE_THAT(psi_coefficient(eq), Catch::Matchers::WithinAbs(1.0, 1e-12));

    // rows of zero mass are ignored: still finite
    JointPmf degenerate;
    degenerate.A = degenerate.B = 2;
    degenerate.p = {0.0, 0.0, 0.0, 1.0};
    REQUIRE(std::isfinite(psi_coefficient(degenerate)));

    // two-state 0.9/0.1 chain at lag 1 from equilibrium:
    // P^t = Pi + 0.8^t (I - Pi) gives psi = 0.8
    const FiniteChain c = two_state_09();
    REQUIRE_THAT(psi_at_lag(c, 1), Catch::Matchers::WithinAbs(0.8, 1e-12));
    REQUIRE_THAT(psi_at_lag(c, 3), Catch::Matchers::WithinAbs(0.8 * 0.8 * 0.8, 1e-12));
}

TEST_CASE("capital psi") {
    // i.i.d. chain: all rows equal pi -> 1
    FiniteChain iid;
    iid.P = {{0.3, 0.7}, {0.3, 0.7}};
    iid.initial = {0.3, 0.7};
    iid.n = 100;
    REQUIRE(capital_psi(iid) == 1);

    // 0.9/0.1 chain: 0.8^7 = 0.2097 <= 1/4 < 0.8^6 = 0.2621 -> 7
    REQUIRE(capital_psi(two_state_09()) == 7);

    // cluster chain of the headline experiment, cross-checked by direct
    // matrix powering
    const FiniteChain f = fig1_chain();
    const std::size_t psi = capital_psi(f);
    std::vector<std::vector<double>> Pt(4, std::vector<double>(4, 0.0));
    for (std::size_t i = 0; i < 4; ++i) Pt[i][i] = 1.0;
    std::size_t direct = f.n;
    for (std::size_t t = 1; t <= f.n; ++t) {
        std::vector<std::vector<double>> nx(4, std::vector<double>(4, 0.0));
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t k = 0; k < 4; ++k)
                for (std::size_t j = 0; j < 4; ++j) nx[i][j] += Pt[i][k] * f.P[k][j];
        Pt = nx;
        double worst = 0.0;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                worst = std::max(worst, std::abs(Pt[i][j] - f.initial[j]) / f.initial[j]);
        if (worst <= 0.25) {
            direct = t;
            break;
        }
    }
    REQUIRE(psi == direct);

    // non-stationary start
    FiniteChain off = two_state_09();
    off.initial = {0.9, 0.1};
    REQUIRE_THROWS_AS(capital_psi(off), DomainError);

    // non-ergodic within n: Psi = n per the formula
    FiniteChain slow;
    slow.P = {{0.999999999, 0.000000001}, {0.000000001, 0.999999999}};
    slow.initial = {0.5, 0.5};
    slow.n = 5;
    REQUIRE(capital_psi(slow) == 5);
}

TEST_CASE("tv distance") {
    REQUIRE(tv_distance({0.2, 0.8}, {0.2, 0.8}) == 0.0);
    REQUIRE_THAT(tv_distance({1.0, 0.0}, {0.0, 1.0}), Catch::Matchers::WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(tv_distance({0.7, 0.3}, {0.3, 0.7}), Catch::Matchers::WithinAbs(0.4, 1e-15));
    REQUIRE_THROWS_AS(tv_distance({0.5, 0.5}, {1.0}), ShapeError);
}

TEST_CASE("mixing time") {
    FiniteChain iid;
    iid.P = {{0.3, 0.7}, {0.3, 0.7}};
    iid.initial = {0.3, 0.7};
    iid.n = 100;
    REQUIRE(mixing_time(iid) == 1);

    // d(t) = 0.5 * 0.8^t: 0.5 * 0.8^4 = 0.2048 <= 1/4 < 0.5 * 0.8^3 = 0.256
    REQUIRE(mixing_time(two_state_09()) == 4);

    REQUIRE_THROWS_AS(mixing_time(two_state_09(), 0.0), DomainError);
    REQUIRE_THROWS_AS(mixing_time(two_state_09(), 1.0), DomainError);

    // a chain mixing slower than 1e6 steps hits the iteration-limit error
    FiniteChain glacial;
    glacial.P = {{1.0 - 1e-9, 1e-9}, {1e-9, 1.0 - 1e-9}};
    glacial.initial = {0.5, 0.5};
    glacial.n = 10;
    REQUIRE_THROWS_AS(mixing_time(glacial), ConvergenceError);
}

TEST_CASE("psipi bound") {
    // uniform 2-state i.i.d.: (log2(2) + 3) * 1 = 4 >= Psi = 1
    FiniteChain iid;
    iid.P = {{0.5, 0.5}, {0.5, 0.5}};
    iid.initial = {0.5, 0.5};
    iid.n = 100;
    REQUIRE(psipi_bound(iid) == 4);
    REQUIRE(capital_psi(iid) <= psipi_bound(iid));

    // two-state 0.9/0.1: (1 + 3) * 4 = 16 >= 7
    REQUIRE(psipi_bound(two_state_09()) == 16);
    REQUIRE(capital_psi(two_state_09()) == 7);

    const FiniteChain f = fig1_chain();
    REQUIRE(capital_psi(f) <= psipi_bound(f));
}

TEST_CASE("psi properties on random ergodic chains") {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const FiniteChain c = random_ergodic_chain(3, rng);

        // submultiplicativity on Markov triples
        for (std::size_t s : {1u, 2u, 3u})
            for (std::size_t t : {1u, 2u, 4u}) {
                const double lhs = psi_at_lag(c, s + t);
                const double rhs = psi_at_lag(c, s) * psi_at_lag(c, t);
                REQUIRE(lhs <= rhs + 1e-10);
            }

        // exponential decay for j >= Psi
        const std::size_t Psi = capital_psi(c);
        for (std::size_t j = Psi; j <= Psi * 4; ++j) {
            const double bound = std::pow(0.25, static_cast<double>(j / Psi));
            REQUIRE(psi_at_lag(c, j) <= bound + 1e-12);
        }

        // psi >= 0 and the mixing-time bound
        REQUIRE(psi_at_lag(c, 1) >= 0.0);
        REQUIRE(capital_psi(c) <= psipi_bound(c));
    }
}

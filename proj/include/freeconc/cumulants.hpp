#pragma once

// Exact combinatorics for classical and Boolean joint cumulants: set
// partitions, runs-of-permutation partitions, the classical-to-Boolean
// identity, the Markov telescoping identity, and the dependence parameters
// K_k(Y) and D^{eta,gamma}_k(Y).
//
// Joint distributions are exact finite-support tables, so every identity here
// is checkable at 1e-10 without sampling noise.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

#include "freeconc/errors.hpp"

namespace freeconc {

/// Exact joint-moment evaluator for N real random variables with finite joint
/// support. moment(idx) = sum_atoms prob * prod_{t in idx} value[t].
class MomentOracle {
  public:
    struct Atom {
        std::vector<double> values;  // length = variable count
        double prob;
    };

    MomentOracle(std::size_t num_variables, std::vector<Atom> atoms)
        : n_(num_variables), atoms_(std::move(atoms)) {
        double total = 0.0;
        for (const Atom& a : atoms_) {
            if (a.values.size() != n_) throw ShapeError("MomentOracle: atom arity mismatch");
            if (a.prob < 0.0) throw DomainError("MomentOracle: negative probability");
            total += a.prob;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw DomainError("MomentOracle: probabilities must sum to 1");
    }

    std::size_t num_variables() const { return n_; }
    const std::vector<Atom>& atoms() const { return atoms_; }

    double moment(const std::vector<std::size_t>& idx) const {
        double m = 0.0;
        for (const Atom& a : atoms_) {
            double prod = a.prob;
            for (std::size_t t : idx) prod *= a.values[t];
            m += prod;
        }
        return m;
    }

    /// New oracle with one extra variable equal to a*Y_i + b*Y_j.
    MomentOracle with_linear_combination(double a, std::size_t i, double b,
                                         std::size_t j) const {
        std::vector<Atom> atoms = atoms_;
        for (Atom& atom : atoms)
            atom.values.push_back(a * atom.values[i] + b * atom.values[j]);
        return MomentOracle(n_ + 1, std::move(atoms));
    }

    /// Product oracle of two independent variable groups.
    static MomentOracle independent_product(const MomentOracle& x, const MomentOracle& y) {
        std::vector<Atom> atoms;
        atoms.reserve(x.atoms_.size() * y.atoms_.size());
        for (const Atom& ax : x.atoms_)
            for (const Atom& ay : y.atoms_) {
                Atom a;
                a.values = ax.values;
                a.values.insert(a.values.end(), ay.values.begin(), ay.values.end());
                a.prob = ax.prob * ay.prob;
                atoms.push_back(std::move(a));
            }
        return MomentOracle(x.n_ + y.n_, std::move(atoms));
    }

  private:
    std::size_t n_;
    std::vector<Atom> atoms_;
};

/// Partition of {0,...,k-1} into disjoint blocks covering the base set.
struct SetPartition {
    std::size_t base_size = 0;
    std::vector<std::vector<std::size_t>> blocks;
};

/// All partitions of a k-element set, each exactly once, in canonical order
/// (blocks sorted by least element; enumeration by restricted growth
/// strings). Capped at k <= 10 (Bell(10) = 115975).
inline std::vector<SetPartition> set_partitions(std::size_t k) {
    if (k < 1 || k > 10) throw DomainError("set_partitions: need 1 <= k <= 10");
    std::vector<SetPartition> out;
    std::vector<std::size_t> rgs(k, 0);
    while (true) {
        SetPartition p;
        p.base_size = k;
        const std::size_t nblocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
        p.blocks.assign(nblocks, {});
        for (std::size_t i = 0; i < k; ++i) p.blocks[rgs[i]].push_back(i);
        out.push_back(std::move(p));

        // next restricted growth string
        std::size_t i = k;
        while (i-- > 1) {
            std::size_t maxprefix = 0;
            for (std::size_t j = 0; j < i; ++j) maxprefix = std::max(maxprefix, rgs[j]);
            if (rgs[i] <= maxprefix) {
                ++rgs[i];
                std::fill(rgs.begin() + static_cast<std::ptrdiff_t>(i) + 1, rgs.end(), 0);
                break;
            }
            if (i == 1) return out;
        }
        if (k == 1) return out;
    }
}

/// Classical joint cumulant kappa(Y_{i_1},...,Y_{i_k}) via the partition sum
/// with Moebius weights (-1)^{#pi-1}(#pi-1)!.
inline double classical_cumulant(const MomentOracle& o, const std::vector<std::size_t>& idx) {
    const std::size_t k = idx.size();
    if (k < 1 || k > 10) throw DomainError("classical_cumulant: need 1 <= k <= 10");
    double total = 0.0;
    for (const SetPartition& p : set_partitions(k)) {
        double term = 1.0;
        for (const auto& block : p.blocks) {
            std::vector<std::size_t> sub;
            sub.reserve(block.size());
            for (std::size_t pos : block) sub.push_back(idx[pos]);
            term *= o.moment(sub);
        }
        const std::size_t b = p.blocks.size();
        double w = (b % 2 == 1) ? 1.0 : -1.0;
        for (std::size_t f = 1; f + 1 < b; ++f) w *= static_cast<double>(f + 1);
        // w = (-1)^{b-1} (b-1)!
        total += w * term;
    }
    return total;
}

/// Boolean joint cumulant b(Y_{i_1},...,Y_{i_k}): alternating sum over the
/// 2^{k-1} ordered interval splittings. Order of the arguments matters.
inline double boolean_cumulant(const MomentOracle& o, const std::vector<std::size_t>& idx) {
    const std::size_t k = idx.size();
    if (k < 1 || k > 16) throw DomainError("boolean_cumulant: need 1 <= k <= 16");
    double total = 0.0;
    const std::uint32_t masks = 1u << (k - 1);
    for (std::uint32_t cuts = 0; cuts < masks; ++cuts) {
        double term = 1.0;
        std::size_t start = 0;
        int ncuts = 0;
        for (std::size_t pos = 0; pos < k; ++pos) {
            const bool cut_after = pos + 1 < k && (cuts & (1u << pos));
            if (cut_after || pos + 1 == k) {
                std::vector<std::size_t> seg(idx.begin() + static_cast<std::ptrdiff_t>(start),
                                             idx.begin() + static_cast<std::ptrdiff_t>(pos) + 1);
                term *= o.moment(seg);
                start = pos + 1;
                if (cut_after) ++ncuts;
            }
        }
        total += (ncuts % 2 == 0 ? 1.0 : -1.0) * term;
    }
    return total;
}

/// Partition of {0..k-1} induced by the maximal increasing runs of
/// (rho(0),...,rho(k-1)); blocks hold the run VALUES.
inline SetPartition runs_partition(const std::vector<std::size_t>& rho) {
    const std::size_t k = rho.size();
    {
        std::vector<bool> seen(k, false);
        for (std::size_t v : rho) {
            if (v >= k || seen[v]) throw DomainError("runs_partition: not a permutation");
            seen[v] = true;
        }
    }
    SetPartition p;
    p.base_size = k;
    std::vector<std::size_t> run;
    for (std::size_t pos = 0; pos < k; ++pos) {
        if (!run.empty() && rho[pos] < run.back()) {
            p.blocks.push_back(run);
            run.clear();
        }
        run.push_back(rho[pos]);
    }
    if (!run.empty()) p.blocks.push_back(run);
    return p;
}

/// Classical cumulant reconstructed from Boolean cumulants:
///   kappa(Y_{sort(i)_1},...,Y_{sort(i)_k})
///     = sum_{rho in S_k, rho(1)=1} (-1)^{#pi_rho - 1}
///       prod_{J in pi_rho} b(Y_{sort(i)_j} : j in J),
/// block indices taken in increasing order. Ties in sort(i) are resolved by
/// stable sort. Capped at k <= 8 ((k-1)! permutations).
inline double classical_from_boolean(const MomentOracle& o, std::vector<std::size_t> idx) {
    const std::size_t k = idx.size();
    if (k < 1 || k > 8) throw DomainError("classical_from_boolean: need 1 <= k <= 8");
    std::stable_sort(idx.begin(), idx.end());

    std::vector<std::size_t> rest(k > 0 ? k - 1 : 0);
    std::iota(rest.begin(), rest.end(), 1);

    double total = 0.0;
    std::vector<std::size_t> rho(k);
    do {
        rho[0] = 0;
        std::copy(rest.begin(), rest.end(), rho.begin() + 1);
        const SetPartition pi = runs_partition(rho);
        double term = (pi.blocks.size() % 2 == 1) ? 1.0 : -1.0;
        for (const auto& block : pi.blocks) {
            std::vector<std::size_t> positions = block;
            std::sort(positions.begin(), positions.end());
            std::vector<std::size_t> sub;
            sub.reserve(positions.size());
            for (std::size_t pos : positions) sub.push_back(idx[pos]);
            term *= boolean_cumulant(o, sub);
        }
        total += term;
    } while (std::next_permutation(rest.begin(), rest.end()));
    return total;
}

// ---------------------------------------------------------------------------
// Markov telescoping identity.
// ---------------------------------------------------------------------------

/// Finite Markovian sequence W_1..W_k: initial law and one homogeneous
/// transition kernel; marginals are propagated exactly.
struct FiniteMarkovSequence {
    std::vector<double> initial;             // law of W_1
    std::vector<std::vector<double>> trans;  // trans[i][j] = P(W_{t+1}=j | W_t=i)
};

/// Evaluates the nested telescoping integral
///   int ... int { prod_{i=2}^k g_i(w_i) (dP_{W_i|W_{i-1}} - dP_{W_i}) } g_1 dP_{W_1}
/// by exhaustive state summation; equals b(g_1(W_1),...,g_k(W_k)).
inline double boolean_markov_telescoping(const FiniteMarkovSequence& chain,
                                         const std::vector<std::vector<double>>& g) {
    const std::size_t k = g.size();
    if (k == 0) throw DomainError("boolean_markov_telescoping: no functions");
    const std::size_t S = chain.initial.size();

    // marginals[t][s] = P(W_{t+1} = s)
    std::vector<std::vector<double>> marginals(k);
    marginals[0] = chain.initial;
    for (std::size_t t = 1; t < k; ++t) {
        marginals[t].assign(S, 0.0);
        for (std::size_t i = 0; i < S; ++i)
            for (std::size_t j = 0; j < S; ++j)
                marginals[t][j] += marginals[t - 1][i] * chain.trans[i][j];
    }

    // f[w] accumulates the inner integrals from position t+1..k as a function
    // of w_t; walk backwards through the difference factors.
    std::vector<double> f(S, 1.0);
    for (std::size_t t = k; t-- > 1;) {
        std::vector<double> nf(S, 0.0);
        for (std::size_t prev = 0; prev < S; ++prev) {
            double acc = 0.0;
            for (std::size_t w = 0; w < S; ++w)
                acc += g[t][w] * f[w] * (chain.trans[prev][w] - marginals[t][w]);
            nf[prev] = acc;
        }
        f = std::move(nf);
    }
    double total = 0.0;
    for (std::size_t w = 0; w < S; ++w) total += g[0][w] * f[w] * chain.initial[w];
    return total;
}

// ---------------------------------------------------------------------------
// Dependence parameters K_k(Y) and D^{eta,gamma}_k(Y).
// ---------------------------------------------------------------------------

/// Table of |kappa| over index tuples of a fixed order k.
class CumulantTable {
  public:
    CumulantTable(std::size_t num_variables, std::size_t order,
                  const std::function<double(const std::vector<std::size_t>&)>& cumulant)
        : n_(num_variables), k_(order) {
        std::vector<std::size_t> idx(k_, 0);
        fill(cumulant, idx, 0);
    }

    std::size_t order() const { return k_; }

    double abs_value(const std::vector<std::size_t>& idx) const {
        return values_.at(flat(idx));
    }

    /// K_k(Y) = max_{i_1} sum_{i_2..i_k} |kappa(Y_{i_1},...,Y_{i_k})|.
    double K() const {
        double best = 0.0;
        std::vector<std::size_t> idx(k_, 0);
        for (std::size_t i1 = 0; i1 < n_; ++i1) {
            idx[0] = i1;
            best = std::max(best, row_sum(idx, 1));
        }
        return best;
    }

  private:
    std::size_t flat(const std::vector<std::size_t>& idx) const {
        std::size_t f = 0;
        for (std::size_t v : idx) f = f * n_ + v;
        return f;
    }
    void fill(const std::function<double(const std::vector<std::size_t>&)>& cumulant,
              std::vector<std::size_t>& idx, std::size_t pos) {
        if (pos == k_) {
            values_[flat(idx)] = std::abs(cumulant(idx));
            return;
        }
        for (std::size_t v = 0; v < n_; ++v) {
            idx[pos] = v;
            fill(cumulant, idx, pos + 1);
        }
    }
    double row_sum(std::vector<std::size_t>& idx, std::size_t pos) const {
        if (pos == k_) return values_.at(flat(idx));
        double s = 0.0;
        for (std::size_t v = 0; v < n_; ++v) {
            idx[pos] = v;
            s += row_sum(idx, pos + 1);
        }
        return s;
    }

    std::size_t n_, k_;
    std::map<std::size_t, double> values_;
};

inline double K_param(const CumulantTable& table) { return table.K(); }

/// D^{eta,gamma}_{k_max}(Y) = max_{3 <= m <= k_max} (K_m / (eta (m!)^{1+gamma}))^{1/m}.
inline double D_param(const std::map<int, double>& K_values, double eta, double gamma,
                      int k_max) {
    if (eta <= 0.0) throw DomainError("D_param: eta must be positive");
    if (gamma < 0.0) throw DomainError("D_param: gamma must be nonnegative");
    double best = 0.0;
    for (int m = 3; m <= k_max; ++m) {
        const auto it = K_values.find(m);
        if (it == K_values.end())
            throw DomainError("D_param: K_m missing for some 3 <= m <= k_max");
        double log_mfact = 0.0;
        for (int f = 2; f <= m; ++f) log_mfact += std::log(static_cast<double>(f));
        if (it->second == 0.0) continue;
        const double log_ratio =
            std::log(it->second) - std::log(eta) - (1.0 + gamma) * log_mfact;
        best = std::max(best, std::exp(log_ratio / m));
    }
    return best;
}

}  // namespace freeconc

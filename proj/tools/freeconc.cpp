// freeconc: free-probability leading-order terms and explicit matrix
// concentration bounds, checked against Monte Carlo simulation of block
// Markov chains, G(d,m) random graphs, and sub-Weibull Wigner matrices.
//
// Exit codes: 0 ok, 2 config/usage error, 3 numeric non-convergence,
// 4 failed verification.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "freeconc/bmc.hpp"
#include "freeconc/config.hpp"
#include "freeconc/cumulants.hpp"
#include "freeconc/dependence.hpp"
#include "freeconc/dyson.hpp"
#include "freeconc/free_bounds.hpp"
#include "freeconc/models.hpp"
#include "freeconc/montecarlo.hpp"

namespace {

using namespace freeconc;

/// Verification suites report failure through this; mapped to exit 4.
struct VerificationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    out << content;
}

std::uint64_t effective_seed(std::uint64_t cli_seed) {
    if (const char* env = std::getenv("FREECONC_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0')
            throw ConfigError("FREECONC_SEED must be a decimal 64-bit integer");
        return static_cast<std::uint64_t>(v);
    }
    return cli_seed;
}

// ---------------------------------------------------------------------------
// bmc simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string config, out, histogram_path, report_path;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    int singular_values = 0;
    int moments = 0;
    unsigned threads = 0;
    bool emit_config = false;
};

int run_simulate(const SimulateArgs& a) {
    const BmcSpec spec = load_bmc_spec(a.config);
    if (a.emit_config) {
        std::cout << emit_bmc_spec(spec);
        return 0;
    }
    TrialConfig cfg;
    cfg.model = spec;
    cfg.trials = a.trials;
    cfg.base_seed = effective_seed(a.seed);
    cfg.want_singular_values =
        a.singular_values > 0 || !a.histogram_path.empty() || !a.report_path.empty();
    cfg.moment_order = a.moments;
    cfg.threads = a.threads;
    const auto samples = run_trials(cfg);

    std::ostringstream csv;
    csv << "trial,norm";
    for (int k = 1; k <= a.singular_values; ++k) csv << ",s" << k;
    for (int p = 1; p <= a.moments; ++p) csv << ",m" << p;
    csv << "\n";
    for (const auto& s : samples) {
        csv << s.trial << "," << fmt12(s.norm);
        for (int k = 1; k <= a.singular_values; ++k)
            csv << "," << fmt12(k <= static_cast<int>(s.values.size())
                                    ? s.values[static_cast<std::size_t>(k - 1)]
                                    : 0.0);
        for (int p = 1; p <= a.moments; ++p)
            csv << "," << fmt12(s.moments[static_cast<std::size_t>(p - 1)]);
        csv << "\n";
    }
    write_file(a.out, csv.str());

    if (!a.histogram_path.empty() || !a.report_path.empty()) {
        std::vector<double> pooled;
        for (const auto& s : samples) pooled.insert(pooled.end(), s.values.begin(), s.values.end());
        const DysonSystem sys = dyson_system(spec);
        const double edge = support_edge(sys);

        if (!a.histogram_path.empty()) {
            const auto h = histogram(pooled, 0.0, 1.2 * edge, 100);
            std::ostringstream hcsv;
            hcsv << "bin_left,bin_right,mass\n";
            for (const auto& b : h)
                hcsv << fmt12(b.left) << "," << fmt12(b.right) << "," << fmt12(b.mass) << "\n";
            write_file(a.histogram_path, hcsv.str());
        }
        if (!a.report_path.empty()) {
            const std::size_t pts = 600;
            std::vector<double> xs(pts);
            for (std::size_t i = 0; i < pts; ++i)
                xs[i] = 1.3 * edge * static_cast<double>(i) / static_cast<double>(pts - 1);
            std::vector<double> dens = density_grid(sys, xs, 1e-3);
            for (double& v : dens) v *= 2.0;  // symmetrized measure -> singular values
            const GridCdf cdf(xs, dens);
            const double ks = ks_distance(pooled, [&](double x) { return cdf(x); });

            const BoundReport br = bound_report(spec);
            nlohmann::json j;
            j["d"] = spec.d;
            j["n"] = spec.n;
            j["trials"] = a.trials;
            j["mhat"] = br.mhat;
            j["free_norm_bound"] = br.free_norm_bound;
            j["support_edge"] = edge;
            j["ks_singular_values"] = ks;
            j["frak"] = {{"c1", br.frak.c1},       {"c2", br.frak.c2},
                         {"c3", br.frak.c3},       {"d", br.frak.frak_d},
                         {"g", br.frak.frak_g},    {"v", br.frak.frak_v},
                         {"u", br.frak.frak_u},    {"E", br.frak.frak_E},
                         {"PsiC", br.frak.PsiC}};
            j["param_bounds"] = {{"R", br.R_bound},
                                 {"varsigma_sq", br.varsigma_sq},
                                 {"sigma_sq", br.sigma_sq},
                                 {"v_sq", br.v_sq},
                                 {"PsiE", br.PsiE}};
            write_file(a.report_path, j.dump(2) + "\n");
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// bmc bound / density / mlimit
// ---------------------------------------------------------------------------

struct BoundArgs {
    std::string config, out;
    int p_max = 6;
    bool emit_config = false;
};

int run_bound(const BoundArgs& a) {
    const BmcSpec spec = load_bmc_spec(a.config);
    if (a.emit_config) {
        std::cout << emit_bmc_spec(spec);
        return 0;
    }
    const BoundReport br = bound_report(spec);
    nlohmann::json j;
    j["d"] = spec.d;
    j["n"] = spec.n;
    j["mhat"] = br.mhat;
    j["free_norm_bound"] = br.free_norm_bound;
    j["frak"] = {{"c1", br.frak.c1}, {"c2", br.frak.c2}, {"c3", br.frak.c3},
                 {"d", br.frak.frak_d}, {"g", br.frak.frak_g}, {"v", br.frak.frak_v},
                 {"u", br.frak.frak_u}, {"E", br.frak.frak_E}, {"PsiC", br.frak.PsiC},
                 {"frakd_by_bruteforce", br.frak.frakd_by_bruteforce}};
    j["param_bounds"] = {{"R", br.R_bound},
                         {"varsigma_sq", br.varsigma_sq},
                         {"sigma_sq", br.sigma_sq},
                         {"v_sq", br.v_sq},
                         {"PsiE", br.PsiE}};
    nlohmann::json curve = nlohmann::json::array();
    for (int p = 1; p <= a.p_max; ++p)
        curve.push_back({{"p", p}, {"threshold", br.threshold(p)}});
    j["threshold_curve"] = curve;
    j["tail"] = "P(||M|| >= threshold(p) * x) <= min(1, d * x^(-2p))";
    write_file(a.out, j.dump(2) + "\n");
    return 0;
}

struct DensityArgs {
    std::string config, out;
    double grid_min = -3.0, grid_max = 3.0, epsilon = 1e-3;
    std::size_t points = 400;
    bool emit_config = false;
};

int run_density(const DensityArgs& a) {
    const BmcSpec spec = load_bmc_spec(a.config);
    if (a.emit_config) {
        std::cout << emit_bmc_spec(spec);
        return 0;
    }
    if (a.points < 2) throw ConfigError("density: need at least 2 grid points");
    const DysonSystem sys = dyson_system(spec);
    std::vector<double> xs(a.points);
    for (std::size_t i = 0; i < a.points; ++i)
        xs[i] = a.grid_min + (a.grid_max - a.grid_min) * static_cast<double>(i) /
                                 static_cast<double>(a.points - 1);
    const std::vector<double> dens = density_grid(sys, xs, a.epsilon);
    std::ostringstream csv;
    csv << "x,density\n";
    for (std::size_t i = 0; i < a.points; ++i)
        csv << fmt12(xs[i]) << "," << fmt12(dens[i]) << "\n";
    write_file(a.out, csv.str());
    return 0;
}

struct MlimitArgs {
    std::string config;
    bool emit_config = false;
};

int run_mlimit(const MlimitArgs& a) {
    const BmcSpec spec = load_bmc_spec(a.config);
    if (a.emit_config) {
        std::cout << emit_bmc_spec(spec);
        return 0;
    }
    std::vector<double> alpha(spec.K);
    for (std::size_t k = 0; k < spec.K; ++k) alpha[k] = spec.alpha_hat(k);
    std::printf("%.6f\n", limiting_m(alpha, spec.pi, spec.p));
    return 0;
}

// ---------------------------------------------------------------------------
// graph semicircle
// ---------------------------------------------------------------------------

struct GraphArgs {
    std::size_t d = 0, m = 0, trials = 1;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string out;
    bool emit_config = false;
};

int run_graph(const GraphArgs& a) {
    GnmSpec spec;
    spec.d = a.d;
    spec.m = a.m;
    spec.validate();
    if (a.emit_config) {
        nlohmann::json j{{"model", "gnm"}, {"d", a.d}, {"m", a.m},
                         {"trials", a.trials}, {"seed", effective_seed(a.seed)}};
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    TrialConfig cfg;
    cfg.model = spec;
    cfg.trials = a.trials;
    cfg.base_seed = effective_seed(a.seed);
    cfg.want_singular_values = false;
    cfg.moment_order = 6;
    cfg.threads = a.threads;
    const auto samples = run_trials(cfg);

    std::ostringstream csv;
    csv << "trial";
    for (int p = 1; p <= 6; ++p) csv << ",m" << p;
    csv << "\n";
    std::vector<double> mean(6, 0.0);
    for (const auto& s : samples) {
        csv << s.trial;
        for (int p = 0; p < 6; ++p) {
            csv << "," << fmt12(s.moments[static_cast<std::size_t>(p)]);
            mean[static_cast<std::size_t>(p)] +=
                s.moments[static_cast<std::size_t>(p)] / static_cast<double>(a.trials);
        }
        csv << "\n";
    }
    write_file(a.out, csv.str());
    std::printf("tr_S2 %s (semicircle 1)  tr_S4 %s (2)  tr_S6 %s (5)\n", fmt12(mean[1]).c_str(),
                fmt12(mean[3]).c_str(), fmt12(mean[5]).c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// wigner baiyin
// ---------------------------------------------------------------------------

struct WignerArgs {
    std::size_t d = 0, trials = 1;
    double theta = 1.0, scale = 1.0, delta = 0.05, x = 20.0, cprime = 1.0;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string out;
    bool emit_config = false;
};

int run_wigner(const WignerArgs& a) {
    SubWeibullSpec spec;
    spec.d = a.d;
    spec.theta = a.theta;
    spec.L = a.scale;
    spec.validate();
    if (a.emit_config) {
        nlohmann::json j{{"model", "wigner"}, {"d", a.d},         {"theta", a.theta},
                         {"scale", a.scale}, {"delta", a.delta},  {"x", a.x},
                         {"cprime", a.cprime}, {"trials", a.trials},
                         {"seed", effective_seed(a.seed)}};
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    TrialConfig cfg;
    cfg.model = spec;
    cfg.trials = a.trials;
    cfg.base_seed = effective_seed(a.seed);
    cfg.want_singular_values = false;
    cfg.moment_order = 0;
    cfg.threads = a.threads;
    const auto samples = run_trials(cfg);

    const BaiYinBound bound = baiyin_epsilon(a.d, a.theta, a.delta, a.x, a.cprime);
    std::ostringstream csv;
    csv << "trial,norm_over_sqrt_d\n";
    std::size_t exceed = 0;
    for (const auto& s : samples) {
        csv << s.trial << "," << fmt12(s.norm) << "\n";
        if (s.norm >= 2.0 + bound.epsilon) ++exceed;
    }
    write_file(a.out, csv.str());
    std::printf("epsilon %s  threshold %s  exceed_fraction %s  prob_bound %s\n",
                fmt12(bound.epsilon).c_str(), fmt12(2.0 + bound.epsilon).c_str(),
                fmt12(static_cast<double>(exceed) / static_cast<double>(a.trials)).c_str(),
                fmt12(bound.prob_bound).c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// cumulant verify
// ---------------------------------------------------------------------------

MomentOracle random_oracle(std::size_t vars, std::size_t atoms, Rng& rng) {
    std::vector<MomentOracle::Atom> a(atoms);
    std::vector<double> w(atoms);
    double tot = 0.0;
    for (std::size_t i = 0; i < atoms; ++i) {
        w[i] = rng.exponential();
        tot += w[i];
    }
    for (std::size_t i = 0; i < atoms; ++i) {
        a[i].prob = w[i] / tot;
        a[i].values.resize(vars);
        for (double& v : a[i].values) v = 2.0 * rng.uniform01() - 1.0;
    }
    // exact unit mass
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < atoms; ++i) s += a[i].prob;
    a[atoms - 1].prob = 1.0 - s;
    return MomentOracle(vars, std::move(a));
}

FiniteMarkovSequence random_markov_sequence(std::size_t states, Rng& rng) {
    FiniteMarkovSequence seq;
    seq.initial.resize(states);
    seq.trans.assign(states, std::vector<double>(states));
    auto fill_simplex = [&](std::vector<double>& row) {
        double tot = 0.0;
        for (double& v : row) {
            v = rng.exponential();
            tot += v;
        }
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < row.size(); ++i) {
            row[i] /= tot;
            acc += row[i];
        }
        row.back() = 1.0 - acc;
    };
    fill_simplex(seq.initial);
    for (auto& row : seq.trans) fill_simplex(row);
    return seq;
}

struct CumulantArgs {
    int kmax = 6;
    std::size_t oracles = 50;
    std::uint64_t seed = 7;
};

int run_cumulant_verify(const CumulantArgs& a) {
    if (a.kmax < 2 || a.kmax > 8) throw ConfigError("cumulant verify: need 2 <= kmax <= 8");
    Rng rng(effective_seed(a.seed));
    double worst_identity = 0.0;
    for (int k = 3; k <= a.kmax; ++k) {
        for (std::size_t o = 0; o < a.oracles; ++o) {
            const MomentOracle oracle =
                random_oracle(static_cast<std::size_t>(k), static_cast<std::size_t>(k) + 3, rng);
            std::vector<std::size_t> idx(static_cast<std::size_t>(k));
            for (auto& v : idx) v = rng.uniform_below(static_cast<std::uint64_t>(k));
            std::sort(idx.begin(), idx.end());
            const double lhs = classical_from_boolean(oracle, idx);
            const double rhs = classical_cumulant(oracle, idx);
            worst_identity = std::max(worst_identity, std::abs(lhs - rhs));
        }
    }

    double worst_markov = 0.0;
    for (std::size_t c = 0; c < 20; ++c) {
        const std::size_t states = 2 + rng.uniform_below(3);  // 2..4
        const FiniteMarkovSequence seq = random_markov_sequence(states, rng);
        for (std::size_t k = 1; k <= 5; ++k) {
            std::vector<std::vector<double>> g(k, std::vector<double>(states));
            for (auto& gi : g)
                for (double& v : gi) v = 2.0 * rng.uniform01() - 1.0;
            const double lhs = boolean_markov_telescoping(seq, g);

            // induced joint oracle over the k-step paths
            std::vector<MomentOracle::Atom> atoms;
            std::vector<std::size_t> w(k, 0);
            while (true) {
                MomentOracle::Atom atom;
                atom.prob = seq.initial[w[0]];
                for (std::size_t t = 1; t < k; ++t) atom.prob *= seq.trans[w[t - 1]][w[t]];
                atom.values.resize(k);
                for (std::size_t t = 0; t < k; ++t) atom.values[t] = g[t][w[t]];
                atoms.push_back(std::move(atom));
                std::size_t pos = k;
                while (pos-- > 0) {
                    if (++w[pos] < states) break;
                    w[pos] = 0;
                    if (pos == 0) goto done;
                }
            }
        done:;
            double mass = 0.0;
            for (const auto& atom : atoms) mass += atom.prob;
            for (auto& atom : atoms) atom.prob /= mass;
            const MomentOracle oracle(k, std::move(atoms));
            std::vector<std::size_t> idx(k);
            for (std::size_t t = 0; t < k; ++t) idx[t] = t;
            worst_markov = std::max(worst_markov, std::abs(lhs - boolean_cumulant(oracle, idx)));
        }
    }

    std::printf("classical_from_boolean max |error| %.3e (tol 1e-10)\n", worst_identity);
    std::printf("markov_telescoping     max |error| %.3e (tol 1e-12)\n", worst_markov);
    if (worst_identity > 1e-10 || worst_markov > 1e-12)
        throw VerificationFailure("cumulant identity suite failed");
    std::printf("cumulant identity suite: ok\n");
    return 0;
}

// ---------------------------------------------------------------------------
// psi chain
// ---------------------------------------------------------------------------

struct PsiArgs {
    std::string config;
    bool emit_config = false;
};

int run_psi(const PsiArgs& a) {
    const BmcSpec spec = load_bmc_spec(a.config);
    if (a.emit_config) {
        std::cout << emit_bmc_spec(spec);
        return 0;
    }
    const FiniteChain chain = spec.cluster_chain();
    const std::size_t psi = capital_psi(chain);
    const std::size_t tmix = mixing_time(chain);
    const std::size_t bound = psipi_bound(chain);
    std::printf("Psi %zu\nt_mix %zu\npsipi_bound %zu\n", psi, tmix, bound);
    if (psi > bound) throw VerificationFailure("capital_psi exceeds its mixing-time bound");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"free-probability leading-order terms and matrix concentration bounds"};
    app.require_subcommand(1);

    SimulateArgs sim;
    BoundArgs bnd;
    DensityArgs den;
    MlimitArgs mli;
    GraphArgs gra;
    WignerArgs wig;
    CumulantArgs cum;
    PsiArgs psi;
    int which = 0;

    CLI::App* bmc = app.add_subcommand("bmc", "block Markov chain model");
    bmc->require_subcommand(1);
    {
        CLI::App* c = bmc->add_subcommand("simulate", "sample paths and spectra");
        c->add_option("--config", sim.config, "BmcSpec JSON file")->required();
        c->add_option("--trials", sim.trials, "number of trials");
        c->add_option("--seed", sim.seed, "base seed");
        c->add_option("--out", sim.out, "CSV output path")->required();
        c->add_option("--singular-values", sim.singular_values, "emit top k singular values");
        c->add_option("--moments", sim.moments, "emit tracial moments up to this order");
        c->add_option("--histogram", sim.histogram_path, "pooled singular-value histogram CSV");
        c->add_option("--report", sim.report_path, "JSON report with parameters, bounds, KS");
        c->add_option("--threads", sim.threads, "worker threads (0 = auto)");
        c->add_flag("--emit-config", sim.emit_config, "reprint the parsed, normalized spec");
        c->callback([&] { which = 1; });
    }
    {
        CLI::App* c = bmc->add_subcommand("bound", "explicit concentration bound report");
        c->add_option("--config", bnd.config, "BmcSpec JSON file")->required();
        c->add_option("--p-max", bnd.p_max, "largest moment order in the threshold curve");
        c->add_option("--out", bnd.out, "JSON output path")->required();
        c->add_flag("--emit-config", bnd.emit_config, "reprint the parsed, normalized spec");
        c->callback([&] { which = 2; });
    }
    {
        CLI::App* c = bmc->add_subcommand("density", "limiting singular-value density");
        c->add_option("--config", den.config, "BmcSpec JSON file")->required();
        c->add_option("--grid-min", den.grid_min, "left end of the grid");
        c->add_option("--grid-max", den.grid_max, "right end of the grid");
        c->add_option("--points", den.points, "grid points");
        c->add_option("--epsilon", den.epsilon, "Stieltjes smoothing parameter");
        c->add_option("--out", den.out, "CSV output path")->required();
        c->add_flag("--emit-config", den.emit_config, "reprint the parsed, normalized spec");
        c->callback([&] { which = 3; });
    }
    {
        CLI::App* c = bmc->add_subcommand("mlimit", "limiting operator norm");
        c->add_option("--config", mli.config, "BmcSpec JSON file")->required();
        c->add_flag("--emit-config", mli.emit_config, "reprint the parsed, normalized spec");
        c->callback([&] { which = 4; });
    }

    CLI::App* graph = app.add_subcommand("graph", "G(d,m) random graph model");
    graph->require_subcommand(1);
    {
        CLI::App* c = graph->add_subcommand("semicircle", "semicircle moment check");
        c->add_option("--d", gra.d, "node count")->required();
        c->add_option("--m", gra.m, "edge count")->required();
        c->add_option("--trials", gra.trials, "number of trials");
        c->add_option("--seed", gra.seed, "base seed");
        c->add_option("--threads", gra.threads, "worker threads (0 = auto)");
        c->add_option("--out", gra.out, "CSV output path")->required();
        c->add_flag("--emit-config", gra.emit_config, "print the normalized parameters");
        c->callback([&] { which = 5; });
    }

    CLI::App* wigner = app.add_subcommand("wigner", "sub-Weibull Wigner model");
    wigner->require_subcommand(1);
    {
        CLI::App* c = wigner->add_subcommand("baiyin", "norm concentration at the Bai-Yin edge");
        c->add_option("--d", wig.d, "dimension")->required();
        c->add_option("--theta", wig.theta, "sub-Weibull tail parameter");
        c->add_option("--scale", wig.scale, "sub-Weibull scale L");
        c->add_option("--delta", wig.delta, "tail parameter delta");
        c->add_option("--x", wig.x, "tail parameter x");
        c->add_option("--cprime", wig.cprime, "opaque constant c' (no silent default scale)")
            ->required();
        c->add_option("--trials", wig.trials, "number of trials");
        c->add_option("--seed", wig.seed, "base seed");
        c->add_option("--threads", wig.threads, "worker threads (0 = auto)");
        c->add_option("--out", wig.out, "CSV output path")->required();
        c->add_flag("--emit-config", wig.emit_config, "print the normalized parameters");
        c->callback([&] { which = 6; });
    }

    CLI::App* cumulant = app.add_subcommand("cumulant", "cumulant identity suites");
    cumulant->require_subcommand(1);
    {
        CLI::App* c = cumulant->add_subcommand("verify", "classical/Boolean identity suite");
        c->add_option("--kmax", cum.kmax, "largest cumulant order");
        c->add_option("--oracles", cum.oracles, "random oracles per order");
        c->add_option("--seed", cum.seed, "base seed");
        c->callback([&] { which = 7; });
    }

    CLI::App* psiapp = app.add_subcommand("psi", "dependence coefficients");
    psiapp->require_subcommand(1);
    {
        CLI::App* c = psiapp->add_subcommand("chain", "Psi, t_mix and the mixing-time bound");
        c->add_option("--config", psi.config, "BmcSpec JSON file")->required();
        c->add_flag("--emit-config", psi.emit_config, "reprint the parsed, normalized spec");
        c->callback([&] { which = 8; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        switch (which) {
            case 1: return run_simulate(sim);
            case 2: return run_bound(bnd);
            case 3: return run_density(den);
            case 4: return run_mlimit(mli);
            case 5: return run_graph(gra);
            case 6: return run_wigner(wig);
            case 7: return run_cumulant_verify(cum);
            case 8: return run_psi(psi);
            default: return 2;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const VerificationFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

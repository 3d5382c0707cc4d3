#include "nltf/nonlinear.hpp"

#include <cmath>

#include "testkit.hpp"

#ifdef NLTF_HAVE_OPENMP
#include <omp.h>
#endif

using namespace nltf;

namespace {

SymbolicSystem full_shift(int m) {
    std::vector<std::vector<int>> t(m, std::vector<int>(m, 1));
    return SymbolicSystem(m, t);
}

PotentialFamily pm1_family() {
    SymbolicSystem sys = full_shift(2);
    return PotentialFamily(sys, {Potential::from_map(sys, 1, {{{0}, -1.0}, {{1}, 1.0}})});
}

// two-dimensional family with full-dimensional rotation set:
// phi1(w) = w0 in {-1,1}, phi2(w) = w0*w1 in {-1,1}
PotentialFamily two_dim_family() {
    SymbolicSystem sys = full_shift(2);
    Potential a = Potential::from_map(sys, 1, {{{0}, -1.0}, {{1}, 1.0}});
    Potential b = Potential::from_map(sys, 2, {{{0, 0}, 1.0}, {{0, 1}, -1.0}, {{1, 0}, -1.0}, {{1, 1}, 1.0}});
    return PotentialFamily(sys, {a, b});
}

PotentialFamily indicator3_family() {
    SymbolicSystem sys = full_shift(3);
    return PotentialFamily(sys, {Potential::from_map(sys, 1, {{{0}, 1.0}, {{1}, 0.0}, {{2}, 0.0}}),
                                 Potential::from_map(sys, 1, {{{0}, 0.0}, {{1}, 0.0}, {{2}, 1.0}})});
}

// independent oracle for full-shift depth-1 families: the word sum counts
// multiplicities with binomial coefficients
double binomial_oracle_pm1(int n, const FExpr& f, std::span<const double> params) {
    double best = -1e300;
    std::vector<double> terms;
    for (int k = 0; k <= n; ++k) {
        double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
        double z[1] = {(2.0 * k - n) / n};
        double t = lc + n * f.eval(FEvalContext{std::span<const double>(z, 1), params, {}});
        terms.push_back(t);
        best = std::max(best, t);
    }
    double s = 0.0;
    for (double t : terms) s += std::exp(t - best);
    return (best + std::log(s)) / n;
}

double spec_entropy(double z) {
    if (std::abs(z) >= 1.0) return 0.0;
    double a = (1 - z) / 2, b = (1 + z) / 2;
    return -a * std::log(a) - b * std::log(b);
}

void test_direct_constant_and_linear() {
    PotentialFamily fam = pm1_family();
    NonlinearOptions opts;

    FExpr fconst = FExpr::parse("0.37", 1, {});
    DirectEstimate d = direct_estimate(fam, fconst, {}, 10, opts);
    for (const auto& rec : d.records) CHECK_CLOSE(rec.value, std::log(2.0) + 0.37, 1e-12);

    FExpr flin = FExpr::parse("z1", 1, {});
    DirectEstimate dl = direct_estimate(fam, flin, {}, 12, opts);
    for (const auto& rec : dl.records) CHECK_CLOSE(rec.value, std::log(2.0 * std::cosh(1.0)), 1e-12);
    CHECK(dl.drift <= 1e-12);
}

void test_direct_oracle_and_kernels() {
    PotentialFamily fam = pm1_family();
    FExpr f = FExpr::parse("alpha/(z1^2 - 2)", 1, {"alpha"});
    std::vector<double> params{1.0};

    NonlinearOptions serial;
    serial.parallel = false;
    NonlinearOptions blocked;
    blocked.parallel = true;

    DirectEstimate ds = direct_estimate(fam, f, params, 14, serial);
    DirectEstimate db = direct_estimate(fam, f, params, 14, blocked);
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        int n = ds.records[i].n;
        double oracle = binomial_oracle_pm1(n, f, params);
        CHECK_CLOSE(ds.records[i].value, oracle, 1e-10);
        CHECK_CLOSE(db.records[i].value, ds.records[i].value, 1e-12);
    }

    // drift decreases over the last steps
    for (std::size_t i = ds.records.size() - 4; i + 1 < ds.records.size(); ++i) {
        double d1 = std::abs(ds.records[i].value - ds.records[i - 1].value);
        double d2 = std::abs(ds.records[i + 1].value - ds.records[i].value);
        CHECK(d2 <= d1 + 1e-12);
    }

#ifdef NLTF_HAVE_OPENMP
    // blocked kernel is bitwise stable across thread counts
    WordSumSpec spec{&fam, &f, params, 12, 2.718281828459045235};
    int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    double one = word_log_sum_blocked(spec);
    omp_set_num_threads(std::max(2, saved));
    double many = word_log_sum_blocked(spec);
    omp_set_num_threads(saved);
    CHECK(one == many);
#endif

    Caps tight;
    tight.words = 100;
    NonlinearOptions capped;
    capped.caps = tight;
    CHECK_THROWS_KIND(direct_estimate(fam, f, params, 14, capped), ErrorKind::Cap);
}

void test_variational() {
    PotentialFamily fam = pm1_family();
    Depth1Family d1 = to_depth1(fam);
    RotationSet rs = rotation_set(d1);
    NonlinearOptions opts;
    opts.resolution = 201;

    FExpr fzero = FExpr::parse("0", 1, {});
    CHECK_CLOSE(variational_value(d1, rs, fzero, {}, opts), std::log(2.0), 1e-10);

    FExpr f = FExpr::parse("alpha/(z1^2 - 2)", 1, {"alpha"});
    CHECK_CLOSE(variational_value(d1, rs, f, std::vector<double>{1.0}, opts), std::log(2.0) - 0.5, 1e-9);
    CHECK_CLOSE(variational_value(d1, rs, f, std::vector<double>{-1.0}, opts), std::log(2.0) + 0.5, 1e-9);
    // frozen from the closed-form scan oracle
    CHECK_CLOSE(variational_value(d1, rs, f, std::vector<double>{-1.7}, opts), 1.7011584970, 1e-6);

    // C-infinity bump in natural log peaks near 0.855
    FExpr fc = FExpr::parse(fexpr_preset("cinf_bump", 1).source, 1, {});
    CHECK_CLOSE(variational_value(d1, rs, fc, {}, opts), 1.19154025, 1e-4);

    // domain errors surface with the failing z location
    FExpr flog = FExpr::parse("log(z1)", 1, {});
    try {
        variational_value(d1, rs, flog, {}, opts);
        CHECK_MSG(false, "expected a domain error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Domain);
        CHECK(std::string(e.what()).find("at z =") != std::string::npos);
    }
}

void test_maximizer_counts() {
    PotentialFamily fam = pm1_family();
    Depth1Family d1 = to_depth1(fam);
    RotationSet rs = rotation_set(d1);
    NonlinearOptions opts;
    opts.resolution = 201;
    FExpr f = FExpr::parse("alpha/(z1^2 - 2)", 1, {"alpha"});

    EquilibriumReport r1 = find_maximizers(d1, rs, f, std::vector<double>{1.0}, opts);
    CHECK(r1.count == 1);
    CHECK_CLOSE(r1.maximizers[0].z[0], 0.0, 1e-6);
    CHECK(r1.maximizers[0].interior);
    CHECK(r1.measures.size() == 1);

    EquilibriumReport rm1 = find_maximizers(d1, rs, f, std::vector<double>{-1.0}, opts);
    CHECK(rm1.count == 1);
    CHECK_CLOSE(rm1.maximizers[0].z[0], 0.0, 1e-6);

    EquilibriumReport rm17 = find_maximizers(d1, rs, f, std::vector<double>{-1.7}, opts);
    CHECK(rm17.count == 2);
    if (rm17.count == 2) {
        CHECK_CLOSE(rm17.maximizers[0].z[0] + rm17.maximizers[1].z[0], 0.0, 1e-6);
        CHECK_CLOSE(std::abs(rm17.maximizers[0].z[0]), 0.99758658, 1e-5);
        CHECK_CLOSE(rm17.maximizers[0].E, 1.7011584970, 1e-6);
        CHECK(rm17.maximizers[0].interior);
        CHECK(rm17.measures.size() == 2);
    }
}

void test_equilibrium_measures() {
    PotentialFamily fam = pm1_family();
    Depth1Family d1 = to_depth1(fam);
    RotationSet rs = rotation_set(d1);
    NonlinearOptions opts;

    auto [psi0, mu0] = equilibrium_measure(d1, rs, std::vector<double>{0.0}, opts);
    CHECK_CLOSE(mu0.stationary[0], 0.5, 1e-12);
    CHECK_CLOSE(psi0.q[0], 0.0, 1e-10);
    CHECK_CLOSE(psi0.h_z, std::log(2.0), 1e-12);

    double zt = std::tanh(1.0);
    auto [psi1, mu1] = equilibrium_measure(d1, rs, std::vector<double>{zt}, opts);
    CHECK_CLOSE(psi1.q[0], 1.0, 1e-8);
    CHECK_CLOSE(mu1.stationary[1], std::exp(1.0) / (std::exp(1.0) + std::exp(-1.0)), 1e-9);

    // psi potential has zero pressure by construction
    double p_psi = classical_pressure(transfer_matrix(d1.block.sys, psi1.state_values));
    CHECK_CLOSE(p_psi, 0.0, 1e-8);

    PotentialFamily tri = indicator3_family();
    Depth1Family td1 = to_depth1(tri);
    RotationSet trs = rotation_set(td1);
    auto [psit, mut] = equilibrium_measure(td1, trs, std::vector<double>{1.0 / 3, 1.0 / 3}, opts);
    for (int s = 0; s < 3; ++s) CHECK_CLOSE(mut.stationary[s], 1.0 / 3, 1e-10);

    CHECK_THROWS_KIND(equilibrium_measure(d1, rs, std::vector<double>{1.0}, opts), ErrorKind::Domain);
    CHECK_THROWS_KIND(equilibrium_measure(d1, rs, std::vector<double>{1.5}, opts), ErrorKind::Domain);
}

void test_convex_lower_bound() {
    // h_mu + F(int Phi dmu) <= P_F for convex F over random Markov measures
    PotentialFamily tri = indicator3_family();
    Depth1Family d1 = to_depth1(tri);
    RotationSet rs = rotation_set(d1);
    NonlinearOptions opts;
    opts.resolution = 61;
    FExpr f = FExpr::parse(fexpr_preset("beta_quadratic", 2).source, 2, {"beta"});
    std::vector<double> params{1.0};
    double vv = variational_value(d1, rs, f, params, opts);

    std::mt19937 rng(808);
    const SymbolicSystem& sys = d1.block.sys;
    int m = sys.alphabet_size();
    std::uniform_real_distribution<double> unif(0.05, 1.0);
    for (int t = 0; t < 100; ++t) {
        GibbsMarkovMeasure mu;
        mu.size = m;
        mu.stochastic.assign(static_cast<std::size_t>(m) * m, 0.0);
        for (int i = 0; i < m; ++i) {
            double row = 0.0;
            for (int j = 0; j < m; ++j) {
                double w = unif(rng);
                mu.stochastic[static_cast<std::size_t>(i) * m + j] = w;
                row += w;
            }
            for (int j = 0; j < m; ++j) mu.stochastic[static_cast<std::size_t>(i) * m + j] /= row;
        }
        mu.stationary.assign(m, 1.0 / m);
        std::vector<double> next(m);
        for (int it = 0; it < 500; ++it) {
            for (int j = 0; j < m; ++j) {
                double s = 0.0;
                for (int i = 0; i < m; ++i)
                    s += mu.stationary[i] * mu.stochastic[static_cast<std::size_t>(i) * m + j];
                next[j] = s;
            }
            mu.stationary.swap(next);
        }
        std::vector<double> zi = measure_integral(mu, d1);
        double lhs = measure_entropy(mu) + f.eval(FEvalContext{zi, params, {}});
        CHECK(lhs <= vv + 1e-8);
    }
}

void test_linear_reduction() {
    // F(z) = f(<a, z>) compared against the reduced one-dimensional pipeline
    PotentialFamily fam2 = two_dim_family();
    Depth1Family d2 = to_depth1(fam2);
    RotationSet rs2 = rotation_set(d2);
    NonlinearOptions opts2;
    opts2.resolution = 61;
    FExpr f2 = FExpr::parse("(z1 + 0.5*z2)^2/4", 2, {});
    double full = variational_value(d2, rs2, f2, {}, opts2);

    const SymbolicSystem sys = fam2.system();
    Potential combined = add(sys, fam2.component(0), fam2.component(1).scaled(0.5));
    PotentialFamily fam1(sys, {combined});
    Depth1Family d1 = to_depth1(fam1);
    RotationSet rs1 = rotation_set(d1);
    NonlinearOptions opts1;
    opts1.resolution = 201;
    FExpr f1 = FExpr::parse("z1^2/4", 1, {});
    double reduced = variational_value(d1, rs1, f1, {}, opts1);

    CHECK_CLOSE(full, reduced, 1e-8);
}

void test_cohomology_reduction() {
    // phi2 = phi1 + g(Tx) - g(x); F(z1,z2) = cube root of z1^3 + z2^3
    SymbolicSystem sys = full_shift(2);
    Potential phi1 = Potential::from_map(sys, 1, {{{0}, -1.0}, {{1}, 1.0}});
    Potential g = Potential::from_map(sys, 1, {{{0}, 0.15}, {{1}, -0.1}});
    Potential phi2 = add(sys, phi1, coboundary(sys, g));
    PotentialFamily fam(sys, {phi1, phi2});
    Depth1Family d1 = to_depth1(fam);
    RotationSet rs = rotation_set(d1);
    CHECK(rs.kind == RotationSet::Kind::Segment);

    std::string cbrt_src = "cond(z1^3 + z2^3 >= 0, (z1^3 + z2^3)^(1/3), -(-(z1^3 + z2^3))^(1/3))";
    FExpr f = FExpr::parse(cbrt_src, 2, {});
    NonlinearOptions opts;
    opts.resolution = 201;
    double vv = variational_value(d1, rs, f, {}, opts);
    double classical = std::log(2.0 * std::cosh(std::pow(2.0, 1.0 / 3.0)));
    CHECK_CLOSE(vv, classical, 1e-6);

    // direct estimate closes in at n = 18
    FExpr fdup = FExpr::parse(cbrt_src, 2, {});
    DirectEstimate de = direct_estimate(fam, fdup, {}, 18, opts);
    CHECK_MSG(std::abs(de.records.back().value - classical) <= 2e-2,
              "direct gap " + std::to_string(std::abs(de.records.back().value - classical)));
}

void test_nonisolated_maximizers() {
    PotentialFamily fam2 = two_dim_family();
    Depth1Family d1 = to_depth1(fam2);
    RotationSet rs = rotation_set(d1);
    NonlinearOptions opts;
    opts.resolution = 41;
    FExpr f = FExpr::parse(fexpr_preset("neg_h_quartic", 2).source, 2, {});
    EquilibriumReport report = find_maximizers(d1, rs, f, {}, opts);
    CHECK(report.count == -1);
    CHECK(report.tied_locus.size() >= 10);
    CHECK_CLOSE(report.variational_value, 0.0, 1e-9);
}

void test_uniqueness_probe() {
    PotentialFamily fam = pm1_family();
    Depth1Family d1 = to_depth1(fam);
    RotationSet rs = rotation_set(d1);
    NonlinearOptions opts;
    opts.resolution = 101;
    FExpr f = FExpr::parse("alpha/(z1^2 - 2)", 1, {"alpha"});

    UniquenessProbe p1 = uniqueness_probe(d1, rs, f, std::vector<double>{1.0}, opts);
    CHECK(p1.f_concave);
    CHECK(p1.interior_exceeds_boundary);
    CHECK(p1.predicts_unique);
    CHECK(p1.maximizer_count == 1);

    PotentialFamily tri = indicator3_family();
    Depth1Family td1 = to_depth1(tri);
    RotationSet trs = rotation_set(td1);
    NonlinearOptions topts;
    topts.resolution = 41;
    FExpr fq = FExpr::parse(fexpr_preset("beta_quadratic", 2).source, 2, {"beta"});

    UniquenessProbe pneg = uniqueness_probe(td1, trs, fq, std::vector<double>{-1.0}, topts);
    CHECK(pneg.f_concave);
    CHECK(pneg.predicts_unique);
    CHECK(pneg.maximizer_count == 1);

    UniquenessProbe ppos = uniqueness_probe(td1, trs, fq, std::vector<double>{1.0}, topts);
    CHECK(!ppos.f_concave);
    CHECK(ppos.interior_exceeds_boundary);
    CHECK(!ppos.predicts_unique);
    CHECK(ppos.maximizer_count >= 1);
}

} // namespace

int main() {
    test_direct_constant_and_linear();
    test_direct_oracle_and_kernels();
    test_variational();
    test_maximizer_counts();
    test_equilibrium_measures();
    test_convex_lower_bound();
    test_linear_reduction();
    test_cohomology_reduction();
    test_nonisolated_maximizers();
    test_uniqueness_probe();
    return testkit::summary("test_nonlinear");
}

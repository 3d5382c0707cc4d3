#include "nltf/nonlinear.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

namespace nltf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string point_to_string(std::span<const double> z) {
    std::string s = "(";
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(z[i]);
    }
    return s + ")";
}

} // namespace

DirectEstimate direct_estimate(const PotentialFamily& fam, const FExpr& f, std::span<const double> params,
                               int n_max, const NonlinearOptions& opts) {
    if (n_max < 2) fail_config("direct estimate needs n_max >= 2");
    if (f.dim() != fam.dim()) fail_config("expression dimension does not match potential family");
    // fail fast if the largest enumeration is over the cap
    int longest = n_max + fam.depth() - 1;
    long long total = fam.system().word_count(longest);
    if (total > opts.caps.words)
        fail_cap("word sum over " + std::to_string(total) + " words at n = " + std::to_string(n_max) +
                 " exceeds cap " + std::to_string(opts.caps.words));

    DirectEstimate out;
    out.records.reserve(n_max - 1);
    for (int n = 2; n <= n_max; ++n) {
        WordSumSpec spec{&fam, &f, params, n, opts.log_base};
        double lse = opts.parallel ? word_log_sum_blocked(spec, opts.caps) : word_log_sum_serial(spec, opts.caps);
        out.records.push_back({n, lse / (static_cast<double>(n) * std::log(opts.log_base))});
    }
    std::size_t r = out.records.size();
    out.drift = r >= 2 ? std::abs(out.records[r - 1].value - out.records[r - 2].value) : 0.0;
    return out;
}

EnergyEvaluator::EnergyEvaluator(const Depth1Family& fam, const RotationSet& rs, const FExpr& f,
                                 std::span<const double> params, const NonlinearOptions& opts)
    : fam_(fam), rs_(rs), f_(f), params_(params.begin(), params.end()), opts_(opts),
      scale_(1.0 / std::log(opts.log_base)) {
    if (f.dim() != fam.dim()) fail_config("expression dimension does not match potential family");
}

EnergyEvaluator::Value EnergyEvaluator::operator()(std::span<const double> z) const {
    SolveOptions solve = opts_.solve;
    if (!warm_q_.empty()) solve.warm_q = warm_q_;
    SpectrumPoint pt = entropy_at(fam_, rs_, z, solve);
    if (pt.converged) warm_q_ = pt.q;
    double h_scaled = pt.h * scale_;
    double fval;
    try {
        fval = f_.eval(FEvalContext{z, params_, h_scaled});
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Domain) throw;
        fail_domain(std::string(e.what()) + " at z = " + point_to_string(z));
    }
    Value v;
    v.E = h_scaled + fval;
    v.h = pt.h;
    v.q = pt.q;
    v.boundary = pt.boundary_flag;
    return v;
}

namespace {

// ---- grid sweep shared by the variational value and the maximizer search ----

struct GridEval {
    std::vector<std::vector<double>> z;
    std::vector<double> E;
    std::vector<int> ix, iy; // lattice coordinates for polygon grids
    double step1 = 0.0;
    double step2 = 0.0;
};

GridEval evaluate_grid(const EnergyEvaluator& energy, const Depth1Family& fam, const RotationSet& rs,
                       const FExpr& f, std::span<const double> params, const NonlinearOptions& opts) {
    GridEval out;
    int res = opts.resolution;
    if (res < 2) fail_config("grid resolution must be >= 2");
    std::vector<SpectrumPoint> pts = spectrum_grid(fam, rs, res, opts.solve);
    double scale = energy.log_scale();
    out.z.reserve(pts.size());
    out.E.reserve(pts.size());
    for (const SpectrumPoint& p : pts) {
        double h_scaled = p.h * scale;
        double fval;
        try {
            fval = f.eval(FEvalContext{p.z, params, h_scaled});
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Domain) throw;
            fail_domain(std::string(e.what()) + " at z = " + point_to_string(p.z));
        }
        out.z.push_back(p.z);
        out.E.push_back(h_scaled + fval);
    }
    if (rs.dim == 1) {
        out.step1 = (rs.hi - rs.lo) / (res - 1);
    } else if (rs.kind == RotationSet::Kind::Segment) {
        double dx = rs.vertices[1][0] - rs.vertices[0][0];
        double dy = rs.vertices[1][1] - rs.vertices[0][1];
        out.step1 = std::sqrt(dx * dx + dy * dy) / (res - 1);
    } else if (rs.kind == RotationSet::Kind::Polygon) {
        double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
        for (const auto& v : rs.vertices) {
            x0 = std::min(x0, v[0]);
            x1 = std::max(x1, v[0]);
            y0 = std::min(y0, v[1]);
            y1 = std::max(y1, v[1]);
        }
        out.step1 = (x1 - x0) / (res - 1);
        out.step2 = (y1 - y0) / (res - 1);
        out.ix.reserve(out.z.size());
        out.iy.reserve(out.z.size());
        for (const auto& zz : out.z) {
            out.ix.push_back(static_cast<int>(std::lround((zz[0] - x0) / out.step1)));
            out.iy.push_back(static_cast<int>(std::lround((zz[1] - y0) / out.step2)));
        }
    }
    return out;
}

// golden-section maximization, tolerance on z
template <typename Fn>
std::pair<double, double> golden_max(Fn&& f, double a, double b, double tol) {
    const double invphi = 0.6180339887498949;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    double mid = 0.5 * (a + b);
    return {mid, f(mid)};
}

// Nelder-Mead maximization restricted to the rotation set.
template <typename Fn>
std::pair<std::vector<double>, double> nelder_mead_max(Fn&& f, const RotationSet& rs, std::vector<double> start,
                                                       double scale, double tol) {
    auto value = [&](const std::vector<double>& p) -> double {
        if (hull_gap(rs, p) > 1e-9) return -kInf;
        return f(p);
    };
    std::vector<std::vector<double>> simplex{start};
    for (int i = 0; i < 2; ++i) {
        std::vector<double> p = start;
        p[i] += scale;
        if (hull_gap(rs, p) > 1e-9) p[i] = start[i] - scale;
        simplex.push_back(p);
    }
    std::array<double, 3> fv{};
    for (int i = 0; i < 3; ++i) fv[i] = value(simplex[i]);
    for (int it = 0; it < 400; ++it) {
        std::array<int, 3> idx{0, 1, 2};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] > fv[b]; });
        std::vector<std::vector<double>> sx{simplex[idx[0]], simplex[idx[1]], simplex[idx[2]]};
        std::array<double, 3> sf{fv[idx[0]], fv[idx[1]], fv[idx[2]]};
        simplex = sx;
        fv = sf;
        double diam = 0.0;
        for (int i = 1; i < 3; ++i)
            for (int c = 0; c < 2; ++c) diam = std::max(diam, std::abs(simplex[i][c] - simplex[0][c]));
        if (diam <= tol) break;
        std::vector<double> centroid(2, 0.0);
        for (int i = 0; i < 2; ++i)
            for (int c = 0; c < 2; ++c) centroid[c] += simplex[i][c] / 2.0;
        auto blend = [&](double t) {
            std::vector<double> p(2);
            for (int c = 0; c < 2; ++c) p[c] = centroid[c] + t * (centroid[c] - simplex[2][c]);
            return p;
        };
        std::vector<double> refl = blend(1.0);
        double fr = value(refl);
        if (fr > fv[0]) {
            std::vector<double> expanded = blend(2.0);
            double fe = value(expanded);
            if (fe > fr) {
                simplex[2] = expanded;
                fv[2] = fe;
            } else {
                simplex[2] = refl;
                fv[2] = fr;
            }
        } else if (fr > fv[1]) {
            simplex[2] = refl;
            fv[2] = fr;
        } else {
            std::vector<double> contracted = blend(fr > fv[2] ? 0.5 : -0.5);
            double fc = value(contracted);
            if (fc > std::max(fr, fv[2])) {
                simplex[2] = contracted;
                fv[2] = fc;
            } else {
                for (int i = 1; i < 3; ++i) {
                    for (int c = 0; c < 2; ++c) simplex[i][c] = 0.5 * (simplex[i][c] + simplex[0][c]);
                    fv[i] = value(simplex[i]);
                }
            }
        }
    }
    int best = 0;
    for (int i = 1; i < 3; ++i)
        if (fv[i] > fv[best]) best = i;
    return {simplex[best], fv[best]};
}

struct Polished {
    std::vector<double> z;
    double E;
};

// Refine one grid candidate to z tolerance 1e-8.
Polished polish_candidate(const EnergyEvaluator& energy, const RotationSet& rs, const GridEval& grid,
                          std::size_t index) {
    const std::vector<double>& z0 = grid.z[index];
    if (rs.dim == 1) {
        double a = std::max(rs.lo, z0[0] - grid.step1);
        double b = std::min(rs.hi, z0[0] + grid.step1);
        auto [zm, Em] = golden_max(
            [&](double zz) {
                double p[1] = {zz};
                return energy(std::span<const double>(p, 1)).E;
            },
            a, b, 1e-8);
        return {{zm}, Em};
    }
    if (rs.kind == RotationSet::Kind::Segment) {
        const auto& va = rs.vertices[0];
        const auto& vb = rs.vertices[1];
        double len2 = (vb[0] - va[0]) * (vb[0] - va[0]) + (vb[1] - va[1]) * (vb[1] - va[1]);
        double len = std::sqrt(len2);
        double t0 = len2 > 0 ? ((z0[0] - va[0]) * (vb[0] - va[0]) + (z0[1] - va[1]) * (vb[1] - va[1])) / len2 : 0.0;
        double dt = grid.step1 / std::max(len, 1e-300);
        auto [tm, Em] = golden_max(
            [&](double t) {
                double p[2] = {va[0] + t * (vb[0] - va[0]), va[1] + t * (vb[1] - va[1])};
                return energy(std::span<const double>(p, 2)).E;
            },
            std::max(0.0, t0 - dt), std::min(1.0, t0 + dt), 1e-8);
        return {{va[0] + tm * (vb[0] - va[0]), va[1] + tm * (vb[1] - va[1])}, Em};
    }
    if (rs.kind == RotationSet::Kind::Point) return {z0, grid.E[index]};
    auto [zm, Em] = nelder_mead_max([&](const std::vector<double>& p) { return energy(p).E; }, rs, z0,
                                    std::max(grid.step1, grid.step2), 1e-8);
    return {zm, Em};
}

std::vector<std::size_t> grid_local_maxima(const GridEval& grid, const RotationSet& rs) {
    std::vector<std::size_t> out;
    std::size_t n = grid.E.size();
    if (rs.dim == 1 || rs.kind == RotationSet::Kind::Segment || rs.kind == RotationSet::Kind::Point) {
        for (std::size_t i = 0; i < n; ++i) {
            bool up = (i == 0 || grid.E[i] >= grid.E[i - 1]) && (i + 1 == n || grid.E[i] >= grid.E[i + 1]);
            if (up) out.push_back(i);
        }
        return out;
    }
    std::map<std::pair<int, int>, std::size_t> lattice;
    for (std::size_t i = 0; i < n; ++i) lattice[{grid.ix[i], grid.iy[i]}] = i;
    for (std::size_t i = 0; i < n; ++i) {
        bool top = true;
        static const int dx[4] = {1, -1, 0, 0};
        static const int dy[4] = {0, 0, 1, -1};
        for (int t = 0; t < 4 && top; ++t) {
            auto it = lattice.find({grid.ix[i] + dx[t], grid.iy[i] + dy[t]});
            if (it != lattice.end() && grid.E[it->second] > grid.E[i]) top = false;
        }
        if (top) out.push_back(i);
    }
    return out;
}

double cluster_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

} // namespace

double variational_value(const Depth1Family& fam, const RotationSet& rs, const FExpr& f,
                         std::span<const double> params, const NonlinearOptions& opts) {
    EnergyEvaluator energy(fam, rs, f, params, opts);
    GridEval grid = evaluate_grid(energy, fam, rs, f, params, opts);
    double best = -kInf;
    for (std::size_t i : grid_local_maxima(grid, rs)) {
        Polished p = polish_candidate(energy, rs, grid, i);
        best = std::max(best, p.E);
    }
    for (double e : grid.E) best = std::max(best, e);
    return best;
}

EquilibriumReport find_maximizers(const Depth1Family& fam, const RotationSet& rs, const FExpr& f,
                                  std::span<const double> params, const NonlinearOptions& opts) {
    EnergyEvaluator energy(fam, rs, f, params, opts);
    GridEval grid = evaluate_grid(energy, fam, rs, f, params, opts);
    EquilibriumReport report;

    double grid_max = *std::max_element(grid.E.begin(), grid.E.end());
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < grid.E.size(); ++i)
        if (grid.E[i] >= grid_max - opts.cluster_de) candidates.push_back(i);

    // Non-isolated maximizer sets: a maximizing continuum shows up as a large
    // tied fraction of the grid and cannot be enumerated.
    if (static_cast<int>(candidates.size()) >= opts.resolution / 4) {
        report.count = -1;
        report.variational_value = grid_max;
        for (std::size_t i : candidates) report.tied_locus.push_back(grid.z[i]);
        return report;
    }

    std::vector<Polished> polished;
    polished.reserve(candidates.size());
    for (std::size_t i : candidates) polished.push_back(polish_candidate(energy, rs, grid, i));
    // refine every grid-local maximum as well so the variational value cannot
    // hide between tied candidates
    double best = -kInf;
    for (std::size_t i : grid_local_maxima(grid, rs)) {
        Polished p = polish_candidate(energy, rs, grid, i);
        if (p.E > best) best = p.E;
        if (p.E >= grid_max - opts.cluster_de) polished.push_back(std::move(p));
    }
    for (const Polished& p : polished) best = std::max(best, p.E);
    report.variational_value = best;

    // keep polished points within the energy tie radius of the best
    std::vector<Polished> kept;
    for (const Polished& p : polished)
        if (p.E >= best - opts.cluster_de) kept.push_back(p);

    // greedy clustering with spatial radius cluster_dz
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        bool placed = false;
        for (auto& cl : clusters)
            if (cluster_distance(kept[cl.front()].z, kept[i].z) <= opts.cluster_dz) {
                cl.push_back(i);
                placed = true;
                break;
            }
        if (!placed) clusters.push_back({i});
    }

    for (const auto& cl : clusters) {
        std::size_t rep = cl.front();
        for (std::size_t i : cl)
            if (kept[i].E > kept[rep].E) rep = i;
        Maximizer m;
        m.z = kept[rep].z;
        m.E = kept[rep].E;
        m.interior = interior_margin(rs, m.z) > 1e-6;
        report.maximizers.push_back(std::move(m));
    }
    std::sort(report.maximizers.begin(), report.maximizers.end(),
              [](const Maximizer& a, const Maximizer& b) { return a.z < b.z; });
    report.count = static_cast<int>(report.maximizers.size());

    report.measure_index.assign(report.maximizers.size(), -1);
    for (std::size_t i = 0; i < report.maximizers.size(); ++i) {
        if (!report.maximizers[i].interior) continue;
        auto [psi, mu] = equilibrium_measure(fam, rs, report.maximizers[i].z, opts);
        SpectrumPoint pt;
        pt.z = report.maximizers[i].z;
        pt.q = psi.q;
        pt.h = psi.h_z;
        pt.boundary_flag = false;
        pt.converged = true;
        report.measure_index[i] = static_cast<int>(report.measures.size());
        report.psis.push_back(std::move(psi));
        report.measures.push_back(std::move(mu));
        report.measure_points.push_back(std::move(pt));
    }
    return report;
}

std::pair<PsiPotential, GibbsMarkovMeasure> equilibrium_measure(const Depth1Family& fam, const RotationSet& rs,
                                                                std::span<const double> z,
                                                                const NonlinearOptions& opts) {
    double gap = hull_gap(rs, z);
    if (gap > 1e-9) fail_domain("point is outside the rotation set by " + std::to_string(gap));
    if (interior_margin(rs, z) <= 1e-6)
        fail_domain("equilibrium measures at boundary points of the rotation set are unsupported");
    SpectrumPoint pt = entropy_at(fam, rs, z, opts.solve);
    if (!pt.converged)
        fail_numeric("dual solve did not converge at z = " + point_to_string(z));

    std::vector<double> phi = combine_depth1(fam, pt.q);
    GibbsMarkovMeasure mu = gibbs_measure(transfer_matrix(fam.block.sys, phi));

    PsiPotential psi;
    psi.q = pt.q;
    psi.z.assign(z.begin(), z.end());
    psi.h_z = pt.h;
    double qdotz = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) qdotz += pt.q[i] * z[i];
    psi.state_values = phi;
    for (double& v : psi.state_values) v -= qdotz + pt.h;

    // construction identities, checked as bug signals
    double p_psi = classical_pressure(transfer_matrix(fam.block.sys, psi.state_values));
    if (std::abs(p_psi) > 1e-8)
        fail_numeric("psi potential pressure " + std::to_string(p_psi) + " is not zero");
    std::vector<double> integral = measure_integral(mu, fam);
    for (std::size_t i = 0; i < z.size(); ++i)
        if (std::abs(integral[i] - z[i]) > 1e-7)
            fail_numeric("equilibrium measure integral misses z at component " + std::to_string(i));
    if (std::abs(measure_entropy(mu) - pt.h) > 1e-8)
        fail_numeric("equilibrium measure entropy does not match h(z)");
    return {std::move(psi), std::move(mu)};
}

UniquenessProbe uniqueness_probe(const Depth1Family& fam, const RotationSet& rs, const FExpr& f,
                                 std::span<const double> params, const NonlinearOptions& opts) {
    EnergyEvaluator energy(fam, rs, f, params, opts);
    GridEval grid = evaluate_grid(energy, fam, rs, f, params, opts);
    UniquenessProbe probe;

    double band = 1.5 * std::max(grid.step1, grid.step2);
    probe.interior_best = -kInf;
    probe.boundary_best = -kInf;
    std::vector<std::size_t> interior_samples;
    for (std::size_t i = 0; i < grid.z.size(); ++i) {
        double margin = interior_margin(rs, grid.z[i]);
        if (margin > band) {
            probe.interior_best = std::max(probe.interior_best, grid.E[i]);
            interior_samples.push_back(i);
        } else {
            probe.boundary_best = std::max(probe.boundary_best, grid.E[i]);
        }
    }
    probe.interior_exceeds_boundary = probe.interior_best > probe.boundary_best;

    // concavity of F on a spread of interior sample points
    const double hess_step = 1e-4;
    probe.f_concave = !interior_samples.empty();
    std::size_t stride = std::max<std::size_t>(1, interior_samples.size() / 16);
    double scale = energy.log_scale();
    for (std::size_t t = 0; t < interior_samples.size(); t += stride) {
        const std::vector<double>& z = grid.z[interior_samples[t]];
        double margin = interior_margin(rs, z);
        double max_step = hess_step * 2.5 * (1.0 + std::abs(z[0]) + (rs.dim > 1 ? std::abs(z[1]) : 0.0));
        if (margin < max_step) continue;
        auto f_at = [&](std::span<const double> zz) {
            EnergyEvaluator::Value v = energy(zz);
            return v.E - v.h * scale; // F alone, with h bound when referenced
        };
        int d = rs.dim;
        std::vector<double> base(z);
        std::vector<std::vector<double>> H(d, std::vector<double>(d, 0.0));
        double f0 = f_at(base);
        std::vector<double> steps(d);
        for (int i = 0; i < d; ++i) steps[i] = hess_step * (1.0 + std::abs(base[i]));
        for (int i = 0; i < d; ++i) {
            std::vector<double> zp = base, zm = base;
            zp[i] += steps[i];
            zm[i] -= steps[i];
            H[i][i] = (f_at(zp) - 2.0 * f0 + f_at(zm)) / (steps[i] * steps[i]);
        }
        if (d == 2) {
            std::vector<double> pp = base, pm = base, mp = base, mm = base;
            pp[0] += steps[0];
            pp[1] += steps[1];
            pm[0] += steps[0];
            pm[1] -= steps[1];
            mp[0] -= steps[0];
            mp[1] += steps[1];
            mm[0] -= steps[0];
            mm[1] -= steps[1];
            double v = (f_at(pp) - f_at(pm) - f_at(mp) + f_at(mm)) / (4.0 * steps[0] * steps[1]);
            H[0][1] = H[1][0] = v;
        }
        double max_eig;
        if (d == 1) {
            max_eig = H[0][0];
        } else {
            double tr2 = 0.5 * (H[0][0] + H[1][1]);
            double det = H[0][0] * H[1][1] - H[0][1] * H[1][0];
            max_eig = tr2 + std::sqrt(std::max(0.0, tr2 * tr2 - det));
        }
        if (max_eig > 1e-6) {
            probe.f_concave = false;
            break;
        }
    }

    probe.predicts_unique = probe.f_concave && probe.interior_exceeds_boundary;
    probe.maximizer_count = find_maximizers(fam, rs, f, params, opts).count;
    return probe;
}

std::vector<std::vector<double>> energy_hessian(const EnergyEvaluator& energy, std::span<const double> z,
                                                double step) {
    int d = static_cast<int>(z.size());
    std::vector<double> base(z.begin(), z.end());
    std::vector<double> steps(d);
    for (int i = 0; i < d; ++i) steps[i] = step * (1.0 + std::abs(base[i]));
    auto e_at = [&](const std::vector<double>& p) { return energy(p).E; };
    std::vector<std::vector<double>> H(d, std::vector<double>(d, 0.0));
    double e0 = e_at(base);
    for (int i = 0; i < d; ++i) {
        std::vector<double> zp = base, zm = base;
        zp[i] += steps[i];
        zm[i] -= steps[i];
        H[i][i] = (e_at(zp) - 2.0 * e0 + e_at(zm)) / (steps[i] * steps[i]);
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            std::vector<double> pp = base, pm = base, mp = base, mm = base;
            pp[i] += steps[i];
            pp[j] += steps[j];
            pm[i] += steps[i];
            pm[j] -= steps[j];
            mp[i] -= steps[i];
            mp[j] += steps[j];
            mm[i] -= steps[i];
            mm[j] -= steps[j];
            double v = (e_at(pp) - e_at(pm) - e_at(mp) + e_at(mm)) / (4.0 * steps[i] * steps[j]);
            H[i][j] = v;
            H[j][i] = v;
        }
    return H;
}

} // namespace nltf

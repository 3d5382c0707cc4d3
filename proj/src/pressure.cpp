#include "nltf/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nltf {

TransferMatrix transfer_matrix(const SymbolicSystem& sys, std::span<const double> phi) {
    int m = sys.alphabet_size();
    if (static_cast<int>(phi.size()) != m) fail_config("transfer_matrix potential size does not match alphabet");
    TransferMatrix tm;
    tm.size = m;
    tm.log_shift = *std::max_element(phi.begin(), phi.end());
    tm.entries.assign(static_cast<std::size_t>(m) * m, 0.0);
    for (int j = 0; j < m; ++j) {
        double w = std::exp(phi[j] - tm.log_shift);
        for (int i = 0; i < m; ++i)
            if (sys.allowed(i, j)) tm.entries[static_cast<std::size_t>(i) * m + j] = w;
    }
    return tm;
}

namespace {

// One-sided power iteration on M (or M^T); v normalized to sum 1 each step,
// the step norm converges to the Perron eigenvalue of the shifted matrix.
double power_iterate(const std::vector<double>& entries, int n, bool transpose, std::vector<double>& v,
                     int& iterations) {
    v.assign(n, 1.0 / n);
    std::vector<double> w(n, 0.0);
    double lambda = 0.0;
    const int max_iter = 100000;
    for (int it = 1; it <= max_iter; ++it) {
        double norm = 0.0;
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            if (transpose)
                for (int j = 0; j < n; ++j) s += entries[static_cast<std::size_t>(j) * n + i] * v[j];
            else
                for (int j = 0; j < n; ++j) s += entries[static_cast<std::size_t>(i) * n + j] * v[j];
            w[i] = s;
            norm += s;
        }
        if (!(norm > 0.0) || !std::isfinite(norm))
            fail_numeric("power iteration degenerated (non-positive step norm)");
        double delta = 0.0;
        for (int i = 0; i < n; ++i) {
            w[i] /= norm;
            delta = std::max(delta, std::abs(w[i] - v[i]));
        }
        double prev = lambda;
        lambda = norm;
        v.swap(w);
        iterations = it;
        if (it > 1 && std::abs(lambda - prev) <= 1e-13 * std::abs(lambda) && delta <= 1e-13) return lambda;
    }
    fail_numeric("power iteration did not converge within 100000 iterations");
}

} // namespace

PerronData perron(const TransferMatrix& tm) {
    PerronData out;
    int iters_r = 0, iters_l = 0;
    double lr = power_iterate(tm.entries, tm.size, false, out.right, iters_r);
    double ll = power_iterate(tm.entries, tm.size, true, out.left, iters_l);
    out.iterations = std::max(iters_r, iters_l);
    // the two estimates agree to tolerance; use their mean in log space
    out.log_eigenvalue = tm.log_shift + 0.5 * (std::log(lr) + std::log(ll));
    return out;
}

double classical_pressure(const TransferMatrix& tm) { return perron(tm).log_eigenvalue; }

GibbsMarkovMeasure gibbs_measure(const TransferMatrix& tm) {
    PerronData pd = perron(tm);
    int n = tm.size;
    double lambda = std::exp(pd.log_eigenvalue - tm.log_shift);
    GibbsMarkovMeasure mu;
    mu.size = n;
    mu.log_pressure = pd.log_eigenvalue;
    mu.stochastic.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) {
            double p = tm.entries[static_cast<std::size_t>(i) * n + j] * pd.right[j] / (lambda * pd.right[i]);
            mu.stochastic[static_cast<std::size_t>(i) * n + j] = p;
            row += p;
        }
        // renormalize the numerical residue so rows sum to 1 exactly within
        // 1e-12 even after long power iterations
        for (int j = 0; j < n; ++j) mu.stochastic[static_cast<std::size_t>(i) * n + j] /= row;
    }
    mu.stationary.assign(n, 0.0);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        mu.stationary[i] = pd.left[i] * pd.right[i];
        total += mu.stationary[i];
    }
    for (int i = 0; i < n; ++i) mu.stationary[i] /= total;

    // refine stationarity: a few fixed-point sweeps pi <- pi P remove the
    // leftover from the two independent eigenvector iterations
    std::vector<double> next(n, 0.0);
    for (int sweep = 0; sweep < 64; ++sweep) {
        double diff = 0.0, norm = 0.0;
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += mu.stationary[i] * mu.stochastic[static_cast<std::size_t>(i) * n + j];
            next[j] = s;
            norm += s;
        }
        for (int j = 0; j < n; ++j) {
            next[j] /= norm;
            diff = std::max(diff, std::abs(next[j] - mu.stationary[j]));
        }
        mu.stationary.swap(next);
        if (diff <= 1e-16) break;
    }
    for (double p : mu.stationary)
        if (!(p > 0.0)) fail_numeric("gibbs measure produced a non-positive stationary weight");
    return mu;
}

double measure_entropy(const GibbsMarkovMeasure& mu) {
    int n = mu.size;
    double h = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double p = mu.stochastic[static_cast<std::size_t>(i) * n + j];
            if (p > 0.0) h -= mu.stationary[i] * p * std::log(p);
        }
    return h;
}

std::vector<double> measure_integral(const GibbsMarkovMeasure& mu, const Depth1Family& fam) {
    if (fam.block.sys.alphabet_size() != mu.size)
        fail_config("measure state space (" + std::to_string(mu.size) + ") does not match family block states (" +
                    std::to_string(fam.block.sys.alphabet_size()) + ")");
    std::vector<double> out(fam.dim(), 0.0);
    for (int c = 0; c < fam.dim(); ++c)
        for (int i = 0; i < mu.size; ++i) out[c] += mu.stationary[i] * fam.values[c][i];
    return out;
}

double pressure_value(const Depth1Family& fam, std::span<const double> q) {
    std::vector<double> phi = combine_depth1(fam, q);
    return classical_pressure(transfer_matrix(fam.block.sys, phi));
}

std::vector<double> pressure_gradient(const Depth1Family& fam, std::span<const double> q) {
    std::vector<double> phi = combine_depth1(fam, q);
    GibbsMarkovMeasure mu = gibbs_measure(transfer_matrix(fam.block.sys, phi));
    return measure_integral(mu, fam);
}

} // namespace nltf

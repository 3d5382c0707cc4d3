#ifndef NLTF_PRESSURE_HPP
#define NLTF_PRESSURE_HPP

#include <span>
#include <vector>

#include "nltf/potentials.hpp"
#include "nltf/sft.hpp"

namespace nltf {

// Ruelle transfer matrix for a depth-1 potential given by per-state values:
// entries[i][j] = transition[i][j] * exp(phi(j) - log_shift), with
// log_shift = max phi to keep entries bounded. The shift is added back in
// every pressure value.
struct TransferMatrix {
    int size = 0;
    std::vector<double> entries; // row-major
    double log_shift = 0.0;
};

TransferMatrix transfer_matrix(const SymbolicSystem& sys, std::span<const double> phi);

struct PerronData {
    double log_eigenvalue = 0.0; // includes the log_shift
    std::vector<double> right;
    std::vector<double> left;
    int iterations = 0;
};

// Power iteration with deterministic all-ones start, relative eigenvalue
// tolerance 1e-13, at most 1e5 iterations. Non-convergence on a primitive
// matrix is treated as a bug signal.
PerronData perron(const TransferMatrix& tm);

double classical_pressure(const TransferMatrix& tm);

// Stationary Markov chain obtained by stochasticizing a primitive transfer
// matrix through its Perron eigendata.
struct GibbsMarkovMeasure {
    int size = 0;
    std::vector<double> stochastic; // row-major, rows sum to 1
    std::vector<double> stationary; // positive, sums to 1
    double log_pressure = 0.0;
};

GibbsMarkovMeasure gibbs_measure(const TransferMatrix& tm);

// Entropy rate -sum_i pi_i sum_j P_ij log P_ij (0 log 0 := 0).
double measure_entropy(const GibbsMarkovMeasure& mu);

// Exact integrals of a block-recoded family: sum_i pi_i * value[comp][i].
std::vector<double> measure_integral(const GibbsMarkovMeasure& mu, const Depth1Family& fam);

// P(<q, Phi>) and its exact gradient d/dq = integral of Phi under the Gibbs
// measure of <q, Phi>.
double pressure_value(const Depth1Family& fam, std::span<const double> q);
std::vector<double> pressure_gradient(const Depth1Family& fam, std::span<const double> q);

} // namespace nltf

#endif

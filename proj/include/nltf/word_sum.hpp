#ifndef NLTF_WORD_SUM_HPP
#define NLTF_WORD_SUM_HPP

#include <span>

#include "nltf/fexpr.hpp"
#include "nltf/potentials.hpp"

namespace nltf {

// One nonlinear word sum: log sum over admissible (n+k-1)-words of
// exp[ln(base) * n * F(S_n Phi / n)], returned in natural log.
//
// Two implementations of the same kernel:
//   - word_log_sum_serial: single pass in lexicographic order with a running
//     max (the reference implementation, kept for testing).
//   - word_log_sum_blocked: fixed partition of the lexicographic rank space
//     into blocks, per-block partial log-sum-exp accumulated independently
//     (OpenMP when available) and combined in block order. The block
//     partition depends only on the workload, so results are bit-identical
//     for every thread count.
struct WordSumSpec {
    const PotentialFamily* family = nullptr;
    const FExpr* f = nullptr;
    std::span<const double> params;
    int n = 0;            // Birkhoff window length
    double log_base = 2.718281828459045235; // weights are base^(n F)
};

double word_log_sum_serial(const WordSumSpec& spec, const Caps& caps = {});
double word_log_sum_blocked(const WordSumSpec& spec, const Caps& caps = {});

} // namespace nltf

#endif

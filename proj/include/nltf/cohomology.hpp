#ifndef NLTF_COHOMOLOGY_HPP
#define NLTF_COHOMOLOGY_HPP

#include <optional>
#include <vector>

#include "nltf/potentials.hpp"
#include "nltf/sft.hpp"

namespace nltf {

struct Obstruction {
    Word cycle; // periodic word in the source alphabet
    double discrepancy = 0.0;
};

// Outcome of the periodic-orbit obstruction test. A consistent verdict up to
// max_period_checked is evidence for a cohomology relation, not a proof.
struct CohomologyVerdict {
    int max_period_checked = 0;
    bool consistent = false;
    std::optional<double> constant_offset; // the single c with S_p(a-b) = p*c
    std::vector<Obstruction> obstructions; // cycles with discrepancy > 1e-10
};

// If a - b is a coboundary plus a constant c, then S_p(a-b) = p*c over every
// periodic orbit. The test sums a - b over all periodic words of periods up
// to max_period; c is taken from the fixed points (or the lexicographically
// first shortest cycle when the graph has no fixed point).
CohomologyVerdict periodic_obstruction_test(const SymbolicSystem& sys, const Potential& a, const Potential& b,
                                            int max_period, const Caps& caps = {});

} // namespace nltf

#endif

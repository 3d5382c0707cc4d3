#include "nltf/cohomology.hpp"

#include <cmath>
#include <string>

namespace nltf {

namespace {

// Birkhoff sum of a depth-k potential over one full period of the periodic
// word w (wrap-around windows included).
double periodic_sum(const SymbolicSystem& sys, const Potential& p, const Word& w) {
    int period = static_cast<int>(w.size());
    int k = p.depth();
    int m = sys.alphabet_size();
    double s = 0.0;
    for (int j = 0; j < period; ++j) {
        std::size_t code = 0;
        for (int t = 0; t < k; ++t) code = code * m + static_cast<std::size_t>(w[(j + t) % period]);
        s += p.value_by_code(code);
    }
    return s;
}

// All periodic words of the given period: closed walks in the transition
// graph, enumerated lexicographically. Rotated duplicates are kept; they
// carry the same discrepancy and the cap guards the total volume.
template <typename Visit>
void for_each_periodic_word(const SymbolicSystem& sys, int period, long long& budget, Visit&& visit) {
    int m = sys.alphabet_size();
    Word w(period);
    // DFS over prefixes
    std::vector<int> next(period + 1, 0);
    int depth = 0;
    while (depth >= 0) {
        if (depth == period) {
            if (sys.allowed(w[period - 1], w[0])) {
                if (--budget < 0) fail_cap("periodic orbit enumeration exceeds cap");
                visit(w);
            }
            --depth;
            continue;
        }
        bool descended = false;
        for (int& b = next[depth]; b < m;) {
            int sym = b++;
            if (depth > 0 && !sys.allowed(w[depth - 1], sym)) continue;
            w[depth] = sym;
            next[depth + 1] = 0;
            ++depth;
            descended = true;
            break;
        }
        if (!descended) {
            next[depth] = 0;
            --depth;
        }
    }
}

} // namespace

CohomologyVerdict periodic_obstruction_test(const SymbolicSystem& sys, const Potential& a, const Potential& b,
                                            int max_period, const Caps& caps) {
    if (a.alphabet_size() != sys.alphabet_size() || b.alphabet_size() != sys.alphabet_size())
        fail_config("potential alphabet size does not match the system");
    int depth = std::max(a.depth(), b.depth());
    if (max_period < 2 * depth)
        fail_config("max_period must be at least twice the potential depth (" + std::to_string(2 * depth) + ")");

    Potential diff = add(sys, a, b.scaled(-1.0));

    CohomologyVerdict verdict;
    verdict.max_period_checked = max_period;

    long long budget = caps.cycles;

    // Single ascending pass: the first closed word seen fixes the offset c
    // (a fixed point when the graph has one, the lexicographically first
    // shortest cycle otherwise); everything after is checked against it.
    std::optional<double> c;
    verdict.consistent = true;
    for (int period = 1; period <= max_period; ++period) {
        for_each_periodic_word(sys, period, budget, [&](const Word& w) {
            double s = periodic_sum(sys, diff, w);
            if (!c) {
                c = s / static_cast<double>(period);
                return;
            }
            double disc = std::abs(s - static_cast<double>(period) * *c);
            if (disc > 1e-10) {
                verdict.consistent = false;
                verdict.obstructions.push_back({w, disc});
            }
        });
    }
    verdict.constant_offset = c;
    return verdict;
}

} // namespace nltf

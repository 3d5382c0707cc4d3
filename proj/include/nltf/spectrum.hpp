#ifndef NLTF_SPECTRUM_HPP
#define NLTF_SPECTRUM_HPP

#include <span>
#include <vector>

#include "nltf/potentials.hpp"
#include "nltf/pressure.hpp"

namespace nltf {

// Set of attainable integral vectors, computed as the convex hull of the
// simple-cycle averages of the block-recoded family. Dimensions 1 and 2 are
// supported; the hull may degenerate to a segment or a point.
struct RotationSet {
    enum class Kind { Interval, Point, Segment, Polygon };

    int dim = 1;
    Kind kind = Kind::Interval;
    double lo = 0.0, hi = 0.0;                 // dim == 1
    std::vector<std::vector<double>> vertices; // dim == 2: CCW, lexicographic minimum first
};

RotationSet rotation_set(const Depth1Family& fam, const Caps& caps = {});

// How far z lies outside the set (0 inside); membership uses gap <= 1e-9.
double hull_gap(const RotationSet& rs, std::span<const double> z);
bool hull_contains(const RotationSet& rs, std::span<const double> z, double tol = 1e-9);
// Distance from z to the boundary when the set is full-dimensional; 0 for
// degenerate sets, negative outside. The ambient interior test is margin > 1e-6.
double interior_margin(const RotationSet& rs, std::span<const double> z);

struct SpectrumPoint {
    std::vector<double> z;
    double h = 0.0;         // natural-log entropy value
    std::vector<double> q;  // dual parameter
    bool boundary_flag = false;
    bool converged = false; // dual gradient reached tolerance
};

struct SolveOptions {
    double grad_tol = 1e-10;
    double q_max = 50.0;
    int max_iter = 500;
    std::vector<double> warm_q; // optional starting point
};

// h(z) = min_q [P(<q,Phi>) - <q,z>], solved by BFGS descent with backtracking
// line search and exact pressure gradients. boundary_flag is set when the
// solve hits ||q|| >= q_max, fails to converge, or z is within 1e-6 of the
// boundary of the rotation set.
SpectrumPoint entropy_at(const Depth1Family& fam, const RotationSet& rs, std::span<const double> z,
                         const SolveOptions& opts = {});

// Grid over the rotation set in deterministic order (ascending z for d=1;
// z1 fastest then z2 for d=2). Point solves are warm-started from a serial
// anchor sweep so results do not depend on the parallel schedule.
std::vector<SpectrumPoint> spectrum_grid(const Depth1Family& fam, const RotationSet& rs, int resolution,
                                         const SolveOptions& opts = {});

} // namespace nltf

#endif

#include "nltf/cohomology.hpp"

#include <cmath>

#include "nltf/nonlinear.hpp"
#include "testkit.hpp"

using namespace nltf;

namespace {

SymbolicSystem full2() { return SymbolicSystem(2, {{1, 1}, {1, 1}}); }
SymbolicSystem golden_mean() { return SymbolicSystem(2, {{1, 1}, {1, 0}}); }

void test_constructed_coboundary() {
    SymbolicSystem sys = full2();
    Potential phi1 = Potential::from_map(sys, 1, {{{0}, -1.0}, {{1}, 1.0}});
    Potential g = Potential::from_map(sys, 1, {{{0}, 0.3}, {{1}, -0.2}});
    Potential phi2 = add(sys, phi1, coboundary(sys, g));

    CohomologyVerdict v = periodic_obstruction_test(sys, phi1, phi2, 12);
    CHECK(v.consistent);
    CHECK(v.max_period_checked == 12);
    CHECK(v.constant_offset.has_value());
    CHECK_CLOSE(*v.constant_offset, 0.0, 1e-12);
    CHECK(v.obstructions.empty());

    // depth-2 transfer function: telescoping still exact
    Potential g2 = Potential::from_map(sys, 2, {{{0, 0}, 0.5}, {{0, 1}, -0.1}, {{1, 0}, 0.2}, {{1, 1}, 0.9}});
    Potential phi3 = add(sys, phi1, coboundary(sys, g2));
    CohomologyVerdict v2 = periodic_obstruction_test(sys, phi1, phi3, 12);
    CHECK(v2.consistent);
    CHECK_CLOSE(*v2.constant_offset, 0.0, 1e-12);
}

void test_obstruction() {
    SymbolicSystem sys = full2();
    Potential phi1 = Potential::from_map(sys, 1, {{{0}, -1.0}, {{1}, 1.0}});
    Potential zero = Potential::from_map(sys, 1, {{{0}, 0.0}, {{1}, 0.0}});

    CohomologyVerdict v = periodic_obstruction_test(sys, phi1, zero, 8);
    CHECK(!v.consistent);
    // the two fixed points disagree: first failing cycle has period 1
    CHECK(!v.obstructions.empty());
    CHECK(v.obstructions.front().cycle.size() == 1);
    CHECK_CLOSE(v.obstructions.front().discrepancy, 2.0, 1e-12);
}

void test_constant_offset() {
    SymbolicSystem sys = full2();
    Potential phi1 = Potential::from_map(sys, 1, {{{0}, -1.0}, {{1}, 1.0}});
    Potential phi2 = phi1.shifted(3.0);
    CohomologyVerdict v = periodic_obstruction_test(sys, phi1, phi2, 10);
    CHECK(v.consistent);
    CHECK_CLOSE(*v.constant_offset, -3.0, 1e-12);
}

void test_precondition() {
    SymbolicSystem sys = full2();
    Potential a = Potential::from_map(sys, 2, {{{0, 0}, 1.}, {{0, 1}, 2.}, {{1, 0}, 3.}, {{1, 1}, 4.}});
    CHECK_THROWS_KIND(periodic_obstruction_test(sys, a, a, 3), ErrorKind::Config);
    CohomologyVerdict v = periodic_obstruction_test(sys, a, a, 4);
    CHECK(v.consistent);
}

void test_no_fixed_point_fallback() {
    // golden-mean with state 1 -> 1 forbidden still has the fixed point 0;
    // build a system without period-1 orbits instead
    SymbolicSystem sys(3, {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
    Potential a = Potential::from_map(sys, 1, {{{0}, 1.0}, {{1}, 2.0}, {{2}, 3.0}});
    Potential b = a.shifted(-0.5);
    CohomologyVerdict v = periodic_obstruction_test(sys, a, b, 8);
    CHECK(v.consistent);
    CHECK_CLOSE(*v.constant_offset, 0.5, 1e-12);
}

void test_reduction_soundness() {
    // consistent verdict with c = 0 implies the dimension reduction
    // G(z1) = F(z1, z1) leaves the variational value unchanged
    SymbolicSystem sys = full2();
    Potential phi1 = Potential::from_map(sys, 1, {{{0}, -1.0}, {{1}, 1.0}});
    Potential g = Potential::from_map(sys, 1, {{{0}, 0.15}, {{1}, -0.1}});
    Potential phi2 = add(sys, phi1, coboundary(sys, g));
    CohomologyVerdict v = periodic_obstruction_test(sys, phi1, phi2, 12);
    CHECK(v.consistent);
    CHECK_CLOSE(*v.constant_offset, 0.0, 1e-12);

    PotentialFamily fam2(sys, {phi1, phi2});
    Depth1Family d2 = to_depth1(fam2);
    RotationSet rs2 = rotation_set(d2);
    NonlinearOptions opts;
    opts.resolution = 201;
    FExpr f2 = FExpr::parse("z1^2/3 + z2^2/6 - z1/2", 2, {});
    double full = variational_value(d2, rs2, f2, {}, opts);

    PotentialFamily fam1(sys, {phi1});
    Depth1Family d1 = to_depth1(fam1);
    RotationSet rs1 = rotation_set(d1);
    FExpr f1 = FExpr::parse("z1^2/3 + z1^2/6 - z1/2", 1, {});
    double reduced = variational_value(d1, rs1, f1, {}, opts);
    CHECK_CLOSE(full, reduced, 1e-6);
}

void test_golden_mean_cycles() {
    // periodic words respect the adjacency constraint
    SymbolicSystem gm = golden_mean();
    Potential a = Potential::from_map(gm, 1, {{{0}, 0.7}, {{1}, -0.4}});
    Potential b = a.shifted(1.0);
    CohomologyVerdict v = periodic_obstruction_test(gm, a, b, 10);
    CHECK(v.consistent);
    CHECK_CLOSE(*v.constant_offset, -1.0, 1e-12);
}

} // namespace

int main() {
    test_constructed_coboundary();
    test_obstruction();
    test_constant_offset();
    test_precondition();
    test_no_fixed_point_fallback();
    test_reduction_soundness();
    test_golden_mean_cycles();
    return testkit::summary("test_cohomology");
}

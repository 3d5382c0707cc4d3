#ifndef NLTF_NONLINEAR_HPP
#define NLTF_NONLINEAR_HPP

#include <span>
#include <vector>

#include "nltf/fexpr.hpp"
#include "nltf/potentials.hpp"
#include "nltf/pressure.hpp"
#include "nltf/spectrum.hpp"
#include "nltf/word_sum.hpp"

namespace nltf {

struct NonlinearOptions {
    int resolution = 201;
    double log_base = 2.718281828459045235;
    Caps caps;
    SolveOptions solve;
    double cluster_de = 1e-6; // energy tie radius for maximizer candidates
    double cluster_dz = 1e-4; // spatial clustering radius
    bool parallel = true;     // blocked kernel vs serial reference
};

// Finite-n records of the defining word sums. The sequence is reported as-is
// together with the last-step drift; no limit value is claimed.
struct DirectRecord {
    int n = 0;
    double value = 0.0;
};
struct DirectEstimate {
    std::vector<DirectRecord> records; // n = 2..n_max
    double drift = 0.0;                // |value(n_max) - value(n_max - 1)|
};

DirectEstimate direct_estimate(const PotentialFamily& fam, const FExpr& f, std::span<const double> params,
                               int n_max, const NonlinearOptions& opts = {});

// E(z) = h(z)/ln(base) + F(z), with the computed entropy bound to the symbol
// h when F references it. Carries a warm-started dual solve.
class EnergyEvaluator {
public:
    EnergyEvaluator(const Depth1Family& fam, const RotationSet& rs, const FExpr& f,
                    std::span<const double> params, const NonlinearOptions& opts);

    struct Value {
        double E = 0.0;
        double h = 0.0; // natural-log entropy
        std::vector<double> q;
        bool boundary = false;
    };
    Value operator()(std::span<const double> z) const;
    double log_scale() const { return scale_; }

private:
    const Depth1Family& fam_;
    const RotationSet& rs_;
    const FExpr& f_;
    std::vector<double> params_;
    NonlinearOptions opts_;
    double scale_;
    mutable std::vector<double> warm_q_;
};

// sup of E over the rotation set: grid sweep plus local refinement
// (golden section for one-dimensional sets, Nelder-Mead otherwise).
double variational_value(const Depth1Family& fam, const RotationSet& rs, const FExpr& f,
                         std::span<const double> params, const NonlinearOptions& opts = {});

struct Maximizer {
    std::vector<double> z;
    double E = 0.0;
    bool interior = false;
};

// Linear potential <q(z), Phi> - <q(z), z> - h(z) on the block states; its
// classical pressure is zero and its unique equilibrium measure integrates
// Phi to z.
struct PsiPotential {
    std::vector<double> q;
    std::vector<double> z;
    double h_z = 0.0;                 // natural log
    std::vector<double> state_values; // depth-1 values on block states
};

struct EquilibriumReport {
    double variational_value = 0.0;
    int count = 0; // -1: non-isolated maximizer set detected
    std::vector<Maximizer> maximizers;
    std::vector<int> measure_index; // per maximizer: index into measures, -1 for boundary
    std::vector<PsiPotential> psis;
    std::vector<GibbsMarkovMeasure> measures;
    std::vector<SpectrumPoint> measure_points;    // dual data per measure
    std::vector<std::vector<double>> tied_locus;  // populated when count == -1
};

EquilibriumReport find_maximizers(const Depth1Family& fam, const RotationSet& rs, const FExpr& f,
                                  std::span<const double> params, const NonlinearOptions& opts = {});

std::pair<PsiPotential, GibbsMarkovMeasure> equilibrium_measure(const Depth1Family& fam, const RotationSet& rs,
                                                                std::span<const double> z,
                                                                const NonlinearOptions& opts = {});

// Advisory uniqueness diagnostics; never overrides find_maximizers.
struct UniquenessProbe {
    bool f_concave = false;
    bool interior_exceeds_boundary = false;
    bool predicts_unique = false;
    double interior_best = 0.0;
    double boundary_best = 0.0;
    int maximizer_count = 0;
};

UniquenessProbe uniqueness_probe(const Depth1Family& fam, const RotationSet& rs, const FExpr& f,
                                 std::span<const double> params, const NonlinearOptions& opts = {});

// Numeric Hessian of E at an interior point (central differences with
// per-coordinate step scaled by 1+|z_i|); used by the probe and diagnostics.
std::vector<std::vector<double>> energy_hessian(const EnergyEvaluator& energy, std::span<const double> z,
                                                double step = 1e-4);

} // namespace nltf

#endif

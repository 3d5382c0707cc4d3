#ifndef NLTF_CONFIG_HPP
#define NLTF_CONFIG_HPP

#include <optional>
#include <string>
#include <vector>

#include "nltf/fexpr.hpp"
#include "nltf/nonlinear.hpp"
#include "nltf/potentials.hpp"
#include "nltf/sft.hpp"
#include "nltf/spectrum.hpp"

namespace nltf {

// Validated run configuration. Loading rejects unknown keys, malformed
// tables, non-primitive systems and bad expressions before any computation.
struct RunConfig {
    SymbolicSystem system;
    std::vector<Potential> potentials;

    std::optional<FExpr> f;
    std::vector<double> param_values; // order matches f->param_names()

    double log_base = 2.718281828459045235;
    std::string log_base_label = "e";
    int n_max = 20;
    int resolution = 201;
    Caps caps;
    SolveOptions solve;

    int coh_first = 0;
    int coh_second = 1;
    int coh_max_period = 12;

    PotentialFamily family() const { return PotentialFamily(system, potentials); }
    NonlinearOptions nonlinear_options() const;
    const FExpr& require_f(const char* command) const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

// NLP_CAP_WORDS overrides the word-enumeration cap when set.
void apply_env_overrides(RunConfig& cfg);

} // namespace nltf

#endif

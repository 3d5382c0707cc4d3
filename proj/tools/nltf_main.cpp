#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#ifdef NLTF_HAVE_OPENMP
#include <omp.h>
#endif

#include "nltf/commands.hpp"
#include "nltf/config.hpp"

namespace {

int exit_code_for(nltf::ErrorKind kind) {
    switch (kind) {
        case nltf::ErrorKind::Config: return 2;
        case nltf::ErrorKind::Domain:
        case nltf::ErrorKind::Numeric: return 3;
        case nltf::ErrorKind::Cap: return 4;
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonlinear thermodynamic formalism on subshifts of finite type"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string mode = "both";
    int threads = 0;
    std::optional<int> resolution;
    std::optional<int> n_max;

    auto add_common = [&](CLI::App* sub, bool with_mode = false) {
        sub->add_option("--config", config_path, "config file")->required();
        sub->add_option("--out", out_path, "output file (default stdout)");
        sub->add_option("--threads", threads, "worker threads for parallel kernels");
        sub->add_option("--resolution", resolution, "grid resolution override");
        sub->add_option("--n-max", n_max, "direct-estimate window override");
        if (with_mode) sub->add_option("--mode", mode, "direct|variational|both");
        return sub;
    };

    CLI::App* sub_pressure = add_common(app.add_subcommand("pressure", "classical topological pressure"));
    CLI::App* sub_spectrum = add_common(app.add_subcommand("spectrum", "entropy spectrum h(z) as CSV"));
    CLI::App* sub_rotation = add_common(app.add_subcommand("rotation-set", "rotation set L(Phi)"));
    CLI::App* sub_nl = add_common(app.add_subcommand("nlpressure", "nonlinear pressure"), true);
    CLI::App* sub_eq = add_common(app.add_subcommand("equilibria", "maximizer set and equilibrium measures"));
    CLI::App* sub_coh = add_common(app.add_subcommand("cohomology", "periodic-orbit obstruction test"));
    CLI::App* sub_plot = add_common(app.add_subcommand("emit-plot", "z,h,F,E rows for plotting"));

    CLI11_PARSE(app, argc, argv);

    try {
#ifdef NLTF_HAVE_OPENMP
        if (threads > 0) omp_set_num_threads(threads);
#else
        (void)threads;
#endif
        nltf::RunConfig cfg = nltf::load_config(config_path);
        nltf::apply_env_overrides(cfg);
        if (resolution) {
            if (*resolution < 2) nltf::fail_config("resolution must be >= 2");
            cfg.resolution = *resolution;
        }
        if (n_max) {
            if (*n_max < 2) nltf::fail_config("n-max must be >= 2");
            cfg.n_max = *n_max;
        }

        std::ofstream file;
        std::ostream* out = &std::cout;
        if (!out_path.empty()) {
            file.open(out_path);
            if (!file) nltf::fail_config("cannot open output file '" + out_path + "'");
            out = &file;
        }

        if (sub_pressure->parsed()) nltf::cmd_pressure(cfg, *out);
        else if (sub_spectrum->parsed()) nltf::cmd_spectrum(cfg, *out);
        else if (sub_rotation->parsed()) nltf::cmd_rotation_set(cfg, *out);
        else if (sub_nl->parsed()) nltf::cmd_nlpressure(cfg, mode, *out);
        else if (sub_eq->parsed()) nltf::cmd_equilibria(cfg, *out);
        else if (sub_coh->parsed()) nltf::cmd_cohomology(cfg, *out);
        else if (sub_plot->parsed()) nltf::cmd_emit_plot(cfg, *out);
        out->flush();
    } catch (const nltf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

#include "nltf/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "nltf/cohomology.hpp"

namespace nltf {

std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

std::string jvec(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += fmt12(v[i]);
    }
    return s + "]";
}

std::string word_label(const Word& w) {
    bool wide = std::any_of(w.begin(), w.end(), [](Symbol s) { return s >= 10; });
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i && wide) out.push_back(',');
        out += std::to_string(w[i]);
    }
    return out;
}

double log_scale(const RunConfig& cfg) { return 1.0 / std::log(cfg.log_base); }

} // namespace

void cmd_pressure(const RunConfig& cfg, std::ostream& out) {
    if (cfg.potentials.size() != 1)
        fail_config("the pressure command needs exactly one potential, got " +
                    std::to_string(cfg.potentials.size()));
    PotentialFamily fam = cfg.family();
    Depth1Family d1 = to_depth1(fam, cfg.caps);
    std::vector<double> q{1.0};
    double p = pressure_value(d1, q) * log_scale(cfg);
    out << "{\"pressure\":" << fmt12(p) << "}\n";
}

void cmd_spectrum(const RunConfig& cfg, std::ostream& out) {
    PotentialFamily fam = cfg.family();
    Depth1Family d1 = to_depth1(fam, cfg.caps);
    RotationSet rs = rotation_set(d1, cfg.caps);
    std::vector<SpectrumPoint> grid = spectrum_grid(d1, rs, cfg.resolution, cfg.solve);
    double scale = log_scale(cfg);
    int d = fam.dim();
    out << "# ";
    for (int i = 1; i <= d; ++i) out << "z" << i << ",";
    out << "h,";
    for (int i = 1; i <= d; ++i) out << "q" << i << ",";
    out << "boundary_flag\n";
    for (const SpectrumPoint& p : grid) {
        for (int i = 0; i < d; ++i) out << fmt12(p.z[i]) << ",";
        out << fmt12(p.h * scale) << ",";
        for (int i = 0; i < d; ++i) out << fmt12(p.q[i]) << ",";
        out << (p.boundary_flag ? 1 : 0) << "\n";
    }
}

void cmd_rotation_set(const RunConfig& cfg, std::ostream& out) {
    PotentialFamily fam = cfg.family();
    Depth1Family d1 = to_depth1(fam, cfg.caps);
    RotationSet rs = rotation_set(d1, cfg.caps);
    if (rs.dim == 1) {
        out << "{\"dimension\":1,\"kind\":\"interval\",\"lo\":" << fmt12(rs.lo) << ",\"hi\":" << fmt12(rs.hi)
            << "}\n";
        return;
    }
    const char* kind = rs.kind == RotationSet::Kind::Point     ? "point"
                       : rs.kind == RotationSet::Kind::Segment ? "segment"
                                                               : "polygon";
    out << "{\"dimension\":2,\"kind\":\"" << kind << "\",\"vertices\":[";
    for (std::size_t i = 0; i < rs.vertices.size(); ++i) {
        if (i) out << ",";
        out << jvec(rs.vertices[i]);
    }
    out << "]}\n";
}

void cmd_nlpressure(const RunConfig& cfg, const std::string& mode, std::ostream& out) {
    if (mode != "direct" && mode != "variational" && mode != "both")
        fail_config("mode must be one of direct|variational|both, got '" + mode + "'");
    const FExpr& f = cfg.require_f("nlpressure");
    PotentialFamily fam = cfg.family();
    NonlinearOptions opts = cfg.nonlinear_options();

    std::ostringstream line;
    line << "{\"mode\":\"" << mode << "\",\"log_base\":\"" << cfg.log_base_label << "\"";
    DirectEstimate direct;
    double variational = 0.0;
    if (mode != "variational") {
        direct = direct_estimate(fam, f, cfg.param_values, cfg.n_max, opts);
        line << ",\"per_n\":[";
        for (std::size_t i = 0; i < direct.records.size(); ++i) {
            if (i) line << ",";
            line << "{\"n\":" << direct.records[i].n << ",\"value\":" << fmt12(direct.records[i].value) << "}";
        }
        line << "],\"drift\":" << fmt12(direct.drift);
    }
    if (mode != "direct") {
        Depth1Family d1 = to_depth1(fam, cfg.caps);
        RotationSet rs = rotation_set(d1, cfg.caps);
        variational = variational_value(d1, rs, f, cfg.param_values, opts);
        line << ",\"variational\":" << fmt12(variational);
    }
    if (mode == "both")
        line << ",\"gap\":" << fmt12(std::abs(direct.records.back().value - variational));
    line << "}";
    out << line.str() << "\n";
}

void cmd_equilibria(const RunConfig& cfg, std::ostream& out) {
    const FExpr& f = cfg.require_f("equilibria");
    PotentialFamily fam = cfg.family();
    NonlinearOptions opts = cfg.nonlinear_options();
    Depth1Family d1 = to_depth1(fam, cfg.caps);
    RotationSet rs = rotation_set(d1, cfg.caps);
    EquilibriumReport report = find_maximizers(d1, rs, f, cfg.param_values, opts);
    double scale = log_scale(cfg);

    std::ostringstream line;
    line << "{\"variational_value\":" << fmt12(report.variational_value) << ",\"count\":" << report.count;
    line << ",\"maximizers\":[";
    for (std::size_t i = 0; i < report.maximizers.size(); ++i) {
        if (i) line << ",";
        const Maximizer& m = report.maximizers[i];
        line << "{\"z\":" << jvec(m.z) << ",\"E\":" << fmt12(m.E)
             << ",\"interior\":" << (m.interior ? "true" : "false") << "}";
    }
    line << "],\"measures\":[";
    for (std::size_t i = 0; i < report.measures.size(); ++i) {
        if (i) line << ",";
        const GibbsMarkovMeasure& mu = report.measures[i];
        const SpectrumPoint& pt = report.measure_points[i];
        line << "{\"z\":" << jvec(pt.z) << ",\"q\":" << jvec(pt.q) << ",\"h\":" << fmt12(pt.h * scale)
             << ",\"states\":[";
        for (int s = 0; s < mu.size; ++s) {
            if (s) line << ",";
            line << "\"" << word_label(d1.block.states[s]) << "\"";
        }
        line << "],\"stationary\":" << jvec(mu.stationary) << ",\"stochastic\":[";
        for (int r = 0; r < mu.size; ++r) {
            if (r) line << ",";
            std::vector<double> row(mu.stochastic.begin() + static_cast<long>(r) * mu.size,
                                    mu.stochastic.begin() + static_cast<long>(r + 1) * mu.size);
            line << jvec(row);
        }
        line << "]}";
    }
    line << "]";
    if (report.count == -1) {
        line << ",\"tied_locus\":[";
        for (std::size_t i = 0; i < report.tied_locus.size(); ++i) {
            if (i) line << ",";
            line << jvec(report.tied_locus[i]);
        }
        line << "]";
    }
    line << "}";
    out << line.str() << "\n";
}

void cmd_cohomology(const RunConfig& cfg, std::ostream& out) {
    if (cfg.potentials.size() < 2)
        fail_config("the cohomology command needs at least two potentials in the config");
    CohomologyVerdict verdict = periodic_obstruction_test(cfg.system, cfg.potentials[cfg.coh_first],
                                                          cfg.potentials[cfg.coh_second], cfg.coh_max_period,
                                                          cfg.caps);
    std::ostringstream line;
    line << "{\"consistent\":" << (verdict.consistent ? "true" : "false")
         << ",\"max_period_checked\":" << verdict.max_period_checked;
    if (verdict.constant_offset) line << ",\"constant_offset\":" << fmt12(*verdict.constant_offset);
    line << ",\"obstruction_count\":" << verdict.obstructions.size() << ",\"obstructions\":[";
    std::size_t shown = std::min<std::size_t>(verdict.obstructions.size(), 10);
    for (std::size_t i = 0; i < shown; ++i) {
        if (i) line << ",";
        line << "{\"cycle\":\"" << word_label(verdict.obstructions[i].cycle)
             << "\",\"discrepancy\":" << fmt12(verdict.obstructions[i].discrepancy) << "}";
    }
    line << "]}";
    out << line.str() << "\n";
}

void cmd_emit_plot(const RunConfig& cfg, std::ostream& out) {
    const FExpr& f = cfg.require_f("emit-plot");
    PotentialFamily fam = cfg.family();
    Depth1Family d1 = to_depth1(fam, cfg.caps);
    RotationSet rs = rotation_set(d1, cfg.caps);
    std::vector<SpectrumPoint> grid = spectrum_grid(d1, rs, cfg.resolution, cfg.solve);
    double scale = log_scale(cfg);
    int d = fam.dim();
    out << "# ";
    for (int i = 1; i <= d; ++i) out << "z" << i << ",";
    out << "h,F,E\n";
    for (const SpectrumPoint& p : grid) {
        double h_scaled = p.h * scale;
        double fval;
        try {
            fval = f.eval(FEvalContext{p.z, cfg.param_values, h_scaled});
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Domain) throw;
            std::string at;
            for (std::size_t i = 0; i < p.z.size(); ++i) at += (i ? "," : "") + fmt12(p.z[i]);
            fail_domain(std::string(e.what()) + " at z = (" + at + ")");
        }
        for (int i = 0; i < d; ++i) out << fmt12(p.z[i]) << ",";
        out << fmt12(h_scaled) << "," << fmt12(fval) << "," << fmt12(h_scaled + fval) << "\n";
    }
}

} // namespace nltf

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "testkit.hpp"

namespace {

std::string g_bin;
std::string g_configs;
std::string g_work;

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    std::string out_file = g_work + "/out.txt";
    std::string err_file = g_work + "/err.txt";
    std::string cmd = env_prefix + g_bin + " " + args + " > " + out_file + " 2> " + err_file;
    int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
}

std::string cfg(const std::string& name) { return g_configs + "/" + name; }

// tolerant parse: a failed command yields a discarded value, not an abort
nlohmann::json jparse(const std::string& text) { return nlohmann::json::parse(text, nullptr, false); }

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

double spec_entropy(double z) {
    if (std::abs(z) >= 1.0) return 0.0;
    double a = (1 - z) / 2, b = (1 + z) / 2;
    return -a * std::log(a) - b * std::log(b);
}

void test_pressure_command() {
    RunResult r = run_cli("pressure --config " + cfg("full2_zero.cfg"));
    CHECK(r.exit_code == 0);
    auto j = jparse(r.out);
    CHECK_CLOSE(j["pressure"].get<double>(), std::log(2.0), 1e-9);

    RunResult r2 = run_cli("pressure --config " + cfg("goldenmean_zero.cfg"));
    CHECK(r2.exit_code == 0);
    auto j2 = jparse(r2.out);
    CHECK_CLOSE(j2["pressure"].get<double>(), 0.481211825060, 1e-9);

    // byte-identical on rerun
    RunResult r3 = run_cli("pressure --config " + cfg("full2_zero.cfg"));
    CHECK(r.out == r3.out);
}

void test_config_errors() {
    std::ofstream bad(g_work + "/bad.cfg");
    bad << "{\"system\": {\"alphabet_size\": 2, \"transition\": [[1], [1, 1]]},"
        << "\"potentials\": [{\"depth\": 1, \"table\": {\"0\": 0.0, \"1\": 0.0}}]}";
    bad.close();
    RunResult r = run_cli("pressure --config " + g_work + "/bad.cfg");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("transition") != std::string::npos);

    std::ofstream unknown(g_work + "/unknown.cfg");
    unknown << "{\"system\": {\"alphabet_size\": 2, \"transition\": [[1, 1], [1, 1]]},"
            << "\"potentials\": [{\"depth\": 1, \"table\": {\"0\": 0.0, \"1\": 0.0}}],"
            << "\"surprise\": 1}";
    unknown.close();
    RunResult r2 = run_cli("pressure --config " + g_work + "/unknown.cfg");
    CHECK(r2.exit_code == 2);
    CHECK(r2.err.find("surprise") != std::string::npos);

    RunResult r3 = run_cli("pressure --config " + g_work + "/missing_file.cfg");
    CHECK(r3.exit_code == 2);

    RunResult r4 = run_cli("pressure");
    CHECK(r4.exit_code != 0);

    // not valid JSON at all: diagnostics carry the parse location
    std::ofstream broken(g_work + "/broken.cfg");
    broken << "{\"system\": }";
    broken.close();
    RunResult r5 = run_cli("pressure --config " + g_work + "/broken.cfg");
    CHECK(r5.exit_code == 2);
}

void test_spectrum_command() {
    std::string out_csv = g_work + "/spec.csv";
    RunResult r = run_cli("spectrum --config " + cfg("full2_pm1.cfg") + " --out " + out_csv);
    CHECK(r.exit_code == 0);
    std::string text = slurp(out_csv);
    auto rows = csv_rows(text);
    CHECK(rows.size() == 201);
    double worst = 0.0;
    for (const auto& row : rows) {
        CHECK(row.size() == 4);
        double z = std::stod(row[0]);
        double h = std::stod(row[1]);
        if (std::abs(z) <= 0.95) worst = std::max(worst, std::abs(h - spec_entropy(z)));
    }
    CHECK_MSG(worst <= 1e-6, "worst h error " + std::to_string(worst));
    CHECK(rows.front()[3] == "1");
    CHECK(rows.back()[3] == "1");

    RunResult r2 = run_cli("spectrum --config " + cfg("full2_pm1.cfg") + " --out " + g_work + "/spec2.csv");
    CHECK(r2.exit_code == 0);
    CHECK(text == slurp(g_work + "/spec2.csv"));
}

void test_rotation_set_command() {
    RunResult r = run_cli("rotation-set --config " + cfg("full2_pm1.cfg"));
    CHECK(r.exit_code == 0);
    auto j = jparse(r.out);
    CHECK(j["dimension"] == 1);
    CHECK_CLOSE(j["lo"].get<double>(), -1.0, 1e-12);
    CHECK_CLOSE(j["hi"].get<double>(), 1.0, 1e-12);

    RunResult r2 = run_cli("rotation-set --config " + cfg("full2_indicators.cfg"));
    auto j2 = jparse(r2.out);
    CHECK(j2["kind"] == "segment");
    CHECK(j2["vertices"].size() == 2);

    RunResult r3 = run_cli("rotation-set --config " + cfg("full3_indicators_beta1.cfg"));
    auto j3 = jparse(r3.out);
    CHECK(j3["kind"] == "polygon");
    CHECK(j3["vertices"].size() == 3);
}

void test_nlpressure_command() {
    RunResult lin = run_cli("nlpressure --config " + cfg("full2_linear.cfg") + " --mode both");
    CHECK(lin.exit_code == 0);
    auto j = jparse(lin.out);
    CHECK(j["gap"].get<double>() <= 1e-9);
    for (const auto& rec : j["per_n"])
        CHECK_CLOSE(rec["value"].get<double>(), std::log(2.0 * std::cosh(1.0)), 1e-10);

    RunResult a1 = run_cli("nlpressure --config " + cfg("full2_alpha1.cfg") + " --mode both --n-max 12");
    CHECK(a1.exit_code == 0);
    auto ja = jparse(a1.out);
    double last = ja["per_n"].back()["value"].get<double>();
    double var = ja["variational"].get<double>();
    CHECK_CLOSE(ja["gap"].get<double>(), std::abs(last - var), 1e-12);
    CHECK_CLOSE(var, std::log(2.0) - 0.5, 1e-8);

    // byte-identical output independent of the thread count
    RunResult t1 = run_cli("nlpressure --config " + cfg("full2_alpha1.cfg") + " --mode direct --n-max 14 --threads 1");
    RunResult t4 = run_cli("nlpressure --config " + cfg("full2_alpha1.cfg") + " --mode direct --n-max 14 --threads 4");
    CHECK(t1.exit_code == 0);
    CHECK(t1.out == t4.out);
}

void test_domain_and_cap_errors() {
    std::ofstream logcfg(g_work + "/logf.cfg");
    logcfg << "{\"system\": {\"alphabet_size\": 2, \"transition\": [[1, 1], [1, 1]]},"
           << "\"potentials\": [{\"depth\": 1, \"table\": {\"0\": -1.0, \"1\": 1.0}}],"
           << "\"F\": {\"source\": \"log(z1)\"}}";
    logcfg.close();
    RunResult r = run_cli("nlpressure --config " + g_work + "/logf.cfg --mode variational");
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("at z =") != std::string::npos);

    RunResult c = run_cli("nlpressure --config " + cfg("full2_alpha1.cfg") + " --mode direct",
                          "NLP_CAP_WORDS=100 ");
    CHECK(c.exit_code == 4);

    RunResult e = run_cli("nlpressure --config " + cfg("full2_alpha1.cfg") + " --mode direct",
                          "NLP_CAP_WORDS=banana ");
    CHECK(e.exit_code == 2);
}

void test_equilibria_command() {
    RunResult r = run_cli("equilibria --config " + cfg("full2_alpha1.cfg"));
    CHECK(r.exit_code == 0);
    auto j = jparse(r.out);
    CHECK(j["count"] == 1);
    CHECK_CLOSE(j["maximizers"][0]["z"][0].get<double>(), 0.0, 1e-6);
    CHECK(j["maximizers"][0]["interior"] == true);
    CHECK_CLOSE(j["measures"][0]["stationary"][0].get<double>(), 0.5, 1e-9);
    CHECK_CLOSE(j["measures"][0]["stationary"][1].get<double>(), 0.5, 1e-9);

    RunResult rq = run_cli("equilibria --config " + cfg("full2_quartic.cfg"));
    CHECK(rq.exit_code == 0);
    auto jq = jparse(rq.out);
    CHECK(jq["count"] == -1);
    CHECK(jq.contains("tied_locus"));
    CHECK(jq["tied_locus"].size() >= 10);
}

void test_emit_plot_command() {
    std::string out_csv = g_work + "/plot.csv";
    RunResult r = run_cli("emit-plot --config " + cfg("full2_cinf.cfg") + " --out " + out_csv);
    CHECK(r.exit_code == 0);
    auto rows = csv_rows(slurp(out_csv));
    CHECK(rows.size() == 201); // row count equals the resolution
    std::vector<double> z, E;
    for (const auto& row : rows) {
        CHECK(row.size() == 4);
        z.push_back(std::stod(row[0]));
        E.push_back(std::stod(row[3]));
    }
    // two local maxima, the global one near z = 0.75
    int maxima = 0;
    std::size_t argmax = 0;
    for (std::size_t i = 1; i + 1 < E.size(); ++i) {
        if (E[i] > E[i - 1] && E[i] >= E[i + 1]) ++maxima;
        if (E[i] > E[argmax]) argmax = i;
    }
    CHECK(maxima == 2);
    CHECK_CLOSE(z[argmax], 0.75, 0.02);
}

void test_cohomology_command() {
    RunResult r = run_cli("cohomology --config " + cfg("full2_cohopair.cfg"));
    CHECK(r.exit_code == 0);
    auto j = jparse(r.out);
    CHECK(j["consistent"] == true);
    CHECK_CLOSE(j["constant_offset"].get<double>(), 0.0, 1e-10);
    CHECK(j["obstruction_count"] == 0);
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::printf("usage: test_cli <nltf-binary> <configs-dir>\n");
        return 2;
    }
    g_bin = argv[1];
    g_configs = argv[2];
    char tmpl[] = "/tmp/nltf_cli_XXXXXX";
    char* dir = mkdtemp(tmpl);
    if (!dir) {
        std::printf("cannot create work dir\n");
        return 2;
    }
    g_work = dir;

    test_pressure_command();
    test_config_errors();
    test_spectrum_command();
    test_rotation_set_command();
    test_nlpressure_command();
    test_domain_and_cap_errors();
    test_equilibria_command();
    test_emit_plot_command();
    test_cohomology_command();
    return testkit::summary("test_cli");
}

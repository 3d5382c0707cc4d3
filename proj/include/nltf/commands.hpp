#ifndef NLTF_COMMANDS_HPP
#define NLTF_COMMANDS_HPP

#include <ostream>
#include <string>

#include "nltf/config.hpp"

namespace nltf {

// CLI subcommand bodies. Output is deterministic: floats are printed with 12
// significant digits, records as one JSON object per line, grids as CSV with
// a single '#' header line.
void cmd_pressure(const RunConfig& cfg, std::ostream& out);
void cmd_spectrum(const RunConfig& cfg, std::ostream& out);
void cmd_rotation_set(const RunConfig& cfg, std::ostream& out);
void cmd_nlpressure(const RunConfig& cfg, const std::string& mode, std::ostream& out);
void cmd_equilibria(const RunConfig& cfg, std::ostream& out);
void cmd_cohomology(const RunConfig& cfg, std::ostream& out);
void cmd_emit_plot(const RunConfig& cfg, std::ostream& out);

// %.12g rendering shared by all commands (and reused by tests).
std::string fmt12(double v);

} // namespace nltf

#endif

#ifndef REGDIM_CLI_HPP
#define REGDIM_CLI_HPP

#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "regdim/measure_model.hpp"
#include "regdim/rational.hpp"
#include "regdim/scale_grid.hpp"
#include "regdim/seqmeasure.hpp"

namespace regdim {

// Bad config file, flag, or parameter: exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A run that started from a valid config but could not finish: exit code 3.
class ComputationError : public std::runtime_error {
public:
    explicit ComputationError(const std::string& what) : std::runtime_error(what) {}
};

// Flattened "section.key" = value pairs in file order, plus the raw text
// (the raw text feeds the output hash).
struct ConfigFile {
    std::vector<std::pair<std::string, std::string>> entries;
    std::string raw;

    const std::string* find(const std::string& key) const;
};

ConfigFile parse_config_text(const std::string& text);
ConfigFile load_config(const std::string& path);

// Fully validated run description. Every field is checked when the config is
// read; errors name the offending "section.key".
struct RunConfig {
    std::string family;  // selfsimilar | sponge | sequence | lens

    // selfsimilar: 1-d maps ratio_i x + shift_i with exact weights
    std::vector<double> ratios;
    std::vector<double> shifts;
    std::vector<Rational> weights;
    bool weights_exact = false;  // every weight written as a fraction

    // sponge: the epsilon family
    double epsilon = 0.0;

    // sequence
    SeqParam x_param{SeqKind::kPoly, 1.0};
    SeqParam p_param{SeqKind::kPoly, 2.0};
    long cache_terms = 1000000;

    // lens
    int lens_count = 6;
    double lens_cell = 0.0;
    bool lens_restricted = true;
    std::vector<int> lens_indices;

    ScaleGrid grid{2.0, 2, 26, 8, 24};
    std::vector<std::string> estimators;
    int extra_samples = 0;

    std::string out_path;  // empty: stdout
    unsigned long long seed = 0;
    int threads = 1;
    double tol = 1e-6;
    bool timings = false;  // real runtimes break byte-reproducibility: opt-in

    std::string hash_hex;  // FNV-1a of raw config text + seed + tol
};

RunConfig make_run_config(const ConfigFile& file);

// Constructed model plus its deterministic default sample points (witnesses
// and family-specific scale probes).
struct ModelBundle {
    std::unique_ptr<MeasureModel> model;
    std::vector<Point> sample_points;
    // closed-form rows for cmd_formula: (quantity, printed value)
    std::vector<std::pair<std::string, std::string>> formula_rows;
};

ModelBundle build_model(const RunConfig& cfg);

void cmd_formula(const RunConfig& cfg, std::ostream& out);
void cmd_estimate(const RunConfig& cfg, std::ostream& out);
void cmd_sweep_epsilon(double eps_min, double eps_max, int steps, std::ostream& out);

// Full front end over argv-style args (no program name). Returns the exit
// code: 0 success, 2 config error, 3 computation error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace regdim

#endif

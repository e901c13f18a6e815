#include "regdim/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "regdim/estimators.hpp"
#include "regdim/self_similar.hpp"
#include "regdim/sponge.hpp"
#include "regdim/tangent.hpp"

namespace regdim {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string::npos) comma = text.size();
        out.push_back(trim(text.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
    throw ConfigError(key + ": " + why);
}

double parse_double_token(const std::string& key, const std::string& token) {
    if (token.empty()) bad_key(key, "empty value");
    if (token.find('/') != std::string::npos) {
        try {
            return to_double(parse_rational(token));
        } catch (const std::invalid_argument& e) {
            bad_key(key, std::string("bad fraction '") + token + "': " + e.what());
        }
    }
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size()) bad_key(key, "not a number: '" + token + "'");
    if (!std::isfinite(v)) bad_key(key, "value must be finite");
    return v;
}

// Fractions become exact rationals; decimals become the exact value of their
// binary rounding. Reports whether the token was written as a fraction.
Rational parse_exact_token(const std::string& key, const std::string& token, bool* fraction) {
    if (token.empty()) bad_key(key, "empty value");
    if (token.find('/') != std::string::npos) {
        if (fraction) *fraction = true;
        try {
            return parse_rational(token);
        } catch (const std::invalid_argument& e) {
            bad_key(key, std::string("bad fraction '") + token + "': " + e.what());
        }
    }
    if (fraction) *fraction = false;
    return rational_from_double(parse_double_token(key, token));
}

long parse_long_token(const std::string& key, const std::string& token) {
    if (token.empty()) bad_key(key, "empty value");
    char* end = nullptr;
    const long v = std::strtol(token.c_str(), &end, 10);
    if (end != token.c_str() + token.size()) bad_key(key, "not an integer: '" + token + "'");
    return v;
}

bool parse_bool_token(const std::string& key, const std::string& token) {
    if (token == "true") return true;
    if (token == "false") return false;
    bad_key(key, "expected true or false, got '" + token + "'");
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string fmt_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::string config_hash(const std::string& raw, unsigned long long seed, double tol) {
    const std::string tag =
        raw + "\x1f" + "seed=" + std::to_string(seed) + ";tol=" + fmt_double(tol);
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(tag)));
    return buf;
}

const std::set<std::string>& estimator_names() {
    static const std::set<std::string> names{"dimreg",        "sup_local", "T",
                                             "box_support",   "assouad_support",
                                             "chain",         "doubling",  "nondoubling"};
    return names;
}

}  // namespace

const std::string* ConfigFile::find(const std::string& key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return &v;
    return nullptr;
}

ConfigFile parse_config_text(const std::string& text) {
    ConfigFile file;
    file.raw = text;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": entry before any [section]");
        const std::string key = section + "." + trim(line.substr(0, eq));
        if (file.find(key))
            throw ConfigError(key + ": duplicate key");
        file.entries.emplace_back(key, trim(line.substr(eq + 1)));
    }
    return file;
}

ConfigFile load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

RunConfig make_run_config(const ConfigFile& file) {
    RunConfig cfg;

    const std::string* family = file.find("model.family");
    if (!family) throw ConfigError("model.family: missing");
    cfg.family = *family;
    if (cfg.family != "selfsimilar" && cfg.family != "sponge" && cfg.family != "sequence" &&
        cfg.family != "lens")
        bad_key("model.family", "unknown family '" + cfg.family + "'");

    std::set<std::string> allowed{"model.family",     "grid.base",        "grid.exp_min",
                                  "grid.exp_max",     "grid.gap_min",     "grid.gap_max",
                                  "estimators.run",   "estimators.samples",
                                  "output.path",      "run.seed",         "run.threads",
                                  "run.tol"};
    if (cfg.family == "selfsimilar")
        allowed.insert({"model.ratios", "model.shifts", "model.weights"});
    if (cfg.family == "sponge") allowed.insert("model.epsilon");
    if (cfg.family == "sequence")
        allowed.insert({"model.x", "model.p", "model.cache_terms"});
    if (cfg.family == "lens")
        allowed.insert({"model.lenses", "model.cell", "model.restricted", "model.indices"});
    for (const auto& [key, value] : file.entries)
        if (!allowed.count(key)) bad_key(key, "unknown key");

    auto required = [&](const std::string& key) -> const std::string& {
        const std::string* v = file.find(key);
        if (!v) throw ConfigError(key + ": missing");
        return *v;
    };

    if (cfg.family == "selfsimilar") {
        const std::vector<std::string> rt = split_list(required("model.ratios"));
        const std::vector<std::string> st = split_list(required("model.shifts"));
        const std::vector<std::string> wt = split_list(required("model.weights"));
        if (rt.empty() || rt.size() != st.size() || rt.size() != wt.size())
            bad_key("model.ratios", "ratios, shifts and weights need equal nonzero lengths");
        cfg.weights_exact = true;
        for (std::size_t i = 0; i < rt.size(); ++i) {
            const double c = parse_double_token("model.ratios", rt[i]);
            if (!(c > 0.0 && c < 1.0)) bad_key("model.ratios", "ratios must lie in (0,1)");
            cfg.ratios.push_back(c);
            cfg.shifts.push_back(parse_double_token("model.shifts", st[i]));
            bool fraction = false;
            Rational w = parse_exact_token("model.weights", wt[i], &fraction);
            if (!(w > 0)) bad_key("model.weights", "weights must be positive");
            cfg.weights_exact = cfg.weights_exact && fraction;
            cfg.weights.push_back(std::move(w));
        }
        if (cfg.weights_exact) {
            Rational sum = 0;
            for (const Rational& w : cfg.weights) sum += w;
            if (sum != 1) bad_key("model.weights", "exact weights must sum to 1");
        } else {
            double sum = 0.0;
            for (const Rational& w : cfg.weights) sum += to_double(w);
            if (std::fabs(sum - 1.0) > 1e-12) bad_key("model.weights", "weights must sum to 1");
        }
    } else if (cfg.family == "sponge") {
        cfg.epsilon = parse_double_token("model.epsilon", required("model.epsilon"));
        if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 0.5))
            bad_key("model.epsilon", "epsilon must lie in (0, 1/2]");
    } else if (cfg.family == "sequence") {
        auto parse_seq = [&](const std::string& key) -> SeqParam {
            std::istringstream in(required(key));
            std::string kind, num, extra;
            in >> kind >> num;
            if (in >> extra) bad_key(key, "expected 'poly v' or 'exp v'");
            SeqKind k;
            if (kind == "poly")
                k = SeqKind::kPoly;
            else if (kind == "exp")
                k = SeqKind::kExp;
            else
                bad_key(key, "unknown kind '" + kind + "' (want poly or exp)");
            return SeqParam{k, parse_double_token(key, num)};
        };
        cfg.x_param = parse_seq("model.x");
        cfg.p_param = parse_seq("model.p");
        if (cfg.x_param.kind == SeqKind::kPoly && !(cfg.x_param.value > 0.0))
            bad_key("model.x", "poly exponent must be positive");
        if (cfg.x_param.kind == SeqKind::kExp &&
            !(cfg.x_param.value > 0.0 && cfg.x_param.value < 1.0))
            bad_key("model.x", "exp base must lie in (0,1)");
        if (cfg.p_param.kind == SeqKind::kPoly && !(cfg.p_param.value > 1.0))
            bad_key("model.p", "poly weights need an exponent above 1");
        if (cfg.p_param.kind == SeqKind::kExp &&
            !(cfg.p_param.value > 0.0 && cfg.p_param.value < 1.0))
            bad_key("model.p", "exp base must lie in (0,1)");
        if (const std::string* v = file.find("model.cache_terms")) {
            cfg.cache_terms = parse_long_token("model.cache_terms", *v);
            if (cfg.cache_terms < 1000) bad_key("model.cache_terms", "need at least 1000");
        }
    } else {  // lens
        cfg.lens_count = static_cast<int>(parse_long_token(
            "model.lenses", file.find("model.lenses") ? *file.find("model.lenses") : "6"));
        if (cfg.lens_count < 1 || cfg.lens_count > 20)
            bad_key("model.lenses", "lens count must lie in 1..20");
        cfg.lens_cell = parse_double_token("model.cell", required("model.cell"));
        const double r_min = std::ldexp(1.0, -cfg.lens_count);
        if (!(cfg.lens_cell > 0.0 && cfg.lens_cell <= r_min * r_min / 4.0))
            bad_key("model.cell", "cell must lie in (0, (finest lens radius)^2 / 4]");
        if (const std::string* v = file.find("model.restricted"))
            cfg.lens_restricted = parse_bool_token("model.restricted", *v);
        if (const std::string* v = file.find("model.indices")) {
            for (const std::string& tok : split_list(*v)) {
                const long i = parse_long_token("model.indices", tok);
                if (i < 1 || i > cfg.lens_count)
                    bad_key("model.indices", "index out of lens range");
                cfg.lens_indices.push_back(static_cast<int>(i));
            }
        } else {
            for (int i = 5; i <= std::min(cfg.lens_count, 10); ++i)
                cfg.lens_indices.push_back(i);
        }
        if (cfg.lens_indices.empty()) bad_key("model.indices", "empty index list");
    }

    auto grid_int = [&](const std::string& key, int dflt) -> int {
        const std::string* v = file.find(key);
        return v ? static_cast<int>(parse_long_token(key, *v)) : dflt;
    };
    if (const std::string* v = file.find("grid.base"))
        cfg.grid.base = parse_double_token("grid.base", *v);
    cfg.grid.exp_min = grid_int("grid.exp_min", cfg.grid.exp_min);
    cfg.grid.exp_max = grid_int("grid.exp_max", cfg.grid.exp_max);
    cfg.grid.gap_min = grid_int("grid.gap_min", cfg.grid.gap_min);
    cfg.grid.gap_max = grid_int("grid.gap_max", cfg.grid.gap_max);
    try {
        cfg.grid.validate();
    } catch (const std::invalid_argument& e) {
        bad_key("grid", e.what());
    }

    if (const std::string* v = file.find("estimators.run")) {
        for (const std::string& tok : split_list(*v)) {
            if (!estimator_names().count(tok))
                bad_key("estimators.run", "unknown estimator '" + tok + "'");
            if (tok == "nondoubling" && cfg.family != "lens")
                bad_key("estimators.run", "nondoubling needs the lens family");
            cfg.estimators.push_back(tok);
        }
    }
    if (const std::string* v = file.find("estimators.samples")) {
        cfg.extra_samples = static_cast<int>(parse_long_token("estimators.samples", *v));
        if (cfg.extra_samples < 0) bad_key("estimators.samples", "must be nonnegative");
    }

    if (const std::string* v = file.find("output.path")) cfg.out_path = *v;
    if (const std::string* v = file.find("run.seed")) {
        const long s = parse_long_token("run.seed", *v);
        if (s < 0) bad_key("run.seed", "must be nonnegative");
        cfg.seed = static_cast<unsigned long long>(s);
    }
    if (const std::string* v = file.find("run.threads")) {
        cfg.threads = static_cast<int>(parse_long_token("run.threads", *v));
        if (cfg.threads < 1) bad_key("run.threads", "need at least one thread");
    }
    if (const std::string* v = file.find("run.tol")) {
        cfg.tol = parse_double_token("run.tol", *v);
        if (!(cfg.tol > 0.0)) bad_key("run.tol", "tolerance must be positive");
    }

    cfg.hash_hex = config_hash(file.raw, cfg.seed, cfg.tol);
    return cfg;
}

ModelBundle build_model(const RunConfig& cfg) {
    ModelBundle bundle;
    if (cfg.family == "selfsimilar") {
        std::vector<SimilarityMap> maps;
        for (std::size_t i = 0; i < cfg.ratios.size(); ++i)
            maps.push_back(make_similarity_1d(cfg.ratios[i], cfg.shifts[i]));
        SelfSimilarSystem sys;
        if (cfg.weights_exact) {
            sys = build_selfsimilar(std::move(maps), cfg.weights);
        } else {
            std::vector<double> w;
            for (const Rational& r : cfg.weights) w.push_back(to_double(r));
            sys = build_selfsimilar(std::move(maps), std::move(w));
        }
        bundle.formula_rows.emplace_back("dimreg_formula",
                                         fmt_double(regularity_dimension(sys)));
        auto model = std::make_unique<SelfSimilarModel>(std::move(sys));
        bundle.sample_points = model->witnesses();
        bundle.model = std::move(model);
    } else if (cfg.family == "sponge") {
        const BadCarpetCurves curves = badcarpet_family(cfg.epsilon);
        bundle.formula_rows.emplace_back("dimreg_formula", fmt_double(curves.dim_reg));
        bundle.formula_rows.emplace_back("T_formula", fmt_double(curves.top_spectrum));
        bundle.formula_rows.emplace_back("sup_local_formula", fmt_double(curves.sup_local));
        bundle.formula_rows.emplace_back("assouad_formula", fmt_double(curves.dim_assouad));
        auto model = std::make_unique<SpongeModel>(make_badcarpet_system(cfg.epsilon));
        bundle.sample_points = model->witnesses();
        try {
            // mass-ratio extremal code across the grid's scale span
            bundle.sample_points.push_back(model->register_code(extremal_code(
                model->system(), cfg.grid.radius(cfg.grid.exp_max),
                cfg.grid.radius(cfg.grid.exp_min))));
        } catch (const std::invalid_argument&) {
            // grid too shallow for the interleaving: witnesses only
        }
        bundle.model = std::move(model);
    } else if (cfg.family == "sequence") {
        auto model = std::make_unique<SequenceMeasure>(
            cfg.x_param, cfg.p_param, static_cast<std::size_t>(cfg.cache_terms));
        const SeqDimFormula formula = dim_reg_formula_seq(*model);
        bundle.formula_rows.emplace_back(
            "dimreg_formula", formula.infinite ? "inf" : fmt_double(formula.value));
        bundle.sample_points = model->witnesses();
        const int mid = (cfg.grid.exp_min + cfg.grid.exp_max) / 2;
        for (int e : {cfg.grid.exp_max, mid}) {
            try {
                for (const Point& p : model->scale_witnesses(cfg.grid.radius(e)))
                    bundle.sample_points.push_back(p);
            } catch (const std::exception&) {
                // scale probe unavailable at this depth: witnesses cover it
            }
        }
        bundle.model = std::move(model);
    } else {
        bundle.formula_rows.emplace_back("dimreg_formula", "no closed form");
        auto model = std::make_unique<LensMeasure>(cfg.lens_count, cfg.lens_cell,
                                                   cfg.lens_restricted);
        bundle.sample_points = model->witnesses();
        bundle.model = std::move(model);
    }

    // de-duplicate while keeping first-seen order
    std::vector<Point> unique;
    for (const Point& p : bundle.sample_points)
        if (std::find(unique.begin(), unique.end(), p) == unique.end()) unique.push_back(p);
    bundle.sample_points = std::move(unique);
    return bundle;
}

void cmd_formula(const RunConfig& cfg, std::ostream& out) {
    const ModelBundle bundle = build_model(cfg);
    std::ostringstream buf;
    buf << "# config " << cfg.hash_hex << "\n";
    buf << "quantity,value\n";
    for (const auto& [quantity, value] : bundle.formula_rows)
        buf << csv_field(quantity) << "," << csv_field(value) << "\n";
    out << buf.str();
}

namespace {

struct EstimateRow {
    std::string estimator;
    std::string value;
    std::string witness_x;
    std::string witness_r;
    std::string witness_R;
    std::string gap;
    std::string runtime_ms;
    std::string error;
};

class RowTimer {
public:
    explicit RowTimer(bool enabled)
        : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
    std::string done() const {
        if (!enabled_) return "";
        const double ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - start_)
                              .count();
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", ms);
        return buf;
    }

private:
    bool enabled_;
    std::chrono::steady_clock::time_point start_;
};

void run_one_estimator(const std::string& name, const RunConfig& cfg,
                       const MeasureModel& model, const std::vector<Point>& samples,
                       const EstimatorOptions& opts, std::vector<EstimateRow>& rows) {
    RowTimer timer(cfg.timings);
    if (name == "dimreg") {
        const DimEstimate est =
            estimate_upper_regularity(model, cfg.grid, samples, cfg.tol, opts);
        const int gap = static_cast<int>(std::lround(
            std::log(est.witness_R / est.witness_r) / std::log(cfg.grid.base)));
        rows.push_back({name, est.infinite ? "inf" : fmt_double(est.value),
                        format_point(est.witness_x), fmt_double(est.witness_r),
                        fmt_double(est.witness_R), std::to_string(gap), timer.done(), ""});
    } else if (name == "sup_local") {
        double best = -std::numeric_limits<double>::infinity();
        Point arg;
        for (const Point& w : model.witnesses()) {
            const double v = estimate_local_dim_upper(model, w, cfg.grid, opts);
            if (v > best) {
                best = v;
                arg = w;
            }
        }
        rows.push_back({name, fmt_double(best), format_point(arg), "", "", "", timer.done(),
                        ""});
    } else if (name == "T") {
        const LqSpectrumEstimate est =
            estimate_T(model, {-1.0, -2.0, -5.0, -10.0, -20.0}, cfg.grid, opts);
        rows.push_back({name, fmt_double(est.T_hat), "", "", "", "", timer.done(), ""});
    } else if (name == "box_support") {
        rows.push_back({name, fmt_double(-estimate_tau(model, 0.0, cfg.grid, opts).tau_hat),
                        "", "", "", "", timer.done(), ""});
    } else if (name == "assouad_support") {
        rows.push_back({name, fmt_double(estimate_assouad_support(model, cfg.grid, samples,
                                                                  opts)),
                        "", "", "", "", timer.done(), ""});
    } else if (name == "chain") {
        const ChainReport rep = verify_dimension_chain(model, cfg.grid, samples, opts);
        const std::string ms = timer.done();
        rows.push_back({"sup_local", fmt_double(rep.sup_local_hat), "", "", "", "", ms, ""});
        rows.push_back({"T", fmt_double(rep.T_hat), "", "", "", "", ms, ""});
        rows.push_back({"dimreg", fmt_double(rep.dimreg_hat), "", "", "", "", ms, ""});
        rows.push_back({"box_support", fmt_double(rep.box_support_hat), "", "", "", "", ms,
                        ""});
        rows.push_back({"assouad_support", fmt_double(rep.assouad_support_hat), "", "", "",
                        "", ms, ""});
        for (const ChainReport::Violation& v : rep.violations)
            rows.push_back({"violation", fmt_double(v.slack), "", "", "", "", ms,
                            v.name + " broken: " + fmt_double(v.lhs) + " > " +
                                fmt_double(v.rhs)});
    } else if (name == "doubling") {
        for (const double theta : {0.5, 0.25}) {
            RowTimer inner(cfg.timings);
            const double bound =
                log_doubling_constant(model, theta, cfg.grid, samples, opts) /
                (-std::log(theta));
            rows.push_back({theta == 0.5 ? "doubling_half" : "doubling_quarter",
                            fmt_double(bound), "", fmt_double(theta), "", "", inner.done(),
                            ""});
        }
    } else {  // nondoubling (lens family enforced at config time)
        const auto* lens = dynamic_cast<const LensMeasure*>(&model);
        if (!lens) throw ComputationError("nondoubling needs the lens model");
        for (const auto& [i, ratio] : nondoubling_ratios(*lens, cfg.lens_indices)) {
            const double r = lens->lens_radius(i);
            rows.push_back({"nondoubling_" + std::to_string(i), fmt_double(ratio),
                            format_point(lens->lens_center(i)), fmt_double(r),
                            fmt_double(2.0 * r), "", "", ""});
        }
        if (!rows.empty()) rows.back().runtime_ms = timer.done();
    }
}

}  // namespace

void cmd_estimate(const RunConfig& cfg, std::ostream& out) {
    if (cfg.estimators.empty()) throw ConfigError("estimators.run: missing");
    const ModelBundle bundle = build_model(cfg);

    std::vector<Point> samples = bundle.sample_points;
    if (cfg.extra_samples > 0) {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_int_distribution<std::size_t> pick(0, bundle.sample_points.size() - 1);
        for (int i = 0; i < cfg.extra_samples; ++i)
            samples.push_back(bundle.sample_points[pick(rng)]);
    }

    EstimatorOptions opts;
    opts.threads = cfg.threads;
    opts.seed = cfg.seed;
    opts.mass_tol = cfg.tol;

    std::vector<EstimateRow> rows;
    for (const std::string& name : cfg.estimators) {
        try {
            run_one_estimator(name, cfg, *bundle.model, samples, opts, rows);
        } catch (const std::exception& e) {
            rows.push_back({name, "", "", "", "", "", "", e.what()});
        }
    }

    std::ostringstream buf;
    buf << "# config " << cfg.hash_hex << "\n";
    buf << "estimator,value,witness_x,witness_r,witness_R,gap,runtime_ms,error\n";
    for (const EstimateRow& r : rows)
        buf << csv_field(r.estimator) << "," << csv_field(r.value) << ","
            << csv_field(r.witness_x) << "," << csv_field(r.witness_r) << ","
            << csv_field(r.witness_R) << "," << csv_field(r.gap) << ","
            << csv_field(r.runtime_ms) << "," << csv_field(r.error) << "\n";
    out << buf.str();
}

void cmd_sweep_epsilon(double eps_min, double eps_max, int steps, std::ostream& out) {
    if (!(eps_min > 0.0 && eps_min < eps_max && eps_max <= 0.5))
        throw ConfigError("sweep range: need 0 < eps_min < eps_max <= 1/2");
    if (steps < 2) throw ConfigError("sweep steps: need at least 2");

    const std::string tag = "sweep;" + fmt_double(eps_min) + ";" + fmt_double(eps_max) + ";" +
                            std::to_string(steps);
    std::ostringstream buf;
    buf << "# config " << config_hash(tag, 0, 0.0) << "\n";
    buf << "epsilon,dimreg,T,sup_local,assouad\n";

    double prev_dimreg = std::numeric_limits<double>::infinity();
    double prev_T = std::numeric_limits<double>::infinity();
    for (int i = 0; i < steps; ++i) {
        const double eps = i + 1 == steps
                               ? eps_max
                               : eps_min + (eps_max - eps_min) * i / (steps - 1);
        const BadCarpetCurves c = badcarpet_family(eps);
        if (!(c.dim_reg < prev_dimreg) || !(c.top_spectrum < prev_T))
            throw ComputationError("sweep monotonicity broken at epsilon = " +
                                   fmt_double(eps));
        prev_dimreg = c.dim_reg;
        prev_T = c.top_spectrum;
        buf << fmt_double(eps) << "," << fmt_double(c.dim_reg) << ","
            << fmt_double(c.top_spectrum) << "," << fmt_double(c.sup_local) << ","
            << fmt_double(c.dim_assouad) << "\n";
    }
    out << buf.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"regularity dimension toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    unsigned long long seed = 0;
    int threads = 1;
    double tol = 1e-6;
    bool timings = false;
    double eps_min = 0.0, eps_max = 0.0;
    int steps = 50;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        CLI::Option* c = sub->add_option("--config", config_path, "config file path");
        if (needs_config) c->required();
        sub->add_option("--out", out_path, "output file (default stdout)");
        sub->add_option("--seed", seed, "sampling seed");
        sub->add_option("--threads", threads, "worker threads");
        sub->add_option("--tol", tol, "mass enclosure tolerance");
    };

    CLI::App* formula = app.add_subcommand("formula", "closed-form values for the model");
    add_common(formula, true);
    CLI::App* estimate = app.add_subcommand("estimate", "run configured estimators");
    add_common(estimate, true);
    estimate->add_flag("--timings", timings, "record real runtimes (not reproducible)");
    CLI::App* sweep = app.add_subcommand("sweep", "epsilon family curve table");
    add_common(sweep, false);
    sweep->add_option("--eps-min", eps_min, "sweep start")->required();
    sweep->add_option("--eps-max", eps_max, "sweep end")->required();
    sweep->add_option("--steps", steps, "row count");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    }

    try {
        std::ostringstream buf;
        if (sweep->parsed()) {
            cmd_sweep_epsilon(eps_min, eps_max, steps, buf);
        } else {
            CLI::App* active = formula->parsed() ? formula : estimate;
            const ConfigFile file = load_config(config_path);
            RunConfig cfg = make_run_config(file);
            if (active->count("--seed")) cfg.seed = seed;
            if (active->count("--threads")) cfg.threads = threads;
            if (active->count("--tol")) cfg.tol = tol;
            cfg.timings = timings;
            cfg.hash_hex = config_hash(file.raw, cfg.seed, cfg.tol);
            if (!active->count("--out")) out_path = cfg.out_path;
            if (formula->parsed())
                cmd_formula(cfg, buf);
            else
                cmd_estimate(cfg, buf);
        }
        if (out_path.empty()) {
            out << buf.str();
        } else {
            std::ofstream f(out_path, std::ios::binary);
            if (!f) throw ComputationError("cannot open output file '" + out_path + "'");
            f << buf.str();
        }
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "computation error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace regdim

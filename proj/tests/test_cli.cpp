#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "regdim/cli.hpp"
#include "regdim/rational.hpp"

using namespace regdim;

namespace {

struct CliRun {
    int rc = 0;
    std::string out;
    std::string err;
};

CliRun cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    CliRun r;
    r.rc = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string cfg_file(const std::string& stem, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / ("regdim_" + stem + ".cfg");
    std::ofstream(path) << text;
    return path.string();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

// naive split: none of the asserted rows carry quoted commas
std::vector<std::string> csv_fields(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string field;
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::string config_error_of(const std::string& text) {
    try {
        make_run_config(parse_config_text(text));
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

const char* kCantorCfg =
    "[model]\n"
    "family = selfsimilar\n"
    "ratios = 1/3, 1/3\n"
    "shifts = 0, 2/3\n"
    "weights = 1/2, 1/2\n"
    "\n"
    "[grid]\n"
    "base = 3\n"
    "exp_min = 1\n"
    "exp_max = 12\n"
    "gap_min = 10\n"
    "gap_max = 11\n"
    "\n"
    "[estimators]\n"
    "run = dimreg\n";

}  // namespace

TEST_CASE("config text parses into flattened key value pairs") {
    const ConfigFile file = parse_config_text(
        "# leading comment\n"
        "[model]\n"
        "family = selfsimilar   # trailing comment\n"
        "ratios = 1/3, 1/3\n"
        "\n"
        "[run]\n"
        "seed = 9\n");
    REQUIRE(file.entries.size() == 3);
    CHECK(file.entries[0].first == "model.family");
    CHECK(file.entries[0].second == "selfsimilar");
    CHECK(file.entries[1].second == "1/3, 1/3");
    CHECK(file.entries[2].first == "run.seed");
    REQUIRE(file.find("run.seed") != nullptr);
    CHECK(*file.find("run.seed") == "9");
    CHECK(file.find("run.threads") == nullptr);

    CHECK_THROWS_AS(parse_config_text("[model]\na = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("orphan = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[model\nfamily = lens\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[model]\nno equals sign here\n"), ConfigError);
}

TEST_CASE("config validation names the offending key") {
    auto contains = [](const std::string& hay, const std::string& needle) {
        return hay.find(needle) != std::string::npos;
    };
    CHECK(contains(config_error_of("[model]\nratios = 1/2\n"), "model.family"));
    CHECK(contains(config_error_of("[model]\nfamily = cantor\n"), "model.family"));
    CHECK(contains(config_error_of(std::string(kCantorCfg) + "\n[model2]\n"), "model.family") ==
          false);  // unknown section only matters once a key lands in it

    const std::string base = kCantorCfg;
    CHECK(contains(config_error_of(base + "bogus = 3\n"), "estimators.bogus"));
    CHECK(contains(config_error_of(
                       "[model]\nfamily = selfsimilar\nratios = 1/3\nshifts = 0, 1\n"
                       "weights = 1\n"),
                   "model.ratios"));
    CHECK(contains(config_error_of(
                       "[model]\nfamily = selfsimilar\nratios = 1/3, 3/2\nshifts = 0, 1\n"
                       "weights = 1/2, 1/2\n"),
                   "model.ratios"));
    CHECK(contains(config_error_of(
                       "[model]\nfamily = selfsimilar\nratios = 1/3, 1/3\nshifts = 0, 1\n"
                       "weights = 1/2, 1/3\n"),
                   "model.weights"));
    CHECK(contains(config_error_of(
                       "[model]\nfamily = selfsimilar\nratios = 1/3, 1/3\nshifts = 0, 1\n"
                       "weights = 0.5, 0.49\n"),
                   "model.weights"));
    CHECK(contains(config_error_of("[model]\nfamily = sponge\nepsilon = 0.7\n"),
                   "model.epsilon"));
    CHECK(contains(config_error_of("[model]\nfamily = sponge\nepsilon = nope\n"),
                   "model.epsilon"));
    CHECK(contains(config_error_of("[model]\nfamily = sequence\nx = cubic 1\np = poly 2\n"),
                   "model.x"));
    CHECK(contains(config_error_of("[model]\nfamily = sequence\nx = poly 1\np = poly 1\n"),
                   "model.p"));
    CHECK(contains(config_error_of("[model]\nfamily = lens\ncell = 0.01\n"), "model.cell"));
    CHECK(contains(config_error_of(
                       "[model]\nfamily = lens\ncell = 0.0001\nlenses = 4\nindices = 5\n"),
                   "model.indices"));
    CHECK(contains(config_error_of(base + "samples = -1\n"), "estimators.samples"));
    CHECK(contains(config_error_of(
                       std::string(kCantorCfg) + "\n[run]\nthreads = 0\n"),
                   "run.threads"));
    CHECK(contains(config_error_of(std::string(kCantorCfg) + "\n[run]\ntol = 0\n"),
                   "run.tol"));
    CHECK(contains(config_error_of(
                       "[model]\nfamily = sponge\nepsilon = 0.25\n"
                       "[grid]\nexp_min = 9\nexp_max = 3\n"),
                   "grid"));
    CHECK(contains(config_error_of(base + "run = dimreg, entropy\n"), "estimators.run"));
    CHECK(contains(config_error_of(base + "run = nondoubling\n"), "estimators.run"));
}

TEST_CASE("fractions stay exact while decimals round") {
    RunConfig exact = make_run_config(parse_config_text(
        "[model]\nfamily = selfsimilar\nratios = 1/3, 1/3\nshifts = 0, 2/3\n"
        "weights = 7/10, 3/10\n"));
    CHECK(exact.weights_exact);
    CHECK(exact.weights[0] == parse_rational("7/10"));
    CHECK(exact.weights[1] == parse_rational("3/10"));
    CHECK(exact.ratios[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-16));

    RunConfig reduced = make_run_config(parse_config_text(
        "[model]\nfamily = selfsimilar\nratios = 1/3, 1/3\nshifts = 0, 2/3\n"
        "weights = 2/6, 2/3\n"));
    CHECK(reduced.weights[0] == parse_rational("1/3"));

    // one decimal is enough to drop the exact path
    RunConfig rounded = make_run_config(parse_config_text(
        "[model]\nfamily = selfsimilar\nratios = 1/3, 1/3\nshifts = 0, 2/3\n"
        "weights = 0.7, 3/10\n"));
    CHECK(!rounded.weights_exact);
    CHECK(to_double(rounded.weights[0]) == 0.7);

    CHECK_THROWS_AS(make_run_config(parse_config_text(
                        "[model]\nfamily = selfsimilar\nratios = 1/3\nshifts = 0\n"
                        "weights = 1.2.3\n")),
                    ConfigError);
}

TEST_CASE("formula tables carry closed forms and a config stamp") {
    const std::string cantor = cfg_file("formula_cantor",
                                        "[model]\n"
                                        "family = selfsimilar\n"
                                        "ratios = 1/3, 1/3\n"
                                        "shifts = 0, 2/3\n"
                                        "weights = 7/10, 3/10\n");
    CliRun r = cli({"formula", "--config", cantor});
    REQUIRE(r.rc == 0);
    auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0].rfind("# config ", 0) == 0);
    CHECK(lines[0].size() == 9 + 16);
    CHECK(lines[1] == "quantity,value");
    auto row = csv_fields(lines[2]);
    CHECK(row[0] == "dimreg_formula");
    CHECK(std::stod(row[1]) == doctest::Approx(1.0959032742893846).epsilon(1e-12));

    const std::string sponge =
        cfg_file("formula_sponge", "[model]\nfamily = sponge\nepsilon = 0.5\n");
    r = cli({"formula", "--config", sponge});
    REQUIRE(r.rc == 0);
    lines = lines_of(r.out);
    REQUIRE(lines.size() == 6);
    auto dimreg = csv_fields(lines[2]);
    auto assouad = csv_fields(lines[5]);
    CHECK(dimreg[0] == "dimreg_formula");
    CHECK(assouad[0] == "assouad_formula");
    CHECK(std::stod(dimreg[1]) == doctest::Approx(1.1309297535714573).epsilon(1e-12));
    CHECK(dimreg[1] == assouad[1]);  // the coordinate-uniform corner of the family

    const std::string seq = cfg_file("formula_seq",
                                     "[model]\nfamily = sequence\nx = poly 1\np = exp 0.5\n");
    r = cli({"formula", "--config", seq});
    REQUIRE(r.rc == 0);
    CHECK(lines_of(r.out)[2] == "dimreg_formula,inf");

    const std::string lens =
        cfg_file("formula_lens", "[model]\nfamily = lens\ncell = 0.0002\nlenses = 5\n");
    r = cli({"formula", "--config", lens});
    REQUIRE(r.rc == 0);
    CHECK(lines_of(r.out)[2] == "dimreg_formula,no closed form");
}

TEST_CASE("estimate rows follow the configured estimator list") {
    const std::string path = cfg_file("estimate_cantor", kCantorCfg);
    const CliRun r = cli({"estimate", "--config", path});
    REQUIRE(r.rc == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 3);
    CHECK(lines[1] == "estimator,value,witness_x,witness_r,witness_R,gap,runtime_ms,error");
    const auto row = csv_fields(lines[2]);
    REQUIRE(row.size() == 8);
    CHECK(row[0] == "dimreg");
    CHECK(std::stod(row[1]) ==
          doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(1e-9));
    CHECK(std::stod(row[3]) > 0.0);
    CHECK(std::stod(row[4]) > std::stod(row[3]));
    const int gap = std::stoi(row[5]);
    CHECK(gap >= 10);
    CHECK(gap <= 11);
    CHECK(row[6] == "");  // runtimes are opt-in
    CHECK(row[7] == "");
}

TEST_CASE("estimate continues past a failing estimator") {
    const std::string path = cfg_file("estimate_lens_mixed",
                                      "[model]\n"
                                      "family = lens\n"
                                      "lenses = 5\n"
                                      "cell = 0.000244140625\n"
                                      "restricted = false\n"
                                      "indices = 5\n"
                                      "\n"
                                      "[grid]\n"
                                      "exp_min = 2\n"
                                      "exp_max = 10\n"
                                      "gap_min = 4\n"
                                      "gap_max = 8\n"
                                      "\n"
                                      "[estimators]\n"
                                      "run = nondoubling, dimreg\n");
    const CliRun r = cli({"estimate", "--config", path});
    REQUIRE(r.rc == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 4);
    const auto failed = csv_fields(lines[2]);
    CHECK(failed[0] == "nondoubling");
    CHECK(failed[1] == "");
    CHECK(failed[7].find("restricted") != std::string::npos);
    const auto ok = csv_fields(lines[3]);
    CHECK(ok[0] == "dimreg");
    CHECK(std::stod(ok[1]) > 0.0);
    CHECK(ok[7] == "");
}

TEST_CASE("lens nondoubling rows increase along the sequence") {
    const std::string path = cfg_file("estimate_lens",
                                      "[model]\n"
                                      "family = lens\n"
                                      "lenses = 6\n"
                                      "cell = 0.00006103515625\n"
                                      "indices = 5, 6\n"
                                      "\n"
                                      "[estimators]\n"
                                      "run = nondoubling\n");
    const CliRun r = cli({"estimate", "--config", path});
    REQUIRE(r.rc == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 4);
    const auto r5 = csv_fields(lines[2]);
    const auto r6 = csv_fields(lines[3]);
    CHECK(r5[0] == "nondoubling_5");
    CHECK(r6[0] == "nondoubling_6");
    const double v5 = std::stod(r5[1]);
    const double v6 = std::stod(r6[1]);
    CHECK(v5 == doctest::Approx(62.745553965608018).epsilon(1e-12));
    CHECK(v6 == doctest::Approx(82.90083988072476).epsilon(1e-12));
    CHECK(v6 > v5);
    CHECK(std::stod(r5[4]) == doctest::Approx(2.0 * std::stod(r5[3])).epsilon(1e-15));
}

TEST_CASE("sweep emits the family curves with monotone columns") {
    CliRun r = cli({"sweep", "--eps-min", "0.05", "--eps-max", "0.45", "--steps", "5"});
    REQUIRE(r.rc == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 7);
    CHECK(lines[1] == "epsilon,dimreg,T,sup_local,assouad");
    double prev_dim = 1e300, prev_T = 1e300;
    for (int i = 2; i < 7; ++i) {
        const auto row = csv_fields(lines[i]);
        REQUIRE(row.size() == 5);
        const double dim = std::stod(row[1]);
        const double T = std::stod(row[2]);
        CHECK(dim < prev_dim);
        CHECK(T < prev_T);
        prev_dim = dim;
        prev_T = T;
    }
    const auto mid = csv_fields(lines[4]);
    CHECK(std::stod(mid[0]) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(std::stod(mid[1]) == doctest::Approx(2.5543407575034927).epsilon(1e-12));
    CHECK(std::stod(mid[2]) == doctest::Approx(1.7618595071429148).epsilon(1e-12));
    CHECK(std::stod(mid[3]) == doctest::Approx(1.5543407575034929).epsilon(1e-12));
    CHECK(std::stod(mid[4]) == doctest::Approx(1.1309297535714573).epsilon(1e-12));

    r = cli({"sweep", "--eps-min", "0.25", "--eps-max", "0.5", "--steps", "2"});
    REQUIRE(r.rc == 0);
    const auto last = csv_fields(lines_of(r.out).back());
    CHECK(std::stod(last[0]) == 0.5);
    CHECK(last[1] == last[4]);  // dimreg meets assouad at the right endpoint
    CHECK(std::stod(last[1]) == doctest::Approx(1.1309297535714573).epsilon(1e-12));
}

TEST_CASE("sweep shows the local branch switch at the critical epsilon") {
    const CliRun r = cli({"sweep", "--eps-min", "0.0651729585024", "--eps-max",
                          "0.0671729585024", "--steps", "3"});
    REQUIRE(r.rc == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 5);
    const auto a = csv_fields(lines[2]);
    const auto b = csv_fields(lines[3]);
    const auto c = csv_fields(lines[4]);
    const double supA = std::stod(a[3]), supB = std::stod(b[3]), supC = std::stod(c[3]);
    const double tA = std::stod(a[2]), tB = std::stod(b[2]), tC = std::stod(c[2]);
    // below the switch the local branch rides exactly 1/2 under T
    CHECK(supA == doctest::Approx(tA - 0.5).epsilon(1e-12));
    CHECK(supB == doctest::Approx(tB - 0.5).epsilon(1e-12));
    // above it the other branch takes over
    CHECK(supC > tC - 0.5 + 1e-3);
    // derivative kink: the local column bends, the smooth columns do not
    const double h = 0.001;
    const double local_kink = std::fabs((supC - supB) - (supB - supA)) / h;
    const double dim_kink =
        std::fabs((std::stod(c[1]) - std::stod(b[1])) -
                  (std::stod(b[1]) - std::stod(a[1]))) /
        h;
    CHECK(local_kink > 2.0);
    CHECK(dim_kink < 1.0);
}

TEST_CASE("seed and tolerance stamp the hash but threads do not") {
    const std::string path = cfg_file("estimate_hash", kCantorCfg);
    const CliRun base = cli({"estimate", "--config", path});
    const CliRun again = cli({"estimate", "--config", path});
    const CliRun threaded = cli({"estimate", "--config", path, "--threads", "4"});
    const CliRun seeded = cli({"estimate", "--config", path, "--seed", "7"});
    const CliRun tighter = cli({"estimate", "--config", path, "--tol", "1e-7"});
    REQUIRE(base.rc == 0);
    REQUIRE(threaded.rc == 0);
    CHECK(base.out == again.out);
    CHECK(base.out == threaded.out);

    const auto base_lines = lines_of(base.out);
    const auto seed_lines = lines_of(seeded.out);
    CHECK(base_lines[0] != seed_lines[0]);
    CHECK(base_lines[2] == seed_lines[2]);  // no random samples: rows unchanged
    CHECK(lines_of(tighter.out)[0] != base_lines[0]);
}

TEST_CASE("exit codes separate config from computation failures") {
    CliRun r = cli({"estimate", "--config", "/no/such/file.cfg"});
    CHECK(r.rc == 2);
    CHECK(r.err.find("config error") != std::string::npos);

    CHECK(cli({"estimate"}).rc == 2);           // --config required
    CHECK(cli({"orbit"}).rc == 2);              // unknown subcommand
    CHECK(cli({}).rc == 2);                     // subcommand required
    CHECK(cli({"estimate", "--config", "x", "--warp", "9"}).rc == 2);
    CHECK(cli({"sweep", "--eps-min", "0.4", "--eps-max", "0.2"}).rc == 2);
    CHECK(cli({"sweep", "--eps-min", "0.1", "--eps-max", "0.6"}).rc == 2);
    CHECK(cli({"sweep", "--eps-min", "0.1", "--eps-max", "0.2", "--steps", "1"}).rc == 2);

    const std::string noest = cfg_file("exit_noest",
                                       "[model]\nfamily = sponge\nepsilon = 0.25\n");
    r = cli({"estimate", "--config", noest});
    CHECK(r.rc == 2);
    CHECK(r.err.find("estimators.run") != std::string::npos);

    const std::string cantor = cfg_file("exit_cantor", kCantorCfg);
    r = cli({"formula", "--config", cantor, "--out", "/no_such_dir/out.csv"});
    CHECK(r.rc == 3);
    CHECK(r.err.find("computation error") != std::string::npos);

    r = cli({"--help"});
    CHECK(r.rc == 0);
    CHECK(r.out.find("Usage") != std::string::npos);
}

TEST_CASE("output lands in the requested file") {
    const std::string path = cfg_file("out_cantor", kCantorCfg);
    const auto target = std::filesystem::temp_directory_path() / "regdim_out.csv";
    std::filesystem::remove(target);
    const CliRun direct = cli({"formula", "--config", path});
    const CliRun filed = cli({"formula", "--config", path, "--out", target.string()});
    REQUIRE(filed.rc == 0);
    CHECK(filed.out.empty());
    std::ifstream in(target);
    std::ostringstream content;
    content << in.rdbuf();
    CHECK(content.str() == direct.out);
}

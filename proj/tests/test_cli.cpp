#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <unistd.h>

#include "capdist/spec_io.hpp"
#include "cli_app.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kData = CAPDIST_TEST_DATA;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "capdist");
    std::ostringstream out, err;
    const int code = capdist::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

// "key = value [unit]" lines; for repeated keys the last one wins unless a unit distinguishes it.
std::map<std::string, std::string> fields(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq), value = line.substr(eq + 3);
        const auto sp = value.find(' ');
        if (sp != std::string::npos) {
            key += "[" + value.substr(sp + 1) + "]";
            value = value.substr(0, sp);
        }
        out[key] = value;
    }
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch_dir() {
    auto dir = fs::temp_directory_path() / ("capdist_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

const std::string kScalar = "scalar_multiplicative r=0.4";

}  // namespace

TEST_CASE("dstar") {
    SUBCASE("scalar preset") {
        const auto r = cli({"dstar", "--preset", kScalar});
        CHECK(r.code == 0);
        CHECK(r.out.find("0\t0.4\t0 -") != std::string::npos);
        CHECK(r.out.find("1\t0\t0 1") != std::string::npos);
    }
    SUBCASE("additive mod-2") {
        const auto r = cli({"dstar", "--preset", "additive_mod2 r=0.3"});
        CHECK(r.code == 0);
        CHECK(r.out.find("0\t0\t") != std::string::npos);
        CHECK(r.out.find("1\t0\t") != std::string::npos);
    }
    SUBCASE("spec file") { CHECK(cli({"dstar", kData + "/scalar_r04.json"}).code == 0); }
    SUBCASE("missing state_prior") {
        const auto r = cli({"dstar", kData + "/missing_prior.json"});
        CHECK(r.code == 2);
        CHECK(r.err.find("state_prior") != std::string::npos);
    }
    SUBCASE("neither file nor preset") { CHECK(cli({"dstar"}).code == 2); }
}

TEST_CASE("point") {
    SUBCASE("D = 0.1") {
        const auto r = cli({"point", "--preset", kScalar, "--distortion", "0.1"});
        CHECK(r.code == 0);
        const auto f = fields(r.out);
        CHECK(std::stod(f.at("C(D)[nats]")) == doctest::Approx(0.106105551797951).epsilon(1e-8));
        CHECK(f.at("constraint_active") == "true");
    }
    SUBCASE("negative D is infeasible") {
        const auto r = cli({"point", "--preset", kScalar, "--distortion", "-0.5"});
        CHECK(r.code == 3);
        CHECK(r.err.find("d_min=0") != std::string::npos);
    }
    SUBCASE("bits") {
        const auto r = cli({"point", "--preset", kScalar, "--distortion", "0.5", "--bits"});
        CHECK(r.code == 0);
        const auto f = fields(r.out);
        const double nats = std::stod(f.at("C(D)[nats]")), bits = std::stod(f.at("C(D)[bits]"));
        CHECK(std::abs(bits - nats / std::log(2.0)) <= 1e-12 * bits);
        CHECK(bits == doctest::Approx(0.245986254666522).epsilon(1e-9));
    }
    SUBCASE("unparseable D") { CHECK(cli({"point", "--preset", kScalar, "--distortion", "abc"}).code == 2); }
    SUBCASE("missing D") { CHECK(cli({"point", "--preset", kScalar}).code == 2); }
}

TEST_CASE("curve") {
    const auto dir = scratch_dir();
    SUBCASE("50-point grid") {
        const auto path = (dir / "grid.csv").string();
        const auto r = cli({"curve", "--preset", "scalar_multiplicative r=0.3", "--grid", "50", "--out", path});
        CHECK(r.code == 0);
        std::ifstream in(path);
        const auto rows = capdist::io::read_curve_csv(in);
        CHECK(rows.size() == 50);
        for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].capacity_nats >= rows[i - 1].capacity_nats);
        const auto f = fields(r.out);
        CHECK(f.count("d_min"));
        CHECK(f.count("d_max"));
        CHECK(f.count("C_max[nats]"));
    }
    SUBCASE("explicit list matches point") {
        const auto path = (dir / "list.csv").string();
        CHECK(cli({"curve", "--preset", kScalar, "--d-list", "0,0.05,0.1", "--out", path}).code == 0);
        std::ifstream in(path);
        const auto rows = capdist::io::read_curve_csv(in);
        REQUIRE(rows.size() == 3);
        for (const auto& row : rows) {
            const auto p = cli({"point", "--preset", kScalar, "--distortion", capdist::io::format_number(row.distortion)});
            CHECK(std::stod(fields(p.out).at("C(D)[nats]")) == doctest::Approx(row.capacity_nats).epsilon(1e-11));
        }
    }
    SUBCASE("single point is the unconstrained capacity") {
        const auto r = cli({"curve", "--preset", kScalar, "--grid", "1"});
        CHECK(r.code == 0);
        std::istringstream in(r.out);
        const auto rows = capdist::io::read_curve_csv(in);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].capacity_nats == doctest::Approx(0.170504678878601).epsilon(1e-10));
        CHECK_FALSE(rows[0].constraint_active);
    }
    SUBCASE("budgets below d_min are skipped with a warning") {
        const auto r = cli({"curve", "--preset", kScalar, "--d-list", "-0.1,0.1"});
        CHECK(r.code == 3);
        CHECK(r.err.find("-0.1") != std::string::npos);
        std::istringstream in(r.out);
        CHECK(capdist::io::read_curve_csv(in).size() == 1);
    }
    SUBCASE("re-emitting a CSV is byte-identical") {
        const auto path = (dir / "round.csv").string();
        CHECK(cli({"curve", "--preset", kScalar, "--grid", "7", "--out", path}).code == 0);
        std::ifstream in(path);
        std::ostringstream again;
        capdist::io::write_curve_csv(again, capdist::io::read_curve_csv(in));
        CHECK(again.str() == slurp(path));
    }
    SUBCASE("grid and list together") {
        CHECK(cli({"curve", "--preset", kScalar, "--grid", "3", "--d-list", "0.1"}).code == 2);
    }
    fs::remove_all(dir);
}

TEST_CASE("cpud") {
    SUBCASE("scalar: both methods") {
        const auto r = cli({"cpud", "--preset", kScalar});
        CHECK(r.code == 0);
        CHECK(r.out.find("ratio formula: 1.277064059") != std::string::npos);
        CHECK(r.out.find("sup definition: 1.277") != std::string::npos);
    }
    SUBCASE("block K=2") {
        const auto r = cli({"cpud", "--preset", "block_multiplicative r=0.3 K=2"});
        CHECK(r.code == 0);
        CHECK(r.out.find("infinite \xE2\x80\x94 multiple zero-cost letters") != std::string::npos);
    }
    SUBCASE("all-zero distortion") {
        const auto r = cli({"cpud", kData + "/zero_distortion.json"});
        CHECK(r.code == 0);
        CHECK(r.out.find("infinite") != std::string::npos);
    }
}

TEST_CASE("compound") {
    SUBCASE("two priors") {
        const auto r = cli({"compound", kData + "/compound_r03_r04.json", "--distortion", "0.05"});
        CHECK(r.code == 0);
        const double v = std::stod(fields(r.out).at("C(D)[nats]"));
        CHECK(std::abs(v - oracle::scalar_compound_grid({0.3, 0.4}, 0.05)) <= 5e-4);
    }
    SUBCASE("singleton matches point") {
        const auto c = cli({"compound", "--preset", kScalar, "--distortion", "0.1"});
        const auto p = cli({"point", "--preset", kScalar, "--distortion", "0.1"});
        CHECK(std::stod(fields(c.out).at("C(D)[nats]")) ==
              doctest::Approx(std::stod(fields(p.out).at("C(D)[nats]"))).epsilon(1e-7));
    }
    SUBCASE("infeasible") {
        CHECK(cli({"compound", kData + "/compound_r03_r04.json", "--distortion", "-0.1"}).code == 3);
    }
}

TEST_CASE("simulate") {
    SUBCASE("optimal input for D = 0.1") {
        const auto r = cli({"simulate", "--preset", kScalar, "--optimal-for", "0.1", "--samples", "100000", "--seed", "1"});
        CHECK(r.code == 0);
        CHECK(std::abs(std::stod(fields(r.out).at("empirical_distortion")) - 0.1) <= 0.003);
    }
    SUBCASE("always sending 0") {
        const auto r = cli({"simulate", "--preset", kScalar, "--px", "1,0", "--samples", "100000"});
        CHECK(r.code == 0);
        CHECK(std::stod(fields(r.out).at("empirical_distortion")) == doctest::Approx(0.4).epsilon(0.01));
    }
    SUBCASE("same seed, same bytes") {
        const std::vector<std::string> args{"simulate", "--preset", kScalar, "--px", "0.3,0.7", "--seed", "9"};
        const auto a = cli(args), b = cli(args);
        CHECK(a.code == 0);
        CHECK(a.out == b.out);
    }
    SUBCASE("bad distribution") { CHECK(cli({"simulate", "--preset", kScalar, "--px", "0.5,0.6"}).code == 2); }
}

TEST_CASE("analytic") {
    SUBCASE("scalar comparison") {
        const auto r = cli({"analytic", "--model", "scalar", "--r", "0.4", "--compare", "--points", "10"});
        CHECK(r.code == 0);
        CHECK(std::stod(fields(r.out).at("max_abs_diff[nats]")) <= 1e-6);
    }
    SUBCASE("block K=2, r=0.1 is Case 1") {
        const auto r = cli({"analytic", "--model", "block", "--r", "0.1", "--K", "2", "--compare"});
        CHECK(r.code == 0);
        CHECK(r.out.find("case = 1") != std::string::npos);
        CHECK(std::stod(fields(r.out).at("max_abs_diff[nats]")) <= 1e-5);
    }
    SUBCASE("block K=10, r=0.5 training ratio") {
        const auto r = cli({"analytic", "--model", "block", "--r", "0.5", "--K", "10"});
        CHECK(r.code == 0);
        CHECK(std::stod(fields(r.out).at("C(0)/R(0)")) == doctest::Approx(std::log(1023.0) / (9 * std::log(2.0))));
    }
    SUBCASE("bad model") { CHECK(cli({"analytic", "--model", "cubic", "--r", "0.4"}).code == 2); }
    SUBCASE("r out of range") { CHECK(cli({"analytic", "--model", "scalar", "--r", "0.7"}).code == 2); }
}

TEST_CASE("top level") {
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
}

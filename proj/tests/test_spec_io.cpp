#include <doctest.h>

#include <sstream>

#include "capdist/analytic.hpp"
#include "capdist/errors.hpp"
#include "capdist/spec_io.hpp"

using namespace capdist;

namespace {
const std::string kData = CAPDIST_TEST_DATA;
}

TEST_CASE("explicit spec file") {
    const auto f = io::load_spec_file(kData + "/scalar_r04.json");
    CHECK(f.model.input_size() == 2);
    CHECK(f.model.state_prior()[1] == doctest::Approx(0.4));
    CHECK_FALSE(f.compound.has_value());
    CHECK(optimal_estimator(f.model).cost_vector[0] == doctest::Approx(0.4));
}

TEST_CASE("missing field is named") {
    try {
        io::load_spec_file(kData + "/missing_prior.json");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("`state_prior`") != std::string::npos);
    }
}

TEST_CASE("invalid row is named") {
    try {
        io::load_spec_file(kData + "/bad_row.json");
        FAIL("expected NotAProbability");
    } catch (const NotAProbability& e) {
        CHECK(std::string(e.what()).find("x=1") != std::string::npos);
    }
}

TEST_CASE("presets") {
    CHECK(io::parse_preset("additive_mod2 r=0.3").input_size() == 2);
    CHECK(io::parse_preset("block_multiplicative r=0.3 K=3").input_size() == 8);
    CHECK_THROWS_AS(io::parse_preset("block_multiplicative r=0.3"), ParseError);
    CHECK_THROWS_AS(io::parse_preset("scalar_multiplicative r=abc"), ParseError);
    CHECK_THROWS_AS(io::parse_preset("scalar_multiplicative r=0.3 q=1"), ParseError);
    CHECK_THROWS_AS(io::parse_preset("nonsense"), ParseError);
}

TEST_CASE("compound block") {
    const auto f = io::load_spec_file(kData + "/compound_r03_r04.json");
    REQUIRE(f.compound.has_value());
    CHECK(f.compound->size() == 2);
    CHECK(f.compound->member(0).state_prior()[1] == doctest::Approx(0.3));
}

TEST_CASE("malformed documents") {
    CHECK_THROWS_AS(io::parse_spec_text("{"), ParseError);
    CHECK_THROWS_AS(io::parse_spec_text("[1, 2]"), ParseError);
    CHECK_THROWS_AS(io::parse_spec_text(R"({"preset": "additive_mod2 r=0.3", "state_prior": [1]})"), ParseError);
    CHECK_THROWS_AS(io::parse_spec_text(R"({"sizes": {"x": "two", "y": 2, "s": 2}})"), ParseError);
    CHECK_THROWS_AS(io::load_spec_file(kData + "/does_not_exist.json"), ParseError);
}

TEST_CASE("curve CSV round trip is byte-identical") {
    const std::vector<double> grid{0.0, 0.05, 0.1, 0.3};
    const auto curve = cd_curve(analytic::scalar_multiplicative_model(0.4), grid);
    std::ostringstream first;
    io::write_curve_csv(first, io::curve_rows(curve));
    std::istringstream in(first.str());
    const auto rows = io::read_curve_csv(in);
    REQUIRE(rows.size() == 4);
    CHECK(rows[3].constraint_active == false);
    CHECK(rows[1].constraint_active == true);
    std::ostringstream second;
    io::write_curve_csv(second, rows);
    CHECK(first.str() == second.str());
    CHECK(first.str().rfind(std::string(io::kCurveHeader) + "\n", 0) == 0);
    CHECK(first.str().find('\r') == std::string::npos);
}

TEST_CASE("curve CSV reader rejects malformed input") {
    std::istringstream bad_header("D,C\n");
    CHECK_THROWS_AS(io::read_curve_csv(bad_header), ParseError);
    std::istringstream unsorted(std::string(io::kCurveHeader) + "\n0.2,1,1,true\n0.1,1,1,true\n");
    CHECK_THROWS_AS(io::read_curve_csv(unsorted), ParseError);
    std::istringstream bad_flag(std::string(io::kCurveHeader) + "\n0.2,1,1,yes\n");
    CHECK_THROWS_AS(io::read_curve_csv(bad_flag), ParseError);
}

TEST_CASE("number lists") {
    CHECK(io::parse_number_list("0, 0.05,0.1", "x") == std::vector<double>{0.0, 0.05, 0.1});
    CHECK_THROWS_AS(io::parse_number_list("0,,1", "x"), ParseError);
    CHECK_THROWS_AS(io::parse_number_list("", "x"), ParseError);
}

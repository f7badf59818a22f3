#include "kgci/errors.hpp"
#include "kgci/io.hpp"
#include "kgci/performance.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace kgci;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "kgci_io_test";
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream out(p);
    out << s;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("family JSON round trip") {
    const auto fam = IntervalFamily::build(40.0, 1, 0.05, {0, 15, 18, 21, 24, 27, 30, 40},
                                           {0.1, 0.3, 0.5, 0.4, 0.2, 0.1}, {0, 2, 4, 6, 8, 10, 25, 40},
                                           {9, 10, 11, 12, 12.5, 13, 13.2});
    const auto path = scratch("family.json");
    io::write_json(path, io::family_to_json(fam));
    const auto back = io::read_family(path);
    CHECK(back.values_b() == fam.values_b());
    CHECK(back.values_s() == fam.values_s());
    CHECK(back.knots_s() == fam.knots_s());
    for (double x : {0.5, 17.0, 33.3}) {
        CHECK(back.eval_b(x) == fam.eval_b(x));
        CHECK(back.eval_s(x) == fam.eval_s(x));
    }
}

TEST_CASE("curve CSV keeps full precision") {
    const auto fam = IntervalFamily::reverted(10.0, 3, 0.05, {0, 10}, {0, 5, 10});
    const std::vector<double> grid{0.0, 1.0 / 3.0};
    const auto c = performance::curves(fam, 0.2, grid);
    const auto path = scratch("curves.csv");
    io::write_curves_csv(path, c);
    std::ifstream in(path);
    std::string header, row0, row1;
    std::getline(in, header);
    std::getline(in, row0);
    std::getline(in, row1);
    CHECK(header == "gamma,coverage,sel,sel_squared");
    CHECK(std::stod(row1.substr(0, row1.find(','))) == 1.0 / 3.0);
}

TEST_CASE("syntax errors carry line and column") {
    const auto path = scratch("bad.json");
    write_text(path, "{\n  \"d\": 40,\n  \"m\": ,\n}\n");
    try {
        io::read_json(path);
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
}

TEST_CASE("field errors name the field") {
    io::json j = {{"d", 12}, {"m", "one"}, {"alpha", 0.05}, {"knots_b", {0, 12}}, {"values_b", io::json::array()},
                  {"knots_s", {0, 12}}, {"values_s", {12.0}}};
    try {
        io::family_from_json(j);
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("'m'") != std::string::npos);
    }
    j["m"] = 1;
    j["knots_s"] = {0, 15, 12};
    CHECK_THROWS_AS(io::family_from_json(j), ConfigError);
}

TEST_CASE("optimize config expands lists into runs") {
    const io::json j = {{"rho", {0.2, 0.4}}, {"m", 200}, {"xi", 0.15}, {"d", 6},
                        {"knots_b", {0, 3, 6}}, {"knots_s", {0, 2, 4, 6}}};
    const auto f = io::optimize_from_json(j, ".");
    REQUIRE(f.runs.size() == 2);
    CHECK(f.runs[1].config.rho == 0.4);
    CHECK(f.runs[0].config.m == 200);
    CHECK(f.runs[0].label != f.runs[1].label);

    io::json bad = j;
    bad.erase("xi");
    CHECK_THROWS_AS(io::optimize_from_json(bad, "."), ConfigError);
}

TEST_CASE("problem files and responses") {
    const auto path = scratch("problem.json");
    write_text(path, R"({"X": [[1, 0], [1, 1], [1, 2], [1, 4]], "a": [0, 1], "c": [1, 0], "t": 0.5})");
    const auto pf = io::read_problem(path);
    CHECK(pf.problem.X(3, 1) == 4.0);
    CHECK(pf.problem.t == 0.5);
    CHECK(pf.alpha == 0.05);
    const auto ypath = scratch("y.csv");
    write_text(ypath, "y\n1.5\n-2\n3e-1\n\n4\n");
    const auto y = io::read_response(ypath);
    REQUIRE(y.size() == 4);
    CHECK(y(2) == 0.3);
    write_text(ypath, "1\nfoo\n");
    CHECK_THROWS_AS(io::read_response(ypath), ConfigError);
}

TEST_CASE("svg plot output") {
    io::LinePlot plot{"title <1>", "x", "y", {{"a", {0, 1, 2}, {1, 3, 2}}}, 2.0};
    const auto svg = io::render_svg(plot);
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("title &lt;1&gt;") != std::string::npos);
    const auto path = scratch("manifest");
    io::write_manifest(path, io::make_manifest("kgci optimize", "c.json", path.string(), 5));
    const auto m = io::read_json(path / "manifest.json");
    CHECK(m["seed"] == 5);
    CHECK(read_text(path / "manifest.json").find("tool_version") != std::string::npos);
}

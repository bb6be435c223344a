#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "ftme/errors.hpp"
#include "ftme/fieldio.hpp"

using namespace ftme;

namespace {

ScalarField2D ramp(int nx, int ny)
{
    const Grid2D g{0.0, 1.0, -1.0, 1.0, nx, ny};
    ScalarField2D f(g);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            f.at(i, j) = i + 10.0 * j;
        }
    }
    return f;
}

}  // namespace

TEST_CASE("grid spec parsing")
{
    const Grid2D g = Grid2D::parse("-2:2:-1.5:1.5:201x151");
    CHECK(g.x_min == -2.0);
    CHECK(g.y_max == 1.5);
    CHECK(g.nx == 201);
    CHECK(g.ny == 151);
    CHECK(g.x(200) == 2.0);
    CHECK(g.dx() == doctest::Approx(0.02));
    CHECK(Grid2D::parse(g.to_spec()).nx == 201);
    CHECK_THROWS_AS(Grid2D::parse("1:2:3"), InvalidArgument);
    CHECK_THROWS_AS(Grid2D::parse("0:1:0:1:1x5"), InvalidArgument);
    CHECK_THROWS_AS(Grid2D::parse("1:0:0:1:5x5"), InvalidArgument);
    CHECK_THROWS_AS(Grid2D::parse("0:1:0:1:5xq"), InvalidArgument);
}

TEST_CASE("CSV round trip")
{
    ScalarField2D f = ramp(4, 3);
    f.at(1, 1) = 0.1 + 0.2;
    const ScalarField2D back = parse_csv(to_csv(f));
    CHECK(back.grid.nx == 4);
    CHECK(back.grid.ny == 3);
    CHECK(back.values == f.values);
    CHECK(to_csv(f).rfind("x,y,value,valid\n", 0) == 0);
}

TEST_CASE("masked nodes are written as the valid maximum")
{
    ScalarField2D f = ramp(3, 2);
    f.mask[0] = 0;
    const std::string csv = to_csv(f);
    CHECK(csv.find("0,-1,12,0\n") != std::string::npos);
    const ScalarField2D back = parse_csv(csv);
    CHECK_FALSE(back.valid(0, 0));
    CHECK(back.valid_count() == 5);
}

TEST_CASE("CSV parse errors carry line numbers")
{
    CHECK_THROWS_AS(parse_csv("a,b\n"), IoError);
    try {
        parse_csv("x,y,value,valid\n0,0,1,1\n1,0,2\n");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_csv("x,y,value,valid\n0,0,1,1\n1,0,2,1\n0,1,3,1\n"), IoError);
    CHECK_THROWS_AS(parse_csv("x,y,value,valid\n0,0,1,1\n1,0,nan?,1\n0,1,1,1\n1,1,1,1\n"), IoError);
}

TEST_CASE("PGM layout")
{
    const ScalarField2D f = ramp(3, 2);
    const std::string pgm = to_pgm(f);
    const std::string header = "P5\n3 2\n255\n";
    REQUIRE(pgm.size() == header.size() + 6);
    CHECK(pgm.substr(0, header.size()) == header);
    const auto px = [&](int k) { return static_cast<unsigned char>(pgm[header.size() + k]); };
    // top row is the larger y, i.e. values 10..12
    CHECK(px(2) == 255);
    CHECK(px(3) == 0);
    CHECK(px(0) > px(5));
}

TEST_CASE("PGM edge cases")
{
    ScalarField2D c(Grid2D{0, 1, 0, 1, 2, 2});
    for (auto& v : c.values) {
        v = 3.0;
    }
    const std::string pgm = to_pgm(c);
    CHECK(static_cast<unsigned char>(pgm.back()) == 128);
    CHECK_THROWS_AS(to_pgm(c, std::pair{1.0, 1.0}), InvalidArgument);
    ScalarField2D m = ramp(2, 2);
    m.mask[3] = 0;
    CHECK(static_cast<unsigned char>(to_pgm(m)[11 + 1]) == 0);
}

TEST_CASE("file export and import")
{
    const auto dir = std::filesystem::temp_directory_path() / "ftme_fieldio_test";
    std::filesystem::create_directories(dir);
    const ScalarField2D f = ramp(5, 4);
    export_csv(f, dir / "f.csv");
    export_pgm(f, dir / "f.pgm");
    CHECK(import_csv(dir / "f.csv").values == f.values);
    CHECK(std::filesystem::file_size(dir / "f.pgm") == 11 + 20);
    CHECK_THROWS_AS(import_csv(dir / "missing.csv"), IoError);
    CHECK_THROWS_AS(export_csv(f, dir / "no" / "such" / "dir.csv"), IoError);
    std::filesystem::remove_all(dir);
}

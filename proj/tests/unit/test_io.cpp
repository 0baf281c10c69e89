#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "pixant/io.hpp"

using namespace pixant;
using Catch::Matchers::WithinAbs;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

MultiportZ random_multiport(int n, int n_freq, std::uint32_t seed) {
    std::mt19937 gen(seed);
    constexpr double inv32 = 1.0 / 4294967296.0;
    MultiportZ z;
    std::vector<double> freqs;
    for (int i = 0; i < n_freq; ++i) freqs.push_back(1.0 + i + gen() * inv32);
    z.sweep = FrequencySweep::from_list(freqs);
    for (int f = 0; f < n_freq; ++f) {
        Eigen::MatrixXcd m(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                m(r, c) = Complex(200.0 * (gen() * inv32) - 100.0, 200.0 * (gen() * inv32) - 100.0);
        z.matrices.push_back(m);
    }
    return z;
}

} // namespace

TEST_CASE("touchstone: one-port RI fixture") {
    std::istringstream in("# GHz Z RI R 50\n1.0 50.0 0.0\n");
    const LoadedMultiport lm = parse_touchstone(in, 1);
    CHECK(lm.z0 == 50.0);
    REQUIRE(lm.z.matrices.size() == 1);
    CHECK(lm.z.sweep[0] == 1.0);
    CHECK(lm.z.matrices[0](0, 0) == Complex(50.0, 0.0));
}

TEST_CASE("touchstone: MA values and MHz unit") {
    std::istringstream in("# MHz Z MA R 50\n1000 100 0\n");
    const LoadedMultiport lm = parse_touchstone(in, 1);
    CHECK_THAT(lm.z.sweep[0], WithinAbs(1.0, 1e-12));
    CHECK_THAT(lm.z.matrices[0](0, 0).real(), WithinAbs(100.0, 1e-9));
    CHECK_THAT(lm.z.matrices[0](0, 0).imag(), WithinAbs(0.0, 1e-9));
}

TEST_CASE("touchstone: MA angle conversion") {
    std::istringstream in("# GHz Z MA R 50\n2.0 10 90\n");
    const LoadedMultiport lm = parse_touchstone(in, 1);
    CHECK_THAT(lm.z.matrices[0](0, 0).real(), WithinAbs(0.0, 1e-9));
    CHECK_THAT(lm.z.matrices[0](0, 0).imag(), WithinAbs(10.0, 1e-9));
}

TEST_CASE("touchstone: two-port pair order is 11 21 12 22") {
    std::istringstream in("# GHz Z RI R 50\n1.0 1 0 2 0 3 0 4 0\n");
    const LoadedMultiport lm = parse_touchstone(in, 2);
    const auto& z = lm.z.matrices[0];
    CHECK(z(0, 0) == Complex(1, 0));
    CHECK(z(1, 0) == Complex(2, 0));
    CHECK(z(0, 1) == Complex(3, 0));
    CHECK(z(1, 1) == Complex(4, 0));
}

TEST_CASE("touchstone: comments, blank lines, wrapped rows") {
    std::istringstream in(
        "! header comment\n"
        "# GHz Z RI R 75\n"
        "\n"
        "1.0 1 0 0 0 0 0   ! row 1\n"
        "    0 0 2 0 0 0\n"
        "    0 0 0 0 3 0\n");
    const LoadedMultiport lm = parse_touchstone(in, 3);
    CHECK(lm.z0 == 75.0);
    CHECK(lm.z.matrices[0](0, 0) == Complex(1, 0));
    CHECK(lm.z.matrices[0](1, 1) == Complex(2, 0));
    CHECK(lm.z.matrices[0](2, 2) == Complex(3, 0));
}

TEST_CASE("touchstone: rejections") {
    SECTION("S-parameters unsupported") {
        std::istringstream in("# GHz S RI R 50\n1.0 0.5 0.0\n");
        CHECK_THROWS_AS(parse_touchstone(in, 1), UnsupportedFormat);
    }
    SECTION("DB format unsupported") {
        std::istringstream in("# GHz Z DB R 50\n1.0 0.5 0.0\n");
        CHECK_THROWS_AS(parse_touchstone(in, 1), UnsupportedFormat);
    }
    SECTION("unknown unit") {
        std::istringstream in("# THz Z RI R 50\n1.0 0.5 0.0\n");
        CHECK_THROWS_AS(parse_touchstone(in, 1), UnitError);
    }
    SECTION("garbled option token") {
        std::istringstream in("# GHz Z RI Q 50\n1.0 0.5 0.0\n");
        CHECK_THROWS_AS(parse_touchstone(in, 1), ParseError);
    }
    SECTION("wrong column count") {
        std::istringstream in("# GHz Z RI R 50\n1.0 50.0\n");
        CHECK_THROWS_AS(parse_touchstone(in, 1), ParseError);
    }
    SECTION("non-numeric data") {
        std::istringstream in("# GHz Z RI R 50\n1.0 fifty 0.0\n");
        CHECK_THROWS_AS(parse_touchstone(in, 1), ParseError);
    }
    SECTION("data before option line") {
        std::istringstream in("1.0 50.0 0.0\n# GHz Z RI R 50\n");
        CHECK_THROWS_AS(parse_touchstone(in, 1), ParseError);
    }
    SECTION("non-ascending frequencies") {
        std::istringstream in("# GHz Z RI R 50\n2.0 1 0\n1.0 1 0\n");
        CHECK_THROWS_AS(parse_touchstone(in, 1), ParseError);
    }
}

TEST_CASE("port count inferred from the file extension") {
    const std::string path = temp_path("pixant_io_test.z3p");
    {
        const MultiportZ z = random_multiport(3, 4, 11);
        save_multiport_touchstone(z, 50.0, path);
    }
    const LoadedMultiport lm = load_multiport_file(path);
    CHECK(lm.z.n_ports() == 3);
    std::remove(path.c_str());
}

TEST_CASE("touchstone round trip is accurate to printed precision") {
    const MultiportZ z = random_multiport(4, 6, 23);
    const std::string path = temp_path("pixant_io_test.z4p");
    save_multiport_touchstone(z, 50.0, path);
    const LoadedMultiport lm = load_multiport_file(path);
    REQUIRE(lm.z.matrices.size() == z.matrices.size());
    for (std::size_t f = 0; f < z.matrices.size(); ++f) {
        CHECK_THAT(lm.z.sweep[f], WithinAbs(z.sweep[f], 1e-9 * z.sweep[f]));
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                CHECK(std::abs(lm.z.matrices[f](r, c) - z.matrices[f](r, c)) <=
                      1e-9 * (1.0 + std::abs(z.matrices[f](r, c))));
    }
    std::remove(path.c_str());
}

TEST_CASE("json round trip is bit-exact") {
    const MultiportZ z = random_multiport(3, 5, 37);
    const std::string path = temp_path("pixant_io_test.json");
    save_multiport_json(z, 50.0, path);
    const LoadedMultiport lm = load_multiport_file(path);
    CHECK(lm.z0 == 50.0);
    REQUIRE(lm.z.sweep.freq_ghz() == z.sweep.freq_ghz());
    for (std::size_t f = 0; f < z.matrices.size(); ++f)
        CHECK(lm.z.matrices[f] == z.matrices[f]);
    std::remove(path.c_str());
}

TEST_CASE("missing file and format inference failures") {
    CHECK_THROWS_AS(load_multiport_file("/nonexistent/file.z2p"), ConfigError);
    CHECK_THROWS_AS(infer_format("matrix.dat"), ConfigError);
    CHECK(infer_format("a.s2p") == MultiportFormat::touchstone);
    CHECK(infer_format("a.json") == MultiportFormat::json);
}

TEST_CASE("curve CSV round trip") {
    ReflectionCurve curve;
    curve.sweep = FrequencySweep::uniform(1.0, 2.0, 3);
    curve.gamma = {Complex(0.5, 0.1), Complex(-0.25, 0.0), Complex(0.0, 0.0)};
    curve.mag_db = {-5.84, -12.04, -100.0};
    const std::string path = temp_path("pixant_curve_test.csv");
    write_curve_csv(curve, path);
    const ReflectionCurve back = read_curve_csv(path);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK_THAT(std::abs(back.gamma[i] - curve.gamma[i]), WithinAbs(0.0, 1e-12));
        CHECK_THAT(back.mag_db[i], WithinAbs(curve.mag_db[i], 1e-12));
    }
    std::remove(path.c_str());
}

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "pixant/geometry.hpp"

using namespace pixant;
using Catch::Matchers::WithinAbs;

TEST_CASE("port count formula") {
    CHECK(port_count({3, 3}) == 12);
    CHECK(port_count({1, 1}) == 0);
    CHECK(port_count({2, 4}) == 10);  // 6 horizontal + 4 vertical gaps
    CHECK(port_count({1, 2}) == 1);
    CHECK_THROWS_AS(port_count({0, 3}), ConfigError);
}

TEST_CASE("port enumeration: canonical order") {
    const PortMap p12 = enumerate_ports({1, 2});
    REQUIRE(p12.size() == 1);
    CHECK(p12[0] == InternalPort{{1, 1}, {1, 2}});

    const PortMap p22 = enumerate_ports({2, 2});
    REQUIRE(p22.size() == 4);
    CHECK(p22[0] == InternalPort{{1, 1}, {1, 2}});
    CHECK(p22[1] == InternalPort{{2, 1}, {2, 2}});
    CHECK(p22[2] == InternalPort{{1, 1}, {2, 1}});
    CHECK(p22[3] == InternalPort{{1, 2}, {2, 2}});

    const PortMap p33 = enumerate_ports({3, 3});
    REQUIRE(p33.size() == 12);
    for (std::size_t i = 0; i < 6; ++i) {  // horizontal gaps first
        CHECK(p33[i].a.row == p33[i].b.row);
        CHECK(p33[i].b.col == p33[i].a.col + 1);
    }
    for (std::size_t i = 6; i < 12; ++i) {
        CHECK(p33[i].a.col == p33[i].b.col);
        CHECK(p33[i].b.row == p33[i].a.row + 1);
    }
}

TEST_CASE("port enumeration: count, adjacency, determinism") {
    for (int rows = 1; rows <= 6; ++rows) {
        for (int cols = 1; cols <= 6; ++cols) {
            const GridShape shape{rows, cols};
            const PortMap ports = enumerate_ports(shape);
            CHECK(static_cast<int>(ports.size()) == port_count(shape));
            for (const InternalPort& p : ports) {
                const int dr = p.b.row - p.a.row;
                const int dc = p.b.col - p.a.col;
                CHECK(((dr == 0 && dc == 1) || (dr == 1 && dc == 0)));
            }
            for (std::size_t i = 0; i < ports.size(); ++i)
                for (std::size_t j = i + 1; j < ports.size(); ++j)
                    CHECK(!(ports[i] == ports[j]));
            CHECK(enumerate_ports(shape) == ports);
        }
    }
}

TEST_CASE("derived dimensions at reference designs") {
    const GridShape grid{3, 3};

    const DerivedDims at_x0 = derive_dimensions({3.0, 0.2, 0.0, 3.0}, grid);
    CHECK_THAT(at_x0.l_s, WithinAbs(15.4, 1e-12));
    CHECK_THAT(at_x0.l_m, WithinAbs(5.0, 1e-12));
    CHECK_THAT(at_x0.w_g, WithinAbs(2.0, 1e-12));
    CHECK_THAT(at_x0.l_g, WithinAbs(15.4, 1e-12));

    const DerivedDims tuned = derive_dimensions({3.55, 0.2, 1.78, 2.8}, grid);
    CHECK_THAT(tuned.l_s, WithinAbs(17.05, 1e-12));
    CHECK_THAT(tuned.l_m, WithinAbs(4.6667, 1e-4));
    CHECK_THAT(tuned.w_g, WithinAbs(1.8667, 1e-4));
    CHECK_THAT(tuned.l_g, WithinAbs(15.27, 1e-12));

    const DerivedDims at_ux = derive_dimensions({5.0, 0.6, 4.0, 5.0}, grid);
    CHECK_THAT(at_ux.l_s, WithinAbs(22.2, 1e-12));
    CHECK_THAT(at_ux.l_m, WithinAbs(8.3333, 1e-4));
    CHECK_THAT(at_ux.w_g, WithinAbs(3.3333, 1e-4));
    CHECK_THAT(at_ux.l_g, WithinAbs(18.2, 1e-12));
}

TEST_CASE("feed pair formulas stay consistent") {
    // l_m = w_g + gamma and w_g = beta * l_m must both hold.
    const DerivedDims dims = derive_dimensions({4.1, 0.3, 1.0, 3.7}, {3, 3});
    CHECK_THAT(dims.l_m, WithinAbs(dims.w_g + 3.7, 1e-12));
    CHECK_THAT(dims.w_g, WithinAbs(DerivedDims::beta * dims.l_m, 1e-12));
}

TEST_CASE("non-positive ground is rejected") {
    CHECK_THROWS_AS(derive_dimensions({3.0, 0.2, 20.0, 3.0}, {1, 1}), NonPositiveGround);
}

TEST_CASE("derivation succeeds everywhere inside the stock bounds") {
    const ParameterBounds bounds = default_bounds();
    const auto lo = bounds.lower.to_array();
    const auto hi = bounds.upper.to_array();
    std::mt19937 gen(7);
    constexpr double inv32 = 1.0 / 4294967296.0;
    for (int trial = 0; trial < 500; ++trial) {
        GeometryParams x;
        auto v = x.to_array();
        for (int k = 0; k < 4; ++k) v[k] = lo[k] + (hi[k] - lo[k]) * (gen() * inv32);
        x = GeometryParams::from_array(v);
        const DerivedDims dims = derive_dimensions(x, {3, 3});
        CHECK(dims.l_g >= 11.4 - 1e-9);
        CHECK(dims.l_s > 0.0);
        CHECK(dims.l_m > 0.0);
        CHECK(dims.w_g > 0.0);
    }
}

TEST_CASE("layout constants are fixed at compile time") {
    static_assert(DerivedDims::w_m == 3.0);
    static_assert(DerivedDims::beta == 0.4);
    static_assert(DerivedDims::o == 3.0);
    SUCCEED();
}

TEST_CASE("bounds violations name the component") {
    const ParameterBounds bounds = default_bounds();
    CHECK(bounds.first_violation({3.0, 0.2, 0.0, 3.0}) == -1);
    CHECK(bounds.first_violation({2.0, 0.2, 0.0, 3.0}) == 0);
    CHECK(bounds.first_violation({3.0, 0.2, 5.0, 3.0}) == 2);
    CHECK(std::string(GeometryParams::component_name(2)) == "alpha");
}

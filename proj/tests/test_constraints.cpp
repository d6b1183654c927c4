#include <catch2/catch_amalgamated.hpp>

#include <cmgnd/constraints.hpp>
#include <cmgnd/errors.hpp>

using cmgnd::Block;
using cmgnd::ConstraintSpec;
using cmgnd::ModelCode;
using cmgnd::Partition;

TEST_CASE("singleton spec covers every component", "[constraints]") {
    const auto spec = ConstraintSpec::singletons(3);
    CHECK(spec.mu_blocks == Partition{{0}, {1}, {2}});
    CHECK(spec.sigma_blocks == Partition{{0}, {1}, {2}});
    CHECK(spec.nu_blocks == Partition{{0}, {1}, {2}});
    spec.validate(3);
}

TEST_CASE("canonicalize sorts members and orders blocks by least member", "[constraints]") {
    ConstraintSpec spec;
    spec.mu_blocks = {{2, 1}, {0}};
    spec.sigma_blocks = {{1}, {0}, {2}};
    spec.nu_blocks = {{2}, {0, 1}};
    spec.canonicalize();
    CHECK(spec.mu_blocks == Partition{{0}, {1, 2}});
    CHECK(spec.sigma_blocks == Partition{{0}, {1}, {2}});
    CHECK(spec.nu_blocks == Partition{{0, 1}, {2}});
    spec.validate(3);
}

TEST_CASE("validate rejects broken partitions", "[constraints]") {
    ConstraintSpec spec = ConstraintSpec::singletons(3);

    SECTION("overlapping blocks") {
        spec.mu_blocks = {{0, 1}, {1, 2}};
        CHECK_THROWS_AS(spec.validate(3), cmgnd::input_error);
    }
    SECTION("index out of range") {
        spec.sigma_blocks = {{0}, {1}, {3}};
        CHECK_THROWS_AS(spec.validate(3), cmgnd::input_error);
    }
    SECTION("missing component") {
        spec.nu_blocks = {{0}, {1}};
        CHECK_THROWS_AS(spec.validate(3), cmgnd::input_error);
    }
    SECTION("empty block") {
        spec.mu_blocks = {{0, 1, 2}, {}};
        CHECK_THROWS_AS(spec.validate(3), cmgnd::input_error);
    }
    SECTION("negative index") {
        spec.mu_blocks = {{-1, 0, 1, 2}};
        CHECK_THROWS_AS(spec.validate(3), cmgnd::input_error);
    }
}

TEST_CASE("free parameter counts for the K = 2 codes", "[constraints]") {
    // (K-1) weights + one location, scale, shape parameter per block.
    const struct {
        const char* code;
        int p;
    } cases[] = {{"UUU", 7}, {"CUU", 6}, {"UCU", 6}, {"UUC", 6},
                 {"CCU", 5}, {"CUC", 5}, {"UCC", 5}, {"CCC", 4}};
    for (const auto& c : cases) {
        const auto spec = ModelCode::parse(c.code).to_spec(2);
        CHECK(cmgnd::free_parameter_count(2, spec) == c.p);
    }
}

TEST_CASE("free parameter counts for K = 3 with block {2,3}", "[constraints]") {
    const Block designated{1, 2};
    CHECK(cmgnd::free_parameter_count(3, ModelCode::parse("UUU").to_spec(3, designated)) == 11);
    CHECK(cmgnd::free_parameter_count(3, ModelCode::parse("UCU").to_spec(3, designated)) == 10);
    CHECK(cmgnd::free_parameter_count(3, ModelCode::parse("UUC").to_spec(3, designated)) == 10);
    CHECK(cmgnd::free_parameter_count(3, ModelCode::parse("UCC").to_spec(3, designated)) == 9);
}

TEST_CASE("model codes parse and print", "[constraints]") {
    const auto mc = ModelCode::parse("UCU");
    CHECK_FALSE(mc.mu_constrained);
    CHECK(mc.sigma_constrained);
    CHECK_FALSE(mc.nu_constrained);
    CHECK(mc.str() == "UCU");
    CHECK(ModelCode::parse("ccu").str() == "CCU");
    CHECK_THROWS_AS(ModelCode::parse("XCU"), cmgnd::input_error);
    CHECK_THROWS_AS(ModelCode::parse("UU"), cmgnd::input_error);
    CHECK_THROWS_AS(ModelCode::parse("UUUU"), cmgnd::input_error);
}

TEST_CASE("code expansion uses the designated block", "[constraints]") {
    const auto spec = ModelCode::parse("UCC").to_spec(3, Block{1, 2});
    CHECK(spec.mu_blocks == Partition{{0}, {1}, {2}});
    CHECK(spec.sigma_blocks == Partition{{0}, {1, 2}});
    CHECK(spec.nu_blocks == Partition{{0}, {1, 2}});
    CHECK_THROWS_AS(ModelCode::parse("UCC").to_spec(3, Block{1, 3}), cmgnd::input_error);
    CHECK_THROWS_AS(ModelCode::parse("UCC").to_spec(3, Block{}), cmgnd::input_error);
}

TEST_CASE("spec equality is structural", "[constraints]") {
    auto a = ModelCode::parse("UCU").to_spec(3, Block{1, 2});
    auto b = ModelCode::parse("UCU").to_spec(3, Block{1, 2});
    CHECK(a == b);
    const auto c = ModelCode::parse("UCU").to_spec(3, Block{0, 1});
    CHECK_FALSE(a == c);
}

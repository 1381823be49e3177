#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "rrlab/descriptors.hpp"
#include "support.hpp"

using namespace rrlab;
using nlohmann::json;

namespace {

const std::string kData = RRLAB_DATA_DIR;

void expect_same_build(const ConstructionDescriptor& a, const ConstructionDescriptor& b, int depth) {
    BuiltSystem x = build(a, depth), y = build(b, depth);
    ASSERT_EQ(x.stages.size(), y.stages.size());
    for (int k = 0; k <= depth; ++k) {
        EXPECT_EQ(x.stage(k).lefts, y.stage(k).lefts) << k;
        EXPECT_EQ(x.stage(k).width, y.stage(k).width) << k;
    }
    EXPECT_EQ(x.is_dyadic_odometer(), y.is_dyadic_odometer());
}

}  // namespace

TEST(Descriptors, ShippedSystemFilesMatchBuiltins) {
    for (const char* name : {"odometer", "rigid-spacered", "chacon"}) {
        ConstructionDescriptor file = load_system(kData + "/systems/" + name + ".json");
        expect_same_build(file, ConstructionDescriptor::builtin(name, 5), 5);
        EXPECT_EQ(file.name, name);
    }
    EXPECT_EQ(load_system(kData + "/systems/odometer.json").spacer_free_from, 0);
    EXPECT_FALSE(load_system(kData + "/systems/chacon.json").spacer_free_from.has_value());
}

TEST(Descriptors, ShippedJoiningFilesMatchBuiltins) {
    for (const auto& name : builtin_joining_names()) {
        Joining file = load_joining(kData + "/joinings/" + name + ".json");
        EXPECT_EQ(file.describe(), builtin_joining(name).describe()) << name;
    }
}

TEST(Descriptors, ExplicitSpacersAndOverrides) {
    ConstructionDescriptor d = load_system(kData + "/systems/early-spacers.json");
    EXPECT_EQ(d.cuts(0), 3);
    EXPECT_EQ(d.cuts(4), 2);
    EXPECT_EQ(d.spacers(0, 2), 1);
    EXPECT_EQ(d.spacers(1, 1), 2);
    EXPECT_EQ(d.spacers(3, 0), 0);
    EXPECT_EQ(d.spacer_free_from, 2);
    BuiltSystem sys = build(d, 4);
    EXPECT_EQ(sys.stage(1).height(), 4U);
    EXPECT_EQ(sys.stage(2).height(), 10U);
    EXPECT_TRUE(sys.closed_at(2));
    EXPECT_FALSE(sys.closed_at(1));
}

TEST(Descriptors, MaxStageOverride) {
    EXPECT_EQ(load_system("builtin:chacon", 3).max_stage, 3);
    EXPECT_EQ(load_system("builtin:chacon").max_stage, 6);
    EXPECT_EQ(load_system(kData + "/systems/chacon.json", 4).max_stage, 4);
}

TEST(Descriptors, RejectsMalformedInput) {
    EXPECT_THROW(parse_system(json::array()), InvalidInput);
    EXPECT_THROW(parse_system(json{{"name", "x"}}), InvalidInput);
    EXPECT_THROW(parse_system(json{{"cuts", json::array()}}), InvalidInput);
    EXPECT_THROW(parse_system(json{{"cuts", {1}}}), InvalidInput);
    EXPECT_THROW(parse_system(json{{"cuts", {{"formula", "cubic:1"}}}}), InvalidInput);
    EXPECT_THROW(parse_system(json{{"cuts", {2}}, {"spacers", {{0, 5, 1}}}}), InvalidInput);
    EXPECT_THROW(parse_system(json{{"cuts", {2}}, {"spacer_rule", "first:1"}}), InvalidInput);
    EXPECT_THROW(parse_system(json{{"cuts", {2}}, {"max_stage", -1}}), InvalidInput);
    EXPECT_THROW(parse_joining(json{{"type", "offdiag"}}), InvalidInput);
    EXPECT_THROW(parse_joining(json{{"type", "weird"}}), InvalidInput);
    EXPECT_THROW(parse_joining(json{{"type", "twoadic"}, {"gamma", "1/2"}}), EvenDenominator);
    EXPECT_THROW(load_system("/nonexistent/system.json"), InvalidInput);
    EXPECT_THROW(load_system("builtin:nope"), InvalidInput);
    EXPECT_THROW(load_joining("builtin:nope"), InvalidInput);

    const auto path = std::filesystem::temp_directory_path() / "rrlab_bad_descriptor.json";
    std::ofstream(path) << "{ not json";
    EXPECT_THROW(load_joining(path.string()), InvalidInput);
    std::filesystem::remove(path);
}

TEST(Rational, ParseAndPrint) {
    EXPECT_EQ(parse_rational("3/6"), make_rational(1, 2));
    EXPECT_EQ(parse_rational("-4"), -4);
    EXPECT_EQ(to_string(make_rational(-3, 8)), "-3/8");
    EXPECT_EQ(to_string(Rational(1)), "1/1");
    EXPECT_THROW(parse_rational("1/0"), InvalidInput);
    EXPECT_THROW(parse_rational("abc"), InvalidInput);
    EXPECT_THROW(make_rational(1, 0), InvalidInput);
}

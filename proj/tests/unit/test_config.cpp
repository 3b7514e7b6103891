#include <gtest/gtest.h>

#include <fstream>

#include "frel/config.hpp"
#include "frel/rng.hpp"
#include "frel/sweep.hpp"

using namespace frel;

namespace {

std::string offending_key(const json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<accepted>";
}

}  // namespace

TEST(Config, DefaultsFillEveryKey) {
    const auto c = parse_config(json{{"suite", "equivalence"}});
    EXPECT_EQ(c.suite(), "equivalence");
    EXPECT_EQ(c.integer("grid.n"), 4096);
    EXPECT_DOUBLE_EQ(c.num("grid.L"), 40.0);
    EXPECT_EQ(c.list("equivalence.s_values"), (std::vector<double>{0.3, 0.5, 0.7}));
    EXPECT_DOUBLE_EQ(c.tol("equivalence"), 1e-3);
    EXPECT_FALSE(c.maybe("linear.A"));
}

TEST(Config, DiagnosticsNameTheOffendingKey) {
    EXPECT_EQ(offending_key({{"suite", "equivalence"}, {"grid.size", 10}}), "grid.size");
    EXPECT_EQ(offending_key({{"suite", "equivalence"}, {"grid.n", "many"}}), "grid.n");
    EXPECT_EQ(offending_key({{"suite", "equivalence"}, {"grid.n", 1001}}), "grid.n");
    EXPECT_EQ(offending_key({{"suite", "nope"}}), "suite");
    EXPECT_EQ(offending_key({{"suite", "heat"}, {"operator.s", 1.5}}), "operator.s");
    EXPECT_EQ(offending_key({{"suite", "heat"}, {"seed", -4}}), "seed");
    EXPECT_EQ(offending_key({{"suite", "heat"}, {"tolerance.equivalence", 0.0}}), "tolerance.equivalence");
    EXPECT_EQ(offending_key({{"suite", "heat"}, {"tolerance.bogus", 1.0}}), "tolerance.bogus");
    EXPECT_EQ(offending_key({{"suite", "heat"}, {"linear.lambda", 1.5}}), "linear.lambda");
    EXPECT_EQ(offending_key({{"suite", "heat"}}), "<accepted>");
}

TEST(Config, SuitesRequireTheirWeightSections) {
    EXPECT_EQ(offending_key({{"suite", "linear-carleman"}}), "linear");
    EXPECT_EQ(offending_key({{"suite", "symbol"}}), "quadratic");
    EXPECT_EQ(offending_key({{"suite", "linear-carleman"}, {"linear.lambda", 0.5}}), "<accepted>");
    EXPECT_EQ(offending_key({{"suite", "all"}, {"linear.lambda", 0.5}}), "quadratic");
}

TEST(Config, ToleranceOverride) {
    const auto c = parse_config(json{{"suite", "equivalence"}, {"tolerance.equivalence", 1e-12}});
    EXPECT_DOUBLE_EQ(c.tol("equivalence"), 1e-12);
    EXPECT_DOUBLE_EQ(c.tol("kernel_mass"), 1e-12);
}

TEST(Config, ReferenceDocumentRoundTrips) {
    const auto ref = reference_config();
    const auto c = parse_config(ref);
    for (const auto& k : config_keys()) EXPECT_EQ(c.values.at(k.key), k.value) << k.key;
    for (const auto& [k, v] : default_tolerances()) EXPECT_DOUBLE_EQ(c.tol(k), v);
}

TEST(Config, ShippedReferenceFileMatchesTheKeyTable) {
    std::ifstream in(std::string(FREL_SOURCE_DIR) + "/configs/reference.json");
    ASSERT_TRUE(in);
    const json doc = json::parse(in);
    const auto ref = reference_config();
    ASSERT_EQ(doc.size(), ref.size());
    for (const auto& [k, v] : ref.items()) {
        ASSERT_TRUE(doc.contains(k)) << k;
        if (k != "calibration.path") EXPECT_EQ(doc.at(k), v) << k;
    }
}

TEST(Config, MalformedFixtureIsRejected) {
    try {
        load_config(std::string(FREL_SOURCE_DIR) + "/tests/fixtures/malformed.json");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "grid.n");
        EXPECT_NE(std::string(e.what()).find("grid.n"), std::string::npos);
    }
}

TEST(Seeds, SplitSeedIsDeterministicAndSeparatesStreams) {
    EXPECT_EQ(split_seed(1, "a", "b", 3), split_seed(1, "a", "b", 3));
    EXPECT_NE(split_seed(1, "a", "b", 3), split_seed(1, "a", "b", 4));
    EXPECT_NE(split_seed(1, "ab", "", 0), split_seed(1, "a", "b", 0));
    EXPECT_NE(split_seed(1, "a", "b", 0), split_seed(2, "a", "b", 0));
}

TEST(Seeds, RngStreamIsPinned) {
    Rng r(42);
    std::mt19937_64 ref(42);
    EXPECT_EQ(r.bits(), ref());
    const double u = r.uniform();
    EXPECT_DOUBLE_EQ(u, static_cast<double>(ref() >> 11) * 0x1.0p-53);
}

TEST(Rounding, SignificantDigits) {
    EXPECT_DOUBLE_EQ(round_up_sig(8.527863762), 8.6);
    EXPECT_DOUBLE_EQ(round_up_sig(8.6), 8.6);
    EXPECT_DOUBLE_EQ(round_down_sig(3.6729, 3), 3.67);
    EXPECT_DOUBLE_EQ(round_down_sig(3300.9), 3300.0);
    EXPECT_DOUBLE_EQ(round_up_sig(0.0123456), 0.013);
}

TEST(ParallelFor, ResultsDoNotDependOnThreadCount) {
    std::vector<double> a(100), b(100);
    parallel_for(a.size(), 1, [&](std::size_t i) { a[i] = std::sin(static_cast<double>(i)); });
    parallel_for(b.size(), 8, [&](std::size_t i) { b[i] = std::sin(static_cast<double>(i)); });
    EXPECT_EQ(a, b);
}

TEST(ParallelFor, RethrowsTheLowestFailingIndex) {
    try {
        parallel_for(50, 4, [](std::size_t i) {
            if (i == 7 || i == 31) throw std::runtime_error(std::to_string(i));
        });
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "7");
    }
}

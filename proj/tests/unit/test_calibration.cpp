#include <gtest/gtest.h>

#include "frel/calibration.hpp"

using namespace frel;

namespace {

const json& table() {
    static const json t = load_calibration(std::string(FREL_SOURCE_DIR) + "/data/calibration.json");
    return t;
}

RunConfig provenance_config() {
    json doc = {{"suite", "all"}};
    for (const auto& [k, v] : table().at("provenance").at("config").items())
        if (!v.is_null()) doc[k] = v;
    return parse_config(doc);
}

}  // namespace

TEST(Calibration, ShippedTableGolden) {
    const auto& t = table();
    EXPECT_EQ(t.at("version").get<int>(), kCalibrationVersion);
    EXPECT_DOUBLE_EQ(t.at("linear").at("C1").get<double>(), 8.6);
    EXPECT_DOUBLE_EQ(t.at("linear").at("C2").get<double>(), 3.67);
    EXPECT_DOUBLE_EQ(t.at("linear").at("A_star").get<double>(), -1.05);
    const auto& q = t.at("quadratic").at(0);
    EXPECT_EQ(q.at("mode").get<std::string>(), "elliptic");
    EXPECT_DOUBLE_EQ(q.at("c1").get<double>(), 35.0);
    EXPECT_DOUBLE_EQ(q.at("c2").get<double>(), 35.0);
    EXPECT_DOUBLE_EQ(q.at("C").get<double>(), 1.0);
}

TEST(Calibration, RefinedConstantsStayWithinFactorTwo) {
    for (const auto& q : table().at("quadratic"))
        for (const char* k : {"c1", "c2"}) {
            const double a = q.at(k).get<double>(), b = q.at("refinement").at(k).get<double>();
            EXPECT_LT(std::max(a / b, b / a), 2.0) << q.at("mode") << ' ' << q.at("s") << ' ' << k;
        }
}

TEST(Calibration, LoaderRejectsBadTables) {
    EXPECT_THROW(load_calibration("/nonexistent/calibration.json"), CalibrationError);
}

// Recomputes one quadratic entry from its recorded provenance.
TEST(Calibration, QuadraticEntryIsReproducible) {
    const auto c = provenance_config();
    const auto& q = table().at("quadratic").at(0);
    const auto n = q.at("n").get<std::size_t>();
    const json span = quadratic_span_fit(c, quadratic_cases()[0], n, 1);
    EXPECT_EQ(span.at("hash"), q.at("span").at("hash"));
    EXPECT_DOUBLE_EQ(round_down_sig(span.at("c1").get<double>(), 2), q.at("c1").get<double>());
    EXPECT_DOUBLE_EQ(round_down_sig(span.at("c2").get<double>(), 2), q.at("c2").get<double>());
    const json sample = quadratic_fit(c, quadratic_cases()[0], n, "calibration",
                                      q.at("sample").at("functions").get<int>(), 1);
    EXPECT_EQ(sample.at("terms_hash"), q.at("sample").at("terms_hash"));
}

TEST(Calibration, SpanConstantsSitBelowEverySampledFit) {
    for (const auto& q : table().at("quadratic"))
        for (const char* k : {"c1", "c2"})
            EXPECT_LE(q.at("span").at(k).get<double>(), q.at("sample").at(k).get<double>())
                << q.at("mode") << ' ' << q.at("s") << ' ' << k;
}

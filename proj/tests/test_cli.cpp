#include "fixtures.hpp"

#include "fsse/scenario.hpp"
#include "fsse/tables.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace fsse;

namespace {

std::string read(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string field_of(const std::string& text) {
    try {
        (void)parse_scenario(text);
    } catch (const ParseError& e) {
        return e.field();
    }
    return "";
}

} // namespace

TEST_SUITE("cli_bench") {

TEST_CASE("scenario documents round-trip") {
    for (const char* name : {"three_inertia.json", "three_inertia_case1.json", "three_inertia_case2.json",
                             "three_inertia_case3.json", "three_inertia_case4.json", "f16.json", "b747.json"}) {
        CAPTURE(name);
        const Scenario a = testing::load_fixture(name);
        const Scenario b = parse_scenario(serialize_scenario(a));
        CHECK(a == b);
        CHECK(serialize_scenario(b) == serialize_scenario(a));
    }
}

TEST_CASE("sequence attacks round-trip") {
    Scenario s = testing::load_fixture("three_inertia.json");
    SensorAttack a;
    a.index = 2;
    a.uniform = false;
    a.sequence.assign(static_cast<std::size_t>(s.horizon), 0.25);
    s.attack.sensors.push_back(a);
    CHECK(parse_scenario(serialize_scenario(s)) == s);
}

TEST_CASE("parse errors name the offending field") {
    const std::string base = read(testing::fixture("three_inertia_case1.json"));
    auto replace = [&](const std::string& from, const std::string& to) {
        std::string t = base;
        const auto pos = t.find(from);
        REQUIRE(pos != std::string::npos);
        t.replace(pos, from.size(), to);
        return t;
    };
    CHECK(field_of("{not json") == "document");
    CHECK(field_of(replace("\"horizon\": 100", "\"horizon\": 3")) == "horizon");
    CHECK(field_of(replace("\"tau\": 6", "\"tau\": 7")) == "model");
    CHECK(field_of(replace("\"horizon\": 100", "\"horizon\": 0")) == "horizon");
    CHECK(field_of(replace("\"estimator\": \"both\"", "\"estimator\": \"fast\"")) == "estimator");
    CHECK(field_of(replace("\"agreement\": \"mean\"", "\"agreement\": \"mode\"")) == "agreement");
    CHECK(field_of(replace("\"w_bound\": 0.01", "\"w_bound\": -1")) == "noise.w_bound");
    CHECK(field_of(replace("\"index\": 5", "\"index\": 9")) == "attack.sensors");
    CHECK(field_of(replace("\"index\": 5", "\"index\": 6")) == "attack.sensors");
    CHECK(field_of(replace("\"s_max\": 2", "\"s_max\": 1")) == "attack.sensors");
}

TEST_CASE("table of search-space sizes for six sensors") {
    const auto rows = table1(6, 2);
    REQUIRE(rows.size() == 12);
    std::vector<std::size_t> sizes;
    for (const auto& r : rows) sizes.push_back(r.pruned.size());
    // Rows 8 and 9 follow from the pruning rules: {S5,S6} itself survives
    // in both, and every pair inside {S1..S4} survives in row 8.
    CHECK(sizes == std::vector<std::size_t>{3, 9, 3, 1, 4, 1, 14, 7, 9, 3, 5, 4});
    CHECK(average_size(rows) == doctest::Approx(63.0 / 12.0));
}

TEST_CASE("enumerated layouts for other sizes") {
    const auto rows = table1(5, 2);
    CHECK_FALSE(rows.empty());
    for (const auto& r : rows) CHECK(r.pruned.size() <= 10);
}

TEST_CASE("pairwise-type family") {
    for (std::size_t p : {10, 12, 14, 16, 18, 20}) {
        CAPTURE(p);
        const MethodTableRow r = method_table_row(p, 2);
        CHECK(r.exhaustive == p * (p - 1) / 2);
        CHECK(r.two_failing == 4);
        CHECK(r.one_failing == 1);
        // With every pair failing, no two-sensor removal can touch all p/2 pairs.
        CHECK(r.all_failing == 0);
    }
}

}

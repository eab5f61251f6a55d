#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "fdia/casefile.hpp"
#include "fdia/error.hpp"

using namespace fdia;

namespace {

const char* kToyCase = R"(function mpc = toy3
% three-bus triangle
mpc.baseMVA = 1;
mpc.bus = [
    1  3  0   0 0 0 1 1 0 0 1 1.1 0.9;
    2  1  10  0 0 0 1 1 0 0 1 1.1 0.9;
    3  1  5   0 0 0 1 1 0 0 1 1.1 0.9;
];
mpc.branch = [
    1 2 0 1 0 0 0 0 0 0 1 -360 360;
    1 3 0 1 0 0 0 0 0 0 1 -360 360;
    2 3 0 1 0 0 0 0 0 0 1 -360 360;
];
)";

std::string toy_json() {
    return R"({"name":"toy3","base_mva":1.0,"slack_bus":1,
        "buses":[{"id":1,"type":"slack","pd":0.0,"base_kv":0.0},
                 {"id":2,"type":"pq","pd":10.0,"base_kv":0.0},
                 {"id":3,"type":"pq","pd":5.0,"base_kv":0.0}],
        "branches":[{"from":1,"to":2,"x":1.0},
                    {"from":1,"to":3,"x":1.0},
                    {"from":2,"to":3,"x":1.0}]})";
}

} // namespace

TEST_CASE("bundled cases carry the expected meter counts") {
    // m: 20 / 41 / 186 / 411, bus counts 14 / 30 / 118 / 300
    const struct {
        const char* name;
        std::size_t buses;
        std::size_t branches;
    } expected[] = {{"case14", 14, 20},
                    {"case30", 30, 41},
                    {"case118", 118, 186},
                    {"case300", 300, 411}};
    for (const auto& e : expected) {
        const CaseSystem sys = builtin_case(e.name);
        CHECK(sys.buses.size() == e.buses);
        CHECK(sys.branches.size() == e.branches);
        CHECK(validate(sys).empty());
    }
}

TEST_CASE("case14 structure") {
    const CaseSystem sys = builtin_case("case14");
    CHECK(sys.name == "case14");
    CHECK(sys.base_mva == doctest::Approx(100.0));
    CHECK(sys.slack_bus == 1);
    CHECK(sys.branches.front().from == 1);
    CHECK(sys.branches.front().to == 2);
    CHECK(sys.branches.front().x == doctest::Approx(0.05917));
    // meter ids follow file order
    for (std::size_t k = 0; k < sys.branches.size(); ++k)
        CHECK(sys.branches[k].meter_id == static_cast<int>(k));
}

TEST_CASE("unknown builtin name is rejected") {
    CHECK_THROWS_AS(builtin_case("case999"), ConfigError);
}

TEST_CASE("matpower and native json sources agree") {
    const CaseSystem a = parse_case(kToyCase, CaseFormat::matpower_subset);
    const CaseSystem b = parse_case(toy_json(), CaseFormat::native_json);
    REQUIRE(a.buses.size() == b.buses.size());
    REQUIRE(a.branches.size() == b.branches.size());
    CHECK(a.slack_bus == b.slack_bus);
    for (std::size_t i = 0; i < a.buses.size(); ++i) {
        CHECK(a.buses[i].id == b.buses[i].id);
        CHECK(a.buses[i].pd == doctest::Approx(b.buses[i].pd));
    }
}

TEST_CASE("serialization round-trips field for field") {
    for (const auto& name : builtin_case_names()) {
        const CaseSystem original = builtin_case(name);
        const CaseSystem reparsed = parse_case(serialize_case(original), CaseFormat::native_json);
        CHECK(reparsed.name == original.name);
        CHECK(reparsed.base_mva == original.base_mva);
        CHECK(reparsed.slack_bus == original.slack_bus);
        REQUIRE(reparsed.buses.size() == original.buses.size());
        REQUIRE(reparsed.branches.size() == original.branches.size());
        for (std::size_t i = 0; i < original.buses.size(); ++i) {
            CHECK(reparsed.buses[i].id == original.buses[i].id);
            CHECK(reparsed.buses[i].type == original.buses[i].type);
            CHECK(reparsed.buses[i].pd == original.buses[i].pd);
            CHECK(reparsed.buses[i].base_kv == original.buses[i].base_kv);
        }
        for (std::size_t i = 0; i < original.branches.size(); ++i) {
            CHECK(reparsed.branches[i].from == original.branches[i].from);
            CHECK(reparsed.branches[i].to == original.branches[i].to);
            CHECK(reparsed.branches[i].x == original.branches[i].x);
            CHECK(reparsed.branches[i].meter_id == original.branches[i].meter_id);
        }
    }
}

TEST_CASE("parsing is deterministic") {
    const CaseSystem a = parse_case(kToyCase, CaseFormat::matpower_subset);
    const CaseSystem b = parse_case(kToyCase, CaseFormat::matpower_subset);
    CHECK(serialize_case(a) == serialize_case(b));
}

TEST_CASE("out-of-service branches are dropped before meter numbering") {
    const char* source = R"(
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0 0 0 0 1 1 0 0 1 1.1 0.9;
    2 1 1 0 0 0 1 1 0 0 1 1.1 0.9;
    3 1 1 0 0 0 1 1 0 0 1 1.1 0.9;
];
mpc.branch = [
    1 2 0 0.1 0 0 0 0 0 0 1 -360 360;
    1 3 0 0.2 0 0 0 0 0 0 0 -360 360;
    2 3 0 0.3 0 0 0 0 0 0 1 -360 360;
];
)";
    const CaseSystem sys = parse_case(source, CaseFormat::matpower_subset);
    REQUIRE(sys.branches.size() == 2);
    CHECK(sys.branches[0].x == doctest::Approx(0.1));
    CHECK(sys.branches[1].x == doctest::Approx(0.3));
    CHECK(sys.branches[0].meter_id == 0);
    CHECK(sys.branches[1].meter_id == 1);
}

TEST_CASE("syntax errors carry a position") {
    const char* source = "mpc.baseMVA = 100;\nmpc.bus = [\n 1 3 zero 0;\n];\nmpc.branch = [ ];";
    try {
        parse_case(source, CaseFormat::matpower_subset);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("zero") != std::string::npos);
    }
}

TEST_CASE("a dangling branch endpoint names the absent bus") {
    std::string source = kToyCase;
    const auto pos = source.find("2 3 0 1");
    source.replace(pos, 7, "2 99 0 1");
    try {
        parse_case(source, CaseFormat::matpower_subset);
        FAIL("expected SemanticError");
    } catch (const SemanticError& e) {
        CHECK(std::string(e.what()).find("99") != std::string::npos);
    }
}

TEST_CASE("zero reactance is rejected and named") {
    std::string source = kToyCase;
    const auto pos = source.find("2 3 0 1");
    source.replace(pos, 7, "2 3 0 0");
    try {
        parse_case(source, CaseFormat::matpower_subset);
        FAIL("expected SemanticError");
    } catch (const SemanticError& e) {
        CHECK(std::string(e.what()).find("reactance") != std::string::npos);
        CHECK(std::string(e.what()).find("2-3") != std::string::npos);
    }
}

TEST_CASE("empty source is rejected") {
    CHECK_THROWS_AS(parse_case("", CaseFormat::matpower_subset), ParseError);
}

TEST_CASE("validate lists each violation") {
    CaseSystem sys = parse_case(kToyCase, CaseFormat::matpower_subset);
    CHECK(validate(sys).empty());

    SUBCASE("duplicate bus id") {
        sys.buses[2].id = 2;
        // bus 3's id collides and both branches to bus 3 dangle
        const auto findings = validate(sys);
        bool found = false;
        for (const auto& f : findings)
            if (f.find("duplicate") != std::string::npos) found = true;
        CHECK(found);
    }
    SUBCASE("two slack buses") {
        sys.buses[1].type = BusType::slack;
        const auto findings = validate(sys);
        REQUIRE(findings.size() == 1);
        CHECK(findings[0].find("slack") != std::string::npos);
    }
    SUBCASE("disconnected network names stranded buses") {
        sys.buses.push_back({4, BusType::pq, 0.0, 0.0});
        const auto findings = validate(sys);
        REQUIRE(findings.size() == 1);
        CHECK(findings[0].find("4") != std::string::npos);
        CHECK(findings[0].find("disconnected") != std::string::npos);
    }
}

TEST_CASE("default compromised-meter grids match the experiment table") {
    CHECK(default_k_grid("case14") == std::vector<int>{3, 5, 8});
    CHECK(default_k_grid("case30") == std::vector<int>{6, 11, 15});
    CHECK(default_k_grid("case118") == std::vector<int>{12, 26, 35});
    CHECK(default_k_grid("case300") == std::vector<int>{18, 25, 40});
    CHECK_THROWS_AS(default_k_grid("nope"), ConfigError);
}

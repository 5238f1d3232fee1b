#include "support.hpp"

#include "gridfreq/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace gridfreq;
using namespace support;

namespace {

const char* kSmallCase = R"({
  "base_mva": 100,
  "base_hz": 60,
  "nodes": [
    {"id": 1, "kind": "machine", "M": 1.0, "D": 1.0, "P": 0.5, "V": 1.0,
     "controller": {"alpha": 1.0, "u_lo": null, "u_hi": 2.0}},
    {"id": 2, "kind": "freq", "M": 0.0, "D": 1.0, "P": -0.3, "V": 1.0, "controller": null},
    {"id": 3, "kind": "passive", "M": 0.0, "D": 0.0, "P": -0.2, "V": 1.0, "controller": null}
  ],
  "lines": [{"from": 1, "to": 2, "B": 4.0}, {"from": 2, "to": 3, "B": 2.5}],
  "areas": null
})";

std::string parse_error(std::string_view text) {
    try {
        (void)parse_case(text);
    } catch (const ParseError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_SUITE("netmodel") {

TEST_CASE("small case parses with null bounds as infinite") {
    const Network net = parse_case(kSmallCase);
    CHECK(net.size() == 3);
    CHECK(net.passive_count() == 1);
    const Node& m = net.node(0);
    REQUIRE(m.controller.has_value());
    CHECK(std::isinf(m.controller->u_lo));
    CHECK(m.controller->u_lo < 0.0);
    CHECK(m.controller->u_hi == 2.0);
}

TEST_CASE("serialize then parse is the identity") {
    for (const Network& net : {parse_case(kSmallCase), ieee39(), two_area_toy(), with_passive()}) {
        const Network back = parse_case(serialize_case(net));
        CHECK(back == net);
        CHECK(serialize_case(back) == serialize_case(net));
    }
}

TEST_CASE("save_case and load_case round-trip through a file") {
    const auto path = std::filesystem::temp_directory_path() / "gridfreq_roundtrip_case.json";
    save_case(ieee39(), path);
    CHECK(load_case(path) == ieee39());
    std::filesystem::remove(path);
}

TEST_CASE("unknown fields are rejected with their location") {
    std::string text = kSmallCase;
    text.replace(text.find("\"V\": 1.0, \"controller\": null}"), 9, "\"X\": 1.0,");
    const auto msg = parse_error(text);
    CHECK(msg.find("nodes[1]") != std::string::npos);
    CHECK(msg.find("unknown field 'X'") != std::string::npos);

    std::string top = kSmallCase;
    top.replace(top.find("\"areas\""), 7, "\"zones\"");
    CHECK(parse_error(top).find("unknown field 'zones'") != std::string::npos);
}

TEST_CASE("wrong field types name the field") {
    std::string text = kSmallCase;
    text.replace(text.find("\"B\": 2.5"), 8, "\"B\": \"x\"");
    CHECK(parse_error(text).find("lines[1].B") != std::string::npos);

    std::string kind = kSmallCase;
    kind.replace(kind.find("\"passive\""), 9, "\"battery\"");
    CHECK(parse_error(kind).find("unknown node kind 'battery'") != std::string::npos);

    std::string missing = kSmallCase;
    missing.replace(missing.find("\"base_hz\": 60,"), 14, "");
    CHECK(parse_error(missing).find("missing field 'base_hz'") != std::string::npos);
}

TEST_CASE("syntax errors report the line") {
    std::string text = kSmallCase;
    text.replace(text.find("\"lines\""), 1, "");
    const auto msg = parse_error(text);
    CHECK(msg.find("line 10") != std::string::npos);
}

TEST_CASE("model violations in a well-formed document are validation errors") {
    std::string text = kSmallCase;
    text.replace(text.find("\"D\": 0.0, \"P\": -0.2"), 8, "\"D\": 0.5");
    CHECK_THROWS_AS((void)parse_case(text), ValidationError);
}

TEST_CASE("load_case reports a missing file") {
    CHECK_THROWS_AS((void)load_case("/nonexistent/gridfreq.json"), ParseError);
}

TEST_CASE("parsed areas keep their order and nominal exports") {
    const Network net = ieee39();
    const auto& part = *net.partition();
    CHECK(part.area(0).name == "A1");
    CHECK(part.area(1).name == "A2");
    CHECK(part.area(0).export_nominal + part.area(1).export_nominal == doctest::Approx(0.0).epsilon(1e-12));
}

}  // TEST_SUITE

#include "ipvsim/errors.h"
#include "ipvsim/io.h"
#include "ipvsim/model_io.h"

#include "support.h"

#include <doctest.h>

#include <limits>

using namespace ipvsim;

TEST_SUITE("model_io") {

TEST_CASE("model round trips exactly") {
    auto model = default_model();
    model.margins[3] = MarginalParams::zinb(1.234567890123, 0.3141592653589793, 0.87654321);
    model.margins[4] = MarginalParams::zinb(1.7, std::numeric_limits<double>::infinity(), 0.9);
    model.sigma(0, 9) = model.sigma(9, 0) = 0.123456789012345;
    const auto back = model_from_json(nlohmann::json::parse(serialize_model(model)));
    CHECK(back.acts == model.acts);
    CHECK(back.margins == model.margins);
    CHECK(back.sigma == model.sigma);

    const auto dir = testing::scratch_dir("model_io");
    write_model_file(dir / "m.json", model, nlohmann::ordered_json::array({{{"act", "x"}}}));
    const auto from_file = read_model_file(dir / "m.json");
    CHECK(from_file.margins == model.margins);
    CHECK(serialize_model(from_file) == serialize_model(model));
}

TEST_CASE("foreign schema or version is rejected") {
    auto document = model_to_json(default_model());
    document["version"] = kModelSchemaVersion + 1;
    CHECK_THROWS_AS(model_from_json(document), SchemaVersionError);
    document = model_to_json(default_model());
    document["schema"] = "something-else";
    CHECK_THROWS_AS(model_from_json(document), SchemaVersionError);
}

TEST_CASE("invalid models are rejected") {
    auto document = model_to_json(default_model());
    document["margins"][0]["theta"] = 1.5;
    CHECK_THROWS_AS(model_from_json(document), ValidationError);

    document = model_to_json(default_model());
    document["sigma"][0][1] = 0.99;
    document["sigma"][1][0] = 0.99;
    document["sigma"][0][2] = -0.99;
    document["sigma"][2][0] = -0.99;
    CHECK_THROWS_AS(model_from_json(document), ValidationError);

    document = model_to_json(default_model());
    document["margins"][2]["family"] = "poisson";
    CHECK_THROWS_AS(model_from_json(document), ValidationError);

    document = model_to_json(default_model());
    document["margins"].erase(document["margins"].size() - 1);
    CHECK_THROWS_AS(model_from_json(document), ValidationError);

    const auto dir = testing::scratch_dir("model_io_bad");
    testing::write_file(dir / "bad.json", "{\"schema\": ");
    CHECK_THROWS_AS(read_model_file(dir / "bad.json"), ParseError);
}

TEST_CASE("number formatting helpers") {
    for (const double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0}) {
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(format_fixed(-0.0001, 3) == "0.000");
    CHECK(format_fixed(0.0456, 3) == "0.046");
    CHECK_THROWS_AS(parse_double("1.5x"), ValidationError);
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("atomic writes leave no temporary file") {
    const auto dir = testing::scratch_dir("atomic");
    write_text_atomic(dir / "x.txt", "one");
    write_text_atomic(dir / "x.txt", "two");
    CHECK(read_text(dir / "x.txt") == "two");
    CHECK_FALSE(std::filesystem::exists(dir / "x.txt.tmp"));
    CHECK_THROWS_AS(write_text_atomic(dir / "missing" / "x.txt", "z"), Error);
}

} // TEST_SUITE

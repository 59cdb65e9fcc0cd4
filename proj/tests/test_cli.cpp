#include <doctest.h>

#include <json.hpp>

#include <sstream>
#include <string>
#include <vector>

#include "mixrisk/cli.hpp"
#include "mixrisk/errors.hpp"
#include "mixrisk/io.hpp"
#include "mixrisk/paper_tables.hpp"

using namespace mixrisk;
using nlohmann::json;

namespace {

const std::string kData = MIXRISK_TEST_DATA;

struct Result {
    int code;
    std::string out, err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "mixrisk");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_main(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("io: parse and round trip") {
    const auto file = load_model_file(kData + "/general_2d.json");
    CHECK(file.model.dimension == 2);
    CHECK(file.model.components.size() == 2);
    REQUIRE(file.portfolio.has_value());
    CHECK(file.portfolio->horizon == 1.0);
    const auto validated = validate(file.model);
    const ModelFile again = parse_model_file(to_json(ModelFile{validated.model(), file.portfolio}));
    CHECK(to_json(again) == to_json(ModelFile{validated.model(), file.portfolio}));
    CHECK(again.model.components[1].scale == validated.model().components[1].scale);
}

TEST_CASE("io: errors name the offending field") {
    const auto expect = [](const json& j, const std::string& needle) {
        try {
            parse_model_file(j);
            FAIL("expected a ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect(json::parse(R"({"components": []})"), "$.dimension: missing");
    expect(json::parse(R"({"dimension": 1, "components": [{"weight": 1, "mean": [0], "scale": [[1]],
                           "generator": {"type": "cauchy"}}]})"),
           "components[0].generator.type");
    expect(json::parse(R"({"dimension": 2, "components": [{"weight": 1, "mean": [0, "x"], "scale": [[1]],
                           "generator": {"type": "normal"}}]})"),
           "components[0].mean[1]");
    expect(json::parse(R"({"dimension": 2, "components": [{"weight": 1, "mean": [0, 0], "scale": [[1, 0], [0]],
                           "generator": {"type": "normal"}}]})"),
           "components[0].scale[1]");
    expect(json::parse(R"({"dimension": 1, "components": [{"weight": 1, "mean": [0], "scale": [[1]],
                           "generator": {"type": "student-t"}}]})"),
           "components[0].generator.nu: missing");
}

TEST_CASE("cli var: JSON report with positive VaR") {
    const auto r = invoke({"var", "--input", kData + "/student_mix_2d.json", "--alpha", "0.01"});
    CHECK(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["convention"] == "VaR/ES reported as positive currency losses");
    CHECK(j["reports"][0]["var"].get<double>() > 0);
    CHECK(j["reports"][0].contains("incremental_var"));
}

TEST_CASE("cli es: every command variant emits the sign convention") {
    for (const auto& file : {"student_mix_2d.json", "general_2d.json"}) {
        const auto r = invoke({"es", "-i", kData + "/" + file, "--alpha", "0.05,0.01"});
        CHECK(r.code == 0);
        const auto j = json::parse(r.out);
        CHECK(j["convention"] == "VaR/ES reported as positive currency losses");
        REQUIRE(j["reports"].size() == 2);
        for (const auto& rep : j["reports"]) CHECK(rep["es"].get<double>() > rep["var"].get<double>());
    }
}

TEST_CASE("cli es: paper-literal flag doubles the multiplier") {
    const auto a = json::parse(invoke({"es", "-i", kData + "/student_mix_2d.json"}).out);
    const auto b = json::parse(invoke({"es", "-i", kData + "/student_mix_2d.json", "--paper-literal-es"}).out);
    CHECK(b["es_convention"] == "paper-literal");
    CHECK(b["reports"][0]["es_multiplier"].get<double>() ==
          doctest::Approx(2 * a["reports"][0]["es_multiplier"].get<double>()).epsilon(1e-14));
}

TEST_CASE("cli csv output") {
    const auto r = invoke({"var", "-i", kData + "/student_mix_2d.json", "--format", "csv", "-a", "0.01,0.001"});
    CHECK(r.code == 0);
    CHECK(r.out.find("alpha,var,es,q_alpha,es_multiplier,theta_carry,method\n") != std::string::npos);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 4);
}

TEST_CASE("cli quantile") {
    const auto r = invoke({"quantile", "-i", kData + "/student_mix_2d.json", "-a", "0.01"});
    CHECK(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(std::abs(j["quantiles"][0]["residual"].get<double>()) <= 1e-10);
}

TEST_CASE("cli tables: exit 0 and CSV") {
    const auto r = invoke({"tables", "--alpha", "0.01"});
    CHECK(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["tables"].size() == 2);  // quantile and ES tables at 1%
    CHECK(j["tables"][0]["required_passed"] == 159);
    const auto c = invoke({"tables", "--format", "csv"});
    CHECK(c.code == 0);
    CHECK(c.err.find("[OK]") != std::string::npos);
}

TEST_CASE("cli mc-check: z-scores and draw minimum") {
    const auto r =
        invoke({"mc-check", "-i", kData + "/student_mix_2d.json", "--draws", "200000", "--seed", "42", "-a", "0.05"});
    CHECK(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["checks"][0]["within_3se"] == true);
    const auto small = invoke({"mc-check", "-i", kData + "/student_mix_2d.json", "--draws", "5000"});
    CHECK(small.code == 2);
    CHECK(small.err.find("draws") != std::string::npos);
}

TEST_CASE("cli aggregate") {
    const auto r = invoke({"aggregate", "-i", kData + "/blocks_4d.json", "--split", "2"});
    CHECK(r.code == 0);
    const auto a = json::parse(r.out)["aggregations"][0];
    CHECK(a["var_aggregated"].get<double>() == doctest::Approx(a["var_direct"].get<double>()).epsilon(1e-9));
    CHECK(invoke({"aggregate", "-i", kData + "/blocks_4d.json"}).code == 2);
}

TEST_CASE("cli exit codes and messages") {
    const auto bad = invoke({"var", "-i", kData + "/bad_weights.json"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("weights: sum") != std::string::npos);
    CHECK(bad.err.find("components[1].generator.nu") != std::string::npos);
    CHECK(invoke({"var", "-i", kData + "/student_mix_2d.json", "--alpha", "0.6"}).code == 2);
    CHECK(invoke({"var", "-i", kData + "/missing.json"}).code == 2);
    CHECK(invoke({"var"}).code == 2);
    CHECK(invoke({"frobnicate"}).code == 2);
    CHECK(invoke({"var", "-i", kData + "/student_mix_2d.json", "--format", "xml"}).code == 2);
}

TEST_CASE("cli: table mismatch maps to exit 4") {
    auto spec = var_table_alpha_01pct();
    CHECK(tables_exit_code({reproduce_table(spec)}) == kExitOk);
    spec.expected[0][0] += 0.01;
    CHECK(tables_exit_code({reproduce_table(spec)}) == kExitTableMismatch);
    RunConfig c;
    c.command = "tables";
    c.alphas = {0.02};
    std::ostringstream out, err;
    CHECK(run(c, out, err) == kExitValidation);
    CHECK(err.str().find("alpha") != std::string::npos);
}

TEST_CASE("cli output is byte-identical across runs") {
    const std::vector<std::string> args = {"mc-check", "-i", kData + "/general_2d.json", "--draws", "20000",
                                           "--seed", "7", "-a", "0.05"};
    CHECK(invoke(args).out == invoke(args).out);
    CHECK(invoke({"es", "-i", kData + "/general_2d.json"}).out == invoke({"es", "-i", kData + "/general_2d.json"}).out);
}

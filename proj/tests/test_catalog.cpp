#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "concircle/catalog.hpp"
#include "concircle/errors.hpp"
#include "concircle/report.hpp"

using namespace concircle;

namespace {

nlohmann::json load_golden() {
    const std::string path = std::string(CONCIRCLE_GOLDEN_DIR) + "/catalog_flags.json";
    std::ifstream in(path);
    REQUIRE_MESSAGE(in.good(), "missing golden file " << path);
    nlohmann::json j;
    in >> j;
    return j;
}

} // namespace

TEST_CASE("every entry generates a manifest that passes load_manifest") {
    for (const auto& e : catalog_entries()) {
        CAPTURE(e.name);
        const Manifest m = catalog_build(e.name);
        const std::string text = manifest_to_canonical_json(m);
        const Manifest back = load_manifest(text);
        CHECK(back.dimension == m.dimension);
        CHECK(manifest_hash(back) == manifest_hash(m));
    }
}

TEST_CASE("entry examples from the build contract") {
    // sphere(3, 1): tau = 6, concircularly flat
    {
        const auto rep = run_analyze(catalog_build("sphere"));
        CHECK(rep.values.at("tau_mean") == doctest::Approx(6.0).epsilon(1e-9));
        CHECK(rep.verdicts.at("concircularly_flat").verdict == Verdict::True);
    }
    // schwarzschild(1): vacuum
    {
        const auto rep = run_analyze(catalog_build("schwarzschild"));
        CHECK(rep.verdicts.at("einstein").verdict == Verdict::True);
        CHECK(std::abs(rep.values.at("tau_mean")) < 1e-9);
        CHECK(rep.verdicts.at("ricci_codazzi").verdict == Verdict::True);
        CHECK(rep.verdicts.at("divergence_free_concircular").verdict == Verdict::True);
        CHECK(rep.verdicts.at("concircularly_symmetric").verdict == Verdict::False);
    }
    // linear_grw(0.7, 2): ambient flat
    {
        const auto rep = run_analyze(catalog_build("linear_grw"));
        CHECK(rep.verdicts.at("flat").verdict == Verdict::True);
    }
}

TEST_CASE("parameters are validated") {
    CHECK_THROWS_AS(catalog_build("nope"), ArgumentError);
    CHECK_THROWS_AS(catalog_build("sphere", {{"n", "17"}}), ArgumentError);
    CHECK_THROWS_AS(catalog_build("sphere", {{"r", "abc"}}), ArgumentError);
    CHECK_THROWS_AS(catalog_build("sphere", {{"bogus", "1"}}), ArgumentError);
    try {
        catalog_build("nope");
    } catch (const ArgumentError& e) {
        CHECK(std::string(e.what()).find("sphere") != std::string::npos);
    }
}

TEST_CASE("catalog classification matches the golden table") {
    const nlohmann::json golden = load_golden();
    for (const auto& [name, expect] : golden.items()) {
        CAPTURE(name);
        const Manifest m = catalog_build(name);
        const DiagnosticReport rep = run_analyze(m);
        CHECK(rep.consistent);
        for (const auto& [flag, verdict] : expect["verdicts"].items()) {
            CAPTURE(flag);
            CHECK(verdict_name(rep.verdicts.at(flag).verdict) ==
                  verdict.get<std::string>());
        }
        if (expect.contains("values"))
            for (const auto& [key, val] : expect["values"].items()) {
                CAPTURE(key);
                CHECK(rep.values.at(key) ==
                      doctest::Approx(val.get<double>()).epsilon(1e-9));
            }
        if (expect.contains("baselines"))
            for (const auto& [key, val] : expect["baselines"].items()) {
                CAPTURE(key);
                double actual;
                if (rep.verdicts.count(key))
                    actual = rep.verdicts.at(key).max_residual;
                else
                    actual = rep.structure_residuals.at(key);
                CHECK(actual == doctest::Approx(val.get<double>()).epsilon(1e-9));
            }
    }
}

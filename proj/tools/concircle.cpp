// concircle: curvature diagnostics for metric manifests.
//
// Verbs:
//   analyze        full diagnostic report for a manifest or catalog entry
//   compare-oracle closed-form warped-product blocks vs the generic pipeline
//   catalog        list built-in entries or emit one as manifest JSON
//
// Exit codes: 0 clean, 2 inconsistent cross-flag implications, 3 validation
// or input errors.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "concircle/catalog.hpp"
#include "concircle/errors.hpp"
#include "concircle/manifest.hpp"
#include "concircle/report.hpp"

namespace {

using namespace concircle;

struct CommonArgs {
    std::string ref;
    int points = 0;
    long long seed = -1;
    double tol = 0.0;
    std::string json_path;
    std::vector<std::string> params;
};

std::map<std::string, std::string> parse_params(const std::vector<std::string>& kvs) {
    std::map<std::string, std::string> out;
    for (const auto& kv : kvs) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ArgumentError("--param expects key=value, got '" + kv + "'");
        out[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return out;
}

Manifest resolve_manifest(const CommonArgs& args) {
    if (args.ref.rfind("catalog:", 0) == 0)
        return catalog_build(args.ref.substr(8), parse_params(args.params));
    if (!args.params.empty())
        throw ArgumentError("--param only applies to catalog: references");
    std::ifstream in(args.ref, std::ios::binary);
    if (!in) throw IoError("cannot read manifest file '" + args.ref + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_manifest(ss.str());
}

AnalyzeOptions options_from(const CommonArgs& args) {
    AnalyzeOptions opt;
    if (args.points > 0) opt.points = args.points;
    if (args.seed >= 0) opt.seed = args.seed;
    if (args.tol > 0) opt.tolerance = args.tol;
    return opt;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("ref", args.ref,
                    "manifest file path or catalog:<name> reference")
        ->required();
    cmd->add_option("--points", args.points, "sample point count");
    cmd->add_option("--seed", args.seed, "sampling seed");
    cmd->add_option("--tol", args.tol, "residual tolerance");
    cmd->add_option("--json", args.json_path, "write the report to this path");
    cmd->add_option("--param", args.params, "catalog parameter key=value")
        ->take_all();
}

void print_summary(const DiagnosticReport& r) {
    std::printf("manifest %s (hash %s, n = %d)\n", r.manifest_name.c_str(),
                r.manifest_hash.c_str(), r.dimension);
    std::printf("points %d, seed %lld, tolerance %.3e\n", r.points,
                static_cast<long long>(r.seed), r.tolerance);
    int skipped = 0;
    for (const auto& rec : r.point_records)
        if (!rec.skip_reason.empty()) ++skipped;
    if (skipped) std::printf("skipped points: %d\n", skipped);
    for (const auto& [name, fr] : r.verdicts)
        std::printf("  %-28s %-13s (max residual %.3e)\n", name.c_str(),
                    verdict_name(fr.verdict), fr.max_residual);
    for (const auto& [name, v] : r.values)
        std::printf("  %-28s %.9g\n", name.c_str(), v);
    if (!r.oracle_agreement.empty()) {
        std::printf("oracle agreement (max normalized defect per block):\n");
        for (const auto& [name, v] : r.oracle_agreement)
            std::printf("  %-28s %.3e\n", name.c_str(), v);
    }
    for (const auto& w : r.warnings) std::printf("warning: %s\n", w.c_str());
    std::printf("consistent: %s\n", r.consistent ? "yes" : "no");
}

int fail(const std::exception& e, bool as_json) {
    if (as_json) {
        nlohmann::json doc;
        doc["error"] = e.what();
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cerr << "error: " << e.what() << "\n";
    }
    return 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"concircular curvature diagnostics"};
    app.require_subcommand(1);

    CommonArgs analyze_args, oracle_args;
    CLI::App* analyze = app.add_subcommand("analyze", "full diagnostic report");
    add_common(analyze, analyze_args);
    CLI::App* oracle = app.add_subcommand(
        "compare-oracle", "warped-product oracle blocks vs the generic pipeline");
    add_common(oracle, oracle_args);

    CLI::App* catalog = app.add_subcommand("catalog", "list or emit built-in entries");
    std::string emit_name, emit_json;
    std::vector<std::string> emit_params;
    catalog->add_option("name", emit_name, "entry to emit (omit to list all)");
    catalog->add_option("--param", emit_params, "catalog parameter key=value")
        ->take_all();
    catalog->add_option("--json", emit_json, "write the manifest to this path");

    CLI11_PARSE(app, argc, argv);

    const bool as_json = !analyze_args.json_path.empty() ||
                         !oracle_args.json_path.empty() || !emit_json.empty();
    try {
        if (analyze->parsed() || oracle->parsed()) {
            const CommonArgs& args = analyze->parsed() ? analyze_args : oracle_args;
            const Manifest m = resolve_manifest(args);
            const DiagnosticReport rep = analyze->parsed()
                                             ? run_analyze(m, options_from(args))
                                             : run_compare_oracle(m, options_from(args));
            if (!args.json_path.empty()) write_report(rep, args.json_path);
            print_summary(rep);
            return rep.consistent ? 0 : 2;
        }
        if (catalog->parsed()) {
            if (emit_name.empty()) {
                for (const auto& e : catalog_entries()) {
                    std::printf("%-22s %s\n", e.name.c_str(), e.summary.c_str());
                    for (const auto& [k, v] : e.defaults)
                        std::printf("    --param %s=%s\n", k.c_str(), v.c_str());
                }
                return 0;
            }
            const Manifest m = catalog_build(emit_name, parse_params(emit_params));
            const std::string text = manifest_to_canonical_json(m);
            if (!emit_json.empty()) {
                std::ofstream out(emit_json, std::ios::binary);
                if (!out) throw IoError("cannot open '" + emit_json + "'");
                out << text;
            } else {
                std::cout << text;
            }
            return 0;
        }
    } catch (const ValidationError& e) {
        return fail(e, as_json);
    } catch (const Error& e) {
        return fail(e, as_json);
    } catch (const std::exception& e) {
        return fail(e, as_json);
    }
    return 0;
}

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "concircle/manifest.hpp"

namespace concircle {

/// Deterministic sampler: mt19937_64 seeded with `seed`, one 53-bit draw
/// per coordinate in order, mapped affinely into the sample box. Identical
/// across runs and platforms for a given (seed, count, box).
std::vector<std::vector<double>> sample_points(const Manifest& m, int count,
                                               long long seed);

enum class Verdict { True, False, Indeterminate };
const char* verdict_name(Verdict v);

struct FlagResult {
    Verdict verdict = Verdict::Indeterminate;
    double max_residual = 0.0;
};

struct PointRecord {
    std::vector<double> coordinates;
    std::map<std::string, double> residuals;
    double tau = 0.0;
    std::string skip_reason; // non-empty when the point was skipped
};

struct DiagnosticReport {
    std::string manifest_name;
    std::string manifest_hash;
    int dimension = 0;
    long long seed = 0;
    double tolerance = 0.0;
    int points = 0;

    std::vector<PointRecord> point_records;
    std::map<std::string, FlagResult> verdicts;
    std::map<std::string, double> values;          // kappa, einstein factor, tau
    std::map<std::string, double> identity_suite;  // always-true defects, max
    std::map<std::string, double> oracle_agreement;    // structured only
    std::map<std::string, double> structure_residuals; // structured only
    bool structured = false;
    bool consistent = true;
    std::vector<std::string> warnings;
};

struct AnalyzeOptions {
    std::optional<int> points;
    std::optional<long long> seed;
    std::optional<double> tolerance;
    /// 0 = use hardware concurrency; the CONCIRCLE_THREADS environment
    /// variable caps it either way.
    int threads = 0;
};

/// Full diagnostic run: samples points, evaluates every curvature
/// diagnostic (plus the structure residuals and oracle agreement when the
/// manifest carries a structure tag), aggregates verdicts, and validates
/// the cross-flag implications.
DiagnosticReport run_analyze(const Manifest& m, const AnalyzeOptions& opt = {});

/// Oracle cross-check only; requires a structure tag.
DiagnosticReport run_compare_oracle(const Manifest& m,
                                    const AnalyzeOptions& opt = {});

/// Canonical JSON rendering (sorted keys, %.12e floats, LF endings).
std::string report_to_json(const DiagnosticReport& r);

/// Writes the canonical JSON; IoError on failure.
void write_report(const DiagnosticReport& r, const std::string& path);

} // namespace concircle

#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "concircle/expr.hpp"

namespace concircle {

/// Warped-structure annotation carried by a product-chart manifest.
/// `base_dimension` is the dimension of the factor carrying the warping
/// function. Coordinate layout per kind:
///   warped: base coordinates first, fiber coordinates after.
///   grw:    coordinate 0 is t with metric entry -1, fiber after.
///   ssst:   coordinate 0 is t with metric entry -f^2, spatial base after.
struct StructureTag {
    enum class Kind { Warped, Grw, Ssst };
    Kind kind = Kind::Warped;
    int base_dimension = 0;
    std::string warping;
};

std::string structure_kind_name(StructureTag::Kind kind);

/// One chart: dimension, coordinate names, symmetric matrix of metric
/// component expressions, a sampling box, and optional scalar fields.
/// Immutable after load; shareable across concurrent evaluators.
struct Manifest {
    std::string name;
    int dimension = 0;
    std::vector<std::string> coordinates;
    std::vector<std::vector<Expr>> metric;
    std::vector<std::vector<std::string>> metric_source;
    std::vector<std::pair<double, double>> sample_box;
    std::map<std::string, Expr> fields;
    std::optional<StructureTag> structure;
    double tolerance = 1e-7;
    long long seed = 42;
    int points = 32;

    /// Identifiers whose values are supplied externally at evaluation time
    /// (used for factor charts carved out of a product chart, where the
    /// other factor's coordinates appear as frozen constants). Not part of
    /// the JSON schema.
    std::vector<std::string> params;

    int coordinate_index(const std::string& name) const;
};

/// Parses and fully validates a manifest JSON document. Collects every
/// schema violation and reports them all in one ValidationError.
Manifest load_manifest(const std::string& json_text);

/// Normalized emission: full symmetric matrix, defaults filled, canonical
/// layout (sorted keys, %.12e floats, LF). Stable across runs.
std::string manifest_to_canonical_json(const Manifest& m);

/// FNV-1a 64-bit hash of the canonical JSON, rendered as fixed-width hex.
std::string manifest_hash(const Manifest& m);

/// Programmatic construction for internally generated charts (catalog
/// entries, product assembly, factor extraction). Parses all expressions
/// with symbols = coordinates + field names + params and enforces the same
/// core invariants as the loader.
Manifest make_chart(std::string name, std::vector<std::string> coordinates,
                    std::vector<std::vector<std::string>> metric,
                    std::vector<std::pair<double, double>> sample_box,
                    std::vector<std::pair<std::string, std::string>> fields = {},
                    std::vector<std::string> params = {});

} // namespace concircle

#include "concircle/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "canonical_json.hpp"
#include "concircle/errors.hpp"

namespace concircle {
namespace {

using nlohmann::json;

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

std::string strip_spaces(const std::string& s) {
    std::string out;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    auto e = s.find_last_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

struct Violations {
    std::vector<std::string> list;
    void add(std::string msg) { list.push_back(std::move(msg)); }
    bool empty() const { return list.empty(); }
};

void parse_metric_entries(Manifest& m, const std::vector<std::string>& symbols,
                          Violations& v) {
    const int n = m.dimension;
    m.metric.assign(n, std::vector<Expr>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            try {
                m.metric[i][j] = parse_expr(m.metric_source[i][j], symbols);
            } catch (const ParseError& e) {
                v.add("metric[" + std::to_string(i) + "][" + std::to_string(j) +
                      "]: " + e.what());
            }
        }
}

} // namespace

std::string structure_kind_name(StructureTag::Kind kind) {
    switch (kind) {
        case StructureTag::Kind::Warped: return "warped";
        case StructureTag::Kind::Grw: return "grw";
        case StructureTag::Kind::Ssst: return "ssst";
    }
    return "?";
}

int Manifest::coordinate_index(const std::string& coord) const {
    for (std::size_t i = 0; i < coordinates.size(); ++i)
        if (coordinates[i] == coord) return static_cast<int>(i);
    throw ArgumentError("unknown coordinate '" + coord + "'");
}

Manifest load_manifest(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError({std::string("malformed JSON: ") + e.what()});
    }

    Violations v;
    Manifest m;

    if (!doc.is_object()) {
        throw ValidationError({"top-level JSON value must be an object"});
    }

    static const std::set<std::string> known_keys = {
        "name",   "dimension", "coordinates", "metric", "sample_box",
        "fields", "structure", "tolerance",   "seed",   "points"};
    for (const auto& [key, _] : doc.items())
        if (!known_keys.count(key)) v.add("unknown key '" + key + "'");

    if (doc.contains("name")) {
        if (doc["name"].is_string())
            m.name = doc["name"].get<std::string>();
        else
            v.add("name must be a string");
    }

    if (!doc.contains("dimension") || !doc["dimension"].is_number_integer()) {
        v.add("dimension (integer) is required");
        throw ValidationError(std::move(v.list));
    }
    m.dimension = doc["dimension"].get<int>();
    if (m.dimension < 2 || m.dimension > Jet3::kMaxDim) {
        v.add("dimension must be in [2, " + std::to_string(Jet3::kMaxDim) +
              "], got " + std::to_string(m.dimension));
        throw ValidationError(std::move(v.list));
    }
    const int n = m.dimension;

    if (!doc.contains("coordinates") || !doc["coordinates"].is_array() ||
        doc["coordinates"].size() != static_cast<std::size_t>(n)) {
        v.add("coordinates must be an array of " + std::to_string(n) + " names");
        throw ValidationError(std::move(v.list));
    }
    std::set<std::string> seen;
    for (const auto& c : doc["coordinates"]) {
        if (!c.is_string()) {
            v.add("coordinate names must be strings");
            continue;
        }
        const std::string name = c.get<std::string>();
        if (!is_identifier(name)) v.add("invalid coordinate identifier '" + name + "'");
        if (is_reserved_function(name))
            v.add("coordinate '" + name + "' collides with a DSL function name");
        if (!seen.insert(name).second) v.add("duplicate coordinate '" + name + "'");
        m.coordinates.push_back(name);
    }

    // fields before metric: metric entries may reference field names
    if (doc.contains("fields")) {
        if (!doc["fields"].is_object()) {
            v.add("fields must be an object of name -> expression");
        } else {
            for (const auto& [fname, fexpr] : doc["fields"].items()) {
                if (!is_identifier(fname)) {
                    v.add("invalid field identifier '" + fname + "'");
                    continue;
                }
                if (is_reserved_function(fname)) {
                    v.add("field '" + fname + "' collides with a DSL function name");
                    continue;
                }
                if (std::count(m.coordinates.begin(), m.coordinates.end(), fname)) {
                    v.add("field '" + fname + "' shadows a coordinate");
                    continue;
                }
                if (!fexpr.is_string()) {
                    v.add("field '" + fname + "' must map to an expression string");
                    continue;
                }
                try {
                    m.fields[fname] = parse_expr(fexpr.get<std::string>(), m.coordinates);
                } catch (const ParseError& e) {
                    v.add("field '" + fname + "': " + e.what());
                }
            }
        }
    }

    std::vector<std::string> symbols = m.coordinates;
    for (const auto& [fname, _] : m.fields) symbols.push_back(fname);

    // metric: full matrix of strings, or upper triangle with symmetric:true
    if (!doc.contains("metric")) {
        v.add("metric is required");
    } else if (doc["metric"].is_object()) {
        const auto& mo = doc["metric"];
        if (!mo.contains("symmetric") || mo["symmetric"] != true ||
            !mo.contains("upper") || !mo["upper"].is_array()) {
            v.add("metric object form must be {\"symmetric\": true, \"upper\": [...]}");
        } else if (mo["upper"].size() != static_cast<std::size_t>(n)) {
            v.add("metric upper form must have " + std::to_string(n) + " rows");
        } else {
            m.metric_source.assign(n, std::vector<std::string>(n));
            bool shape_ok = true;
            for (int i = 0; i < n; ++i) {
                const auto& row = mo["upper"][i];
                if (!row.is_array() || row.size() != static_cast<std::size_t>(n - i)) {
                    v.add("metric upper row " + std::to_string(i) + " must have " +
                          std::to_string(n - i) + " entries");
                    shape_ok = false;
                    continue;
                }
                for (int j = i; j < n; ++j) {
                    if (!row[j - i].is_string()) {
                        v.add("metric entries must be expression strings");
                        shape_ok = false;
                        continue;
                    }
                    const std::string src = trim(row[j - i].get<std::string>());
                    m.metric_source[i][j] = src;
                    m.metric_source[j][i] = src;
                }
            }
            if (shape_ok) parse_metric_entries(m, symbols, v);
        }
    } else if (doc["metric"].is_array()) {
        if (doc["metric"].size() != static_cast<std::size_t>(n)) {
            v.add("metric must be an " + std::to_string(n) + "x" + std::to_string(n) +
                  " matrix of expression strings");
        } else {
            m.metric_source.assign(n, std::vector<std::string>(n));
            bool shape_ok = true;
            for (int i = 0; i < n; ++i) {
                const auto& row = doc["metric"][i];
                if (!row.is_array() || row.size() != static_cast<std::size_t>(n)) {
                    v.add("metric row " + std::to_string(i) + " must have " +
                          std::to_string(n) + " entries");
                    shape_ok = false;
                    continue;
                }
                for (int j = 0; j < n; ++j) {
                    if (!row[j].is_string()) {
                        v.add("metric entries must be expression strings");
                        shape_ok = false;
                        continue;
                    }
                    m.metric_source[i][j] = trim(row[j].get<std::string>());
                }
            }
            if (shape_ok) {
                for (int i = 0; i < n; ++i)
                    for (int j = i + 1; j < n; ++j)
                        if (strip_spaces(m.metric_source[i][j]) !=
                            strip_spaces(m.metric_source[j][i]))
                            v.add("asymmetric at (" + std::to_string(i) + "," +
                                  std::to_string(j) + ")");
                parse_metric_entries(m, symbols, v);
            }
        }
    } else {
        v.add("metric must be a matrix or the symmetric upper form");
    }

    if (!doc.contains("sample_box") || !doc["sample_box"].is_object()) {
        v.add("sample_box (object coordinate -> [lo, hi]) is required");
    } else {
        m.sample_box.assign(n, {0.0, 0.0});
        std::set<std::string> boxed;
        for (const auto& [coord, interval] : doc["sample_box"].items()) {
            const auto it =
                std::find(m.coordinates.begin(), m.coordinates.end(), coord);
            if (it == m.coordinates.end()) {
                v.add("sample_box names unknown coordinate '" + coord + "'");
                continue;
            }
            boxed.insert(coord);
            if (!interval.is_array() || interval.size() != 2 ||
                !interval[0].is_number() || !interval[1].is_number()) {
                v.add("sample_box['" + coord + "'] must be [lo, hi]");
                continue;
            }
            const double lo = interval[0].get<double>();
            const double hi = interval[1].get<double>();
            if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
                v.add("sample_box['" + coord +
                      "'] must be a finite non-degenerate interval");
            m.sample_box[it - m.coordinates.begin()] = {lo, hi};
        }
        for (const auto& c : m.coordinates)
            if (!boxed.count(c)) v.add("sample_box missing coordinate '" + c + "'");
    }

    if (doc.contains("tolerance")) {
        if (!doc["tolerance"].is_number() || !(doc["tolerance"].get<double>() > 0))
            v.add("tolerance must be a positive number");
        else
            m.tolerance = doc["tolerance"].get<double>();
    }
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_integer())
            v.add("seed must be an integer");
        else
            m.seed = doc["seed"].get<long long>();
    }
    if (doc.contains("points")) {
        if (!doc["points"].is_number_integer() || doc["points"].get<int>() < 1)
            v.add("points must be a positive integer");
        else
            m.points = doc["points"].get<int>();
    }

    if (doc.contains("structure")) {
        const auto& st = doc["structure"];
        StructureTag tag;
        bool ok = true;
        if (!st.is_object() || !st.contains("type") || !st["type"].is_string()) {
            v.add("structure must be an object with a 'type' string");
            ok = false;
        } else {
            const std::string type = st["type"].get<std::string>();
            if (type == "warped")
                tag.kind = StructureTag::Kind::Warped;
            else if (type == "grw")
                tag.kind = StructureTag::Kind::Grw;
            else if (type == "ssst")
                tag.kind = StructureTag::Kind::Ssst;
            else {
                v.add("structure.type must be one of warped|grw|ssst");
                ok = false;
            }
        }
        if (ok) {
            if (!st.contains("base_dimension") ||
                !st["base_dimension"].is_number_integer()) {
                v.add("structure.base_dimension (integer) is required");
                ok = false;
            } else {
                tag.base_dimension = st["base_dimension"].get<int>();
            }
            if (!st.contains("warping") || !st["warping"].is_string()) {
                v.add("structure.warping (field name) is required");
                ok = false;
            } else {
                tag.warping = st["warping"].get<std::string>();
                if (!m.fields.count(tag.warping)) {
                    v.add("structure.warping names unknown field '" + tag.warping + "'");
                    ok = false;
                }
            }
        }
        if (ok) {
            const int n1 = tag.base_dimension;
            const int n2 = n - n1;
            switch (tag.kind) {
                case StructureTag::Kind::Warped:
                    if (n1 < 2 || n2 < 2)
                        v.add("warped structure needs factor dimensions >= 2");
                    break;
                case StructureTag::Kind::Grw:
                    if (n1 != 1) v.add("grw structure requires base_dimension 1");
                    break;
                case StructureTag::Kind::Ssst:
                    if (n1 != n - 1)
                        v.add("ssst structure requires base_dimension n-1");
                    break;
            }
            // warping must be a function of the base factor's coordinates
            std::set<std::string> base_coords;
            if (tag.kind == StructureTag::Kind::Ssst) {
                for (int i = 1; i < n; ++i) base_coords.insert(m.coordinates[i]);
            } else {
                for (int i = 0; i < n1 && i < n; ++i) base_coords.insert(m.coordinates[i]);
            }
            if (m.fields.count(tag.warping)) {
                for (const auto& id : expr_identifiers(m.fields.at(tag.warping)))
                    if (!base_coords.count(id))
                        v.add("warping function references '" + id +
                              "', which is not a base-factor coordinate");
            }
            m.structure = tag;
        }
    }

    if (!v.empty()) throw ValidationError(std::move(v.list));
    return m;
}

std::string manifest_to_canonical_json(const Manifest& m) {
    json doc;
    doc["name"] = m.name;
    doc["dimension"] = m.dimension;
    doc["coordinates"] = m.coordinates;
    json metric = json::array();
    for (const auto& row : m.metric_source) metric.push_back(row);
    doc["metric"] = metric;
    json box = json::object();
    for (int i = 0; i < m.dimension; ++i)
        box[m.coordinates[i]] = {m.sample_box[i].first, m.sample_box[i].second};
    doc["sample_box"] = box;
    if (!m.fields.empty()) {
        json fields = json::object();
        for (const auto& [name, expr] : m.fields) fields[name] = expr.source();
        doc["fields"] = fields;
    }
    if (m.structure) {
        doc["structure"] = {{"type", structure_kind_name(m.structure->kind)},
                            {"base_dimension", m.structure->base_dimension},
                            {"warping", m.structure->warping}};
    }
    doc["tolerance"] = m.tolerance;
    doc["seed"] = m.seed;
    doc["points"] = m.points;
    return canonical_json(doc);
}

std::string manifest_hash(const Manifest& m) {
    const std::string text = manifest_to_canonical_json(m);
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Manifest make_chart(std::string name, std::vector<std::string> coordinates,
                    std::vector<std::vector<std::string>> metric,
                    std::vector<std::pair<double, double>> sample_box,
                    std::vector<std::pair<std::string, std::string>> fields,
                    std::vector<std::string> params) {
    Manifest m;
    m.name = std::move(name);
    m.dimension = static_cast<int>(coordinates.size());
    m.coordinates = std::move(coordinates);
    m.sample_box = std::move(sample_box);
    m.params = std::move(params);
    if (m.dimension < 1 || m.sample_box.size() != m.coordinates.size() ||
        metric.size() != m.coordinates.size())
        throw ArgumentError("make_chart: inconsistent sizes for '" + m.name + "'");

    std::vector<std::string> symbols = m.coordinates;
    for (const auto& [fname, _] : fields) symbols.push_back(fname);
    for (const auto& p : m.params) symbols.push_back(p);

    std::vector<std::string> field_symbols = m.coordinates;
    for (const auto& p : m.params) field_symbols.push_back(p);
    for (auto& [fname, fsrc] : fields)
        m.fields[fname] = parse_expr(fsrc, field_symbols);

    m.metric_source = std::move(metric);
    m.metric.assign(m.dimension, std::vector<Expr>(m.dimension));
    for (int i = 0; i < m.dimension; ++i) {
        if (m.metric_source[i].size() != static_cast<std::size_t>(m.dimension))
            throw ArgumentError("make_chart: metric row size mismatch");
        for (int j = 0; j < m.dimension; ++j)
            m.metric[i][j] = parse_expr(m.metric_source[i][j], symbols);
    }
    return m;
}

} // namespace concircle

#include "concircle/catalog.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "concircle/errors.hpp"
#include "concircle/warped.hpp"

namespace concircle {
namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Params {
    const std::string& entry;
    std::map<std::string, std::string> values;
    std::set<std::string> known;

    std::string str(const std::string& key, const std::string& fallback) {
        known.insert(key);
        const auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }
    double num(const std::string& key, double fallback, double lo, double hi) {
        known.insert(key);
        const auto it = values.find(key);
        if (it == values.end()) return fallback;
        double v;
        try {
            v = std::stod(it->second);
        } catch (...) {
            throw ArgumentError("catalog '" + entry + "': parameter '" + key +
                                "' must be numeric, got '" + it->second + "'");
        }
        if (!(v >= lo && v <= hi))
            throw ArgumentError("catalog '" + entry + "': parameter '" + key +
                                "' out of range [" + fmt(lo) + ", " + fmt(hi) + "]");
        return v;
    }
    int integer(const std::string& key, int fallback, int lo, int hi) {
        return static_cast<int>(num(key, fallback, lo, hi));
    }
    void finish() const {
        for (const auto& [key, _] : values)
            if (!known.count(key)) {
                std::string msg = "catalog '" + entry + "': unknown parameter '" +
                                  key + "'; valid:";
                for (const auto& k : known) msg += " " + k;
                throw ArgumentError(msg);
            }
    }
};

std::vector<std::string> indexed_coords(const std::string& stem, int n, int from = 1) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(stem + std::to_string(from + i));
    return out;
}

std::vector<std::vector<std::string>> diagonal(const std::vector<std::string>& d) {
    const int n = static_cast<int>(d.size());
    std::vector<std::vector<std::string>> m(n, std::vector<std::string>(n, "0"));
    for (int i = 0; i < n; ++i) m[i][i] = d[i];
    return m;
}

Manifest euclidean(int n, const std::string& name = "euclidean") {
    return make_chart(name, indexed_coords("x", n),
                      diagonal(std::vector<std::string>(n, "1")),
                      std::vector<std::pair<double, double>>(n, {0.0, 1.0}));
}

Manifest minkowski(int n) {
    std::vector<std::string> coords = {"t"};
    for (const auto& c : indexed_coords("x", n - 1)) coords.push_back(c);
    std::vector<std::string> diag(n, "1");
    diag[0] = "-1";
    return make_chart("minkowski", coords, diagonal(diag),
                      std::vector<std::pair<double, double>>(n, {0.0, 1.0}));
}

/// Round sphere of radius r in nested polar angles; curvature 1/r^2.
/// Boxes keep away from the polar coordinate singularities.
Manifest sphere(int n, double r, const std::string& name = "sphere") {
    const auto coords = indexed_coords("t", n);
    std::vector<std::string> diag(n);
    std::string prefix = fmt(r * r);
    for (int i = 0; i < n; ++i) {
        diag[i] = prefix;
        prefix += " * sin(" + coords[i] + ")^2";
    }
    std::vector<std::pair<double, double>> box(n, {0.3, 2.8});
    box[n - 1] = {0.3, 6.0};
    return make_chart(name, coords, diagonal(diag), box);
}

/// Upper half-space model g = r^2 (sum dx_i^2 + dz^2)/z^2; curvature -1/r^2.
Manifest hyperbolic_halfspace(int n, double r, const std::string& name = "hyperbolic") {
    auto coords = indexed_coords("x", n - 1);
    coords.push_back("z");
    const std::string entry = fmt(r * r) + " / z^2";
    std::vector<std::pair<double, double>> box(n, {0.0, 1.0});
    box[n - 1] = {0.2, 1.2};
    return make_chart(name, coords,
                      diagonal(std::vector<std::string>(n, entry)), box);
}

Manifest schwarzschild(double mass) {
    const std::string m = fmt(mass);
    return make_chart(
        "schwarzschild", {"t", "r", "theta", "phi"},
        {{"-(1 - 2*" + m + "/r)", "0", "0", "0"},
         {"0", "1/(1 - 2*" + m + "/r)", "0", "0"},
         {"0", "0", "r^2", "0"},
         {"0", "0", "0", "r^2 * sin(theta)^2"}},
        {{0.0, 1.0}, {3 * mass, 6 * mass}, {0.6, 2.5}, {0.3, 6.0}});
}

Manifest interval_chart(double lo, double hi) {
    return make_chart("interval", {"t"}, {{"-1"}}, {{lo, hi}});
}

Manifest fiber_by_name(Params& p) {
    const std::string fiber = p.str("fiber", "sphere");
    const int fn = p.integer("fiber_n", 3, 2, 6);
    const double fr = p.num("fiber_r", 1.0, 1e-3, 1e3);
    if (fiber == "sphere") return sphere(fn, fr);
    if (fiber == "hyperbolic") return hyperbolic_halfspace(fn, fr);
    if (fiber == "euclidean") return euclidean(fn);
    throw ArgumentError("catalog '" + p.entry +
                        "': fiber must be sphere|hyperbolic|euclidean");
}

} // namespace

const std::vector<CatalogEntry>& catalog_entries() {
    static const std::vector<CatalogEntry> entries = {
        {"euclidean", "flat R^n, identity metric", {{"n", "3"}}},
        {"minkowski", "flat Lorentzian diag(-1,1,...,1)", {{"n", "4"}}},
        {"sphere", "round S^n of radius r (curvature 1/r^2)",
         {{"n", "3"}, {"r", "1"}}},
        {"hyperbolic_halfspace",
         "hyperbolic upper half-space of radius r (curvature -1/r^2)",
         {{"n", "3"}, {"r", "1"}}},
        {"schwarzschild", "static exterior chart, G = c = 1, box r in [3m, 6m]",
         {{"m", "1"}}},
        {"perturbed3", "diag(1, 1 + 0.3 x^2, 1); generic non-Codazzi witness", {}},
        {"warped", "generic warped product base x_f fiber",
         {{"f", "1"},
          {"base", "sphere"},
          {"base_n", "3"},
          {"base_r", "1"},
          {"fiber", "sphere"},
          {"fiber_n", "3"},
          {"fiber_r", "1"}}},
        {"grw", "generalized Robertson-Walker -dt^2 + f(t)^2 g",
         {{"f", "t^2 + 1"},
          {"t_lo", "0.2"},
          {"t_hi", "1.5"},
          {"fiber", "sphere"},
          {"fiber_n", "3"},
          {"fiber_r", "1"}}},
        {"ssst", "standard static -f^2 dt^2 + g, f on the spatial factor",
         {{"f", "x1"},
          {"spatial", "euclidean"},
          {"spatial_n", "3"},
          {"t_lo", "0"},
          {"t_hi", "1"}}},
        {"einstein_static", "ssst with f = 1 over the unit S^3", {}},
        {"de_sitter", "grw with f = cosh t over the unit S^3", {}},
        {"linear_grw", "grw with f = a t + b over hyperbolic fiber of curvature -a^2",
         {{"a", "0.7"}, {"b", "2"}}},
        {"s3xs3", "direct product S^3 x S^3 (f = 1)", {}},
        {"exp_warped", "E^2 x_{exp(x1)} S^2", {}},
    };
    return entries;
}

Manifest catalog_build(const std::string& name,
                       const std::map<std::string, std::string>& params) {
    Params p{name, params, {}};
    Manifest m;

    if (name == "euclidean") {
        m = euclidean(p.integer("n", 3, 2, 8));
    } else if (name == "minkowski") {
        m = minkowski(p.integer("n", 4, 2, 8));
    } else if (name == "sphere") {
        m = sphere(p.integer("n", 3, 2, 8), p.num("r", 1.0, 1e-3, 1e3));
    } else if (name == "hyperbolic_halfspace") {
        m = hyperbolic_halfspace(p.integer("n", 3, 2, 8), p.num("r", 1.0, 1e-3, 1e3));
    } else if (name == "schwarzschild") {
        m = schwarzschild(p.num("m", 1.0, 1e-3, 1e3));
    } else if (name == "perturbed3") {
        m = make_chart("perturbed3", {"x", "y", "z"},
                       {{"1", "0", "0"},
                        {"0", "1 + 0.3 * x^2", "0"},
                        {"0", "0", "1"}},
                       {{0.2, 1.2}, {0.2, 1.2}, {0.2, 1.2}});
    } else if (name == "warped") {
        WarpedInput in;
        in.name = "warped";
        in.kind = StructureTag::Kind::Warped;
        const std::string base = p.str("base", "sphere");
        const int bn = p.integer("base_n", 3, 2, 6);
        const double br = p.num("base_r", 1.0, 1e-3, 1e3);
        if (base == "sphere")
            in.base = sphere(bn, br);
        else if (base == "hyperbolic")
            in.base = hyperbolic_halfspace(bn, br);
        else if (base == "euclidean")
            in.base = euclidean(bn);
        else
            throw ArgumentError("catalog 'warped': base must be "
                                "sphere|hyperbolic|euclidean");
        in.fiber = fiber_by_name(p);
        in.warping = p.str("f", "1");
        m = product_metric(in);
    } else if (name == "grw") {
        WarpedInput in;
        in.name = "grw";
        in.kind = StructureTag::Kind::Grw;
        const double lo = p.num("t_lo", 0.2, -1e3, 1e3);
        const double hi = p.num("t_hi", 1.5, -1e3, 1e3);
        in.base = interval_chart(lo, hi);
        in.fiber = fiber_by_name(p);
        in.warping = p.str("f", "t^2 + 1");
        m = product_metric(in);
    } else if (name == "ssst") {
        WarpedInput in;
        in.name = "ssst";
        in.kind = StructureTag::Kind::Ssst;
        const std::string spatial = p.str("spatial", "euclidean");
        const int sn = p.integer("spatial_n", 3, 2, 6);
        if (spatial == "euclidean") {
            in.base = euclidean(sn);
            // keep the default warping f = x1 positive on the box
            in.base.sample_box[0] = {0.3, 2.0};
        } else if (spatial == "sphere") {
            in.base = sphere(sn, p.num("spatial_r", 1.0, 1e-3, 1e3));
        } else {
            throw ArgumentError("catalog 'ssst': spatial must be euclidean|sphere");
        }
        in.fiber = interval_chart(p.num("t_lo", 0.0, -1e3, 1e3),
                                  p.num("t_hi", 1.0, -1e3, 1e3));
        in.warping = p.str("f", "x1");
        m = product_metric(in);
    } else if (name == "einstein_static") {
        WarpedInput in;
        in.name = "einstein_static";
        in.kind = StructureTag::Kind::Ssst;
        in.base = sphere(3, 1.0);
        in.fiber = interval_chart(0.0, 1.0);
        in.warping = "1";
        m = product_metric(in);
    } else if (name == "de_sitter") {
        WarpedInput in;
        in.name = "de_sitter";
        in.kind = StructureTag::Kind::Grw;
        in.base = interval_chart(-0.8, 0.8);
        in.fiber = sphere(3, 1.0);
        in.warping = "cosh(t)";
        m = product_metric(in);
    } else if (name == "linear_grw") {
        const double a = p.num("a", 0.7, 1e-3, 1e3);
        const double b = p.num("b", 2.0, -1e3, 1e3);
        WarpedInput in;
        in.name = "linear_grw";
        in.kind = StructureTag::Kind::Grw;
        in.base = interval_chart(0.0, 2.0);
        in.fiber = hyperbolic_halfspace(3, 1.0 / a); // curvature -a^2
        in.warping = fmt(a) + " * t + " + fmt(b);
        m = product_metric(in);
    } else if (name == "s3xs3") {
        WarpedInput in;
        in.name = "s3xs3";
        in.kind = StructureTag::Kind::Warped;
        in.base = sphere(3, 1.0);
        in.fiber = sphere(3, 1.0);
        in.warping = "1";
        m = product_metric(in);
    } else if (name == "exp_warped") {
        WarpedInput in;
        in.name = "exp_warped";
        in.kind = StructureTag::Kind::Warped;
        in.base = euclidean(2);
        in.base.sample_box = {{0.2, 1.2}, {0.2, 1.2}};
        in.fiber = sphere(2, 1.0);
        in.warping = "exp(x1)";
        m = product_metric(in);
    } else {
        std::string msg = "unknown catalog entry '" + name + "'; valid entries:";
        for (const auto& e : catalog_entries()) msg += " " + e.name;
        throw ArgumentError(msg);
    }
    p.finish();
    m.name = name;
    return m;
}

} // namespace concircle

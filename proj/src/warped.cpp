#include "concircle/warped.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "concircle/errors.hpp"

namespace concircle {
namespace {

std::string strip_spaces(const std::string& s) {
    std::string out;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    return out;
}

bool is_interval_chart(const Manifest& m) {
    return m.dimension == 1 && strip_spaces(m.metric_source[0][0]) == "-1";
}

double beta_of(int n) { return static_cast<double>(n) * (n - 1); }

/// max over i of |t_i| for the jet values of a rank-anything tensor
double scale2(double a, double b) { return std::max(a, b); }

} // namespace

Manifest product_metric(const WarpedInput& in) {
    const Manifest& base = in.base;
    const Manifest& fiber = in.fiber;
    const int n1 = base.dimension;
    const int n2 = fiber.dimension;
    const int n = n1 + n2;

    switch (in.kind) {
        case StructureTag::Kind::Warped:
            if (n1 < 2 || n2 < 2)
                throw ArgumentError(
                    "warped products need both factor dimensions >= 2");
            break;
        case StructureTag::Kind::Grw:
            if (!is_interval_chart(base))
                throw ArgumentError("grw base must be the interval chart (t, [[-1]])");
            break;
        case StructureTag::Kind::Ssst:
            if (!is_interval_chart(fiber))
                throw ArgumentError("ssst fiber must be the interval chart (t, [[-1]])");
            if (n1 < 2)
                throw ArgumentError("ssst spatial factor must have dimension >= 2");
            break;
    }
    if (n < 3)
        throw ArgumentError("product dimension must be >= 3 for concircular analysis");
    if (n > Jet3::kMaxDim)
        throw ArgumentError("product dimension exceeds the supported maximum of " +
                            std::to_string(Jet3::kMaxDim));

    // disjoint coordinate names; fiber names get suffixed on collision
    std::set<std::string> taken(base.coordinates.begin(), base.coordinates.end());
    std::map<std::string, std::string> fiber_rename;
    std::vector<std::string> fiber_coords;
    for (const auto& c : fiber.coordinates) {
        std::string name = c;
        int suffix = 2;
        while (taken.count(name)) {
            name = c + "_" + std::to_string(suffix++);
            if (suffix > 9)
                throw Error("internal: cannot find a free coordinate name for '" + c +
                            "'");
        }
        if (name != c) fiber_rename[c] = name;
        taken.insert(name);
        fiber_coords.push_back(name);
    }

    std::string fname = "f";
    while (taken.count(fname)) fname += "_w";
    taken.insert(fname);

    // verify f > 0 over the base box before assembling anything
    {
        std::map<std::string, Jet3> env;
        std::vector<std::string> syms = base.coordinates;
        Expr fexpr = parse_expr(in.warping, syms);
        std::mt19937_64 rng(1234);
        const int trials = 64;
        for (int t = -1; t < trials; ++t) {
            std::vector<double> p(n1);
            for (int i = 0; i < n1; ++i) {
                const auto [lo, hi] = base.sample_box[i];
                if (t < 0)
                    p[i] = 0.5 * (lo + hi);
                else
                    p[i] = lo + (hi - lo) *
                                    ((rng() >> 11) * 0x1.0p-53);
            }
            env.clear();
            for (int i = 0; i < n1; ++i)
                env[base.coordinates[i]] = Jet3::variable(i, p[i], n1);
            const double fv = eval_expr(fexpr, env).value();
            if (!(fv > 0.0))
                throw DomainError("warping function is not positive on the base box (f = " +
                                      std::to_string(fv) + ")",
                                  p);
        }
    }

    const bool time_first = in.kind == StructureTag::Kind::Ssst;
    std::vector<std::string> coords;
    if (time_first) {
        coords = fiber_coords; // the interval coordinate
        coords.insert(coords.end(), base.coordinates.begin(), base.coordinates.end());
    } else {
        coords = base.coordinates;
        coords.insert(coords.end(), fiber_coords.begin(), fiber_coords.end());
    }

    std::vector<std::vector<std::string>> entries(n, std::vector<std::string>(n, "0"));
    const int base_off = time_first ? n2 : 0;
    const int fiber_off = time_first ? 0 : n1;
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n1; ++j)
            entries[base_off + i][base_off + j] = base.metric_source[i][j];
    for (int i = 0; i < n2; ++i)
        for (int j = 0; j < n2; ++j) {
            const std::string src =
                print_expr_renamed(fiber.metric[i][j], fiber_rename);
            entries[fiber_off + i][fiber_off + j] =
                strip_spaces(src) == "0" ? "0" : fname + "^2 * (" + src + ")";
        }

    std::vector<std::pair<double, double>> box;
    if (time_first) {
        box = fiber.sample_box;
        box.insert(box.end(), base.sample_box.begin(), base.sample_box.end());
    } else {
        box = base.sample_box;
        box.insert(box.end(), fiber.sample_box.begin(), fiber.sample_box.end());
    }

    Manifest m = make_chart(in.name, coords, entries, box, {{fname, in.warping}});
    StructureTag tag;
    tag.kind = in.kind;
    tag.base_dimension = n1;
    tag.warping = fname;
    m.structure = tag;
    return m;
}

WarpedSpec WarpedSpec::from_manifest(const Manifest& product) {
    if (!product.structure)
        throw ArgumentError("manifest '" + product.name + "' has no structure tag");
    WarpedSpec s;
    s.kind = product.structure->kind;
    s.product = product;
    s.warping = product.structure->warping;
    const int n = product.dimension;
    s.n1 = product.structure->base_dimension;
    s.n2 = n - s.n1;

    const bool time_first = s.kind == StructureTag::Kind::Ssst;
    for (int i = 0; i < s.n1; ++i) s.base_slots.push_back(time_first ? 1 + i : i);
    for (int i = 0; i < s.n2; ++i)
        s.fiber_slots.push_back(time_first ? i : s.n1 + i);

    std::vector<std::string> base_coords, fiber_coords;
    std::vector<std::pair<double, double>> base_box, fiber_box;
    for (int sl : s.base_slots) {
        base_coords.push_back(product.coordinates[sl]);
        base_box.push_back(product.sample_box[sl]);
    }
    for (int sl : s.fiber_slots) {
        fiber_coords.push_back(product.coordinates[sl]);
        fiber_box.push_back(product.sample_box[sl]);
    }

    // base factor: the product block as written, plus the warping field
    const std::string warp_src = product.fields.at(s.warping).source();
    std::vector<std::vector<std::string>> base_entries(
        s.n1, std::vector<std::string>(s.n1));
    for (int i = 0; i < s.n1; ++i)
        for (int j = 0; j < s.n1; ++j) {
            const std::string& src =
                product.metric_source[s.base_slots[i]][s.base_slots[j]];
            for (const auto& id :
                 expr_identifiers(product.metric[s.base_slots[i]][s.base_slots[j]])) {
                if (std::find(fiber_coords.begin(), fiber_coords.end(), id) !=
                    fiber_coords.end())
                    throw ArgumentError(
                        "base metric block references fiber coordinate '" + id + "'");
            }
            base_entries[i][j] = src;
        }
    if (s.kind == StructureTag::Kind::Grw &&
        strip_spaces(base_entries[0][0]) != "-1")
        throw ArgumentError("grw base factor must carry the metric -dt^2");
    s.base = make_chart(product.name + "#base", base_coords, base_entries, base_box,
                        {{s.warping, warp_src}});

    // fiber factor: the product block divided by f^2; the base coordinates
    // and f itself enter as externally bound parameters
    std::vector<std::string> fiber_params = base_coords;
    fiber_params.push_back(s.warping);
    std::vector<std::vector<std::string>> fiber_entries(
        s.n2, std::vector<std::string>(s.n2));
    for (int i = 0; i < s.n2; ++i)
        for (int j = 0; j < s.n2; ++j) {
            const std::string& src =
                product.metric_source[s.fiber_slots[i]][s.fiber_slots[j]];
            fiber_entries[i][j] = strip_spaces(src) == "0"
                                      ? "0"
                                      : "(" + src + ") / " + s.warping + "^2";
        }
    s.fiber = make_chart(product.name + "#fiber", fiber_coords, fiber_entries,
                         fiber_box, {}, fiber_params);
    return s;
}

WarpedPointData evaluate_warped_point(const WarpedSpec& spec,
                                      std::span<const double> product_point) {
    PointFrame frame = build_frame(spec.product, product_point);
    CurvatureBundle ambient = curvature_bundle(frame);
    return evaluate_warped_point(spec, product_point, std::move(frame),
                                 std::move(ambient));
}

WarpedPointData evaluate_warped_point(const WarpedSpec& spec,
                                      std::span<const double> product_point,
                                      PointFrame product_frame,
                                      CurvatureBundle ambient) {
    WarpedPointData d;
    d.point.assign(product_point.begin(), product_point.end());
    d.product_frame = std::move(product_frame);
    d.ambient = std::move(ambient);

    std::vector<double> base_pt, fiber_pt;
    for (int sl : spec.base_slots) base_pt.push_back(product_point[sl]);
    for (int sl : spec.fiber_slots) fiber_pt.push_back(product_point[sl]);

    d.base_frame = build_frame(spec.base, base_pt);
    d.f = d.base_frame.field(spec.warping);
    if (!(d.f.value() > 0.0))
        throw DomainError("warping function is not positive at the sample point",
                          d.point);

    std::map<std::string, double> bound;
    for (int i = 0; i < spec.n1; ++i)
        bound[spec.base.coordinates[i]] = base_pt[i];
    bound[spec.warping] = d.f.value();
    d.fiber_frame = build_frame(spec.fiber, fiber_pt, bound);

    // the structure tag promises a block-diagonal product metric
    const double gscale = max_abs(d.product_frame.g);
    for (int b : spec.base_slots)
        for (int a : spec.fiber_slots)
            if (std::abs(d.product_frame.g.at(b, a).value()) >
                1e-10 * std::max(1.0, gscale))
                throw DomainError(
                    "product metric is not block diagonal; structure tag is wrong",
                    d.point);
    if (spec.kind == StructureTag::Kind::Grw) {
        if (std::abs(d.product_frame.g.at(0, 0).value() + 1.0) > 1e-10)
            throw DomainError("grw metric must have g_tt = -1", d.point);
    }
    if (spec.kind == StructureTag::Kind::Ssst) {
        const double expect = -d.f.value() * d.f.value();
        if (std::abs(d.product_frame.g.at(0, 0).value() - expect) >
            1e-10 * std::max(1.0, std::abs(expect)))
            throw DomainError("ssst metric must have g_tt = -f^2", d.point);
    }

    d.base_curv = curvature_bundle(d.base_frame);
    d.fiber_curv = curvature_bundle(d.fiber_frame);
    d.warp = scalar_calculus_of(d.base_frame, d.f);
    d.tau_ambient = d.ambient.tau.value();

    Jet3 gsq = Jet3::constant(0.0, spec.n1);
    for (int i = 0; i < spec.n1; ++i)
        gsq = gsq + d.warp.grad.at(i) * d.f.partial(i);
    d.grad_norm_sq = gsq;
    return d;
}

std::vector<OracleBlock> concircular_oracle_blocks(const WarpedSpec& spec,
                                                   const WarpedPointData& d) {
    const int n = spec.product.dimension;
    const double beta = beta_of(n);
    const double tau = d.tau_ambient;
    const double fv = d.f.value();

    const RealTensor c_op =
        curvature_operator(d.product_frame, values_of(d.ambient.concircular_t));
    const RealTensor r1_op =
        curvature_operator(d.base_frame, values_of(d.base_curv.riemann.down));
    const RealTensor r2_op =
        curvature_operator(d.fiber_frame, values_of(d.fiber_curv.riemann.down));

    const auto& g1 = d.base_frame.g;
    const auto& g2 = d.fiber_frame.g;
    const auto& hess = d.warp.hessian;

    // (nabla grad f)^b_x = g1^{bz} H_{xz}
    std::vector<std::vector<double>> dgrad(spec.n1, std::vector<double>(spec.n1, 0));
    for (int b = 0; b < spec.n1; ++b)
        for (int x = 0; x < spec.n1; ++x) {
            double sum = 0.0;
            for (int z = 0; z < spec.n1; ++z)
                sum += d.base_frame.g_inv.at(b, z).value() * hess.at(x, z).value();
            dgrad[b][x] = sum;
        }

    const auto sb = [&](int i) { return spec.base_slots[i]; };
    const auto sf = [&](int i) { return spec.fiber_slots[i]; };

    struct Run {
        std::string name;
        // ranges: 0 = base, 1 = fiber, per argument slot
        int rx, ry, rz;
        std::function<double(int, int, int, int)> oracle; // (x,y,z,m product idx)
    };

    std::vector<Run> runs;
    const double kappa = tau / beta;

    if (spec.kind == StructureTag::Kind::Warped) {
        runs.push_back({"base", 0, 0, 0, [&](int x, int y, int z, int m) {
                            for (int i = 0; i < spec.n1; ++i)
                                if (m == sb(i)) {
                                    double v = r1_op.at(i, x, y, z);
                                    if (i == y)
                                        v -= kappa * g1.at(x, z).value();
                                    if (i == x)
                                        v += kappa * g1.at(y, z).value();
                                    return v;
                                }
                            return 0.0;
                        }});
        runs.push_back({"mixed_fiber_base", 1, 0, 0, [&](int x, int y, int z, int m) {
                            if (m != sf(x)) return 0.0;
                            return hess.at(y, z).value() / fv +
                                   kappa * g1.at(y, z).value();
                        }});
        runs.push_back({"mixed_base_fiber", 0, 1, 1, [&](int x, int y, int z, int m) {
                            for (int b = 0; b < spec.n1; ++b)
                                if (m == sb(b)) {
                                    double v = dgrad[b][x];
                                    if (b == x) v += kappa * fv;
                                    return fv * g2.at(y, z).value() * v;
                                }
                            return 0.0;
                        }});
        runs.push_back({"fiber", 1, 1, 1, [&](int x, int y, int z, int m) {
                            const double coef =
                                d.grad_norm_sq.value() + kappa * fv * fv;
                            for (int a = 0; a < spec.n2; ++a)
                                if (m == sf(a)) {
                                    double v = r2_op.at(a, x, y, z);
                                    if (a == y) v -= coef * g2.at(x, z).value();
                                    if (a == x) v += coef * g2.at(y, z).value();
                                    return v;
                                }
                            return 0.0;
                        }});
    } else if (spec.kind == StructureTag::Kind::Grw) {
        // scalars from the base interval: f, fdot, fddot
        const double fdot = d.f.derivative({0});
        const double fddot = d.f.derivative({0, 0});
        const double cond = fddot - kappa * fv; // f'' - tau f / (n(n-1))
        runs.push_back({"t_t_t", 0, 0, 0,
                        [&](int, int, int, int) { return 0.0; }});
        runs.push_back({"fiber_t_t", 1, 0, 0, [&, cond](int x, int, int, int m) {
                            return m == sf(x) ? cond / fv : 0.0;
                        }});
        runs.push_back({"t_fiber_fiber", 0, 1, 1,
                        [&, cond](int, int y, int z, int m) {
                            if (m != sb(0)) return 0.0;
                            return -fv * cond * g2.at(y, z).value();
                        }});
        runs.push_back({"fiber", 1, 1, 1, [&, fdot](int x, int y, int z, int m) {
                            const double coef = fdot * fdot - kappa * fv * fv;
                            for (int a = 0; a < spec.n2; ++a)
                                if (m == sf(a)) {
                                    double v = r2_op.at(a, x, y, z);
                                    if (a == y) v += coef * g2.at(x, z).value();
                                    if (a == x) v -= coef * g2.at(y, z).value();
                                    return v;
                                }
                            return 0.0;
                        }});
    } else { // Ssst: base is the spatial factor, fiber the interval
        runs.push_back({"spatial_t_t", 0, 1, 1, [&](int x, int, int, int m) {
                            for (int b = 0; b < spec.n1; ++b)
                                if (m == sb(b)) {
                                    double v = dgrad[b][x];
                                    if (b == x) v += kappa * fv;
                                    return -fv * v;
                                }
                            return 0.0;
                        }});
        runs.push_back({"t_spatial_spatial", 1, 0, 0, [&](int, int y, int z, int m) {
                            if (m != sf(0)) return 0.0;
                            return hess.at(y, z).value() / fv +
                                   kappa * g1.at(y, z).value();
                        }});
        runs.push_back({"spatial", 0, 0, 0, [&](int x, int y, int z, int m) {
                            for (int i = 0; i < spec.n1; ++i)
                                if (m == sb(i)) {
                                    double v = r1_op.at(i, x, y, z);
                                    if (i == y) v -= kappa * g1.at(x, z).value();
                                    if (i == x) v += kappa * g1.at(y, z).value();
                                    return v;
                                }
                            return 0.0;
                        }});
    }

    std::vector<OracleBlock> out;
    for (const auto& run : runs) {
        OracleBlock blk;
        blk.name = run.name;
        const int nx = run.rx == 0 ? spec.n1 : spec.n2;
        const int ny = run.ry == 0 ? spec.n1 : spec.n2;
        const int nz = run.rz == 0 ? spec.n1 : spec.n2;
        double defect = 0.0;
        for (int x = 0; x < nx; ++x)
            for (int y = 0; y < ny; ++y)
                for (int z = 0; z < nz; ++z) {
                    const int px = run.rx == 0 ? sb(x) : sf(x);
                    const int py = run.ry == 0 ? sb(y) : sf(y);
                    const int pz = run.rz == 0 ? sb(z) : sf(z);
                    for (int m = 0; m < n; ++m) {
                        const double o = run.oracle(x, y, z, m);
                        const double p = c_op.at(m, px, py, pz);
                        defect = std::max(defect, std::abs(o - p));
                        blk.oracle_scale = std::max(blk.oracle_scale, std::abs(o));
                        blk.pipeline_scale =
                            std::max(blk.pipeline_scale, std::abs(p));
                    }
                }
        blk.agreement_defect =
            normalized(defect, scale2(blk.oracle_scale, blk.pipeline_scale));
        out.push_back(std::move(blk));
    }
    return out;
}

std::map<std::string, double> flatness_residuals(const WarpedSpec& spec,
                                                 const WarpedPointData& d) {
    const int n = spec.product.dimension;
    const double beta = beta_of(n);
    const double kappa = d.tau_ambient / beta;
    const double fv = d.f.value();
    const double gsq = d.grad_norm_sq.value();

    std::map<std::string, double> r;

    if (spec.n1 >= 2) {
        const RealTensor r1 = values_of(d.base_curv.riemann.down);
        RealTensor model = values_of(metric_model_tensor(d.base_frame));
        double defect = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < r1.components().size(); ++i) {
            const double m = kappa * model.components()[i];
            defect = std::max(defect, std::abs(r1.components()[i] - m));
            scale = std::max({scale, std::abs(r1.components()[i]), std::abs(m)});
        }
        r["base_constant_curvature"] = normalized(defect, scale);
    }
    if (spec.n2 >= 2) {
        const double kappa2 = kappa * fv * fv + gsq;
        const RealTensor r2 = values_of(d.fiber_curv.riemann.down);
        RealTensor model = values_of(metric_model_tensor(d.fiber_frame));
        double defect = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < r2.components().size(); ++i) {
            const double m = kappa2 * model.components()[i];
            defect = std::max(defect, std::abs(r2.components()[i] - m));
            scale = std::max({scale, std::abs(r2.components()[i]), std::abs(m)});
        }
        r["fiber_constant_curvature"] = normalized(defect, scale);
    }

    {
        double defect = 0.0, scale = 0.0;
        for (int y = 0; y < spec.n1; ++y)
            for (int z = 0; z < spec.n1; ++z) {
                const double a = d.warp.hessian.at(y, z).value() / fv;
                const double b = kappa * d.base_frame.g.at(y, z).value();
                defect = std::max(defect, std::abs(a + b));
                scale = std::max({scale, std::abs(a), std::abs(b)});
            }
        r["hessian_condition"] = normalized(defect, scale);
    }
    {
        double defect = 0.0, scale = 0.0;
        for (int y = 0; y < spec.n1; ++y)
            for (int z = 0; z < spec.n1; ++z) {
                const double a = d.warp.hessian.at(y, z).value();
                const double b = kappa * fv * d.base_frame.g.at(y, z).value();
                defect = std::max(defect, std::abs(a + b));
                scale = std::max({scale, std::abs(a), std::abs(b)});
            }
        r["hessian_type"] = normalized(defect, scale);
    }
    {
        const double lap = d.warp.laplacian.value();
        const double b = spec.n1 * kappa * fv;
        r["laplacian_trace"] =
            normalized(std::abs(lap + b), scale2(std::abs(lap), std::abs(b)));
    }
    r["f_sharp_value"] = fv * d.warp.laplacian.value() + (spec.n2 - 1) * gsq;

    if (spec.kind == StructureTag::Kind::Grw) {
        const double fddot = d.f.derivative({0, 0});
        r["grw_f_condition"] =
            normalized(std::abs(fddot - kappa * fv),
                       scale2(std::abs(fddot), std::abs(kappa * fv)));
    }
    return r;
}

std::map<std::string, double> symmetry_residuals(const WarpedSpec& spec,
                                                 const WarpedPointData& d) {
    const int n = spec.product.dimension;
    const double beta = beta_of(n);
    std::map<std::string, double> r;

    const RealTensor dr1 = nabla(d.base_frame, d.base_curv.riemann.down);
    r["base_nabla_riemann"] =
        normalized(max_abs(dr1), max_abs(d.base_curv.riemann.down));

    const double fv = d.f.value();
    JetTensor par(spec.n1, {Variance::Down, Variance::Down},
                  Jet3::constant(0.0, spec.n1));
    for (int y = 0; y < spec.n1; ++y)
        for (int z = 0; z < spec.n1; ++z)
            par.at(y, z) = d.warp.hessian.at(y, z) / d.f;
    r["parallel_hessian"] = normalized(max_abs(nabla(d.base_frame, par)),
                                       max_abs(par));

    // R1(grad f, Y) Z = F(Z,Y) grad f - Z(ln f) nabla_Y grad f
    {
        const RealTensor r1_op =
            curvature_operator(d.base_frame, values_of(d.base_curv.riemann.down));
        double defect = 0.0, scale = 0.0;
        for (int m = 0; m < spec.n1; ++m)
            for (int y = 0; y < spec.n1; ++y)
                for (int z = 0; z < spec.n1; ++z) {
                    double lhs = 0.0;
                    for (int i = 0; i < spec.n1; ++i)
                        lhs += r1_op.at(m, i, y, z) * d.warp.grad.at(i).value();
                    double dgrad_m_y = 0.0;
                    for (int w = 0; w < spec.n1; ++w)
                        dgrad_m_y += d.base_frame.g_inv.at(m, w).value() *
                                     d.warp.hessian.at(y, w).value();
                    const double rhs = par.at(z, y).value() *
                                           d.warp.grad.at(m).value() -
                                       d.f.derivative({z}) / fv * dgrad_m_y;
                    defect = std::max(defect, std::abs(lhs - rhs));
                    scale = std::max({scale, std::abs(lhs), std::abs(rhs)});
                }
        r["gradf_curvature_relation"] = normalized(defect, scale);
    }

    // X1(f) R2(a, b) c = (X1(f)|grad f|^2 - f^2 F(X1, grad f)) G2(a,b,c)
    {
        const RealTensor r2_op =
            curvature_operator(d.fiber_frame, values_of(d.fiber_curv.riemann.down));
        const auto& g2 = d.fiber_frame.g;
        double defect = 0.0, scale = 0.0;
        for (int x = 0; x < spec.n1; ++x) {
            const double dfx = d.f.derivative({x});
            double fxg = 0.0;
            for (int i = 0; i < spec.n1; ++i)
                fxg += par.at(x, i).value() * d.warp.grad.at(i).value();
            const double coef =
                dfx * d.grad_norm_sq.value() - fv * fv * fxg;
            for (int a = 0; a < spec.n2; ++a)
                for (int b = 0; b < spec.n2; ++b)
                    for (int c = 0; c < spec.n2; ++c)
                        for (int m = 0; m < spec.n2; ++m) {
                            const double lhs = dfx * r2_op.at(m, a, b, c);
                            double g2term = 0.0;
                            if (m == b) g2term += g2.at(a, c).value();
                            if (m == a) g2term -= g2.at(b, c).value();
                            const double rhs = coef * g2term;
                            defect = std::max(defect, std::abs(lhs - rhs));
                            scale = std::max({scale, std::abs(lhs), std::abs(rhs)});
                        }
        }
        r["fiber_relation"] = normalized(defect, scale);
    }

    const RealTensor dr2 = nabla(d.fiber_frame, d.fiber_curv.riemann.down);
    r["fiber_nabla_riemann"] =
        normalized(max_abs(dr2), max_abs(d.fiber_curv.riemann.down));

    {
        const RealTensor dc = nabla(d.product_frame, d.ambient.concircular_t);
        const RealTensor dr = nabla(d.product_frame, d.ambient.riemann.down);
        double dtau = 0.0;
        for (int j = 0; j < n; ++j)
            dtau = std::max(dtau, std::abs(d.ambient.tau.derivative({j})));
        const double scale =
            std::max(max_abs(dr), dtau / beta * max_abs(d.ambient.model_g));
        r["ambient_nabla_concircular"] = normalized(max_abs(dc), scale);
    }
    return r;
}

std::map<std::string, double> divfree_residuals(const WarpedSpec& spec,
                                                const WarpedPointData& d) {
    const int n = spec.product.dimension;
    std::map<std::string, double> r;
    const double fv = d.f.value();
    const double gsq = d.grad_norm_sq.value();

    {
        const RealTensor div_c = divergence_04(d.product_frame, d.ambient.concircular_t);
        const RealTensor dc = nabla(d.product_frame, d.ambient.concircular_t);
        r["ambient_div_concircular"] = normalized(max_abs(div_c), max_abs(dc));
    }
    {
        const RealTensor t_amb = codazzi_defect(d.product_frame, d.ambient.ricci);
        const RealTensor dric = nabla(d.product_frame, d.ambient.ricci);
        r["ambient_codazzi"] = normalized(max_abs(t_amb), max_abs(dric));
    }
    {
        double dtau = 0.0;
        for (int j = 0; j < n; ++j)
            dtau = std::max(dtau, std::abs(d.ambient.tau.derivative({j})));
        r["ambient_grad_tau"] = normalized(dtau, std::abs(d.tau_ambient));
    }

    // base Codazzi defect against the displayed T^1 formula
    {
        const RealTensor t1 = codazzi_defect(d.base_frame, d.base_curv.ricci);
        double defect = 0.0, scale = 0.0;
        for (int x = 0; x < spec.n1; ++x)
            for (int y = 0; y < spec.n1; ++y)
                for (int z = 0; z < spec.n1; ++z) {
                    double rcontr = 0.0;
                    for (int i = 0; i < spec.n1; ++i)
                        rcontr += d.base_curv.riemann.down.at(x, y, i, z).value() *
                                  d.warp.grad.at(i).value();
                    const double fxz = d.warp.hessian.at(x, z).value() / fv;
                    const double fyz = d.warp.hessian.at(y, z).value() / fv;
                    const double rhs =
                        spec.n2 / fv *
                            (d.f.derivative({y}) * fxz - d.f.derivative({x}) * fyz) -
                        spec.n2 / fv * rcontr;
                    defect = std::max(defect, std::abs(t1.at(x, y, z) - rhs));
                    scale = std::max({scale, std::abs(t1.at(x, y, z)), std::abs(rhs)});
                }
        r["t1_formula"] = normalized(defect, scale);
    }

    // mixed equation, ambient-Ricci reading, plus the fiber-Ricci gap
    {
        Jet3 fsharp = d.f * d.warp.laplacian +
                      static_cast<double>(spec.n2 - 1) * d.grad_norm_sq;
        double defect = 0.0, scale = 0.0, gap = 0.0;
        for (int x = 0; x < spec.n1; ++x) {
            const double dfx = d.f.derivative({x});
            const double dfsharp = fsharp.derivative({x});
            double ric_x_grad = 0.0;
            for (int i = 0; i < spec.n1; ++i)
                ric_x_grad += d.ambient.ricci
                                  .at(spec.base_slots[x], spec.base_slots[i])
                                  .value() *
                              d.warp.grad.at(i).value();
            for (int b = 0; b < spec.n2; ++b)
                for (int c = 0; c < spec.n2; ++c) {
                    const double ric_amb =
                        d.ambient.ricci
                            .at(spec.fiber_slots[b], spec.fiber_slots[c])
                            .value();
                    const double lhs = dfx * ric_amb;
                    const double rhs = fv * (dfsharp - fv * ric_x_grad) *
                                       d.fiber_frame.g.at(b, c).value();
                    defect = std::max(defect, std::abs(lhs - rhs));
                    scale = std::max({scale, std::abs(lhs), std::abs(rhs)});
                    const double ric_fib = d.fiber_curv.ricci.at(b, c).value();
                    gap = std::max(gap, std::abs(dfx * (ric_amb - ric_fib)));
                }
        }
        r["mixed_equation"] = normalized(defect, scale);
        r["mixed_equation_ric_gap"] = normalized(gap, scale);
    }

    if (spec.n2 >= 2) {
        const RealTensor t2 = codazzi_defect(d.fiber_frame, d.fiber_curv.ricci);
        const RealTensor dric2 = nabla(d.fiber_frame, d.fiber_curv.ricci);
        r["fiber_codazzi"] = normalized(max_abs(t2), max_abs(dric2));

        double defect = 0.0, scale = 0.0;
        for (int b = 0; b < spec.n2; ++b)
            for (int c = 0; c < spec.n2; ++c) {
                const double lhs = d.fiber_curv.ricci.at(b, c).value();
                const double rhs = gsq * d.fiber_frame.g.at(b, c).value();
                defect = std::max(defect, std::abs(lhs - rhs));
                scale = std::max({scale, std::abs(lhs), std::abs(rhs)});
            }
        r["fiber_einstein_gradf_factor"] = normalized(defect, scale);

        const double lambda2 = d.fiber_curv.tau.value() / spec.n2;
        double edefect = 0.0, escale = 0.0;
        for (int b = 0; b < spec.n2; ++b)
            for (int c = 0; c < spec.n2; ++c) {
                const double lhs = d.fiber_curv.ricci.at(b, c).value();
                const double rhs = lambda2 * d.fiber_frame.g.at(b, c).value();
                edefect = std::max(edefect, std::abs(lhs - rhs));
                escale = std::max({escale, std::abs(lhs), std::abs(rhs)});
            }
        r["fiber_einstein"] = normalized(edefect, escale);
        r["fiber_einstein_factor"] = lambda2;
    } else {
        r["fiber_codazzi"] = 0.0;
    }

    if (spec.n2 >= 3) {
        const RealTensor div_c2 =
            divergence_04(d.fiber_frame, d.fiber_curv.concircular_t);
        const RealTensor dc2 = nabla(d.fiber_frame, d.fiber_curv.concircular_t);
        r["fiber_div_concircular"] = normalized(max_abs(div_c2), max_abs(dc2));
    }
    if (spec.n1 >= 3) {
        const RealTensor div_c1 =
            divergence_04(d.base_frame, d.base_curv.concircular_t);
        const RealTensor dc1 = nabla(d.base_frame, d.base_curv.concircular_t);
        r["base_div_concircular"] = normalized(max_abs(div_c1), max_abs(dc1));
    }

    {
        double gmax = 0.0;
        for (int i = 0; i < spec.n1; ++i)
            gmax = std::max(gmax, std::abs(d.f.derivative({i})));
        r["grad_f_max"] = normalized(gmax, std::abs(fv));
        r["hessian_zero"] = normalized(max_abs(d.warp.hessian), std::abs(fv));
    }
    return r;
}

ConcircularFieldDefect concircular_field_defect(
    const Manifest& m, const std::vector<std::string>& field_components,
    std::span<const double> point) {
    const int n = m.dimension;
    if (static_cast<int>(field_components.size()) != n)
        throw ArgumentError("vector field needs one component per coordinate");

    std::vector<std::string> symbols = m.coordinates;
    for (const auto& [fname, _] : m.fields) symbols.push_back(fname);
    std::vector<Expr> comps;
    for (const auto& src : field_components)
        comps.push_back(parse_expr(src, symbols));

    const PointFrame f = build_frame(m, point);
    std::map<std::string, Jet3> env;
    for (int i = 0; i < n; ++i)
        env[m.coordinates[i]] = Jet3::variable(i, point[i], n);
    for (const auto& [fname, jet] : f.fields) env[fname] = jet;

    std::vector<Jet3> zeta;
    for (const auto& e : comps) zeta.push_back(eval_expr(e, env));

    // (nabla zeta)^i_j = d_j zeta^i + Gamma^i_{ja} zeta^a
    RealTensor dz(n, {Variance::Up, Variance::Down}, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double v = zeta[i].derivative({j});
            for (int a = 0; a < n; ++a)
                v += f.gamma.at(i, j, a).value() * zeta[a].value();
            dz.at(i, j) = v;
        }

    ConcircularFieldDefect out;
    out.defect_concurrent = dz;
    double trace = 0.0;
    for (int i = 0; i < n; ++i) {
        trace += dz.at(i, i);
        out.defect_concurrent.at(i, i) -= 1.0;
    }
    out.rho_hat = trace / n;
    out.defect_concurrent_max =
        normalized(max_abs(out.defect_concurrent), max_abs(dz));
    double defect = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double target = i == j ? out.rho_hat : 0.0;
            defect = std::max(defect, std::abs(dz.at(i, j) - target));
        }
    out.defect_concircular = normalized(defect, max_abs(dz));
    return out;
}

} // namespace concircle

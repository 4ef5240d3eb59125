#include "concircle/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <thread>

#include <json.hpp>

#include "canonical_json.hpp"
#include "concircle/curvature.hpp"
#include "concircle/errors.hpp"
#include "concircle/frame.hpp"
#include "concircle/warped.hpp"

namespace concircle {
namespace {

using nlohmann::json;

int thread_budget(int requested, int jobs) {
    int cap = requested > 0 ? requested
                            : static_cast<int>(std::thread::hardware_concurrency());
    if (cap < 1) cap = 1;
    if (const char* env = std::getenv("CONCIRCLE_THREADS")) {
        try {
            const int e = std::stoi(env);
            if (e >= 1) cap = std::min(cap, e);
        } catch (...) {
            // unreadable values fall back to the default budget
        }
    }
    return std::max(1, std::min(cap, jobs));
}

/// Everything measured at one sample point of a plain manifest.
void evaluate_plain_point(const PointFrame& f, const CurvatureBundle& b,
                          PointRecord& rec) {
    const int n = f.n;
    const double beta = static_cast<double>(n) * (n - 1);
    auto& r = rec.residuals;

    rec.tau = b.tau.value();

    // g_inv correctness
    {
        double defect = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int k = 0; k < n; ++k)
                    s += f.g_inv.at(i, k).value() * f.g.at(k, j).value();
                defect = std::max(defect, std::abs(s - (i == j ? 1.0 : 0.0)));
            }
        r["g_inv_identity"] = defect;
    }

    // Riemann symmetries and the first Bianchi identity
    {
        const RealTensor r4 = values_of(b.riemann.down);
        double a12 = 0, a34 = 0, pair = 0, bianchi = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        const double v = r4.at(i, j, k, l);
                        a12 = std::max(a12, std::abs(v + r4.at(j, i, k, l)));
                        a34 = std::max(a34, std::abs(v + r4.at(i, j, l, k)));
                        pair = std::max(pair, std::abs(v - r4.at(k, l, i, j)));
                        bianchi = std::max(
                            bianchi, std::abs(v + r4.at(i, k, l, j) +
                                              r4.at(i, l, j, k)));
                    }
        const double scale = std::max(1.0, max_abs(r4));
        r["riemann_antisym_12"] = a12 / scale;
        r["riemann_antisym_34"] = a34 / scale;
        r["riemann_pair_symmetry"] = pair / scale;
        r["riemann_first_bianchi"] = bianchi / scale;
    }

    r["metric_compatibility"] =
        normalized(max_abs(nabla(f, f.g)), max_abs(f.g));

    const double model_scale = max_abs(b.model_g);
    r["flat"] = normalized(max_abs(b.riemann.down), model_scale);

    // constant curvature at kappa = tau/(n(n-1))
    const double kappa = b.tau.value() / beta;
    {
        double defect = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < b.riemann.down.components().size(); ++i) {
            const double rv = b.riemann.down.components()[i].value();
            const double mv = kappa * b.model_g.components()[i].value();
            defect = std::max(defect, std::abs(rv - mv));
            scale = std::max({scale, std::abs(rv), std::abs(mv)});
        }
        r["constant_curvature"] = normalized(defect, scale);
    }

    // Einstein at lambda = tau/n
    const double lambda = b.tau.value() / n;
    {
        double defect = 0.0, scale = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double rv = b.ricci.at(i, j).value();
                const double gv = lambda * f.g.at(i, j).value();
                defect = std::max(defect, std::abs(rv - gv));
                scale = std::max({scale, std::abs(rv), std::abs(gv)});
            }
        r["einstein"] = normalized(defect, scale);
    }

    {
        double cscale = max_abs(b.riemann.down);
        cscale = std::max(cscale, std::abs(kappa) * model_scale);
        r["concircularly_flat"] = normalized(max_abs(b.concircular_t), cscale);
    }

    const RealTensor dr = nabla(f, b.riemann.down);
    r["locally_symmetric"] = normalized(max_abs(dr), max_abs(b.riemann.down));

    {
        const RealTensor dc = nabla(f, b.concircular_t);
        double dtau = 0.0;
        for (int j = 0; j < n; ++j)
            dtau = std::max(dtau, std::abs(b.tau.derivative({j})));
        const double scale = std::max(max_abs(dr), dtau / beta * model_scale);
        r["concircularly_symmetric"] = normalized(max_abs(dc), scale);
    }

    {
        const RealTensor div_c = divergence_04(f, b.concircular_t);
        const RealTensor dc = nabla(f, b.concircular_t);
        r["divergence_free_concircular"] = normalized(max_abs(div_c), max_abs(dc));
    }

    const RealTensor dric = nabla(f, b.ricci);
    {
        const RealTensor t = codazzi_defect(f, b.ricci);
        r["ricci_codazzi"] = normalized(max_abs(t), max_abs(dric));
    }

    // contracted second Bianchi: div R = antisymmetrized nabla Ric
    {
        const RealTensor div_r = divergence_04(f, b.riemann.down);
        double defect = 0.0;
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    defect = std::max(defect,
                                      std::abs(div_r.at(j, k, l) -
                                               (dric.at(k, j, l) - dric.at(l, j, k))));
        r["div_bianchi_match"] =
            normalized(defect, std::max(max_abs(div_r), max_abs(dric)));
    }

    // derivation-action identities and symmetry-condition norms
    for (const auto& [key, val] : identity_defects(f, b)) r[key] = val;

    // C trace adjustment: g^{ik} C_{ijkl} = Ric - (tau/n) g
    {
        double defect = 0.0, scale = 0.0;
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) {
                double trace = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int k = 0; k < n; ++k)
                        trace += f.g_inv.at(i, k).value() *
                                 b.concircular_t.at(i, j, k, l).value();
                const double expect =
                    b.ricci.at(j, l).value() - lambda * f.g.at(j, l).value();
                defect = std::max(defect, std::abs(trace - expect));
                scale = std::max({scale, std::abs(trace), std::abs(expect)});
            }
        r["c_trace_adjust"] = normalized(defect, scale);
    }

    r["k_divergence"] =
        k_divergence_identity(f, KCoefficients{1.0, 0.2, -0.3, 0.5},
                              b.riemann.down, b.ricci, b.tau)
            .defect;
    r["stress_divergence"] =
        stress_energy(f, 0.0, 1.0, b.ricci, b.tau).divergence_defect;
}

void evaluate_structured_point(const WarpedSpec& spec,
                               const std::vector<double>& point,
                               PointFrame frame, CurvatureBundle bundle,
                               PointRecord& rec) {
    const WarpedPointData d = evaluate_warped_point(
        spec, point, std::move(frame), std::move(bundle));
    auto& r = rec.residuals;
    for (const auto& blk : concircular_oracle_blocks(spec, d))
        r["oracle." + blk.name] = blk.agreement_defect;
    for (const auto& [k, v] : flatness_residuals(spec, d)) r["flatness." + k] = v;
    for (const auto& [k, v] : symmetry_residuals(spec, d)) r["symmetry." + k] = v;
    for (const auto& [k, v] : divfree_residuals(spec, d)) r["divfree." + k] = v;
}

std::vector<PointRecord> evaluate_all(
    const Manifest& m, const std::vector<std::vector<double>>& pts, int threads,
    const std::function<void(const std::vector<double>&, PointRecord&)>& eval) {
    std::vector<PointRecord> records(pts.size());
    const int budget = thread_budget(threads, static_cast<int>(pts.size()));
    (void)m;

    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= pts.size()) return;
            records[i].coordinates = pts[i];
            try {
                eval(pts[i], records[i]);
            } catch (const DomainError& e) {
                records[i].residuals.clear();
                records[i].skip_reason = e.what();
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    if (budget == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < budget; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return records;
}

struct Aggregate {
    double max_residual = 0.0;
    bool any_skip = false;
    bool all_present = true;
};

Aggregate aggregate_residual(const std::vector<PointRecord>& records,
                             const std::string& key) {
    Aggregate a;
    for (const auto& rec : records) {
        if (!rec.skip_reason.empty()) {
            a.any_skip = true;
            continue;
        }
        const auto it = rec.residuals.find(key);
        if (it == rec.residuals.end()) {
            a.all_present = false;
            continue;
        }
        a.max_residual = std::max(a.max_residual, it->second);
    }
    return a;
}

FlagResult flag_from(const Aggregate& a, double tol) {
    FlagResult fr;
    fr.max_residual = a.max_residual;
    if (a.any_skip)
        fr.verdict = Verdict::Indeterminate;
    else
        fr.verdict = a.max_residual < tol ? Verdict::True : Verdict::False;
    return fr;
}

bool both_determinate(const FlagResult& a, const FlagResult& b) {
    return a.verdict != Verdict::Indeterminate && b.verdict != Verdict::Indeterminate;
}

json residual_map_to_json(const std::map<std::string, double>& m) {
    json out = json::object();
    for (const auto& [k, v] : m) out[k] = v;
    return out;
}

} // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::True: return "true";
        case Verdict::False: return "false";
        case Verdict::Indeterminate: return "indeterminate";
    }
    return "?";
}

std::vector<std::vector<double>> sample_points(const Manifest& m, int count,
                                               long long seed) {
    if (count < 1) throw ArgumentError("sample count must be >= 1");
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::vector<std::vector<double>> pts(count, std::vector<double>(m.dimension));
    for (int p = 0; p < count; ++p)
        for (int i = 0; i < m.dimension; ++i) {
            const auto [lo, hi] = m.sample_box[i];
            const double u = (rng() >> 11) * 0x1.0p-53; // uniform in [0, 1)
            pts[p][i] = lo + u * (hi - lo);
        }
    return pts;
}

DiagnosticReport run_analyze(const Manifest& m, const AnalyzeOptions& opt) {
    if (m.dimension < 3)
        throw ValidationError(
            {"analysis requires dimension >= 3 (concircular operations are "
             "undefined below)"});

    DiagnosticReport rep;
    rep.manifest_name = m.name;
    rep.manifest_hash = manifest_hash(m);
    rep.dimension = m.dimension;
    rep.seed = opt.seed.value_or(m.seed);
    rep.tolerance = opt.tolerance.value_or(m.tolerance);
    rep.points = opt.points.value_or(m.points);
    rep.structured = m.structure.has_value();

    const auto pts = sample_points(m, rep.points, rep.seed);

    std::optional<WarpedSpec> spec;
    if (rep.structured) spec = WarpedSpec::from_manifest(m);

    rep.point_records = evaluate_all(
        m, pts, opt.threads, [&](const std::vector<double>& p, PointRecord& rec) {
            PointFrame frame = build_frame(m, p);
            CurvatureBundle bundle = curvature_bundle(frame);
            evaluate_plain_point(frame, bundle, rec);
            if (spec)
                evaluate_structured_point(*spec, p, std::move(frame),
                                          std::move(bundle), rec);
        });

    const double tol = rep.tolerance;
    bool any_skip = false;
    for (const auto& rec : rep.point_records)
        if (!rec.skip_reason.empty()) any_skip = true;
    if (any_skip)
        rep.warnings.push_back(
            "some sample points were skipped; verdicts are indeterminate");

    // classification flags
    static const std::vector<std::pair<const char*, const char*>> flags = {
        {"flat", "flat"},
        {"constant_curvature", "constant_curvature"},
        {"einstein", "einstein"},
        {"concircularly_flat", "concircularly_flat"},
        {"locally_symmetric", "locally_symmetric"},
        {"concircularly_symmetric", "concircularly_symmetric"},
        {"divergence_free_concircular", "divergence_free_concircular"},
        {"ricci_codazzi", "ricci_codazzi"},
        {"semi_symmetric", "semi_symmetric_norm"},
        {"pseudo_symmetric", "pseudo_symmetric_norm"},
    };
    for (const auto& [flag, key] : flags)
        rep.verdicts[flag] = flag_from(aggregate_residual(rep.point_records, key), tol);

    // values: tau and the trace-forced factors, averaged; constancy of
    // kappa/lambda across points is part of the flags' meaning
    {
        double tau_sum = 0.0, tau_min = 0.0, tau_max = 0.0;
        int live = 0;
        for (const auto& rec : rep.point_records) {
            if (!rec.skip_reason.empty()) continue;
            if (live == 0) tau_min = tau_max = rec.tau;
            tau_min = std::min(tau_min, rec.tau);
            tau_max = std::max(tau_max, rec.tau);
            tau_sum += rec.tau;
            ++live;
        }
        if (live > 0) {
            const double n = m.dimension;
            const double tau_mean = tau_sum / live;
            rep.values["tau_mean"] = tau_mean;
            rep.values["constant_curvature_kappa"] = tau_mean / (n * (n - 1));
            rep.values["einstein_factor"] = tau_mean / n;
            const double spread = tau_max - tau_min;
            // a varying tau contradicts both constancy-flavored verdicts
            if (spread > tol * std::max(1.0, std::abs(tau_mean))) {
                auto downgrade = [&](const char* name) {
                    auto& fr = rep.verdicts[name];
                    if (fr.verdict == Verdict::True) fr.verdict = Verdict::False;
                    fr.max_residual = std::max(
                        fr.max_residual,
                        spread / std::max(1.0, std::abs(tau_mean)));
                };
                downgrade("constant_curvature");
                downgrade("einstein");
            }
        }
    }

    // identity suite: always-true defects, max over points
    static const std::vector<std::string> identity_keys = {
        "riemann_antisym_12", "riemann_antisym_34", "riemann_pair_symmetry",
        "riemann_first_bianchi", "metric_compatibility", "g_inv_identity",
        "div_bianchi_match", "r_dot_c_minus_r_dot_r", "c_dot_r_identity",
        "c_dot_c_identity", "r_dot_g", "c_trace_adjust", "k_divergence",
        "stress_divergence"};
    for (const auto& key : identity_keys)
        rep.identity_suite[key] = aggregate_residual(rep.point_records, key).max_residual;

    if (rep.structured) {
        for (const auto& rec : rep.point_records) {
            if (!rec.skip_reason.empty()) continue;
            for (const auto& [k, v] : rec.residuals) {
                if (k.rfind("oracle.", 0) == 0) {
                    auto& slot = rep.oracle_agreement[k.substr(7)];
                    slot = std::max(slot, v);
                } else if (k.rfind("flatness.", 0) == 0 ||
                           k.rfind("symmetry.", 0) == 0 ||
                           k.rfind("divfree.", 0) == 0) {
                    auto& slot = rep.structure_residuals[k];
                    slot = std::max(slot, v);
                }
            }
        }
        // structured flatness characterization must agree with max |C|
        if (!any_skip) {
            bool conditions = true;
            for (const auto& [k, v] : rep.structure_residuals) {
                if (k.rfind("flatness.", 0) != 0 || k.ends_with("_value") ||
                    k == "flatness.grw_f_condition")
                    continue;
                if (v >= tol) conditions = false;
            }
            const auto& cflat = rep.verdicts.at("concircularly_flat");
            if (conditions != (cflat.verdict == Verdict::True)) {
                rep.consistent = false;
                rep.warnings.push_back(
                    "flatness conditions disagree with max |C| verdict");
            }
        }
        double gap = 0.0;
        const auto it = rep.structure_residuals.find("divfree.mixed_equation_ric_gap");
        if (it != rep.structure_residuals.end()) gap = it->second;
        if (gap > tol)
            rep.warnings.push_back(
                "ambient and fiber Ricci readings of the mixed equation disagree "
                "(gap " + std::to_string(gap) + ")");
    }

    // cross-flag implications
    {
        const auto& cf = rep.verdicts.at("concircularly_flat");
        const auto& cc = rep.verdicts.at("constant_curvature");
        if (both_determinate(cf, cc) && cf.verdict == Verdict::True &&
            cc.verdict != Verdict::True) {
            rep.consistent = false;
            rep.warnings.push_back(
                "inconsistent: concircularly flat but not constant curvature");
        }
        const auto& ls = rep.verdicts.at("locally_symmetric");
        const auto& cs = rep.verdicts.at("concircularly_symmetric");
        if (both_determinate(ls, cs) && ls.verdict != cs.verdict) {
            rep.consistent = false;
            rep.warnings.push_back(
                "inconsistent: locally symmetric and concircularly symmetric "
                "verdicts differ");
        }
    }
    return rep;
}

DiagnosticReport run_compare_oracle(const Manifest& m, const AnalyzeOptions& opt) {
    if (!m.structure)
        throw ArgumentError("compare-oracle needs a manifest with a structure tag");

    DiagnosticReport rep;
    rep.manifest_name = m.name;
    rep.manifest_hash = manifest_hash(m);
    rep.dimension = m.dimension;
    rep.seed = opt.seed.value_or(m.seed);
    rep.tolerance = opt.tolerance.value_or(m.tolerance);
    rep.points = opt.points.value_or(m.points);
    rep.structured = true;

    const auto pts = sample_points(m, rep.points, rep.seed);
    const WarpedSpec spec = WarpedSpec::from_manifest(m);
    rep.point_records = evaluate_all(
        m, pts, opt.threads, [&](const std::vector<double>& p, PointRecord& rec) {
            const WarpedPointData d = evaluate_warped_point(spec, p);
            rec.tau = d.tau_ambient;
            for (const auto& blk : concircular_oracle_blocks(spec, d))
                rec.residuals["oracle." + blk.name] = blk.agreement_defect;
        });

    bool any_skip = false;
    double worst = 0.0;
    for (const auto& rec : rep.point_records) {
        if (!rec.skip_reason.empty()) {
            any_skip = true;
            continue;
        }
        for (const auto& [k, v] : rec.residuals) {
            auto& slot = rep.oracle_agreement[k.substr(7)];
            slot = std::max(slot, v);
            worst = std::max(worst, v);
        }
    }
    FlagResult pass;
    pass.max_residual = worst;
    pass.verdict = any_skip ? Verdict::Indeterminate
                            : (worst < rep.tolerance ? Verdict::True : Verdict::False);
    rep.verdicts["oracle_agreement"] = pass;
    if (any_skip)
        rep.warnings.push_back(
            "some sample points were skipped; verdicts are indeterminate");
    return rep;
}

std::string report_to_json(const DiagnosticReport& r) {
    json doc;
    doc["manifest"] = {{"name", r.manifest_name},
                       {"hash", r.manifest_hash},
                       {"dimension", r.dimension}};
    doc["options"] = {
        {"seed", r.seed}, {"tolerance", r.tolerance}, {"points", r.points}};

    json pts = json::array();
    for (const auto& rec : r.point_records) {
        json p;
        p["coordinates"] = rec.coordinates;
        if (!rec.skip_reason.empty()) {
            p["skipped"] = rec.skip_reason;
        } else {
            p["residuals"] = residual_map_to_json(rec.residuals);
            p["tau"] = rec.tau;
        }
        pts.push_back(std::move(p));
    }
    doc["points"] = std::move(pts);

    json verdicts = json::object();
    for (const auto& [name, fr] : r.verdicts)
        verdicts[name] = {{"verdict", verdict_name(fr.verdict)},
                          {"max_residual", fr.max_residual}};
    doc["verdicts"] = std::move(verdicts);

    if (!r.values.empty()) doc["values"] = residual_map_to_json(r.values);
    if (!r.identity_suite.empty())
        doc["identity_suite"] = residual_map_to_json(r.identity_suite);
    if (r.structured) {
        doc["oracle_agreement"] = residual_map_to_json(r.oracle_agreement);
        if (!r.structure_residuals.empty())
            doc["structure_residuals"] = residual_map_to_json(r.structure_residuals);
    }
    doc["consistent"] = r.consistent;
    doc["warnings"] = r.warnings;
    return canonical_json(doc);
}

void write_report(const DiagnosticReport& r, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << report_to_json(r);
    out.close();
    if (!out) throw IoError("failed while writing '" + path + "'");
}

} // namespace concircle

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "concircle/curvature.hpp"
#include "concircle/errors.hpp"
#include "concircle/frame.hpp"
#include "concircle/manifest.hpp"

using namespace concircle;

namespace {

Manifest sphere3() {
    return make_chart(
        "s3", {"t1", "t2", "t3"},
        {{"1", "0", "0"},
         {"0", "sin(t1)^2", "0"},
         {"0", "0", "sin(t1)^2 * sin(t2)^2"}},
        {{0.4, 2.7}, {0.4, 2.7}, {0.3, 6.0}});
}

Manifest sphere2_unit() {
    return make_chart("s2", {"theta", "phi"},
                      {{"1", "0"}, {"0", "sin(theta)^2"}},
                      {{0.3, 2.8}, {0.3, 6.0}}, {{"f", "cos(theta)"}});
}

Manifest sphere4() {
    return make_chart(
        "s4", {"t1", "t2", "t3", "t4"},
        {{"1", "0", "0", "0"},
         {"0", "sin(t1)^2", "0", "0"},
         {"0", "0", "sin(t1)^2 * sin(t2)^2", "0"},
         {"0", "0", "0", "sin(t1)^2 * sin(t2)^2 * sin(t3)^2"}},
        {{0.4, 2.7}, {0.4, 2.7}, {0.4, 2.7}, {0.3, 6.0}});
}

Manifest hyperbolic3() {
    // upper half-space chart, curvature -1
    return make_chart("h3", {"x", "y", "z"},
                      {{"1/z^2", "0", "0"},
                       {"0", "1/z^2", "0"},
                       {"0", "0", "1/z^2"}},
                      {{0, 1}, {0, 1}, {0.2, 1.2}});
}

Manifest schwarzschild(double m = 1.0) {
    const std::string ms = std::to_string(m);
    return make_chart(
        "schw", {"t", "r", "theta", "phi"},
        {{"-(1 - 2*" + ms + "/r)", "0", "0", "0"},
         {"0", "1/(1 - 2*" + ms + "/r)", "0", "0"},
         {"0", "0", "r^2", "0"},
         {"0", "0", "0", "r^2 * sin(theta)^2"}},
        {{0, 1}, {3 * m, 6 * m}, {0.6, 2.5}, {0.3, 6.0}});
}

Manifest euclid4() {
    return make_chart("e4", {"x1", "x2", "x3", "x4"},
                      {{"1", "0", "0", "0"},
                       {"0", "1", "0", "0"},
                       {"0", "0", "1", "0"},
                       {"0", "0", "0", "1"}},
                      {{0, 1}, {0, 1}, {0, 1}, {0, 1}});
}

Manifest perturbed3() {
    return make_chart("p3", {"x", "y", "z"},
                      {{"1", "0", "0"},
                       {"0", "1 + 0.3 * x^2", "0"},
                       {"0", "0", "1"}},
                      {{0.2, 1.2}, {0.2, 1.2}, {0.2, 1.2}});
}

double kretschmann(const PointFrame& f, const JetTensor& r_down) {
    const int n = f.n;
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double up = 0.0;
                    for (int a = 0; a < n; ++a)
                        for (int b = 0; b < n; ++b)
                            for (int c = 0; c < n; ++c)
                                for (int d = 0; d < n; ++d)
                                    up += f.g_inv.at(i, a).value() *
                                          f.g_inv.at(j, b).value() *
                                          f.g_inv.at(k, c).value() *
                                          f.g_inv.at(l, d).value() *
                                          r_down.at(a, b, c, d).value();
                    sum += up * r_down.at(i, j, k, l).value();
                }
    return sum;
}

double riemann_symmetry_defect(const JetTensor& r) {
    const int n = r.n();
    double m = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    const double v = r.at(i, j, k, l).value();
                    m = std::max(m, std::abs(v + r.at(j, i, k, l).value()));
                    m = std::max(m, std::abs(v + r.at(i, j, l, k).value()));
                    m = std::max(m, std::abs(v - r.at(k, l, i, j).value()));
                    // first Bianchi: cyclic sum over the last three slots
                    m = std::max(m, std::abs(v + r.at(i, k, l, j).value() +
                                             r.at(i, l, j, k).value()));
                }
    return m;
}

} // namespace

TEST_CASE("Euclidean space is flat") {
    const auto m = euclid4();
    const auto f = build_frame(m, std::vector<double>{0.3, 0.7, 0.1, 0.9});
    const auto r = riemann(f);
    CHECK(max_abs(r.down) < 1e-13);
    const auto c = concircular(f);
    CHECK(max_abs(c) < 1e-13);
}

TEST_CASE("unit S3: convention pin, tau, C = 0, nabla C = 0") {
    const auto m = sphere3();
    const std::vector<std::vector<double>> pts = {
        {0.7, 1.2, 2.0}, {1.4, 0.8, 4.0}, {2.1, 1.9, 1.1}};
    for (const auto& p : pts) {
        const auto f = build_frame(m, p);
        const auto b = curvature_bundle(f);

        // convention pin: R_{ijkl} = g_{ik}g_{jl} - g_{jk}g_{il}
        double pin = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k)
                    for (int l = 0; l < 3; ++l)
                        pin = std::max(
                            pin, std::abs(b.riemann.down.at(i, j, k, l).value() -
                                          (f.g.at(i, k).value() * f.g.at(j, l).value() -
                                           f.g.at(j, k).value() * f.g.at(i, l).value())));
        CHECK(pin < 1e-9);

        CHECK(b.tau.value() == doctest::Approx(6.0).epsilon(1e-9));

        // Ric = (n-1) g
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(std::abs(b.ricci.at(i, j).value() - 2.0 * f.g.at(i, j).value()) <
                      1e-9);

        CHECK(max_abs(b.concircular_t) < 1e-8);
        CHECK(max_abs(nabla(f, b.riemann.down)) < 1e-8);
        CHECK(max_abs(nabla(f, b.concircular_t)) < 1e-8);
        CHECK(riemann_symmetry_defect(b.riemann.down) < 1e-9);
    }
}

TEST_CASE("hyperbolic half-space: tau = -6, constant curvature -1") {
    const auto m = hyperbolic3();
    const auto f = build_frame(m, std::vector<double>{0.4, 0.6, 0.7});
    const auto b = curvature_bundle(f);
    CHECK(b.tau.value() == doctest::Approx(-6.0).epsilon(1e-9));
    double pin = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l)
                    pin = std::max(
                        pin, std::abs(b.riemann.down.at(i, j, k, l).value() +
                                      (f.g.at(i, k).value() * f.g.at(j, l).value() -
                                       f.g.at(j, k).value() * f.g.at(i, l).value())));
    CHECK(pin < 1e-9);
    CHECK(max_abs(b.concircular_t) < 1e-8);
}

TEST_CASE("Schwarzschild: vacuum, Kretschmann, C = R") {
    const auto m = schwarzschild(1.0);
    const auto f = build_frame(m, std::vector<double>{0.5, 4.0, 1.2, 2.0});
    const auto b = curvature_bundle(f);

    CHECK(max_abs(b.ricci) < 1e-10);
    CHECK(std::abs(b.tau.value()) < 1e-10);

    const double k = kretschmann(f, b.riemann.down);
    CHECK(k == doctest::Approx(48.0 / std::pow(4.0, 6)).epsilon(1e-8));

    // tau = 0 so C = R exactly; same Kretschmann-type invariant
    const double kc = kretschmann(f, b.concircular_t);
    CHECK(kc == doctest::Approx(k).epsilon(1e-10));

    CHECK(riemann_symmetry_defect(b.riemann.down) < 1e-9);

    // not locally symmetric: |nabla C| is visibly nonzero at r = 4
    CHECK(max_abs(nabla(f, b.concircular_t)) > 1e-3);
}

TEST_CASE("Kulkarni-Nomizu examples") {
    const auto e2 = make_chart("e2", {"x", "y"}, {{"1", "0"}, {"0", "1"}},
                               {{0, 1}, {0, 1}});
    const auto f = build_frame(e2, std::vector<double>{0.5, 0.5});
    const auto g_model = metric_model_tensor(f);
    CHECK(g_model.at(0, 1, 0, 1).value() == doctest::Approx(1.0));

    JetTensor zero2(2, {Variance::Down, Variance::Down}, Jet3::constant(0.0, 2));
    const auto kn0 = kulkarni_nomizu(zero2, f.g);
    CHECK(max_abs(kn0) == 0.0);

    const auto mk = make_chart("mink2", {"t", "x"}, {{"-1", "0"}, {"0", "1"}},
                               {{0, 1}, {0, 1}});
    const auto fm = build_frame(mk, std::vector<double>{0.5, 0.5});
    const auto gm = metric_model_tensor(fm);
    CHECK(gm.at(0, 1, 0, 1).value() == doctest::Approx(-1.0));

    JetTensor asym(2, {Variance::Down, Variance::Down}, Jet3::constant(0.0, 2));
    asym.at(0, 1) = Jet3::constant(1.0, 2);
    CHECK_THROWS_AS(kulkarni_nomizu(asym, f.g), ArgumentError);
}

TEST_CASE("concircular requires dimension >= 3") {
    const auto e2 = make_chart("e2", {"x", "y"}, {{"1", "0"}, {"0", "1"}},
                               {{0, 1}, {0, 1}});
    const auto f = build_frame(e2, std::vector<double>{0.5, 0.5});
    CHECK_THROWS_AS(concircular(f), ArgumentError);
}

TEST_CASE("K tensor: concircular coefficients annihilate constant curvature") {
    for (const auto& m : {sphere3(), hyperbolic3()}) {
        const auto f = build_frame(
            m, std::vector<double>{m.sample_box[0].first + 0.3,
                                   m.sample_box[1].first + 0.2,
                                   m.sample_box[2].first + 0.25});
        const auto b = curvature_bundle(f);
        const double tau = b.tau.value();
        const double beta = 3.0 * 2.0;
        const double a0 = 1.7;
        const KCoefficients good{a0, 0.0, -a0 * tau / beta, a0 * tau / beta};
        const auto kt = k_tensor(f, good, b.riemann.down, b.ricci);
        CHECK(normalized(max_abs(kt.k4), max_abs(b.riemann.down)) < 1e-9);

        // K equals a0 * C componentwise on any metric with these coefficients
        double diff = 0.0;
        for (std::size_t i = 0; i < kt.k4.components().size(); ++i)
            diff = std::max(diff,
                            std::abs(kt.k4.components()[i].value() -
                                     a0 * b.concircular_t.components()[i].value()));
        CHECK(diff < 1e-9);

        // perturbing a2 breaks flatness at the 1e-2 scale
        KCoefficients bad = good;
        bad.a2 += 0.1;
        const auto kb = k_tensor(f, bad, b.riemann.down, b.ricci);
        CHECK(normalized(max_abs(kb.k4), max_abs(b.riemann.down)) > 1e-2);

        CHECK_THROWS_AS(k_tensor(f, KCoefficients{0, 0, 0, 0}), ArgumentError);
    }
}

TEST_CASE("K = R for degenerate coefficients") {
    const auto f = build_frame(schwarzschild(), std::vector<double>{0.5, 4.5, 1.0, 1.0});
    const auto b = curvature_bundle(f);
    const auto kt = k_tensor(f, KCoefficients{1, 0, 0, 0}, b.riemann.down, b.ricci);
    double diff = 0.0;
    for (std::size_t i = 0; i < kt.k4.components().size(); ++i)
        diff = std::max(diff, std::abs(kt.k4.components()[i].value() -
                                       b.riemann.down.components()[i].value()));
    CHECK(diff == 0.0);
}

TEST_CASE("scalar calculus on flat space and the sphere") {
    const auto e2 = make_chart("e2", {"x", "y"}, {{"1", "0"}, {"0", "1"}},
                               {{0, 2}, {0, 2}}, {{"u", "x"}, {"v", "x^2 + y^2"}});
    const auto f = build_frame(e2, std::vector<double>{0.7, 1.1});
    const auto lin = scalar_calculus(f, "u");
    CHECK(lin.grad.at(0).value() == doctest::Approx(1.0));
    CHECK(lin.grad.at(1).value() == doctest::Approx(0.0));
    CHECK(max_abs(lin.hessian) < 1e-13);
    CHECK(std::abs(lin.laplacian.value()) < 1e-13);

    const auto quad = scalar_calculus(f, "v");
    CHECK(quad.laplacian.value() == doctest::Approx(4.0));

    // f = cos(theta) on the unit sphere is a Laplace eigenfunction
    const auto s2 = sphere2_unit();
    const auto fs = build_frame(s2, std::vector<double>{1.05, 2.0});
    const auto eig = scalar_calculus(fs, "f");
    CHECK(eig.laplacian.value() ==
          doctest::Approx(-2.0 * std::cos(1.05)).epsilon(1e-10));

    CHECK_THROWS_AS(scalar_calculus(f, "w"), ArgumentError);
}

TEST_CASE("nabla: metric compatibility and order bookkeeping") {
    for (const auto& m : {sphere3(), schwarzschild(), perturbed3()}) {
        std::vector<double> p;
        for (const auto& [lo, hi] : m.sample_box) p.push_back(lo + 0.4 * (hi - lo));
        const auto f = build_frame(m, p);
        CHECK(max_abs(nabla(f, f.g)) < 1e-9);
        CHECK(max_abs(nabla(f, f.g_inv)) < 1e-9);
    }

    // an order-0 tensor cannot be differentiated again
    const auto f = build_frame(sphere3(), std::vector<double>{1.0, 1.0, 1.0});
    const Jet3 exhausted = Jet3::constant(1.0, 3).partial(0).partial(0).partial(0);
    JetTensor order0(3, {Variance::Down}, exhausted);
    CHECK_THROWS_AS(nabla(f, order0), ContractViolation);
}

TEST_CASE("divergence of R matches the contracted Bianchi identity") {
    for (const auto& m : {sphere3(), schwarzschild(), perturbed3(), hyperbolic3()}) {
        std::vector<double> p;
        for (const auto& [lo, hi] : m.sample_box) p.push_back(lo + 0.45 * (hi - lo));
        const auto f = build_frame(m, p);
        const auto b = curvature_bundle(f);
        const auto div_r = divergence_04(f, b.riemann.down);
        const auto dric = nabla(f, b.ricci);

        double defect = 0.0;
        for (int j = 0; j < f.n; ++j)
            for (int k = 0; k < f.n; ++k)
                for (int l = 0; l < f.n; ++l)
                    defect = std::max(defect,
                                      std::abs(div_r.at(j, k, l) -
                                               (dric.at(k, j, l) - dric.at(l, j, k))));
        CHECK(normalized(defect, std::max(max_abs(div_r), max_abs(dric))) < 1e-8);
    }
}

TEST_CASE("Codazzi defect: Einstein metrics yes, perturbed metric no") {
    const auto fs = build_frame(sphere3(), std::vector<double>{1.1, 1.3, 2.2});
    CHECK(max_abs(codazzi_defect(fs)) < 1e-9);

    const auto fw = build_frame(schwarzschild(), std::vector<double>{0.5, 4.4, 1.4, 3.0});
    CHECK(max_abs(codazzi_defect(fw)) < 1e-9);

    const auto fe = build_frame(euclid4(), std::vector<double>{0.5, 0.5, 0.5, 0.5});
    CHECK(max_abs(codazzi_defect(fe)) < 1e-13);

    const auto fp = build_frame(perturbed3(), std::vector<double>{0.8, 0.5, 0.5});
    CHECK(max_abs(codazzi_defect(fp)) > 1e-3);
}

TEST_CASE("derivation action: annihilates G-built tensors, linear in op") {
    for (const auto& m : {sphere3(), schwarzschild()}) {
        std::vector<double> p;
        for (const auto& [lo, hi] : m.sample_box) p.push_back(lo + 0.4 * (hi - lo));
        const auto f = build_frame(m, p);
        const auto b = curvature_bundle(f);
        const auto r4 = values_of(b.riemann.down);
        const auto g4 = values_of(b.model_g);
        const auto r_op = curvature_operator(f, r4);

        // R.G = 0 on every metric
        const auto rg = derivation_action(r_op, g4);
        CHECK(normalized(max_abs(rg), std::max(max_abs(r4), max_abs(g4))) < 1e-9);

        // zero operator gives zero output
        RealTensor zero_op(f.n, r_op.variance(), 0.0);
        CHECK(max_abs(derivation_action(zero_op, r4)) == 0.0);
    }

    // locally symmetric S3 is semi-symmetric: R.R = 0
    const auto f = build_frame(sphere3(), std::vector<double>{1.2, 0.9, 1.7});
    const auto b = curvature_bundle(f);
    const auto r4 = values_of(b.riemann.down);
    const auto rr = derivation_action(curvature_operator(f, r4), r4);
    CHECK(normalized(max_abs(rr), max_abs(r4)) < 1e-9);

    RealTensor bad_op(3, {Variance::Down, Variance::Down, Variance::Down,
                          Variance::Down}, 0.0);
    CHECK_THROWS_AS(derivation_action(bad_op, r4), ArgumentError);
}

TEST_CASE("identity defects vanish on every metric") {
    for (const auto& m : {sphere3(), schwarzschild(), perturbed3(), euclid4()}) {
        std::vector<double> p;
        for (const auto& [lo, hi] : m.sample_box) p.push_back(lo + 0.35 * (hi - lo));
        const auto f = build_frame(m, p);
        const auto d = identity_defects(f);
        CAPTURE(m.name);
        CHECK(d.at("r_dot_c_minus_r_dot_r") < 1e-8);
        CHECK(d.at("c_dot_r_identity") < 1e-8);
        CHECK(d.at("c_dot_c_identity") < 1e-8);
        CHECK(d.at("r_dot_g") < 1e-9);
    }

    // constant curvature: pseudo-symmetric and C.C itself vanishes
    const auto f = build_frame(sphere3(), std::vector<double>{1.0, 1.4, 2.8});
    const auto d = identity_defects(f);
    CHECK(d.at("semi_symmetric_norm") < 1e-9);
    CHECK(d.at("pseudo_symmetric_norm") < 1e-9);
}

TEST_CASE("stress-energy tensor") {
    // Schwarzschild is vacuum: T = 0 and divergence-free
    const auto fw = build_frame(schwarzschild(), std::vector<double>{0.5, 5.0, 1.2, 1.0});
    const auto se = stress_energy(fw, 0.0, 1.0);
    CHECK(max_abs(se.t) < 1e-10);
    CHECK(se.divergence_defect < 1e-9);
    CHECK(!se.dimension_warning);

    // unit S4: Ric = 3g, tau = 12, so T = (3 - 6) g = -3 g
    const auto fs = build_frame(sphere4(), std::vector<double>{1.0, 1.2, 1.4, 2.0});
    const auto s4 = stress_energy(fs, 0.0, 1.0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(std::abs(s4.t.at(i, j).value() + 3.0 * fs.g.at(i, j).value()) < 1e-8);
    CHECK(s4.divergence_defect < 1e-9);

    // perturbed 3-chart: warned but computed, still divergence-free
    const auto fp = build_frame(perturbed3(), std::vector<double>{0.7, 0.6, 0.5});
    for (double lambda : {0.0, 1.0}) {
        const auto sp = stress_energy(fp, lambda, 1.0);
        CHECK(sp.dimension_warning);
        CHECK(sp.divergence_defect < 1e-9);
    }

    CHECK_THROWS_AS(stress_energy(fw, 0.0, 0.0), ArgumentError);
}

TEST_CASE("K divergence identity") {
    // Schwarzschild: both sides vanish
    const auto fw = build_frame(schwarzschild(), std::vector<double>{0.5, 4.8, 1.3, 2.0});
    const auto kw = k_divergence_identity(fw, KCoefficients{1.3, -0.2, 0.4, 0.1});
    CHECK(max_abs(kw.lhs) < 1e-9);
    CHECK(max_abs(kw.rhs) < 1e-9);
    CHECK(kw.defect < 1e-9);

    // perturbed chart: both sides nonzero but equal
    const auto fp = build_frame(perturbed3(), std::vector<double>{0.9, 0.4, 0.6});
    const auto kp = k_divergence_identity(fp, KCoefficients{1.0, 0.2, -0.3, 0.5});
    CHECK(max_abs(kp.lhs) > 1e-3);
    CHECK(kp.defect < 1e-8);

    // constant tau on S3: both sides zero
    const auto fs = build_frame(sphere3(), std::vector<double>{1.3, 1.1, 0.8});
    const auto ks = k_divergence_identity(fs, KCoefficients{1, 0, 0, 0});
    CHECK(max_abs(ks.lhs) < 1e-9);
    CHECK(max_abs(ks.rhs) < 1e-9);
}

TEST_CASE("C trace adjustment: g^{ik} C_{ijkl} = Ric - (tau/n) g") {
    for (const auto& m : {sphere3(), schwarzschild(), perturbed3()}) {
        std::vector<double> p;
        for (const auto& [lo, hi] : m.sample_box) p.push_back(lo + 0.55 * (hi - lo));
        const auto f = build_frame(m, p);
        const auto b = curvature_bundle(f);
        const int n = f.n;
        double defect = 0.0;
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) {
                double trace = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int k = 0; k < n; ++k)
                        trace += f.g_inv.at(i, k).value() *
                                 b.concircular_t.at(i, j, k, l).value();
                const double expect = b.ricci.at(j, l).value() -
                                      b.tau.value() / n * f.g.at(j, l).value();
                defect = std::max(defect, std::abs(trace - expect));
            }
        CHECK(normalized(defect, max_abs(b.ricci)) < 1e-9);
    }
}

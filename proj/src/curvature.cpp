#include "concircle/curvature.hpp"

#include <algorithm>
#include <cmath>

#include "concircle/errors.hpp"

namespace concircle {
namespace {

void require_dim_for_concircular(int n) {
    if (n < 3)
        throw ArgumentError("concircular operations need dimension >= 3, got " +
                            std::to_string(n));
}

template <class T>
void require_symmetric_2(const Tensor<T>& h, const char* what) {
    if (h.rank() != 2) throw ArgumentError(std::string(what) + " must have rank 2");
    double scale = 0.0, defect = 0.0;
    for (int i = 0; i < h.n(); ++i)
        for (int j = 0; j < h.n(); ++j) {
            double a, b;
            if constexpr (std::is_same_v<T, Jet3>) {
                a = h.at(i, j).value();
                b = h.at(j, i).value();
            } else {
                a = h.at(i, j);
                b = h.at(j, i);
            }
            scale = std::max(scale, std::abs(a));
            defect = std::max(defect, std::abs(a - b));
        }
    if (defect > 1e-10 * std::max(1.0, scale))
        throw ArgumentError(std::string(what) + " is not symmetric");
}

template <class T>
Tensor<T> kn_product(const Tensor<T>& h, const Tensor<T>& k, const T& zero) {
    require_symmetric_2(h, "Kulkarni-Nomizu factor h");
    require_symmetric_2(k, "Kulkarni-Nomizu factor k");
    const int n = h.n();
    Tensor<T> out(n, {Variance::Down, Variance::Down, Variance::Down, Variance::Down},
                  zero);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int kk = 0; kk < n; ++kk)
                for (int l = 0; l < n; ++l)
                    out.at(i, j, kk, l) = h.at(i, kk) * k.at(j, l) +
                                          h.at(j, l) * k.at(i, kk) -
                                          h.at(j, kk) * k.at(i, l) -
                                          h.at(i, l) * k.at(j, kk);
    return out;
}

int min_order(const JetTensor& t) {
    int o = 3;
    for (const auto& c : t.components()) o = std::min(o, c.order());
    return o;
}

} // namespace

RiemannPair riemann(const PointFrame& frame) {
    const int n = frame.n;
    const Jet3 zero = Jet3::constant(0.0, n);
    JetTensor up(n, {Variance::Up, Variance::Down, Variance::Down, Variance::Down},
                 zero);

    // R^m_{jkl} = d_k Gamma^m_{lj} - d_l Gamma^m_{kj}
    //           + Gamma^m_{ka} Gamma^a_{lj} - Gamma^m_{la} Gamma^a_{kj}
    for (int m = 0; m < n; ++m)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    if (k == l) continue; // antisymmetric pair, stays zero
                    Jet3 sum = frame.gamma.at(m, l, j).partial(k) -
                               frame.gamma.at(m, k, j).partial(l);
                    for (int a = 0; a < n; ++a)
                        sum = sum + frame.gamma.at(m, k, a) * frame.gamma.at(a, l, j) -
                              frame.gamma.at(m, l, a) * frame.gamma.at(a, k, j);
                    up.at(m, j, k, l) = sum;
                }

    JetTensor down(n, {Variance::Down, Variance::Down, Variance::Down, Variance::Down},
                   zero);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    if (k == l) continue;
                    Jet3 sum = zero;
                    for (int m = 0; m < n; ++m)
                        sum = sum + frame.g.at(i, m) * up.at(m, j, k, l);
                    down.at(i, j, k, l) = sum;
                }
    return {std::move(up), std::move(down)};
}

RicciScalar ricci_scalar(const PointFrame& frame) {
    return ricci_scalar(frame, riemann(frame));
}

RicciScalar ricci_scalar(const PointFrame& frame, const RiemannPair& r) {
    const int n = frame.n;
    const Jet3 zero = Jet3::constant(0.0, n);
    JetTensor ric(n, {Variance::Down, Variance::Down}, zero);
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
            Jet3 sum = zero;
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k)
                    sum = sum + frame.g_inv.at(i, k) * r.down.at(i, j, k, l);
            ric.at(j, l) = sum;
        }
    Jet3 tau = zero;
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) tau = tau + frame.g_inv.at(j, l) * ric.at(j, l);
    return {std::move(ric), std::move(tau)};
}

JetTensor kulkarni_nomizu(const JetTensor& h, const JetTensor& k) {
    return kn_product(h, k, Jet3::constant(0.0, h.n()));
}

RealTensor kulkarni_nomizu(const RealTensor& h, const RealTensor& k) {
    return kn_product(h, k, 0.0);
}

JetTensor metric_model_tensor(const PointFrame& frame) {
    JetTensor g_wedge = kulkarni_nomizu(frame.g, frame.g);
    for (auto& c : g_wedge.components()) c = c * 0.5;
    return g_wedge;
}

JetTensor concircular(const PointFrame& frame) {
    const auto r = riemann(frame);
    const auto rs = ricci_scalar(frame, r);
    return concircular(frame, r.down, rs.tau);
}

JetTensor concircular(const PointFrame& frame, const JetTensor& riemann_down,
                      const Jet3& tau) {
    require_dim_for_concircular(frame.n);
    const int n = frame.n;
    const double beta = static_cast<double>(n) * (n - 1);
    const JetTensor model = metric_model_tensor(frame);
    JetTensor c = riemann_down;
    const Jet3 factor = tau / beta;
    for (std::size_t i = 0; i < c.components().size(); ++i)
        c.components()[i] = c.components()[i] - factor * model.components()[i];
    return c;
}

KTensors k_tensor(const PointFrame& frame, const KCoefficients& a) {
    const auto r = riemann(frame);
    const auto rs = ricci_scalar(frame, r);
    return k_tensor(frame, a, r.down, rs.ricci);
}

KTensors k_tensor(const PointFrame& frame, const KCoefficients& a,
                  const JetTensor& riemann_down, const JetTensor& ricci) {
    if (a.a0 == 0.0) throw ArgumentError("k_tensor requires a0 != 0");
    const int n = frame.n;
    const Jet3 zero = Jet3::constant(0.0, n);
    JetTensor k4(n, {Variance::Down, Variance::Down, Variance::Down, Variance::Down},
                 zero);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int kk = 0; kk < n; ++kk)
                for (int l = 0; l < n; ++l)
                    k4.at(i, j, kk, l) = a.a0 * riemann_down.at(i, j, kk, l) +
                                         a.a1 * frame.g.at(i, j) * frame.g.at(kk, l) +
                                         a.a2 * frame.g.at(i, kk) * frame.g.at(j, l) +
                                         a.a3 * frame.g.at(j, kk) * frame.g.at(i, l);
    JetTensor k2(n, {Variance::Down, Variance::Down}, zero);
    const double trace_coeff = a.a1 + n * a.a2 + a.a3;
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
            k2.at(j, l) = a.a0 * ricci.at(j, l) + trace_coeff * frame.g.at(j, l);
    return {std::move(k4), std::move(k2)};
}

ScalarCalculus scalar_calculus(const PointFrame& frame, const std::string& field) {
    return scalar_calculus_of(frame, frame.field(field));
}

ScalarCalculus scalar_calculus_of(const PointFrame& frame, const Jet3& f) {
    const int n = frame.n;
    const Jet3 zero = Jet3::constant(0.0, n);
    std::vector<Jet3> df;
    df.reserve(n);
    for (int i = 0; i < n; ++i) df.push_back(f.partial(i));

    JetTensor grad(n, {Variance::Up}, zero);
    for (int i = 0; i < n; ++i) {
        Jet3 sum = zero;
        for (int j = 0; j < n; ++j) sum = sum + frame.g_inv.at(i, j) * df[j];
        grad.at(i) = sum;
    }
    JetTensor hess(n, {Variance::Down, Variance::Down}, zero);
    for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) {
            Jet3 sum = df[j].partial(k);
            for (int l = 0; l < n; ++l)
                sum = sum - frame.gamma.at(l, j, k) * df[l];
            hess.at(j, k) = sum;
            if (k != j) hess.at(k, j) = sum;
        }
    Jet3 lap = zero;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) lap = lap + frame.g_inv.at(j, k) * hess.at(j, k);
    return {std::move(grad), std::move(hess), std::move(lap)};
}

RealTensor nabla(const PointFrame& frame, const JetTensor& t) {
    const int n = frame.n;
    if (t.n() != n) throw ArgumentError("nabla: tensor dimension mismatch");
    if (min_order(t) < 1)
        throw ContractViolation("nabla needs components of jet order >= 1");

    std::vector<Variance> out_var = {Variance::Down};
    out_var.insert(out_var.end(), t.variance().begin(), t.variance().end());
    RealTensor out(n, out_var, 0.0);

    const int rank = t.rank();
    std::vector<int> idx(rank, 0);
    std::vector<int> widx(rank, 0);
    const std::size_t count = t.components().size();
    for (std::size_t flat = 0; flat < count; ++flat) {
        std::size_t rem = flat;
        for (int s = rank - 1; s >= 0; --s) {
            idx[s] = static_cast<int>(rem % n);
            rem /= n;
        }
        for (int m = 0; m < n; ++m) {
            double v = t(idx).derivative({m});
            for (int s = 0; s < rank; ++s) {
                widx = idx;
                const int is = idx[s];
                if (t.variance()[s] == Variance::Down) {
                    for (int a = 0; a < n; ++a) {
                        widx[s] = a;
                        v -= frame.gamma.at(a, m, is).value() * t(widx).value();
                    }
                } else {
                    for (int a = 0; a < n; ++a) {
                        widx[s] = a;
                        v += frame.gamma.at(is, m, a).value() * t(widx).value();
                    }
                }
            }
            std::vector<int> oidx;
            oidx.reserve(rank + 1);
            oidx.push_back(m);
            oidx.insert(oidx.end(), idx.begin(), idx.end());
            out(oidx) = v;
        }
    }
    return out;
}

RealTensor divergence_04(const PointFrame& frame, const JetTensor& t) {
    if (t.rank() != 4) throw ArgumentError("divergence_04 expects a rank-4 tensor");
    for (auto v : t.variance())
        if (v != Variance::Down)
            throw ArgumentError("divergence_04 expects a (0,4) tensor");
    const int n = frame.n;
    const RealTensor grad = nabla(frame, t);
    RealTensor out(n, {Variance::Down, Variance::Down, Variance::Down}, 0.0);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
                double sum = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int m = 0; m < n; ++m)
                        sum += frame.g_inv.at(i, m).value() * grad.at(m, i, j, k, l);
                out.at(j, k, l) = sum;
            }
    return out;
}

RealTensor codazzi_defect(const PointFrame& frame) {
    return codazzi_defect(frame, ricci_scalar(frame).ricci);
}

RealTensor codazzi_defect(const PointFrame& frame, const JetTensor& ricci) {
    const int n = frame.n;
    const RealTensor dric = nabla(frame, ricci);
    RealTensor t(n, {Variance::Down, Variance::Down, Variance::Down}, 0.0);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            for (int z = 0; z < n; ++z)
                t.at(x, y, z) = dric.at(x, y, z) - dric.at(y, x, z);
    return t;
}

RealTensor curvature_operator(const PointFrame& frame, const RealTensor& t4) {
    if (t4.rank() != 4) throw ArgumentError("curvature_operator expects rank 4");
    const int n = frame.n;
    RealTensor op(n, {Variance::Up, Variance::Down, Variance::Down, Variance::Down},
                  0.0);
    for (int m = 0; m < n; ++m)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double sum = 0.0;
                    for (int v = 0; v < n; ++v)
                        sum += frame.g_inv.at(m, v).value() * t4.at(i, j, k, v);
                    op.at(m, i, j, k) = sum;
                }
    return op;
}

RealTensor derivation_action(const RealTensor& op, const RealTensor& t4) {
    if (op.rank() != 4 || op.variance()[0] != Variance::Up ||
        op.variance()[1] != Variance::Down || op.variance()[2] != Variance::Down ||
        op.variance()[3] != Variance::Down)
        throw ArgumentError("derivation_action operator must be (up,down,down,down)");
    if (t4.rank() != 4)
        throw ArgumentError("derivation_action target must have rank 4");
    const int n = op.n();

    RealTensor out(n,
                   {Variance::Down, Variance::Down, Variance::Down, Variance::Down,
                    Variance::Down, Variance::Down},
                   0.0);
    std::vector<int> z(4, 0), w(4, 0);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            for (std::size_t flat = 0; flat < t4.components().size(); ++flat) {
                std::size_t rem = flat;
                for (int s = 3; s >= 0; --s) {
                    z[s] = static_cast<int>(rem % n);
                    rem /= n;
                }
                double sum = 0.0;
                for (int s = 0; s < 4; ++s) {
                    w = z;
                    for (int m = 0; m < n; ++m) {
                        w[s] = m;
                        sum -= op.at(m, x, y, z[s]) * t4(w);
                    }
                }
                out.at(x, y, z[0], z[1], z[2], z[3]) = sum;
            }
        }
    return out;
}

std::map<std::string, double> identity_defects(const PointFrame& frame) {
    return identity_defects(frame, curvature_bundle(frame));
}

std::map<std::string, double> identity_defects(const PointFrame& frame,
                                               const CurvatureBundle& bundle) {
    require_dim_for_concircular(frame.n);
    const int n = frame.n;
    const double beta = static_cast<double>(n) * (n - 1);

    const RealTensor r4 = values_of(bundle.riemann.down);
    const RealTensor c4 = values_of(bundle.concircular_t);
    const RealTensor g4 = values_of(bundle.model_g);
    const double tau = bundle.tau.value();

    const RealTensor r_op = curvature_operator(frame, r4);
    const RealTensor c_op = curvature_operator(frame, c4);
    const RealTensor g_op = curvature_operator(frame, g4);

    const RealTensor rr = derivation_action(r_op, r4);
    const RealTensor rc = derivation_action(r_op, c4);
    const RealTensor rg = derivation_action(r_op, g4);
    const RealTensor cr = derivation_action(c_op, r4);
    const RealTensor cc = derivation_action(c_op, c4);
    const RealTensor gr = derivation_action(g_op, r4);

    auto diff_norm = [](const RealTensor& a, const RealTensor& b, double extra) {
        const double defect = max_abs_diff(a, b);
        return normalized(defect, std::max({max_abs(a), max_abs(b), extra}));
    };

    RealTensor pseudo_rhs = gr; // tau/beta * G.R
    for (auto& v : pseudo_rhs.components()) v *= tau / beta;

    RealTensor pseudo_defect = rr;
    for (std::size_t i = 0; i < pseudo_defect.components().size(); ++i)
        pseudo_defect.components()[i] -= pseudo_rhs.components()[i];

    std::map<std::string, double> out;
    out["r_dot_c_minus_r_dot_r"] = diff_norm(rc, rr, 0.0);
    out["c_dot_r_identity"] = diff_norm(cr, pseudo_defect, max_abs(pseudo_rhs));
    out["c_dot_c_identity"] = diff_norm(cc, pseudo_defect, max_abs(pseudo_rhs));
    out["r_dot_g"] = normalized(max_abs(rg), std::max(max_abs(r4), max_abs(g4)));
    out["semi_symmetric_norm"] = normalized(max_abs(rr), max_abs(r4));
    out["pseudo_symmetric_norm"] =
        normalized(max_abs(pseudo_defect), std::max(max_abs(rr), max_abs(pseudo_rhs)));
    return out;
}

StressEnergy stress_energy(const PointFrame& frame, double lambda, double k) {
    const auto rs = ricci_scalar(frame);
    return stress_energy(frame, lambda, k, rs.ricci, rs.tau);
}

StressEnergy stress_energy(const PointFrame& frame, double lambda, double k,
                           const JetTensor& ricci, const Jet3& tau) {
    if (k == 0.0) throw ArgumentError("stress_energy requires k != 0");
    const int n = frame.n;

    StressEnergy se;
    se.dimension_warning = (n != 4);
    se.t = JetTensor(n, {Variance::Down, Variance::Down}, Jet3::constant(0.0, n));
    const Jet3 half_tau = tau * 0.5;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            se.t.at(i, j) =
                (ricci.at(i, j) - half_tau * frame.g.at(i, j) +
                 lambda * frame.g.at(i, j)) /
                k;

    const RealTensor dt = nabla(frame, se.t);
    double defect = 0.0;
    for (int j = 0; j < n; ++j) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i)
            for (int m = 0; m < n; ++m)
                sum += frame.g_inv.at(i, m).value() * dt.at(m, i, j);
        defect = std::max(defect, std::abs(sum));
    }
    se.divergence_defect = normalized(defect, max_abs(dt));
    return se;
}

KDivergence k_divergence_identity(const PointFrame& frame, const KCoefficients& a) {
    const auto r = riemann(frame);
    const auto rs = ricci_scalar(frame, r);
    return k_divergence_identity(frame, a, r.down, rs.ricci, rs.tau);
}

KDivergence k_divergence_identity(const PointFrame& frame, const KCoefficients& a,
                                  const JetTensor& riemann_down,
                                  const JetTensor& ricci, const Jet3& tau) {
    const int n = frame.n;
    const auto kt = k_tensor(frame, a, riemann_down, ricci);

    const RealTensor dk = nabla(frame, kt.k2);
    KDivergence out;
    out.lhs = RealTensor(n, {Variance::Down}, 0.0);
    out.rhs = RealTensor(n, {Variance::Down}, 0.0);
    for (int j = 0; j < n; ++j) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i)
            for (int m = 0; m < n; ++m)
                sum += frame.g_inv.at(i, m).value() * dk.at(m, i, j);
        out.lhs.at(j) = sum;
        out.rhs.at(j) = 0.5 * a.a0 * tau.derivative({j});
    }
    out.defect = normalized(max_abs_diff(out.lhs, out.rhs),
                            std::max(max_abs(out.lhs), max_abs(out.rhs)));
    return out;
}

CurvatureBundle curvature_bundle(const PointFrame& frame) {
    CurvatureBundle b;
    b.riemann = riemann(frame);
    auto rs = ricci_scalar(frame, b.riemann);
    b.ricci = std::move(rs.ricci);
    b.tau = std::move(rs.tau);
    b.model_g = metric_model_tensor(frame);
    if (frame.n >= 3) b.concircular_t = concircular(frame, b.riemann.down, b.tau);
    return b;
}

} // namespace concircle

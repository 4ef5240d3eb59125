#pragma once

#include <map>
#include <string>

#include "concircle/frame.hpp"
#include "concircle/tensor.hpp"

namespace concircle {

/// Sign convention, pinned once for the whole engine: on a space of
/// constant curvature kappa,
///     R(X,Y,Z,V) = kappa * [g(X,Z)g(Y,V) - g(Y,Z)g(X,V)],
/// so the unit sphere has R_{ijkl} = g_{ik}g_{jl} - g_{jk}g_{il} and
/// Ric = (n-1) g, tau = n(n-1).

struct RiemannPair {
    JetTensor up;   // R^i_{jkl}, first slot raised
    JetTensor down; // R_{ijkl}
};

/// Curvature tensor from the Christoffel jets; components carry order-1
/// jets so one covariant derivative is still exact.
RiemannPair riemann(const PointFrame& frame);

struct RicciScalar {
    JetTensor ricci; // Ric_{jl} = g^{ik} R_{ijkl}
    Jet3 tau;        // g^{jl} Ric_{jl}
};
RicciScalar ricci_scalar(const PointFrame& frame);
RicciScalar ricci_scalar(const PointFrame& frame, const RiemannPair& r);

/// Kulkarni-Nomizu product of two symmetric 2-tensors,
/// (h ^ k)_{ijkl} = h_{ik}k_{jl} + h_{jl}k_{ik} - h_{jk}k_{il} - h_{il}k_{jk}.
/// Normalized so that G = (1/2)(g ^ g) is the constant-curvature model.
JetTensor kulkarni_nomizu(const JetTensor& h, const JetTensor& k);
RealTensor kulkarni_nomizu(const RealTensor& h, const RealTensor& k);

/// G = (1/2)(g ^ g).
JetTensor metric_model_tensor(const PointFrame& frame);

/// Concircular tensor C = R - tau/(n(n-1)) G. Requires n >= 3.
JetTensor concircular(const PointFrame& frame);
JetTensor concircular(const PointFrame& frame, const JetTensor& riemann_down,
                      const Jet3& tau);

struct KCoefficients {
    double a0 = 1.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
};
struct KTensors {
    JetTensor k4; // a0 R_{ijkl} + a1 g_{ij}g_{kl} + a2 g_{ik}g_{jl} + a3 g_{jk}g_{il}
    JetTensor k2; // g^{ik} K_{ijkl} = a0 Ric + (a1 + n a2 + a3) g
};
KTensors k_tensor(const PointFrame& frame, const KCoefficients& a);
KTensors k_tensor(const PointFrame& frame, const KCoefficients& a,
                  const JetTensor& riemann_down, const JetTensor& ricci);

struct ScalarCalculus {
    JetTensor grad;    // grad^i = g^{ij} d_j f
    JetTensor hessian; // H^f_{jk} = d_j d_k f - Gamma^l_{jk} d_l f
    Jet3 laplacian;    // g^{jk} H^f_{jk}
};
ScalarCalculus scalar_calculus(const PointFrame& frame, const std::string& field);
ScalarCalculus scalar_calculus_of(const PointFrame& frame, const Jet3& f);

/// Covariant derivative; the new (derivative) slot comes first and the
/// output components are plain reals, the jet order being exhausted.
/// Requires every input component to carry order >= 1.
RealTensor nabla(const PointFrame& frame, const JetTensor& t);

/// Divergence on the first slot of a (0,4) tensor:
/// (div t)_{jkl} = g^{im} (nabla t)_{m;ijkl}.
RealTensor divergence_04(const PointFrame& frame, const JetTensor& t);

/// T(X,Y,Z) = (nabla_X Ric)(Y,Z) - (nabla_Y Ric)(X,Z); zero iff the Ricci
/// tensor is Codazzi at the point.
RealTensor codazzi_defect(const PointFrame& frame);
RealTensor codazzi_defect(const PointFrame& frame, const JetTensor& ricci);

/// Curvature-type operator of a (0,4) tensor: op^m_{ijk} = g^{mv} t_{ijkv},
/// i.e. (t(X,Y)Z)^m contracted against coordinate basis vectors.
RealTensor curvature_operator(const PointFrame& frame, const RealTensor& t4);

/// (A . t)(X,Y,Z1..Z4) = -sum_s t(Z1, .., A(X,Y)Z_s, .., Z4); `op` must
/// have curvature-operator variance (up, down, down, down).
RealTensor derivation_action(const RealTensor& op, const RealTensor& t4);

/// Max-norms (scale-normalized) of the derivation-action identities that
/// hold on every pseudo-Riemannian manifold:
///   r_dot_c_minus_r_dot_r : R.C - R.R
///   c_dot_r_identity      : C.R - [R.R - tau/(n(n-1)) G.R]
///   c_dot_c_identity      : C.C - [R.R - tau/(n(n-1)) G.R]
///   r_dot_g               : R.G
/// plus the condition norms used for classification flags:
///   semi_symmetric_norm   : R.R
///   pseudo_symmetric_norm : R.R - tau/(n(n-1)) G.R
std::map<std::string, double> identity_defects(const PointFrame& frame);
std::map<std::string, double> identity_defects(const PointFrame& frame,
                                               const struct CurvatureBundle& b);

struct StressEnergy {
    JetTensor t;                    // (Ric - tau/2 g + Lambda g) / k
    double divergence_defect = 0.0; // normalized max |nabla_i T^i_j|
    bool dimension_warning = false; // n != 4
};
StressEnergy stress_energy(const PointFrame& frame, double lambda, double k);
StressEnergy stress_energy(const PointFrame& frame, double lambda, double k,
                           const JetTensor& ricci, const Jet3& tau);

struct KDivergence {
    RealTensor lhs; // nabla_i K^i_j
    RealTensor rhs; // (a0/2) nabla_j tau
    double defect = 0.0;
};
KDivergence k_divergence_identity(const PointFrame& frame, const KCoefficients& a);
KDivergence k_divergence_identity(const PointFrame& frame, const KCoefficients& a,
                                  const JetTensor& riemann_down,
                                  const JetTensor& ricci, const Jet3& tau);

/// Shared per-point bundle for the diagnostic pipeline.
struct CurvatureBundle {
    RiemannPair riemann;
    JetTensor ricci;
    Jet3 tau;
    JetTensor model_g;      // G
    JetTensor concircular_t; // C
};
CurvatureBundle curvature_bundle(const PointFrame& frame);

} // namespace concircle

#pragma once

#include <map>
#include <string>
#include <vector>

#include "concircle/curvature.hpp"
#include "concircle/frame.hpp"
#include "concircle/manifest.hpp"

namespace concircle {

/// Factor description used when assembling a product chart.
struct WarpedInput {
    std::string name;
    StructureTag::Kind kind = StructureTag::Kind::Warped;
    Manifest base;           // for grw this is the interval chart (t, [[-1]])
    Manifest fiber;          // for ssst this is the interval chart
    std::string warping;     // expression over the base coordinates, > 0 on the box
};

/// Assembles the block-diagonal product manifest g1 (+) f^2 g2 (with the
/// kind-specific interval factor placement), records the structure tag, and
/// verifies f > 0 over the base box. Colliding fiber coordinate names get a
/// "_2" suffix.
Manifest product_metric(const WarpedInput& in);

/// A structured product chart split back into its factors. The fiber chart
/// recovers g2 by dividing the product block by f^2; the other factor's
/// coordinates and the warping value enter it as externally bound
/// constants, so factor frames stay independent of the product frame.
struct WarpedSpec {
    StructureTag::Kind kind = StructureTag::Kind::Warped;
    Manifest product;
    Manifest base, fiber;
    std::string warping;
    int n1 = 0, n2 = 0;            // base / fiber dimensions
    std::vector<int> base_slots;   // product coordinate index per base index
    std::vector<int> fiber_slots;

    static WarpedSpec from_manifest(const Manifest& product);
};

/// Everything both the generic pipeline and the closed-form oracles need
/// at one product point.
struct WarpedPointData {
    std::vector<double> point;
    PointFrame product_frame;
    PointFrame base_frame;
    PointFrame fiber_frame;
    CurvatureBundle ambient;
    CurvatureBundle base_curv;
    CurvatureBundle fiber_curv;
    ScalarCalculus warp;     // grad f, H^f, Laplacian on the base factor
    Jet3 f;                  // warping jet on the base frame
    Jet3 grad_norm_sq;       // g1(grad f, grad f)
    double tau_ambient = 0.0;
};

WarpedPointData evaluate_warped_point(const WarpedSpec& spec,
                                      std::span<const double> product_point);

/// Variant reusing an already-built ambient frame and curvature bundle.
WarpedPointData evaluate_warped_point(const WarpedSpec& spec,
                                      std::span<const double> product_point,
                                      PointFrame product_frame,
                                      CurvatureBundle ambient);

/// One oracle block: the paper's closed-form component table evaluated from
/// factor data only, next to the generic pipeline contracted against the
/// same coordinate basis vectors.
struct OracleBlock {
    std::string name;
    double agreement_defect = 0.0; // normalized max difference
    double oracle_scale = 0.0;
    double pipeline_scale = 0.0;
};

/// Block tables per structure kind:
///   warped: base / mixed_fiber_base / mixed_base_fiber / fiber
///   grw:    t_t_t / fiber_t_t / t_fiber_fiber / fiber
///   ssst:   spatial_t_t / t_spatial_spatial / spatial
std::vector<OracleBlock> concircular_oracle_blocks(const WarpedSpec& spec,
                                                   const WarpedPointData& d);

/// Residuals of the concircular-flatness characterization: factor
/// constant-curvature defects, the Hessian condition, and the Hessian-type
/// corollary residuals. "f_sharp_value" is a reported value, not a defect.
std::map<std::string, double> flatness_residuals(const WarpedSpec& spec,
                                                 const WarpedPointData& d);

/// Residuals of the concircular-symmetry consequences: factor local
/// symmetry, parallel (1/f)H^f, the grad-f curvature relation, the fiber
/// relation, and the ambient nabla C.
std::map<std::string, double> symmetry_residuals(const WarpedSpec& spec,
                                                 const WarpedPointData& d);

/// Residuals around the divergence-free characterization: ambient div C,
/// Codazzi defect and grad tau, the base T^1 formula, the mixed equation
/// (ambient-Ricci reading, plus the gap to the fiber-Ricci reading), fiber
/// Codazzi and Einstein defects, and factor div C where defined.
std::map<std::string, double> divfree_residuals(const WarpedSpec& spec,
                                                const WarpedPointData& d);

struct ConcircularFieldDefect {
    RealTensor defect_concurrent; // nabla zeta - identity
    double rho_hat = 0.0;         // trace(nabla zeta)/n
    double defect_concircular = 0.0;
    double defect_concurrent_max = 0.0;
};

/// Evaluates nabla zeta for a coordinate vector field given by component
/// expressions, reporting both the concurrent defect (nabla zeta - id) and
/// the concircular defect (nabla zeta - rho id).
ConcircularFieldDefect concircular_field_defect(
    const Manifest& m, const std::vector<std::string>& field_components,
    std::span<const double> point);

} // namespace concircle

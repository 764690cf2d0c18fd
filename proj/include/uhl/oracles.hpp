#pragma once

#include "uhl/atom.hpp"
#include "uhl/linalg.hpp"
#include "uhl/paths.hpp"

#include <optional>
#include <utility>

namespace uhl {

// Closed-form reference values for the two loop families with analytic
// holonomies: the pole-to-pole slice ("orange slice", a lune bounded by the
// meridians phi0 and phi1) and the figure eight built from two such slices
// traversed with opposite orientation. Everything here is independent of the
// transport integrators and is used as ground truth against them.

// Model point plus the two half-turn angles that drive the lune blocks.
struct Figure8Params {
    int l = 0;
    int two_mu = 0;
    double g = 0.0;
    double phi0 = 0.0;
    double phi1 = 0.0;
    double chi_l = 0.0;  // pi * w * concurrence
    double chi_s = 0.0;  // pi * concurrence
};

// Derives the chi angles from the model point. Non-extremal weights only.
Figure8Params figure8_params(int l, int two_mu, double g, double phi0, double phi1);

// Phase summary of one orange slice across the three systems, with the
// product-of-overlaps scalar zeta and the figure-eight traces xi.
struct AdditivityReport {
    std::optional<double> gamma_j, gamma_l, gamma_s;
    std::optional<double> delta_gamma;  // gamma_j - gamma_l - gamma_s mod 2 pi
    double zeta = 0.0;
    double xi_l = 0.0;
    double xi_s = 0.0;
};

// Joint-system holonomy of an energy eigenstate along any path: a pure
// winding phase times the rotated rank-one projector.
Mat j_holonomy_closed_form(const EnergyEigenstate& e, const SampledPath& path);

// The three partial isometries for an extremal weight mu = sign * (l + 1/2).
// joint == tensor_embed(l_part, s_part) exactly, and none depend on g.
struct ExtremalHolonomies {
    Mat l_part, s_part, joint;
};
ExtremalHolonomies extremal_holonomies(int l, int sign, const SampledPath& path);

// Lune holonomy blocks in the two-dimensional support basis; the L block
// carries the extra winding phase, the S block does not.
Mat lune_holonomy_L(const Figure8Params& p);
Mat lune_holonomy_S(const Figure8Params& p);

// Figure-eight blocks: the slice phases cancel and the diagonal is real.
Mat figure8_holonomy_L(const Figure8Params& p);
Mat figure8_holonomy_S(const Figure8Params& p);

// Real part of the diagonal lune coefficient,
// cos^2(chi/2) cos(delta_phi) + sin^2(chi/2); its sign classifies the
// slice phase and the product of the L and S overlaps is zeta.
double lune_overlap(double delta_phi, double chi);

// Trace of the figure-eight block,
// 2 [cos(delta_phi) sin^2(chi) + cos^2(chi)]; sign gives the loop phase
// (0 when positive, pi when negative, undefined at zero).
double figure8_trace(double delta_phi, double chi);

// Axis-angle form of the figure-eight block: a/b = tan(eta/2) e^{-i kappa}
// with eta in [0, pi], kappa in (-pi, pi]. Empty when b is (numerically)
// zero and the block degenerates to a pure phase.
struct RotationDecomposition {
    double eta = 0.0;
    double kappa = 0.0;
};
std::optional<RotationDecomposition> rotation_decomposition(cplx a, cplx b);

// Rebuilds the figure-eight block from the axis-angle data; inverse of the
// decomposition whenever |a|^2 + |b|^2 = 1.
Mat rotation_reconstruction(const RotationDecomposition& d);

// All five slice phases plus zeta and the figure-eight traces for one model
// point and slice. Phases are empty on nodal zeros.
AdditivityReport orange_slice_phases(int l, int two_mu, double g, double phi0, double phi1);

// Spectral geometric phases for a closed loop of solid angle omega.
// l_part + s_part == j_part == -mu * omega (mod 2 pi) whenever defined.
struct BetaPhases {
    std::optional<double> l_part, s_part;
    double j_part = 0.0;
};
BetaPhases geometric_phase_closed_forms(int l, int two_mu, double g, int branch,
                                        double omega);

// Concurrence interval in which a trace phase of pi can occur:
// (1/(4w), 3/(4w)) for L, (1/4, 3/4) for S. Marginals only.
std::pair<double, double> concurrence_window(int l, int two_mu, Subsystem subsystem);

} // namespace uhl

#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "uhl/atom.hpp"
#include "uhl/linalg.hpp"
#include "uhl/paths.hpp"

namespace uhl {

enum class Section { North, South, Auto };
enum class Method { Ode, Potential, Oracle };

// Step-doubling driver settings: resolutions steps, 2*steps, ... are compared
// until two consecutive holonomies agree to tol in max-entry norm, up to
// steps * 2^max_doublings nodes per segment.
struct TransportOptions {
    int steps = 2000;
    int max_doublings = 5;
    double tol = 1e-8;
    Section section = Section::Auto;
    double switch_latitude = pi / 2.0;
};

// Reference state, generator triple and discretized path for one transport run.
// v0 is the initial isometry; leave empty to use the support projector of
// rho_z. Kernel components of v0 ride along unchanged; only the support block
// evolves.
struct TransportProblem {
    Mat rho_z;
    SpinOperators ops;
    SampledPath path;
    Section section = Section::Auto;
    double switch_latitude = pi / 2.0;
    Mat v0;

    void validate() const;
};

struct HolonomyResult {
    Mat matrix;  // partial isometry from the start support to the end support
    Subsystem subsystem = Subsystem::J;
    Method method = Method::Ode;
    cplx trace{0.0, 0.0};
    std::optional<double> phase_gamma;  // arg trace, empty inside the nodal band
    std::optional<double> phase_beta;   // spectral geometric phase, closed loops only
    double isometry_residual = 0.0;
    int steps_per_segment = 0;
    double convergence_gap = 0.0;
    bool converged = true;
};

// ---------------------------------------------------------------------------
// generator-ODE pipeline
// ---------------------------------------------------------------------------

// Right-hand side of the transport equation in the co-rotating frame for a
// step (dtheta, dphi) at (theta, phi). Auto resolves by theta against the
// equator.
Mat transport_rhs(const Mat& rho_z, const SpinOperators& ops, double theta, double phi,
                  double dtheta, double dphi, Section section);

// Solves g*rho + rho*g = rhs for the anti-Hermitian generator supported on
// range(rho); rejects a right-hand side that leaks outside the support.
Mat sylvester_on_support(const Mat& rho, const Mat& rhs);

// Midpoint-exponential integration of dV = G V over the sampled path.
// Returns (v_final, v0); v_final is expressed in the section active at the
// path end, v0 in the north section.
std::pair<Mat, Mat> transport(const TransportProblem& problem);

// Frame isometries V at every path node (same representation rules as
// transport).
std::vector<Mat> transport_trajectory(const TransportProblem& problem);

// Accumulated parallel-transport defect sum_k |W_k^dag W_{k+1} - h.c.| of the
// amplitudes W = sqrt(rho_t) V_lab along the discrete trajectory; O(1/n^2).
double parallel_transport_residual(const TransportProblem& problem);

// Holonomy of the sampled path: rotation factors at the endpoints around the
// transported frame change. Runs on the support block alone when v0 is the
// default projector.
HolonomyResult holonomy(const TransportProblem& problem, Subsystem tag = Subsystem::J);

// Step-doubling wrapper around holonomy(); fills phase_beta on closed loops.
HolonomyResult converged_holonomy(const Mat& rho_z, const SpinOperators& ops,
                                  const PathSpec& spec, const TransportOptions& options = {},
                                  Subsystem tag = Subsystem::J);

// ---------------------------------------------------------------------------
// gauge-potential pipeline
// ---------------------------------------------------------------------------

// Hermitian 2x2 potential components (a_theta, a_phi) of the orbital marginal
// in the basis {|mu-1/2>, |mu+1/2>}, and of the spin marginal in {|+>, |->}.
std::pair<Mat, Mat> vector_potential_L(int l, int two_mu, double g, double theta, double phi);
std::pair<Mat, Mat> vector_potential_S(int l, int two_mu, double g, double theta, double phi);

using PotentialFn = std::function<std::pair<Mat, Mat>(double theta, double phi)>;

// Ordered product of exp(-i (a_theta dtheta + a_phi dphi)) over the path,
// later steps multiplying from the left.
Mat path_ordered_exponential(const PotentialFn& potential, const SampledPath& path);

// Embeds the ordered exponential on the two relevant basis directions of the
// subsystem space and conjugates with rotation operators at the endpoints.
HolonomyResult holonomy_via_potential(Subsystem subsystem, int l, int two_mu, double g,
                                      const SampledPath& path);
HolonomyResult converged_holonomy_via_potential(Subsystem subsystem, int l, int two_mu,
                                                double g, const PathSpec& spec,
                                                const TransportOptions& options = {});

// ---------------------------------------------------------------------------
// phase functionals
// ---------------------------------------------------------------------------

std::optional<double> wilson_phase(const HolonomyResult& h);

// arg Tr(W0^dag W1) for amplitudes W = sqrt(rho) V in the lab frame.
std::optional<double> amplitude_phase(const Mat& rho_start, const Mat& rho_end, const Mat& v0,
                                      const Mat& v_final);

// Same quantity assembled from a holonomy matrix of the reference-state
// problem, with the support projector as initial isometry.
std::optional<double> amplitude_phase(const Mat& rho_z, const SpinOperators& ops,
                                      const SampledPath& path, const Mat& holonomy_matrix);

// Geometric phase of a discretized pure-state path: arg<psi_0|psi_N> minus the
// accumulated local phases. Empty for (near-)orthogonal endpoints; invariant
// under per-node phase changes.
std::optional<double> pure_geometric_phase(const std::vector<Vec>& vector_path);

// Weighted spectral geometric phase of the rotated reference state around a
// closed loop; empty when the weighted sum falls inside the nodal band.
// Rejects reference states with a degenerate support spectrum.
std::optional<double> mixed_state_geometric_phase(const Mat& rho_z, const SpinOperators& ops,
                                                  const SampledPath& loop);

// ---------------------------------------------------------------------------
// problem builders and diagnostics
// ---------------------------------------------------------------------------

// Reference state of one subsystem: the marginal for L or S, the pure-state
// projector for J.
Mat subsystem_state(const EnergyEigenstate& e, Subsystem subsystem);
SpinOperators subsystem_operators(int l, Subsystem subsystem);

// Largest end-to-end isometry defect of any holonomy produced so far in this
// process.
double peak_isometry_residual();

} // namespace uhl

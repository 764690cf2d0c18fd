#include "uhl/oracles.hpp"

#include <cmath>

namespace uhl {

namespace {

struct LuneCoeffs {
    cplx a, b;
};

// Diagonal and off-diagonal coefficients of the two-level lune block for a
// half-turn angle chi between the meridians phi0 and phi1.
LuneCoeffs lune_coeffs(double chi, double phi0, double phi1) {
    const double c = std::cos(0.5 * chi), s = std::sin(0.5 * chi);
    const cplx a = std::polar(1.0, phi1 - phi0) * (c * c) + cplx(s * s);
    const cplx b = c * s * (-std::polar(1.0, phi1) + std::polar(1.0, phi0));
    return {a, b};
}

// The spin block is the transpose of the orbital one: the off-diagonal pair
// swaps together with its conjugation pattern.
Mat figure8_block(const LuneCoeffs& lc, bool orbital) {
    const double d = std::norm(lc.a) - std::norm(lc.b);
    const cplx up = 2.0 * std::conj(lc.a) * lc.b;
    const cplx dn = -2.0 * lc.a * std::conj(lc.b);
    Mat m(2, 2);
    if (orbital)
        m << cplx(d), up, dn, cplx(d);
    else
        m << cplx(d), dn, up, cplx(d);
    return m;
}

// Endpoint rotations of a fixed vector, with the winding phase that parallel
// transport accumulates along the path: phase * (u_end v)(u_start v)^dagger.
Mat winding_holonomy(const SpinOperators& ops, const Vec& v, double phase,
                     const SampledPath& path) {
    const RotationCache rot(ops);
    Vec v0 = v, v1 = v;
    const auto& n0 = path.nodes.front();
    const auto& n1 = path.nodes.back();
    rot.apply(n0.theta, n0.phi, v0);
    rot.apply(n1.theta, n1.phi, v1);
    return std::polar(1.0, phase) * (v1 * v0.adjoint());
}

} // namespace

Figure8Params figure8_params(int l, int two_mu, double g, double phi0, double phi1) {
    require_valid_mu(l, two_mu);
    if (is_extremal(l, two_mu))
        throw InvalidInput("figure8_params: extremal weights have no two-level block");
    Figure8Params p;
    p.l = l;
    p.two_mu = two_mu;
    p.g = g;
    p.phi0 = phi0;
    p.phi1 = phi1;
    const double cc = concurrence(l, two_mu, g);
    p.chi_l = pi * w_factor(l, two_mu) * cc;
    p.chi_s = pi * cc;
    return p;
}

Mat j_holonomy_closed_form(const EnergyEigenstate& e, const SampledPath& path) {
    if (path.nodes.empty())
        throw InvalidInput("j_holonomy_closed_form: empty path");
    const SpinOperators ops = joint_operators(spin_operators(2 * e.l), spin_half_pm());
    return winding_holonomy(ops, e.vector, -e.mu() * solid_angle(path), path);
}

ExtremalHolonomies extremal_holonomies(int l, int sign, const SampledPath& path) {
    if (sign != +1 && sign != -1)
        throw InvalidInput("extremal_holonomies: sign must be +1 or -1");
    if (l < 1)
        throw InvalidInput("extremal_holonomies: l must be at least 1");
    if (path.nodes.empty())
        throw InvalidInput("extremal_holonomies: empty path");
    const double area = solid_angle(path);

    Vec top_l = Vec::Zero(2 * l + 1);
    top_l(sign > 0 ? 2 * l : 0) = 1.0;
    Vec top_s = Vec::Zero(2);
    top_s(sign > 0 ? 0 : 1) = 1.0;

    ExtremalHolonomies h;
    h.l_part = winding_holonomy(spin_operators(2 * l), top_l, -sign * l * area, path);
    h.s_part = winding_holonomy(spin_half_pm(), top_s, -sign * 0.5 * area, path);
    h.joint  = tensor_embed(h.l_part, h.s_part);
    return h;
}

Mat lune_holonomy_L(const Figure8Params& p) {
    const auto [a, b] = lune_coeffs(p.chi_l, p.phi0, p.phi1);
    Mat m(2, 2);
    m << a, b, -std::conj(b), std::conj(a);
    return std::polar(1.0, -p.two_mu * (p.phi1 - p.phi0)) * m;
}

Mat lune_holonomy_S(const Figure8Params& p) {
    const auto [a, b] = lune_coeffs(p.chi_s, p.phi0, p.phi1);
    Mat m(2, 2);
    m << std::conj(a), -std::conj(b), b, a;
    return m;
}

Mat figure8_holonomy_L(const Figure8Params& p) {
    return figure8_block(lune_coeffs(p.chi_l, p.phi0, p.phi1), true);
}

Mat figure8_holonomy_S(const Figure8Params& p) {
    return figure8_block(lune_coeffs(p.chi_s, p.phi0, p.phi1), false);
}

double lune_overlap(double delta_phi, double chi) {
    const double c = std::cos(0.5 * chi), s = std::sin(0.5 * chi);
    return std::fma(c * c, std::cos(delta_phi), s * s);
}

double figure8_trace(double delta_phi, double chi) {
    const double s = std::sin(chi), c = std::cos(chi);
    return 2.0 * std::fma(std::cos(delta_phi), s * s, c * c);
}

std::optional<RotationDecomposition> rotation_decomposition(cplx a, cplx b) {
    if (std::abs(b) < nodal_threshold)
        return std::nullopt;
    RotationDecomposition d;
    d.eta = 2.0 * std::atan2(std::abs(a), std::abs(b));
    d.kappa = std::abs(a) < nodal_threshold
                  ? 0.0
                  : wrap_angle(std::arg(b) - std::arg(a));
    return d;
}

Mat rotation_reconstruction(const RotationDecomposition& d) {
    const double c = std::cos(d.eta), s = std::sin(d.eta);
    Mat m(2, 2);
    m << cplx(-c), s * std::polar(1.0, d.kappa), -s * std::polar(1.0, -d.kappa), cplx(-c);
    return m;
}

AdditivityReport orange_slice_phases(int l, int two_mu, double g, double phi0,
                                     double phi1) {
    const Figure8Params p = figure8_params(l, two_mu, g, phi0, phi1);
    const double dphi = phi1 - phi0;

    AdditivityReport r;
    const double ov_l = lune_overlap(dphi, p.chi_l);
    const double ov_s = lune_overlap(dphi, p.chi_s);
    r.zeta = ov_l * ov_s;
    r.xi_l = figure8_trace(dphi, p.chi_l);
    r.xi_s = figure8_trace(dphi, p.chi_s);

    r.gamma_j = wrap_angle(-two_mu * dphi);
    if (std::abs(ov_l) >= nodal_threshold)
        r.gamma_l = wrap_angle(-two_mu * dphi + (ov_l > 0.0 ? 0.0 : pi));
    if (std::abs(ov_s) >= nodal_threshold)
        r.gamma_s = ov_s > 0.0 ? 0.0 : pi;
    if (r.gamma_l && r.gamma_s)
        r.delta_gamma = r.zeta > 0.0 ? 0.0 : pi;
    return r;
}

BetaPhases geometric_phase_closed_forms(int l, int two_mu, double g, int branch,
                                        double omega) {
    const EnergyEigenstate e = eigenstate({l, g}, two_mu, branch);

    BetaPhases out;
    out.j_part = wrap_angle(-e.mu() * omega);

    // Weight difference between the spin-up and spin-down components of the
    // eigenvector. Equals branch * cos(alpha) away from the extremal weights
    // and the correct +-1 on them, where the stored alpha follows the
    // continuity convention instead of the branch parametrization.
    const Mat rho_s = marginal_state(e, Subsystem::S);
    const double delta = std::real(rho_s(0, 0) - rho_s(1, 1));

    const double y = delta * std::sin(0.5 * omega);
    const double x = std::cos(0.5 * omega);
    if (std::hypot(x, y) < nodal_threshold)
        return out;
    const double t = std::atan2(y, x);
    out.l_part = wrap_angle(-e.mu() * omega + t);
    out.s_part = wrap_angle(-t);
    return out;
}

std::pair<double, double> concurrence_window(int l, int two_mu, Subsystem subsystem) {
    if (subsystem == Subsystem::J)
        throw InvalidInput("concurrence_window: only the marginals carry a window");
    if (subsystem == Subsystem::S)
        return {0.25, 0.75};
    require_valid_mu(l, two_mu);
    if (is_extremal(l, two_mu))
        throw InvalidInput("concurrence_window: extremal weights have no two-level block");
    const double w = w_factor(l, two_mu);
    return {0.25 / w, 0.75 / w};
}

} // namespace uhl

#include "uhl/atom.hpp"

#include <cmath>
#include <string>

namespace uhl {

void ModelParams::validate() const {
    if (l < 1) throw InvalidInput("orbital quantum number l must be >= 1");
    if (std::abs(g) <= 1e-12) throw InvalidInput("coupling ratio g must be nonzero");
}

void require_valid_mu(int l, int two_mu) {
    if ((two_mu % 2) == 0 || std::abs(two_mu) > 2 * l + 1)
        throw InvalidInput("mu must be a half-integer with |mu| <= l + 1/2 (two_mu odd, |two_mu| <= 2l+1)");
}

bool is_extremal(int l, int two_mu) {
    require_valid_mu(l, two_mu);
    return std::abs(two_mu) == 2 * l + 1;
}

Mat hamiltonian_z(const ModelParams& p) {
    p.validate();
    const SpinOperators l_ops = spin_operators(2 * p.l);
    const SpinOperators s_ops = spin_half_pm();
    const Mat il = Mat::Identity(l_ops.dim(), l_ops.dim());
    const Mat is = Mat::Identity(2, 2);
    const Mat ls = tensor_embed(l_ops.x, s_ops.x) + tensor_embed(l_ops.y, s_ops.y) +
                   tensor_embed(l_ops.z, s_ops.z);
    return p.g * (tensor_embed(l_ops.z, is) + 2.0 * tensor_embed(il, s_ops.z)) + 2.0 * ls;
}

double mixing_angle(int l, int two_mu, double g) {
    require_valid_mu(l, two_mu);
    if (std::abs(g) <= 1e-12) throw InvalidInput("mixing angle needs g != 0");
    const double mu = 0.5 * two_mu;
    const double band = 2.0 * l + 1.0;
    const double disc = g * g + 4.0 * g * mu + band * band;
    if (disc <= 0.0) throw InvalidInput("level splitting vanishes for these parameters");
    const double c = (2.0 * mu + g) / std::sqrt(disc);
    return std::acos(std::clamp(c, -1.0, 1.0));
}

double concurrence(int l, int two_mu, double g) {
    return std::abs(std::sin(mixing_angle(l, two_mu, g)));
}

double w_factor(int l, int two_mu) {
    if (is_extremal(l, two_mu))
        throw InvalidInput("w is zero for extremal mu; the two-level block machinery needs |mu| < l + 1/2");
    const double band = 2.0 * l + 1.0;
    return 0.5 * std::sqrt(band * band - static_cast<double>(two_mu) * two_mu);
}

namespace {

// Product-basis index of |l, m>|s> with s = 0 for + and 1 for -.
Eigen::Index joint_index(int l, int m, int s) { return (m + l) * 2 + s; }

EnergyEigenstate make_extremal(const ModelParams& p, int two_mu) {
    const int sign = two_mu > 0 ? +1 : -1;
    EnergyEigenstate e;
    e.l = p.l;
    e.two_mu = two_mu;
    e.branch = sign;
    e.extremal = true;
    e.alpha = (two_mu + p.g) >= 0.0 ? 0.0 : pi;  // cos a = sign(2 mu + g), product state either way
    e.concurrence = 0.0;
    e.energy = sign * p.g * (p.l + 1.0) + p.l;
    e.vector = Vec::Zero(2 * (2 * p.l + 1));
    e.vector[joint_index(p.l, sign * p.l, sign > 0 ? 0 : 1)] = 1.0;
    return e;
}

EnergyEigenstate make_block_state(const ModelParams& p, int two_mu, int branch) {
    const double mu = 0.5 * two_mu;
    const double alpha = mixing_angle(p.l, two_mu, p.g);
    const double band = 2.0 * p.l + 1.0;
    const double half_split = 0.5 * std::sqrt(p.g * p.g + 4.0 * p.g * mu + band * band);

    EnergyEigenstate e;
    e.l = p.l;
    e.two_mu = two_mu;
    e.branch = branch;
    e.extremal = false;
    e.alpha = alpha;
    e.concurrence = std::abs(std::sin(alpha));
    e.energy = p.g * mu - 0.5 + branch * half_split;
    e.vector = Vec::Zero(2 * (2 * p.l + 1));
    const Eigen::Index ia = joint_index(p.l, (two_mu - 1) / 2, 0);
    const Eigen::Index ib = joint_index(p.l, (two_mu + 1) / 2, 1);
    if (branch > 0) {
        e.vector[ia] = std::cos(0.5 * alpha);
        e.vector[ib] = std::sin(0.5 * alpha);
    } else {
        e.vector[ia] = -std::sin(0.5 * alpha);
        e.vector[ib] = std::cos(0.5 * alpha);
    }
    return e;
}

} // namespace

std::vector<EnergyEigenstate> eigenstates(const ModelParams& p) {
    p.validate();
    std::vector<EnergyEigenstate> out;
    out.reserve(2 * (2 * p.l + 1));
    for (int two_mu = -(2 * p.l + 1); two_mu <= 2 * p.l + 1; two_mu += 2) {
        if (std::abs(two_mu) == 2 * p.l + 1) {
            out.push_back(make_extremal(p, two_mu));
        } else {
            out.push_back(make_block_state(p, two_mu, -1));
            out.push_back(make_block_state(p, two_mu, +1));
        }
    }
    return out;
}

EnergyEigenstate eigenstate(const ModelParams& p, int two_mu, int branch) {
    p.validate();
    require_valid_mu(p.l, two_mu);
    if (branch != +1 && branch != -1) throw InvalidInput("branch must be +1 or -1");
    if (is_extremal(p.l, two_mu)) {
        if (branch != (two_mu > 0 ? +1 : -1))
            throw InvalidInput("extremal blocks are one-dimensional; branch must match sign(mu)");
        return make_extremal(p, two_mu);
    }
    return make_block_state(p, two_mu, branch);
}

Mat marginal_state(const EnergyEigenstate& e, Subsystem keep) {
    const Mat rho = e.vector * e.vector.adjoint();
    return partial_trace(rho, 2 * e.l + 1, 2, keep);
}

std::vector<std::pair<int, double>> classical_limit_scan(
    const std::function<int(int)>& two_mu_rule, const std::vector<int>& ls, double g) {
    std::vector<std::pair<int, double>> out;
    out.reserve(ls.size());
    for (int l : ls) out.emplace_back(l, concurrence(l, two_mu_rule(l), g));
    return out;
}

} // namespace uhl

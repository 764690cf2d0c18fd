#pragma once

#include <functional>
#include <vector>

#include "uhl/linalg.hpp"

namespace uhl {

// Model parameters: orbital quantum number and the field/coupling strength ratio.
struct ModelParams {
    int l = 1;
    double g = 1.0;

    void validate() const;
};

// One eigenvector of the north-pole Hamiltonian, labeled by (l, mu, branch).
// mu is stored as an odd integer numerator over 2; branch is +1 or -1.
// For extremal mu = +-(l+1/2) the block is one-dimensional and branch
// coincides with the sign of mu.
struct EnergyEigenstate {
    int l = 0;
    int two_mu = 0;
    int branch = +1;
    Vec vector;
    double energy = 0.0;
    double alpha = 0.0;       // mixing angle in [0, pi]
    double concurrence = 0.0; // |sin alpha|
    bool extremal = false;

    double mu() const { return 0.5 * two_mu; }
};

// g (L_z + 2 S_z) + 2 L.S on the L-major product space, dim 2(2l+1).
Mat hamiltonian_z(const ModelParams& p);

// All 2(2l+1) eigenstates, ascending two_mu; within a two-dimensional block
// the "+" branch is the vector cos(a/2)|l,mu-1/2>|+> + sin(a/2)|l,mu+1/2>|->.
std::vector<EnergyEigenstate> eigenstates(const ModelParams& p);

// Single eigenstate; for extremal two_mu the branch must match sign(two_mu).
EnergyEigenstate eigenstate(const ModelParams& p, int two_mu, int branch);

// Angle a in [0, pi] with cos a = (2 mu + g) / sqrt(g^2 + 4 g mu + (2l+1)^2).
double mixing_angle(int l, int two_mu, double g);

// |sin(mixing_angle)|, in [0, 1]; branch-independent.
double concurrence(int l, int two_mu, double g);

// sqrt((l+1/2)^2 - mu^2); rejects extremal mu where it would vanish.
double w_factor(int l, int two_mu);

// Reduced state of one factor, dim (2l+1) for L or 2 for S.
Mat marginal_state(const EnergyEigenstate& e, Subsystem keep);

// Concurrence along a family mu(l); used for the large-l trend checks.
std::vector<std::pair<int, double>> classical_limit_scan(
    const std::function<int(int)>& two_mu_rule, const std::vector<int>& ls, double g);

// Validation helpers shared by several modules.
void require_valid_mu(int l, int two_mu);
bool is_extremal(int l, int two_mu);

} // namespace uhl

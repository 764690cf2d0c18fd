#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>

#include "uhl/errors.hpp"

namespace uhl {

using cplx = std::complex<double>;
using Mat  = Eigen::MatrixXcd;
using Vec  = Eigen::VectorXcd;

inline constexpr double pi = 3.141592653589793238462643383279502884;

// Tolerances used across the library.
inline constexpr double tol_hermitian   = 1e-12;
inline constexpr double tol_unitary     = 1e-10;
inline constexpr double tol_isometry    = 1e-8;
inline constexpr double eps_rank        = 1e-10;  // support cutoff on eigenvalue sums p_i + p_j
inline constexpr double nodal_threshold = 1e-9;   // below this modulus a phase is undefined

enum class Subsystem { L, S, J };

// Cartesian generator triple for one angular-momentum space.
// z is diagonal in the basis the matrices are expressed in.
struct SpinOperators {
    double j = 0;  // largest z eigenvalue (metadata; reducible joint triples store l+1/2)
    Mat x, y, z;

    Eigen::Index dim() const { return z.rows(); }
};

// ---------------------------------------------------------------------------
// construction
// ---------------------------------------------------------------------------

// Generator triple for a single spin j = two_j/2 in the ascending-m basis
// (z = diag(-j..j)) with real nonnegative ladder elements.
SpinOperators spin_operators(int two_j);

// Spin-1/2 triple in the (|+>, |->) basis order: z = diag(+1/2, -1/2),
// x and y the halved Pauli matrices. This is the fixed basis of the S factor.
SpinOperators spin_half_pm();

// Kronecker product with the L factor as the slow index.
Mat tensor_embed(const Mat& a, const Mat& b);

// Total angular momentum acting on the L-major product space.
SpinOperators joint_operators(const SpinOperators& l_ops, const SpinOperators& s_ops);

// ---------------------------------------------------------------------------
// rotations and exponentials
// ---------------------------------------------------------------------------

// exp(-i phi Z) exp(-i theta Y) exp(i phi Z): carries the z axis to the
// direction (theta, phi); single-valued with period 2*pi in phi; U(0, phi) = I.
Mat rotation_operator(const SpinOperators& ops, double theta, double phi);

// rotation_operator times exp(-2 i phi Z): the section regular at the south pole.
Mat alt_rotation_operator(const SpinOperators& ops, double theta, double phi);

// Precomputed eigenstructure for repeated rotations with one generator triple.
class RotationCache {
public:
    explicit RotationCache(const SpinOperators& ops);

    Mat matrix(double theta, double phi) const;
    Mat alt_matrix(double theta, double phi) const;
    // In-place rotation of a column vector, O(dim^2).
    void apply(double theta, double phi, Vec& v) const;
    void apply_alt(double theta, double phi, Vec& v) const;

private:
    Eigen::VectorXd zdiag_;
    Eigen::VectorXd yvals_;
    Mat yvecs_;
};

// Unitary exponential of an anti-Hermitian matrix via the eigendecomposition
// of i*g; rejects input with anti-Hermiticity violation above 1e-10.
Mat matrix_exponential_antihermitian(const Mat& g);

// Hermitian PSD square root; eigenvalues in [-1e-12, 0) are clamped to zero,
// anything more negative is rejected.
Mat sqrt_psd(const Mat& rho);

// Trace out one factor of an L(x)S product space; dim_l * dim_s must match rho.
Mat partial_trace(const Mat& rho, Eigen::Index dim_l, Eigen::Index dim_s, Subsystem keep);

// ---------------------------------------------------------------------------
// small numeric helpers
// ---------------------------------------------------------------------------

double hermiticity_error(const Mat& m);
double unitarity_error(const Mat& m);
// max |P^2 - P| + max |P - P^dagger|: how far from an orthogonal projector.
double projector_error(const Mat& p);
double max_abs(const Mat& m);

// Principal value in (-pi, pi].
double wrap_angle(double x);
// |a - b| on the circle.
double circular_distance(double a, double b);

// arg z, or nullopt when |z| is below the nodal threshold.
std::optional<double> arg_checked(cplx z, double threshold = nodal_threshold);

} // namespace uhl

#include "uhl/linalg.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <cmath>

namespace uhl {

namespace {

const cplx iu(0.0, 1.0);

Eigen::VectorXd diagonal_of(const Mat& z) {
    Mat off = z;
    off.diagonal().setZero();
    if (max_abs(off) > 1e-13 || z.diagonal().imag().cwiseAbs().maxCoeff() > 1e-13)
        throw InvalidInput("generator z must be real diagonal in the working basis");
    return z.diagonal().real();
}

} // namespace

SpinOperators spin_operators(int two_j) {
    if (two_j < 0) throw InvalidInput("spin quantum number must be nonnegative");
    const int dim = two_j + 1;
    const double j = 0.5 * two_j;
    Mat plus = Mat::Zero(dim, dim);
    for (int k = 0; k + 1 < dim; ++k) {
        const double m = -j + k;
        plus(k + 1, k) = std::sqrt(j * (j + 1) - m * (m + 1));
    }
    SpinOperators ops;
    ops.j = j;
    ops.x = 0.5 * (plus + plus.adjoint());
    ops.y = -0.5 * iu * (plus - Mat(plus.adjoint()));
    ops.z = Mat::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) ops.z(k, k) = -j + k;
    return ops;
}

SpinOperators spin_half_pm() {
    SpinOperators ops;
    ops.j = 0.5;
    ops.x = Mat{{0.0, 0.5}, {0.5, 0.0}};
    ops.y = Mat{{0.0, -0.5 * iu}, {0.5 * iu, 0.0}};
    ops.z = Mat{{0.5, 0.0}, {0.0, -0.5}};
    return ops;
}

Mat tensor_embed(const Mat& a, const Mat& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols())
        throw InvalidInput("tensor_embed expects square factors");
    return Eigen::kroneckerProduct(a, b);
}

SpinOperators joint_operators(const SpinOperators& l_ops, const SpinOperators& s_ops) {
    const Mat il = Mat::Identity(l_ops.dim(), l_ops.dim());
    const Mat is = Mat::Identity(s_ops.dim(), s_ops.dim());
    SpinOperators ops;
    ops.j = l_ops.j + s_ops.j;
    ops.x = tensor_embed(l_ops.x, is) + tensor_embed(il, s_ops.x);
    ops.y = tensor_embed(l_ops.y, is) + tensor_embed(il, s_ops.y);
    ops.z = tensor_embed(l_ops.z, is) + tensor_embed(il, s_ops.z);
    return ops;
}

Mat rotation_operator(const SpinOperators& ops, double theta, double phi) {
    return RotationCache(ops).matrix(theta, phi);
}

Mat alt_rotation_operator(const SpinOperators& ops, double theta, double phi) {
    return RotationCache(ops).alt_matrix(theta, phi);
}

RotationCache::RotationCache(const SpinOperators& ops) : zdiag_(diagonal_of(ops.z)) {
    Eigen::SelfAdjointEigenSolver<Mat> es(ops.y);
    if (es.info() != Eigen::Success)
        throw NumericalInconsistency("eigensolve of the y generator failed");
    yvals_ = es.eigenvalues();
    yvecs_ = es.eigenvectors();
}

Mat RotationCache::matrix(double theta, double phi) const {
    const Eigen::Index d = zdiag_.size();
    Vec zp(d), zm(d), ty(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        zp[k] = std::exp(cplx(0.0, -phi * zdiag_[k]));
        zm[k] = std::conj(zp[k]);
        ty[k] = std::exp(cplx(0.0, -theta * yvals_[k]));
    }
    Mat u = yvecs_ * ty.asDiagonal() * yvecs_.adjoint();
    return zp.asDiagonal() * u * zm.asDiagonal();
}

Mat RotationCache::alt_matrix(double theta, double phi) const {
    const Eigen::Index d = zdiag_.size();
    Vec twist(d);
    for (Eigen::Index k = 0; k < d; ++k)
        twist[k] = std::exp(cplx(0.0, -2.0 * phi * zdiag_[k]));
    return matrix(theta, phi) * twist.asDiagonal();
}

void RotationCache::apply(double theta, double phi, Vec& v) const {
    const Eigen::Index d = zdiag_.size();
    for (Eigen::Index k = 0; k < d; ++k)
        v[k] *= std::exp(cplx(0.0, phi * zdiag_[k]));
    Vec w = yvecs_.adjoint() * v;
    for (Eigen::Index k = 0; k < d; ++k)
        w[k] *= std::exp(cplx(0.0, -theta * yvals_[k]));
    v = yvecs_ * w;
    for (Eigen::Index k = 0; k < d; ++k)
        v[k] *= std::exp(cplx(0.0, -phi * zdiag_[k]));
}

void RotationCache::apply_alt(double theta, double phi, Vec& v) const {
    const Eigen::Index d = zdiag_.size();
    for (Eigen::Index k = 0; k < d; ++k)
        v[k] *= std::exp(cplx(0.0, -2.0 * phi * zdiag_[k]));
    apply(theta, phi, v);
}

Mat matrix_exponential_antihermitian(const Mat& g) {
    if (max_abs(g + Mat(g.adjoint())) > 1e-10)
        throw InvalidInput("matrix exponential input is not anti-Hermitian");
    const Mat h = iu * g;  // Hermitian
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + Mat(h.adjoint())));
    if (es.info() != Eigen::Success)
        throw NumericalInconsistency("eigensolve failed in matrix exponential");
    Vec phases(es.eigenvalues().size());
    for (Eigen::Index k = 0; k < phases.size(); ++k)
        phases[k] = std::exp(cplx(0.0, -es.eigenvalues()[k]));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Mat sqrt_psd(const Mat& rho) {
    if (hermiticity_error(rho) > tol_hermitian)
        throw InvalidInput("sqrt_psd expects a Hermitian matrix");
    Eigen::SelfAdjointEigenSolver<Mat> es(rho);
    if (es.info() != Eigen::Success)
        throw NumericalInconsistency("eigensolve failed in sqrt_psd");
    Eigen::VectorXd vals = es.eigenvalues();
    for (Eigen::Index k = 0; k < vals.size(); ++k) {
        if (vals[k] < -1e-12)
            throw InvalidInput("sqrt_psd input has a significantly negative eigenvalue");
        vals[k] = std::sqrt(std::max(vals[k], 0.0));
    }
    Mat r = es.eigenvectors() * vals.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    return 0.5 * (r + Mat(r.adjoint()));
}

Mat partial_trace(const Mat& rho, Eigen::Index dim_l, Eigen::Index dim_s, Subsystem keep) {
    if (rho.rows() != rho.cols() || rho.rows() != dim_l * dim_s)
        throw InvalidInput("partial_trace dimension mismatch");
    if (keep == Subsystem::J)
        throw InvalidInput("partial_trace keeps either the L or the S factor");
    if (keep == Subsystem::L) {
        Mat out = Mat::Zero(dim_l, dim_l);
        for (Eigen::Index a = 0; a < dim_l; ++a)
            for (Eigen::Index b = 0; b < dim_l; ++b)
                for (Eigen::Index s = 0; s < dim_s; ++s)
                    out(a, b) += rho(a * dim_s + s, b * dim_s + s);
        return out;
    }
    Mat out = Mat::Zero(dim_s, dim_s);
    for (Eigen::Index s = 0; s < dim_s; ++s)
        for (Eigen::Index t = 0; t < dim_s; ++t)
            for (Eigen::Index a = 0; a < dim_l; ++a)
                out(s, t) += rho(a * dim_s + s, a * dim_s + t);
    return out;
}

double hermiticity_error(const Mat& m) { return max_abs(m - Mat(m.adjoint())); }

double unitarity_error(const Mat& m) {
    return max_abs(Mat(m.adjoint()) * m - Mat::Identity(m.rows(), m.cols()));
}

double projector_error(const Mat& p) {
    return max_abs(p * p - p) + hermiticity_error(p);
}

double max_abs(const Mat& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double wrap_angle(double x) {
    double r = std::remainder(x, 2.0 * pi);
    if (r <= -pi) r += 2.0 * pi;
    return r;
}

double circular_distance(double a, double b) { return std::abs(wrap_angle(a - b)); }

std::optional<double> arg_checked(cplx z, double threshold) {
    if (std::abs(z) < threshold) return std::nullopt;
    return wrap_angle(std::arg(z));
}

} // namespace uhl

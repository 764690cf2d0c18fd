#include "uhl/transport.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>

namespace uhl {

namespace {

std::atomic<double>& peak_slot() {
    static std::atomic<double> peak{0.0};
    return peak;
}

void note_peak(double r) {
    auto& slot = peak_slot();
    double cur = slot.load();
    while (cur < r && !slot.compare_exchange_weak(cur, r)) {
    }
}

struct StepGeom {
    double theta, phi, dtheta, dphi;
};

struct Coefs {
    double cz, cx, cy;
};

// Component weights of the co-rotating generator bracket in the two sections.
Coefs section_coefs(const StepGeom& s, bool north) {
    const double st = std::sin(s.theta), ct = std::cos(s.theta);
    const double cp = std::cos(s.phi), sp = std::sin(s.phi);
    if (north)
        return {(1.0 - ct) * s.dphi,
                st * cp * s.dphi + sp * s.dtheta,
                st * sp * s.dphi - cp * s.dtheta};
    return {-(1.0 + ct) * s.dphi,
            st * cp * s.dphi - sp * s.dtheta,
            -st * sp * s.dphi - cp * s.dtheta};
}

// exp(-i K) for a Hermitian 2x2 K, row-major entries.
std::array<cplx, 4> expm2_minus_i(double k00, double k11, cplx k01) {
    const double tau = 0.5 * (k00 + k11);
    const double del = 0.5 * (k00 - k11);
    const double lam = std::hypot(del, std::abs(k01));
    const double c = std::cos(lam);
    const double snc = lam > 0.0 ? std::sin(lam) / lam : 1.0;
    const cplx ph = std::polar(1.0, -tau);
    const cplx is(0.0, -snc);
    return {ph * (c + is * del), ph * (is * k01), ph * (is * std::conj(k01)),
            ph * (c - is * del)};
}

std::array<cplx, 4> mul2(const std::array<cplx, 4>& a, const std::array<cplx, 4>& b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

// Eigenstructure of the reference state plus the generator blocks on its
// support (the trailing `rank` eigenvectors, ascending eigenvalue order).
struct Frame {
    Eigen::Index dim = 0, rank = 0, off = 0;
    Eigen::VectorXd p;
    Mat evecs;
    Mat zs, xs, ys;          // support blocks of the generator triple
    Eigen::MatrixXd wmask;   // sqrt(p_i p_j) / (p_i + p_j) on the support
};

Frame build_frame(const Mat& rho_z, const SpinOperators& ops) {
    Frame f;
    f.dim = rho_z.rows();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho_z + rho_z.adjoint()));
    f.p = es.eigenvalues();
    f.evecs = es.eigenvectors();
    f.rank = 0;
    for (Eigen::Index i = 0; i < f.dim; ++i)
        if (f.p(i) > eps_rank) ++f.rank;
    if (f.rank == 0) throw InvalidInput("reference state has empty support");
    f.off = f.dim - f.rank;
    const Mat es_s = f.evecs.rightCols(f.rank);
    f.zs = es_s.adjoint() * ops.z * es_s;
    f.xs = es_s.adjoint() * ops.x * es_s;
    f.ys = es_s.adjoint() * ops.y * es_s;
    f.wmask.resize(f.rank, f.rank);
    for (Eigen::Index i = 0; i < f.rank; ++i)
        for (Eigen::Index j = 0; j < f.rank; ++j) {
            const double pi_ = f.p(f.off + i), pj = f.p(f.off + j);
            f.wmask(i, j) = std::sqrt(pi_ * pj) / (pi_ + pj);
        }
    return f;
}

Mat support_projector_of(const Frame& f) {
    const Mat es_s = f.evecs.rightCols(f.rank);
    return es_s * es_s.adjoint();
}

// Walks the path once, deciding the active section per step and emitting the
// step geometry and any representation switches. Returns whether the walk
// ends in the north section.
template <class StepF, class ConvF>
bool walk_path(const SampledPath& path, Section section, double switch_lat, StepF&& on_step,
               ConvF&& on_convert) {
    const auto& nodes = path.nodes;
    if (nodes.empty()) return true;
    auto north_for = [switch_lat](double theta) { return theta <= switch_lat; };
    bool north = true;
    if (section == Section::South)
        north = false;
    else if (section == Section::Auto && nodes.size() >= 2)
        north = north_for(0.5 * (nodes[0].theta + nodes[1].theta));
    if (!north) on_convert(nodes.front().phi, true);
    for (size_t k = 0; k + 1 < nodes.size(); ++k) {
        const auto& a = nodes[k];
        const auto& b = nodes[k + 1];
        if (section == Section::Auto) {
            const bool want = north_for(0.5 * (a.theta + b.theta));
            if (want != north) {
                on_convert(a.phi, !want);
                north = want;
            }
        }
        on_step(StepGeom{0.5 * (a.theta + b.theta), 0.5 * (a.phi + b.phi), b.theta - a.theta,
                         b.phi - a.phi},
                north);
    }
    return north;
}

// Per-step exponential on the support block, generic rank.
Mat step_exponential(const Frame& f, const StepGeom& s, bool north) {
    const Coefs c = section_coefs(s, north);
    const Mat b = c.cz * f.zs + c.cx * f.xs + c.cy * f.ys;
    if (f.rank == 1) {
        Mat m(1, 1);
        m(0, 0) = std::polar(1.0, -std::real(b(0, 0)));
        return m;
    }
    const Mat k = 2.0 * b.cwiseProduct(f.wmask.cast<cplx>());
    if (f.rank == 2) {
        const auto e = expm2_minus_i(std::real(k(0, 0)), std::real(k(1, 1)), k(0, 1));
        Mat m(2, 2);
        m << e[0], e[1], e[2], e[3];
        return m;
    }
    return matrix_exponential_antihermitian(cplx(0.0, -1.0) * k);
}

struct ChainResult {
    Mat m;
    bool end_north = true;
};

// Accumulated left-product of the step exponentials on the support block.
ChainResult core_product(const Frame& f, const SampledPath& path, Section section,
                         double switch_lat) {
    if (f.rank == 1) {
        const double z0 = std::real(f.zs(0, 0));
        const double x0 = std::real(f.xs(0, 0));
        const double y0 = std::real(f.ys(0, 0));
        double angle = 0.0;
        const bool end_north = walk_path(
            path, section, switch_lat,
            [&](const StepGeom& s, bool north) {
                const Coefs c = section_coefs(s, north);
                angle += c.cz * z0 + c.cx * x0 + c.cy * y0;
            },
            [&](double phi, bool to_south) { angle -= (to_south ? 2.0 : -2.0) * phi * z0; });
        Mat m(1, 1);
        m(0, 0) = std::polar(1.0, -angle);
        return {m, end_north};
    }
    if (f.rank == 2) {
        const double w01 = f.wmask(0, 1);
        const double z00 = std::real(f.zs(0, 0)), z11 = std::real(f.zs(1, 1));
        const double x00 = std::real(f.xs(0, 0)), x11 = std::real(f.xs(1, 1));
        const double y00 = std::real(f.ys(0, 0)), y11 = std::real(f.ys(1, 1));
        const cplx z01 = 2.0 * w01 * f.zs(0, 1);
        const cplx x01 = 2.0 * w01 * f.xs(0, 1);
        const cplx y01 = 2.0 * w01 * f.ys(0, 1);
        const cplx zr01 = f.zs(0, 1);
        std::array<cplx, 4> m{1.0, 0.0, 0.0, 1.0};
        const bool end_north = walk_path(
            path, section, switch_lat,
            [&](const StepGeom& s, bool north) {
                const Coefs c = section_coefs(s, north);
                m = mul2(expm2_minus_i(c.cz * z00 + c.cx * x00 + c.cy * y00,
                                       c.cz * z11 + c.cx * x11 + c.cy * y11,
                                       c.cz * z01 + c.cx * x01 + c.cy * y01),
                         m);
            },
            [&](double phi, bool to_south) {
                const double c = to_south ? -2.0 * phi : 2.0 * phi;
                m = mul2(expm2_minus_i(c * z00, c * z11, c * zr01), m);
            });
        Mat mm(2, 2);
        mm << m[0], m[1], m[2], m[3];
        return {mm, end_north};
    }
    Mat m = Mat::Identity(f.rank, f.rank);
    const bool end_north = walk_path(
        path, section, switch_lat,
        [&](const StepGeom& s, bool north) { m = (step_exponential(f, s, north) * m).eval(); },
        [&](double phi, bool to_south) {
            const double c = to_south ? 2.0 * phi : -2.0 * phi;
            m = (matrix_exponential_antihermitian(cplx(0.0, c) * f.zs) * m).eval();
        });
    return {m, end_north};
}

// Full-space walk on the isometry expressed in the rho_z eigenbasis.
// record, when set, is invoked with the lab-basis isometry at every node.
bool full_walk(const Frame& f, const SpinOperators& ops, const SampledPath& path,
               Section section, double switch_lat, Mat& vhat,
               const std::function<void(const Mat&)>& record) {
    bool first_recorded = false;
    const bool end_north = walk_path(
        path, section, switch_lat,
        [&](const StepGeom& s, bool north) {
            if (record && !first_recorded) {
                record(f.evecs * vhat);
                first_recorded = true;
            }
            vhat.middleRows(f.off, f.rank) =
                (step_exponential(f, s, north) * vhat.middleRows(f.off, f.rank)).eval();
            if (record) record(f.evecs * vhat);
        },
        [&](double phi, bool to_south) {
            const double c = (to_south ? 2.0 : -2.0) * phi;
            Vec ph(f.dim);
            for (Eigen::Index j = 0; j < f.dim; ++j)
                ph(j) = std::polar(1.0, c * std::real(ops.z(j, j)));
            vhat = (f.evecs.adjoint() * (ph.asDiagonal() * (f.evecs * vhat))).eval();
        });
    if (record && !first_recorded) record(f.evecs * vhat);
    return end_north;
}

bool support_nondegenerate(const Frame& f) {
    for (Eigen::Index i = 0; i + 1 < f.rank; ++i)
        if (f.p(f.off + i + 1) - f.p(f.off + i) < 1e-10) return false;
    return true;
}

HolonomyResult finalize_result(Mat u, Subsystem tag, Method method, const SampledPath& path,
                               const Mat& p_start, const Mat& p_end) {
    HolonomyResult out;
    out.matrix = std::move(u);
    out.subsystem = tag;
    out.method = method;
    out.trace = out.matrix.trace();
    out.phase_gamma = arg_checked(out.trace);
    if (path.segment_boundaries.size() >= 2)
        out.steps_per_segment =
            int(path.segment_boundaries[1] - path.segment_boundaries[0] + 1);
    else
        out.steps_per_segment = int(path.nodes.size());
    const Mat utu = out.matrix.adjoint() * out.matrix;
    const Mat uut = out.matrix * out.matrix.adjoint();
    double res = std::max(projector_error(utu), projector_error(uut));
    res = std::max(res, max_abs(utu - p_start));
    res = std::max(res, max_abs(uut - p_end));
    out.isometry_residual = res;
    note_peak(res);
    return out;
}

} // namespace

void TransportProblem::validate() const {
    if (rho_z.rows() == 0 || rho_z.rows() != rho_z.cols())
        throw InvalidInput("reference state must be a nonempty square matrix");
    if (rho_z.rows() != ops.z.rows())
        throw InvalidInput("reference state and generator triple disagree in dimension");
    if (hermiticity_error(rho_z) > 1e-10)
        throw InvalidInput("reference state must be Hermitian");
    const cplx tr = rho_z.trace();
    if (std::abs(tr - cplx(1.0, 0.0)) > 1e-10)
        throw InvalidInput("reference state must have unit trace");
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho_z + rho_z.adjoint()),
                                          Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12)
        throw InvalidInput("reference state must be positive semidefinite");
    if (max_abs(rho_z * ops.z - ops.z * rho_z) > 1e-10)
        throw InvalidInput("reference state must commute with the z generator");
    if (path.nodes.empty()) throw InvalidInput("path has no nodes");
    if (v0.size() != 0) {
        if (v0.rows() != rho_z.rows() || v0.cols() != rho_z.cols())
            throw InvalidInput("initial isometry has the wrong shape");
        Frame f = build_frame(rho_z, ops);
        if (max_abs(v0 * v0.adjoint() - support_projector_of(f)) > 1e-10)
            throw InvalidInput(
                "initial isometry must satisfy v0 v0^dag = support projector");
    }
}

Mat transport_rhs(const Mat& rho_z, const SpinOperators& ops, double theta, double phi,
                  double dtheta, double dphi, Section section) {
    const bool north = section == Section::South  ? false
                       : section == Section::North ? true
                                                   : theta <= pi / 2.0;
    const Coefs c = section_coefs(StepGeom{theta, phi, dtheta, dphi}, north);
    const Mat sq = sqrt_psd(rho_z);
    const Mat bracket = c.cz * ops.z + c.cx * ops.x + c.cy * ops.y;
    return cplx(0.0, -2.0) * sq * bracket * sq;
}

Mat sylvester_on_support(const Mat& rho, const Mat& rhs) {
    if (rho.rows() != rho.cols() || rhs.rows() != rhs.cols() || rho.rows() != rhs.rows())
        throw InvalidInput("state and right-hand side must be square and of equal size");
    if (hermiticity_error(rho) > 1e-10) throw InvalidInput("state must be Hermitian");
    if (max_abs(rhs + rhs.adjoint()) > 1e-10)
        throw InvalidInput("right-hand side must be anti-Hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho + rho.adjoint()));
    const Eigen::VectorXd& p = es.eigenvalues();
    const Mat& e = es.eigenvectors();
    const Mat rhat = e.adjoint() * rhs * e;
    Mat ghat = Mat::Zero(rho.rows(), rho.cols());
    for (Eigen::Index i = 0; i < rho.rows(); ++i)
        for (Eigen::Index j = 0; j < rho.cols(); ++j) {
            const double s = p(i) + p(j);
            if (s > eps_rank)
                ghat(i, j) = rhat(i, j) / s;
            else if (std::abs(rhat(i, j)) > 1e-10)
                throw NumericalInconsistency(
                    "right-hand side leaks outside the support of the state");
        }
    return e * ghat * e.adjoint();
}

std::pair<Mat, Mat> transport(const TransportProblem& problem) {
    problem.validate();
    const Frame f = build_frame(problem.rho_z, problem.ops);
    const Mat v0 = problem.v0.size() != 0 ? problem.v0 : support_projector_of(f);
    Mat vhat = f.evecs.adjoint() * v0;
    full_walk(f, problem.ops, problem.path, problem.section, problem.switch_latitude, vhat,
              nullptr);
    return {f.evecs * vhat, v0};
}

std::vector<Mat> transport_trajectory(const TransportProblem& problem) {
    problem.validate();
    const Frame f = build_frame(problem.rho_z, problem.ops);
    const Mat v0 = problem.v0.size() != 0 ? problem.v0 : support_projector_of(f);
    Mat vhat = f.evecs.adjoint() * v0;
    std::vector<Mat> traj;
    traj.reserve(problem.path.nodes.size());
    full_walk(f, problem.ops, problem.path, problem.section, problem.switch_latitude, vhat,
              [&](const Mat& v) { traj.push_back(v); });
    return traj;
}

double parallel_transport_residual(const TransportProblem& problem) {
    TransportProblem pr = problem;
    pr.section = Section::North;
    const std::vector<Mat> traj = transport_trajectory(pr);
    const Mat sq = sqrt_psd(pr.rho_z);
    RotationCache rot(pr.ops);
    double total = 0.0;
    Mat w_prev = rot.matrix(pr.path.nodes[0].theta, pr.path.nodes[0].phi) * sq * traj[0];
    for (size_t k = 1; k < traj.size(); ++k) {
        const Mat w =
            rot.matrix(pr.path.nodes[k].theta, pr.path.nodes[k].phi) * sq * traj[k];
        const Mat a = w_prev.adjoint() * w;
        total += max_abs(a - a.adjoint());
        w_prev = w;
    }
    return total;
}

HolonomyResult holonomy(const TransportProblem& problem, Subsystem tag) {
    problem.validate();
    const Frame f = build_frame(problem.rho_z, problem.ops);
    Mat chain;
    bool end_north = true;
    if (problem.v0.size() == 0) {
        ChainResult res =
            core_product(f, problem.path, problem.section, problem.switch_latitude);
        end_north = res.end_north;
        const Mat es_s = f.evecs.rightCols(f.rank);
        chain = es_s * res.m * es_s.adjoint();
    } else {
        Mat vhat = f.evecs.adjoint() * problem.v0;
        end_north = full_walk(f, problem.ops, problem.path, problem.section,
                              problem.switch_latitude, vhat, nullptr);
        chain = (f.evecs * vhat) * problem.v0.adjoint();
    }
    RotationCache rot(problem.ops);
    const auto& n0 = problem.path.nodes.front();
    const auto& n1 = problem.path.nodes.back();
    const Mat r_end = end_north ? rot.matrix(n1.theta, n1.phi) : rot.alt_matrix(n1.theta, n1.phi);
    const Mat u = r_end * chain * rot.matrix(n0.theta, n0.phi).adjoint();
    const Mat p = support_projector_of(f);
    const Mat u0 = rot.matrix(n0.theta, n0.phi);
    const Mat u1 = rot.matrix(n1.theta, n1.phi);
    return finalize_result(u, tag, Method::Ode, problem.path, u0 * p * u0.adjoint(),
                           u1 * p * u1.adjoint());
}

HolonomyResult converged_holonomy(const Mat& rho_z, const SpinOperators& ops,
                                  const PathSpec& spec, const TransportOptions& options,
                                  Subsystem tag) {
    if (options.steps < 2) throw InvalidInput("need at least 2 nodes per segment");
    if (options.max_doublings < 1) throw InvalidInput("need at least one refinement");
    TransportProblem prob{rho_z, ops, sample(spec, options.steps), options.section,
                          options.switch_latitude, Mat()};
    HolonomyResult prev = holonomy(prob, tag);
    int n = options.steps;
    double last_gap = 0.0;
    for (int k = 0; k < options.max_doublings; ++k) {
        n *= 2;
        prob.path = sample(spec, n);
        HolonomyResult cur = holonomy(prob, tag);
        const double gap = max_abs(cur.matrix - prev.matrix);
        last_gap = gap;
        if (gap < options.tol) {
            cur.convergence_gap = gap;
            cur.converged = true;
            cur.steps_per_segment = n;
            const Frame f = build_frame(rho_z, ops);
            if (prob.path.closed && support_nondegenerate(f))
                cur.phase_beta = mixed_state_geometric_phase(rho_z, ops, prob.path);
            return cur;
        }
        prev = cur;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "holonomy not stable after %d doublings from %d nodes per segment "
                  "(last gap %.3e, tol %.3e)",
                  options.max_doublings, options.steps, last_gap, options.tol);
    throw IntegratorFailure(buf);
}

std::pair<Mat, Mat> vector_potential_L(int l, int two_mu, double g, double theta, double phi) {
    require_valid_mu(l, two_mu);
    if (is_extremal(l, two_mu))
        throw InvalidInput("gauge potential is defined for non-extremal mu only");
    const double w = w_factor(l, two_mu);
    const double c = concurrence(l, two_mu, g);
    const double mu = 0.5 * two_mu;
    const double st = std::sin(theta), ct = std::cos(theta);
    const cplx eip = std::polar(1.0, phi);
    Mat at = Mat::Zero(2, 2), ap = Mat::Zero(2, 2);
    at(0, 1) = cplx(0.0, -0.5 * w * c) * eip;
    at(1, 0) = std::conj(at(0, 1));
    ap(0, 0) = mu * (1.0 - ct) + 0.5 * (-1.0 + ct);
    ap(1, 1) = mu * (1.0 - ct) + 0.5 * (1.0 - ct);
    ap(0, 1) = 0.5 * w * c * st * eip;
    ap(1, 0) = std::conj(ap(0, 1));
    return {at, ap};
}

std::pair<Mat, Mat> vector_potential_S(int l, int two_mu, double g, double theta, double phi) {
    require_valid_mu(l, two_mu);
    if (is_extremal(l, two_mu))
        throw InvalidInput("gauge potential is defined for non-extremal mu only");
    const double c = concurrence(l, two_mu, g);
    const double st = std::sin(theta), ct = std::cos(theta);
    const cplx eim = std::polar(1.0, -phi);
    Mat at = Mat::Zero(2, 2), ap = Mat::Zero(2, 2);
    at(0, 1) = cplx(0.0, 0.5 * c) * eim;
    at(1, 0) = std::conj(at(0, 1));
    ap(0, 0) = 0.5 * (1.0 - ct);
    ap(1, 1) = 0.5 * (-1.0 + ct);
    ap(0, 1) = 0.5 * c * st * eim;
    ap(1, 0) = std::conj(ap(0, 1));
    return {at, ap};
}

Mat path_ordered_exponential(const PotentialFn& potential, const SampledPath& path) {
    std::array<cplx, 4> m{1.0, 0.0, 0.0, 1.0};
    for (size_t k = 0; k + 1 < path.nodes.size(); ++k) {
        const auto& a = path.nodes[k];
        const auto& b = path.nodes[k + 1];
        const auto [at, ap] = potential(0.5 * (a.theta + b.theta), 0.5 * (a.phi + b.phi));
        if (at.rows() != 2 || at.cols() != 2 || ap.rows() != 2 || ap.cols() != 2)
            throw InvalidInput("potential components must be 2x2");
        const Mat kmat = at * (b.theta - a.theta) + ap * (b.phi - a.phi);
        if (std::abs(std::imag(kmat(0, 0))) > 1e-10 ||
            std::abs(std::imag(kmat(1, 1))) > 1e-10 ||
            std::abs(kmat(0, 1) - std::conj(kmat(1, 0))) > 1e-10)
            throw InvalidInput("potential components must be Hermitian");
        m = mul2(expm2_minus_i(std::real(kmat(0, 0)), std::real(kmat(1, 1)), kmat(0, 1)), m);
    }
    Mat out(2, 2);
    out << m[0], m[1], m[2], m[3];
    return out;
}

HolonomyResult holonomy_via_potential(Subsystem subsystem, int l, int two_mu, double g,
                                      const SampledPath& path) {
    if (subsystem == Subsystem::J)
        throw InvalidInput("the potential pipeline covers the two marginals only");
    if (path.nodes.empty()) throw InvalidInput("path has no nodes");
    PotentialFn fn;
    if (subsystem == Subsystem::L)
        fn = [=](double th, double ph) { return vector_potential_L(l, two_mu, g, th, ph); };
    else
        fn = [=](double th, double ph) { return vector_potential_S(l, two_mu, g, th, ph); };
    const Mat m2 = path_ordered_exponential(fn, path);
    const SpinOperators ops = subsystem_operators(l, subsystem);
    const Eigen::Index i0 = subsystem == Subsystem::L ? Eigen::Index((two_mu - 1) / 2 + l) : 0;
    const Eigen::Index d = ops.dim();
    Mat emb = Mat::Zero(d, d);
    emb.block(i0, i0, 2, 2) = m2;
    Mat p = Mat::Zero(d, d);
    p(i0, i0) = 1.0;
    p(i0 + 1, i0 + 1) = 1.0;
    RotationCache rot(ops);
    const auto& n0 = path.nodes.front();
    const auto& n1 = path.nodes.back();
    const Mat u0 = rot.matrix(n0.theta, n0.phi);
    const Mat u1 = rot.matrix(n1.theta, n1.phi);
    const Mat u = u1 * emb * u0.adjoint();
    HolonomyResult out = finalize_result(u, subsystem, Method::Potential, path,
                                         u0 * p * u0.adjoint(), u1 * p * u1.adjoint());
    return out;
}

HolonomyResult converged_holonomy_via_potential(Subsystem subsystem, int l, int two_mu,
                                                double g, const PathSpec& spec,
                                                const TransportOptions& options) {
    if (options.steps < 2) throw InvalidInput("need at least 2 nodes per segment");
    if (options.max_doublings < 1) throw InvalidInput("need at least one refinement");
    HolonomyResult prev = holonomy_via_potential(subsystem, l, two_mu, g,
                                                 sample(spec, options.steps));
    int n = options.steps;
    double last_gap = 0.0;
    for (int k = 0; k < options.max_doublings; ++k) {
        n *= 2;
        HolonomyResult cur = holonomy_via_potential(subsystem, l, two_mu, g, sample(spec, n));
        const double gap = max_abs(cur.matrix - prev.matrix);
        last_gap = gap;
        if (gap < options.tol) {
            cur.convergence_gap = gap;
            cur.converged = true;
            cur.steps_per_segment = n;
            return cur;
        }
        prev = cur;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "ordered exponential not stable after %d doublings from %d nodes per "
                  "segment (last gap %.3e, tol %.3e)",
                  options.max_doublings, options.steps, last_gap, options.tol);
    throw IntegratorFailure(buf);
}

std::optional<double> wilson_phase(const HolonomyResult& h) { return arg_checked(h.trace); }

std::optional<double> amplitude_phase(const Mat& rho_start, const Mat& rho_end, const Mat& v0,
                                      const Mat& v_final) {
    const cplx t =
        (v0.adjoint() * sqrt_psd(rho_start) * sqrt_psd(rho_end) * v_final).trace();
    return arg_checked(t);
}

std::optional<double> amplitude_phase(const Mat& rho_z, const SpinOperators& ops,
                                      const SampledPath& path, const Mat& holonomy_matrix) {
    if (path.nodes.empty()) throw InvalidInput("path has no nodes");
    const Frame f = build_frame(rho_z, ops);
    RotationCache rot(ops);
    const auto& n0 = path.nodes.front();
    const auto& n1 = path.nodes.back();
    const Mat u0 = rot.matrix(n0.theta, n0.phi);
    const Mat u1 = rot.matrix(n1.theta, n1.phi);
    const Mat v_start = u0 * support_projector_of(f);
    const Mat v_end = holonomy_matrix * v_start;
    return amplitude_phase(u0 * rho_z * u0.adjoint(), u1 * rho_z * u1.adjoint(), v_start,
                           v_end);
}

std::optional<double> pure_geometric_phase(const std::vector<Vec>& vector_path) {
    if (vector_path.empty()) throw InvalidInput("vector path is empty");
    if (vector_path.size() == 1) return 0.0;
    const cplx end_overlap = vector_path.front().dot(vector_path.back());
    if (std::abs(end_overlap) < nodal_threshold) return std::nullopt;
    double dyn = 0.0;
    for (size_t k = 0; k + 1 < vector_path.size(); ++k)
        dyn += std::arg(vector_path[k].dot(vector_path[k + 1]));
    return wrap_angle(std::arg(end_overlap) - dyn);
}

std::optional<double> mixed_state_geometric_phase(const Mat& rho_z, const SpinOperators& ops,
                                                  const SampledPath& loop) {
    if (!loop.closed) throw InvalidInput("spectral geometric phase needs a closed loop");
    if (rho_z.rows() != ops.z.rows())
        throw InvalidInput("reference state and generator triple disagree in dimension");
    const Frame f = build_frame(rho_z, ops);
    if (!support_nondegenerate(f))
        throw InvalidInput(
            "spectral geometric phase is ambiguous for a degenerate support spectrum");
    RotationCache rot(ops);
    cplx sum = 0.0;
    for (Eigen::Index k = 0; k < f.rank; ++k) {
        const Vec e = f.evecs.col(f.off + k);
        Vec first = e;
        rot.apply(loop.nodes[0].theta, loop.nodes[0].phi, first);
        Vec prev = first;
        double dyn = 0.0;
        for (size_t i = 1; i < loop.nodes.size(); ++i) {
            Vec cur = e;
            rot.apply(loop.nodes[i].theta, loop.nodes[i].phi, cur);
            dyn += std::arg(prev.dot(cur));
            prev = cur;
        }
        const cplx endo = first.dot(prev);
        if (std::abs(endo) < nodal_threshold) return std::nullopt;
        const double beta_k = wrap_angle(std::arg(endo) - dyn);
        sum += f.p(f.off + k) * std::polar(1.0, beta_k);
    }
    if (std::abs(sum) < nodal_threshold) return std::nullopt;
    return wrap_angle(std::arg(sum));
}

Mat subsystem_state(const EnergyEigenstate& e, Subsystem subsystem) {
    if (subsystem == Subsystem::J) return e.vector * e.vector.adjoint();
    return marginal_state(e, subsystem);
}

SpinOperators subsystem_operators(int l, Subsystem subsystem) {
    switch (subsystem) {
        case Subsystem::L: return spin_operators(2 * l);
        case Subsystem::S: return spin_half_pm();
        case Subsystem::J: return joint_operators(spin_operators(2 * l), spin_half_pm());
    }
    throw InvalidInput("unknown subsystem");
}

double peak_isometry_residual() { return peak_slot().load(); }

} // namespace uhl

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"
#include "uhl/atom.hpp"
#include "uhl/transport.hpp"

#include <cmath>
#include <random>

using namespace uhl;
using uhl::testing::random_psd_trace1;
using uhl::testing::random_unitary;

namespace {

PathSpec rectangle(double t0, double t1, double p0, double p1) {
    PathSpec spec;
    spec.segments = {meridian_segment(p0, t0, t1), parallel_segment(t1, p0, p1),
                     meridian_segment(p1, t1, t0), parallel_segment(t0, p1, p0)};
    return spec;
}

SampledPath single_node(double theta, double phi) {
    SampledPath sp;
    sp.nodes = {{0.0, theta, phi}};
    sp.segment_boundaries = {0};
    sp.closed = true;
    return sp;
}

Mat embed_block(const Mat& m2, Eigen::Index d, Eigen::Index i0) {
    Mat out = Mat::Zero(d, d);
    out.block(i0, i0, 2, 2) = m2;
    return out;
}

// Lune and figure-eight holonomy blocks for the two marginals, in terms of
// the half-turn angle chi and the bounding longitudes.
struct LuneBlock {
    cplx a, b;
};

LuneBlock lune_block(double chi, double phi0, double phi1) {
    const double c = std::cos(0.5 * chi), s = std::sin(0.5 * chi);
    const cplx a = std::polar(1.0, phi1 - phi0) * (c * c) + cplx(s * s);
    const cplx b = c * s * (-std::polar(1.0, phi1) + std::polar(1.0, phi0));
    return {a, b};
}

Mat lune_matrix_L(int l, int two_mu, double g, double phi0, double phi1) {
    const double chi = pi * w_factor(l, two_mu) * concurrence(l, two_mu, g);
    const auto [a, b] = lune_block(chi, phi0, phi1);
    const double mu = 0.5 * two_mu;
    Mat m(2, 2);
    m << a, b, -std::conj(b), std::conj(a);
    return std::polar(1.0, -2.0 * mu * (phi1 - phi0)) * m;
}

Mat lune_matrix_S(int l, int two_mu, double g, double phi0, double phi1) {
    const double chi = pi * concurrence(l, two_mu, g);
    const auto [a, b] = lune_block(chi, phi0, phi1);
    Mat m(2, 2);
    m << std::conj(a), -std::conj(b), b, a;
    return m;
}

Mat figure8_matrix_L(int l, int two_mu, double g, double phi0, double phi1) {
    const double chi = pi * w_factor(l, two_mu) * concurrence(l, two_mu, g);
    const auto [a, b] = lune_block(chi, phi0, phi1);
    const double d = std::norm(a) - std::norm(b);
    Mat m(2, 2);
    m << cplx(d), 2.0 * std::conj(a) * b, -2.0 * a * std::conj(b), cplx(d);
    return m;
}

Mat figure8_matrix_S(int l, int two_mu, double g, double phi0, double phi1) {
    const double chi = pi * concurrence(l, two_mu, g);
    const auto [a, b] = lune_block(chi, phi0, phi1);
    const double d = std::norm(a) - std::norm(b);
    Mat m(2, 2);
    m << cplx(d), -2.0 * a * std::conj(b), 2.0 * std::conj(a) * b, cplx(d);
    return m;
}

Eigen::Index l_block_index(int l, int two_mu) { return (two_mu - 1) / 2 + l; }

} // namespace

TEST_CASE("transport generator vanishes without displacement and is anti-Hermitian") {
    std::mt19937 rng(11);
    const SpinOperators ops = spin_operators(3);
    for (int rep = 0; rep < 5; ++rep) {
        const Mat rho = random_psd_trace1(rng, 4);
        const Mat rhs = transport_rhs(rho, ops, 0.9, 0.4, 0.01, 0.02, Section::North);
        CHECK(max_abs(rhs + rhs.adjoint()) < 1e-12);
        const Mat zero = transport_rhs(rho, ops, 0.9, 0.4, 0.0, 0.0, Section::South);
        CHECK(max_abs(zero) < 1e-15);
    }
}

TEST_CASE("transport generator on a pure state collapses to an expectation value") {
    std::mt19937 rng(12);
    const SpinOperators ops = spin_operators(3);
    Vec v = Vec::Random(4);
    v.normalize();
    const Mat rho = v * v.adjoint();
    const double th = 1.2, ph = 0.5, dt = 0.013, dp = -0.008;
    const Mat rhs = transport_rhs(rho, ops, th, ph, dt, dp, Section::North);
    const double st = std::sin(th), ct = std::cos(th);
    const Mat bracket = (1.0 - ct) * dp * ops.z +
                        (st * std::cos(ph) * dp + std::sin(ph) * dt) * ops.x +
                        (st * std::sin(ph) * dp - std::cos(ph) * dt) * ops.y;
    const cplx expect = (v.adjoint() * bracket * v)(0);
    // the matrix square root of a numerically rank-one projector carries
    // sqrt(machine epsilon) noise in its null space
    CHECK(max_abs(rhs - cplx(0.0, -2.0) * expect * rho) < 1e-9);
}

TEST_CASE("transport generator picks the hemisphere section automatically") {
    std::mt19937 rng(13);
    const SpinOperators ops = spin_half_pm();
    const Mat rho = random_psd_trace1(rng, 2);
    CHECK(max_abs(transport_rhs(rho, ops, 0.3, 1.0, 0.01, 0.02, Section::Auto) -
                  transport_rhs(rho, ops, 0.3, 1.0, 0.01, 0.02, Section::North)) == 0.0);
    CHECK(max_abs(transport_rhs(rho, ops, 2.9, 1.0, 0.01, 0.02, Section::Auto) -
                  transport_rhs(rho, ops, 2.9, 1.0, 0.01, 0.02, Section::South)) == 0.0);
}

TEST_CASE("support Sylvester solve") {
    std::mt19937 rng(21);
    const SpinOperators ops = spin_operators(3);

    SUBCASE("maximally mixed state gives a scalar relation") {
        const Mat rho = Mat::Identity(4, 4) / 4.0;
        const Mat rhs = transport_rhs(rho, ops, 0.8, 0.2, 0.005, 0.007, Section::North);
        const Mat gen = sylvester_on_support(rho, rhs);
        CHECK(max_abs(gen - 2.0 * rhs) < 1e-12);
        CHECK(max_abs(gen * rho + rho * gen - rhs) < 1e-12);
    }

    SUBCASE("rank-deficient physical state solves on its support") {
        const EnergyEigenstate e = eigenstate({2, 3.0}, 1, +1);
        const Mat rho = marginal_state(e, Subsystem::L);
        const SpinOperators lops = spin_operators(4);
        const Mat rhs = transport_rhs(rho, lops, 1.1, 0.6, 0.004, 0.009, Section::North);
        const Mat gen = sylvester_on_support(rho, rhs);
        CHECK(max_abs(gen * rho + rho * gen - rhs) < 1e-10);
        CHECK(max_abs(gen + gen.adjoint()) < 1e-10);
    }

    SUBCASE("rejects a symmetric right-hand side") {
        const Mat rho = Mat::Identity(2, 2) / 2.0;
        Mat bad = Mat::Zero(2, 2);
        bad(0, 1) = 0.3;
        bad(1, 0) = 0.3;
        CHECK_THROWS_AS((void)sylvester_on_support(rho, bad), InvalidInput);
    }

    SUBCASE("rejects a source outside the support") {
        Mat rho = Mat::Zero(4, 4);
        rho(0, 0) = 0.5;
        rho(1, 1) = 0.5;
        Mat leak = Mat::Zero(4, 4);
        leak(2, 3) = 0.3;
        leak(3, 2) = -0.3;
        CHECK_THROWS_AS((void)sylvester_on_support(rho, leak), NumericalInconsistency);
    }
}

TEST_CASE("transport keeps a single point fixed and undoes a retraced loop") {
    const EnergyEigenstate e = eigenstate({2, 3.0}, 1, +1);
    const Mat rho = marginal_state(e, Subsystem::L);
    const SpinOperators ops = spin_operators(4);

    SUBCASE("single point") {
        TransportProblem prob{rho, ops, single_node(0.7, 0.3), Section::Auto, pi / 2.0, Mat()};
        const auto [v1, v0] = transport(prob);
        CHECK(max_abs(v1 - v0) < 1e-14);
        const HolonomyResult h = holonomy(prob);
        RotationCache rot(ops);
        const Mat u0 = rot.matrix(0.7, 0.3);
        const Mat p = v0;
        CHECK(max_abs(h.matrix - u0 * p * u0.adjoint()) < 1e-12);
    }

    SUBCASE("retraced parallel") {
        PathSpec spec;
        spec.segments = {parallel_segment(0.8, 0.0, 2.0 * pi),
                         parallel_segment(0.8, 2.0 * pi, 0.0)};
        TransportProblem prob{rho, ops, sample(spec, 300), Section::Auto, pi / 2.0, Mat()};
        const HolonomyResult h = holonomy(prob);
        RotationCache rot(ops);
        const Mat u0 = rot.matrix(0.8, 0.0);
        Eigen::SelfAdjointEigenSolver<Mat> es(rho);
        const Mat p = es.eigenvectors().rightCols(2) * es.eigenvectors().rightCols(2).adjoint();
        CHECK(max_abs(h.matrix - u0 * p * u0.adjoint()) < 1e-12);
    }
}

TEST_CASE("pure joint state holonomy reproduces the closed lune phase") {
    const ModelParams p{2, 3.0};
    const SpinOperators jops = subsystem_operators(2, Subsystem::J);
    const double phi0 = 0.3, phi1 = 1.6;

    const EnergyEigenstate up = eigenstate(p, 1, +1);
    const Mat rho_up = up.vector * up.vector.adjoint();
    const HolonomyResult h =
        converged_holonomy(rho_up, jops, orange_slice(phi0, phi1), TransportOptions{500, 5, 1e-8, Section::Auto, pi / 2.0});
    REQUIRE(h.phase_gamma.has_value());
    CHECK(*h.phase_gamma == doctest::Approx(-1.3).epsilon(1e-9));
    CHECK(max_abs(h.matrix - std::polar(1.0, -1.3) * rho_up) < 1e-9);
    REQUIRE(h.phase_beta.has_value());
    CHECK(*h.phase_beta == doctest::Approx(-1.3).epsilon(1e-4));
    CHECK(h.isometry_residual < 1e-12);

    const EnergyEigenstate dn = eigenstate(p, -1, +1);
    const Mat rho_dn = dn.vector * dn.vector.adjoint();
    const HolonomyResult h2 =
        converged_holonomy(rho_dn, jops, orange_slice(phi0, phi1), TransportOptions{500, 5, 1e-8, Section::Auto, pi / 2.0});
    REQUIRE(h2.phase_gamma.has_value());
    CHECK(*h2.phase_gamma == doctest::Approx(1.3).epsilon(1e-9));
}

TEST_CASE("gauge freedom of the initial isometry drops out") {
    std::mt19937 rng(31);
    const EnergyEigenstate e = eigenstate({2, 3.0}, 1, +1);
    const Mat rho = marginal_state(e, Subsystem::L);
    const SpinOperators ops = spin_operators(4);
    const SampledPath path = sample(orange_slice(0.2, 1.1), 200);
    TransportProblem base{rho, ops, path, Section::Auto, pi / 2.0, Mat()};
    const HolonomyResult ref = holonomy(base);

    Eigen::SelfAdjointEigenSolver<Mat> es(rho);
    const Mat es_s = es.eigenvectors().rightCols(2);
    for (int rep = 0; rep < 20; ++rep) {
        const Mat t = random_unitary(rng, 5).topRows(2);
        TransportProblem prob = base;
        prob.v0 = es_s * t;
        const HolonomyResult h = holonomy(prob);
        CHECK(max_abs(h.matrix - ref.matrix) < 1e-11);
    }
}

TEST_CASE("section choice does not affect the holonomy") {
    const EnergyEigenstate e = eigenstate({2, 3.0}, 1, +1);
    const Mat rho = marginal_state(e, Subsystem::L);
    const SpinOperators ops = spin_operators(4);
    const PathSpec spec = rectangle(0.5, 2.6, 0.0, 1.4);

    auto run = [&](Section sec, double lat) {
        return converged_holonomy(rho, ops, spec, TransportOptions{400, 5, 1e-8, sec, lat});
    };
    const HolonomyResult north = run(Section::North, pi / 2.0);
    const HolonomyResult south = run(Section::South, pi / 2.0);
    const HolonomyResult astd = run(Section::Auto, pi / 2.0);
    const HolonomyResult alow = run(Section::Auto, 1.2);
    const HolonomyResult ahigh = run(Section::Auto, 1.9);
    CHECK(max_abs(north.matrix - south.matrix) < 1e-7);
    CHECK(max_abs(north.matrix - astd.matrix) < 1e-7);
    CHECK(max_abs(astd.matrix - alow.matrix) < 1e-7);
    CHECK(max_abs(astd.matrix - ahigh.matrix) < 1e-7);
}

TEST_CASE("holonomy is invariant under path reparametrization") {
    const EnergyEigenstate e = eigenstate({2, 3.0}, 1, +1);
    const Mat rho = marginal_state(e, Subsystem::L);
    const SpinOperators ops = spin_operators(4);
    const PathSpec spec = orange_slice(0.3, 1.6);
    const PathSpec warped = reparametrized(spec, [](double s) { return s * s * (3.0 - 2.0 * s); });
    const HolonomyResult a = converged_holonomy(rho, ops, spec);
    const HolonomyResult b = converged_holonomy(rho, ops, warped);
    CHECK(max_abs(a.matrix - b.matrix) < 2e-7);
}

TEST_CASE("transported state keeps its spectrum and the map is a support isometry") {
    const EnergyEigenstate e = eigenstate({2, 3.0}, 1, +1);
    const Mat rho = marginal_state(e, Subsystem::L);
    const SpinOperators ops = spin_operators(4);
    PathSpec spec;
    spec.segments = {meridian_segment(0.9, 0.4, 2.2), parallel_segment(2.2, 0.9, 2.0)};
    const HolonomyResult h = converged_holonomy(rho, ops, spec);
    CHECK(h.isometry_residual < 1e-11);

    RotationCache rot(ops);
    const Mat rho0 = rot.matrix(0.4, 0.9) * rho * rot.matrix(0.4, 0.9).adjoint();
    const Mat moved = h.matrix * rho0 * h.matrix.adjoint();
    Eigen::SelfAdjointEigenSolver<Mat> ea(moved), eb(rho);
    CHECK((ea.eigenvalues() - eb.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("parallel transport condition holds in the small-step limit") {
    const EnergyEigenstate e = eigenstate({2, 3.0}, 1, +1);
    const Mat rho = marginal_state(e, Subsystem::L);
    const SpinOperators ops = spin_operators(4);
    PathSpec spec;
    spec.segments = {meridian_segment(0.4, 0.5, 1.1)};

    TransportProblem coarse{rho, ops, sample(spec, 1000), Section::North, pi / 2.0, Mat()};
    TransportProblem fine{rho, ops, sample(spec, 4000), Section::North, pi / 2.0, Mat()};
    const double rc = parallel_transport_residual(coarse);
    const double rf = parallel_transport_residual(fine);
    CHECK(rf < 1e-6);
    CHECK(rc < 1e-4);
    CHECK(rc > 4.0 * rf);
}

TEST_CASE("gauge potentials match their closed forms at the poles and spot values") {
    const int l = 2, two_mu = 1;
    const double g = 3.0;
    const double wc = w_factor(l, two_mu) * concurrence(l, two_mu, g);

    SUBCASE("spot values") {
        const auto [at_l, ap_l] = vector_potential_L(l, two_mu, g, 0.9, 0.0);
        CHECK(std::abs(at_l(0, 1) - cplx(0.0, -0.5 * wc)) < 1e-12);
        CHECK(std::abs(at_l(0, 1) - cplx(0.0, -0.9486832980505138)) < 1e-10);
        const auto [at_s, ap_s] = vector_potential_S(l, two_mu, g, 0.9, 0.0);
        CHECK(std::abs(at_s(0, 1) - cplx(0.0, 0.3872983346207417)) < 1e-10);
        CHECK(std::abs(ap_l.trace() - cplx(1.0 - std::cos(0.9))) < 1e-12);
        CHECK(std::abs(ap_s.trace()) < 1e-14);
    }

    SUBCASE("azimuthal component vanishes at the north pole") {
        CHECK(max_abs(vector_potential_L(l, two_mu, g, 0.0, 0.7).second) < 1e-14);
        CHECK(max_abs(vector_potential_S(l, two_mu, g, 0.0, 0.7).second) < 1e-14);
    }

    SUBCASE("azimuthal component at the south pole is diagonal") {
        const Mat ap_l = vector_potential_L(l, two_mu, g, pi, 0.7).second;
        Mat want_l(2, 2);
        want_l << cplx(2.0 * 0.5 - 1.0), cplx(0.0), cplx(0.0), cplx(2.0 * 0.5 + 1.0);
        CHECK(max_abs(ap_l - want_l) < 1e-12);
        const Mat ap_s = vector_potential_S(l, two_mu, g, pi, 0.7).second;
        Mat want_s(2, 2);
        want_s << cplx(1.0), cplx(0.0), cplx(0.0), cplx(-1.0);
        CHECK(max_abs(ap_s - want_s) < 1e-12);
    }

    SUBCASE("Hermitian everywhere") {
        for (double th : {0.2, 1.3, 2.8})
            for (double ph : {0.0, 1.9, 4.4}) {
                const auto [at, ap] = vector_potential_L(l, two_mu, g, th, ph);
                CHECK(hermiticity_error(at) < 1e-14);
                CHECK(hermiticity_error(ap) < 1e-14);
                const auto [bt, bp] = vector_potential_S(l, two_mu, g, th, ph);
                CHECK(hermiticity_error(bt) < 1e-14);
                CHECK(hermiticity_error(bp) < 1e-14);
            }
    }

    SUBCASE("weights at the edge of the ladder are rejected") {
        CHECK_THROWS_AS((void)vector_potential_L(1, 3, 1.0, 0.5, 0.0), InvalidInput);
        CHECK_THROWS_AS((void)vector_potential_S(1, -3, 1.0, 0.5, 0.0), InvalidInput);
        CHECK_THROWS_AS((void)vector_potential_L(2, 2, 1.0, 0.5, 0.0), InvalidInput);
    }
}

TEST_CASE("ordered exponential basics") {
    const SampledPath par = sample([] {
        PathSpec s;
        s.segments = {parallel_segment(1.0, 0.0, 1.1)};
        return s;
    }(), 60);

    SUBCASE("zero potential gives the identity") {
        const Mat u = path_ordered_exponential(
            [](double, double) { return std::pair<Mat, Mat>{Mat::Zero(2, 2), Mat::Zero(2, 2)}; },
            par);
        CHECK(max_abs(u - Mat::Identity(2, 2)) < 1e-15);
    }

    SUBCASE("constant commuting potential is exact at any resolution") {
        Mat sz(2, 2);
        sz << cplx(0.7), cplx(0.0), cplx(0.0), cplx(-0.7);
        const Mat u = path_ordered_exponential(
            [&](double, double) { return std::pair<Mat, Mat>{Mat::Zero(2, 2), sz}; }, par);
        Mat want(2, 2);
        want << std::polar(1.0, -0.77), cplx(0.0), cplx(0.0), std::polar(1.0, 0.77);
        CHECK(max_abs(u - want) < 1e-13);
    }

    SUBCASE("result is unitary") {
        const SampledPath path = sample(orange_slice(0.1, 1.9), 300);
        const Mat u = path_ordered_exponential(
            [](double th, double ph) { return vector_potential_L(2, 1, 3.0, th, ph); }, path);
        CHECK(unitarity_error(u) < 1e-12);
    }

    SUBCASE("rejects non-Hermitian and misshapen potentials") {
        Mat bad = Mat::Zero(2, 2);
        bad(0, 1) = 1.0;
        const PotentialFn nonherm = [bad](double, double) {
            return std::pair<Mat, Mat>{bad, bad};
        };
        const PotentialFn misshapen = [](double, double) {
            return std::pair<Mat, Mat>{Mat::Zero(3, 3), Mat::Zero(3, 3)};
        };
        CHECK_THROWS_AS((void)path_ordered_exponential(nonherm, par), InvalidInput);
        CHECK_THROWS_AS((void)path_ordered_exponential(misshapen, par), InvalidInput);
    }
}

TEST_CASE("both pipelines agree on marginal holonomies") {
    struct Case {
        int l, two_mu;
        double g;
    };
    const Case cases[] = {{2, 1, 3.0}, {3, -3, 1.5}};
    for (const Case& c : cases) {
        const EnergyEigenstate e = eigenstate({c.l, c.g}, c.two_mu, +1);
        for (Subsystem sub : {Subsystem::L, Subsystem::S}) {
            const Mat rho = marginal_state(e, sub);
            const SpinOperators ops = subsystem_operators(c.l, sub);
            for (const PathSpec& spec : {orange_slice(0.3, 1.6), figure_eight(0.3, 1.6)}) {
                const HolonomyResult ode = converged_holonomy(rho, ops, spec);
                const HolonomyResult pot =
                    converged_holonomy_via_potential(sub, c.l, c.two_mu, c.g, spec);
                CHECK(max_abs(ode.matrix - pot.matrix) < 1e-6);
            }
        }
    }
}

TEST_CASE("lune holonomy reproduces the closed form blocks") {
    const int l = 2, two_mu = 1;
    const double g = 3.0, phi0 = 0.3, phi1 = 1.1;

    SUBCASE("orbital block") {
        const Mat want = embed_block(lune_matrix_L(l, two_mu, g, phi0, phi1), 5,
                                     l_block_index(l, two_mu));
        const EnergyEigenstate e = eigenstate({l, g}, two_mu, +1);
        const HolonomyResult ode = converged_holonomy(
            marginal_state(e, Subsystem::L), spin_operators(4), orange_slice(phi0, phi1));
        CHECK(max_abs(ode.matrix - want) < 1e-6);
        const HolonomyResult pot = converged_holonomy_via_potential(
            Subsystem::L, l, two_mu, g, orange_slice(phi0, phi1));
        CHECK(max_abs(pot.matrix - want) < 1e-6);
    }

    SUBCASE("spin block") {
        const Mat want = lune_matrix_S(l, two_mu, g, phi0, phi1);
        const EnergyEigenstate e = eigenstate({l, g}, two_mu, +1);
        const HolonomyResult ode = converged_holonomy(
            marginal_state(e, Subsystem::S), spin_half_pm(), orange_slice(phi0, phi1));
        CHECK(max_abs(ode.matrix - want) < 1e-6);
        const HolonomyResult pot = converged_holonomy_via_potential(
            Subsystem::S, l, two_mu, g, orange_slice(phi0, phi1));
        CHECK(max_abs(pot.matrix - want) < 1e-6);
    }
}

TEST_CASE("figure eight holonomy matches the closed form and has a real trace") {
    const int l = 2, two_mu = 1;
    const double g = 3.0, phi0 = 0.3, phi1 = 1.1;
    const EnergyEigenstate e = eigenstate({l, g}, two_mu, +1);

    const HolonomyResult hl = converged_holonomy(
        marginal_state(e, Subsystem::L), spin_operators(4), figure_eight(phi0, phi1));
    const Mat want_l = embed_block(figure8_matrix_L(l, two_mu, g, phi0, phi1), 5,
                                   l_block_index(l, two_mu));
    CHECK(max_abs(hl.matrix - want_l) < 1e-6);
    CHECK(std::abs(std::imag(hl.trace)) < 1e-8);

    const HolonomyResult hs = converged_holonomy(
        marginal_state(e, Subsystem::S), spin_half_pm(), figure_eight(phi0, phi1));
    CHECK(max_abs(hs.matrix - figure8_matrix_S(l, two_mu, g, phi0, phi1)) < 1e-6);
    CHECK(std::abs(std::imag(hs.trace)) < 1e-8);

    const Mat rho_j = e.vector * e.vector.adjoint();
    const HolonomyResult hj = converged_holonomy(rho_j, subsystem_operators(l, Subsystem::J),
                                                 figure_eight(phi0, phi1));
    REQUIRE(hj.phase_gamma.has_value());
    CHECK(std::abs(*hj.phase_gamma) < 1e-9);
}

TEST_CASE("extremal joint holonomy factorizes over the marginals") {
    const ModelParams p{1, 2.0};
    const EnergyEigenstate e = eigenstate(p, 3, +1);
    REQUIRE(e.extremal);
    const PathSpec spec = rectangle(0.5, 2.6, 0.2, 1.4);

    const HolonomyResult hj = converged_holonomy(e.vector * e.vector.adjoint(),
                                                 subsystem_operators(1, Subsystem::J), spec);
    const HolonomyResult hl =
        converged_holonomy(marginal_state(e, Subsystem::L), spin_operators(2), spec);
    const HolonomyResult hs =
        converged_holonomy(marginal_state(e, Subsystem::S), spin_half_pm(), spec);
    CHECK(max_abs(hj.matrix - tensor_embed(hl.matrix, hs.matrix)) < 1e-7);

    const double omega = solid_angle(sample(spec, 2000));
    REQUIRE(hl.phase_gamma.has_value());
    CHECK(*hl.phase_gamma == doctest::Approx(wrap_angle(-1.0 * omega)).epsilon(1e-6));
    REQUIRE(hj.phase_gamma.has_value());
    CHECK(*hj.phase_gamma == doctest::Approx(wrap_angle(-1.5 * omega)).epsilon(1e-6));
}

TEST_CASE("geometric phase of pure vector paths") {
    const SpinOperators ops = spin_operators(2);
    RotationCache rot(ops);

    SUBCASE("constant path carries no phase") {
        std::vector<Vec> path(50, Vec::Unit(3, 1));
        const auto ph = pure_geometric_phase(path);
        REQUIRE(ph.has_value());
        CHECK(std::abs(*ph) < 1e-14);
    }

    SUBCASE("spin coherent loop encloses its solid angle") {
        const double theta = 1.0;
        const int n = 4000;
        std::vector<Vec> path;
        path.reserve(n + 1);
        for (int k = 0; k <= n; ++k) {
            Vec v = Vec::Unit(3, 2);
            rot.apply(theta, 2.0 * pi * k / n, v);
            path.push_back(v);
        }
        const auto ph = pure_geometric_phase(path);
        REQUIRE(ph.has_value());
        const double omega = 2.0 * pi * (1.0 - std::cos(theta));
        CHECK(*ph == doctest::Approx(wrap_angle(-omega)).epsilon(1e-4));

        SUBCASE("per-node phase changes cancel exactly") {
            std::mt19937 rng(41);
            std::uniform_real_distribution<double> dist(-pi, pi);
            std::vector<Vec> redressed = path;
            for (auto& v : redressed) v *= std::polar(1.0, dist(rng));
            const auto ph2 = pure_geometric_phase(redressed);
            REQUIRE(ph2.has_value());
            CHECK(std::abs(*ph2 - *ph) < 1e-12);
        }
    }

    SUBCASE("orthogonal endpoints have no defined phase") {
        std::vector<Vec> path = {Vec::Unit(3, 0), Vec::Unit(3, 1)};
        CHECK_FALSE(pure_geometric_phase(path).has_value());
    }
}

TEST_CASE("mixed geometric phase: reductions and the weighted sum") {
    const int l = 2, two_mu = 1;
    const double g = 3.0;
    const EnergyEigenstate e = eigenstate({l, g}, two_mu, +1);
    const double omega = pi / 2.0;
    const PathSpec lune = orange_slice(0.2, 0.2 + omega / 2.0);
    const double mix = std::atan2(std::cos(e.alpha) * std::sin(omega / 2.0),
                                  std::cos(omega / 2.0));

    SUBCASE("pure joint state reduces to the coherent-state phase") {
        const auto b = mixed_state_geometric_phase(e.vector * e.vector.adjoint(),
                                                   subsystem_operators(l, Subsystem::J),
                                                   sample(lune, 3000));
        REQUIRE(b.has_value());
        CHECK(*b == doctest::Approx(wrap_angle(-0.5 * omega)).epsilon(1e-4));
    }

    SUBCASE("marginal phases obey the closed forms and their sum rule") {
        const auto bl = mixed_state_geometric_phase(marginal_state(e, Subsystem::L),
                                                    spin_operators(2 * l), sample(lune, 3000));
        const auto bs = mixed_state_geometric_phase(marginal_state(e, Subsystem::S),
                                                    spin_half_pm(), sample(lune, 3000));
        REQUIRE(bl.has_value());
        REQUIRE(bs.has_value());
        CHECK(*bl == doctest::Approx(-0.5 * omega + mix).epsilon(1e-4));
        CHECK(*bs == doctest::Approx(-mix).epsilon(1e-4));
        CHECK(wrap_angle(*bl + *bs + 0.5 * omega) == doctest::Approx(0.0).epsilon(2e-4));
    }

    SUBCASE("figure eight carries no spectral phase") {
        const auto b = mixed_state_geometric_phase(marginal_state(e, Subsystem::L),
                                                   spin_operators(2 * l),
                                                   sample(figure_eight(0.3, 1.1), 2000));
        REQUIRE(b.has_value());
        CHECK(std::abs(*b) < 1e-4);
    }

    SUBCASE("degenerate support is rejected") {
        const EnergyEigenstate d = eigenstate({1, -1.0}, 1, +1);
        CHECK_THROWS_AS((void)mixed_state_geometric_phase(marginal_state(d, Subsystem::S),
                                                          spin_half_pm(),
                                                          sample(orange_slice(0.0, 1.0), 200)),
                        InvalidInput);
    }

    SUBCASE("open paths are rejected") {
        PathSpec open;
        open.segments = {meridian_segment(0.3, 0.2, 1.0)};
        CHECK_THROWS_AS((void)mixed_state_geometric_phase(marginal_state(e, Subsystem::L),
                                                          spin_operators(2 * l),
                                                          sample(open, 100)),
                        InvalidInput);
    }
}

TEST_CASE("amplitude overlap phase agrees with the trace phase on closed loops of full rank") {
    std::mt19937 rng(51);
    const EnergyEigenstate e = eigenstate({2, 3.0}, 1, +1);
    const Mat rho = marginal_state(e, Subsystem::S);
    const SpinOperators ops = spin_half_pm();
    const PathSpec spec = figure_eight(0.3, 1.1);
    const HolonomyResult h = converged_holonomy(rho, ops, spec);
    const SampledPath path = sample(spec, 200);
    const auto amp = amplitude_phase(rho, ops, path, h.matrix);
    REQUIRE(amp.has_value());
    REQUIRE(h.phase_gamma.has_value());
    // full-rank reference state, identical start and end frames
    CHECK(std::abs(wrap_angle(*amp - *h.phase_gamma)) < 1e-6);
}

TEST_CASE("convergence failure raises the integrator error") {
    const EnergyEigenstate e = eigenstate({2, 3.0}, 1, +1);
    const Mat rho = marginal_state(e, Subsystem::L);
    const SpinOperators ops = spin_operators(4);
    const PathSpec spec = rectangle(0.5, 2.6, 0.0, 1.4);
    const TransportOptions strict{4, 1, 1e-15, Section::Auto, pi / 2.0};
    CHECK_THROWS_AS((void)converged_holonomy(rho, ops, spec, strict), IntegratorFailure);
}

TEST_CASE("potential pipeline rejects the joint system and extremal weights") {
    const SampledPath path = sample(orange_slice(0.0, 1.0), 50);
    CHECK_THROWS_AS((void)holonomy_via_potential(Subsystem::J, 2, 1, 3.0, path), InvalidInput);
    CHECK_THROWS_AS((void)holonomy_via_potential(Subsystem::L, 1, 3, 2.0, path), InvalidInput);
}

TEST_CASE("transport problem validation") {
    const SpinOperators ops = spin_half_pm();
    const SampledPath path = single_node(0.5, 0.0);

    const Mat rho = Mat::Identity(2, 2);
    TransportProblem overweight{rho, ops, path, Section::Auto, pi / 2.0, Mat()};
    CHECK_THROWS_AS(overweight.validate(), InvalidInput);

    Mat xpol(2, 2);
    xpol << cplx(0.5), cplx(0.5), cplx(0.5), cplx(0.5);
    TransportProblem noncommuting{xpol, ops, path, Section::Auto, pi / 2.0, Mat()};
    CHECK_THROWS_AS(noncommuting.validate(), InvalidInput);

    Mat good = Mat::Zero(2, 2);
    good(0, 0) = 0.7;
    good(1, 1) = 0.3;
    TransportProblem ok{good, ops, path, Section::Auto, pi / 2.0, Mat()};
    CHECK_NOTHROW(ok.validate());

    TransportProblem empty = ok;
    empty.path.nodes.clear();
    CHECK_THROWS_AS(empty.validate(), InvalidInput);

    TransportProblem badv = ok;
    badv.v0 = 0.5 * Mat::Identity(2, 2);
    CHECK_THROWS_AS(badv.validate(), InvalidInput);
}

TEST_CASE("isometry residual registry only ratchets upward") {
    const double before = peak_isometry_residual();
    const EnergyEigenstate e = eigenstate({1, 2.0}, 1, +1);
    TransportProblem prob{marginal_state(e, Subsystem::S), spin_half_pm(),
                          sample(orange_slice(0.0, 0.8), 100), Section::Auto, pi / 2.0, Mat()};
    (void)holonomy(prob);
    const double after = peak_isometry_residual();
    CHECK(after >= before);
    CHECK(after >= 0.0);
}

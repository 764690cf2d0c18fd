#include "uhl/validation.hpp"

#include "uhl/atom.hpp"
#include "uhl/figures.hpp"
#include "uhl/oracles.hpp"
#include "uhl/pathfile.hpp"
#include "uhl/transport.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>

namespace uhl {

namespace {

std::string detail(const char* fmt, ...) {
    char buf[240];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    return buf;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw NumericalInconsistency(what);
}

struct Budget {
    int l_cap;
    int node_cap;
    TransportOptions ode;
    double equiv_tol;
    double invariance_tol;
};

Budget budget_for(ValidationLevel level) {
    if (level == ValidationLevel::Quick)
        return {2, 500, TransportOptions{125, 2, 2e-6, Section::Auto, pi / 2.0}, 2e-6, 1e-5};
    return {4, 4000, TransportOptions{500, 3, 1e-7, Section::Auto, pi / 2.0}, 1e-6, 1e-7};
}

PathSpec open_rectangle_arc(double t0, double t1, double p0, double p1) {
    PathSpec spec;
    spec.segments = {meridian_segment(p0, t0, t1), parallel_segment(t1, p0, p1)};
    return spec;
}

PathSpec rectangle_loop(double t0, double t1, double p0, double p1) {
    PathSpec spec;
    spec.segments = {meridian_segment(p0, t0, t1), parallel_segment(t1, p0, p1),
                     meridian_segment(p1, t1, t0), parallel_segment(t0, p1, p0)};
    return spec;
}

Mat random_antihermitian_local(std::mt19937& rng, int dim) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Mat m(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) m(r, c) = cplx(dist(rng), dist(rng));
    return 0.5 * (m - m.adjoint());
}

Mat random_unitary_local(std::mt19937& rng, int dim) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Mat m(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) m(r, c) = cplx(dist(rng), dist(rng));
    const Eigen::HouseholderQR<Mat> qr(m);
    Mat q = qr.householderQ();
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < dim; ++c)
        if (std::abs(r(c, c)) > 0.0) q.col(c) *= r(c, c) / std::abs(r(c, c));
    return q;
}

// Potential-pipeline holonomy with an optional in-place tweak of the orbital
// components, mirroring the embedding done by holonomy_via_potential.
Mat tweaked_potential_holonomy(int l, int two_mu, double g, const SampledPath& path,
                               const ValidationHooks& hooks) {
    PotentialFn fn = [&](double th, double ph) {
        auto [at, ap] = vector_potential_L(l, two_mu, g, th, ph);
        if (hooks.orbital_potential_tweak) hooks.orbital_potential_tweak(at, ap);
        return std::pair<Mat, Mat>{at, ap};
    };
    const Mat block = path_ordered_exponential(fn, path);
    const SpinOperators ops = subsystem_operators(l, Subsystem::L);
    const Eigen::Index i0 = (two_mu - 1) / 2 + l;
    Mat emb = Mat::Zero(ops.dim(), ops.dim());
    emb.block(i0, i0, 2, 2) = block;
    RotationCache rot(ops);
    const auto& n0 = path.nodes.front();
    const auto& n1 = path.nodes.back();
    return rot.matrix(n1.theta, n1.phi) * emb * rot.matrix(n0.theta, n0.phi).adjoint();
}

// ---------------------------------------------------------------------------
// individual checks; each returns a detail line or throws on failure
// ---------------------------------------------------------------------------

std::string check_spin_algebra(const Budget& b) {
    const cplx iu(0.0, 1.0);
    double worst = 0.0;
    for (int two_j = 1; two_j <= 2 * b.l_cap + 1; ++two_j) {
        const SpinOperators s = spin_operators(two_j);
        const double j = 0.5 * two_j;
        const Mat id = Mat::Identity(s.dim(), s.dim());
        worst = std::max(worst, max_abs(s.x * s.y - s.y * s.x - iu * s.z));
        worst = std::max(worst, max_abs(s.y * s.z - s.z * s.y - iu * s.x));
        worst = std::max(worst, max_abs(s.z * s.x - s.x * s.z - iu * s.y));
        worst = std::max(worst,
                         max_abs(s.x * s.x + s.y * s.y + s.z * s.z - j * (j + 1.0) * id));
    }
    for (int l = 1; l <= b.l_cap; ++l) {
        const SpinOperators jt = joint_operators(spin_operators(2 * l), spin_half_pm());
        worst = std::max(worst, max_abs(jt.x * jt.y - jt.y * jt.x - iu * jt.z));
    }
    require(worst < 1e-12, detail("ladder algebra residual %.2e", worst));
    return detail("commutator and Casimir residuals at or below %.2e", worst);
}

std::string check_eigensystem(const Budget& b) {
    double worst = 0.0;
    int states = 0;
    for (int l = 1; l <= b.l_cap; ++l)
        for (double g : {0.7, 3.0, 20.0}) {
            const ModelParams p{l, g};
            const Mat h = hamiltonian_z(p);
            for (const EnergyEigenstate& e : eigenstates(p)) {
                ++states;
                worst = std::max(worst, max_abs(h * e.vector - e.energy * e.vector));
                worst = std::max(worst, std::abs(e.vector.norm() - 1.0));
                if (!e.extremal) {
                    const double cc = concurrence(l, e.two_mu, g);
                    worst = std::max(worst, std::abs(e.concurrence - cc));
                    require(cc > 0.0 && cc <= 1.0, "concurrence outside (0, 1]");
                }
            }
        }
    require(worst < 1e-10, detail("eigensystem residual %.2e", worst));
    return detail("%d eigenstates, residuals at or below %.2e", states, worst);
}

std::string check_rotation_factorization(const Budget& b) {
    double worst = 0.0;
    for (int l = 1; l <= b.l_cap; ++l) {
        const SpinOperators lops = spin_operators(2 * l);
        const SpinOperators sops = spin_half_pm();
        const SpinOperators jops = joint_operators(lops, sops);
        RotationCache rl(lops), rs(sops), rj(jops);
        for (double th : {0.3, 1.2, 2.8})
            for (double ph : {0.0, 0.9, 4.0}) {
                const Mat joint = rj.matrix(th, ph);
                const Mat split = tensor_embed(rl.matrix(th, ph), rs.matrix(th, ph));
                worst = std::max(worst, max_abs(joint - split));
                const Mat joint_alt = rj.alt_matrix(th, ph);
                const Mat split_alt =
                    tensor_embed(rl.alt_matrix(th, ph), rs.alt_matrix(th, ph));
                worst = std::max(worst, max_abs(joint_alt - split_alt));
            }
    }
    require(worst < 1e-10, detail("rotation factorization residual %.2e", worst));
    return detail("joint rotations split over both levels, residual %.2e", worst);
}

std::string check_winding_phase(const Budget& b, ValidationLevel level) {
    double worst = 0.0;
    int runs = 0;
    auto compare = [&](const EnergyEigenstate& e, const PathSpec& spec) {
        ++runs;
        const SpinOperators jops = subsystem_operators(e.l, Subsystem::J);
        const Mat rho = subsystem_state(e, Subsystem::J);
        const HolonomyResult num = converged_holonomy(rho, jops, spec, b.ode);
        const Mat ref = j_holonomy_closed_form(e, sample(spec, 64));
        worst = std::max(worst, max_abs(num.matrix - ref));
    };
    compare(eigenstate({2, 3.0}, 1, +1), orange_slice(0.3, 1.4));
    compare(eigenstate({1, 5.0}, -1, -1), open_rectangle_arc(0.4, 1.9, 0.0, 2.2));
    if (level == ValidationLevel::Full) {
        std::mt19937 rng(404);
        std::uniform_real_distribution<double> th(0.2, 2.9), ph(0.0, 2.0 * pi);
        for (int rep = 0; rep < 4; ++rep) {
            const int l = 1 + rep % 3;
            const int two_mu = (rep % 2 == 0) ? 1 : -(2 * l - 1);
            const EnergyEigenstate e = eigenstate({l, 3.0 + 5.0 * rep}, two_mu,
                                                  rep % 2 == 0 ? +1 : -1);
            compare(e, rectangle_loop(th(rng), th(rng), ph(rng), ph(rng)));
        }
    }
    require(worst < b.equiv_tol, detail("winding phase deviation %.2e", worst));
    return detail("%d transported runs against the closed form, gap %.2e", runs, worst);
}

std::string check_method_equivalence(const Budget& b, ValidationLevel level,
                                     const ValidationHooks& hooks) {
    struct Case {
        int l, two_mu;
        double g;
    };
    std::vector<Case> cases = {{1, 1, 3.0}, {2, 1, 13.0}};
    if (level == ValidationLevel::Full) {
        cases.push_back({3, 3, 13.0});
        cases.push_back({4, 5, 37.0});
    }
    double worst = 0.0;
    int runs = 0;
    for (const Case& c : cases) {
        const EnergyEigenstate e = eigenstate({c.l, c.g}, c.two_mu, +1);
        const Mat rho = marginal_state(e, Subsystem::L);
        const SpinOperators ops = subsystem_operators(c.l, Subsystem::L);
        const std::vector<PathSpec> paths = {figure_eight(0.2, 1.5), orange_slice(0.1, 0.9),
                                             open_rectangle_arc(0.6, 2.0, 0.3, 1.2)};
        for (const PathSpec& spec : paths) {
            ++runs;
            const HolonomyResult ode = converged_holonomy(rho, ops, spec, b.ode);
            const int n = std::min(b.node_cap, 500);
            const Mat lo = tweaked_potential_holonomy(c.l, c.two_mu, c.g,
                                                      sample(spec, n / 2), hooks);
            const Mat hi =
                tweaked_potential_holonomy(c.l, c.two_mu, c.g, sample(spec, n), hooks);
            const Mat pot = (4.0 * hi - lo) / 3.0;
            worst = std::max(worst, max_abs(ode.matrix - pot));
        }
    }
    require(worst < b.equiv_tol,
            detail("pipelines disagree by %.2e (tol %.1e)", worst, b.equiv_tol));
    return detail("%d paths, generator ODE vs ordered exponential gap %.2e", runs, worst);
}

std::string check_gauge_invariance(const Budget& b) {
    std::mt19937 rng(1209);
    const EnergyEigenstate e = eigenstate({2, 3.0}, 1, +1);
    const Mat rho = marginal_state(e, Subsystem::L);
    const SpinOperators ops = subsystem_operators(2, Subsystem::L);
    const SampledPath path = sample(orange_slice(0.2, 1.1), std::min(b.node_cap, 200));
    TransportProblem base{rho, ops, path, Section::Auto, pi / 2.0, Mat()};
    const HolonomyResult ref = holonomy(base);

    Eigen::SelfAdjointEigenSolver<Mat> es(rho);
    const Mat frame = es.eigenvectors().rightCols(2);
    double worst = 0.0;
    for (int rep = 0; rep < 6; ++rep) {
        TransportProblem prob = base;
        prob.v0 = frame * random_unitary_local(rng, 5).topRows(2);
        worst = std::max(worst, max_abs(holonomy(prob).matrix - ref.matrix));
    }
    require(worst < 1e-9, detail("holonomy moved %.2e under a section change", worst));
    return detail("6 random initial frames, holonomy drift %.2e", worst);
}

std::string check_section_independence(const Budget& b) {
    const EnergyEigenstate e = eigenstate({2, 3.0}, 1, +1);
    const Mat rho = marginal_state(e, Subsystem::L);
    const SpinOperators ops = subsystem_operators(2, Subsystem::L);
    const PathSpec spec = rectangle_loop(0.5, 2.6, 0.0, 1.4);
    auto run = [&](Section sec, double lat) {
        TransportOptions o = b.ode;
        o.section = sec;
        o.switch_latitude = lat;
        return converged_holonomy(rho, ops, spec, o).matrix;
    };
    const Mat north = run(Section::North, pi / 2.0);
    const Mat south = run(Section::South, pi / 2.0);
    const Mat mid = run(Section::Auto, pi / 2.0);
    const Mat low = run(Section::Auto, 1.2);
    double worst = max_abs(north - south);
    worst = std::max(worst, max_abs(north - mid));
    worst = std::max(worst, max_abs(mid - low));
    require(worst < b.invariance_tol,
            detail("section choice shifted the holonomy by %.2e", worst));
    return detail("north, south and two switch latitudes agree within %.2e", worst);
}

std::string check_reparametrization(const Budget& b) {
    const EnergyEigenstate e = eigenstate({2, 3.0}, 1, +1);
    const Mat rho = marginal_state(e, Subsystem::L);
    const SpinOperators ops = subsystem_operators(2, Subsystem::L);
    const PathSpec spec = orange_slice(0.3, 1.6);
    const PathSpec warped =
        reparametrized(spec, [](double s) { return s * s * (3.0 - 2.0 * s); });
    const Mat a = converged_holonomy(rho, ops, spec, b.ode).matrix;
    const Mat bm = converged_holonomy(rho, ops, warped, b.ode).matrix;
    const double gap = max_abs(a - bm);
    const double tol = 20.0 * b.invariance_tol;
    require(gap < tol, detail("reparametrized run moved %.2e (tol %.1e)", gap, tol));
    return detail("smoothstep reparametrization shifts the holonomy by %.2e", gap);
}

std::string check_spectral_sum_rule(const Budget& b, ValidationLevel level) {
    double worst = 0.0;
    int evaluated = 0;
    for (int l = 1; l <= b.l_cap; ++l)
        for (double g : {0.8, 5.0})
            for (int two_mu = -(2 * l + 1); two_mu <= 2 * l + 1; two_mu += 2) {
                const int branch = is_extremal(l, two_mu) ? (two_mu > 0 ? +1 : -1) : +1;
                for (double omega : {0.3, 1.7, 3.0, 5.2}) {
                    const BetaPhases bp =
                        geometric_phase_closed_forms(l, two_mu, g, branch, omega);
                    require(bp.l_part.has_value() == bp.s_part.has_value(),
                            "marginal phases must be defined together");
                    if (!bp.l_part) continue;
                    ++evaluated;
                    worst = std::max(worst, circular_distance(*bp.l_part + *bp.s_part,
                                                              bp.j_part));
                }
            }
    require(worst < 1e-12, detail("sum rule residual %.2e", worst));
    if (level == ValidationLevel::Full) {
        const EnergyEigenstate e = eigenstate({2, 3.0}, 1, -1);
        const PathSpec spec = rectangle_loop(0.6, 2.2, 0.0, 1.3);
        const SampledPath loop = sample(spec, 3000);
        const BetaPhases bp = geometric_phase_closed_forms(2, 1, 3.0, -1, solid_angle(loop));
        const auto num_l = mixed_state_geometric_phase(
            marginal_state(e, Subsystem::L), subsystem_operators(2, Subsystem::L), loop);
        require(bp.l_part.has_value() && num_l.has_value(),
                "spectral phase undefined on the reference loop");
        const double gap = circular_distance(*num_l, *bp.l_part);
        require(gap < 5e-4, detail("transported spectral phase off by %.2e", gap));
        return detail("%d closed form points exact, transported check gap %.2e",
                      evaluated, gap);
    }
    return detail("%d closed form points satisfy the sum rule", evaluated);
}

std::string check_oracle_blocks(const Budget& b) {
    struct Case {
        int l, two_mu;
        double g;
    };
    const std::vector<Case> cases = {{1, 1, 3.0}, {2, 3, 20.0}};
    const double phi0 = 0.15, phi1 = 1.35;
    double worst = 0.0;
    for (const Case& c : cases) {
        const Figure8Params fp = figure8_params(c.l, c.two_mu, c.g, phi0, phi1);
        const Eigen::Index i0 = (c.two_mu - 1) / 2 + c.l;
        const Eigen::Index d = 2 * c.l + 1;
        const int n = std::min(b.node_cap, 300);

        auto embed = [&](const Mat& m2, Eigen::Index at, Eigen::Index dim) {
            Mat out = Mat::Zero(dim, dim);
            out.block(at, at, 2, 2) = m2;
            return out;
        };
        const SampledPath lune = sample(orange_slice(phi0, phi1), n);
        const SampledPath f8 = sample(figure_eight(phi0, phi1), n);
        worst = std::max(
            worst, max_abs(holonomy_via_potential(Subsystem::L, c.l, c.two_mu, c.g, lune)
                               .matrix -
                           embed(lune_holonomy_L(fp), i0, d)));
        worst = std::max(
            worst, max_abs(holonomy_via_potential(Subsystem::S, c.l, c.two_mu, c.g, lune)
                               .matrix -
                           lune_holonomy_S(fp)));
        worst = std::max(
            worst, max_abs(holonomy_via_potential(Subsystem::L, c.l, c.two_mu, c.g, f8)
                               .matrix -
                           embed(figure8_holonomy_L(fp), i0, d)));
        worst = std::max(
            worst, max_abs(holonomy_via_potential(Subsystem::S, c.l, c.two_mu, c.g, f8)
                               .matrix -
                           figure8_holonomy_S(fp)));
    }
    require(worst < 1e-7, detail("closed form blocks deviate by %.2e", worst));
    return detail("slice and figure-eight blocks match transport within %.2e", worst);
}

std::string check_support_restriction(const Budget&) {
    std::mt19937 rng(777);
    const int dim = 5;
    const Mat u = random_unitary_local(rng, dim);
    Mat spectrum = Mat::Zero(dim, dim);
    spectrum(0, 0) = 0.55;
    spectrum(1, 1) = 0.45;
    const Mat rho = u * spectrum * u.adjoint();
    const Mat proj = u.leftCols(2) * u.leftCols(2).adjoint();

    const Mat rhs = proj * random_antihermitian_local(rng, dim) * proj;
    const Mat x = sylvester_on_support(rho, rhs);
    const double res = max_abs(rho * x + x * rho - rhs);
    require(res < 1e-10, detail("support solve residual %.2e", res));
    require(max_abs(x - proj * x * proj) < 1e-10, "generator leaves the support block");

    bool rejected = false;
    try {
        sylvester_on_support(rho, random_antihermitian_local(rng, dim));
    } catch (const NumericalInconsistency&) {
        rejected = true;
    }
    require(rejected, "kernel leakage was not rejected");
    return detail("support solve residual %.2e, kernel leakage rejected", res);
}

std::string check_path_io(const Budget&) {
    int roundtrips = 0;
    auto roundtrip = [&](const PathSpec& spec) {
        ++roundtrips;
        const PathSpec back = parse_path_file(serialize_path_spec(spec));
        const SampledPath a = sample(spec, 60);
        const SampledPath bs = sample(back, 60);
        require(a.nodes.size() == bs.nodes.size(), "round trip changed the node count");
        double worst = 0.0;
        for (std::size_t k = 0; k < a.nodes.size(); ++k) {
            worst = std::max(worst, std::abs(a.nodes[k].theta - bs.nodes[k].theta));
            worst = std::max(worst, std::abs(a.nodes[k].phi - bs.nodes[k].phi));
        }
        require(worst < 1e-9, detail("round trip moved nodes by %.2e", worst));
    };
    roundtrip(orange_slice(0.2, 1.7));
    roundtrip(figure_eight(0.4, 2.1));

    const PathSpec preset =
        parse_path_file("{\"preset\": \"figure-8\", \"phi0\": 0.0, \"phi1\": 1.0}");
    require(preset.segments.size() == 8, "figure-8 preset must have eight segments");

    auto expect_reject = [](const std::string& text) {
        try {
            parse_path_file(text);
        } catch (const InvalidInput&) {
            return;
        }
        throw NumericalInconsistency("malformed path text was accepted");
    };
    expect_reject("not json at all");
    expect_reject("{\"preset\": \"lemniscate\"}");
    expect_reject(
        "{\"segments\": [{\"kind\": \"meridian\", \"fixed\": 0.0, \"from\": 0.0, "
        "\"to\": 4.5}]}");
    expect_reject(
        "{\"segments\": [{\"kind\": \"meridian\", \"fixed\": 0.0, \"from\": 0.2, "
        "\"to\": 1.0}, {\"kind\": \"parallel\", \"fixed\": 2.0, \"from\": 0.0, "
        "\"to\": 1.0}]}");
    return detail("%d round trips stable, malformed inputs rejected", roundtrips);
}

std::string check_trace_classification(const Budget&) {
    const SweepTable t = compute_sweep(figure_sweep_spec("fig2"));
    spot_check_sweep(t, 21, 1e-6);
    int pi_cells = 0, nodal = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < t.spec.gs.size(); ++i)
        for (std::size_t k = 0; k < t.delta_phi.size(); k += 8) {
            const double xi = t.columns[i][k];
            const SampledPath path = sample(figure_eight(0.0, t.delta_phi[k]), 300);
            const HolonomyResult h = holonomy_via_potential(
                Subsystem::L, t.spec.l, t.spec.two_mu, t.spec.gs[i], path);
            worst = std::max(worst, std::abs(std::real(h.trace) - xi));
            worst = std::max(worst, std::abs(std::imag(h.trace)));
            if (std::abs(h.trace) < 1e-9) {
                ++nodal;
                continue;
            }
            if (std::abs(xi) < 1e-6) continue;
            const double target = xi > 0.0 ? 0.0 : pi;
            if (target == pi) ++pi_cells;
            require(h.phase_gamma.has_value(), "trace phase undefined off the nodal band");
            worst = std::max(worst, circular_distance(*h.phase_gamma, target));
        }
    require(worst < 1e-6, detail("classification residual %.2e", worst));
    require(pi_cells > 0, "no half-turn cells found in the sweep");
    return detail("204 grid cells classified, %d at half turn, %d nodal, residual %.2e",
                  pi_cells, nodal, worst);
}

std::string check_overlap_additivity(const Budget&) {
    const SweepTable t = compute_sweep(figure_sweep_spec("fig3"));
    spot_check_sweep(t, 21, 1e-6);
    double worst = 0.0;
    int checked = 0, skipped = 0;
    for (std::size_t i = 0; i < t.spec.gs.size(); ++i)
        for (std::size_t k = 0; k < t.delta_phi.size(); k += 8) {
            const double dphi = t.delta_phi[k];
            const AdditivityReport rep = orange_slice_phases(t.spec.l, t.spec.two_mu,
                                                             t.spec.gs[i], 0.0, dphi);
            require(std::abs(rep.zeta - t.columns[i][k]) < 1e-12,
                    "tabulated overlap product drifts from the report");
            const SampledPath path = sample(orange_slice(0.0, dphi), 300);
            const cplx tl = holonomy_via_potential(Subsystem::L, t.spec.l, t.spec.two_mu,
                                                   t.spec.gs[i], path)
                                .trace;
            const cplx ts = holonomy_via_potential(Subsystem::S, t.spec.l, t.spec.two_mu,
                                                   t.spec.gs[i], path)
                                .trace;
            if (std::abs(tl) < 5e-3 || std::abs(ts) < 5e-3 || !rep.delta_gamma) {
                ++skipped;
                continue;
            }
            ++checked;
            const double dg_num =
                wrap_angle(*rep.gamma_j - std::arg(tl) - std::arg(ts));
            worst = std::max(worst, circular_distance(dg_num, *rep.delta_gamma));
            const double to_flat = std::min(circular_distance(dg_num, 0.0),
                                            circular_distance(dg_num, pi));
            worst = std::max(worst, to_flat);
        }
    require(worst < 1e-6, detail("additivity residual %.2e", worst));
    return detail("%d grid cells verified (%d inside the nodal band), residual %.2e",
                  checked, skipped, worst);
}

std::string check_window_recurrence(const Budget&) {
    struct Point {
        int l, two_mu;
    };
    const std::vector<Point> points = {{1, 1}, {2, 1}, {3, 3}};
    int verified = 0;
    for (const Point& pt : points) {
        const double w = w_factor(pt.l, pt.two_mu);
        for (int k = 0; k < 24; ++k) {
            const double g = 0.5 * std::pow(240.0, k / 23.0);
            const double cc = concurrence(pt.l, pt.two_mu, g);
            const double prod_l = w * cc;
            const double frac_l = prod_l - std::floor(prod_l);
            const double xi_l = figure8_trace(pi, pi * prod_l);
            if (std::min(std::abs(frac_l - 0.25), std::abs(frac_l - 0.75)) > 1e-9 &&
                std::abs(xi_l) > 1e-12) {
                const bool inside = frac_l > 0.25 && frac_l < 0.75;
                require((xi_l < 0.0) == inside, "orbital half-turn window misaligned");
                ++verified;
            }
            const double frac_s = cc - std::floor(cc);
            const double xi_s = figure8_trace(pi, pi * cc);
            if (std::min(std::abs(frac_s - 0.25), std::abs(frac_s - 0.75)) > 1e-9 &&
                std::abs(xi_s) > 1e-12) {
                const bool inside = frac_s > 0.25 && frac_s < 0.75;
                require((xi_s < 0.0) == inside, "spin half-turn window misaligned");
                ++verified;
            }
        }
    }
    return detail("%d coupling points follow the unit-interval window rule", verified);
}

std::string check_isometry_watermark(const Budget&) {
    const double peak = peak_isometry_residual();
    require(peak < 1e-8, detail("peak isometry defect %.2e", peak));
    return detail("largest isometry defect of the run %.2e", peak);
}

} // namespace

std::vector<ValidationCheck> run_validation(ValidationLevel level,
                                            const ValidationHooks& hooks) {
    const Budget b = budget_for(level);
    std::vector<ValidationCheck> out;
    auto run = [&](const char* name, const std::function<std::string()>& body) {
        ValidationCheck c;
        c.name = name;
        try {
            c.details = body();
            c.passed = true;
        } catch (const std::exception& ex) {
            c.passed = false;
            c.details = ex.what();
        }
        out.push_back(std::move(c));
    };

    run("spin-algebra", [&] { return check_spin_algebra(b); });
    run("eigensystem", [&] { return check_eigensystem(b); });
    run("rotation-factorization", [&] { return check_rotation_factorization(b); });
    run("winding-phase", [&] { return check_winding_phase(b, level); });
    run("method-equivalence", [&] { return check_method_equivalence(b, level, hooks); });
    run("gauge-invariance", [&] { return check_gauge_invariance(b); });
    run("section-independence", [&] { return check_section_independence(b); });
    run("reparametrization", [&] { return check_reparametrization(b); });
    run("spectral-sum-rule", [&] { return check_spectral_sum_rule(b, level); });
    run("oracle-blocks", [&] { return check_oracle_blocks(b); });
    run("support-restriction", [&] { return check_support_restriction(b); });
    run("path-io", [&] { return check_path_io(b); });
    if (level == ValidationLevel::Full) {
        run("trace-classification", [&] { return check_trace_classification(b); });
        run("overlap-additivity", [&] { return check_overlap_additivity(b); });
        run("window-recurrence", [&] { return check_window_recurrence(b); });
    }
    run("isometry-watermark", [&] { return check_isometry_watermark(b); });
    return out;
}

bool all_passed(const std::vector<ValidationCheck>& checks) {
    for (const ValidationCheck& c : checks)
        if (!c.passed) return false;
    return !checks.empty();
}

std::string validation_report(const std::vector<ValidationCheck>& checks) {
    std::string out;
    int passed = 0;
    for (const ValidationCheck& c : checks) {
        out += c.passed ? "PASS " : "FAIL ";
        out += c.name + ": " + c.details + "\n";
        if (c.passed) ++passed;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%d/%zu checks passed\n", passed, checks.size());
    out += buf;
    return out;
}

} // namespace uhl

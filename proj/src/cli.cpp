#include "uhl/cli.hpp"

#include "uhl/atom.hpp"
#include "uhl/figures.hpp"
#include "uhl/oracles.hpp"
#include "uhl/pathfile.hpp"
#include "uhl/transport.hpp"
#include "uhl/validation.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace uhl {

namespace {

struct RunConfig {
    int l = 1;
    int mu2 = 1;
    double g = 3.0;
    std::string branch = "+";
    std::string subsystem = "J";
    std::string method = "ode";
    std::string path_file;
    std::string preset;
    double phi0 = 0.0;
    double phi1 = pi / 2.0;
    int steps = 200;
    std::string section = "auto";
    std::string format = "summary";
};

std::string fmt12(double x) {
    if (!std::isfinite(x)) throw NumericalInconsistency("non-finite value in output");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.11e", x);
    return buf;
}

std::string phase_or_undefined(const std::optional<double>& p) {
    return p ? fmt12(*p) : std::string("undefined");
}

Section section_of(const std::string& name) {
    if (name == "north") return Section::North;
    if (name == "south") return Section::South;
    return Section::Auto;
}

Subsystem subsystem_of(const std::string& name) {
    if (name == "L") return Subsystem::L;
    if (name == "S") return Subsystem::S;
    return Subsystem::J;
}

PathSpec resolve_path(const RunConfig& cfg) {
    if (!cfg.path_file.empty()) {
        std::ifstream in(cfg.path_file);
        if (!in) throw InvalidInput("cannot read path file '" + cfg.path_file + "'");
        std::ostringstream text;
        text << in.rdbuf();
        return parse_path_file(text.str());
    }
    if (cfg.preset == "orange-slice") return orange_slice(cfg.phi0, cfg.phi1);
    if (cfg.preset == "figure-8") return figure_eight(cfg.phi0, cfg.phi1);
    throw InvalidInput("give either --path <file> or --preset orange-slice|figure-8");
}

HolonomyResult wrap_oracle(const Mat& m, Subsystem sub, bool closed) {
    HolonomyResult h;
    h.matrix = m;
    h.subsystem = sub;
    h.method = Method::Oracle;
    h.trace = m.trace();
    h.phase_gamma = arg_checked(h.trace);
    h.isometry_residual = max_abs(m * m.adjoint() * m - m);
    h.steps_per_segment = 0;
    h.converged = true;
    if (closed && sub == Subsystem::J) h.phase_beta = h.phase_gamma;
    return h;
}

HolonomyResult oracle_holonomy(const RunConfig& cfg, const EnergyEigenstate& e,
                               Subsystem sub, const SampledPath& sp) {
    if (e.extremal) {
        const int sign = e.two_mu > 0 ? +1 : -1;
        const ExtremalHolonomies ex = extremal_holonomies(cfg.l, sign, sp);
        const Mat m = sub == Subsystem::L ? ex.l_part
                      : sub == Subsystem::S ? ex.s_part
                                            : ex.joint;
        HolonomyResult h = wrap_oracle(m, sub, sp.closed);
        if (sp.closed) h.phase_beta = h.phase_gamma;
        return h;
    }
    if (sub == Subsystem::J)
        return wrap_oracle(j_holonomy_closed_form(e, sp), sub, sp.closed);
    if (cfg.preset.empty())
        throw InvalidInput(
            "closed forms for the marginals cover the bundled presets only");
    const Figure8Params fp = figure8_params(cfg.l, cfg.mu2, cfg.g, cfg.phi0, cfg.phi1);
    Mat m;
    if (sub == Subsystem::L) {
        const Mat block = cfg.preset == "orange-slice" ? lune_holonomy_L(fp)
                                                       : figure8_holonomy_L(fp);
        const Eigen::Index i0 = (cfg.mu2 - 1) / 2 + cfg.l;
        m = Mat::Zero(2 * cfg.l + 1, 2 * cfg.l + 1);
        m.block(i0, i0, 2, 2) = block;
    } else {
        m = cfg.preset == "orange-slice" ? lune_holonomy_S(fp) : figure8_holonomy_S(fp);
    }
    HolonomyResult h = wrap_oracle(m, sub, sp.closed);
    if (sp.closed) {
        const BetaPhases bp = geometric_phase_closed_forms(
            cfg.l, cfg.mu2, cfg.g, cfg.branch == "+" ? +1 : -1, solid_angle(sp));
        h.phase_beta = sub == Subsystem::L ? bp.l_part : bp.s_part;
    }
    return h;
}

const char* method_name(Method m) {
    switch (m) {
        case Method::Ode: return "ode";
        case Method::Potential: return "potential";
        default: return "oracle";
    }
}

void print_result(std::ostream& out, const RunConfig& cfg, const Mat& rho,
                  const SpinOperators& ops, const SampledPath& sp,
                  const HolonomyResult& h) {
    const std::optional<double> gamma = wilson_phase(h);
    const std::optional<double> phi_uhl = amplitude_phase(rho, ops, sp, h.matrix);
    const bool csv = cfg.format == "csv";
    const std::string beta = sp.closed ? phase_or_undefined(h.phase_beta)
                                       : std::string("undefined");
    if (csv) {
        out << "method," << method_name(h.method) << "\n";
        out << "subsystem," << cfg.subsystem << "\n";
        out << "closed," << (sp.closed ? 1 : 0) << "\n";
        out << "trace_abs," << fmt12(std::abs(h.trace)) << "\n";
        out << "gamma," << phase_or_undefined(gamma) << "\n";
        out << "phi_uhl," << phase_or_undefined(phi_uhl) << "\n";
        out << "beta," << beta << "\n";
        out << "isometry_residual," << fmt12(h.isometry_residual) << "\n";
        out << "steps_per_segment," << h.steps_per_segment << "\n";
        out << "converged," << (h.converged ? 1 : 0) << "\n";
        for (Eigen::Index r = 0; r < h.matrix.rows(); ++r)
            for (Eigen::Index c = 0; c < h.matrix.cols(); ++c) {
                out << "matrix_re_" << r << "_" << c << ","
                    << fmt12(std::real(h.matrix(r, c))) << "\n";
                out << "matrix_im_" << r << "_" << c << ","
                    << fmt12(std::imag(h.matrix(r, c))) << "\n";
            }
        return;
    }
    out << "== " << method_name(h.method) << " holonomy, subsystem " << cfg.subsystem
        << " ==\n";
    char buf[64];
    for (Eigen::Index r = 0; r < h.matrix.rows(); ++r) {
        std::string line = "  ";
        for (Eigen::Index c = 0; c < h.matrix.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "% .6f%+.6fi  ", std::real(h.matrix(r, c)),
                          std::imag(h.matrix(r, c)));
            line += buf;
        }
        out << line << "\n";
    }
    out << "|Tr| = " << fmt12(std::abs(h.trace)) << "\n";
    out << "gamma = " << phase_or_undefined(gamma) << "\n";
    out << "phi_uhl = " << phase_or_undefined(phi_uhl) << "\n";
    out << "beta = " << beta << "\n";
    out << "isometry residual = " << fmt12(h.isometry_residual) << "\n";
    if (h.method != Method::Oracle)
        out << "steps per segment = " << h.steps_per_segment
            << (h.converged ? " (converged)" : " (not converged)") << "\n";
}

int cmd_holonomy(const RunConfig& cfg, std::ostream& out) {
    if (cfg.steps < 2) throw InvalidInput("--steps must be at least 2");
    if (cfg.format == "svg")
        throw InvalidInput("holonomy output has no svg form; use csv or summary");
    require_valid_mu(cfg.l, cfg.mu2);

    const EnergyEigenstate e =
        eigenstate({cfg.l, cfg.g}, cfg.mu2, cfg.branch == "+" ? +1 : -1);
    const Subsystem sub = subsystem_of(cfg.subsystem);
    const Mat rho = subsystem_state(e, sub);
    const SpinOperators ops = subsystem_operators(cfg.l, sub);
    const PathSpec spec = resolve_path(cfg);
    const SampledPath sp = sample(spec, cfg.steps);

    TransportOptions opts{cfg.steps, 5, 1e-8, section_of(cfg.section), pi / 2.0};
    std::vector<HolonomyResult> results;
    const bool all = cfg.method == "all";
    if (all || cfg.method == "ode")
        results.push_back(converged_holonomy(rho, ops, spec, opts, sub));
    if (cfg.method == "potential" || (all && sub != Subsystem::J && !e.extremal)) {
        TransportOptions popts = opts;
        popts.tol = 1e-7;
        HolonomyResult h =
            converged_holonomy_via_potential(sub, cfg.l, cfg.mu2, cfg.g, spec, popts);
        if (sp.closed && !h.phase_beta)
            h.phase_beta = mixed_state_geometric_phase(rho, ops, sp);
        results.push_back(h);
    }
    if (cfg.method == "oracle" ||
        (all && (sub == Subsystem::J || e.extremal || !cfg.preset.empty())))
        results.push_back(oracle_holonomy(cfg, e, sub, sp));

    for (std::size_t i = 0; i < results.size(); ++i) {
        if (i > 0 && cfg.format != "csv") out << "\n";
        print_result(out, cfg, rho, ops, sp, results[i]);
    }
    for (std::size_t i = 0; i + 1 < results.size(); ++i)
        for (std::size_t j = i + 1; j < results.size(); ++j) {
            const double gap = max_abs(results[i].matrix - results[j].matrix);
            if (cfg.format == "csv")
                out << "gap_" << method_name(results[i].method) << "_"
                    << method_name(results[j].method) << "," << fmt12(gap) << "\n";
            else
                out << "max |" << method_name(results[i].method) << " - "
                    << method_name(results[j].method) << "| = " << fmt12(gap) << "\n";
        }
    return 0;
}

int cmd_figure(const std::string& which, const std::string& out_dir, std::ostream& out) {
    const SweepTable table = compute_sweep(figure_sweep_spec(which));
    spot_check_sweep(table);

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw InvalidInput("cannot create output directory '" + out_dir + "'");

    const fs::path csv_path = fs::path(out_dir) / (which + ".csv");
    const fs::path svg_path = fs::path(out_dir) / (which + ".svg");
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw InvalidInput("cannot write '" + csv_path.string() + "'");
    csv << sweep_csv(table);
    csv.close();
    if (!csv) throw InvalidInput("failed while writing '" + csv_path.string() + "'");
    std::ofstream svg(svg_path, std::ios::binary);
    if (!svg) throw InvalidInput("cannot write '" + svg_path.string() + "'");
    svg << sweep_svg(table);
    svg.close();
    if (!svg) throw InvalidInput("failed while writing '" + svg_path.string() + "'");

    out << "wrote " << csv_path.string() << "\n";
    out << "wrote " << svg_path.string() << "\n";
    return 0;
}

int cmd_validate(const std::string& level, bool drill, std::ostream& out) {
    ValidationHooks hooks;
    if (drill) {
        hooks.orbital_potential_tweak = [](Mat& at, Mat&) {
            at(0, 1) += cplx(1e-3, 0.0);
            at(1, 0) += cplx(1e-3, 0.0);
        };
        out << "drill: orbital potential perturbed by 1e-3, expect a red line\n";
    }
    const auto checks = run_validation(
        level == "full" ? ValidationLevel::Full : ValidationLevel::Quick, hooks);
    out << validation_report(checks);
    return all_passed(checks) ? 0 : 1;
}

int cmd_paths_check(const RunConfig& cfg, std::ostream& out) {
    if (cfg.steps < 2) throw InvalidInput("--steps must be at least 2");
    const PathSpec spec = resolve_path(cfg);
    const SampledPath sp = sample(spec, cfg.steps);
    out << "segments," << spec.segments.size() << "\n";
    out << "nodes," << sp.nodes.size() << "\n";
    out << "closed," << (sp.closed ? "yes" : "no") << "\n";
    out << "solid_angle," << fmt12(solid_angle(sp)) << "\n";
    out << "theta_start," << fmt12(sp.nodes.front().theta) << "\n";
    out << "phi_start," << fmt12(sp.nodes.front().phi) << "\n";
    out << "theta_end," << fmt12(sp.nodes.back().theta) << "\n";
    out << "phi_end," << fmt12(sp.nodes.back().phi) << "\n";
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Uhlmann holonomies and mixed-state geometric phases for a "
                 "spin-orbit coupled level in a slowly steered field"};
    app.require_subcommand(1);

    RunConfig cfg;
    auto add_run_flags = [&](CLI::App* sub, bool full) {
        CLI::Option* path = sub->add_option("--path", cfg.path_file,
                                            "JSON path description file");
        CLI::Option* preset =
            sub->add_option("--preset", cfg.preset, "bundled loop: orange-slice|figure-8")
                ->check(CLI::IsMember({"orange-slice", "figure-8"}));
        path->excludes(preset);
        sub->add_option("--phi0", cfg.phi0, "preset start azimuth (radians)");
        sub->add_option("--phi1", cfg.phi1, "preset end azimuth (radians)");
        sub->add_option("--steps", cfg.steps, "nodes per segment");
        if (!full) return;
        sub->add_option("--l", cfg.l, "orbital quantum number")
            ->check(CLI::Range(1, 64));
        sub->add_option("--mu2", cfg.mu2, "magnetization numerator; mu = mu2/2");
        sub->add_option("--g", cfg.g, "coupling strength");
        sub->add_option("--branch", cfg.branch, "energy branch")
            ->check(CLI::IsMember({"+", "-"}));
        sub->add_option("--subsystem", cfg.subsystem, "L, S or J")
            ->check(CLI::IsMember({"L", "S", "J"}));
        sub->add_option("--method", cfg.method, "ode|potential|oracle|all")
            ->check(CLI::IsMember({"ode", "potential", "oracle", "all"}));
        sub->add_option("--section", cfg.section, "frame section: north|south|auto")
            ->check(CLI::IsMember({"north", "south", "auto"}));
        sub->add_option("--format", cfg.format, "csv|svg|summary")
            ->check(CLI::IsMember({"csv", "svg", "summary"}));
    };

    int code = 0;

    CLI::App* holo = app.add_subcommand("holonomy", "transport one loop or arc");
    add_run_flags(holo, true);
    holo->callback([&] { code = cmd_holonomy(cfg, out); });

    CLI::App* figure = app.add_subcommand("figure", "write a bundled sweep as CSV and SVG");
    std::string which = "fig2";
    std::string out_dir = ".";
    figure->add_option("which", which, "fig2|fig3")
        ->required()
        ->check(CLI::IsMember({"fig2", "fig3"}));
    figure->add_option("--out", out_dir, "output directory");
    figure->callback([&] { code = cmd_figure(which, out_dir, out); });

    CLI::App* validate = app.add_subcommand("validate", "run the consistency suite");
    std::string level = "quick";
    bool drill = false;
    validate->add_option("level", level, "quick|full")
        ->check(CLI::IsMember({"quick", "full"}));
    validate->add_flag("--drill", drill,
                       "perturb the orbital potential to prove the suite can go red");
    validate->callback([&] { code = cmd_validate(level, drill, out); });

    CLI::App* paths = app.add_subcommand("paths", "path file utilities");
    paths->require_subcommand(1);
    CLI::App* check = paths->add_subcommand("check", "parse, validate and summarize");
    add_run_flags(check, false);
    check->callback([&] { code = cmd_paths_check(cfg, out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const InvalidInput& e) {
        err << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const IntegratorFailure& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const NumericalInconsistency& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return code;
}

} // namespace uhl

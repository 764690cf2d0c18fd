#include "uhl/figures.hpp"

#include "uhl/transport.hpp"

#include <cmath>
#include <cstdio>

namespace uhl {

namespace {

std::string fmt12(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.11e", x);
    return buf;
}

std::string fmt_g(double g) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", g);
    return buf;
}

double sweep_value(const FigureSpec& spec, double g, double dphi) {
    const double cc = concurrence(spec.l, spec.two_mu, g);
    if (spec.trace_sweep)
        return figure8_trace(dphi, pi * w_factor(spec.l, spec.two_mu) * cc);
    return lune_overlap(dphi, pi * w_factor(spec.l, spec.two_mu) * cc) *
           lune_overlap(dphi, pi * cc);
}

// Numerical counterpart of sweep_value through the gauge-potential pipeline.
double sweep_value_numeric(const FigureSpec& spec, double g, double dphi) {
    const int n = 400;
    if (spec.trace_sweep) {
        const SampledPath path = sample(figure_eight(0.0, dphi), n);
        const HolonomyResult h =
            holonomy_via_potential(Subsystem::L, spec.l, spec.two_mu, g, path);
        return std::real(h.trace);
    }
    const SampledPath path = sample(orange_slice(0.0, dphi), n);
    const cplx tl =
        holonomy_via_potential(Subsystem::L, spec.l, spec.two_mu, g, path).trace;
    const cplx ts =
        holonomy_via_potential(Subsystem::S, spec.l, spec.two_mu, g, path).trace;
    const double ov_l = 0.5 * std::real(tl * std::polar(1.0, spec.two_mu * dphi));
    const double ov_s = 0.5 * std::real(ts);
    return ov_l * ov_s;
}

struct PlotFrame {
    double x0 = 90, x1 = 820, y0 = 470, y1 = 40;  // pixel corners (y grows down)
    double xmin = 0, xmax = 2 * pi, ymin = 0, ymax = 1;

    double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * (x1 - x0); }
    double py(double y) const { return y0 + (y - ymin) / (ymax - ymin) * (y1 - y0); }
};

const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

} // namespace

FigureSpec figure_sweep_spec(const std::string& which) {
    if (which == "fig2")
        return {"fig2", 3, 3, {3.0, 13.0, 37.0, 50.0}, true};
    if (which == "fig3")
        return {"fig3", 2, 1, {3.0, 20.0, 50.0}, false};
    throw InvalidInput("figure_sweep_spec: unknown sweep '" + which +
                       "' (expected fig2 or fig3)");
}

SweepTable compute_sweep(const FigureSpec& spec, int samples) {
    if (samples < 2)
        throw InvalidInput("compute_sweep: need at least 2 samples");
    require_valid_mu(spec.l, spec.two_mu);
    if (is_extremal(spec.l, spec.two_mu))
        throw InvalidInput("compute_sweep: extremal weights have no two-level block");

    SweepTable t;
    t.spec = spec;
    t.delta_phi.resize(samples);
    for (int k = 0; k < samples; ++k)
        t.delta_phi[k] = 2.0 * pi * k / (samples - 1);
    t.columns.resize(spec.gs.size());
    for (std::size_t i = 0; i < spec.gs.size(); ++i) {
        t.columns[i].resize(samples);
        for (int k = 0; k < samples; ++k)
            t.columns[i][k] = sweep_value(spec, spec.gs[i], t.delta_phi[k]);
    }
    return t;
}

std::string sweep_csv(const SweepTable& table) {
    const char* tag = table.spec.trace_sweep ? "xi_g" : "zeta_g";
    std::string out = "delta_phi";
    for (double g : table.spec.gs)
        out += "," + std::string(tag) + fmt_g(g);
    out += "\n";
    for (std::size_t k = 0; k < table.delta_phi.size(); ++k) {
        out += fmt12(table.delta_phi[k]);
        for (const auto& col : table.columns)
            out += "," + fmt12(col[k]);
        out += "\n";
    }
    return out;
}

std::string sweep_svg(const SweepTable& table) {
    PlotFrame f;
    for (const auto& col : table.columns)
        for (double v : col) {
            f.ymin = std::min(f.ymin, v);
            f.ymax = std::max(f.ymax, v);
        }
    const double pad = 0.08 * (f.ymax - f.ymin + 1e-12);
    f.ymin -= pad;
    f.ymax += pad;

    std::string s;
    char buf[256];
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 880 520\" "
         "font-family=\"sans-serif\" font-size=\"14\">\n";
    s += "<rect width=\"880\" height=\"520\" fill=\"white\"/>\n";

    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" "
                  "fill=\"none\" stroke=\"#333\"/>\n",
                  f.x0, f.y1, f.x1 - f.x0, f.y0 - f.y1);
    s += buf;

    for (int k = 0; k <= 4; ++k) {
        const double x = 0.5 * pi * k;
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                      "stroke=\"#333\"/>\n<text x=\"%.1f\" y=\"%.1f\" "
                      "text-anchor=\"middle\">%.3f</text>\n",
                      f.px(x), f.y0, f.px(x), f.y0 + 6.0, f.px(x), f.y0 + 24.0, x);
        s += buf;
    }
    const double ystep = (f.ymax - f.ymin) / 6.0;
    for (int k = 0; k <= 6; ++k) {
        const double y = f.ymin + ystep * k;
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                      "stroke=\"#333\"/>\n<text x=\"%.1f\" y=\"%.1f\" "
                      "text-anchor=\"end\">%.2f</text>\n",
                      f.x0 - 6.0, f.py(y), f.x0, f.py(y), f.x0 - 10.0, f.py(y) + 5.0, y);
        s += buf;
    }
    if (f.ymin < 0.0 && f.ymax > 0.0) {
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                      "stroke=\"#bbb\" stroke-dasharray=\"4 4\"/>\n",
                      f.x0, f.py(0.0), f.x1, f.py(0.0));
        s += buf;
    }

    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"505\" text-anchor=\"middle\">slice width "
                  "(rad)</text>\n",
                  0.5 * (f.x0 + f.x1));
    s += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"24\" y=\"%.1f\" text-anchor=\"middle\" "
                  "transform=\"rotate(-90 24 %.1f)\">%s</text>\n",
                  0.5 * (f.y0 + f.y1), 0.5 * (f.y0 + f.y1),
                  table.spec.trace_sweep ? "figure-eight trace" : "overlap product");
    s += buf;

    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        const char* color = palette[i % 5];
        std::string pts;
        for (std::size_t k = 0; k < table.delta_phi.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.1f,%.1f ", f.px(table.delta_phi[k]),
                          f.py(table.columns[i][k]));
            pts += buf;
        }
        s += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.6\" points=\"" + pts + "\"/>\n";

        for (std::size_t k = 0; k + 1 < table.delta_phi.size(); ++k) {
            const double a = table.columns[i][k], b = table.columns[i][k + 1];
            if (a == 0.0 || a * b >= 0.0)
                continue;
            const double x = table.delta_phi[k] +
                             (table.delta_phi[k + 1] - table.delta_phi[k]) * a / (a - b);
            std::snprintf(buf, sizeof buf,
                          "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"4\" fill=\"none\" "
                          "stroke=\"%s\" stroke-width=\"1.4\"/>\n",
                          f.px(x), f.py(0.0), color);
            s += buf;
        }

        const double ly = f.y1 + 22.0 + 20.0 * static_cast<double>(i);
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                      "stroke=\"%s\" stroke-width=\"2\"/>\n<text x=\"%.1f\" "
                      "y=\"%.1f\">g=%s</text>\n",
                      f.x1 - 130.0, ly, f.x1 - 100.0, ly, color, f.x1 - 92.0, ly + 5.0,
                      fmt_g(table.spec.gs[i]).c_str());
        s += buf;
    }
    s += "</svg>\n";
    return s;
}

void spot_check_sweep(const SweepTable& table, int points, double tol) {
    const std::size_t n = table.delta_phi.size();
    if (n < 2 || points < 1)
        throw InvalidInput("spot_check_sweep: empty table or no points");
    for (int p = 0; p < points; ++p) {
        const std::size_t k = (n - 1) * p / (points > 1 ? points - 1 : 1);
        for (std::size_t i = 0; i < table.spec.gs.size(); ++i) {
            const double numeric =
                sweep_value_numeric(table.spec, table.spec.gs[i], table.delta_phi[k]);
            const double dev = std::abs(numeric - table.columns[i][k]);
            if (dev > tol) {
                char msg[160];
                std::snprintf(msg, sizeof msg,
                              "spot_check_sweep: %s g=%g delta_phi=%.6f deviates by "
                              "%.3e (tol %.1e)",
                              table.spec.name.c_str(), table.spec.gs[i],
                              table.delta_phi[k], dev, tol);
                throw NumericalInconsistency(msg);
            }
        }
    }
}

} // namespace uhl

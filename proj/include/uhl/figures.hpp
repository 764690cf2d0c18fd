#pragma once

#include "uhl/oracles.hpp"

#include <string>
#include <vector>

namespace uhl {

// One bundled parameter sweep: a figure-eight trace or a slice overlap
// product against the slice width, with one column per coupling strength.
struct FigureSpec {
    std::string name;
    int l = 0;
    int two_mu = 0;
    std::vector<double> gs;
    bool trace_sweep = true;  // true: figure-eight trace, false: overlap product
};

// The two bundled sweeps are published under the names "fig2" (figure-eight
// trace, l=3, mu=3/2) and "fig3" (overlap product, l=2, mu=1/2).
FigureSpec figure_sweep_spec(const std::string& which);

struct SweepTable {
    FigureSpec spec;
    std::vector<double> delta_phi;             // uniform samples of [0, 2 pi]
    std::vector<std::vector<double>> columns;  // columns[i] pairs with spec.gs[i]
};

SweepTable compute_sweep(const FigureSpec& spec, int samples = 401);

// Comma-separated table with a header row, 12 significant digits, LF endings.
std::string sweep_csv(const SweepTable& table);

// Self-contained line chart: axes, one polyline per column, a legend, and
// markers on the zero crossings of each curve.
std::string sweep_svg(const SweepTable& table);

// Recomputes evenly spread rows through the transport pipeline and throws
// NumericalInconsistency when any recomputed value deviates by more than tol.
void spot_check_sweep(const SweepTable& table, int points = 9, double tol = 1e-6);

} // namespace uhl

#pragma once

#include "uhl/linalg.hpp"

#include <functional>
#include <string>
#include <vector>

namespace uhl {

// Quick keeps every check at l <= 2 and at most 500 nodes per segment; Full
// raises the caps and adds the sweep grids and the classification scans.
enum class ValidationLevel { Quick, Full };

struct ValidationCheck {
    std::string name;
    bool passed = false;
    std::string details;
};

// Seams for fault injection drills. orbital_potential_tweak edits the orbital
// gauge potential components in place before every ordered-exponential step of
// the method equivalence check; the check must go red under any tweak that
// moves the holonomy past its tolerance.
struct ValidationHooks {
    std::function<void(Mat& a_theta, Mat& a_phi)> orbital_potential_tweak;
};

// Runs the internal consistency suite. A check that throws is reported as
// failed with the exception text; the run itself always returns.
std::vector<ValidationCheck> run_validation(ValidationLevel level,
                                            const ValidationHooks& hooks = {});

bool all_passed(const std::vector<ValidationCheck>& checks);

// One line per check: "PASS <name>: <details>" or "FAIL <name>: <details>",
// followed by a summary line "<passed>/<total> checks passed".
std::string validation_report(const std::vector<ValidationCheck>& checks);

} // namespace uhl

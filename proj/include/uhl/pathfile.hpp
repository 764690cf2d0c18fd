#pragma once

#include <string>

#include "uhl/paths.hpp"

namespace uhl {

// Parse a JSON path document. Two top-level shapes are accepted:
//   {"preset": "orange-slice" | "figure-8", "phi0": <rad>, "phi1": <rad>}
//   {"segments": [{"kind": "meridian", "fixed": <phi>, "from": <theta>, "to": <theta>},
//                 {"kind": "parallel", "fixed": <theta>, "from": <phi>, "to": <phi>},
//                 {"kind": "custom", "nodes": [[theta, phi], ...]}, ...]}
// Angles are radians. The parsed spec is validated (theta range, continuity).
PathSpec parse_path_file(const std::string& text);

// Inverse of parse_path_file for specs whose segments are meridians,
// parallels, or node-backed custom segments. Map-only custom segments are
// resampled onto 129 nodes before serialization.
std::string serialize_path_spec(const PathSpec& spec);

} // namespace uhl

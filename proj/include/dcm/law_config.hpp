#pragma once

#include <string>

#include <json.hpp>

#include "dcm/degree_sequences.hpp"

namespace dcm {

/// Marginal law from JSON, e.g.
///   {"dist": "poisson_pareto", "shape": 1.5, "scale": 1}
///   {"dist": "zipf", "exponent": 3.5, "corpus": 1000}
///   {"dist": "point", "value": 3}
///   {"dist": "geometric", "success": 0.5}
///   {"dist": "pmf", "values": [0.25, 0.5, 0.25]}
DiscreteLaw parse_marginal(const nlohmann::json& j);

/// Joint law from JSON:
///   {"kind": "d_regular", "d": 3}
///   {"kind": "independent", "in": <marginal>, "out": <marginal>}
///   {"kind": "equal", "law": <marginal>}
///   {"kind": "explicit", "table": [[d_minus, d_plus, p], ...]}
JointDegreeLaw parse_joint_law(const nlohmann::json& j);

/// Short command-line form, or inline JSON when the text starts with '{':
///   dregular:3   pp-indep:1.5,1   zipf-equal:3.5,1000   geom-indep:0.25
///   pp-equal:2.5,1   geom-equal:0.5
JointDegreeLaw parse_law_spec(const std::string& text);

/// Canonical JSON for a law (round-trips through parse_joint_law).
nlohmann::json law_to_json(const JointDegreeLaw& law);

}  // namespace dcm

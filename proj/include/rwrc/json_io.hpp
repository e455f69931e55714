#pragma once

#include <json.hpp>

#include "rwrc/conductance.hpp"
#include "rwrc/lattice.hpp"

namespace rwrc::io {

using nlohmann::json;

json domain_to_json(const lattice::Domain& G);
lattice::Domain domain_from_json(const json& j, int d);

// {"d": int, "alpha": float, "G": [[lo,hi],...]}
json box_to_json(const lattice::LatticeBox& box);
lattice::LatticeBox box_from_json(const json& j);

json model_to_json(const conductance::Model& m);
conductance::Model model_from_json(const json& j);

// {"format": "rwrc-field-v1", header..., "edges": [[z..., dir, weight], ...]}
json field_to_json(const conductance::ConductanceField& field);
conductance::ConductanceField field_from_json(const json& j);

// scalar potential specs: zero | const | coord | coords_sum
conductance::ScalarField scalar_field_from_json(const json& j);

}  // namespace rwrc::io

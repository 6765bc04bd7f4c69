#pragma once

// JSON documents for algebras, maps and triples. Doubles are written with
// round-trip precision; rationals as "p/q" strings.

#include "json.hpp"
#include "ndlab/cstar.hpp"

namespace ndlab {

using Json = nlohmann::json;

Json to_json(const FdAlgebra& F);
Json to_json(const CpMap& map);
Json to_json(const ApproxTriple& t);
Json to_json(const RationalMatrix& m);

FdAlgebra fdalgebra_from_json(const Json& j);
CpMap cpmap_from_json(const Json& j);
ApproxTriple triple_from_json(const Json& j);
RationalMatrix rational_matrix_from_json(const Json& j);

}  // namespace ndlab

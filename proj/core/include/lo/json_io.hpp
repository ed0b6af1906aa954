#pragma once
// JSON encoding of every value the CLI reads or writes. Rationals are
// strings "p/q"; malformed input raises ConfigInvalid.

#include <json.hpp>

#include <string>

#include "lo/constructions.hpp"
#include "lo/decoupling.hpp"
#include "lo/gap.hpp"
#include "lo/inverse.hpp"
#include "lo/smallball.hpp"

namespace lo::io {

using Json = nlohmann::ordered_json;

Json to_json(const Rational& x);
Json to_json(const QVec& v);
Json to_json(const Integer& x);
Json to_json(const Gap& q);
Json to_json(const DiscreteDist& d);
Json to_json(const CoeffVector& v);
Json to_json(const CoeffMatrix& a);
Json to_json(const SmallBallEstimate& e);
Json to_json(const DecouplingReport& r);
Json to_json(const StructuredInstance& inst);
Json to_json(const InstanceCheck& c);
Json to_json(const GapFit& f);
Json to_json(const StructureCertificate& c);
Json to_json(const PipelineTrace& t);

Rational rational_from(const Json& j);
QVec qvec_from(const Json& j);
Gap gap_from(const Json& j);
DiscreteDist dist_from(const Json& j);
/// {"d": 1, "entries": [[...]], "b": [...]}; for d = 1 entries may be scalars.
CoeffMatrix matrix_from(const Json& j);
std::optional<CoeffVector> matrix_shift_from(const Json& j);
CoeffVector vector_from(const Json& j);
/// {"points": [...]} or a bare array; scalars are read as d = 1.
std::vector<QVec> points_from(const Json& j);
StructureCertificate certificate_from(const Json& j);
/// Reads the fields present in j over the defaults in `base`.
FitParams fit_params_from(const Json& j, FitParams base);

/// "bernoulli", "lazy-bernoulli:mu", "sym-bernoulli", "lazy-sym-bernoulli[:mu]",
/// or a path to a distribution JSON file.
DiscreteDist dist_from_spec(const std::string& spec);

Json read_file(const std::string& path);
void write_file(const std::string& path, const Json& j);

}  // namespace lo::io

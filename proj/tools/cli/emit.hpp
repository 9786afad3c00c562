#pragma once

#include <string>

#include <json.hpp>

#include "rwpi/dro.hpp"
#include "rwpi/limit_laws.hpp"
#include "rwpi/pipeline.hpp"
#include "rwpi/profile.hpp"
#include "rwpi/solvers.hpp"

namespace rwpi::cli {

using Json = nlohmann::ordered_json;

/// Rounds to 12 significant digits so the serialized text is stable.
Json num(double v);
Json vec(const Vector& v);

Json to_json(const pipeline::RegularizationChoice& c);
Json to_json(const solvers::FitResult& f, const std::string& model, const std::string& penalty);
Json to_json(const dro::WorstCase& w);
Json to_json(const profile::RwpValue& r);
Json to_json(const limits::QuantileEstimate& q);
Json to_json(const pipeline::ExperimentAggregate& a);

/// Writes `j` with two-space indentation to `path`, or stdout when path is
/// empty or "-".
void emit_json(const Json& j, const std::string& path = "");

}  // namespace rwpi::cli

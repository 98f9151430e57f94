#pragma once

#include <json.hpp>
#include <string>

#include "rgap/eigensolver.hpp"
#include "rgap/functionals.hpp"
#include "rgap/mms.hpp"
#include "rgap/rearrangement.hpp"

namespace rgap {

using Json = nlohmann::json;

/// Shortest decimal form that reads back to the same double (at most 17 significant digits).
std::string format_real(double x);

/// {tag, params, masses[], edges[{i, j, d, sigma, family}], coordinates[[...]]}
Json to_json(const DiscreteMMS& X);
DiscreteMMS mms_from_json(const Json& j);

Json to_json(const SampledFunction& u);
SampledFunction function_from_json(const DiscreteMMS& X, const Json& j);

/// {thresholds[], masses[], domain_mass}
Json to_json(const DistributionFunction& df);
DistributionFunction distribution_from_json(const Json& j);

/// {K, N, r, domain_mass, dirichlet, grid[], values[]}
Json to_json(const RearrangedFunction& w);
RearrangedFunction rearranged_from_json(const Json& j);

Json to_json(const EigenResult& res);
/// "x,u" rows of the eigenfunction.
std::string eigenfunction_csv(const EigenResult& res);

Json to_json(const DeficitReport& rep);
/// "t,perimeter,iso_profile,f_u" rows.
std::string levels_csv(const DeficitReport& rep);

}  // namespace rgap

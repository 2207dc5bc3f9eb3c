#pragma once

// JSON forms of the library's value types.

#include <cstdint>
#include <string>

#include <json.hpp>

#include "shrink/hypergeom.hpp"
#include "shrink/minimax.hpp"
#include "shrink/risksim.hpp"
#include "shrink/shrinkage.hpp"

namespace shrink {

using Json = nlohmann::json;

void to_json(Json& j, const HyperParams& hp);
void from_json(const Json& j, HyperParams& hp);  // ValidationError on bad fields
void to_json(Json& j, const PhiEvaluation& ev);
void to_json(Json& j, const Estimate& est);

namespace minimax {
void to_json(Json& j, const MinimaxVerdict& v);
void to_json(Json& j, const SphericalParams& sp);
void from_json(const Json& j, SphericalParams& sp);
}  // namespace minimax

namespace risksim {
void to_json(Json& j, const SphericalErrorModel& m);
void from_json(const Json& j, SphericalErrorModel& m);
void to_json(Json& j, const RiskEstimate& r);
void to_json(Json& j, const CurvePoint& pt);
void to_json(Json& j, const IdentityCheck& c);

// "normal", "student_t:7", "contaminated_normal:0.1,3", "fixed_radius:2"
SphericalErrorModel parse_model(const std::string& spec);
}  // namespace risksim

namespace hypergeom {
void to_json(Json& j, const HypergeomParams& hp);
void from_json(const Json& j, HypergeomParams& hp);
void to_json(Json& j, const IdentityResidual& r);
}  // namespace hypergeom

// FNV-1a (64 bit) of the compact dump; object keys are sorted, so equal
// configurations hash equally.
std::uint64_t config_hash(const Json& config);
std::string hash_hex(std::uint64_t h);

}  // namespace shrink

#ifndef GPACFORGE_IO_HPP
#define GPACFORGE_IO_HPP

#include <json.hpp>

#include <iosfwd>
#include <string>

#include "gpacforge/pivp.hpp"
#include "gpacforge/solver.hpp"

namespace gpacforge {

using Json = nlohmann::json;

Json rational_to_json(const Rational& q);
Rational rational_from_json(const Json& j);

Json poly_to_json(const MultiPoly& p);
MultiPoly poly_from_json(const Json& j);

Json pivp_to_json(const Pivp& p);
Pivp pivp_from_json(const Json& j);

/// Header `t,y1..yd,len,pslen`; decimal numbers carry enough digits to
/// round-trip at the active precision.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
Json trajectory_sidecar(const Trajectory& traj, const IntegrationConfig& cfg,
                        std::uint64_t seed);

Json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const Json& j);

}  // namespace gpacforge

#endif

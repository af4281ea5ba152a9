#ifndef OBJNAV_POLICY_HPP_
#define OBJNAV_POLICY_HPP_

#include <array>
#include <memory>
#include <random>
#include <string>

#include "objnav/semantic_map.hpp"
#include "objnav/simulator.hpp"

namespace objnav {

enum class GoalRepresentation { Cartesian, Polar };

GoalRepresentation representation_from_string(const std::string& s);
const char* to_string(GoalRepresentation r);

/// What a global policy sees each step: the egocentric crop, the episode
/// target class, the agent's heading, and the agent's map cell (needed
/// to express a crop-local sighting as a map-frame prediction).
struct PolicyInput {
  const MapCrop& crop;
  int target_class;
  double yaw;           // episodic heading, radians
  CellIndex agent_cell; // on the 512x512 episodic map
};

/// Normalized [0,1]^2 prediction in the configured representation.
struct PolicyOutput {
  std::array<double, 2> pred{0.5, 0.5};
  GoalRepresentation repr = GoalRepresentation::Cartesian;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyOutput step(const PolicyInput& input) = 0;
};

/// Uniform predictions from a seeded stream; the lower reference bound.
class RandomPolicy : public Policy {
 public:
  RandomPolicy(std::uint64_t seed, GoalRepresentation repr)
      : rng_(seed), repr_(repr) {}
  PolicyOutput step(const PolicyInput& input) override;

 private:
  std::mt19937_64 rng_;
  GoalRepresentation repr_;
};

/// Targets the nearest frontier (unknown cell bordering explored space)
/// beyond a minimum range; falls back to (0.5, 0.5) when the crop holds
/// no frontier.
class FrontierPolicy : public Policy {
 public:
  explicit FrontierPolicy(GoalRepresentation repr, MapSpec spec = {},
                          double min_range_m = 0.75,
                          double rho_max = kDefaultRhoMax)
      : repr_(repr), spec_(spec), min_range_m_(min_range_m), rho_max_(rho_max) {}
  PolicyOutput step(const PolicyInput& input) override;

 private:
  GoalRepresentation repr_;
  MapSpec spec_;
  double min_range_m_;
  double rho_max_;
};

/// Heads for the nearest seen cell of the target class; explores via the
/// frontier policy until one appears on the map.
class SeenTargetPolicy : public Policy {
 public:
  explicit SeenTargetPolicy(GoalRepresentation repr, MapSpec spec = {},
                            double rho_max = kDefaultRhoMax)
      : repr_(repr), spec_(spec), rho_max_(rho_max),
        frontier_(repr, spec, 0.75, rho_max) {}
  PolicyOutput step(const PolicyInput& input) override;

 private:
  GoalRepresentation repr_;
  MapSpec spec_;
  double rho_max_;
  FrontierPolicy frontier_;
};

/// Perfect-knowledge upper bound: emits the true nearest target
/// instance cell.
class OracleGoalPolicy : public Policy {
 public:
  OracleGoalPolicy(const Scene& scene, const Episode& episode,
                   GoalRepresentation repr, MapSpec spec = {},
                   double rho_max = kDefaultRhoMax)
      : scene_(&scene), anchor_(episode.start), repr_(repr), spec_(spec),
        rho_max_(rho_max) {}
  PolicyOutput step(const PolicyInput& input) override;

 private:
  const Scene* scene_;
  WorldPose anchor_;
  GoalRepresentation repr_;
  MapSpec spec_;
  double rho_max_;
};

/// Policy by name: oracle | seen_target | frontier | random. The oracle
/// needs the scenario; others ignore it.
std::unique_ptr<Policy> make_policy(const std::string& name,
                                    GoalRepresentation repr,
                                    std::uint64_t seed,
                                    const Scenario* scenario = nullptr,
                                    double rho_max = kDefaultRhoMax);

}  // namespace objnav

#endif  // OBJNAV_POLICY_HPP_

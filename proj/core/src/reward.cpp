#include "objnav/reward.hpp"

#include <stdexcept>

namespace objnav {

namespace {

void require_valid(std::span<const EpisodeResult> results) {
  if (results.empty()) {
    throw std::invalid_argument("metrics: empty result list");
  }
  for (const auto& r : results) {
    if (!(r.shortest_path > 0.0)) {
      throw std::invalid_argument("metrics: shortest_path must be positive");
    }
  }
}

double path_ratio(const EpisodeResult& r) {
  return r.shortest_path / std::max(r.path_length, r.shortest_path);
}

}  // namespace

double spl(std::span<const EpisodeResult> results) {
  require_valid(results);
  double sum = 0.0;
  for (const auto& r : results) {
    if (r.success) sum += path_ratio(r);
  }
  return sum / results.size();
}

double soft_spl(std::span<const EpisodeResult> results) {
  require_valid(results);
  double sum = 0.0;
  for (const auto& r : results) {
    double progress = std::max(0.0, 1.0 - r.final_distance / r.shortest_path);
    sum += progress * path_ratio(r);
  }
  return sum / results.size();
}

MetricsReport aggregate(std::span<const EpisodeResult> results) {
  require_valid(results);
  MetricsReport rep;
  rep.spl = spl(results);
  rep.softspl = soft_spl(results);
  for (const auto& r : results) {
    rep.distance_to_goal += r.final_distance;
    rep.success_rate += r.success ? 1.0 : 0.0;
  }
  rep.distance_to_goal /= results.size();
  rep.success_rate /= results.size();
  return rep;
}

}  // namespace objnav

#include "gpata/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace gpata::privacy {

void validate(const PrivacyProfile& p) {
  for (int level : {p.location, p.freq, p.usage}) {
    if (level < 0 || level > kMaxLevel) {
      throw std::invalid_argument("privacy level must lie in 0..3, got " +
                                  std::to_string(level));
    }
  }
}

bool PointRegion::contains(Point p) const {
  return std::find(points.begin(), points.end(), p) != points.end();
}

double PointRegion::weight(std::size_t i) const {
  return weights.empty() ? 1.0 / static_cast<double>(points.size()) : weights[i];
}

void validate(const IntervalRegion& r) {
  if (!(r.lo <= r.hi)) throw std::invalid_argument("interval region needs lo <= hi");
}

void validate(const PointRegion& r) {
  if (r.points.empty()) throw std::invalid_argument("point region must be non-empty");
  if (r.weights.empty()) return;
  if (r.weights.size() != r.points.size()) {
    throw std::invalid_argument("point region weights must align with points");
  }
  double sum = 0.0;
  for (double w : r.weights) {
    if (w < 0.0) throw std::invalid_argument("point region weights must be >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("point region weights must sum to 1");
  }
}

namespace {

using PointKey = std::pair<double, double>;

PointRegion make_region(const std::vector<const PointOfInterest*>& pois) {
  PointRegion region;
  region.points.reserve(pois.size());
  bool uniform = true;
  double total = 0.0;
  for (const auto* poi : pois) {
    region.points.push_back(poi->location);
    total += poi->weight;
    uniform = uniform && poi->weight == pois.front()->weight;
  }
  if (!uniform) {
    region.weights.reserve(pois.size());
    for (const auto* poi : pois) region.weights.push_back(poi->weight / total);
  }
  return region;
}

}  // namespace

LocationHierarchy::LocationHierarchy(std::vector<City> cities) : cities_(std::move(cities)) {
  std::map<PointKey, int> seen;
  for (const auto& city : cities_) {
    if (city.streets.empty()) {
      throw std::invalid_argument("city '" + city.name + "' has no streets");
    }
    for (const auto& street : city.streets) {
      if (street.pois.empty()) {
        throw std::invalid_argument("street '" + street.name + "' has no points of interest");
      }
      for (const auto& poi : street.pois) {
        if (!(poi.weight > 0.0)) {
          throw std::invalid_argument("street '" + street.name + "': POI weight must be > 0");
        }
        if (!seen.emplace(PointKey{poi.location.x, poi.location.y}, 1).second) {
          throw std::invalid_argument("point of interest listed twice on street '" +
                                      street.name + "'");
        }
      }
    }
  }
}

std::optional<LocationHierarchy::Address> LocationHierarchy::locate(Point p) const {
  for (std::size_t c = 0; c < cities_.size(); ++c) {
    for (std::size_t s = 0; s < cities_[c].streets.size(); ++s) {
      for (const auto& poi : cities_[c].streets[s].pois) {
        if (poi.location == p) return Address{c, s};
      }
    }
  }
  return std::nullopt;
}

std::vector<Point> LocationHierarchy::all_points() const {
  std::vector<Point> out;
  for (const auto& city : cities_)
    for (const auto& street : city.streets)
      for (const auto& poi : street.pois) out.push_back(poi.location);
  return out;
}

std::size_t LocationHierarchy::poi_count() const {
  std::size_t n = 0;
  for (const auto& city : cities_)
    for (const auto& street : city.streets) n += street.pois.size();
  return n;
}

PointRegion LocationHierarchy::street_region(const Address& a) const {
  std::vector<const PointOfInterest*> pois;
  for (const auto& poi : cities_.at(a.city).streets.at(a.street).pois) pois.push_back(&poi);
  return make_region(pois);
}

PointRegion LocationHierarchy::city_region(const Address& a) const {
  std::vector<const PointOfInterest*> pois;
  for (const auto& street : cities_.at(a.city).streets)
    for (const auto& poi : street.pois) pois.push_back(&poi);
  return make_region(pois);
}

PointRegion LocationHierarchy::world_region() const {
  std::vector<const PointOfInterest*> pois;
  for (const auto& city : cities_)
    for (const auto& street : city.streets)
      for (const auto& poi : street.pois) pois.push_back(&poi);
  return make_region(pois);
}

IntervalRegion grid_cell(double value, double resolution, double upper) {
  long long k = static_cast<long long>(std::ceil(value / resolution)) - 1;
  k = std::max(k, 0LL);
  // Repair rounding in value / resolution so that lo < value <= hi holds.
  while (value > static_cast<double>(k + 1) * resolution) ++k;
  while (k > 0 && value <= static_cast<double>(k) * resolution) --k;
  IntervalRegion cell{static_cast<double>(k) * resolution,
                      static_cast<double>(k + 1) * resolution};
  cell.hi = std::min(cell.hi, upper);
  cell.lo = std::min(cell.lo, cell.hi);
  return cell;
}

namespace {

IntervalRegion cloak_scalar(double value, int level, double fine, double coarse,
                            double upper) {
  switch (level) {
    case 0:
      return {value, value};
    case 1:
      return grid_cell(value, fine, upper);
    case 2:
      return grid_cell(value, coarse, upper);
    default:
      return {0.0, upper};
  }
}

}  // namespace

DisclosedView cloak(const DeviceState& state, const PrivacyProfile& profile,
                    const LocationHierarchy& hierarchy, const GlobalBounds& bounds) {
  validate(profile);
  if (!(state.cpu_freq > 0.0 && state.cpu_freq <= bounds.freq_max)) {
    throw std::invalid_argument("device " + std::to_string(state.id) +
                                ": cpu_freq outside (0, freq_max]");
  }
  if (!(state.cpu_usage >= 0.0 && state.cpu_usage <= 1.0)) {
    throw std::invalid_argument("device " + std::to_string(state.id) +
                                ": cpu_usage outside [0, 1]");
  }
  const auto address = hierarchy.locate(state.location);
  if (!address) {
    throw std::invalid_argument("device " + std::to_string(state.id) +
                                ": location is not a point of interest in the hierarchy");
  }

  DisclosedView view;
  view.device = state.id;
  view.freq = cloak_scalar(state.cpu_freq, profile.freq, kFreqResolutionFine,
                           kFreqResolutionCoarse, bounds.freq_max);
  view.usage = cloak_scalar(state.cpu_usage, profile.usage, kUsageResolutionFine,
                            kUsageResolutionCoarse, 1.0);
  switch (profile.location) {
    case 0:
      view.location.points = {state.location};
      break;
    case 1:
      view.location = hierarchy.street_region(*address);
      break;
    case 2:
      view.location = hierarchy.city_region(*address);
      break;
    default:
      view.location = hierarchy.world_region();
      break;
  }
  return view;
}

Estimates estimate_conservative(const DisclosedView& view, Point server) {
  validate(view.location);
  Estimates e;
  e.freq = view.freq.lo;
  e.usage = view.usage.hi;
  e.distance = 0.0;
  for (Point p : view.location.points) e.distance = std::max(e.distance, distance(p, server));
  return e;
}

Estimates estimate_anchor(const DisclosedView& view, Point server, int samples, Rng& rng) {
  if (samples < 1) throw std::invalid_argument("anchor estimation needs K >= 1");
  validate(view.location);
  const auto& pts = view.location.points;
  std::vector<double> weights;
  if (!view.location.weights.empty()) weights = view.location.weights;

  // Degenerate regions short-circuit so that a level-0 disclosure estimates
  // the true value bit-for-bit.
  double freq_sum = 0.0, usage_sum = 0.0, dist_sum = 0.0;
  for (int k = 0; k < samples; ++k) {
    if (!view.freq.degenerate()) freq_sum += rng.uniform(view.freq.lo, view.freq.hi);
    if (!view.usage.degenerate()) usage_sum += rng.uniform(view.usage.lo, view.usage.hi);
    if (pts.size() > 1) {
      const std::size_t idx = weights.empty() ? static_cast<std::size_t>(rng.below(pts.size()))
                                              : rng.weighted_index(weights);
      dist_sum += distance(pts[idx], server);
    }
  }
  const double n = static_cast<double>(samples);
  Estimates e;
  e.freq = view.freq.degenerate() ? view.freq.lo : freq_sum / n;
  e.usage = view.usage.degenerate() ? view.usage.lo : usage_sum / n;
  e.distance = pts.size() == 1 ? distance(pts.front(), server) : dist_sum / n;
  return e;
}

double expected_distance(const PointRegion& region, Point server) {
  validate(region);
  double sum = 0.0;
  for (std::size_t i = 0; i < region.points.size(); ++i) {
    sum += region.weight(i) * distance(region.points[i], server);
  }
  return sum;
}

}  // namespace gpata::privacy

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gpata/model.hpp"
#include "gpata/rng.hpp"

namespace gpata::privacy {

inline constexpr int kMaxLevel = 3;

// Level per private attribute: 0 exact, 1 fine interval / street,
// 2 coarse interval / city, 3 hidden.
struct PrivacyProfile {
  int location = 0;
  int freq = 0;
  int usage = 0;
  friend bool operator==(const PrivacyProfile&, const PrivacyProfile&) = default;
};

void validate(const PrivacyProfile& profile);

enum class PdfLabel { kUniform, kWeighted };

// Closed interval [lo, hi] disclosed for a scalar attribute. The grid cells
// are half-open (a, a + res], which is contained in [a, a + res].
struct IntervalRegion {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return lo <= v && v <= hi; }
  bool degenerate() const { return lo == hi; }
  double width() const { return hi - lo; }
};

// Finite set of candidate points disclosed for location. Empty weights means
// uniform; otherwise weights align with points and sum to 1.
struct PointRegion {
  std::vector<Point> points;
  std::vector<double> weights;
  PdfLabel pdf() const { return weights.empty() ? PdfLabel::kUniform : PdfLabel::kWeighted; }
  bool contains(Point p) const;
  double weight(std::size_t i) const;
};

void validate(const IntervalRegion& r);
void validate(const PointRegion& r);

struct DisclosedView {
  DeviceId device = 0;
  IntervalRegion freq;
  IntervalRegion usage;
  PointRegion location;
};

struct PointOfInterest {
  Point location;
  double weight = 1.0;  // relative population; uniform when all equal
  friend bool operator==(const PointOfInterest&, const PointOfInterest&) = default;
};

struct Street {
  std::string name;
  std::vector<PointOfInterest> pois;
  friend bool operator==(const Street&, const Street&) = default;
};

struct City {
  std::string name;
  std::vector<Street> streets;
  friend bool operator==(const City&, const City&) = default;
};

class LocationHierarchy {
 public:
  struct Address {
    std::size_t city = 0;
    std::size_t street = 0;
  };

  LocationHierarchy() = default;
  // Throws std::invalid_argument when a point appears twice or a street or
  // city is empty.
  explicit LocationHierarchy(std::vector<City> cities);

  const std::vector<City>& cities() const { return cities_; }
  std::optional<Address> locate(Point p) const;
  std::vector<Point> all_points() const;
  std::size_t poi_count() const;

  PointRegion street_region(const Address& a) const;
  PointRegion city_region(const Address& a) const;
  PointRegion world_region() const;

  friend bool operator==(const LocationHierarchy& a, const LocationHierarchy& b) {
    return a.cities_ == b.cities_;
  }

 private:
  std::vector<City> cities_;
};

struct GlobalBounds {
  double freq_max = 5.0;  // GHz
};

inline constexpr double kFreqResolutionFine = 0.5;
inline constexpr double kFreqResolutionCoarse = 2.0;
inline constexpr double kUsageResolutionFine = 0.2;
inline constexpr double kUsageResolutionCoarse = 0.5;

// Grid cell (k*res, (k+1)*res] holding value, clipped to [0, upper].
IntervalRegion grid_cell(double value, double resolution, double upper);

DisclosedView cloak(const DeviceState& state, const PrivacyProfile& profile,
                    const LocationHierarchy& hierarchy, const GlobalBounds& bounds);

// Server-side belief about a device.
struct Estimates {
  double freq = 0.0;
  double usage = 0.0;
  double distance = 0.0;
};

// Worst case inside every region: lowest frequency, highest usage, furthest
// point.
Estimates estimate_conservative(const DisclosedView& view, Point server);

// Mean of `samples` draws from each region's PDF.
Estimates estimate_anchor(const DisclosedView& view, Point server, int samples, Rng& rng);

// Exact expectation of the point-to-server distance under the region's PDF.
double expected_distance(const PointRegion& region, Point server);

}  // namespace gpata::privacy

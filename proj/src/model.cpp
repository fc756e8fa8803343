#include "gpata/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gpata {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void validate(const DeviceState& d) {
  const std::string who = "device " + std::to_string(d.id) + ": ";
  if (!(d.cpu_freq > 0.0)) throw std::invalid_argument(who + "cpu_freq must be > 0");
  if (!(d.cpu_usage >= 0.0 && d.cpu_usage <= 1.0)) {
    throw std::invalid_argument(who + "cpu_usage must lie in [0,1]");
  }
  if (!(d.utilization >= 0.0)) throw std::invalid_argument(who + "utilization must be >= 0");
  if (!(d.power_comp >= 0.0)) throw std::invalid_argument(who + "power_comp must be >= 0");
  if (!(d.power_trans_per_byte >= 0.0)) {
    throw std::invalid_argument(who + "power_trans_per_byte must be >= 0");
  }
}

void validate(const Task& t) {
  const std::string who = "task " + std::to_string(t.id) + ": ";
  if (!(t.input_volume >= 0.0 && t.output_volume >= 0.0)) {
    throw std::invalid_argument(who + "volumes must be >= 0");
  }
  if (!(t.comp_complexity >= 0.0 && t.trans_complexity >= 0.0)) {
    throw std::invalid_argument(who + "complexities must be >= 0");
  }
  if (!(t.reward >= 0.0)) throw std::invalid_argument(who + "reward must be >= 0");
}

double NetworkModel::transfer_time(double bytes, double dist) const {
  return overhead + latency_per_distance * dist + bytes / bandwidth;
}

int CycleMetrics::hits() const {
  int n = 0;
  for (const auto& r : tasks) n += r.deadline_hit ? 1 : 0;
  return n;
}

int deadline_indicator(double delay, double deadline) {
  if (!(deadline > 0.0)) throw std::invalid_argument("deadline must be > 0");
  return delay > deadline ? 1 : 0;
}

double edge_cost(const DeviceState& device, double compute_time,
                 double trans_time, double bytes_per_second) {
  const double power_trans = device.power_trans_per_byte * bytes_per_second;
  return device.power_comp * compute_time + power_trans * trans_time;
}

double compute_time(double comp_complexity, double freq, double usage) {
  const double capacity = freq * (1.0 - usage);
  if (comp_complexity <= 0.0) return 0.0;
  if (!(capacity > 0.0)) return std::numeric_limits<double>::infinity();
  return comp_complexity / capacity;
}

}  // namespace gpata

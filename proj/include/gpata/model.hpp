#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gpata {

using DeviceId = int;
using ServerId = int;
using TaskId = int;

// Marks "no device" / "no task" in assignments and strategy profiles.
inline constexpr int kNone = -1;

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);

struct DeviceState {
  DeviceId id = 0;
  double cpu_freq = 1.0;   // GHz
  double cpu_usage = 0.0;  // background load, fraction of the CPU
  Point location;
  double power_comp = 1.0;            // W while computing
  double power_trans_per_byte = 0.0;  // W per (byte/s) of outgoing traffic
  double utilization = 0.0;           // fraction of the cycle already committed
  friend bool operator==(const DeviceState&, const DeviceState&) = default;
};

// Throws std::invalid_argument naming the violated field.
void validate(const DeviceState& device);

struct EdgeServer {
  ServerId id = 0;
  Point location;
  std::vector<DeviceId> assigned_devices;
  friend bool operator==(const EdgeServer&, const EdgeServer&) = default;
};

struct Task {
  TaskId id = 0;
  double input_volume = 0.0;     // bytes
  double output_volume = 0.0;    // bytes
  double comp_complexity = 0.0;  // giga-operations
  double trans_complexity = 0.0;
  std::string algorithm_label;
  std::string data_type_label;
  double reward = 0.0;
};

void validate(const Task& task);

// Abstract link between a device and its edge server. Replaces a packet-level
// emulator with latency proportional to distance plus a serialization term.
struct NetworkModel {
  double latency_per_distance = 0.05;  // s per distance unit
  double bandwidth = 1.0e6;            // bytes per second
  double overhead = 0.01;              // s per transfer
  friend bool operator==(const NetworkModel&, const NetworkModel&) = default;

  double transfer_time(double bytes, double dist) const;
};

// Outcome of running one task. For unassigned tasks device_id is kNone and
// the delay is +inf.
struct ExecutionRecord {
  TaskId task_id = 0;
  DeviceId device_id = kNone;
  double queue_wait = 0.0;
  double compute_time = 0.0;
  double trans_time = 0.0;
  double e2e_delay = 0.0;
  bool deadline_hit = false;
  double energy = 0.0;
  double payoff = 0.0;
  double reward_paid = 0.0;
};

struct DeviceRecord {
  DeviceId device_id = 0;
  double payoff = 0.0;
  double energy_cost = 0.0;
};

struct CycleMetrics {
  int cycle = 0;
  std::vector<ExecutionRecord> tasks;
  std::vector<DeviceRecord> devices;
  double dhr = 0.0;  // hits / tasks; 0 for an empty task set

  int hits() const;
};

// 1 when the task missed (delay strictly greater than the deadline).
int deadline_indicator(double delay, double deadline);

// Energy of one task: computation power times compute time plus transmission
// power times transfer time. Transmission power scales with the transfer rate
// (bytes per second), so the transfer term is proportional to the data size.
double edge_cost(const DeviceState& device, double compute_time,
                 double trans_time, double bytes_per_second);

// Time to run comp_complexity giga-operations on the share of the CPU left
// by the background load. +inf when the CPU is saturated.
double compute_time(double comp_complexity, double freq, double usage);

}  // namespace gpata

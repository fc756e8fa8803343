#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "gpata/game.hpp"
#include "gpata/model.hpp"
#include "gpata/parallel.hpp"
#include "gpata/rng.hpp"

namespace gpata::dpfp {

// Per-task estimate of the total quality score of the devices that will
// claim the task, smoothed across iterations and cycles.
struct CongestionState {
  std::vector<double> rates;
  double decay = 0.5;  // weight of the previous estimate, in (0, 1]
};

CongestionState initial_congestion(std::size_t tasks, double decay);

// rates[i] <- decay * rates[i] + (1 - decay) * actual[i]
CongestionState update_congestion(const CongestionState& state, std::span<const double> actual);

// With probability `inertia` returns the task maximizing
// reward * score / (energy * congestion) among feasible tasks (lowest index
// wins ties, kNone when nothing is feasible); otherwise returns `previous`.
// Exactly one draw is taken from rng per call.
int best_response(std::span<const double> rewards, double score,
                  std::span<const double> energy, std::span<const std::uint8_t> feasible,
                  std::span<const double> congestion, int previous, double inertia, Rng& rng);

inline constexpr int kBroadcastSchemaVersion = 1;

struct TaskAggregate {
  TaskId task = 0;
  double reward = 0.0;
  double congestion = 0.0;  // smoothed estimate
  double observed = 0.0;    // claimant score sum of the last iteration
};

// Server -> all devices of a local group. Carries per-task aggregates only.
struct ServerBroadcast {
  int version = kBroadcastSchemaVersion;
  int cycle = 0;
  ServerId server = 0;
  int round = 0;
  int iteration = 0;
  std::vector<TaskAggregate> tasks;
  bool converged = false;
};

// Device -> its server, over the private uplink. Never relayed.
struct ClaimMessage {
  int version = kBroadcastSchemaVersion;
  int cycle = 0;
  ServerId server = 0;
  int round = 0;
  int iteration = 0;
  DeviceId device = 0;
  TaskId task = kNone;
};

nlohmann::json to_json(const ServerBroadcast& msg);
nlohmann::json to_json(const ClaimMessage& msg);

// True iff the message is a well-formed broadcast whose fields are all
// per-task aggregates (no device identity, strategy or score).
bool audit_broadcast(const nlohmann::json& msg);
bool audit_broadcast(const ServerBroadcast& msg);

class MessageSink {
 public:
  virtual ~MessageSink() = default;
  virtual void on_broadcast(const ServerBroadcast& msg) = 0;
  virtual void on_claim(const ClaimMessage& msg) = 0;
};

struct NegotiationParams {
  double decay = 0.5;    // mu
  double inertia = 0.8;  // rho
  int max_iterations = 20;  // P
  ExecutionPolicy policy = ExecutionPolicy::kSerial;
};

void validate(const NegotiationParams& params);

// Identifies one negotiation for message logging and random streams.
struct NegotiationContext {
  std::uint64_t stream_seed = 0;
  int cycle = 0;
  ServerId server = 0;
  int round = 0;
  std::vector<TaskId> task_ids;      // global ids, one per local task
  std::vector<DeviceId> device_ids;  // global ids, one per local device
  MessageSink* sink = nullptr;
};

struct NegotiationResult {
  game::StrategyProfile profile;  // claims at termination
  std::vector<int> winners;       // per task: local device index or kNone
  int iterations = 0;
  bool converged = false;
  CongestionState congestion;  // estimate after the last iteration
};

// Runs broadcast -> simultaneous best responses -> aggregate -> congestion
// update until the claims repeat and every device reports that it has no
// profitable unilateral move, or max_iterations elapse. Contested tasks are
// then resolved once by score-weighted tie-breaking.
NegotiationResult negotiate(const game::GameInstance& game, CongestionState initial,
                            const NegotiationParams& params, const NegotiationContext& ctx);

// Device-side check against the observed claimant score sums: can device j
// strictly improve by moving its claim?
bool has_profitable_deviation(const game::GameInstance& game,
                              const game::StrategyProfile& profile,
                              std::span<const double> score_sums, std::size_t device);

}  // namespace gpata::dpfp

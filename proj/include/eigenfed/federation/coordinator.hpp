#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "eigenfed/estimators.hpp"
#include "eigenfed/federation/transport.hpp"

namespace eigenfed::federation {

enum class TransportKind { InProcess, Socket };

struct Topology {
  std::uint32_t m = 1;
  TransportKind transport = TransportKind::InProcess;
  std::string address = "127.0.0.1";
  std::uint16_t port = 0;
  double timeout_s = 30.0;
};

/// Applies EIGENFED_BIND ("host" or "host:port") to a socket topology.
Topology apply_bind_env(Topology topology);

enum class Aggregator { Naive, SignFix, Procrustes, ProjectorAverage };

Aggregator parse_aggregator(std::string_view tag);
std::string_view aggregator_tag(Aggregator a) noexcept;

/// Traffic of one federated run.
///
/// Payload rounds are the synchronous gather/broadcast phases that carry
/// matrices; the Hello handshake and the closing Done/Error frames are control
/// traffic and are not counted as rounds. bytes_up/bytes_down count whole
/// payload frames (header included); control frames are tallied separately so
/// that bytes_up + bytes_down + control bytes equals everything written.
struct CommAccounting {
  std::size_t rounds = 0;
  std::uint64_t bytes_up = 0;
  std::uint64_t bytes_down = 0;
  std::uint64_t control_bytes_up = 0;
  std::uint64_t control_bytes_down = 0;
  std::size_t payload_messages_up = 0;
  std::size_t payload_messages_down = 0;
  double wall_time = 0.0;
};

struct FederatedResult {
  AggregateSolution solution;
  CommAccounting accounting;
};

/// Computes a node's local solution; runs on the worker's thread.
using NodeWork = std::function<LocalSolution(std::uint32_t node_id)>;

/// Single payload round: every worker submits its local solution once and
/// the coordinator aggregates in node_id order.
FederatedResult run_one_shot(const Topology &topology, const NodeWork &work,
                             Aggregator aggregator);

/// Gather, then n_iter broadcast/align/gather steps with the Procrustes
/// solves placed on the workers. Equivalent to iterative_refinement.
FederatedResult run_parallel_align(const Topology &topology, const NodeWork &work,
                                   std::size_t n_iter);

/// Same as the overloads above but over a caller-owned transport, so tests
/// can inspect its byte counters.
FederatedResult run_one_shot(Transport &transport, const Topology &topology,
                             const NodeWork &work, Aggregator aggregator);
FederatedResult run_parallel_align(Transport &transport, const Topology &topology,
                                   const NodeWork &work, std::size_t n_iter);

} // namespace eigenfed::federation

#include "eigenfed/federation/coordinator.hpp"

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "eigenfed/errors.hpp"

namespace eigenfed::federation {

namespace {

// Looser than the kernel tolerance: payloads may come from another machine.
constexpr double kWireOrthoTol = 1e-8;

Deadline deadline_after(double seconds) {
  return Clock::now() + std::chrono::duration_cast<Clock::duration>(
                            std::chrono::duration<double>(seconds));
}

void worker_main(Transport &transport, std::uint32_t node_id, const NodeWork &work,
                 double timeout_s) noexcept {
  std::unique_ptr<Channel> link;
  try {
    link = transport.connect();
    link->send(encode_message({MessageKind::Hello, node_id, std::nullopt}));
    const LocalSolution solution = work(node_id);
    link->send(encode_message(
        {MessageKind::SubmitSolution, node_id, solution.estimate.basis()}));
    for (;;) {
      auto frame = link->receive(deadline_after(timeout_s));
      if (!frame)
        return;
      const Message msg = decode_message(*frame);
      if (msg.kind != MessageKind::BroadcastReference || !msg.payload)
        return;
      const SubspaceEstimate reference(*msg.payload, kWireOrthoTol);
      link->send(encode_message({MessageKind::SubmitAligned, node_id,
                                 align_to_reference(solution.estimate, reference)}));
    }
  } catch (...) {
    // A failed worker just drops its link; the coordinator reports it.
  }
  if (link)
    link->close();
}

class Session {
public:
  Session(Transport &transport, const Topology &topology, const NodeWork &work)
      : transport_(transport), topology_(topology), links_(topology.m) {
    if (topology.m < 1)
      throw Error("topology needs at least one worker");
    if (!(topology.timeout_s > 0.0))
      throw Error("topology timeout must be positive");
    transport_.listen();
    workers_.reserve(topology.m);
    for (std::uint32_t id = 0; id < topology.m; ++id)
      workers_.emplace_back(worker_main, std::ref(transport_), id, std::cref(work),
                            topology.timeout_s);
  }

  ~Session() {
    for (auto &link : links_)
      if (link)
        link->close();
    pending_.clear();
    transport_.shutdown();
    for (auto &w : workers_)
      if (w.joinable())
        w.join();
  }

  Session(const Session &) = delete;
  Session &operator=(const Session &) = delete;

  void handshake() {
    const Deadline deadline = deadline_after(topology_.timeout_s);
    std::size_t seen = 0;
    while (seen < topology_.m) {
      auto link = transport_.accept(deadline);
      if (!link)
        throw WorkerTimeout(first_missing());
      auto frame = link->receive(deadline);
      if (!frame) {
        // Connected but never identified itself.
        pending_.push_back(std::move(link));
        continue;
      }
      acc_.control_bytes_up += frame->size();
      const Message hello = decode_message(*frame);
      check_version(hello);
      if (hello.kind != MessageKind::Hello || hello.node_id >= topology_.m ||
          links_[hello.node_id])
        throw PayloadValidation(hello.node_id, "unexpected handshake frame");
      links_[hello.node_id] = std::move(link);
      ++seen;
    }
  }

  /// One payload round worker→coordinator, validated and in node_id order.
  std::vector<Matrix> gather(MessageKind expected) {
    const Deadline deadline = deadline_after(topology_.timeout_s);
    std::vector<Matrix> out;
    out.reserve(topology_.m);
    for (std::uint32_t id = 0; id < topology_.m; ++id) {
      auto frame = links_[id]->receive(deadline);
      if (!frame)
        throw WorkerTimeout(id);
      const Message msg = decode_message(*frame);
      check_version(msg);
      if (msg.kind != expected)
        throw PayloadValidation(id, "unexpected message kind");
      if (msg.node_id != id)
        throw PayloadValidation(id, "node id does not match link");
      if (!msg.payload)
        throw PayloadValidation(id, "missing payload");
      const Matrix &p = *msg.payload;
      if (shape_rows_ == 0) {
        shape_rows_ = p.rows();
        shape_cols_ = p.cols();
      }
      if (p.rows() != shape_rows_ || p.cols() != shape_cols_ || p.cols() > p.rows())
        throw PayloadValidation(id, "payload shape mismatch");
      if (!p.allFinite() || orthonormality_defect(p) > kWireOrthoTol)
        throw PayloadValidation(id, "payload columns not orthonormal");
      acc_.bytes_up += frame->size();
      ++acc_.payload_messages_up;
      out.push_back(p);
    }
    ++acc_.rounds;
    return out;
  }

  void broadcast(const Matrix &payload) {
    const Bytes frame = encode_message({MessageKind::BroadcastReference, 0, payload});
    for (std::uint32_t id = 0; id < topology_.m; ++id) {
      links_[id]->send(frame);
      acc_.bytes_down += frame.size();
      ++acc_.payload_messages_down;
    }
    ++acc_.rounds;
  }

  void finish() {
    const Bytes frame = encode_message({MessageKind::Done, 0, std::nullopt});
    for (auto &link : links_) {
      link->send(frame);
      acc_.control_bytes_down += frame.size();
    }
  }

  CommAccounting &accounting() { return acc_; }

private:
  void check_version(const Message &msg) const {
    if (msg.protocol_version != kProtocolVersion)
      throw VersionMismatch(kProtocolVersion, msg.protocol_version);
  }

  std::uint32_t first_missing() const {
    for (std::uint32_t id = 0; id < topology_.m; ++id)
      if (!links_[id])
        return id;
    return 0;
  }

  Transport &transport_;
  Topology topology_;
  std::vector<std::unique_ptr<Channel>> links_;
  std::vector<std::unique_ptr<Channel>> pending_;
  std::vector<std::thread> workers_;
  CommAccounting acc_;
  Eigen::Index shape_rows_ = 0;
  Eigen::Index shape_cols_ = 0;
};

std::vector<LocalSolution> to_solutions(std::vector<Matrix> payloads) {
  std::vector<LocalSolution> out;
  out.reserve(payloads.size());
  for (std::size_t i = 0; i < payloads.size(); ++i)
    out.push_back({static_cast<std::uint32_t>(i),
                   SubspaceEstimate(std::move(payloads[i]), kWireOrthoTol),
                   std::nullopt});
  return out;
}

AggregateSolution aggregate(Aggregator a, const std::vector<LocalSolution> &s) {
  switch (a) {
  case Aggregator::Naive: return naive_average(s);
  case Aggregator::SignFix: return sign_fix_average(s, 0);
  case Aggregator::Procrustes: return procrustes_fix_average(s);
  case Aggregator::ProjectorAverage: return projector_average(s);
  }
  throw Error("unknown aggregator");
}

std::unique_ptr<Transport> make_transport(const Topology &topology) {
  if (topology.transport == TransportKind::Socket)
    return make_socket_transport(topology.address, topology.port);
  return make_in_process_transport();
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

} // namespace

Topology apply_bind_env(Topology topology) {
  const char *bind = std::getenv("EIGENFED_BIND");
  if (!bind || !*bind)
    return topology;
  std::string spec(bind);
  const auto colon = spec.rfind(':');
  if (colon == std::string::npos) {
    topology.address = spec;
    return topology;
  }
  topology.address = spec.substr(0, colon);
  try {
    const unsigned long port = std::stoul(spec.substr(colon + 1));
    if (port > 65535)
      throw std::out_of_range("port");
    topology.port = static_cast<std::uint16_t>(port);
  } catch (const std::exception &) {
    throw Error("EIGENFED_BIND has an invalid port: " + spec);
  }
  return topology;
}

Aggregator parse_aggregator(std::string_view tag) {
  if (tag == "naive") return Aggregator::Naive;
  if (tag == "sign_fix") return Aggregator::SignFix;
  if (tag == "procrustes") return Aggregator::Procrustes;
  if (tag == "projector_avg") return Aggregator::ProjectorAverage;
  throw Error("unknown aggregator tag '" + std::string(tag) + "'");
}

std::string_view aggregator_tag(Aggregator a) noexcept {
  switch (a) {
  case Aggregator::Naive: return "naive";
  case Aggregator::SignFix: return "sign_fix";
  case Aggregator::Procrustes: return "procrustes";
  case Aggregator::ProjectorAverage: return "projector_avg";
  }
  return "unknown";
}

FederatedResult run_one_shot(Transport &transport, const Topology &topology,
                             const NodeWork &work, Aggregator aggregator) {
  const auto start = Clock::now();
  Session session(transport, topology, work);
  session.handshake();
  auto solutions = to_solutions(session.gather(MessageKind::SubmitSolution));
  AggregateSolution result = aggregate(aggregator, solutions);
  session.finish();
  CommAccounting acc = session.accounting();
  acc.wall_time = seconds_since(start);
  return {std::move(result), acc};
}

FederatedResult run_parallel_align(Transport &transport, const Topology &topology,
                                   const NodeWork &work, std::size_t n_iter) {
  if (n_iter < 1)
    throw Error("run_parallel_align needs n_iter >= 1");
  const auto start = Clock::now();
  Session session(transport, topology, work);
  session.handshake();
  auto solutions = session.gather(MessageKind::SubmitSolution);

  AggregateSolution current;
  Matrix reference = solutions.front();
  for (std::size_t k = 1; k <= n_iter; ++k) {
    session.broadcast(reference);
    const auto aligned = session.gather(MessageKind::SubmitAligned);
    Matrix sum = Matrix::Zero(reference.rows(), reference.cols());
    for (const auto &a : aligned)
      sum += a;
    current = orthonormalize_average(sum / static_cast<double>(aligned.size()),
                                     Method::Procrustes);
    if (current.degenerate())
      break;
    reference = current.estimate->basis();
  }
  current.method = Method::Iterative;
  current.rounds_used = n_iter;
  session.finish();
  CommAccounting acc = session.accounting();
  acc.wall_time = seconds_since(start);
  return {std::move(current), acc};
}

FederatedResult run_one_shot(const Topology &topology, const NodeWork &work,
                             Aggregator aggregator) {
  const Topology topo = topology.transport == TransportKind::Socket
                            ? apply_bind_env(topology)
                            : topology;
  auto transport = make_transport(topo);
  return run_one_shot(*transport, topo, work, aggregator);
}

FederatedResult run_parallel_align(const Topology &topology, const NodeWork &work,
                                   std::size_t n_iter) {
  const Topology topo = topology.transport == TransportKind::Socket
                            ? apply_bind_env(topology)
                            : topology;
  auto transport = make_transport(topo);
  return run_parallel_align(*transport, topo, work, n_iter);
}

} // namespace eigenfed::federation

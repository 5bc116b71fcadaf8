/*
 * Copyright 2026 The olapnet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file cluster.hpp
 * @brief Simulated shared-nothing cluster: P logical nodes, one thread each,
 *        exchanging opaque byte strings through collective operations.
 *
 * Every collective is entered by all P nodes. On entry each node registers a
 * signature (operation, root, argument) for the collective's epoch; the first
 * node to disagree poisons the transport and every node raises
 * ProtocolError instead of deadlocking. Point-to-point messages carry their
 * epoch and operation so a mismatched message is also detected on receipt.
 *
 * Accounting counts only bytes that cross node boundaries; self-delivery is
 * free. No framing is added to payloads, so byte counts are payload bytes.
 */

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "olapnet/codec.hpp"
#include "olapnet/error.hpp"
#include "olapnet/wire.hpp"

namespace olapnet {

enum class OpKind : std::uint8_t {
  Barrier,
  Gather,
  Allgather,
  Scatter,
  Broadcast,
  AllToAll1Factor,
  AllToAllDirect,
  Reduce,
  Allreduce,
};

inline std::string_view op_name(OpKind k) {
  switch (k) {
    case OpKind::Barrier: return "barrier";
    case OpKind::Gather: return "gather";
    case OpKind::Allgather: return "allgather";
    case OpKind::Scatter: return "scatter";
    case OpKind::Broadcast: return "broadcast";
    case OpKind::AllToAll1Factor: return "all_to_all_1factor";
    case OpKind::AllToAllDirect: return "all_to_all_direct";
    case OpKind::Reduce: return "reduce";
    case OpKind::Allreduce: return "allreduce";
  }
  return "?";
}

/// Raised on nodes that were blocked when some other node failed.
class PeerFailure : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

struct CollectiveRecord {
  std::string name;
  std::string phase;
  std::uint64_t payload_bytes = 0;      // bytes this node sent to other nodes
  std::uint64_t contributed_bytes = 0;  // size of this node's input payload(s), self part included
  int rounds = 0;
  double blocked_ms = 0;
};

struct CommStats {
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
  double blocked_ms = 0;
  std::vector<CollectiveRecord> per_collective;
  std::uint64_t rows_scanned = 0;
  std::map<std::string, std::uint64_t> counters;

  /// Sent bytes of all collectives whose phase starts with prefix.
  std::uint64_t sent_in_phase(std::string_view prefix) const {
    std::uint64_t s = 0;
    for (const auto& r : per_collective)
      if (r.phase.starts_with(prefix)) s += r.payload_bytes;
    return s;
  }

  std::uint64_t contributed_in_phase(std::string_view prefix) const {
    std::uint64_t s = 0;
    for (const auto& r : per_collective)
      if (r.phase.starts_with(prefix)) s += r.contributed_bytes;
    return s;
  }
};

/// Associative combine over opaque payloads. The fold order is binomial-tree
/// order; results are unspecified if combine is not associative.
struct ReduceOperator {
  std::string name;
  std::function<Bytes(const Bytes&, const Bytes&)> combine;
  std::optional<Bytes> identity;
};

// ---------------------------------------------------------------------------
// 1-factor schedule

/// Number of exchange rounds: P for odd P, P - 1 for even P.
inline int one_factor_rounds(int P) { return P % 2 == 1 ? P : P - 1; }

/// Partner of node u in round i. Odd P uses (i - u) mod P, where a node paired
/// with itself idles. Even P runs the odd schedule on nodes 0..P-2 and pairs
/// the would-be idle node with node P-1.
inline int one_factor_partner(int P, int round, int u) {
  auto mod = [](int a, int m) { return ((a % m) + m) % m; };
  if (P % 2 == 1) return mod(round - u, P);
  int q = P - 1;
  if (u == q) return mod(round * ((q + 1) / 2), q);
  int v = mod(round - u, q);
  return v == u ? q : v;
}

// ---------------------------------------------------------------------------
// transport

struct Message {
  std::uint64_t epoch = 0;
  OpKind op = OpKind::Barrier;
  Bytes payload;
};

struct CollectiveSignature {
  OpKind op;
  int root;
  std::uint64_t arg;

  friend bool operator==(const CollectiveSignature&, const CollectiveSignature&) = default;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual int nodes() const = 0;
  virtual void send(int src, int dst, Message m) = 0;
  virtual Message recv(int dst, int src) = 0;
  /// Registers node's signature for a collective epoch; throws ProtocolError on disagreement.
  virtual void agree(int node, std::uint64_t epoch, const CollectiveSignature& sig) = 0;
  virtual void poison(const std::string& why) = 0;
};

/// Channel mesh between threads of one process. One FIFO queue per ordered node pair.
class InProcessTransport final : public Transport {
 public:
  explicit InProcessTransport(int P) : P_(P), boxes_(static_cast<std::size_t>(P)) {
    if (P < 1) throw InvalidArgument("cluster needs at least one node");
    for (auto& b : boxes_) b.from.resize(static_cast<std::size_t>(P));
  }

  int nodes() const override { return P_; }

  void send(int src, int dst, Message m) override {
    auto& box = boxes_.at(static_cast<std::size_t>(dst));
    {
      std::lock_guard lk(box.mu);
      box.from[static_cast<std::size_t>(src)].push_back(std::move(m));
    }
    box.cv.notify_all();
  }

  Message recv(int dst, int src) override {
    auto& box = boxes_.at(static_cast<std::size_t>(dst));
    std::unique_lock lk(box.mu);
    auto& q = box.from[static_cast<std::size_t>(src)];
    box.cv.wait(lk, [&] { return !q.empty() || poisoned(); });
    if (q.empty()) throw PeerFailure(poison_reason());
    Message m = std::move(q.front());
    q.pop_front();
    return m;
  }

  void agree(int node, std::uint64_t epoch, const CollectiveSignature& sig) override {
    std::string err;
    {
      std::lock_guard lk(agree_mu_);
      if (poisoned()) throw PeerFailure(poison_reason());
      auto [it, fresh] = pending_.try_emplace(epoch, Pending{sig, node, 0});
      auto& p = it->second;
      if (!fresh && !(p.sig == sig)) {
        err = "collective #" + std::to_string(epoch) + ": node " + std::to_string(node) + " entered " +
              std::string(op_name(sig.op)) + "(root=" + std::to_string(sig.root) + ", arg=" + std::to_string(sig.arg) +
              ") but node " + std::to_string(p.first_node) + " entered " + std::string(op_name(p.sig.op)) +
              "(root=" + std::to_string(p.sig.root) + ", arg=" + std::to_string(p.sig.arg) + ")";
      } else if (++p.arrived == P_) {
        pending_.erase(it);
      }
    }
    if (!err.empty()) {
      poison(err);
      throw ProtocolError(err);
    }
  }

  void poison(const std::string& why) override {
    {
      std::lock_guard lk(reason_mu_);
      if (reason_.empty()) reason_ = why;
    }
    poisoned_.store(true);
    for (auto& b : boxes_) {
      std::lock_guard lk(b.mu);
      b.cv.notify_all();
    }
  }

 private:
  struct Mailbox {
    std::mutex mu;
    std::condition_variable cv;
    std::vector<std::deque<Message>> from;
  };
  struct Pending {
    CollectiveSignature sig;
    int first_node;
    int arrived;
  };

  bool poisoned() const { return poisoned_.load(); }
  std::string poison_reason() {
    std::lock_guard lk(reason_mu_);
    return "cluster aborted: " + reason_;
  }

  int P_;
  std::vector<Mailbox> boxes_;
  std::mutex agree_mu_;
  std::map<std::uint64_t, Pending> pending_;
  std::atomic<bool> poisoned_{false};
  std::mutex reason_mu_;
  std::string reason_;
};

// ---------------------------------------------------------------------------
// node context

/// Handle for one logical node. Owned by the node's thread; not shared.
class ClusterCtx {
 public:
  ClusterCtx(int rank, std::shared_ptr<Transport> transport,
             std::shared_ptr<const codec::ByteCompressor> compressor = std::make_shared<codec::PassThroughCompressor>())
      : rank_(rank), P_(transport->nodes()), transport_(std::move(transport)), compressor_(std::move(compressor)) {}

  int rank() const { return rank_; }
  int size() const { return P_; }
  const CommStats& stats() const { return stats_; }
  CommStats& stats() { return stats_; }

  const codec::ByteCompressor& compressor() const { return *compressor_; }

  void add_scanned(std::uint64_t rows) { stats_.rows_scanned += rows; }
  std::uint64_t rows_scanned() const { return stats_.rows_scanned; }

  /// Named metrics that operators publish for the harness.
  void add_counter(const std::string& name, std::uint64_t v) { stats_.counters[name] += v; }

  /// Labels every collective issued while the guard is alive.
  class PhaseGuard {
   public:
    PhaseGuard(ClusterCtx& ctx, std::string label) : ctx_(ctx), saved_(std::move(ctx.phase_)) {
      ctx_.phase_ = std::move(label);
    }
    ~PhaseGuard() { ctx_.phase_ = std::move(saved_); }
    PhaseGuard(const PhaseGuard&) = delete;
    PhaseGuard& operator=(const PhaseGuard&) = delete;

   private:
    ClusterCtx& ctx_;
    std::string saved_;
  };

  [[nodiscard]] PhaseGuard phase(std::string label) { return PhaseGuard(*this, std::move(label)); }
  const std::string& current_phase() const { return phase_; }

  void barrier() {
    Scope s(*this, OpKind::Barrier, -1, 0);
    for (int d = 1; d < P_; d <<= 1) {
      send((rank_ + d) % P_, {});
      recv((rank_ - d + P_) % P_);
      ++s.rec.rounds;
    }
  }

  /// Root receives payloads indexed by sender; other nodes get an empty vector.
  std::vector<Bytes> gather(Bytes payload, int root) {
    check_root(root);
    Scope s(*this, OpKind::Gather, root, 0);
    s.rec.contributed_bytes = payload.size();
    s.rec.rounds = P_ > 1 ? 1 : 0;
    if (rank_ != root) {
      send(root, std::move(payload));
      return {};
    }
    std::vector<Bytes> out(static_cast<std::size_t>(P_));
    out[static_cast<std::size_t>(rank_)] = std::move(payload);
    for (int src = 0; src < P_; ++src)
      if (src != rank_) out[static_cast<std::size_t>(src)] = recv(src);
    return out;
  }

  /// Every node receives all payloads, indexed by sender. Pairwise exchange on the 1-factor schedule.
  std::vector<Bytes> allgather(Bytes payload) {
    Scope s(*this, OpKind::Allgather, -1, 0);
    s.rec.contributed_bytes = payload.size();
    std::vector<Bytes> out(static_cast<std::size_t>(P_));
    if (P_ > 1) {
      for (int round = 0; round < one_factor_rounds(P_); ++round) {
        int partner = one_factor_partner(P_, round, rank_);
        if (partner == rank_) continue;
        send(partner, payload);
        out[static_cast<std::size_t>(partner)] = recv(partner);
        ++s.rec.rounds;
      }
    }
    out[static_cast<std::size_t>(rank_)] = std::move(payload);
    return out;
  }

  /// payloads is read only at root and must hold P entries there.
  Bytes scatter(std::vector<Bytes> payloads, int root) {
    check_root(root);
    if (rank_ == root && static_cast<int>(payloads.size()) != P_)
      throw InvalidArgument("scatter: root supplied " + std::to_string(payloads.size()) + " payloads for " +
                            std::to_string(P_) + " nodes");
    Scope s(*this, OpKind::Scatter, root, 0);
    s.rec.rounds = P_ > 1 ? 1 : 0;
    if (rank_ != root) return recv(root);
    for (const auto& p : payloads) s.rec.contributed_bytes += p.size();
    for (int dst = 0; dst < P_; ++dst)
      if (dst != rank_) send(dst, std::move(payloads[static_cast<std::size_t>(dst)]));
    return std::move(payloads[static_cast<std::size_t>(rank_)]);
  }

  /// Binomial-tree broadcast; payload is read only at root.
  Bytes broadcast(Bytes payload, int root) {
    check_root(root);
    Scope s(*this, OpKind::Broadcast, root, 0);
    if (rank_ == root) s.rec.contributed_bytes = payload.size();
    return bcast_tree(std::move(payload), root, s.rec);
  }

  /// Personalized all-to-all. payloads[d] goes to node d; result[s] came from node s.
  std::vector<Bytes> all_to_all_1factor(std::vector<Bytes> payloads) {
    check_a2a(payloads);
    Scope s(*this, OpKind::AllToAll1Factor, -1, 0);
    for (const auto& p : payloads) s.rec.contributed_bytes += p.size();
    std::vector<Bytes> out(static_cast<std::size_t>(P_));
    out[static_cast<std::size_t>(rank_)] = std::move(payloads[static_cast<std::size_t>(rank_)]);
    for (int round = 0; round < one_factor_rounds(P_); ++round) {
      ++s.rec.rounds;
      int partner = one_factor_partner(P_, round, rank_);
      if (partner == rank_) continue;
      send(partner, std::move(payloads[static_cast<std::size_t>(partner)]));
      out[static_cast<std::size_t>(partner)] = recv(partner);
    }
    return out;
  }

  /// Same contract as all_to_all_1factor; every node posts all sends, then drains by source id.
  std::vector<Bytes> all_to_all_direct(std::vector<Bytes> payloads) {
    check_a2a(payloads);
    Scope s(*this, OpKind::AllToAllDirect, -1, 0);
    for (const auto& p : payloads) s.rec.contributed_bytes += p.size();
    s.rec.rounds = 1;
    std::vector<Bytes> out(static_cast<std::size_t>(P_));
    out[static_cast<std::size_t>(rank_)] = std::move(payloads[static_cast<std::size_t>(rank_)]);
    for (int dst = 0; dst < P_; ++dst)
      if (dst != rank_) send(dst, std::move(payloads[static_cast<std::size_t>(dst)]));
    for (int src = 0; src < P_; ++src)
      if (src != rank_) out[static_cast<std::size_t>(src)] = recv(src);
    return out;
  }

  /// Binomial-tree reduction; the combined payload is returned at root only.
  std::optional<Bytes> reduce(Bytes payload, const ReduceOperator& op, int root) {
    check_root(root);
    Scope s(*this, OpKind::Reduce, root, op_id(op));
    s.rec.contributed_bytes = payload.size();
    return reduce_tree(std::move(payload), op, root, s.rec);
  }

  Bytes allreduce(Bytes payload, const ReduceOperator& op) {
    Scope s(*this, OpKind::Allreduce, 0, op_id(op));
    s.rec.contributed_bytes = payload.size();
    auto at_root = reduce_tree(std::move(payload), op, 0, s.rec);
    return bcast_tree(at_root ? std::move(*at_root) : Bytes{}, 0, s.rec);
  }

 private:
  struct Scope {
    Scope(ClusterCtx& c, OpKind op, int root, std::uint64_t arg) : ctx(c), start(std::chrono::steady_clock::now()) {
      ctx.epoch_++;
      ctx.op_ = op;
      ctx.transport_->agree(ctx.rank_, ctx.epoch_, CollectiveSignature{op, root, arg});
      rec.name = std::string(op_name(op));
      rec.phase = ctx.phase_;
      ctx.current_ = &rec;
    }
    ~Scope() {
      rec.blocked_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      ctx.stats_.blocked_ms += rec.blocked_ms;
      ctx.current_ = nullptr;
      ctx.stats_.per_collective.push_back(std::move(rec));
    }
    ClusterCtx& ctx;
    std::chrono::steady_clock::time_point start;
    CollectiveRecord rec;
  };

  static std::uint64_t op_id(const ReduceOperator& op) { return std::hash<std::string>{}(op.name); }

  void check_root(int root) const {
    if (root < 0 || root >= P_) throw InvalidArgument("root " + std::to_string(root) + " is not a node id");
  }

  void check_a2a(const std::vector<Bytes>& payloads) const {
    if (static_cast<int>(payloads.size()) != P_)
      throw InvalidArgument("all-to-all needs " + std::to_string(P_) + " buffers, got " +
                            std::to_string(payloads.size()));
  }

  void send(int dst, Bytes payload) {
    stats_.bytes_sent += payload.size();
    if (current_ != nullptr) current_->payload_bytes += payload.size();
    transport_->send(rank_, dst, Message{epoch_, op_, std::move(payload)});
  }

  Bytes recv(int src) {
    Message m = transport_->recv(rank_, src);
    if (m.epoch != epoch_ || m.op != op_) {
      std::string err = "node " + std::to_string(rank_) + " in " + std::string(op_name(op_)) + " #" +
                        std::to_string(epoch_) + " got " + std::string(op_name(m.op)) + " #" +
                        std::to_string(m.epoch) + " from node " + std::to_string(src);
      transport_->poison(err);
      throw ProtocolError(err);
    }
    stats_.bytes_received += m.payload.size();
    return std::move(m.payload);
  }

  std::optional<Bytes> reduce_tree(Bytes acc, const ReduceOperator& op, int root, CollectiveRecord& rec) {
    int rel = (rank_ - root + P_) % P_;
    int depth = 0;
    for (int mask = 1; mask < P_; mask <<= 1) {
      ++depth;
      if ((rel & mask) == 0) {
        int child = rel | mask;
        if (child < P_) acc = op.combine(acc, recv((child + root) % P_));
      } else {
        send(((rel & ~mask) + root) % P_, std::move(acc));
        rec.rounds += depth;
        return std::nullopt;
      }
    }
    rec.rounds += depth;
    return acc;
  }

  Bytes bcast_tree(Bytes payload, int root, CollectiveRecord& rec) {
    int rel = (rank_ - root + P_) % P_;
    int mask = 1;
    while (mask < P_) {
      if (rel & mask) {
        payload = recv(((rel - mask) + root) % P_);
        break;
      }
      mask <<= 1;
    }
    for (mask >>= 1; mask > 0; mask >>= 1)
      if (rel + mask < P_) send(((rel + mask) + root) % P_, payload);
    int levels = 0;
    for (int m = 1; m < P_; m <<= 1) ++levels;
    rec.rounds += levels;
    return payload;
  }

  int rank_;
  int P_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<const codec::ByteCompressor> compressor_;
  CommStats stats_;
  std::uint64_t epoch_ = 0;
  OpKind op_ = OpKind::Barrier;
  CollectiveRecord* current_ = nullptr;
  std::string phase_;
};

struct ClusterOptions {
  std::shared_ptr<const codec::ByteCompressor> compressor = std::make_shared<codec::PassThroughCompressor>();
};

/// Runs fn on P node threads and returns each node's communication stats.
/// If any node throws, the transport is poisoned so blocked peers unwind, and
/// the first non-PeerFailure exception is rethrown.
inline std::vector<CommStats> run_cluster(int P, const std::function<void(ClusterCtx&)>& fn,
                                          const ClusterOptions& opts = {}) {
  auto transport = std::make_shared<InProcessTransport>(P);
  std::vector<std::unique_ptr<ClusterCtx>> ctxs;
  for (int r = 0; r < P; ++r) ctxs.push_back(std::make_unique<ClusterCtx>(r, transport, opts.compressor));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(P));
  std::vector<bool> peer_failure(static_cast<std::size_t>(P), false);

  auto body = [&](int r) {
    try {
      fn(*ctxs[static_cast<std::size_t>(r)]);
    } catch (const PeerFailure&) {
      errors[static_cast<std::size_t>(r)] = std::current_exception();
      peer_failure[static_cast<std::size_t>(r)] = true;
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(r)] = std::current_exception();
      transport->poison("node " + std::to_string(r) + ": " + e.what());
    } catch (...) {
      errors[static_cast<std::size_t>(r)] = std::current_exception();
      transport->poison("node " + std::to_string(r) + " failed");
    }
  };

  if (P == 1) {
    body(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(P));
    for (int r = 0; r < P; ++r) threads.emplace_back(body, r);
    for (auto& t : threads) t.join();
  }

  for (int r = 0; r < P; ++r)
    if (errors[static_cast<std::size_t>(r)] && !peer_failure[static_cast<std::size_t>(r)])
      std::rethrow_exception(errors[static_cast<std::size_t>(r)]);
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<CommStats> stats;
  stats.reserve(static_cast<std::size_t>(P));
  for (auto& c : ctxs) stats.push_back(std::move(c->stats()));
  return stats;
}

}  // namespace olapnet

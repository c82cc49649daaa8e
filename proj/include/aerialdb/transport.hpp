// Licensed under the Apache License, Version 2.0 (the "License"); you may not
// use this file except in compliance with the License. You may obtain a copy of
// the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations under
// the License.

#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "aerialdb/protocol.hpp"
#include "aerialdb/rng.hpp"
#include "aerialdb/types.hpp"

namespace aerialdb {

/// Virtual time since the start of a simulation.
using SimTime = std::chrono::duration<std::int64_t, std::micro>;

SimTime from_ms(double ms) noexcept;
double to_ms(SimTime t) noexcept;

struct LatencyModel {
  double drone_edge_ms = 10.0;
  double edge_edge_ms = 1.0;
  double drone_edge_mbps = 100.0;
  double edge_edge_mbps = 1000.0;
  /// Upper bound of the uniform extra delay added to every message.
  double jitter_ms = 0.2;
  std::uint64_t jitter_seed = 1;
};

struct HeartbeatConfig {
  SimTime interval = std::chrono::seconds(1);
  int misses = 3;
};

struct TransportConfig {
  LatencyModel latency;
  HeartbeatConfig heartbeat;
  SimTime timeout = std::chrono::milliseconds(500);
};

struct Address {
  enum class Role : std::uint8_t { edge, client };
  Role role = Role::edge;
  std::uint32_t id = 0;

  static Address edge(EdgeId e) { return {Role::edge, to_u32(e)}; }
  static Address client(std::uint32_t c) { return {Role::client, c}; }
  bool is_edge() const noexcept { return role == Role::edge; }
  EdgeId edge_id() const noexcept { return EdgeId{id}; }

  friend auto operator<=>(const Address&, const Address&) = default;
};

std::string to_string(const Address& a);

struct Message {
  MessageKind kind = MessageKind::heartbeat;
  Address source;
  Address destination;
  std::uint64_t correlation_id = 0;
  std::size_t payload_bytes = 0;
  Payload payload;
};

enum class DeliveryStatus { delivered, timeout };

struct Delivery {
  DeliveryStatus status = DeliveryStatus::timeout;
  Message reply;
  bool ok() const noexcept { return status == DeliveryStatus::delivered; }
};

using ReplyCallback = std::function<void(Delivery&&)>;

class Transport;

/// Handle for answering a request; may be kept and used later.
class Responder {
 public:
  Responder() = default;
  void reply(Payload payload) const;
  bool valid() const noexcept { return transport_ != nullptr; }

 private:
  friend class Transport;
  Responder(Transport* t, Address self, Address to, std::uint64_t corr)
      : transport_(t), self_(self), to_(to), correlation_id_(corr) {}

  Transport* transport_ = nullptr;
  Address self_;
  Address to_;
  std::uint64_t correlation_id_ = 0;
};

using Handler = std::function<void(Message&&, const Responder&)>;

/// Deterministic discrete-event message transport. Every endpoint processes
/// its events one at a time on a virtual clock; links are FIFO; delivery
/// takes base latency + size / bandwidth + seeded jitter. Edges are
/// fail-stop: a failed edge neither receives nor emits messages, and
/// requests addressed to it time out after the configured timeout.
class Transport {
 public:
  explicit Transport(TransportConfig cfg = {});

  Transport(const Transport&) = delete;
  Transport& operator=(const Transport&) = delete;

  void attach(Address a, Handler h);
  bool knows(Address a) const noexcept;

  /// Sends `m` from m.source. With a callback the message is a request: the
  /// callback receives the reply, or a timeout when the destination is
  /// failed. Throws Errc::unknown_destination for unattached addresses.
  void send(Message m, ReplyCallback on_reply = {});

  /// Runs `fn` in the context of `actor` at virtual time `at`.
  void schedule(Address actor, SimTime at, std::function<void()> fn);
  /// Runs `fn` outside any actor at virtual time `at`.
  void post(SimTime at, std::function<void()> fn);
  /// Extends the running actor's busy time by `cost`.
  void charge(SimTime cost);

  /// Current virtual time; inside a handler, the actor's local clock.
  SimTime now() const noexcept;

  /// Processes events until the queue is empty.
  void run();
  /// Processes events with time <= t and leaves the clock at t.
  void run_until(SimTime t);
  bool idle() const noexcept { return queue_.empty(); }

  void fail(EdgeId e);
  void recover(EdgeId e);
  bool is_up(EdgeId e) const;
  EdgeSet up_edges() const;

  /// Edges whose latest heartbeat reached `observer` within
  /// `misses` heartbeat intervals of now (plus the observer itself).
  /// Heartbeats are sent by every up edge at multiples of the interval.
  EdgeSet alive_set(EdgeId observer) const;

  /// Deterministic part of the delay for a message of `bytes`.
  SimTime base_delay(Address from, Address to, std::size_t bytes) const;

  const TransportConfig& config() const noexcept { return cfg_; }
  std::uint64_t messages_sent() const noexcept { return sent_; }
  const std::map<MessageKind, std::uint64_t>& sent_by_kind() const noexcept {
    return sent_by_kind_;
  }

 private:
  friend class Responder;

  struct Event {
    SimTime at;
    std::uint64_t seq;
    std::optional<Address> actor;
    std::function<void()> fn;
    // Request whose timeout starts if the actor is down on arrival.
    std::uint64_t drop_corr = 0;
  };
  struct EventLater {
    bool operator()(const Event& a, const Event& b) const noexcept {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };
  struct Pending {
    Address source;
    Address destination;
    SimTime depart;
    ReplyCallback callback;
  };
  struct EdgeState {
    bool up = true;
    // (time, up) transitions, ascending; implicit (0, up) at the start.
    std::vector<std::pair<SimTime, bool>> history;
    bool up_at(SimTime t) const;
  };

  void push(SimTime at, std::optional<Address> actor, std::function<void()> fn,
            std::uint64_t drop_corr = 0);
  void dispatch(Event&& ev);
  bool endpoint_up(Address a) const;
  void deliver(Message&& m);
  void schedule_timeout(std::uint64_t corr);
  void send_reply(const Responder& r, Payload payload);
  SimTime link_delay(Address from, Address to, std::size_t bytes);

  TransportConfig cfg_;
  Rng jitter_rng_;
  std::vector<Event> queue_;
  std::uint64_t seq_ = 0;
  SimTime now_{0};
  std::optional<Address> actor_;
  SimTime local_clock_{0};
  std::map<Address, Handler> handlers_;
  std::map<Address, SimTime> busy_until_;
  std::map<std::pair<Address, Address>, SimTime> link_tail_;
  std::map<EdgeId, EdgeState> edges_;
  std::unordered_map<std::uint64_t, Pending> pending_;
  std::uint64_t next_corr_ = 1;
  std::uint64_t sent_ = 0;
  std::map<MessageKind, std::uint64_t> sent_by_kind_;
};

}  // namespace aerialdb

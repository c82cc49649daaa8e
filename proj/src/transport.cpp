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

#include "aerialdb/transport.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aerialdb/errors.hpp"

namespace aerialdb {

SimTime from_ms(double ms) noexcept {
  return SimTime{static_cast<std::int64_t>(std::llround(ms * 1000.0))};
}

double to_ms(SimTime t) noexcept {
  return static_cast<double>(t.count()) / 1000.0;
}

std::string to_string(const Address& a) {
  return (a.is_edge() ? "edge-" : "client-") + std::to_string(a.id);
}

void Responder::reply(Payload payload) const {
  if (transport_ != nullptr) transport_->send_reply(*this, std::move(payload));
}

bool Transport::EdgeState::up_at(SimTime t) const {
  bool state = true;
  for (const auto& [at, is_up] : history) {
    if (at > t) break;
    state = is_up;
  }
  return state;
}

Transport::Transport(TransportConfig cfg)
    : cfg_(cfg), jitter_rng_(cfg.latency.jitter_seed) {
  if (cfg_.heartbeat.interval <= SimTime::zero() || cfg_.heartbeat.misses < 1 ||
      cfg_.timeout <= SimTime::zero()) {
    throw Error(Errc::invalid_config, "transport: bad heartbeat or timeout");
  }
}

void Transport::attach(Address a, Handler h) {
  handlers_[a] = std::move(h);
  if (a.is_edge()) edges_.try_emplace(a.edge_id());
}

bool Transport::knows(Address a) const noexcept {
  return handlers_.count(a) != 0;
}

SimTime Transport::now() const noexcept {
  return actor_ ? local_clock_ : now_;
}

void Transport::charge(SimTime cost) {
  if (actor_ && cost > SimTime::zero()) local_clock_ += cost;
}

void Transport::push(SimTime at, std::optional<Address> actor,
                     std::function<void()> fn, std::uint64_t drop_corr) {
  queue_.push_back(
      Event{std::max(at, now_), seq_++, actor, std::move(fn), drop_corr});
  std::push_heap(queue_.begin(), queue_.end(), EventLater{});
}

void Transport::schedule(Address actor, SimTime at, std::function<void()> fn) {
  push(at, actor, std::move(fn));
}

void Transport::post(SimTime at, std::function<void()> fn) {
  push(at, std::nullopt, std::move(fn));
}

bool Transport::endpoint_up(Address a) const {
  if (!a.is_edge()) return true;
  auto it = edges_.find(a.edge_id());
  return it == edges_.end() || it->second.up;
}

SimTime Transport::base_delay(Address from, Address to,
                              std::size_t bytes) const {
  if (from == to) return SimTime::zero();
  const bool backbone = from.is_edge() && to.is_edge();
  const double base =
      backbone ? cfg_.latency.edge_edge_ms : cfg_.latency.drone_edge_ms;
  const double mbps =
      backbone ? cfg_.latency.edge_edge_mbps : cfg_.latency.drone_edge_mbps;
  const double serialise_ms =
      mbps > 0 ? static_cast<double>(bytes) * 8.0 / (mbps * 1000.0) : 0.0;
  return from_ms(base + serialise_ms);
}

SimTime Transport::link_delay(Address from, Address to, std::size_t bytes) {
  SimTime d = base_delay(from, to, bytes);
  if (from != to && cfg_.latency.jitter_ms > 0) {
    d += from_ms(uniform01(jitter_rng_) * cfg_.latency.jitter_ms);
  }
  return d;
}

void Transport::send(Message m, ReplyCallback on_reply) {
  if (!knows(m.destination)) {
    throw Error(Errc::unknown_destination,
                "no endpoint " + to_string(m.destination));
  }
  if (!endpoint_up(m.source)) return;
  m.payload_bytes = wire_size(m.payload);
  ++sent_;
  ++sent_by_kind_[m.kind];

  const SimTime depart = now();
  if (on_reply) {
    m.correlation_id = next_corr_++;
    pending_.emplace(m.correlation_id,
                     Pending{m.source, m.destination, depart, std::move(on_reply)});
  }
  SimTime arrival = depart + link_delay(m.source, m.destination, m.payload_bytes);
  auto& tail = link_tail_[{m.source, m.destination}];
  arrival = std::max(arrival, tail);
  tail = arrival;
  const Address dest = m.destination;
  const std::uint64_t corr = m.correlation_id;
  push(
      arrival, dest,
      [this, msg = std::move(m)]() mutable { deliver(std::move(msg)); }, corr);
}

void Transport::send_reply(const Responder& r, Payload payload) {
  if (r.correlation_id_ == 0) return;
  Message m;
  m.kind = MessageKind::response;
  m.source = r.self_;
  m.destination = r.to_;
  m.payload = std::move(payload);
  if (!knows(m.destination)) return;
  if (!endpoint_up(m.source)) return;
  m.payload_bytes = wire_size(m.payload);
  m.correlation_id = r.correlation_id_;
  ++sent_;
  ++sent_by_kind_[m.kind];
  SimTime arrival =
      now() + link_delay(m.source, m.destination, m.payload_bytes);
  auto& tail = link_tail_[{m.source, m.destination}];
  arrival = std::max(arrival, tail);
  tail = arrival;
  const Address dest = m.destination;
  push(arrival, dest, [this, msg = std::move(m)]() mutable {
    deliver(std::move(msg));
  });
}

void Transport::deliver(Message&& m) {
  if (m.kind == MessageKind::response) {
    auto it = pending_.find(m.correlation_id);
    if (it == pending_.end()) return;
    ReplyCallback cb = std::move(it->second.callback);
    pending_.erase(it);
    cb(Delivery{DeliveryStatus::delivered, std::move(m)});
    return;
  }
  auto h = handlers_.find(m.destination);
  if (h == handlers_.end()) return;
  Responder r(this, m.destination, m.source, m.correlation_id);
  h->second(std::move(m), r);
}

void Transport::schedule_timeout(std::uint64_t corr) {
  auto it = pending_.find(corr);
  if (it == pending_.end()) return;
  const SimTime at = std::max(now_, it->second.depart + cfg_.timeout);
  push(at, it->second.source, [this, corr] {
    auto p = pending_.find(corr);
    if (p == pending_.end()) return;
    ReplyCallback cb = std::move(p->second.callback);
    pending_.erase(p);
    cb(Delivery{DeliveryStatus::timeout, {}});
  });
}

void Transport::dispatch(Event&& ev) {
  now_ = std::max(now_, ev.at);
  if (!ev.actor) {
    ev.fn();
    return;
  }
  const Address actor = *ev.actor;
  if (!endpoint_up(actor)) {
    // A request that reaches a failed edge is answered by a timeout.
    if (ev.drop_corr != 0) schedule_timeout(ev.drop_corr);
    return;
  }
  SimTime& busy = busy_until_[actor];
  if (busy > ev.at) {
    ev.at = busy;
    ev.seq = seq_++;
    queue_.push_back(std::move(ev));
    std::push_heap(queue_.begin(), queue_.end(), EventLater{});
    return;
  }
  actor_ = actor;
  local_clock_ = ev.at;
  ev.fn();
  busy_until_[actor] = local_clock_;
  actor_.reset();
}

void Transport::run() {
  while (!queue_.empty()) {
    std::pop_heap(queue_.begin(), queue_.end(), EventLater{});
    Event ev = std::move(queue_.back());
    queue_.pop_back();
    dispatch(std::move(ev));
  }
}

void Transport::run_until(SimTime t) {
  while (!queue_.empty() && queue_.front().at <= t) {
    std::pop_heap(queue_.begin(), queue_.end(), EventLater{});
    Event ev = std::move(queue_.back());
    queue_.pop_back();
    dispatch(std::move(ev));
  }
  now_ = std::max(now_, t);
}

void Transport::fail(EdgeId e) {
  auto& st = edges_[e];
  if (!st.up) return;
  st.up = false;
  st.history.emplace_back(now_, false);
  std::vector<std::uint64_t> doomed;
  for (const auto& [corr, p] : pending_) {
    if (p.destination == Address::edge(e)) doomed.push_back(corr);
  }
  std::sort(doomed.begin(), doomed.end());
  for (auto corr : doomed) schedule_timeout(corr);
}

void Transport::recover(EdgeId e) {
  auto& st = edges_[e];
  if (st.up) return;
  st.up = true;
  st.history.emplace_back(now_, true);
}

bool Transport::is_up(EdgeId e) const { return endpoint_up(Address::edge(e)); }

EdgeSet Transport::up_edges() const {
  EdgeSet out;
  for (const auto& [e, st] : edges_) {
    if (st.up) out.insert(e);
  }
  return out;
}

EdgeSet Transport::alive_set(EdgeId observer) const {
  const SimTime t = now();
  const SimTime interval = cfg_.heartbeat.interval;
  const SimTime window = interval * cfg_.heartbeat.misses;
  EdgeSet out;
  for (const auto& [e, st] : edges_) {
    if (e == observer) {
      out.insert(e);
      continue;
    }
    const SimTime lag = base_delay(Address::edge(e), Address::edge(observer), 0);
    if (t - lag < SimTime::zero()) {
      out.insert(e);  // nothing heard yet; bootstrap membership
      continue;
    }
    // Heartbeat k leaves at k*interval and lands at k*interval + lag.
    for (std::int64_t k = (t - lag) / interval; k >= 0; --k) {
      const SimTime landed = interval * k + lag;
      if (t - landed > window) break;
      if (st.up_at(interval * k)) {
        out.insert(e);
        break;
      }
    }
  }
  return out;
}

}  // namespace aerialdb

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

#include <gtest/gtest.h>

#include <chrono>
#include <vector>

#include "aerialdb/errors.hpp"
#include "aerialdb/transport.hpp"

namespace aerialdb {
namespace {

using std::chrono::milliseconds;

struct Net {
  explicit Net(TransportConfig cfg = {}, std::uint32_t edges = 20) : t(cfg) {
    for (std::uint32_t i = 0; i < edges; ++i)
      t.attach(Address::edge(edge_id(i)), [this, i](Message&& m, const Responder& r) {
        arrivals.push_back({i, m.correlation_id, t.now()});
        r.reply(Ack{});
      });
    t.attach(Address::client(1), [](Message&&, const Responder&) {});
  }
  struct Arrival {
    std::uint32_t edge;
    std::uint64_t corr;
    SimTime at;
  };
  Transport t;
  std::vector<Arrival> arrivals;
};

Message msg(Address from, Address to, Payload p = Heartbeat{}) {
  Message m;
  m.kind = MessageKind::heartbeat;
  m.source = from;
  m.destination = to;
  m.payload = std::move(p);
  return m;
}

TEST(Transport, ShardUploadDelay) {
  Transport t;
  const SimTime d = t.base_delay(Address::client(1), Address::edge(edge_id(0)), 17'000);
  EXPECT_NEAR(to_ms(d), 11.36, 1e-9);
  const SimTime b = t.base_delay(Address::edge(edge_id(0)), Address::edge(edge_id(1)), 17'000);
  EXPECT_NEAR(to_ms(b), 1.136, 1e-9);
}

TEST(Transport, ZeroSizeHeartbeatIsBaseLatency) {
  Net n;
  n.t.send(msg(Address::edge(edge_id(0)), Address::edge(edge_id(1))));
  n.t.run();
  ASSERT_EQ(n.arrivals.size(), 1u);
  EXPECT_GE(to_ms(n.arrivals[0].at), 1.0);
  EXPECT_LE(to_ms(n.arrivals[0].at), 1.2);
}

TEST(Transport, RequestReplyRoundTrip) {
  Net n;
  bool done = false;
  n.t.send(msg(Address::client(1), Address::edge(edge_id(3))), [&](Delivery&& d) {
    EXPECT_TRUE(d.ok());
    EXPECT_TRUE(std::holds_alternative<Ack>(d.reply.payload));
    EXPECT_GE(to_ms(n.t.now()), 20.0);
    EXPECT_LE(to_ms(n.t.now()), 21.0);
    done = true;
  });
  n.t.run();
  EXPECT_TRUE(done);
}

TEST(Transport, FailedDestinationTimesOut) {
  Net n;
  n.t.fail(edge_id(4));
  SimTime when{-1};
  DeliveryStatus st = DeliveryStatus::delivered;
  n.t.send(msg(Address::client(1), Address::edge(edge_id(4))), [&](Delivery&& d) {
    st = d.status;
    when = n.t.now();
  });
  n.t.run();
  EXPECT_EQ(st, DeliveryStatus::timeout);
  EXPECT_EQ(when, milliseconds(500));
  EXPECT_TRUE(n.arrivals.empty());
}

TEST(Transport, FailureWhileInFlightTimesOut) {
  Net n;
  DeliveryStatus st = DeliveryStatus::delivered;
  n.t.send(msg(Address::edge(edge_id(0)), Address::edge(edge_id(4))),
           [&](Delivery&& d) { st = d.status; });
  n.t.post(SimTime{500}, [&] { n.t.fail(edge_id(4)); });
  n.t.run();
  EXPECT_EQ(st, DeliveryStatus::timeout);
  EXPECT_TRUE(n.arrivals.empty());
}

TEST(Transport, RecoveredEdgeDelivers) {
  Net n;
  n.t.fail(edge_id(2));
  n.t.recover(edge_id(2));
  bool ok = false;
  n.t.send(msg(Address::client(1), Address::edge(edge_id(2))),
           [&](Delivery&& d) { ok = d.ok(); });
  n.t.run();
  EXPECT_TRUE(ok);
  EXPECT_TRUE(n.t.is_up(edge_id(2)));
}

TEST(Transport, UnknownDestinationThrows) {
  Net n(TransportConfig{}, 3);
  try {
    n.t.send(msg(Address::client(1), Address::edge(edge_id(99))));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unknown_destination);
  }
}

TEST(Transport, LinksAreFifo) {
  TransportConfig cfg;
  cfg.latency.jitter_ms = 5.0;
  Net n(cfg);
  std::vector<std::uint64_t> sent;
  for (int i = 0; i < 50; ++i) {
    // Alternate large and tiny payloads so later sends would otherwise overtake.
    InsertResponse big;
    big.error.assign(i % 2 == 0 ? 200'000 : 0, 'x');
    Message m = msg(Address::edge(edge_id(0)), Address::edge(edge_id(1)), big);
    n.t.send(std::move(m), [](Delivery&&) {});
  }
  n.t.run();
  ASSERT_EQ(n.arrivals.size(), 50u);
  for (std::size_t i = 1; i < n.arrivals.size(); ++i) {
    EXPECT_LT(n.arrivals[i - 1].corr, n.arrivals[i].corr);
    EXPECT_LE(n.arrivals[i - 1].at, n.arrivals[i].at);
  }
}

TEST(Transport, ActorsProcessSerially) {
  Transport t;
  std::vector<SimTime> starts;
  t.attach(Address::edge(edge_id(0)), [&](Message&&, const Responder&) {
    starts.push_back(t.now());
    t.charge(milliseconds(10));
  });
  t.attach(Address::client(1), [](Message&&, const Responder&) {});
  t.attach(Address::client(2), [](Message&&, const Responder&) {});
  t.send(msg(Address::client(1), Address::edge(edge_id(0))));
  t.send(msg(Address::client(2), Address::edge(edge_id(0))));
  t.run();
  ASSERT_EQ(starts.size(), 2u);
  EXPECT_GE(starts[1] - starts[0], milliseconds(10));
}

TEST(Transport, DeterministicForSeed) {
  auto trace = [] {
    TransportConfig cfg;
    cfg.latency.jitter_seed = 77;
    Net n(cfg);
    for (std::uint32_t i = 0; i < 100; ++i)
      n.t.send(msg(Address::edge(edge_id(i % 20)), Address::edge(edge_id((i * 7 + 3) % 20))),
               [](Delivery&&) {});
    n.t.run();
    std::vector<std::pair<std::uint32_t, std::int64_t>> out;
    for (const auto& a : n.arrivals) out.emplace_back(a.edge, a.at.count());
    return out;
  };
  EXPECT_EQ(trace(), trace());
}

TEST(AliveSet, EveryoneWithoutFailures) {
  Net n;
  n.t.run_until(milliseconds(10'000));
  EXPECT_EQ(n.t.alive_set(edge_id(0)).size(), 20u);
}

TEST(AliveSet, FailedEdgeDroppedAfterThreeIntervals) {
  Net n;
  n.t.run_until(milliseconds(10'000));
  n.t.fail(edge_id(5));
  // Heartbeat 9 s was the last one; it landed at 9.001 s.
  n.t.run_until(milliseconds(11'900));
  EXPECT_TRUE(n.t.alive_set(edge_id(0)).contains(edge_id(5)));
  n.t.run_until(milliseconds(12'002));
  const EdgeSet s = n.t.alive_set(edge_id(0));
  EXPECT_EQ(s.size(), 19u);
  EXPECT_FALSE(s.contains(edge_id(5)));
  EXPECT_EQ(n.t.up_edges().size(), 19u);
}

TEST(AliveSet, FlappingWithinOneIntervalStaysAlive) {
  Net n;
  n.t.run_until(milliseconds(10'200));
  n.t.fail(edge_id(5));
  n.t.run_until(milliseconds(10'700));
  n.t.recover(edge_id(5));
  // Heartbeats at 10 s and 11 s both went out; no gap ever exceeds 3 s.
  for (int ms = 10'700; ms <= 16'000; ms += 100) {
    n.t.run_until(milliseconds(ms));
    ASSERT_TRUE(n.t.alive_set(edge_id(0)).contains(edge_id(5))) << ms;
  }
}

TEST(AliveSet, RecoveredEdgeRejoinsAfterNextHeartbeat) {
  Net n;
  n.t.run_until(milliseconds(10'000));
  n.t.fail(edge_id(5));
  n.t.run_until(milliseconds(20'000));
  EXPECT_FALSE(n.t.alive_set(edge_id(0)).contains(edge_id(5)));
  n.t.recover(edge_id(5));
  n.t.run_until(milliseconds(20'500));
  EXPECT_TRUE(n.t.alive_set(edge_id(0)).contains(edge_id(5)));
}

TEST(Transport, RejectsBadConfig) {
  TransportConfig cfg;
  cfg.timeout = SimTime::zero();
  EXPECT_THROW(Transport{cfg}, Error);
}

}  // namespace
}  // namespace aerialdb

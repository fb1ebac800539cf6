#include "doctest.h"

#include "triad/kernel.hpp"

#include <algorithm>
#include <random>
#include <thread>

using namespace triad;

namespace {

EventPayload payload_for(EventKind kind) {
    switch (kind) {
        case EventKind::percept: return PerceptPayload{};
        case EventKind::reward: return RewardPayload{};
        case EventKind::verifier: return VerifierPayload{};
        case EventKind::feed: return FeedPayload{};
        case EventKind::directive: return DirectivePayload{};
        case EventKind::reflection_due: return ReflectionDuePayload{};
    }
    return PerceptPayload{};
}

constexpr EventKind kAllKinds[] = {EventKind::percept,   EventKind::reward,
                                   EventKind::verifier,  EventKind::feed,
                                   EventKind::directive, EventKind::reflection_due};

}  // namespace

TEST_CASE("priority bands are fixed and within range") {
    CHECK(priority_band(EventKind::verifier) == 0);
    CHECK(priority_band(EventKind::reward) == 1);
    CHECK(priority_band(EventKind::feed) == 2);
    CHECK(priority_band(EventKind::percept) == 3);
    CHECK(priority_band(EventKind::directive) == 4);
    CHECK(priority_band(EventKind::reflection_due) == 5);
    for (EventKind k : kAllKinds) {
        CHECK(priority_band(k) >= 0);
        CHECK(priority_band(k) <= 9);
    }
}

TEST_CASE("publish enqueues by (priority, id)") {
    VirtualClock clock;
    EventBroker broker(clock);

    // Feed (band 2) published after a percept (band 3) still dequeues first.
    broker.publish(PerceptPayload{}, 0);
    broker.publish(FeedPayload{}, 0);
    auto first = broker.next_event();
    auto second = broker.next_event();
    REQUIRE(first);
    REQUIRE(second);
    CHECK(first->kind == EventKind::feed);
    CHECK(second->kind == EventKind::percept);
}

TEST_CASE("same priority dequeues in publish (id) order") {
    VirtualClock clock;
    EventBroker broker(clock);
    const auto a = broker.publish(PerceptPayload{}, 0);
    const auto b = broker.publish(PerceptPayload{}, 0);
    CHECK(a < b);
    CHECK(broker.next_event()->id == a);
    CHECK(broker.next_event()->id == b);
}

TEST_CASE("future timestamps are rejected") {
    VirtualClock clock;
    EventBroker broker(clock);
    CHECK_THROWS_AS(broker.publish(PerceptPayload{}, clock.now() + 1), FutureTimestampError);
}

TEST_CASE("next_event on an empty queue is empty") {
    VirtualClock clock;
    EventBroker broker(clock);
    CHECK_FALSE(broker.next_event().has_value());
}

TEST_CASE("dequeue order equals brute-force sort by (priority, id)") {
    std::mt19937_64 rng(12345);
    for (int trial = 0; trial < 200; ++trial) {
        VirtualClock clock;
        EventBroker broker(clock);
        const int n = 1 + static_cast<int>(rng() % 40);
        std::vector<std::pair<int, std::uint64_t>> oracle;  // (priority, id)
        for (int i = 0; i < n; ++i) {
            const EventKind kind = kAllKinds[rng() % 6];
            const auto id = broker.publish(payload_for(kind), 0);
            oracle.emplace_back(priority_band(kind), id);
        }
        std::sort(oracle.begin(), oracle.end());

        std::vector<std::pair<int, std::uint64_t>> drained;
        while (auto ev = broker.next_event()) drained.emplace_back(ev->priority, ev->id);
        CHECK(drained == oracle);
    }
}

TEST_CASE("identical publish sequences yield identical dequeue sequences") {
    auto run_once = [] {
        VirtualClock clock;
        EventBroker broker(clock);
        std::mt19937_64 rng(99);
        for (int i = 0; i < 64; ++i) broker.publish(payload_for(kAllKinds[rng() % 6]), 0);
        std::vector<std::uint64_t> ids;
        while (auto ev = broker.next_event()) ids.push_back(ev->id);
        return ids;
    };
    CHECK(run_once() == run_once());
}

TEST_CASE("advance_clock refuses to run over pending events") {
    VirtualClock clock;
    EventBroker broker(clock);
    broker.publish(PerceptPayload{}, 0);
    CHECK_THROWS_AS(advance_clock(clock, broker), WiringError);
    broker.next_event();
    CHECK(advance_clock(clock, broker) == 1);
}

TEST_CASE("feed cadence fires on every fifth minute, never at zero") {
    VirtualClock clock;
    EventBroker broker(clock);
    CHECK_FALSE(VirtualClock::feed_due(0));
    CHECK(advance_clock(clock, broker) == 1);
    CHECK_FALSE(VirtualClock::feed_due(clock.now()));
    for (int i = 0; i < 3; ++i) advance_clock(clock, broker);
    CHECK(clock.now() == 4);
    CHECK(VirtualClock::feed_due(advance_clock(clock, broker)));  // 4 -> 5
    // Cadence oracle: due exactly when now % 5 == 0.
    for (Minutes t = 1; t <= 100; ++t) CHECK(VirtualClock::feed_due(t) == (t % 5 == 0));
}

TEST_CASE("broker is safe for concurrent producers, single consumer") {
    VirtualClock clock;
    EventBroker broker(clock);
    constexpr int kThreads = 4;
    constexpr int kPerThread = 250;
    std::vector<std::thread> producers;
    for (int t = 0; t < kThreads; ++t) {
        producers.emplace_back([&broker, t] {
            for (int i = 0; i < kPerThread; ++i)
                broker.publish(payload_for(kAllKinds[(t + i) % 6]), 0);
        });
    }
    for (auto& p : producers) p.join();
    REQUIRE(broker.size() == kThreads * kPerThread);

    std::vector<std::pair<int, std::uint64_t>> drained;
    while (auto ev = broker.next_event()) drained.emplace_back(ev->priority, ev->id);
    CHECK(drained.size() == kThreads * kPerThread);
    CHECK(std::is_sorted(drained.begin(), drained.end()));
    std::vector<std::uint64_t> ids;
    for (const auto& [p, id] : drained) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());  // ids unique
}

TEST_CASE("percept window stays within its bound") {
    PerceptWindow window(4);
    for (int i = 0; i < 10; ++i) {
        PerceptEvent p;
        p.text = std::to_string(i);
        window.push(p);
        CHECK(window.size() <= 4);
    }
    CHECK(window.items().front().text == "6");
    CHECK(window.items().back().text == "9");
}

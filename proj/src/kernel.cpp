#include "triad/kernel.hpp"

#include <algorithm>

namespace triad {

EventKind kind_of(const EventPayload& payload) {
    struct Visitor {
        EventKind operator()(const PerceptPayload&) const { return EventKind::percept; }
        EventKind operator()(const RewardPayload&) const { return EventKind::reward; }
        EventKind operator()(const VerifierPayload&) const { return EventKind::verifier; }
        EventKind operator()(const FeedPayload&) const { return EventKind::feed; }
        EventKind operator()(const DirectivePayload&) const { return EventKind::directive; }
        EventKind operator()(const ReflectionDuePayload&) const { return EventKind::reflection_due; }
    };
    return std::visit(Visitor{}, payload);
}

int priority_band(EventKind kind) {
    switch (kind) {
        case EventKind::verifier: return 0;
        case EventKind::reward: return 1;
        case EventKind::feed: return 2;
        case EventKind::percept: return 3;
        case EventKind::directive: return 4;
        case EventKind::reflection_due: return 5;
    }
    return 9;
}

namespace {

// Min-heap comparison: std::push_heap builds a max-heap, so invert.
bool heap_after(const EventEnvelope& a, const EventEnvelope& b) {
    if (a.priority != b.priority) return a.priority > b.priority;
    return a.id > b.id;
}

}  // namespace

std::uint64_t EventBroker::publish(EventPayload payload, Minutes timestamp) {
    const Minutes now = clock_->now();
    if (timestamp > now) {
        throw FutureTimestampError("kernel: event timestamp " + std::to_string(timestamp) +
                                   " is ahead of clock " + std::to_string(now));
    }
    EventEnvelope ev;
    ev.timestamp = timestamp;
    ev.kind = kind_of(payload);
    ev.priority = priority_band(ev.kind);
    ev.payload = std::move(payload);

    std::lock_guard lock(mu_);
    ev.id = next_id_++;
    const std::uint64_t id = ev.id;
    heap_.push_back(std::move(ev));
    std::push_heap(heap_.begin(), heap_.end(), heap_after);
    return id;
}

std::optional<EventEnvelope> EventBroker::next_event() {
    std::lock_guard lock(mu_);
    if (heap_.empty()) return std::nullopt;
    std::pop_heap(heap_.begin(), heap_.end(), heap_after);
    EventEnvelope ev = std::move(heap_.back());
    heap_.pop_back();
    return ev;
}

bool EventBroker::empty() const {
    std::lock_guard lock(mu_);
    return heap_.empty();
}

std::size_t EventBroker::size() const {
    std::lock_guard lock(mu_);
    return heap_.size();
}

std::vector<std::uint64_t> EventBroker::pending_ids() const {
    std::lock_guard lock(mu_);
    std::vector<std::uint64_t> ids;
    ids.reserve(heap_.size());
    for (const auto& ev : heap_) ids.push_back(ev.id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

Minutes advance_clock(VirtualClock& clock, const EventBroker& broker) {
    if (!broker.empty()) {
        throw WiringError("kernel: advance_clock called with " + std::to_string(broker.size()) +
                          " due event(s) pending");
    }
    return clock.advance();
}

}  // namespace triad

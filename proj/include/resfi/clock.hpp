#ifndef RESFI_CLOCK_HPP
#define RESFI_CLOCK_HPP

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_set>
#include <vector>

namespace resfi {

// Discrete-event virtual clock.  Events fire in (time, insertion) order so
// ties resolve deterministically; cancellation is lazy.  Time is in virtual
// milliseconds and never runs backwards.
class VirtualClock {
public:
    using Handler = std::function<void()>;

    double now_ms() const { return now_; }

    uint64_t schedule_at(double t_ms, Handler fn) {
        if (t_ms < now_) t_ms = now_;
        uint64_t id = next_id_++;
        queue_.push(Event{t_ms, id, std::move(fn)});
        ++live_;
        return id;
    }

    uint64_t schedule_in(double delay_ms, Handler fn) {
        return schedule_at(now_ + (delay_ms > 0 ? delay_ms : 0), std::move(fn));
    }

    void cancel(uint64_t id) {
        if (id != 0) cancelled_.insert(id);
    }

    // Run the earliest pending event.  Returns false when nothing is left.
    bool step() {
        while (!queue_.empty()) {
            Event ev = queue_.top();
            queue_.pop();
            --live_;
            if (cancelled_.erase(ev.id)) continue;
            now_ = ev.t;
            ev.fn();
            return true;
        }
        return false;
    }

    // Run every event with fire time <= t_ms, then settle the clock at t_ms.
    void run_until(double t_ms) {
        while (!queue_.empty() && queue_.top().t <= t_ms) {
            if (!step()) break;
        }
        if (t_ms > now_) now_ = t_ms;
    }

    // Run to an empty queue (bounded, in case handlers keep rescheduling).
    void drain(size_t max_events = SIZE_MAX) {
        while (max_events-- > 0 && step()) {
        }
    }

    size_t pending() const { return live_ > cancelled_.size() ? live_ - cancelled_.size() : 0; }
    double next_event_at() const { return queue_.empty() ? -1.0 : queue_.top().t; }

private:
    struct Event {
        double t;
        uint64_t id;
        Handler fn;
    };
    struct After {
        bool operator()(const Event& a, const Event& b) const {
            if (a.t != b.t) return a.t > b.t;
            return a.id > b.id;
        }
    };

    std::priority_queue<Event, std::vector<Event>, After> queue_;
    std::unordered_set<uint64_t> cancelled_;
    double now_ = 0.0;
    uint64_t next_id_ = 1;
    size_t live_ = 0;
};

} // namespace resfi

#endif

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hrt/nodes/interfaces.hpp"

namespace hrt::sim {

struct Event {
    std::uint64_t seq = 0;
    double time = 0.0;
    std::string kind;
    nlohmann::json payload;

    bool operator==(const Event&) const = default;
};

/// `seq,timestamp,kind,payload` with the payload as compact JSON.
std::string to_line(const Event& event);

/// Inverse of `to_line`. Throws std::invalid_argument on malformed input.
Event parse_line(std::string_view line);

std::vector<Event> read_events(std::istream& in);

/// Append-only, sequence-numbered event log stamped with a run clock.
/// Appends are serialised; readers get copies.
class EventLog : public nodes::EventSink {
public:
    explicit EventLog(const nodes::Clock& clock) : clock_(clock) {}

    void emit(std::string_view kind, nlohmann::json payload) override;

    [[nodiscard]] std::vector<Event> events() const;
    [[nodiscard]] std::vector<Event> since(std::uint64_t seq) const;
    [[nodiscard]] std::size_t size() const;

    /// Called after every append, under the log lock.
    void on_append(std::function<void(const Event&)> listener);

    void write(std::ostream& out) const;

private:
    const nodes::Clock& clock_;
    mutable std::mutex mutex_;
    std::vector<Event> events_;
    std::vector<std::function<void(const Event&)>> listeners_;
};

}  // namespace hrt::sim

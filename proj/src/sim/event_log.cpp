#include "hrt/sim/event_log.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace hrt::sim {

std::string to_line(const Event& event) {
    char stamp[64];
    std::snprintf(stamp, sizeof stamp, "%.6f", event.time);
    return std::to_string(event.seq) + "," + stamp + "," + event.kind + "," + event.payload.dump();
}

Event parse_line(std::string_view line) {
    std::size_t cuts[3];
    std::size_t from = 0;
    for (auto& cut : cuts) {
        cut = line.find(',', from);
        if (cut == std::string_view::npos) {
            throw std::invalid_argument("event line needs 4 fields: '" + std::string(line) + "'");
        }
        from = cut + 1;
    }
    Event e;
    auto seq = line.substr(0, cuts[0]);
    auto [p, ec] = std::from_chars(seq.data(), seq.data() + seq.size(), e.seq);
    if (ec != std::errc() || p != seq.data() + seq.size()) {
        throw std::invalid_argument("bad sequence number '" + std::string(seq) + "'");
    }
    const std::string stamp(line.substr(cuts[0] + 1, cuts[1] - cuts[0] - 1));
    try {
        std::size_t used = 0;
        e.time = std::stod(stamp, &used);
        if (used != stamp.size()) {
            throw std::invalid_argument(stamp);
        }
    } catch (const std::exception&) {
        throw std::invalid_argument("bad timestamp '" + stamp + "'");
    }
    e.kind = std::string(line.substr(cuts[1] + 1, cuts[2] - cuts[1] - 1));
    if (e.kind.empty()) {
        throw std::invalid_argument("empty event kind");
    }
    try {
        e.payload = nlohmann::json::parse(line.substr(cuts[2] + 1));
    } catch (const nlohmann::json::exception& ex) {
        throw std::invalid_argument("bad payload for event " + std::to_string(e.seq) + ": " + ex.what());
    }
    return e;
}

std::vector<Event> read_events(std::istream& in) {
    std::vector<Event> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) {
            continue;
        }
        try {
            out.push_back(parse_line(line));
        } catch (const std::invalid_argument& ex) {
            throw std::invalid_argument("line " + std::to_string(number) + ": " + ex.what());
        }
        if (out.size() > 1 && out.back().seq <= out[out.size() - 2].seq) {
            throw std::invalid_argument("line " + std::to_string(number) + ": sequence numbers must increase");
        }
    }
    return out;
}

void EventLog::emit(std::string_view kind, nlohmann::json payload) {
    std::lock_guard lock(mutex_);
    Event e;
    e.seq = events_.size() + 1;
    e.time = clock_.now();
    if (!events_.empty() && e.time < events_.back().time) {
        e.time = events_.back().time;
    }
    e.kind = std::string(kind);
    e.payload = std::move(payload);
    events_.push_back(std::move(e));
    for (const auto& listener : listeners_) {
        listener(events_.back());
    }
}

std::vector<Event> EventLog::events() const {
    std::lock_guard lock(mutex_);
    return events_;
}

std::vector<Event> EventLog::since(std::uint64_t seq) const {
    std::lock_guard lock(mutex_);
    if (seq >= events_.size()) {
        return {};
    }
    return {events_.begin() + static_cast<std::ptrdiff_t>(seq), events_.end()};
}

std::size_t EventLog::size() const {
    std::lock_guard lock(mutex_);
    return events_.size();
}

void EventLog::on_append(std::function<void(const Event&)> listener) {
    std::lock_guard lock(mutex_);
    listeners_.push_back(std::move(listener));
}

void EventLog::write(std::ostream& out) const {
    for (const auto& e : events()) {
        out << to_line(e) << '\n';
    }
}

}  // namespace hrt::sim

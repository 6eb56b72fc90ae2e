#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

#include "hrt/nodes/interfaces.hpp"

namespace hrt::sim {

/// Simulated time advanced by whole ticks, so that tick k is exactly
/// k / frequency seconds.
class VirtualClock : public nodes::Clock {
public:
    explicit VirtualClock(double frequency = 100.0);

    [[nodiscard]] double now() const override { return static_cast<double>(ticks_) / frequency_; }
    void advance() { ++ticks_; }
    [[nodiscard]] std::uint64_t ticks() const { return ticks_; }
    [[nodiscard]] double frequency() const { return frequency_; }

private:
    double frequency_;
    std::uint64_t ticks_ = 0;
};

/// Wall-clock seconds since construction.
class SteadyClock : public nodes::Clock {
public:
    SteadyClock() : origin_(std::chrono::steady_clock::now()) {}

    [[nodiscard]] double now() const override {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - origin_).count();
    }

private:
    std::chrono::steady_clock::time_point origin_;
};

}  // namespace hrt::sim

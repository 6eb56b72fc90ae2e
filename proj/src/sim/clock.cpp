#include "hrt/sim/clock.hpp"

#include <cmath>
#include <stdexcept>

namespace hrt::sim {

VirtualClock::VirtualClock(double frequency) : frequency_(frequency) {
    if (!std::isfinite(frequency) || frequency <= 0.0) {
        throw std::invalid_argument("tick frequency must be > 0");
    }
}

}  // namespace hrt::sim

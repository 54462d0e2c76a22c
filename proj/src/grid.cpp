#include "shewave/grid.hpp"

#include <string>

#include "shewave/errors.hpp"

namespace shewave {

timing_grid make_grid(double clock_hz, int cycles_per_period) {
    if (!(clock_hz > 0.0))
        raise(errc::non_positive_frequency, "clock frequency must be > 0 Hz, got " + std::to_string(clock_hz));
    if (cycles_per_period <= 0 || cycles_per_period % 4 != 0)
        raise(errc::bad_config, "cycles_per_period must be a positive multiple of 4, got " +
                                    std::to_string(cycles_per_period));
    return timing_grid{clock_hz, cycles_per_period};
}

} // namespace shewave

#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace mixmrf {

/// Invalid inputs, malformed files, violated preconditions. CLI exit code 2.
struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical aborts (sampler hit an improper conditional, solver diverged). CLI exit code 3.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Cross-validation cannot keep every response level in every training fold. CLI exit code 4.
struct cv_infeasible_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Round-trip-exact double formatting, used by every CSV/text writer so that
// identical values always serialize to identical bytes.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // prefer the shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char probe[40];
        std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(probe, "%lf", &back);
        if (back == v) return std::string(probe);
    }
    return std::string(buf);
}

}  // namespace mixmrf

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "hbt/errors.hpp"

namespace hbt {

// All experiment times and delays are integer picoseconds. 64 bits cover
// more than 10^6 s of acquisition; overflow is a hard error, never wraparound.
using TimePs = std::int64_t;

inline TimePs checked_add(TimePs a, TimePs b) {
    TimePs r;
    if (__builtin_add_overflow(a, b, &r))
        throw_validation("time arithmetic overflow in add");
    return r;
}

inline TimePs checked_sub(TimePs a, TimePs b) {
    TimePs r;
    if (__builtin_sub_overflow(a, b, &r))
        throw_validation("time arithmetic overflow in sub");
    return r;
}

inline TimePs checked_mul(TimePs a, TimePs b) {
    TimePs r;
    if (__builtin_mul_overflow(a, b, &r))
        throw_validation("time arithmetic overflow in mul");
    return r;
}

// Continuous quantities are computed in double precision and rounded to the
// nearest picosecond exactly once, at the moment a timestamp is recorded.
inline TimePs round_to_ps(double t) {
    if (!std::isfinite(t) || std::abs(t) >= 9.2e18)
        throw_validation("time value out of 64-bit picosecond range");
    return static_cast<TimePs>(std::llround(t));
}

inline constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2*sqrt(2*ln 2)

inline double fwhm_to_sigma(double fwhm_ps) {
    if (!(fwhm_ps > 0.0))
        throw_validation("fwhm_to_sigma: fwhm must be positive");
    return fwhm_ps / kFwhmPerSigma;
}

inline double sigma_to_fwhm(double sigma_ps) {
    if (!(sigma_ps > 0.0))
        throw_validation("sigma_to_fwhm: sigma must be positive");
    return sigma_ps * kFwhmPerSigma;
}

}  // namespace hbt

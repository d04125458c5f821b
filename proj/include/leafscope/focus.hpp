#pragma once

// Liquid-lens autofocus from a distance -> optical power calibration table.
//
// Interpolation is piecewise linear in vergence (1/distance) rather than in
// distance. A thin lens needs power = P_inf + 1/d, which is exactly linear in
// vergence, so an ideal-law table is reproduced with no interpolation error
// however coarse it is, while any table stays monotone and exact at its knots.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "leafscope/error.hpp"
#include "leafscope/io.hpp"

namespace leafscope {

struct PowerLimits {
    double lo = -2.0;  // D
    double hi = 3.0;   // D

    constexpr double clamp(double p) const { return std::clamp(p, lo, hi); }
};

struct CalibrationSample {
    double distance;  // m
    double power;     // D
};

struct FocusCalibration {
    std::vector<CalibrationSample> samples;
    double power_at_infinity = 0.0;
    PowerLimits power_limits{};
};

struct FocusCommand {
    double power = 0.0;
    double target_distance = 0.0;
    double defocus_tolerance = 0.05;
};

inline void validate(const FocusCalibration& cal) {
    const auto& s = cal.samples;
    if (s.size() < 2) throw ValidationError("calibration: need at least 2 samples");
    if (!(cal.power_limits.lo < cal.power_limits.hi))
        throw ValidationError("calibration: power limits must satisfy lo < hi");
    if (!(s.front().distance > 0.0)) throw ValidationError("calibration: distances must be positive");
    if (!(s.front().distance <= 0.5 && s.back().distance >= 5.0))
        throw ValidationError("calibration: samples must span [0.5, 5.0] m");
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!std::isfinite(s[i].distance) || !std::isfinite(s[i].power))
            throw ValidationError("calibration: non-finite sample");
        if (s[i].power < cal.power_limits.lo || s[i].power > cal.power_limits.hi)
            throw ValidationError("calibration: sample power outside power limits");
        if (i == 0) continue;
        if (!(s[i].distance > s[i - 1].distance))
            throw ValidationError("calibration: distances must be strictly increasing");
        if (!(s[i].power < s[i - 1].power))
            throw ValidationError("calibration: power must strictly decrease with distance");
    }
    if (!(cal.power_at_infinity <= s.back().power))
        throw ValidationError("calibration: power_at_infinity must not exceed the farthest sample");
}

/// Table sampled from the thin-lens law P_inf + 1/d.
inline FocusCalibration ideal_calibration(double power_at_infinity = 0.0, PowerLimits limits = {},
                                          double near = 0.5, double far = 5.0, double step = 0.25) {
    FocusCalibration cal;
    cal.power_at_infinity = power_at_infinity;
    cal.power_limits = limits;
    const auto n = static_cast<std::size_t>(std::lround((far - near) / step));
    for (std::size_t i = 0; i <= n; ++i) {
        const double d = near + static_cast<double>(i) * step;
        cal.samples.push_back({d, power_at_infinity + 1.0 / d});
    }
    validate(cal);
    return cal;
}

/// Lens power that brings `distance` into focus. Beyond the farthest sample
/// the table is continued toward (infinity, power_at_infinity); nearer than
/// the first sample it follows the thin-lens slope from that sample. The
/// result is clamped to the lens limits.
inline double required_power(const FocusCalibration& cal, double distance) {
    if (!(distance > 0.0) || !std::isfinite(distance)) throw NonPositiveDistance(distance);
    const auto& s = cal.samples;
    const double v = 1.0 / distance;
    double p;
    if (distance <= s.front().distance) {
        p = s.front().power + (v - 1.0 / s.front().distance);
    } else if (distance >= s.back().distance) {
        const double v_last = 1.0 / s.back().distance;
        p = cal.power_at_infinity + (s.back().power - cal.power_at_infinity) * (v / v_last);
    } else {
        const auto hi = std::upper_bound(s.begin(), s.end(), distance,
                                         [](double d, const CalibrationSample& c) { return d < c.distance; });
        const auto lo = hi - 1;
        if (lo->distance == distance) return cal.power_limits.clamp(lo->power);
        const double v_lo = 1.0 / lo->distance;
        const double v_hi = 1.0 / hi->distance;
        const double w = (v - v_lo) / (v_hi - v_lo);
        p = lo->power + w * (hi->power - lo->power);
    }
    return cal.power_limits.clamp(p);
}

inline double defocus_error(const FocusCalibration& cal, double set_power, double true_distance) {
    return std::abs(set_power - required_power(cal, true_distance));
}

inline bool in_focus(const FocusCalibration& cal, const FocusCommand& cmd, double true_distance) {
    return defocus_error(cal, cmd.power, true_distance) <= cmd.defocus_tolerance;
}

/// One command per distance, in input order.
inline std::vector<FocusCommand> track_focus(const FocusCalibration& cal,
                                             std::span<const double> distances,
                                             double tolerance = 0.05) {
    std::vector<FocusCommand> out;
    out.reserve(distances.size());
    for (std::size_t i = 0; i < distances.size(); ++i) {
        if (!(distances[i] > 0.0) || !std::isfinite(distances[i]))
            throw NonPositiveDistance(distances[i], i);
        out.push_back({required_power(cal, distances[i]), distances[i], tolerance});
    }
    return out;
}

/// Two-column text table: `distance_m power_D` per line, whitespace or comma
/// separated; blank lines and `#` comments are ignored.
inline FocusCalibration parse_calibration(const std::string& text, const std::string& source,
                                          double power_at_infinity = 0.0, PowerLimits limits = {}) {
    FocusCalibration cal;
    cal.power_at_infinity = power_at_infinity;
    cal.power_limits = limits;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        std::string a, b, extra;
        if (!(fields >> a)) continue;
        if (!(fields >> b)) throw ParseError(source, lineno, "power_D", "missing second column");
        if (fields >> extra) throw ParseError(source, lineno, "", "expected exactly two columns");
        auto number = [&](const std::string& tok, const char* field) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size())
                throw ParseError(source, lineno, field, "not a number: '" + tok + "'");
            return v;
        };
        cal.samples.push_back({number(a, "distance_m"), number(b, "power_D")});
    }
    validate(cal);
    return cal;
}

inline FocusCalibration load_calibration(const std::string& path, double power_at_infinity = 0.0,
                                         PowerLimits limits = {}) {
    return parse_calibration(io::read_file(path), path, power_at_infinity, limits);
}

}  // namespace leafscope

#pragma once

// Interrogation report CSV. Column order is fixed (see kReportHeader); floats
// are written with 6 significant digits and fields that do not apply to a
// record are left empty.

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "leafscope/geom.hpp"
#include "leafscope/io.hpp"

namespace leafscope {

struct InterrogationRecord {
    static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

    std::size_t target_id = 0;
    Vec3 centroid{};
    double mean_range = kNaN;
    double pitch = kNaN;
    double yaw = kNaN;
    std::optional<bool> in_envelope;
    double focus_distance = kNaN;
    double focus_power = kNaN;
    double defocus_error = kNaN;
    std::array<double, 6> band_intensity{kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
    double estimated_peak = kNaN;
    double estimated_amplitude = kNaN;
    double state_score = kNaN;
    std::optional<std::string> skip_reason;

    bool complete() const { return !skip_reason.has_value(); }
};

inline constexpr const char* kReportHeader =
    "target_id,skip_reason,centroid_x,centroid_y,centroid_z,mean_range,pitch_deg,yaw_deg,"
    "in_envelope,focus_distance,focus_power,defocus_error,band1,band2,band3,band4,band5,band6,"
    "estimated_peak,estimated_amplitude,state_score";

namespace detail {

inline std::string fmt6(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline double parse_field(const std::string& s) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
}

}  // namespace detail

inline std::string format_report(const std::vector<InterrogationRecord>& records) {
    using detail::fmt6;
    std::string out = kReportHeader;
    out += '\n';
    for (const auto& r : records) {
        std::string row = std::to_string(r.target_id);
        row += ',' + r.skip_reason.value_or("");
        for (double v : {r.centroid.x, r.centroid.y, r.centroid.z, r.mean_range, r.pitch, r.yaw})
            row += ',' + fmt6(v);
        row += ',';
        if (r.in_envelope) row += *r.in_envelope ? "true" : "false";
        for (double v : {r.focus_distance, r.focus_power, r.defocus_error}) row += ',' + fmt6(v);
        for (double v : r.band_intensity) row += ',' + fmt6(v);
        for (double v : {r.estimated_peak, r.estimated_amplitude, r.state_score}) row += ',' + fmt6(v);
        out += row;
        out += '\n';
    }
    return out;
}

inline void write_report(const std::vector<InterrogationRecord>& records, const std::string& path) {
    io::write_file(path, format_report(records));
}

inline std::vector<InterrogationRecord> parse_report(const std::string& text,
                                                     const std::string& source = "<report>") {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kReportHeader)
        throw ParseError(source, 1, "", "unexpected report header");
    std::vector<InterrogationRecord> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cell;
        std::istringstream row(line);
        while (std::getline(row, cell, ',')) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 21) throw ParseError(source, lineno, "", "expected 21 columns");
        try {
            InterrogationRecord r;
            r.target_id = std::stoul(f[0]);
            if (!f[1].empty()) r.skip_reason = f[1];
            r.centroid = {detail::parse_field(f[2]), detail::parse_field(f[3]), detail::parse_field(f[4])};
            r.mean_range = detail::parse_field(f[5]);
            r.pitch = detail::parse_field(f[6]);
            r.yaw = detail::parse_field(f[7]);
            if (f[8] == "true") r.in_envelope = true;
            else if (f[8] == "false") r.in_envelope = false;
            else if (!f[8].empty()) throw std::invalid_argument(f[8]);
            r.focus_distance = detail::parse_field(f[9]);
            r.focus_power = detail::parse_field(f[10]);
            r.defocus_error = detail::parse_field(f[11]);
            for (std::size_t b = 0; b < 6; ++b) r.band_intensity[b] = detail::parse_field(f[12 + b]);
            r.estimated_peak = detail::parse_field(f[18]);
            r.estimated_amplitude = detail::parse_field(f[19]);
            r.state_score = detail::parse_field(f[20]);
            out.push_back(r);
        } catch (const std::invalid_argument& e) {
            throw ParseError(source, lineno, "", std::string("malformed field '") + e.what() + "'");
        } catch (const std::out_of_range&) {
            throw ParseError(source, lineno, "", "numeric field out of range");
        }
    }
    return out;
}

inline std::vector<InterrogationRecord> read_report(const std::string& path) {
    return parse_report(io::read_file(path), path);
}

}  // namespace leafscope

#pragma once

// Scene files are YAML (JSON is accepted too). Top-level keys:
//   seed, rig, lidar, encoding, sensors[], clutter[], background
// Lengths in meters, wavelengths in nm, angles in degrees. docs/scene_format.md
// lists every field and its default.

#include <cmath>
#include <string>

#include "leafscope/scene.hpp"
#include "leafscope/yaml_util.hpp"

namespace leafscope {

namespace detail {

inline int parse_axis(const yaml::Reader& rd, const YAML::Node& node, const std::string& field) {
    const auto s = rd.as<std::string>(node, field);
    if (s == "x") return 0;
    if (s == "y") return 1;
    if (s == "z") return 2;
    rd.fail(node, field, "axis must be one of x, y, z");
}

inline const char* axis_name(int axis) { return axis == 0 ? "x" : (axis == 1 ? "y" : "z"); }

inline IntensityBand parse_band(const yaml::Reader& rd, const YAML::Node& node,
                                const std::string& field) {
    const auto a = rd.numbers<2>(node, field);
    if (a[0] != std::floor(a[0]) || a[1] != std::floor(a[1]))
        rd.fail(node, field, "intensity bounds must be whole counts");
    return {static_cast<int>(a[0]), static_cast<int>(a[1])};
}

inline AxisPatch parse_patch(const yaml::Reader& rd, const YAML::Node& node,
                             const std::string& path) {
    rd.require_map(node, path);
    AxisPatch p;
    for (const char* key : {"center", "normal_axis", "size"})
        if (!node[key]) rd.fail(node, yaml::Reader::join(path, key), "missing required field");
    p.center = rd.vec3(node["center"], yaml::Reader::join(path, "center"));
    p.normal_axis = parse_axis(rd, node["normal_axis"], yaml::Reader::join(path, "normal_axis"));
    const auto size = rd.numbers<2>(node["size"], yaml::Reader::join(path, "size"));
    p.size_u = size[0];
    p.size_v = size[1];
    return p;
}

/// Returns `v` unchanged when it is already unit to 1e-12, else its normalization.
inline Vec3 unitize(const Vec3& v) { return v.is_unit(1e-12) ? v : v.normalized(); }

}  // namespace detail

inline void validate(const RigPose& rig) {
    if (!rig.camera_position.is_finite() || !rig.mirror_position.is_finite())
        throw ValidationError("rig: positions must be finite");
    if (rig.lidar_origin != Vec3{})
        throw ValidationError("rig: lidar_origin is the world origin and must be (0,0,0)");
    if (distance(rig.camera_position, rig.mirror_position) < 1e-9)
        throw ValidationError("rig: camera_position must differ from mirror_position");
    if (!rig.mirror_default_normal.is_unit(1e-12))
        throw ValidationError("rig: mirror_default_normal must be unit length");
    try {
        mirror_frame(rig.mirror_default_normal);
    } catch (const GimbalDegenerate&) {
        throw ValidationError("rig: mirror_default_normal must not be vertical");
    }
}

inline void validate(const IntensityBand& b, const std::string& what) {
    if (!(0 <= b.lo && b.lo <= b.hi && b.hi <= 255))
        throw ValidationError(what + ": band must satisfy 0 <= lo <= hi <= 255");
}

inline void validate(const LidarModel& l) {
    if (l.n_beams != 32) throw ValidationError("lidar: n_beams must be 32");
    if (!(l.fov_upper > l.fov_lower)) throw ValidationError("lidar: fov upper must exceed lower");
    if (!(l.azimuth_step > 0.0 && l.azimuth_step <= 360.0))
        throw ValidationError("lidar: azimuth_step must be in (0, 360]");
    if (!(l.retro_min_range < l.retro_max_range))
        throw ValidationError("lidar: retro_min_range must be below retro_max_range");
    if (!(l.retro_max_range <= l.max_range))
        throw ValidationError("lidar: retro_max_range must not exceed max_range");
    if (!(l.retro_min_range > 0.0)) throw ValidationError("lidar: retro_min_range must be positive");
    if (!(l.intensity_noise_sd >= 0.0))
        throw ValidationError("lidar: intensity_noise_sd must be non-negative");
    validate(l.diffuse_band, "lidar.diffuse_band");
    validate(l.clutter_band, "lidar.clutter_band");
    validate(l.retro_band, "lidar.retro_band");
}

inline void validate(const PlantSensor& s, std::size_t i) {
    const std::string who = "sensors[" + std::to_string(i) + "]";
    if (!s.position.is_finite()) throw ValidationError(who + ": position must be finite");
    if (!(s.tape_extent > 0.0 && s.tape_extent <= 0.2))
        throw ValidationError(who + ": tape_extent must be in (0, 0.2] m");
    if (!(s.peak_wavelength >= 600.0 && s.peak_wavelength <= 700.0))
        throw ValidationError(who + ": peak_wavelength must be in [600, 700] nm");
    if (!(s.peak_amplitude > 0.0 && s.peak_amplitude <= 1.0))
        throw ValidationError(who + ": peak_amplitude must be in (0, 1]");
    if (!(s.peak_fwhm > 0.0)) throw ValidationError(who + ": peak_fwhm must be positive");
    if (!(s.baseline >= 0.0 && s.baseline <= 1.0))
        throw ValidationError(who + ": baseline must be in [0, 1]");
    if (!(s.state_score >= 0.0 && s.state_score <= 1.0))
        throw ValidationError(who + ": state must be in [0, 1]");
}

inline void validate(const SceneDescription& scene) {
    validate(scene.rig);
    validate(scene.lidar);
    for (std::size_t i = 0; i < scene.sensors.size(); ++i) validate(scene.sensors[i], i);
    auto check_patch = [](const AxisPatch& p, const std::string& who) {
        if (!p.center.is_finite()) throw ValidationError(who + ": center must be finite");
        if (p.normal_axis < 0 || p.normal_axis > 2)
            throw ValidationError(who + ": normal_axis out of range");
        if (!(p.size_u > 0.0 && p.size_v > 0.0))
            throw ValidationError(who + ": size must be positive");
    };
    for (std::size_t i = 0; i < scene.clutter.size(); ++i) {
        const std::string who = "clutter[" + std::to_string(i) + "]";
        check_patch(scene.clutter[i].patch, who);
        const double d = scene.clutter[i].spurious_density;
        if (!(d >= 0.0 && d <= 1.0))
            throw ValidationError(who + ": spurious_density must be in [0, 1]");
    }
    for (std::size_t i = 0; i < scene.background.walls.size(); ++i)
        check_patch(scene.background.walls[i], "background.walls[" + std::to_string(i) + "]");
    if (scene.background.floor_z && !std::isfinite(*scene.background.floor_z))
        throw ValidationError("background.floor_z must be finite");
    const auto& e = scene.encoding;
    if (!(e.fwhm > 0.0)) throw ValidationError("encoding: fwhm must be positive");
    if (e.lo == e.hi) throw ValidationError("encoding: lo and hi must differ");
}

inline RigPose parse_rig(const yaml::Reader& rd, const YAML::Node& node, const std::string& path) {
    rd.require_map(node, path);
    RigPose rig;
    if (auto v = rd.vec3_opt(node, "camera_position", path)) rig.camera_position = *v;
    if (auto v = rd.vec3_opt(node, "mirror_position", path)) rig.mirror_position = *v;
    if (auto v = rd.vec3_opt(node, "mirror_default_normal", path)) {
        if (v->norm() < 1e-12)
            rd.fail(node["mirror_default_normal"], yaml::Reader::join(path, "mirror_default_normal"),
                    "normal must be non-zero");
        rig.mirror_default_normal = detail::unitize(*v);
    }
    return rig;
}

inline void emit_rig(YAML::Emitter& em, const RigPose& rig) {
    using yaml::operator<<;
    em << YAML::BeginMap;
    em << YAML::Key << "camera_position" << YAML::Value << rig.camera_position;
    em << YAML::Key << "mirror_position" << YAML::Value << rig.mirror_position;
    em << YAML::Key << "mirror_default_normal" << YAML::Value << rig.mirror_default_normal;
    em << YAML::EndMap;
}

/// Parses and validates scene text. `source` names the origin in error messages.
inline SceneDescription parse_scene(const std::string& text, const std::string& source = "<scene>") {
    const yaml::Reader rd(source);
    const YAML::Node root = rd.root(text);
    if (!root.IsMap()) rd.fail(root, "", "scene must be a mapping");

    SceneDescription scene;
    scene.rng_seed = rd.get_or<std::uint64_t>(root, "seed", "", 1);

    if (const auto n = root["rig"]) scene.rig = parse_rig(rd, n, "rig");

    if (const auto n = root["lidar"]) {
        rd.require_map(n, "lidar");
        LidarModel& l = scene.lidar;
        l.n_beams = rd.get_or<int>(n, "n_beams", "lidar", l.n_beams);
        if (const auto f = n["vertical_fov"]) {
            const auto a = rd.numbers<2>(f, "lidar.vertical_fov");
            l.fov_upper = a[0];
            l.fov_lower = a[1];
        }
        l.azimuth_step = rd.get_or<double>(n, "azimuth_step", "lidar", l.azimuth_step);
        l.max_range = rd.get_or<double>(n, "max_range", "lidar", l.max_range);
        l.retro_min_range = rd.get_or<double>(n, "retro_min_range", "lidar", l.retro_min_range);
        l.retro_max_range = rd.get_or<double>(n, "retro_max_range", "lidar", l.retro_max_range);
        l.intensity_noise_sd =
            rd.get_or<double>(n, "intensity_noise_sd", "lidar", l.intensity_noise_sd);
        if (const auto b = n["diffuse_band"]) l.diffuse_band = detail::parse_band(rd, b, "lidar.diffuse_band");
        if (const auto b = n["clutter_band"]) l.clutter_band = detail::parse_band(rd, b, "lidar.clutter_band");
        if (const auto b = n["retro_band"]) l.retro_band = detail::parse_band(rd, b, "lidar.retro_band");
    }

    if (const auto n = root["encoding"]) {
        rd.require_map(n, "encoding");
        const auto mode = rd.get_or<std::string>(n, "mode", "encoding", "amplitude");
        if (mode == "amplitude") {
            scene.encoding = StateEncoding{};
        } else if (mode == "shift") {
            scene.encoding = StateEncoding::shift_coded();
        } else {
            rd.fail(n["mode"], "encoding.mode", "mode must be 'amplitude' or 'shift'");
        }
        StateEncoding& e = scene.encoding;
        e.lo = rd.get_or<double>(n, "lo", "encoding", e.lo);
        e.hi = rd.get_or<double>(n, "hi", "encoding", e.hi);
        e.fixed_peak = rd.get_or<double>(n, "fixed_peak", "encoding", e.fixed_peak);
        e.fixed_amplitude = rd.get_or<double>(n, "fixed_amplitude", "encoding", e.fixed_amplitude);
        e.fwhm = rd.get_or<double>(n, "fwhm", "encoding", e.fwhm);
    }

    if (const auto list = root["sensors"]) {
        if (!list.IsSequence()) rd.fail(list, "sensors", "expected a list");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string path = yaml::Reader::index("sensors", i);
            const YAML::Node n = list[i];
            rd.require_map(n, path);
            PlantSensor s;
            if (!n["position"]) rd.fail(n, path + ".position", "missing required field");
            s.position = rd.vec3(n["position"], path + ".position");
            s.tape_extent = rd.get_or<double>(n, "tape_extent", path, s.tape_extent);
            scene.encoding.encode(s, rd.get_or<double>(n, "state", path, 0.5));
            s.peak_wavelength = rd.get_or<double>(n, "peak_wavelength", path, s.peak_wavelength);
            s.peak_amplitude = rd.get_or<double>(n, "peak_amplitude", path, s.peak_amplitude);
            s.peak_fwhm = rd.get_or<double>(n, "peak_fwhm", path, s.peak_fwhm);
            s.baseline = rd.get_or<double>(n, "baseline", path, s.baseline);
            scene.sensors.push_back(s);
        }
    }

    if (const auto list = root["clutter"]) {
        if (!list.IsSequence()) rd.fail(list, "clutter", "expected a list");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string path = yaml::Reader::index("clutter", i);
            ClutterPatch c;
            c.patch = detail::parse_patch(rd, list[i], path);
            c.spurious_density =
                rd.get_or<double>(list[i], "spurious_density", path, c.spurious_density);
            scene.clutter.push_back(c);
        }
    }

    if (const auto n = root["background"]) {
        rd.require_map(n, "background");
        if (const auto f = n["floor_z"]) {
            if (f.IsNull())
                scene.background.floor_z.reset();
            else
                scene.background.floor_z = rd.as<double>(f, "background.floor_z");
        }
        if (const auto list = n["walls"]) {
            if (!list.IsSequence()) rd.fail(list, "background.walls", "expected a list");
            for (std::size_t i = 0; i < list.size(); ++i)
                scene.background.walls.push_back(
                    detail::parse_patch(rd, list[i], yaml::Reader::index("background.walls", i)));
        }
    }

    validate(scene);
    return scene;
}

inline SceneDescription load_scene(const std::string& path) {
    return parse_scene(io::read_file(path), path);
}

/// Full-precision YAML for `scene`; parse_scene of the result reproduces it exactly.
inline std::string scene_to_yaml(const SceneDescription& scene) {
    using yaml::operator<<;
    YAML::Emitter em;
    em.SetDoublePrecision(17);
    auto band = [&](const IntensityBand& b) {
        em << YAML::Flow << YAML::BeginSeq << b.lo << b.hi << YAML::EndSeq;
    };
    auto patch = [&](const AxisPatch& p) {
        em << YAML::Key << "center" << YAML::Value << p.center;
        em << YAML::Key << "normal_axis" << YAML::Value << detail::axis_name(p.normal_axis);
        em << YAML::Key << "size" << YAML::Value << YAML::Flow << YAML::BeginSeq << p.size_u
           << p.size_v << YAML::EndSeq;
    };

    em << YAML::BeginMap;
    em << YAML::Key << "seed" << YAML::Value << scene.rng_seed;
    em << YAML::Key << "rig" << YAML::Value;
    emit_rig(em, scene.rig);

    const LidarModel& l = scene.lidar;
    em << YAML::Key << "lidar" << YAML::Value << YAML::BeginMap;
    em << YAML::Key << "n_beams" << YAML::Value << l.n_beams;
    em << YAML::Key << "vertical_fov" << YAML::Value << YAML::Flow << YAML::BeginSeq
       << l.fov_upper << l.fov_lower << YAML::EndSeq;
    em << YAML::Key << "azimuth_step" << YAML::Value << l.azimuth_step;
    em << YAML::Key << "max_range" << YAML::Value << l.max_range;
    em << YAML::Key << "retro_min_range" << YAML::Value << l.retro_min_range;
    em << YAML::Key << "retro_max_range" << YAML::Value << l.retro_max_range;
    em << YAML::Key << "intensity_noise_sd" << YAML::Value << l.intensity_noise_sd;
    em << YAML::Key << "diffuse_band" << YAML::Value;
    band(l.diffuse_band);
    em << YAML::Key << "clutter_band" << YAML::Value;
    band(l.clutter_band);
    em << YAML::Key << "retro_band" << YAML::Value;
    band(l.retro_band);
    em << YAML::EndMap;

    const StateEncoding& e = scene.encoding;
    em << YAML::Key << "encoding" << YAML::Value << YAML::BeginMap;
    em << YAML::Key << "mode" << YAML::Value
       << (e.mode == StateEncoding::Mode::Amplitude ? "amplitude" : "shift");
    em << YAML::Key << "lo" << YAML::Value << e.lo;
    em << YAML::Key << "hi" << YAML::Value << e.hi;
    em << YAML::Key << "fixed_peak" << YAML::Value << e.fixed_peak;
    em << YAML::Key << "fixed_amplitude" << YAML::Value << e.fixed_amplitude;
    em << YAML::Key << "fwhm" << YAML::Value << e.fwhm;
    em << YAML::EndMap;

    em << YAML::Key << "sensors" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : scene.sensors) {
        em << YAML::BeginMap;
        em << YAML::Key << "position" << YAML::Value << s.position;
        em << YAML::Key << "tape_extent" << YAML::Value << s.tape_extent;
        em << YAML::Key << "state" << YAML::Value << s.state_score;
        em << YAML::Key << "peak_wavelength" << YAML::Value << s.peak_wavelength;
        em << YAML::Key << "peak_amplitude" << YAML::Value << s.peak_amplitude;
        em << YAML::Key << "peak_fwhm" << YAML::Value << s.peak_fwhm;
        em << YAML::Key << "baseline" << YAML::Value << s.baseline;
        em << YAML::EndMap;
    }
    em << YAML::EndSeq;

    em << YAML::Key << "clutter" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : scene.clutter) {
        em << YAML::BeginMap;
        patch(c.patch);
        em << YAML::Key << "spurious_density" << YAML::Value << c.spurious_density;
        em << YAML::EndMap;
    }
    em << YAML::EndSeq;

    em << YAML::Key << "background" << YAML::Value << YAML::BeginMap;
    em << YAML::Key << "floor_z" << YAML::Value;
    if (scene.background.floor_z)
        em << *scene.background.floor_z;
    else
        em << YAML::Null;
    em << YAML::Key << "walls" << YAML::Value << YAML::BeginSeq;
    for (const auto& w : scene.background.walls) {
        em << YAML::BeginMap;
        patch(w);
        em << YAML::EndMap;
    }
    em << YAML::EndSeq << YAML::EndMap;

    em << YAML::EndMap;
    return std::string(em.c_str()) + "\n";
}

inline void save_scene(const SceneDescription& scene, const std::string& path) {
    io::write_file(path, scene_to_yaml(scene));
}

}  // namespace leafscope

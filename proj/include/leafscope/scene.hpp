#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "leafscope/geom.hpp"

namespace leafscope {

/// Closed intensity interval on the 0-255 return scale.
struct IntensityBand {
    int lo = 0;
    int hi = 255;

    constexpr bool contains(int v) const { return lo <= v && v <= hi; }
    constexpr bool operator==(const IntensityBand&) const = default;
};

enum class Material : std::uint8_t { Diffuse, Clutter, Retro };

inline const char* to_string(Material m) {
    switch (m) {
        case Material::Diffuse: return "diffuse";
        case Material::Clutter: return "clutter";
        case Material::Retro: return "retro";
    }
    return "?";
}

/// Rectangle lying in a plane perpendicular to one coordinate axis. `size`
/// holds the edge lengths along the two remaining axes in ascending axis order
/// (for normal_axis = x that is (y, z)).
struct AxisPatch {
    Vec3 center{};
    int normal_axis = 0;
    double size_u = 1.0;
    double size_v = 1.0;

    constexpr bool operator==(const AxisPatch&) const = default;

    /// Ray parameter of the hit, if the ray from `origin` along `dir` meets the patch.
    std::optional<double> intersect(const Vec3& origin, const Vec3& dir) const {
        const double d = dir[normal_axis];
        if (std::abs(d) < 1e-15) return std::nullopt;
        const double t = (center[normal_axis] - origin[normal_axis]) / d;
        if (!(t > 0.0)) return std::nullopt;
        const Vec3 hit = origin + dir * t;
        const int u = (normal_axis + 1) % 3 < (normal_axis + 2) % 3 ? (normal_axis + 1) % 3
                                                                    : (normal_axis + 2) % 3;
        const int v = 3 - normal_axis - u;
        if (std::abs(hit[u] - center[u]) > size_u / 2.0) return std::nullopt;
        if (std::abs(hit[v] - center[v]) > size_v / 2.0) return std::nullopt;
        return t;
    }
};

/// Retroreflective tape carrying a leaf sensor. Its reflectance spectrum is a
/// Gaussian peak over a flat baseline; the plant state is encoded in it.
struct PlantSensor {
    Vec3 position{};           // tape centroid, m
    double tape_extent = 0.1;  // edge of the square patch, m
    double peak_wavelength = 655.0;
    double peak_amplitude = 0.8;
    double peak_fwhm = 20.0;
    double baseline = 0.0;
    double state_score = 0.5;

    constexpr bool operator==(const PlantSensor&) const = default;

    /// Tape faces the LiDAR along the dominant axis of its position.
    AxisPatch patch() const {
        const double ax = std::abs(position.x), ay = std::abs(position.y),
                     az = std::abs(position.z);
        const int axis = (ax >= ay && ax >= az) ? 0 : (ay >= az ? 1 : 2);
        return {position, axis, tape_extent, tape_extent};
    }
};

/// Glass or metal surface: mostly diffuse-level returns with a sparse
/// fraction of spurious high-intensity returns.
struct ClutterPatch {
    AxisPatch patch{};
    double spurious_density = 0.02;

    constexpr bool operator==(const ClutterPatch&) const = default;
};

struct Background {
    std::optional<double> floor_z = -1.2;
    std::vector<AxisPatch> walls;

    bool operator==(const Background&) const = default;
};

/// How plant state maps onto the sensor spectrum. Amplitude coding moves the
/// peak height between (lo, hi); shift coding moves the peak wavelength.
struct StateEncoding {
    enum class Mode { Amplitude, Shift };
    Mode mode = Mode::Amplitude;
    double lo = 0.2;
    double hi = 1.0;
    double fixed_peak = 655.0;      // used by amplitude coding
    double fixed_amplitude = 0.8;   // used by shift coding
    double fwhm = 20.0;

    bool operator==(const StateEncoding&) const = default;

    static StateEncoding shift_coded() {
        StateEncoding e;
        e.mode = Mode::Shift;
        e.lo = 635.0;
        e.hi = 675.0;
        return e;
    }

    /// Fills the spectral fields of `s` from `state`.
    void encode(PlantSensor& s, double state) const {
        s.state_score = state;
        s.peak_fwhm = fwhm;
        if (mode == Mode::Amplitude) {
            s.peak_wavelength = fixed_peak;
            s.peak_amplitude = lo + state * (hi - lo);
        } else {
            s.peak_wavelength = lo + state * (hi - lo);
            s.peak_amplitude = fixed_amplitude;
        }
    }
};

struct LidarModel {
    int n_beams = 32;
    double fov_upper = 10.67;   // deg
    double fov_lower = -30.67;  // deg
    double azimuth_step = 0.4;  // deg
    double max_range = 70.0;
    double retro_min_range = 0.8;
    double retro_max_range = 2.0;
    double intensity_noise_sd = 2.0;
    IntensityBand diffuse_band{5, 80};
    IntensityBand clutter_band{200, 255};
    IntensityBand retro_band{230, 255};

    bool operator==(const LidarModel&) const = default;

    double beam_elevation(int ring) const {
        return fov_upper - ring * (fov_upper - fov_lower) / (n_beams - 1);
    }
    int azimuth_count() const { return static_cast<int>(std::lround(360.0 / azimuth_step)); }
};

struct SceneDescription {
    std::vector<PlantSensor> sensors;
    std::vector<ClutterPatch> clutter;
    Background background;
    LidarModel lidar;
    RigPose rig;
    StateEncoding encoding;
    std::uint64_t rng_seed = 1;

    bool operator==(const SceneDescription& o) const {
        return sensors == o.sensors && clutter == o.clutter && background == o.background &&
               lidar == o.lidar && rig.camera_position == o.rig.camera_position &&
               rig.mirror_position == o.rig.mirror_position &&
               rig.mirror_default_normal == o.rig.mirror_default_normal &&
               encoding == o.encoding && rng_seed == o.rng_seed;
    }
};

/// What a return hit. `index` points into the scene list named by `kind`
/// (for the floor it is 0).
struct SurfaceRef {
    enum class Kind : std::uint8_t { Sensor, Clutter, Wall, Floor };
    Kind kind = Kind::Wall;
    std::size_t index = 0;

    constexpr bool operator==(const SurfaceRef&) const = default;
};

struct LidarPoint {
    Vec3 position{};
    double range = 0.0;
    std::uint8_t intensity = 0;
    int ring = 0;
    double azimuth = 0.0;  // deg in [0, 360)
    Material material = Material::Diffuse;
    SurfaceRef surface{};

    bool operator==(const LidarPoint&) const = default;
};

struct LidarFrame {
    std::vector<LidarPoint> points;

    bool operator==(const LidarFrame&) const = default;
    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Whether a retro surface whose centroid sits at `range` returns retro-band
/// intensity. The gate is closed on both ends.
inline bool retro_gate_open(const LidarModel& lidar, double range) {
    return lidar.retro_min_range <= range && range <= lidar.retro_max_range;
}

namespace detail {

inline std::uint8_t draw_intensity(std::mt19937_64& rng, const IntensityBand& band,
                                   double noise_sd) {
    std::uniform_real_distribution<double> uni(band.lo, band.hi);
    double v = uni(rng);
    if (noise_sd > 0.0) v += std::normal_distribution<double>(0.0, noise_sd)(rng);
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

}  // namespace detail

struct RayHit {
    double t = std::numeric_limits<double>::infinity();
    SurfaceRef surface{};

    bool found() const { return std::isfinite(t); }
};

/// Nearest surface along the ray `origin + t * dir`, t > 0. `sensor_patches`
/// must hold scene.sensors[i].patch() at index i.
inline RayHit first_hit(const SceneDescription& scene, const std::vector<AxisPatch>& sensor_patches,
                        const Vec3& origin, const Vec3& dir) {
    RayHit best;
    auto consider = [&](std::optional<double> t, SurfaceRef ref) {
        if (t && *t < best.t) best = {*t, ref};
    };
    for (std::size_t i = 0; i < sensor_patches.size(); ++i)
        consider(sensor_patches[i].intersect(origin, dir), {SurfaceRef::Kind::Sensor, i});
    for (std::size_t i = 0; i < scene.clutter.size(); ++i)
        consider(scene.clutter[i].patch.intersect(origin, dir), {SurfaceRef::Kind::Clutter, i});
    for (std::size_t i = 0; i < scene.background.walls.size(); ++i)
        consider(scene.background.walls[i].intersect(origin, dir), {SurfaceRef::Kind::Wall, i});
    if (scene.background.floor_z && std::abs(dir.z) > 1e-15) {
        const double t = (*scene.background.floor_z - origin.z) / dir.z;
        if (t > 0.0) consider(t, {SurfaceRef::Kind::Floor, 0});
    }
    return best;
}

inline RayHit first_hit(const SceneDescription& scene, const Vec3& origin, const Vec3& dir) {
    std::vector<AxisPatch> patches;
    for (const auto& s : scene.sensors) patches.push_back(s.patch());
    return first_hit(scene, patches, origin, dir);
}

/// Beam-by-azimuth ray cast of one sweep. Each ray keeps only its first hit.
/// Intensities are drawn from the hit material's band plus Gaussian noise,
/// in ring-major, azimuth-minor order from a single stream seeded by `seed`.
inline LidarFrame render_frame(const SceneDescription& scene, std::uint64_t seed) {
    LidarFrame frame;
    const bool nothing = scene.sensors.empty() && scene.clutter.empty() &&
                         scene.background.walls.empty() && !scene.background.floor_z;
    if (nothing) return frame;

    const LidarModel& lidar = scene.lidar;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<AxisPatch> sensor_patches;
    std::vector<bool> sensor_lit;
    for (const auto& s : scene.sensors) {
        sensor_patches.push_back(s.patch());
        sensor_lit.push_back(retro_gate_open(lidar, distance(s.position, scene.rig.lidar_origin)));
    }

    const Vec3 origin = scene.rig.lidar_origin;
    const int n_az = lidar.azimuth_count();
    for (int ring = 0; ring < lidar.n_beams; ++ring) {
        const double el = deg2rad(lidar.beam_elevation(ring));
        for (int k = 0; k < n_az; ++k) {
            const double az_deg = k * lidar.azimuth_step;
            const double az = deg2rad(az_deg);
            const Vec3 dir{std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
                           std::sin(el)};

            const auto [best, hit] = first_hit(scene, sensor_patches, origin, dir);
            if (!(best <= lidar.max_range)) continue;

            Material mat = Material::Diffuse;
            const IntensityBand* band = &lidar.diffuse_band;
            if (hit.kind == SurfaceRef::Kind::Sensor && sensor_lit[hit.index]) {
                mat = Material::Retro;
                band = &lidar.retro_band;
            } else if (hit.kind == SurfaceRef::Kind::Clutter &&
                       unit(rng) < scene.clutter[hit.index].spurious_density) {
                mat = Material::Clutter;
                band = &lidar.clutter_band;
            }

            LidarPoint p;
            p.position = origin + dir * best;
            p.range = best;
            p.intensity = detail::draw_intensity(rng, *band, lidar.intensity_noise_sd);
            p.ring = ring;
            p.azimuth = az_deg;
            p.material = mat;
            p.surface = hit;
            frame.points.push_back(p);
        }
    }
    return frame;
}

inline LidarFrame render_frame(const SceneDescription& scene) {
    return render_frame(scene, scene.rng_seed);
}

}  // namespace leafscope

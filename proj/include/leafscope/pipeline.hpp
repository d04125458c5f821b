#pragma once

// End-to-end interrogation run: frame source -> isolation -> steering ->
// focus -> spectral. Steering and focus are serialized (one mirror, one lens);
// the spectral stage is pure per target and may fan out across threads.
// Records always come back in ascending target id.

#include <cstdint>
#include <filesystem>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "leafscope/focus.hpp"
#include "leafscope/isolate.hpp"
#include "leafscope/report.hpp"
#include "leafscope/scene.hpp"
#include "leafscope/scene_io.hpp"
#include "leafscope/spectral.hpp"
#include "leafscope/steer.hpp"
#include "leafscope/yaml_util.hpp"

namespace leafscope {

enum class FocusDistanceSource {
    LidarRange,   // mean member range from the LiDAR origin
    FoldedPath,   // camera -> mirror -> target optical path
};

struct PipelineConfig {
    SceneDescription scene;
    std::string scene_path;
    IsolationParams isolation{};
    std::optional<RigPose> rig;  // overrides scene.rig when set
    SteeringEnvelope envelope{};
    FocusCalibration calibration = ideal_calibration();
    std::string calibration_path;
    double defocus_tolerance = 0.05;
    FocusDistanceSource distance_source = FocusDistanceSource::LidarRange;
    SpectralSettings spectral{};
    bool parallel_spectral = true;
    std::uint64_t seed = 1;
    std::string output_path;

    const RigPose& active_rig() const { return rig ? *rig : scene.rig; }
};

namespace skip {
inline constexpr const char* kOutOfRangeGate = "out_of_range_gate";
inline constexpr const char* kOutOfEnvelope = "out_of_envelope";
inline constexpr const char* kDegenerateGeometry = "degenerate_geometry";
inline constexpr const char* kNoSensorInView = "no_sensor_in_view";
inline constexpr const char* kInsufficientSignal = "insufficient_signal";
inline constexpr const char* kSaturated = "saturated";
}  // namespace skip

/// Per-target spectral stream seed derived from the run seed.
inline std::uint64_t target_seed(std::uint64_t run_seed, std::size_t target_id) {
    std::uint64_t z = run_seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(target_id) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Scene sensor the camera sees along the beam folded by `cmd`, if the first
/// surface on that beam is a sensor tape.
inline std::optional<std::size_t> sensor_in_view(const SceneDescription& scene, const RigPose& rig,
                                                 const MirrorCommand& cmd) {
    const Vec3 normal = euler_to_normal({cmd.pitch, cmd.yaw}, rig.mirror_default_normal);
    const RayHit hit = first_hit(scene, rig.mirror_position, folded_axis(rig, normal));
    if (hit.found() && hit.surface.kind == SurfaceRef::Kind::Sensor) return hit.surface.index;
    return std::nullopt;
}

struct RunResult {
    LidarFrame frame;
    std::vector<ClusterReport> clusters;
    std::vector<InterrogationRecord> records;
};

/// Full run with intermediate products. Per-target problems become skip
/// records; clusters larger than the tape size limit are not targets.
inline RunResult run_pipeline_detailed(const PipelineConfig& cfg) {
    RunResult out;
    const RigPose& rig = cfg.active_rig();
    out.frame = render_frame(cfg.scene, cfg.seed);
    out.clusters = detect(out.frame, cfg.isolation);

    struct SpectralJob {
        std::size_t record;
        std::size_t sensor;
        std::uint64_t seed;
    };
    std::vector<SpectralJob> jobs;

    for (const ClusterReport& c : out.clusters) {
        if (!c.extent_ok) continue;
        InterrogationRecord rec;
        rec.target_id = c.id;
        rec.centroid = c.centroid;
        rec.mean_range = c.mean_range;
        if (!c.range_ok) {
            rec.skip_reason = skip::kOutOfRangeGate;
            out.records.push_back(rec);
            continue;
        }

        MirrorCommand cmd;
        try {
            cmd = aim_at(rig, c.centroid, cfg.envelope);
        } catch (const DegenerateGeometry&) {
            rec.skip_reason = skip::kDegenerateGeometry;
            out.records.push_back(rec);
            continue;
        }
        rec.pitch = cmd.pitch;
        rec.yaw = cmd.yaw;
        rec.in_envelope = cmd.in_envelope;
        if (!cmd.in_envelope) {
            rec.skip_reason = skip::kOutOfEnvelope;
            out.records.push_back(rec);
            continue;
        }

        rec.focus_distance = cfg.distance_source == FocusDistanceSource::LidarRange
                                 ? c.mean_range
                                 : focus_path_length(rig, c.centroid);
        const FocusCommand focus{required_power(cfg.calibration, rec.focus_distance),
                                 rec.focus_distance, cfg.defocus_tolerance};
        rec.focus_power = focus.power;
        rec.defocus_error = defocus_error(cfg.calibration, focus.power, rec.focus_distance);

        const auto seen = sensor_in_view(cfg.scene, rig, cmd);
        if (!seen) {
            rec.skip_reason = skip::kNoSensorInView;
            out.records.push_back(rec);
            continue;
        }
        jobs.push_back({out.records.size(), *seen, target_seed(cfg.seed, c.id)});
        out.records.push_back(rec);
    }

    auto run_job = [&cfg](const SpectralJob& job) -> std::optional<SpectralSweep> {
        try {
            return interrogate(cfg.scene.sensors[job.sensor], cfg.spectral, cfg.scene.encoding, job.seed);
        } catch (const InsufficientSignal&) {
            return std::nullopt;
        } catch (const SaturatedSweep&) {
            SpectralSweep s;
            s.exposure = -1.0;  // marks saturation for the merge below
            return s;
        }
    };

    std::vector<std::optional<SpectralSweep>> results(jobs.size());
    if (cfg.parallel_spectral && jobs.size() > 1) {
        std::vector<std::future<std::optional<SpectralSweep>>> futures;
        for (const auto& job : jobs) futures.push_back(std::async(std::launch::async, run_job, job));
        for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = futures[i].get();
    } else {
        for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = run_job(jobs[i]);
    }

    for (std::size_t i = 0; i < jobs.size(); ++i) {
        InterrogationRecord& rec = out.records[jobs[i].record];
        if (!results[i]) {
            rec.skip_reason = skip::kInsufficientSignal;
            continue;
        }
        const SpectralSweep& s = *results[i];
        if (s.exposure < 0.0) {
            rec.skip_reason = skip::kSaturated;
            continue;
        }
        for (std::size_t b = 0; b < 6; ++b) rec.band_intensity[b] = s.readings[b].intensity;
        rec.estimated_peak = s.estimated_peak;
        rec.estimated_amplitude = s.estimated_amplitude;
        rec.state_score = s.state_score;
    }
    return out;
}

inline std::vector<InterrogationRecord> run_pipeline(const PipelineConfig& cfg) {
    return run_pipeline_detailed(cfg).records;
}

struct StageInfo {
    std::string name;
    std::string input;
    std::string output;
};

struct ChannelInfo {
    std::string from;
    std::string to;
    std::string message;
};

struct StageGraph {
    std::vector<StageInfo> stages;
    std::vector<ChannelInfo> channels;
};

/// Stage topology of run_pipeline, for documentation and introspection.
inline StageGraph stage_graph() {
    return {
        {
            {"frame_source", "SceneDescription", "LidarFrame"},
            {"isolation", "LidarFrame", "ClusterReport"},
            {"steering", "ClusterReport", "MirrorCommand"},
            {"focus", "MirrorCommand", "FocusCommand"},
            {"spectral", "FocusCommand", "SpectralSweep"},
        },
        {
            {"frame_source", "isolation", "LidarFrame"},
            {"isolation", "steering", "ClusterReport"},
            {"steering", "focus", "MirrorCommand"},
            {"focus", "spectral", "FocusCommand"},
        },
    };
}

namespace detail {

inline FilterWheel parse_wheel(const yaml::Reader& rd, const YAML::Node& node) {
    if (!node.IsSequence() || node.size() != 6) rd.fail(node, "spectral.wheel", "expected exactly 6 bands");
    FilterWheel w;
    for (std::size_t i = 0; i < 6; ++i) {
        const std::string path = yaml::Reader::index("spectral.wheel", i);
        rd.require_map(node[i], path);
        w[i].center = rd.get<double>(node[i], "center", path);
        w[i].fwhm = rd.get_or<double>(node[i], "fwhm", path, 10.0);
        w[i].transmission_peak = rd.get_or<double>(node[i], "transmission", path, 1.0);
        if (!(w[i].fwhm > 0.0) || !(w[i].center >= 400.0 && w[i].center <= 1000.0) ||
            !(w[i].transmission_peak > 0.0 && w[i].transmission_peak <= 1.0))
            rd.fail(node[i], path, "band needs fwhm > 0, center in [400, 1000], transmission in (0, 1]");
        for (std::size_t j = 0; j < i; ++j)
            if (w[j].center == w[i].center) rd.fail(node[i], path, "band centers must be distinct");
    }
    return w;
}

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path fp(p);
    return (fp.is_absolute() ? fp : base / fp).lexically_normal().string();
}

}  // namespace detail

/// Parses a pipeline config. Relative paths resolve against `base_dir`.
/// Any problem, including unreadable referenced files, raises ConfigError.
inline PipelineConfig parse_config(const std::string& text, const std::string& source,
                                   const std::filesystem::path& base_dir) {
    try {
        const yaml::Reader rd(source);
        const YAML::Node root = rd.root(text);
        if (!root.IsMap()) rd.fail(root, "", "config must be a mapping");
        PipelineConfig cfg;

        const YAML::Node scene = root["scene"];
        if (!scene) rd.fail(root, "scene", "missing required field");
        if (scene.IsScalar()) {
            cfg.scene_path = detail::resolve(base_dir, rd.as<std::string>(scene, "scene"));
            cfg.scene = load_scene(cfg.scene_path);
        } else {
            rd.require_map(scene, "scene");
            YAML::Emitter em;
            em << scene;
            cfg.scene = parse_scene(em.c_str(), source + ":scene");
        }
        cfg.seed = rd.get_or<std::uint64_t>(root, "seed", "", cfg.scene.rng_seed);
        if (const auto out = root["output"]) cfg.output_path = detail::resolve(base_dir, rd.as<std::string>(out, "output"));
        if (const auto r = root["rig"]) {
            cfg.rig = parse_rig(rd, r, "rig");
            validate(*cfg.rig);
        }

        if (const auto n = root["isolation"]) {
            rd.require_map(n, "isolation");
            IsolationParams& iso = cfg.isolation;
            if (const auto b = n["band"]) {
                const auto a = rd.numbers<2>(b, "isolation.band");
                iso.band = {static_cast<int>(a[0]), static_cast<int>(a[1])};
                validate(iso.band, "isolation.band");
            }
            iso.dbscan.eps = rd.get_or<double>(n, "eps", "isolation", iso.dbscan.eps);
            iso.dbscan.min_pts = rd.get_or<std::size_t>(n, "min_pts", "isolation", iso.dbscan.min_pts);
            iso.max_extent = rd.get_or<double>(n, "max_extent", "isolation", iso.max_extent);
            if (const auto g = n["range_gate"]) {
                const auto a = rd.numbers<2>(g, "isolation.range_gate");
                iso.range_gate = {a[0], a[1]};
            }
            const auto search = rd.get_or<std::string>(n, "neighbor_search", "isolation", "brute_force");
            if (search == "grid") iso.dbscan.search = NeighborSearch::Grid;
            else if (search != "brute_force") rd.fail(n["neighbor_search"], "isolation.neighbor_search", "expected brute_force or grid");
            if (!(iso.dbscan.eps > 0.0) || iso.dbscan.min_pts < 1)
                rd.fail(n, "isolation", "need eps > 0 and min_pts >= 1");
            if (!(iso.range_gate.min < iso.range_gate.max) || !(iso.max_extent > 0.0))
                rd.fail(n, "isolation", "need range_gate min < max and max_extent > 0");
        }

        if (const auto n = root["steering"]) {
            rd.require_map(n, "steering");
            cfg.envelope.limit_deg = rd.get_or<double>(n, "limit_deg", "steering", cfg.envelope.limit_deg);
            const auto ref = rd.get_or<std::string>(n, "referent", "steering", "normal");
            if (ref == "beam") cfg.envelope.referent = EnvelopeReferent::OpticalBeam;
            else if (ref != "normal") rd.fail(n["referent"], "steering.referent", "expected normal or beam");
            if (!(cfg.envelope.limit_deg > 0.0 && cfg.envelope.limit_deg <= 90.0))
                rd.fail(n, "steering.limit_deg", "limit must be in (0, 90]");
        }

        if (const auto n = root["focus"]) {
            rd.require_map(n, "focus");
            const double p_inf = rd.get_or<double>(n, "power_at_infinity", "focus", 0.0);
            PowerLimits limits;
            if (const auto l = n["power_limits"]) {
                const auto a = rd.numbers<2>(l, "focus.power_limits");
                limits = {a[0], a[1]};
            }
            if (const auto c = n["calibration"]) {
                cfg.calibration_path = detail::resolve(base_dir, rd.as<std::string>(c, "focus.calibration"));
                cfg.calibration = load_calibration(cfg.calibration_path, p_inf, limits);
            } else {
                cfg.calibration = ideal_calibration(p_inf, limits);
            }
            cfg.defocus_tolerance = rd.get_or<double>(n, "tolerance", "focus", cfg.defocus_tolerance);
            const auto src = rd.get_or<std::string>(n, "distance_source", "focus", "lidar_range");
            if (src == "folded_path") cfg.distance_source = FocusDistanceSource::FoldedPath;
            else if (src != "lidar_range") rd.fail(n["distance_source"], "focus.distance_source", "expected lidar_range or folded_path");
        }

        cfg.spectral.fit.sensor_fwhm = cfg.scene.encoding.fwhm;
        if (const auto n = root["spectral"]) {
            rd.require_map(n, "spectral");
            SpectralSettings& sp = cfg.spectral;
            if (const auto w = n["wheel"]) sp.wheel = detail::parse_wheel(rd, w);
            if (const auto q = n["qe"]) {
                rd.require_map(q, "spectral.qe");
                sp.qe.lambda_lo = rd.get_or<double>(q, "lambda_lo", "spectral.qe", sp.qe.lambda_lo);
                sp.qe.qe_lo = rd.get_or<double>(q, "qe_lo", "spectral.qe", sp.qe.qe_lo);
                sp.qe.lambda_hi = rd.get_or<double>(q, "lambda_hi", "spectral.qe", sp.qe.lambda_hi);
                sp.qe.qe_hi = rd.get_or<double>(q, "qe_hi", "spectral.qe", sp.qe.qe_hi);
                if (!(sp.qe.qe_lo >= 0 && sp.qe.qe_lo <= 1 && sp.qe.qe_hi >= 0 && sp.qe.qe_hi <= 1) ||
                    sp.qe.lambda_lo == sp.qe.lambda_hi)
                    rd.fail(q, "spectral.qe", "qe values must be in [0, 1] at distinct wavelengths");
            }
            sp.exposure = rd.get_or<double>(n, "exposure", "spectral", sp.exposure);
            sp.noise_sd = rd.get_or<double>(n, "noise_sd", "spectral", sp.noise_sd);
            sp.fit.sensor_fwhm = rd.get_or<double>(n, "fit_fwhm", "spectral", sp.fit.sensor_fwhm);
            sp.fit.baseline = rd.get_or<double>(n, "fit_baseline", "spectral", sp.fit.baseline);
            cfg.parallel_spectral = rd.get_or<bool>(n, "parallel", "spectral", cfg.parallel_spectral);
            if (!(sp.exposure > 0.0) || !(sp.noise_sd >= 0.0) || !(sp.fit.sensor_fwhm > 0.0))
                rd.fail(n, "spectral", "need exposure > 0, noise_sd >= 0, fit_fwhm > 0");
        }
        return cfg;
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

inline PipelineConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text, path, std::filesystem::path(path).parent_path());
}

}  // namespace leafscope

// leafscope command-line front end.
//
// Exit codes: 0 ok, 2 bad config/scene/input, 3 file I/O, 1 anything else.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "leafscope/leafscope.hpp"

using namespace leafscope;

namespace {

std::string g6(double v) { return detail::fmt6(v); }

std::string frame_csv(const LidarFrame& f) {
    std::ostringstream os;
    os << "x,y,z,range,intensity,ring,azimuth,material\n";
    for (const auto& p : f.points)
        os << g6(p.position.x) << ',' << g6(p.position.y) << ',' << g6(p.position.z) << ',' << g6(p.range) << ','
           << static_cast<int>(p.intensity) << ',' << p.ring << ',' << g6(p.azimuth) << ',' << to_string(p.material)
           << '\n';
    return os.str();
}

std::string clusters_csv(const std::vector<ClusterReport>& cs) {
    std::ostringstream os;
    os << "id,centroid_x,centroid_y,centroid_z,mean_range,point_count,extent,valid\n";
    for (const auto& c : cs)
        os << c.id << ',' << g6(c.centroid.x) << ',' << g6(c.centroid.y) << ',' << g6(c.centroid.z) << ','
           << g6(c.mean_range) << ',' << c.point_count << ',' << g6(c.extent) << ',' << (c.valid ? "true" : "false")
           << '\n';
    return os.str();
}

// Rig from a scene or pipeline config file; pipeline configs may override it.
RigPose rig_from(const std::string& path) {
    if (path.empty()) return {};
    const std::string text = io::read_file(path);
    const yaml::Reader rd(path);
    const YAML::Node root = rd.root(text);
    if (root.IsMap() && root["scene"]) return load_config(path).active_rig();
    RigPose rig;
    if (root.IsMap() && root["rig"]) rig = parse_rig(rd, root["rig"], "rig");
    validate(rig);
    return rig;
}

int run(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed) {
    PipelineConfig cfg = load_config(config);
    if (seed) cfg.seed = *seed;
    const auto records = run_pipeline(cfg);
    const std::string dest = out.empty() ? cfg.output_path : out;
    if (dest.empty() || dest == "-") {
        std::cout << format_report(records);
    } else {
        write_report(records, dest);
        std::size_t done = 0;
        for (const auto& r : records) done += r.complete();
        std::cerr << records.size() << " targets, " << done << " interrogated, report written to " << dest << '\n';
    }
    return 0;
}

int simulate(const std::string& scene_path, const std::string& out, std::optional<std::uint64_t> seed) {
    const SceneDescription scene = load_scene(scene_path);
    const LidarFrame f = render_frame(scene, seed.value_or(scene.rng_seed));
    io::write_file(out, frame_csv(f));
    std::cerr << f.size() << " returns written to " << out << '\n';
    return 0;
}

int detect_cmd(const std::string& scene_path, std::optional<std::uint64_t> seed, const std::string& csv) {
    const SceneDescription scene = load_scene(scene_path);
    const auto reports = detect(render_frame(scene, seed.value_or(scene.rng_seed)), IsolationParams{});
    for (const auto& c : reports)
        std::cout << "cluster " << c.id << " centroid " << c.centroid << " mean_range " << g6(c.mean_range)
                  << " points " << c.point_count << " valid " << (c.valid ? "yes" : "no") << '\n';
    if (reports.empty()) std::cout << "no clusters\n";
    if (!csv.empty()) io::write_file(csv, clusters_csv(reports));
    return 0;
}

int steer_cmd(const std::string& rig_path, const std::vector<double>& target, const std::string& referent,
              double limit) {
    const RigPose rig = rig_from(rig_path);
    SteeringEnvelope env{limit, referent == "beam" ? EnvelopeReferent::OpticalBeam : EnvelopeReferent::MirrorNormal};
    const Vec3 t{target[0], target[1], target[2]};
    const MirrorCommand c = aim_at(rig, t, env);
    std::cout << "pitch_deg " << g6(c.pitch) << "\nyaw_deg " << g6(c.yaw) << "\nin_envelope "
              << (c.in_envelope ? "true" : "false") << "\npointing_residual_deg " << g6(c.pointing_residual)
              << "\nnormal_deviation_deg " << g6(c.normal_deviation) << "\nbeam_deviation_deg "
              << g6(c.beam_deviation) << "\nfocus_path_m " << g6(focus_path_length(rig, t)) << '\n';
    return 0;
}

int focus_cmd(const std::vector<double>& distances, const std::string& cal_path, double p_inf) {
    const FocusCalibration cal = cal_path.empty() ? ideal_calibration(p_inf) : load_calibration(cal_path, p_inf);
    for (const auto& cmd : track_focus(cal, distances))
        std::cout << "distance_m " << g6(cmd.target_distance) << " power_D " << g6(cmd.power) << '\n';
    return 0;
}

int interrogate_cmd(const std::string& scene_path, std::size_t sensor, std::uint64_t seed, double noise,
                    double exposure, const std::string& csv) {
    const SceneDescription scene = load_scene(scene_path);
    if (sensor >= scene.sensors.size())
        throw ValidationError("sensor " + std::to_string(sensor) + " not in scene (" +
                              std::to_string(scene.sensors.size()) + " sensors)");
    SpectralSettings settings;
    settings.noise_sd = noise;
    settings.exposure = exposure;
    settings.fit.sensor_fwhm = scene.encoding.fwhm;
    const SpectralSweep s = interrogate(scene.sensors[sensor], settings, scene.encoding, seed);
    std::ostringstream table;
    table << "band_nm,intensity,saturated\n";
    for (const auto& r : s.readings)
        table << g6(r.band.center) << ',' << g6(r.intensity) << ',' << (r.saturated ? "true" : "false") << '\n';
    std::cout << table.str() << "estimated_peak_nm " << g6(s.estimated_peak) << "\nestimated_amplitude "
              << g6(s.estimated_amplitude) << "\nstate_score " << g6(s.state_score) << '\n';
    if (!csv.empty()) io::write_file(csv, table.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Retroreflective plant-sensor detection, steering, focus and spectral interrogation"};
    app.require_subcommand(1);

    std::string config, out, scene, csv, rig, referent = "normal", cal;
    std::optional<std::uint64_t> seed;
    std::uint64_t iseed = 1;
    std::vector<double> target, distances;
    double limit = 39.0, p_inf = 0.0, noise = 0.002, exposure = 0.1;
    std::size_t sensor = 0;

    auto* run_c = app.add_subcommand("run", "run the full pipeline and write the report CSV");
    run_c->add_option("--config,-c", config, "pipeline config file")->required();
    run_c->add_option("--out,-o", out, "report path, overrides the config ('-' for stdout)");
    run_c->add_option("--seed", seed, "overrides the config seed");

    auto* sim_c = app.add_subcommand("simulate", "render one LiDAR frame to CSV");
    sim_c->add_option("--scene,-s", scene, "scene file")->required();
    sim_c->add_option("--out,-o", out, "frame CSV path")->required();
    sim_c->add_option("--seed", seed, "overrides the scene seed");

    auto* det_c = app.add_subcommand("detect", "list retroreflector clusters in a simulated frame");
    det_c->add_option("--scene,-s", scene, "scene file")->required();
    det_c->add_option("--seed", seed, "overrides the scene seed");
    det_c->add_option("--csv", csv, "also write the clusters as CSV");

    auto* steer_c = app.add_subcommand("steer", "mirror command for a target point");
    steer_c->add_option("--rig,-r", rig, "scene or pipeline config holding the rig (default rig if omitted)");
    steer_c->add_option("--target,-t", target, "target x y z in meters")->required()->expected(3);
    steer_c->add_option("--referent", referent, "what the limit bounds")->check(CLI::IsMember({"normal", "beam"}));
    steer_c->add_option("--limit", limit, "travel limit in degrees")->check(CLI::Range(0.0, 90.0));

    auto* focus_c = app.add_subcommand("focus", "lens power for one or more distances");
    focus_c->add_option("--distance,-d", distances, "target distance(s) in meters")->required();
    focus_c->add_option("--calibration", cal, "two-column calibration table (ideal thin lens if omitted)");
    focus_c->add_option("--power-at-infinity", p_inf, "diopters");

    auto* int_c = app.add_subcommand("interrogate", "filter-wheel sweep and state estimate for one sensor");
    int_c->add_option("--scene,-s", scene, "scene file")->required();
    int_c->add_option("--sensor", sensor, "sensor index in the scene")->required();
    int_c->add_option("--seed", iseed, "noise seed");
    int_c->add_option("--noise", noise, "reading noise sd")->check(CLI::NonNegativeNumber);
    int_c->add_option("--exposure", exposure, "exposure gain")->check(CLI::PositiveNumber);
    int_c->add_option("--csv", csv, "also write the readings as CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_c) return run(config, out, seed);
        if (*sim_c) return simulate(scene, out, seed);
        if (*det_c) return detect_cmd(scene, seed, csv);
        if (*steer_c) return steer_cmd(rig, target, referent, limit);
        if (*focus_c) return focus_cmd(distances, cal, p_inf);
        if (*int_c) return interrogate_cmd(scene, sensor, iseed, noise, exposure, csv);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "invalid: " << e.what() << '\n';
        return 2;
    } catch (const NonPositiveDistance& e) {
        std::cerr << "invalid: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

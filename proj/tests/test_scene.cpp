#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "leafscope/scene.hpp"
#include "leafscope/scene_io.hpp"

using namespace leafscope;

namespace {

SceneDescription one_sensor_at(double range) {
    SceneDescription s;
    PlantSensor p;
    p.position = {range, 0.0, 0.0};
    s.sensors.push_back(p);
    return s;
}

std::size_t retro_band_hits_on_sensors(const SceneDescription& scene, const LidarFrame& f) {
    std::size_t n = 0;
    for (const auto& p : f.points)
        if (p.surface.kind == SurfaceRef::Kind::Sensor && scene.lidar.retro_band.contains(p.intensity)) ++n;
    return n;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("leafscope_test_" + name);
}

}  // namespace

TEST(LoadScene, MinimalFile) {
    const auto path = temp_path("minimal.yaml");
    io::write_file(path.string(), "sensors:\n  - position: [1.5, 0, 0]\n");
    const SceneDescription s = load_scene(path.string());
    ASSERT_EQ(s.sensors.size(), 1u);
    EXPECT_EQ(s.sensors[0].position, (Vec3{1.5, 0, 0}));
    EXPECT_EQ(s.lidar.n_beams, 32);
    std::filesystem::remove(path);
}

TEST(LoadScene, InvertedRetroGateIsRejected) {
    EXPECT_THROW(parse_scene("lidar:\n  retro_min_range: 2.5\n  retro_max_range: 2.0\n"), ValidationError);
}

TEST(LoadScene, OtherInvariantViolations) {
    EXPECT_THROW(parse_scene("lidar:\n  n_beams: 16\n"), ValidationError);
    EXPECT_THROW(parse_scene("lidar:\n  retro_max_range: 80\n"), ValidationError);
    EXPECT_THROW(parse_scene("sensors:\n  - position: [1, 0, 0]\n    tape_extent: 0.3\n"), ValidationError);
    EXPECT_THROW(parse_scene("sensors:\n  - position: [1, 0, 0]\n    peak_wavelength: 720\n"), ValidationError);
    EXPECT_THROW(parse_scene("sensors:\n  - position: [1, 0, 0]\n    peak_amplitude: 0\n"), ValidationError);
    EXPECT_THROW(parse_scene("rig:\n  camera_position: [0, 0, -0.1]\n"), ValidationError);
    EXPECT_THROW(parse_scene("rig:\n  mirror_default_normal: [0, 0, 1]\n"), ValidationError);
}

TEST(LoadScene, ParseErrorCarriesLineAndField) {
    try {
        parse_scene("seed: 3\nsensors:\n  - position: [1, 0]\n", "scene.yaml");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(e.field().find("sensors[0].position"), std::string::npos) << e.field();
    }
    try {
        parse_scene("seed: 3\nlidar:\n  max_range: far\n", "scene.yaml");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_EQ(e.field(), "lidar.max_range");
    }
    EXPECT_THROW(parse_scene("sensors: [\n"), ParseError);
    EXPECT_THROW(parse_scene("sensors:\n  - tape_extent: 0.1\n"), ParseError);
    EXPECT_THROW(parse_scene("clutter:\n  - center: [1, 0, 0]\n    normal_axis: w\n    size: [1, 1]\n"), ParseError);
}

TEST(LoadScene, MissingFileIsIoError) {
    EXPECT_THROW(load_scene("/nonexistent/dir/scene.yaml"), IoError);
}

TEST(LoadScene, StateDrivesSpectrum) {
    const SceneDescription amp = parse_scene("sensors:\n  - position: [1, 0, 0]\n    state: 0.25\n");
    EXPECT_DOUBLE_EQ(amp.sensors[0].peak_amplitude, 0.2 + 0.25 * 0.8);
    EXPECT_DOUBLE_EQ(amp.sensors[0].peak_wavelength, 655.0);
    const SceneDescription sh =
        parse_scene("encoding:\n  mode: shift\nsensors:\n  - position: [1, 0, 0]\n    state: 0.25\n");
    EXPECT_DOUBLE_EQ(sh.sensors[0].peak_wavelength, 635.0 + 0.25 * 40.0);
    EXPECT_DOUBLE_EQ(sh.sensors[0].peak_amplitude, 0.8);
}

TEST(SaveScene, RoundTripIsIdentical) {
    SceneDescription s;
    s.rng_seed = 987654321;
    s.rig.camera_position = {0.01, 0.123456789, -0.0987654321};
    s.lidar.azimuth_step = 0.2;
    s.lidar.retro_band = {228, 255};
    s.encoding = StateEncoding::shift_coded();
    PlantSensor a;
    a.position = {1.1, -0.3, 0.2};
    s.encoding.encode(a, 1.0 / 3.0);
    a.baseline = 0.05;
    PlantSensor b;
    b.position = {0.3, 1.7, -0.4};
    b.tape_extent = 0.07;
    s.encoding.encode(b, 0.9);
    b.peak_fwhm = 17.5;
    s.sensors = {a, b};
    s.clutter.push_back({{{2.0, 0.5, 0.0}, 0, 0.8, 0.6}, 0.1});
    s.background.floor_z.reset();
    s.background.walls.push_back({{0.0, 4.0, 0.0}, 1, 8.0, 3.0});

    const auto path = temp_path("roundtrip.yaml");
    save_scene(s, path.string());
    const SceneDescription back = load_scene(path.string());
    EXPECT_TRUE(back == s);
    EXPECT_EQ(scene_to_yaml(back), scene_to_yaml(s));
    std::filesystem::remove(path);
}

TEST(RenderFrame, SensorInsideGateGivesRetroReturns) {
    const SceneDescription s = one_sensor_at(1.5);
    EXPECT_GE(retro_band_hits_on_sensors(s, render_frame(s, 1)), 1u);
}

TEST(RenderFrame, SensorBeyondGateGivesNoRetroReturns) {
    const SceneDescription s = one_sensor_at(3.0);
    const LidarFrame f = render_frame(s, 1);
    std::size_t on_sensor = 0;
    for (const auto& p : f.points) {
        if (p.surface.kind != SurfaceRef::Kind::Sensor) continue;
        ++on_sensor;
        EXPECT_FALSE(s.lidar.retro_band.contains(p.intensity));
        EXPECT_EQ(p.material, Material::Diffuse);
    }
    EXPECT_GT(on_sensor, 0u);  // the tape is still seen, only dimly
}

TEST(RenderFrame, EmptySceneGivesEmptyFrame) {
    SceneDescription s;
    s.background.floor_z.reset();
    EXPECT_TRUE(render_frame(s, 1).empty());
}

TEST(RenderFrame, DeterministicForSeed) {
    SceneDescription s = one_sensor_at(1.2);
    s.clutter.push_back({{{1.8, -0.8, 0.0}, 0, 0.6, 0.6}, 0.2});
    const LidarFrame a = render_frame(s, 42), b = render_frame(s, 42);
    EXPECT_TRUE(a == b);
    const LidarFrame c = render_frame(s, 43);
    EXPECT_FALSE(a == c);
}

TEST(RenderFrame, FrameInvariants) {
    SceneDescription s = one_sensor_at(1.4);
    s.clutter.push_back({{{1.5, 1.0, 0.0}, 0, 1.0, 1.0}, 0.3});
    s.background.walls.push_back({{6.0, 0.0, 0.0}, 0, 20.0, 10.0});
    const LidarFrame f = render_frame(s, 5);
    ASSERT_FALSE(f.empty());
    for (const auto& p : f.points) {
        EXPECT_GT(p.range, 0.0);
        EXPECT_LE(p.range, s.lidar.max_range);
        EXPECT_GE(p.ring, 0);
        EXPECT_LE(p.ring, 31);
        EXPECT_GE(p.azimuth, 0.0);
        EXPECT_LT(p.azimuth, 360.0);
        const double el = rad2deg(std::atan2(p.position.z, std::hypot(p.position.x, p.position.y)));
        EXPECT_NEAR(el, s.lidar.beam_elevation(p.ring), 1e-9);
        EXPECT_NEAR(p.position.norm(), p.range, 1e-9);
    }
}

TEST(RenderFrame, NoRetroOutsideGateOverManySeeds) {
    for (double r : {0.5, 0.79, 2.01, 2.5, 3.0}) {
        const SceneDescription s = one_sensor_at(r);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            for (const auto& p : render_frame(s, seed).points)
                if (p.surface.kind == SurfaceRef::Kind::Sensor) {
                    EXPECT_LT(p.intensity, s.lidar.retro_band.lo) << "range " << r;
                }
        }
    }
}

TEST(RenderFrame, OccludedSurfaceNeverReturns) {
    SceneDescription s = one_sensor_at(1.5);
    s.background.floor_z.reset();
    // opaque panel in front of the tape, larger than it
    s.background.walls.push_back({{1.0, 0.0, 0.0}, 0, 0.5, 0.5});
    const LidarFrame f = render_frame(s, 9);
    ASSERT_FALSE(f.empty());
    for (const auto& p : f.points) {
        EXPECT_NE(p.surface.kind, SurfaceRef::Kind::Sensor);
        EXPECT_NEAR(p.position.x, 1.0, 1e-9);
    }
}

TEST(RenderFrame, ClutterEmitsSparseHighReturns) {
    SceneDescription s;
    s.background.floor_z.reset();
    s.clutter.push_back({{{1.5, 0.0, 0.0}, 0, 1.0, 1.0}, 0.1});
    const LidarFrame f = render_frame(s, 3);
    std::size_t total = 0, high = 0;
    for (const auto& p : f.points) {
        ++total;
        if (p.material == Material::Clutter) {
            ++high;
            EXPECT_GE(p.intensity, s.lidar.clutter_band.lo - 10);
        } else {
            EXPECT_LE(p.intensity, s.lidar.diffuse_band.hi + 10);
        }
    }
    ASSERT_GT(total, 100u);
    const double frac = static_cast<double>(high) / static_cast<double>(total);
    EXPECT_GT(frac, 0.03);
    EXPECT_LT(frac, 0.2);
}

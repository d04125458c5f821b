#pragma once

// Six-band filter-wheel radiometry and peak recovery.
//
// A reading is exposure * integral of R(l) T(l) QE(l) dl plus Gaussian noise,
// clamped to [0, 1]. R is the sensor reflectance (Gaussian peak over a flat
// baseline), T a Gaussian filter profile, QE linear in wavelength.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "leafscope/error.hpp"
#include "leafscope/scene.hpp"

namespace leafscope {

struct FilterBand {
    double center = 650.0;  // nm
    double fwhm = 10.0;     // nm
    double transmission_peak = 1.0;

    constexpr bool operator==(const FilterBand&) const = default;
};

using FilterWheel = std::array<FilterBand, 6>;

/// 630-680 nm in 10 nm steps, 10 nm FWHM each.
inline FilterWheel default_wheel() {
    FilterWheel w;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = {630.0 + 10.0 * static_cast<double>(i), 10.0, 1.0};
    return w;
}

/// Camera quantum efficiency, linear through two anchor points and clamped
/// to [0, 1] outside them.
struct QeCurve {
    double lambda_lo = 630.0;
    double qe_lo = 0.60;
    double lambda_hi = 680.0;
    double qe_hi = 0.50;

    double at(double lambda) const {
        const double t = (lambda - lambda_lo) / (lambda_hi - lambda_lo);
        return std::clamp(qe_lo + t * (qe_hi - qe_lo), 0.0, 1.0);
    }
};

struct SpectralReading {
    FilterBand band{};
    double intensity = 0.0;  // normalized counts in [0, 1]
    bool saturated = false;  // raw signal exceeded full scale

    bool operator==(const SpectralReading&) const = default;
};

struct SpectralSweep {
    std::array<SpectralReading, 6> readings{};
    double exposure = 0.0;
    double estimated_peak = std::numeric_limits<double>::quiet_NaN();
    double estimated_amplitude = std::numeric_limits<double>::quiet_NaN();
    double state_score = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr double kFwhmToSigma = 0.42466090014400953;  // 1 / (2 sqrt(2 ln 2))

inline double gaussian_profile(double x, double center, double fwhm) {
    const double z = (x - center) / (fwhm * kFwhmToSigma);
    return std::exp(-0.5 * z * z);
}

inline double sensor_reflectance(const PlantSensor& s, double lambda) {
    return s.baseline + s.peak_amplitude * gaussian_profile(lambda, s.peak_wavelength, s.peak_fwhm);
}

inline double filter_transmission(const FilterBand& b, double lambda) {
    return b.transmission_peak * gaussian_profile(lambda, b.center, b.fwhm);
}

/// Trapezoid integral of R*T*QE on a 0.1 nm grid over center +- 5 FWHM for
/// any reflectance curve R(lambda).
template <class Reflectance>
    requires std::invocable<const Reflectance&, double>
double band_signal(const Reflectance& reflectance, const FilterBand& band, const QeCurve& qe) {
    constexpr double kStep = 0.1;
    const double lo = band.center - 5.0 * band.fwhm;
    const auto n = static_cast<std::size_t>(std::lround(10.0 * band.fwhm / kStep));
    const double h = 10.0 * band.fwhm / static_cast<double>(n);
    auto f = [&](double l) { return reflectance(l) * filter_transmission(band, l) * qe.at(l); };
    double acc = 0.5 * (f(lo) + f(lo + static_cast<double>(n) * h));
    for (std::size_t i = 1; i < n; ++i) acc += f(lo + static_cast<double>(i) * h);
    return acc * h;
}

inline double band_signal(const PlantSensor& sensor, const FilterBand& band, const QeCurve& qe) {
    return band_signal([&sensor](double l) { return sensor_reflectance(sensor, l); }, band, qe);
}

namespace detail {

inline SpectralReading read_band(const PlantSensor& sensor, const FilterBand& band, const QeCurve& qe,
                                 double exposure, double noise_sd, std::mt19937_64& rng) {
    double v = exposure * band_signal(sensor, band, qe);
    if (noise_sd > 0.0) v += std::normal_distribution<double>(0.0, noise_sd)(rng);
    return {band, std::clamp(v, 0.0, 1.0), v > 1.0};
}

}  // namespace detail

inline SpectralReading simulate_reading(const PlantSensor& sensor, const FilterBand& band,
                                        const QeCurve& qe, double exposure, double noise_sd,
                                        std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return detail::read_band(sensor, band, qe, exposure, noise_sd, rng);
}

/// Readings in wheel order; noise draws come from one stream seeded by `seed`.
inline SpectralSweep sweep(const PlantSensor& sensor, const FilterWheel& wheel, const QeCurve& qe,
                           double exposure, double noise_sd, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    SpectralSweep out;
    out.exposure = exposure;
    for (std::size_t i = 0; i < wheel.size(); ++i)
        out.readings[i] = detail::read_band(sensor, wheel[i], qe, exposure, noise_sd, rng);
    return out;
}

struct PeakFitConfig {
    double sensor_fwhm = 20.0;  // assumed width of the sensor's reflectance peak, nm
    double baseline = 0.0;      // assumed flat reflectance under the peak
    double min_center = 620.0;
    double max_center = 690.0;
    int max_iterations = 100;
    double step_tolerance = 1e-9;
};

struct PeakEstimate {
    double peak = 0.0;       // nm
    double amplitude = 0.0;  // reflectance units, comparable to PlantSensor::peak_amplitude
    int iterations = 0;
};

/// Fits a fixed-width Gaussian (center, amplitude) to the QE-corrected
/// readings over the band centers with damped Gauss-Newton.
///
/// Each usable reading is divided by exposure * QE(center) * the filter's
/// equivalent width, and the assumed baseline is subtracted, leaving samples
/// of A * (s_r / s) * exp(-(c - mu)^2 / 2 s^2) where s^2 = s_r^2 + s_filter^2
/// is the sensor peak broadened by the filter.
inline PeakEstimate estimate_peak(std::span<const SpectralReading> readings, double exposure,
                                  const QeCurve& qe, const PeakFitConfig& cfg = {}) {
    std::size_t saturated = 0;
    for (const auto& r : readings) saturated += r.saturated ? 1 : 0;
    if (saturated > 3) throw SaturatedSweep(saturated);

    struct Sample {
        double center;
        double y;
        double scale;  // s_r / s
        double var;    // s^2
    };
    std::vector<Sample> pts;
    const double sr = cfg.sensor_fwhm * kFwhmToSigma;
    for (const auto& r : readings) {
        if (r.saturated || !(r.intensity > 0.0)) continue;
        const double sf = r.band.fwhm * kFwhmToSigma;
        const double width = r.band.transmission_peak * std::sqrt(2.0 * std::numbers::pi) * sf;
        const double var = sr * sr + sf * sf;
        pts.push_back({r.band.center, r.intensity / (exposure * qe.at(r.band.center) * width) - cfg.baseline,
                       sr / std::sqrt(var), var});
    }
    if (pts.size() < 3) throw InsufficientSignal(pts.size());

    const auto best = std::max_element(pts.begin(), pts.end(),
                                       [](const Sample& a, const Sample& b) { return a.y < b.y; });
    double mu = best->center;
    double amp = std::max(best->y / best->scale, 1e-12);

    auto cost = [&](double m, double a) {
        double c = 0.0;
        for (const auto& p : pts) {
            const double d = p.center - m;
            const double r = p.y - a * p.scale * std::exp(-0.5 * d * d / p.var);
            c += r * r;
        }
        return c;
    };

    double lambda = 1e-3;
    double current = cost(mu, amp);
    PeakEstimate est;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        est.iterations = it + 1;
        // normal equations for (mu, amp)
        double jmm = 0, jma = 0, jaa = 0, gm = 0, ga = 0;
        for (const auto& p : pts) {
            const double d = p.center - mu;
            const double g = p.scale * std::exp(-0.5 * d * d / p.var);
            const double r = p.y - amp * g;
            const double dmu = amp * g * d / p.var;
            jmm += dmu * dmu;
            jma += dmu * g;
            jaa += g * g;
            gm += dmu * r;
            ga += g * r;
        }
        bool accepted = false;
        double step = 0.0;
        for (int tries = 0; tries < 30 && !accepted; ++tries) {
            const double a11 = jmm * (1.0 + lambda), a22 = jaa * (1.0 + lambda);
            const double det = a11 * a22 - jma * jma;
            if (!(std::abs(det) > 0.0)) {
                lambda *= 10.0;
                continue;
            }
            const double dm = (a22 * gm - jma * ga) / det;
            const double da = (a11 * ga - jma * gm) / det;
            const double trial = cost(mu + dm, amp + da);
            if (trial <= current) {
                mu += dm;
                amp += da;
                current = trial;
                lambda = std::max(lambda / 10.0, 1e-12);
                step = std::hypot(dm, da);
                accepted = true;
            } else {
                lambda *= 10.0;
            }
        }
        if (!accepted || step < cfg.step_tolerance) break;
    }
    est.peak = std::clamp(mu, cfg.min_center, cfg.max_center);
    est.amplitude = std::max(amp, 0.0);
    return est;
}

/// Inverts the scene's state -> spectrum code; result clamped to [0, 1].
inline double state_score(double peak, double amplitude, const StateEncoding& enc) {
    const double x = enc.mode == StateEncoding::Mode::Amplitude ? amplitude : peak;
    return std::clamp((x - enc.lo) / (enc.hi - enc.lo), 0.0, 1.0);
}

struct SpectralSettings {
    FilterWheel wheel = default_wheel();
    QeCurve qe{};
    double exposure = 0.1;
    double noise_sd = 0.002;
    PeakFitConfig fit{};
};

/// Sweep, fit and score one sensor.
inline SpectralSweep interrogate(const PlantSensor& sensor, const SpectralSettings& cfg,
                                 const StateEncoding& enc, std::uint64_t seed) {
    SpectralSweep s = sweep(sensor, cfg.wheel, cfg.qe, cfg.exposure, cfg.noise_sd, seed);
    const PeakEstimate est = estimate_peak(s.readings, s.exposure, cfg.qe, cfg.fit);
    s.estimated_peak = est.peak;
    s.estimated_amplitude = est.amplitude;
    s.state_score = state_score(est.peak, est.amplitude, enc);
    return s;
}

}  // namespace leafscope

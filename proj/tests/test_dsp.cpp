#include <doctest.h>

#include <cmath>
#include <numbers>

#include "phaselab/dsp.hpp"
#include "phaselab/errors.hpp"
#include "phaselab/fft.hpp"
#include "phaselab/rng.hpp"

#include "oracles.hpp"

using namespace phaselab;
using dsp::StftParams;
using dsp::Waveform;
using dsp::WindowType;

namespace {

constexpr double kPi = std::numbers::pi;

Waveform random_wave(std::size_t length, Rng& rng, int sample_rate = 16000) {
    Waveform w;
    w.sample_rate = sample_rate;
    w.samples.resize(length);
    for (double& s : w.samples) s = 2.0 * rng.uniform() - 1.0;
    return w;
}

Waveform sine_wave(double freq, std::size_t length, int sample_rate = 16000,
                   double amp = 1.0, double phase = 0.0) {
    Waveform w;
    w.sample_rate = sample_rate;
    w.samples.resize(length);
    for (std::size_t i = 0; i < length; ++i) {
        w.samples[i] =
            amp * std::sin(2.0 * kPi * freq * static_cast<double>(i) / sample_rate + phase);
    }
    return w;
}

double rms_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += a[i] * a[i];
    }
    if (den == 0.0) return std::sqrt(num);
    return std::sqrt(num / den);
}

} // namespace

TEST_SUITE_BEGIN("dsp");

TEST_CASE("fft matches the naive DFT") {
    Rng rng(Seed{11});
    for (std::size_t n : {2ul, 8ul, 64ul, 512ul}) {
        std::vector<double> x(n);
        for (double& s : x) s = 2.0 * rng.uniform() - 1.0;
        const auto expected = oracles::naive_dft(x);

        dsp::Fft fft(n);
        std::vector<std::complex<double>> bins;
        fft.forward_real(x, bins);
        REQUIRE(bins.size() == n / 2 + 1);
        for (std::size_t k = 0; k <= n / 2; ++k) {
            CHECK(std::abs(bins[k] - expected[k]) < 1e-9);
        }

        std::vector<double> back;
        fft.inverse_real(bins, back);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("window COLA validation") {
    StftParams p; // hann 512/128
    CHECK(dsp::cola_deviation(p) < 1e-10);
    CHECK_NOTHROW(dsp::validate(p));

    p.window = WindowType::Hamming;
    CHECK_NOTHROW(dsp::validate(p));

    p.window = WindowType::Rectangular;
    p.hop_size = 512;
    CHECK_NOTHROW(dsp::validate(p));

    // Blackman needs at least 3x overlap.
    p.window = WindowType::Blackman;
    p.hop_size = 256;
    CHECK_THROWS_AS(dsp::validate(p), InvalidParams);
    p.hop_size = 128;
    CHECK_NOTHROW(dsp::validate(p));

    p.window = WindowType::Hann;
    p.hop_size = 100; // does not divide 512
    CHECK_THROWS_AS(dsp::validate(p), InvalidParams);
    p.hop_size = 128;
    p.fft_size = 500; // not a power of two
    CHECK_THROWS_AS(dsp::validate(p), InvalidParams);
}

TEST_CASE("stft of a constant-zero signal is all zero") {
    Waveform w;
    w.samples.assign(4000, 0.0);
    const auto spec = dsp::stft(w, StftParams{});
    for (double m : spec.magnitude) CHECK(m == 0.0);
    for (double p : spec.phase) CHECK(p == 0.0);
}

TEST_CASE("stft of a unit impulse with a rectangular window") {
    StftParams p;
    p.window = WindowType::Rectangular;
    p.fft_size = 64;
    p.hop_size = 64;
    Waveform w;
    w.samples.assign(256, 0.0);
    w.samples[0] = 1.0;
    const auto spec = dsp::stft(w, p);
    // Frame 0 is centered on sample 0 and contains exactly the impulse
    // (reflect padding mirrors only zeros next to it).
    for (std::size_t k = 0; k < spec.bins; ++k) {
        CHECK(spec.mag(0, k) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("stft frame count and basic shape") {
    Waveform w = sine_wave(440.0, 1000);
    const auto spec = dsp::stft(w, StftParams{});
    CHECK(spec.frames == 1 + 1000 / 128);
    CHECK(spec.bins == 257);
    CHECK(spec.original_length == 1000);
}

TEST_CASE("stft errors") {
    Waveform empty;
    CHECK_THROWS_AS(dsp::stft(empty, StftParams{}), InvalidInput);

    Waveform bad = sine_wave(440.0, 1000);
    bad.samples[3] = std::nan("");
    CHECK_THROWS_AS(dsp::stft(bad, StftParams{}), InvalidInput);
}

TEST_CASE("stft matches a per-frame naive DFT oracle") {
    // Bin-centered sinusoid: frequency k*sr/fft_size lands in bin k.
    const StftParams params;
    const int sr = 16000;
    const std::size_t k_target = 40;
    const double freq = static_cast<double>(k_target) * sr / params.fft_size;
    Waveform w = sine_wave(freq, 4000, sr, 0.5);
    const auto spec = dsp::stft(w, params);

    // Oracle: reflect-pad, window, naive DFT, frame by frame.
    const auto window = dsp::make_window(params.window, params.fft_size);
    for (std::size_t t : {std::size_t{5}, std::size_t{12}, std::size_t{20}}) {
        std::vector<double> frame(params.fft_size);
        const long long start = static_cast<long long>(t * params.hop_size) -
                                static_cast<long long>(params.fft_size / 2);
        for (std::size_t i = 0; i < params.fft_size; ++i) {
            frame[i] = oracles::reflect_sample(w.samples, start + static_cast<long long>(i)) *
                       window[i];
        }
        const auto bins = oracles::naive_dft(frame);
        for (std::size_t k = 0; k < spec.bins; ++k) {
            CHECK(spec.mag(t, k) == doctest::Approx(std::abs(bins[k])).epsilon(1e-9).scale(1.0));
        }

        // Dominant magnitude sits in the target bin for interior frames.
        std::size_t best = 0;
        for (std::size_t k = 1; k < spec.bins; ++k) {
            if (spec.mag(t, k) > spec.mag(t, best)) best = k;
        }
        CHECK(best == k_target);
    }
}

TEST_CASE("istft round trip: istft(stft(x)) == x") {
    Rng rng(Seed{21});
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t len = 512 + static_cast<std::size_t>(rng.uniform() * 9.0 * 512);
        Waveform w = random_wave(len, rng);
        const auto spec = dsp::stft(w, StftParams{});
        const auto back = dsp::istft(spec, len);
        CHECK(rms_rel_error(w.samples, back.samples) < 1e-6);
    }
}

TEST_CASE("istft round trip for other window/hop settings") {
    Rng rng(Seed{22});
    StftParams p;
    for (auto [win, hop] : {std::pair{WindowType::Hamming, 256ul},
                            std::pair{WindowType::Blackman, 64ul},
                            std::pair{WindowType::Rectangular, 512ul}}) {
        p.window = win;
        p.hop_size = hop;
        Waveform w = random_wave(3000, rng);
        const auto back = dsp::istft(dsp::stft(w, p), w.samples.size());
        CHECK(rms_rel_error(w.samples, back.samples) < 1e-6);
    }
}

TEST_CASE("istft of an all-zero spectrogram is all-zero") {
    Waveform w;
    w.samples.assign(2000, 0.0);
    auto spec = dsp::stft(w, StftParams{});
    const auto back = dsp::istft(spec, 2000);
    for (double s : back.samples) CHECK(s == 0.0);
}

TEST_CASE("istft of an inconsistent spectrogram stays finite but re-analysis differs") {
    Rng rng(Seed{23});
    Waveform w = sine_wave(300.0, 4000, 16000, 0.4);
    auto spec = dsp::stft(w, StftParams{});
    // Scramble phases entirely; the magnitude no longer matches any real
    // signal's analysis.
    for (double& p : spec.phase) {
        p = dsp::wrap_phase(2.0 * kPi * rng.uniform());
    }
    const auto synth = dsp::istft(spec, w.samples.size());
    for (double s : synth.samples) CHECK(std::isfinite(s));

    const auto re = dsp::stft(synth, StftParams{});
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < spec.magnitude.size(); ++i) {
        num += (re.magnitude[i] - spec.magnitude[i]) * (re.magnitude[i] - spec.magnitude[i]);
        den += spec.magnitude[i] * spec.magnitude[i];
    }
    const double rel = std::sqrt(num / den);
    // Fixture bound measured on this construction: the deviation is large
    // (order 0.5) and must never collapse to analysis-consistency.
    CHECK(rel > 0.1);
}

TEST_CASE("istft padding and truncation honor target_length") {
    Rng rng(Seed{24});
    Waveform w = random_wave(1500, rng);
    const auto spec = dsp::stft(w, StftParams{});
    CHECK(dsp::istft(spec, 700).samples.size() == 700);
    CHECK(dsp::istft(spec, 3000).samples.size() == 3000);
}

TEST_CASE("magnitude/phase decomposition is lossless") {
    Rng rng(Seed{25});
    Waveform w = random_wave(2000, rng);
    const auto spec = dsp::stft(w, StftParams{});

    const auto window = dsp::make_window(StftParams{}.window, 512);
    dsp::Fft fft(512);
    std::vector<double> frame(512);
    const long long start = -256; // frame 0
    for (std::size_t i = 0; i < 512; ++i) {
        frame[i] = oracles::reflect_sample(w.samples, start + static_cast<long long>(i)) *
                   window[i];
    }
    std::vector<std::complex<double>> bins;
    fft.forward_real(frame, bins);
    for (std::size_t k = 0; k < spec.bins; ++k) {
        const std::complex<double> recombined =
            spec.mag(0, k) * std::complex<double>(std::cos(spec.phs(0, k)),
                                                  std::sin(spec.phs(0, k)));
        CHECK(std::abs(recombined - bins[k]) <= 1e-12 * (1.0 + std::abs(bins[k])));
    }
}

TEST_CASE("Parseval sanity on an isolated frame") {
    Rng rng(Seed{26});
    Waveform w = random_wave(2000, rng);
    const StftParams params;
    const auto spec = dsp::stft(w, params);

    const auto window = dsp::make_window(params.window, params.fft_size);
    const std::size_t t = 4;
    double frame_energy = 0.0;
    const long long start = static_cast<long long>(t * params.hop_size) -
                            static_cast<long long>(params.fft_size / 2);
    for (std::size_t i = 0; i < params.fft_size; ++i) {
        const double s =
            oracles::reflect_sample(w.samples, start + static_cast<long long>(i)) * window[i];
        frame_energy += s * s;
    }

    // One-sided sum weights interior bins twice (conjugate halves).
    double mag_sq = spec.mag(t, 0) * spec.mag(t, 0) +
                    spec.mag(t, spec.bins - 1) * spec.mag(t, spec.bins - 1);
    for (std::size_t k = 1; k + 1 < spec.bins; ++k) {
        mag_sq += 2.0 * spec.mag(t, k) * spec.mag(t, k);
    }
    CHECK(mag_sq == doctest::Approx(params.fft_size * frame_energy).epsilon(1e-9));
}

TEST_CASE("signal_power") {
    Waveform w;
    w.samples.assign(100, 0.5);
    CHECK(dsp::signal_power(w) == doctest::Approx(0.25).epsilon(1e-15));

    w.samples.assign(100, 0.0);
    CHECK(dsp::signal_power(w) == 0.0);

    // Unit-amplitude sinusoid over whole periods: power 1/2.
    Waveform s = sine_wave(100.0, 16000);
    CHECK(dsp::signal_power(s) == doctest::Approx(0.5).epsilon(1e-9));

    Waveform empty;
    CHECK_THROWS_AS(dsp::signal_power(empty), InvalidInput);
}

TEST_CASE("wrap_phase lands in (-pi, pi]") {
    CHECK(dsp::wrap_phase(0.0) == 0.0);
    CHECK(dsp::wrap_phase(kPi) == doctest::Approx(kPi));
    CHECK(dsp::wrap_phase(-kPi) == doctest::Approx(kPi));
    CHECK(dsp::wrap_phase(3.0 * kPi) == doctest::Approx(kPi));
    CHECK(dsp::wrap_phase(2.5 * kPi) == doctest::Approx(0.5 * kPi));
    CHECK(dsp::wrap_phase(-2.5 * kPi) == doctest::Approx(-0.5 * kPi));
    Rng rng(Seed{27});
    for (int i = 0; i < 1000; ++i) {
        const double p = dsp::wrap_phase(200.0 * (rng.uniform() - 0.5));
        CHECK(p > -kPi);
        CHECK(p <= kPi);
    }
}

TEST_SUITE_END();

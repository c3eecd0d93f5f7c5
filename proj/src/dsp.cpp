#include "phaselab/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "phaselab/errors.hpp"
#include "phaselab/fft.hpp"

namespace phaselab::dsp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kColaTolerance = 1e-10;

/// Reflected (mirrored, no edge duplication) sample lookup for virtual index
/// v in [-pad, len + pad). Bounces for signals shorter than the pad width.
double reflect_at(const std::vector<double>& x, long long v) {
    const long long len = static_cast<long long>(x.size());
    if (len == 1) return x[0];
    const long long period = 2 * (len - 1);
    long long m = v % period;
    if (m < 0) m += period;
    if (m >= len) m = period - m;
    return x[static_cast<std::size_t>(m)];
}

} // namespace

WindowType parse_window(const std::string& name) {
    if (name == "hann") return WindowType::Hann;
    if (name == "hamming") return WindowType::Hamming;
    if (name == "blackman") return WindowType::Blackman;
    if (name == "rect" || name == "rectangular") return WindowType::Rectangular;
    throw InvalidParams("unknown window: " + name);
}

std::string window_name(WindowType w) {
    switch (w) {
        case WindowType::Hann: return "hann";
        case WindowType::Hamming: return "hamming";
        case WindowType::Blackman: return "blackman";
        case WindowType::Rectangular: return "rect";
    }
    return "?";
}

std::vector<double> make_window(WindowType type, std::size_t length) {
    std::vector<double> w(length, 1.0);
    const double n = static_cast<double>(length);
    for (std::size_t i = 0; i < length; ++i) {
        const double t = 2.0 * kPi * static_cast<double>(i) / n;
        switch (type) {
            case WindowType::Hann:
                w[i] = 0.5 - 0.5 * std::cos(t);
                break;
            case WindowType::Hamming:
                w[i] = 0.54 - 0.46 * std::cos(t);
                break;
            case WindowType::Blackman:
                w[i] = 0.42 - 0.5 * std::cos(t) + 0.08 * std::cos(2.0 * t);
                break;
            case WindowType::Rectangular:
                w[i] = 1.0;
                break;
        }
    }
    return w;
}

double cola_deviation(const StftParams& params) {
    const auto w = make_window(params.window, params.fft_size);
    const std::size_t hop = params.hop_size;
    double lo = 0.0, hi = 0.0;
    for (std::size_t n = 0; n < hop; ++n) {
        double s = 0.0;
        for (std::size_t j = n; j < params.fft_size; j += hop) s += w[j];
        if (n == 0) { lo = hi = s; }
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    if (hi == 0.0) return 1.0;
    return (hi - lo) / hi;
}

void validate(const StftParams& params) {
    if (!Fft::is_power_of_two(params.fft_size)) {
        throw InvalidParams("fft_size must be a power of two >= 2, got " +
                            std::to_string(params.fft_size));
    }
    if (params.hop_size == 0 || params.fft_size % params.hop_size != 0) {
        throw InvalidParams("hop_size must divide fft_size evenly");
    }
    const double dev = cola_deviation(params);
    if (dev > kColaTolerance) {
        throw InvalidParams("window '" + window_name(params.window) +
                            "' with hop " + std::to_string(params.hop_size) +
                            "/" + std::to_string(params.fft_size) +
                            " is not constant-overlap-add (deviation " +
                            std::to_string(dev) + ")");
    }
}

double wrap_phase(double radians) {
    double r = std::remainder(radians, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

ComplexSpectrogram stft(const Waveform& wave, const StftParams& params) {
    if (wave.samples.empty()) throw InvalidInput("stft: empty waveform");
    if (wave.sample_rate <= 0) throw InvalidInput("stft: sample_rate must be positive");
    for (double s : wave.samples) {
        if (!std::isfinite(s)) throw InvalidInput("stft: non-finite sample");
    }
    validate(params);

    const std::size_t n = params.fft_size;
    const std::size_t hop = params.hop_size;
    const std::size_t pad = n / 2;
    const std::size_t len = wave.samples.size();
    // Frames are centered at t*hop. For hop > fft/2 (no-overlap analysis)
    // extra frames are appended so synthesis coverage reaches the last sample.
    std::size_t frames = 1 + len / hop;
    if (len > pad) {
        const std::size_t covering = 1 + (len - pad + hop - 1) / hop;
        frames = std::max(frames, covering);
    }

    ComplexSpectrogram spec;
    spec.frames = frames;
    spec.bins = n / 2 + 1;
    spec.params = params;
    spec.original_length = len;
    spec.sample_rate = wave.sample_rate;
    spec.magnitude.resize(frames * spec.bins);
    spec.phase.resize(frames * spec.bins);

    const auto window = make_window(params.window, n);
    Fft fft(n);
    std::vector<double> frame(n);
    std::vector<std::complex<double>> bins;
    for (std::size_t t = 0; t < frames; ++t) {
        const long long start = static_cast<long long>(t * hop) -
                                static_cast<long long>(pad);
        for (std::size_t i = 0; i < n; ++i) {
            const long long v = start + static_cast<long long>(i);
            const double s = (v >= 0 && v < static_cast<long long>(len))
                                 ? wave.samples[static_cast<std::size_t>(v)]
                                 : reflect_at(wave.samples, v);
            frame[i] = s * window[i];
        }
        fft.forward_real(frame, bins);
        for (std::size_t k = 0; k < spec.bins; ++k) {
            const double re = bins[k].real(), im = bins[k].imag();
            spec.mag(t, k) = std::sqrt(re * re + im * im);
            double p = (re == 0.0 && im == 0.0) ? 0.0 : std::atan2(im, re);
            if (p <= -kPi) p += 2.0 * kPi; // atan2 may return -pi exactly
            spec.phs(t, k) = p;
        }
    }
    return spec;
}

Waveform istft(const ComplexSpectrogram& spec, std::size_t target_length) {
    if (target_length == 0) throw InvalidInput("istft: target_length must be > 0");
    if (spec.frames == 0 || spec.bins != spec.params.fft_size / 2 + 1) {
        throw InvalidInput("istft: malformed spectrogram");
    }
    validate(spec.params);

    const std::size_t n = spec.params.fft_size;
    const std::size_t hop = spec.params.hop_size;
    const std::size_t pad = n / 2;
    const std::size_t span = (spec.frames - 1) * hop + n;

    const auto window = make_window(spec.params.window, n);
    Fft fft(n);

    std::vector<double> acc(span, 0.0);
    std::vector<double> norm(span, 0.0);
    std::vector<std::complex<double>> frame_bins(spec.bins);
    std::vector<double> frame;
    for (std::size_t t = 0; t < spec.frames; ++t) {
        for (std::size_t k = 0; k < spec.bins; ++k) {
            const double m = spec.mag(t, k);
            const double p = spec.phs(t, k);
            frame_bins[k] = {m * std::cos(p), m * std::sin(p)};
        }
        fft.inverse_real(frame_bins, frame);
        const std::size_t start = t * hop;
        for (std::size_t i = 0; i < n; ++i) {
            acc[start + i] += frame[i] * window[i];
            norm[start + i] += window[i] * window[i];
        }
    }

    Waveform out;
    out.sample_rate = spec.sample_rate;
    out.samples.assign(target_length, 0.0);
    const std::size_t copy = std::min(target_length, span > pad ? span - pad : 0);
    for (std::size_t i = 0; i < copy; ++i) {
        const std::size_t j = i + pad;
        if (norm[j] == 0.0) {
            throw SynthesisError("istft: zero window normalization at sample " +
                                 std::to_string(i));
        }
        out.samples[i] = acc[j] / norm[j];
    }
    return out;
}

double signal_power(const Waveform& wave) {
    if (wave.samples.empty()) throw InvalidInput("signal_power: empty waveform");
    double sum = 0.0;
    for (double s : wave.samples) sum += s * s;
    return sum / static_cast<double>(wave.samples.size());
}

} // namespace phaselab::dsp

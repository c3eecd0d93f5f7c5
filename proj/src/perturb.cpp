#include "phaselab/perturb.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <regex>

#include "phaselab/errors.hpp"

namespace phaselab::perturb {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kClipLimit = 1.0;
} // namespace

PerturbationSpec PerturbationSpec::phase(double width_radians) {
    if (!(width_radians >= 0.0 && width_radians <= kTwoPi)) {
        throw InvalidParams("phase width must be in [0, 2*pi], got " +
                            std::to_string(width_radians));
    }
    PerturbationSpec s;
    s.kind_ = Kind::Phase;
    s.phase_width_ = width_radians;
    return s;
}

PerturbationSpec PerturbationSpec::magnitude(double snr_db) {
    if (!std::isfinite(snr_db)) throw InvalidParams("snr_db must be finite");
    PerturbationSpec s;
    s.kind_ = Kind::Magnitude;
    s.snr_db_ = snr_db;
    return s;
}

std::string format_radians(double radians) {
    // Exact multiples of pi/4 print as fractions, matching CLI input syntax.
    const double quarters = radians / (kPi / 4.0);
    const double rounded = std::round(quarters);
    if (std::abs(quarters - rounded) < 1e-12 && rounded >= 0) {
        const int q = static_cast<int>(rounded);
        if (q == 0) return "0";
        const int whole = q / 4, rem = q % 4;
        if (rem == 0) return (whole == 1 ? "pi" : std::to_string(whole) + "pi");
        if (rem % 2 == 0) { // halves
            const int h = q / 2;
            return (h == 1 ? "pi/2" : std::to_string(h) + "pi/2");
        }
        return (q == 1 ? "pi/4" : std::to_string(q) + "pi/4");
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", radians);
    return buf;
}

double parse_radians(const std::string& text) {
    static const std::regex re(
        R"(^\s*([0-9]*\.?[0-9]+)?\s*(pi)?\s*(?:/\s*([0-9]*\.?[0-9]+))?\s*$)");
    std::smatch m;
    if (!std::regex_match(text, m, re) || (!m[1].matched && !m[2].matched)) {
        throw InvalidParams("cannot parse radians value: '" + text + "'");
    }
    double value = m[1].matched ? std::stod(m[1].str()) : 1.0;
    if (m[2].matched) value *= kPi;
    if (m[3].matched) {
        if (!m[2].matched) throw InvalidParams("cannot parse radians value: '" + text + "'");
        value /= std::stod(m[3].str());
    }
    return value;
}

std::string PerturbationSpec::label() const {
    switch (kind_) {
        case Kind::None: return "none";
        case Kind::Phase: return "phase:" + format_radians(phase_width_);
        case Kind::Magnitude: {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "mag:%gdB", snr_db_);
            return buf;
        }
    }
    return "?";
}

PerturbationSpec PerturbationSpec::parse(const std::string& text) {
    if (text == "none") return none();
    if (text.rfind("phase:", 0) == 0) return phase(parse_radians(text.substr(6)));
    if (text.rfind("mag:", 0) == 0) {
        std::string v = text.substr(4);
        if (v.size() >= 2 && v.substr(v.size() - 2) == "dB") v.resize(v.size() - 2);
        try {
            std::size_t pos = 0;
            double db = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return magnitude(db);
        } catch (const std::logic_error&) {
            throw InvalidParams("cannot parse SNR value: '" + text + "'");
        }
    }
    throw InvalidParams("cannot parse perturbation spec: '" + text + "'");
}

void perturb_phase_spectrogram(dsp::ComplexSpectrogram& spec, double width_n,
                               Rng& rng) {
    if (!(width_n >= 0.0 && width_n <= kTwoPi)) {
        throw InvalidParams("phase width must be in [0, 2*pi], got " +
                            std::to_string(width_n));
    }
    for (double& p : spec.phase) {
        const double delta = width_n * (rng.uniform() - 0.5);
        p = dsp::wrap_phase(p + delta);
    }
}

dsp::Waveform perturb_phase(const dsp::Waveform& wave, double width_n,
                            const dsp::StftParams& params, Seed seed) {
    auto spec = dsp::stft(wave, params);
    Rng rng(seed);
    perturb_phase_spectrogram(spec, width_n, rng);
    return dsp::istft(spec, wave.samples.size());
}

dsp::Waveform white_noise(std::size_t length, double power, int sample_rate,
                          Seed seed) {
    if (length == 0) throw InvalidInput("white_noise: length must be > 0");
    if (power < 0.0) throw InvalidParams("white_noise: power must be >= 0");
    dsp::Waveform noise;
    noise.sample_rate = sample_rate;
    noise.samples.resize(length);
    if (power == 0.0) return noise;
    Rng rng(seed);
    const double sigma = std::sqrt(power);
    for (double& s : noise.samples) s = sigma * rng.gaussian();
    return noise;
}

dsp::Waveform peak_normalize(const dsp::Waveform& wave, double limit) {
    if (limit <= 0.0) throw InvalidParams("peak_normalize: limit must be > 0");
    double peak = 0.0;
    for (double s : wave.samples) peak = std::max(peak, std::abs(s));
    if (peak <= limit) return wave;
    dsp::Waveform out = wave;
    const double gain = limit / peak;
    for (double& s : out.samples) s *= gain;
    return out;
}

dsp::Waveform perturb_magnitude(const dsp::Waveform& wave, double snr_db,
                                const dsp::StftParams& params, Seed seed) {
    const double p_signal = dsp::signal_power(wave);
    if (p_signal <= 0.0) {
        throw UndefinedSnrError("perturb_magnitude: SNR undefined for all-zero input");
    }
    const double p_noise = p_signal * std::pow(10.0, -snr_db / 10.0);
    const auto noise = white_noise(wave.samples.size(), p_noise,
                                   wave.sample_rate, seed);

    dsp::Waveform noisy = wave;
    for (std::size_t i = 0; i < noisy.samples.size(); ++i) {
        noisy.samples[i] += noise.samples[i];
    }

    auto spec = dsp::stft(noisy, params);        // noisy magnitude...
    const auto clean = dsp::stft(wave, params);  // ...with the clean phase
    spec.phase = clean.phase;
    auto out = dsp::istft(spec, wave.samples.size());

    double peak = 0.0;
    for (double s : out.samples) peak = std::max(peak, std::abs(s));
    if (peak > kClipLimit) out = peak_normalize(out, kClipLimit);
    return out;
}

dsp::Waveform apply(const dsp::Waveform& wave, const PerturbationSpec& spec,
                    const dsp::StftParams& params, Seed seed) {
    switch (spec.kind()) {
        case PerturbationSpec::Kind::None:
            return wave;
        case PerturbationSpec::Kind::Phase:
            return perturb_phase(wave, spec.phase_width(), params, seed);
        case PerturbationSpec::Kind::Magnitude:
            return perturb_magnitude(wave, spec.snr_db(), params, seed);
    }
    throw InvalidParams("apply: unknown perturbation kind");
}

} // namespace phaselab::perturb

#ifndef PHASELAB_DSP_HPP
#define PHASELAB_DSP_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace phaselab::dsp {

/// Mono sample sequence. Samples are 64-bit floats in nominal [-1, 1];
/// conversion to integer PCM happens only at file boundaries.
struct Waveform {
    std::vector<double> samples;
    int sample_rate = 16000;

    std::size_t size() const { return samples.size(); }
    double duration_seconds() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

enum class WindowType { Hann, Hamming, Blackman, Rectangular };

/// Parse a window name ("hann", "hamming", "blackman", "rect"/"rectangular").
WindowType parse_window(const std::string& name);
std::string window_name(WindowType w);

/// Periodic window of the given length.
std::vector<double> make_window(WindowType type, std::size_t length);

/// STFT analysis/synthesis configuration.
///
/// Defaults are 32 ms frames with 8 ms hop at 16 kHz: fft_size 512,
/// hop_size 128, Hann window. COLA-exact at this overlap; all three
/// parameters can be overridden anywhere they are taken.
struct StftParams {
    std::size_t fft_size = 512;
    std::size_t hop_size = 128;
    WindowType window = WindowType::Hann;
};

/// Maximum relative deviation of the overlap-add window sum from constancy.
/// Returns the deviation; a valid (window, hop) pair stays below 1e-10.
double cola_deviation(const StftParams& params);

/// Throws InvalidParams unless fft_size is a power of two, hop_size divides
/// fft_size, and the (window, hop) pair satisfies COLA within 1e-10.
void validate(const StftParams& params);

/// One-sided spectrogram in polar form. magnitude[t*bins + k] >= 0,
/// phase wrapped to (-pi, pi], bins = fft_size/2 + 1.
struct ComplexSpectrogram {
    std::vector<double> magnitude; // frames x bins, row-major
    std::vector<double> phase;     // frames x bins, row-major
    std::size_t frames = 0;
    std::size_t bins = 0;
    StftParams params;
    std::size_t original_length = 0;
    int sample_rate = 16000;

    double& mag(std::size_t t, std::size_t k) { return magnitude[t * bins + k]; }
    double mag(std::size_t t, std::size_t k) const { return magnitude[t * bins + k]; }
    double& phs(std::size_t t, std::size_t k) { return phase[t * bins + k]; }
    double phs(std::size_t t, std::size_t k) const { return phase[t * bins + k]; }
};

/// Wrap an angle to (-pi, pi].
double wrap_phase(double radians);

/// Windowed STFT with reflect padding of fft_size/2 at both ends, so frame t
/// is centered on sample t*hop_size. Frame count is 1 + floor(len/hop).
/// Throws InvalidInput for an empty or non-finite waveform, InvalidParams for
/// invalid params.
ComplexSpectrogram stft(const Waveform& wave, const StftParams& params);

/// Overlap-add synthesis with squared-window normalization (the least-squares
/// signal estimate; perturbed spectrograms are generally inconsistent and are
/// resynthesized directly, with no iterative phase retrieval). Synthesis
/// rebuilds Hermitian-symmetric bins and keeps the real part, so arbitrary
/// DC/Nyquist phases still produce a real signal. Output is cut or zero-padded
/// to target_length. Throws SynthesisError if the window normalization
/// denominator is zero anywhere in the output range.
Waveform istft(const ComplexSpectrogram& spec, std::size_t target_length);

/// Mean squared amplitude. Throws InvalidInput on an empty waveform.
double signal_power(const Waveform& wave);

} // namespace phaselab::dsp

#endif

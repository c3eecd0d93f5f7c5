#ifndef PHASELAB_PERTURB_HPP
#define PHASELAB_PERTURB_HPP

#include <string>

#include "phaselab/dsp.hpp"
#include "phaselab/rng.hpp"

namespace phaselab::perturb {

/// Declarative description of one corruption. Exactly one kind is active;
/// phase and magnitude corruption are never combined in a single spec.
class PerturbationSpec {
public:
    enum class Kind { None, Phase, Magnitude };

    static PerturbationSpec none() { return PerturbationSpec(); }
    /// width_radians in [0, 2*pi]; 2*pi means total phase randomization.
    static PerturbationSpec phase(double width_radians);
    static PerturbationSpec magnitude(double snr_db);

    /// Parse a label as produced by label(): "none", "phase:<radians or pi
    /// fraction>", "mag:<dB>".
    static PerturbationSpec parse(const std::string& text);

    Kind kind() const { return kind_; }
    double phase_width() const { return phase_width_; }
    double snr_db() const { return snr_db_; }

    /// Stable human-readable label ("none", "phase:pi/2", "mag:-5dB").
    std::string label() const;

    bool operator==(const PerturbationSpec&) const = default;

private:
    PerturbationSpec() = default;
    Kind kind_ = Kind::None;
    double phase_width_ = 0.0;
    double snr_db_ = 0.0;
};

/// Format radians compactly, using k*pi/4 fractions when exact ("pi/2",
/// "3pi/2", "2pi"), decimal otherwise.
std::string format_radians(double radians);
/// Parse "1.5708", "pi", "pi/2", "3pi/2", "2pi", "0.5pi".
double parse_radians(const std::string& text);

/// Reassign the phase of every (frame, bin) to an independent uniform draw
/// from [phi - n/2, phi + n/2], wrapped to (-pi, pi]. The magnitude grid is
/// left untouched. Draws are consumed frame-major, bin-minor.
void perturb_phase_spectrogram(dsp::ComplexSpectrogram& spec, double width_n,
                               Rng& rng);

/// Phase perturbation operator: analyze, reassign phases, resynthesize at the
/// input length. Deterministic in (wave, n, params, seed).
dsp::Waveform perturb_phase(const dsp::Waveform& wave, double width_n,
                            const dsp::StftParams& params, Seed seed);

/// Zero-mean Gaussian noise with the given mean-square power.
dsp::Waveform white_noise(std::size_t length, double power, int sample_rate,
                          Seed seed);

/// Rescale to at most `limit` peak amplitude; identity when already within.
dsp::Waveform peak_normalize(const dsp::Waveform& wave, double limit);

/// Magnitude perturbation operator: add white noise at snr_db, take the noisy
/// signal's magnitude spectrogram, pair it with the clean signal's phase
/// spectrogram, resynthesize, and peak-normalize only if the result exceeds
/// 1.0. Throws UndefinedSnrError on an all-zero input.
dsp::Waveform perturb_magnitude(const dsp::Waveform& wave, double snr_db,
                                const dsp::StftParams& params, Seed seed);

/// Dispatch on the spec kind. Kind::None returns the input bit-exactly with
/// no analysis round trip.
dsp::Waveform apply(const dsp::Waveform& wave, const PerturbationSpec& spec,
                    const dsp::StftParams& params, Seed seed);

} // namespace phaselab::perturb

#endif

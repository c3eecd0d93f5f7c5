#include "phaselab/toybench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <thread>

#include "phaselab/corpus.hpp"
#include "phaselab/errors.hpp"

namespace phaselab::toybench {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Corpus synthesis constants. Harmonics stay below kMaxHarmonicHz so the
// upper feature bands carry only the noise floor for both classes.
constexpr double kF0Low = 100.0;
constexpr double kF0High = 240.0;
constexpr double kMaxHarmonicHz = 2400.0;
constexpr double kAmpRolloff = 0.6;       // a_h ~ h^-rolloff
constexpr double kAmpJitterDb = 1.0;      // per-harmonic, per-utterance
constexpr double kDriftRelLow = 0.0003;   // natural frequency drift depth
constexpr double kDriftRelHigh = 0.0012;
constexpr double kDriftRateLowHz = 1.5;
constexpr double kDriftRateHighHz = 3.5;
constexpr double kArtifactRateHz = 4.0;   // group-delay modulation rate
// The group-delay artifact's phase offset is full strength below this corner
// and rolls off as corner/f above it (a band-limited phase slope). Placing
// the cue on the loudest partials keeps it observable under additive noise
// (their local SNR stays high) while phase perturbation, which hits every bin
// alike, can still corrupt it; bounding the swing keeps it unlearnable after
// training-time phase perturbation.
constexpr double kArtifactCornerHz = 400.0;
// Constant-rate part of the group-delay artifact, expressed as a relative
// detune of every harmonic: the spoof's harmonic grid runs systematically
// sharp, i.e. its group delay drifts at a constant rate. Scaled by the
// artifact strength (0.002 relative at pi/2).
constexpr double kSpoofDetunePerRad = 0.002 / 1.5707963267948966;
constexpr double kNoiseFloorDb = -35.0;   // relative to harmonic power
constexpr double kPeakLow = 0.125;
constexpr double kPeakHigh = 0.25;

// Phase statistics ignore bins below this fraction of the utterance's peak
// magnitude; floating-point dust would otherwise contribute random phases.
constexpr double kPhaseMagRelFloor = 1e-8;
// Standardized features are squashed through kZSquash*tanh(z/kZSquash).
// Perturbed audio can push a feature dozens of training sigmas out; the
// squash bounds score and gradient scales while leaving in-distribution
// values (|z| < 2) nearly untouched.
constexpr double kZSquash = 1000.0;
// Within a (frame, band) cell, phase statistics use only bins near the band's
// peak. Phase is meaningful where a component dominates; quieter bins carry
// noise-floor phase that dilutes the class signal.
constexpr double kPhaseBandDominance = 0.2;

void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& fn) {
    workers = static_cast<unsigned>(
        std::min<std::size_t>(workers == 0 ? 1 : workers, count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto run = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& th : pool) th.join();
}

dsp::Waveform synth_utterance(const ToyCorpusConfig& cfg, bool spoof, Rng& rng) {
    const std::size_t n =
        static_cast<std::size_t>(cfg.duration * cfg.sample_rate);
    const double sr = cfg.sample_rate;

    const double f0 = kF0Low + (kF0High - kF0Low) * rng.uniform();
    const std::size_t harmonics =
        std::max<std::size_t>(3, static_cast<std::size_t>(kMaxHarmonicHz / f0));

    struct Harmonic {
        double amp, base_freq, drift_rel, drift_rate, drift_phase, phase;
    };
    std::vector<Harmonic> parts(harmonics);
    for (std::size_t h = 0; h < harmonics; ++h) {
        auto& p = parts[h];
        const double order = static_cast<double>(h + 1);
        double amp_db = kAmpJitterDb * (2.0 * rng.uniform() - 1.0);
        if (spoof && harmonics > 1) {
            // Weak spectral tilt, -m/2 dB at the fundamental to +m/2 at the top.
            const double t = order / static_cast<double>(harmonics) - 0.5;
            amp_db += cfg.spoof_magnitude_artifact_db * t;
        }
        p.amp = std::pow(order, -kAmpRolloff) * std::pow(10.0, amp_db / 20.0);
        p.base_freq = order * f0;
        if (spoof) {
            p.base_freq *= 1.0 + cfg.spoof_phase_artifact * kSpoofDetunePerRad;
        }
        p.drift_rel = kDriftRelLow + (kDriftRelHigh - kDriftRelLow) * rng.uniform();
        p.drift_rate =
            kDriftRateLowHz + (kDriftRateHighHz - kDriftRateLowHz) * rng.uniform();
        p.drift_phase = kTwoPi * rng.uniform();
        p.phase = kTwoPi * rng.uniform();
    }
    const double artifact_phase = kTwoPi * rng.uniform();

    dsp::Waveform wave;
    wave.sample_rate = cfg.sample_rate;
    wave.samples.resize(n);
    // Per-harmonic weight of the oscillating group-delay offset: full below
    // the corner, corner/f above it.
    std::vector<double> gd_weight(harmonics);
    for (std::size_t h = 0; h < harmonics; ++h) {
        gd_weight[h] = std::min(1.0, kArtifactCornerHz / parts[h].base_freq);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sr;
        const double gd = spoof ? cfg.spoof_phase_artifact *
                                      std::sin(kTwoPi * kArtifactRateHz * t +
                                               artifact_phase)
                                : 0.0;
        double s = 0.0;
        for (std::size_t h = 0; h < harmonics; ++h) {
            auto& p = parts[h];
            s += p.amp * std::sin(p.phase + gd * gd_weight[h]);
            const double freq =
                p.base_freq *
                (1.0 + p.drift_rel *
                           std::sin(kTwoPi * p.drift_rate * t + p.drift_phase));
            p.phase += kTwoPi * freq / sr;
        }
        wave.samples[i] = s;
    }

    double power = 0.0;
    for (double s : wave.samples) power += s * s;
    power /= static_cast<double>(n);
    const double noise_sigma =
        std::sqrt(power * std::pow(10.0, kNoiseFloorDb / 10.0));
    for (double& s : wave.samples) s += noise_sigma * rng.gaussian();

    double peak = 0.0;
    for (double s : wave.samples) peak = std::max(peak, std::abs(s));
    const double target_peak =
        kPeakLow + (kPeakHigh - kPeakLow) * rng.uniform();
    if (peak > 0.0) {
        const double gain = target_peak / peak;
        for (double& s : wave.samples) s *= gain;
    }
    return wave;
}

} // namespace

ToyCorpus gen_toy_corpus(const ToyCorpusConfig& cfg) {
    if (cfg.n_bonafide < 10 || cfg.n_spoof < 10) {
        throw ConfigError("toy corpus needs at least 10 utterances per class");
    }
    if (cfg.sample_rate <= 0) throw ConfigError("sample_rate must be positive");
    if (cfg.duration * cfg.sample_rate < 4.0 * 512.0) {
        throw ConfigError("duration*sample_rate must be >= 4*512 samples");
    }
    if (cfg.spoof_phase_artifact < 0.0 || cfg.spoof_magnitude_artifact_db < 0.0) {
        throw ConfigError("artifact strengths must be >= 0");
    }

    ToyCorpus corpus;
    corpus.config = cfg;
    corpus.utterances.reserve(cfg.n_bonafide + cfg.n_spoof);
    char id[32];
    for (std::size_t i = 0; i < cfg.n_bonafide; ++i) {
        std::snprintf(id, sizeof(id), "T_B_%04zu", i);
        Rng rng(derive_seed(cfg.seed, id));
        corpus.utterances.push_back(
            {id, metrics::Label::Bonafide, synth_utterance(cfg, false, rng)});
    }
    for (std::size_t i = 0; i < cfg.n_spoof; ++i) {
        std::snprintf(id, sizeof(id), "T_S_%04zu", i);
        Rng rng(derive_seed(cfg.seed, id));
        corpus.utterances.push_back(
            {id, metrics::Label::Spoof, synth_utterance(cfg, true, rng)});
    }
    return corpus;
}

std::array<double, kFeatureDim> FeatureVector::flat() const {
    std::array<double, kFeatureDim> out;
    std::copy(magnitude.begin(), magnitude.end(), out.begin());
    std::copy(phase_mean.begin(), phase_mean.end(), out.begin() + kBandCount);
    std::copy(phase_var.begin(), phase_var.end(), out.begin() + 2 * kBandCount);
    return out;
}

FeatureVector extract_features(const dsp::ComplexSpectrogram& spec) {
    if (spec.frames < 2) {
        throw InvalidInput("extract_features: need at least 2 frames");
    }
    const std::size_t usable_bins = spec.bins - 1; // skip DC
    const std::size_t band_width =
        std::max<std::size_t>(1, usable_bins / kBandCount);

    // Time-mean magnitude per bin drives both band energies and the choice of
    // bins whose phase is meaningful.
    std::vector<double> mean_mag(spec.bins, 0.0);
    for (std::size_t t = 0; t < spec.frames; ++t) {
        for (std::size_t k = 1; k < spec.bins; ++k) {
            mean_mag[k] += spec.mag(t, k);
        }
    }
    const double inv_frames = 1.0 / static_cast<double>(spec.frames);
    double peak_mean = 0.0;
    for (std::size_t k = 1; k < spec.bins; ++k) {
        mean_mag[k] *= inv_frames;
        peak_mean = std::max(peak_mean, mean_mag[k]);
    }
    const double mag_floor = peak_mean * kPhaseMagRelFloor;

    const double expected_scale =
        kTwoPi * static_cast<double>(spec.params.hop_size) /
        static_cast<double>(spec.params.fft_size);

    FeatureVector fv;
    for (std::size_t b = 0; b < kBandCount; ++b) {
        const std::size_t k_begin = 1 + b * band_width;
        const std::size_t k_end =
            (b + 1 == kBandCount) ? spec.bins : std::min(spec.bins, k_begin + band_width);

        double energy = 0.0;
        std::size_t energy_count = 0;
        double band_peak = 0.0;
        for (std::size_t k = k_begin; k < k_end; ++k) {
            for (std::size_t t = 0; t < spec.frames; ++t) {
                energy += spec.mag(t, k) * spec.mag(t, k);
                ++energy_count;
            }
            band_peak = std::max(band_peak, mean_mag[k]);
        }
        fv.magnitude[b] =
            std::log10(energy / static_cast<double>(energy_count) + kLogFloor);

        // Phase statistics: per dominant bin, the circular mean and variance
        // of its frame-to-frame advance deviation over time; the band feature
        // averages the per-bin statistics. Per-bin statistics keep each bin's
        // constant sub-bin offset from masking the temporal behavior.
        const double dominance = std::max(band_peak * kPhaseBandDominance, mag_floor);
        double var_sum = 0.0, mean_cos = 0.0, mean_sin = 0.0;
        std::size_t selected = 0;
        for (std::size_t k = k_begin; k < k_end; ++k) {
            if (mean_mag[k] <= dominance) continue;
            const double expected = expected_scale * static_cast<double>(k);
            double cos_sum = 0.0, sin_sum = 0.0;
            for (std::size_t t = 0; t + 1 < spec.frames; ++t) {
                const double dev = dsp::wrap_phase(spec.phs(t + 1, k) -
                                                   spec.phs(t, k) - expected);
                cos_sum += std::cos(dev);
                sin_sum += std::sin(dev);
            }
            const double count = static_cast<double>(spec.frames - 1);
            var_sum += 1.0 - std::hypot(cos_sum, sin_sum) / count;
            if (cos_sum != 0.0 || sin_sum != 0.0) {
                const double m = std::atan2(sin_sum, cos_sum);
                mean_cos += std::cos(m);
                mean_sin += std::sin(m);
            }
            ++selected;
        }
        if (selected > 0) {
            fv.phase_var[b] = var_sum / static_cast<double>(selected);
            fv.phase_mean[b] = (mean_cos == 0.0 && mean_sin == 0.0)
                                   ? 0.0
                                   : std::atan2(mean_sin, mean_cos);
        }
    }
    return fv;
}

FeatureVector extract_features(const dsp::Waveform& wave,
                               const dsp::StftParams& params) {
    if (wave.samples.size() < 2 * params.hop_size) {
        throw InvalidInput("extract_features: waveform shorter than two frames");
    }
    return extract_features(dsp::stft(wave, params));
}

double score(const LinearModel& model, const FeatureVector& features) {
    const auto x = features.flat();
    double s = model.bias;
    for (std::size_t j = 0; j < kFeatureDim; ++j) {
        const double raw = (x[j] - model.feat_mean[j]) / model.feat_scale[j];
        s += model.weights[j] * kZSquash * std::tanh(raw / kZSquash);
    }
    return s;
}

LossGradient logistic_loss_gradient(
    const std::vector<std::array<double, kFeatureDim>>& x,
    const std::vector<int>& labels, const std::vector<double>& weights,
    double bias, double l2) {
    if (x.size() != labels.size() || x.empty()) {
        throw InvalidInput("logistic_loss_gradient: bad dataset");
    }
    if (weights.size() != kFeatureDim) {
        throw InvalidInput("logistic_loss_gradient: bad weight size");
    }
    const double inv_n = 1.0 / static_cast<double>(x.size());
    LossGradient out;
    out.gradient.assign(kFeatureDim + 1, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        double logit = bias;
        for (std::size_t j = 0; j < kFeatureDim; ++j) {
            logit += weights[j] * x[i][j];
        }
        const double y = labels[i] ? 1.0 : 0.0;
        // log(1 + e^-|z|) form keeps the loss finite for large |logit|.
        const double abs_z = std::abs(logit);
        out.loss += inv_n * (std::log1p(std::exp(-abs_z)) +
                             (logit > 0 ? (1.0 - y) * logit : -y * logit));
        const double p = 1.0 / (1.0 + std::exp(-logit));
        const double g = (p - y) * inv_n;
        for (std::size_t j = 0; j < kFeatureDim; ++j) {
            out.gradient[j] += g * x[i][j];
        }
        out.gradient[kFeatureDim] += g;
    }
    for (std::size_t j = 0; j < kFeatureDim; ++j) {
        out.loss += 0.5 * l2 * weights[j] * weights[j];
        out.gradient[j] += l2 * weights[j];
    }
    return out;
}

namespace {

struct Standardizer {
    std::vector<double> mean, scale;

    static Standardizer fit(const std::vector<FeatureVector>& features) {
        Standardizer s;
        s.mean.assign(kFeatureDim, 0.0);
        s.scale.assign(kFeatureDim, 1.0);
        if (features.empty()) return s;
        const double inv_n = 1.0 / static_cast<double>(features.size());
        std::vector<double> sq(kFeatureDim, 0.0);
        for (const auto& fv : features) {
            const auto x = fv.flat();
            for (std::size_t j = 0; j < kFeatureDim; ++j) {
                s.mean[j] += x[j] * inv_n;
                sq[j] += x[j] * x[j] * inv_n;
            }
        }
        for (std::size_t j = 0; j < kFeatureDim; ++j) {
            const double var = std::max(0.0, sq[j] - s.mean[j] * s.mean[j]);
            s.scale[j] = std::max(std::sqrt(var), 1e-8);
        }
        return s;
    }

    std::array<double, kFeatureDim> apply(const FeatureVector& fv) const {
        auto x = fv.flat();
        for (std::size_t j = 0; j < kFeatureDim; ++j) {
            const double raw = (x[j] - mean[j]) / scale[j];
            x[j] = kZSquash * std::tanh(raw / kZSquash);
        }
        return x;
    }
};

double dev_eer_of(const std::vector<std::array<double, kFeatureDim>>& dev_x,
                  const std::vector<int>& dev_labels,
                  const std::vector<double>& weights, double bias) {
    std::vector<metrics::TrialScore> trials(dev_x.size());
    for (std::size_t i = 0; i < dev_x.size(); ++i) {
        double logit = bias;
        for (std::size_t j = 0; j < kFeatureDim; ++j) {
            logit += weights[j] * dev_x[i][j];
        }
        trials[i] = {"dev", "dev", logit,
                     dev_labels[i] ? metrics::Label::Bonafide
                                   : metrics::Label::Spoof};
    }
    return metrics::compute_eer(trials).eer;
}

/// Produces the (possibly re-perturbed) training features for one epoch.
/// Clean analyses are cached; only the perturbation and re-analysis run per
/// epoch. Draw-for-draw identical to perturb::apply with the same seeds.
class EpochFeatureSource {
public:
    EpochFeatureSource(const std::vector<ToyUtterance>& utts,
                       const perturb::PerturbationSpec& spec,
                       const dsp::StftParams& stft, Seed train_seed)
        : utts_(utts), spec_(spec), stft_(stft), train_seed_(train_seed) {
        if (spec_.kind() != perturb::PerturbationSpec::Kind::None) {
            clean_specs_.reserve(utts.size());
            for (const auto& u : utts_) {
                clean_specs_.push_back(dsp::stft(u.wave, stft_));
            }
        } else {
            clean_features_.reserve(utts.size());
            for (const auto& u : utts_) {
                clean_features_.push_back(extract_features(u.wave, stft_));
            }
        }
    }

    std::vector<FeatureVector> features_for_epoch(std::size_t epoch) const {
        using Kind = perturb::PerturbationSpec::Kind;
        if (spec_.kind() == Kind::None) return clean_features_;
        const Seed epoch_seed = derive_seed(train_seed_, epoch);
        std::vector<FeatureVector> out(utts_.size());
        for (std::size_t i = 0; i < utts_.size(); ++i) {
            const Seed seed =
                corpus::utterance_seed(epoch_seed, utts_[i].utt_id);
            const auto& wave = utts_[i].wave;
            if (spec_.kind() == Kind::Phase) {
                auto spec = clean_specs_[i];
                Rng rng(seed);
                perturb::perturb_phase_spectrogram(spec, spec_.phase_width(), rng);
                const auto resynth = dsp::istft(spec, wave.samples.size());
                out[i] = extract_features(resynth, stft_);
            } else {
                const double p_signal = dsp::signal_power(wave);
                if (p_signal <= 0.0) {
                    throw UndefinedSnrError("training utterance is all zero");
                }
                const double p_noise =
                    p_signal * std::pow(10.0, -spec_.snr_db() / 10.0);
                auto noise = perturb::white_noise(wave.samples.size(), p_noise,
                                                  wave.sample_rate, seed);
                dsp::Waveform noisy = wave;
                for (std::size_t s = 0; s < noisy.samples.size(); ++s) {
                    noisy.samples[s] += noise.samples[s];
                }
                auto spec = dsp::stft(noisy, stft_);
                spec.phase = clean_specs_[i].phase;
                auto resynth = dsp::istft(spec, wave.samples.size());
                double peak = 0.0;
                for (double s : resynth.samples) peak = std::max(peak, std::abs(s));
                if (peak > 1.0) resynth = perturb::peak_normalize(resynth, 1.0);
                out[i] = extract_features(resynth, stft_);
            }
        }
        return out;
    }

private:
    const std::vector<ToyUtterance>& utts_;
    perturb::PerturbationSpec spec_;
    dsp::StftParams stft_;
    Seed train_seed_;
    std::vector<dsp::ComplexSpectrogram> clean_specs_;
    std::vector<FeatureVector> clean_features_;
};

LinearModel run_gradient_descent(
    const std::function<std::vector<FeatureVector>(std::size_t)>& epoch_features,
    const std::vector<int>& train_labels,
    const std::vector<FeatureVector>& dev_features,
    const std::vector<int>& dev_labels, const TrainHyper& hyper) {
    const bool has_bona =
        std::find(train_labels.begin(), train_labels.end(), 1) != train_labels.end();
    const bool has_spoof =
        std::find(train_labels.begin(), train_labels.end(), 0) != train_labels.end();
    if (!has_bona || !has_spoof) {
        throw InvalidInput("train_on_features: both classes required");
    }
    if (hyper.epochs == 0) throw InvalidParams("epochs must be >= 1");

    const auto first_features = epoch_features(0);
    const Standardizer stdz = Standardizer::fit(first_features);

    std::vector<std::array<double, kFeatureDim>> dev_x(dev_features.size());
    for (std::size_t i = 0; i < dev_features.size(); ++i) {
        dev_x[i] = stdz.apply(dev_features[i]);
    }

    LinearModel model;
    model.weights.assign(kFeatureDim, 0.0);
    model.feat_mean = stdz.mean;
    model.feat_scale = stdz.scale;
    model.hyper = hyper;

    std::vector<double> weights(kFeatureDim, 0.0);
    double bias = 0.0;
    std::vector<double> best_weights = weights;
    double best_bias = bias;
    double best_dev = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;

    std::vector<std::array<double, kFeatureDim>> x(train_labels.size());
    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        const auto features = (epoch == 0) ? first_features : epoch_features(epoch);
        if (features.size() != train_labels.size()) {
            throw InvalidInput("feature/label count mismatch");
        }
        for (std::size_t i = 0; i < features.size(); ++i) {
            x[i] = stdz.apply(features[i]);
        }
        const auto lg =
            logistic_loss_gradient(x, train_labels, weights, bias, hyper.l2);
        if (!std::isfinite(lg.loss)) {
            throw TrainingError("non-finite training loss at epoch " +
                                std::to_string(epoch));
        }
        for (std::size_t j = 0; j < kFeatureDim; ++j) {
            weights[j] -= hyper.learning_rate * lg.gradient[j];
        }
        bias -= hyper.learning_rate * lg.gradient[kFeatureDim];

        const bool checkpoint = ((epoch + 1) % hyper.check_every == 0) ||
                                (epoch + 1 == hyper.epochs);
        if (checkpoint && !dev_x.empty()) {
            const double e = dev_eer_of(dev_x, dev_labels, weights, bias);
            if (e < best_dev) {
                best_dev = e;
                best_weights = weights;
                best_bias = bias;
                best_epoch = epoch + 1;
            }
        }
    }

    if (dev_x.empty()) {
        best_weights = weights;
        best_bias = bias;
        best_epoch = hyper.epochs;
        best_dev = 1.0;
    }
    model.weights = best_weights;
    model.bias = best_bias;
    model.selected_epoch = best_epoch;
    model.dev_eer = best_dev;
    return model;
}

} // namespace

LinearModel train_on_features(const std::vector<FeatureVector>& train_x,
                              const std::vector<int>& train_labels,
                              const std::vector<FeatureVector>& dev_x,
                              const std::vector<int>& dev_labels,
                              const TrainHyper& hyper) {
    if (train_x.size() != train_labels.size() || train_x.empty()) {
        throw InvalidInput("train_on_features: bad dataset");
    }
    auto model = run_gradient_descent(
        [&](std::size_t) { return train_x; }, train_labels, dev_x, dev_labels,
        hyper);
    return model;
}

LinearModel train_classifier(const std::vector<ToyUtterance>& train_utts,
                             const std::vector<ToyUtterance>& dev_utts,
                             const perturb::PerturbationSpec& train_spec,
                             const dsp::StftParams& stft,
                             const TrainHyper& hyper, Seed seed) {
    if (train_utts.empty()) throw InvalidInput("train_classifier: empty train set");
    std::vector<int> train_labels(train_utts.size());
    for (std::size_t i = 0; i < train_utts.size(); ++i) {
        train_labels[i] = train_utts[i].label == metrics::Label::Bonafide;
    }
    // Checkpoint selection validates under the same corruption the training
    // pipeline applies (one fixed draw per dev utterance). Selecting on clean
    // dev EER would systematically prefer checkpoints that re-attach to the
    // very features the perturbation is meant to train away.
    const Seed dev_seed = derive_seed(seed, "dev");
    std::vector<FeatureVector> dev_features(dev_utts.size());
    std::vector<int> dev_labels(dev_utts.size());
    for (std::size_t i = 0; i < dev_utts.size(); ++i) {
        const auto wave =
            perturb::apply(dev_utts[i].wave, train_spec, stft,
                           corpus::utterance_seed(dev_seed, dev_utts[i].utt_id));
        dev_features[i] = extract_features(wave, stft);
        dev_labels[i] = dev_utts[i].label == metrics::Label::Bonafide;
    }

    EpochFeatureSource source(train_utts, train_spec, stft, seed);
    auto model = run_gradient_descent(
        [&](std::size_t epoch) { return source.features_for_epoch(epoch); },
        train_labels, dev_features, dev_labels, hyper);
    model.train_spec = train_spec;
    model.seed = seed;
    return model;
}

namespace {

struct Splits {
    std::vector<ToyUtterance> train, dev, eval;
};

Splits split_corpus(ToyCorpus&& corpus) {
    // Utterances are i.i.d. by construction, so index splits are unbiased:
    // per class, 50% train / 25% dev / 25% eval.
    Splits s;
    auto push_class = [&](std::size_t begin, std::size_t count) {
        const std::size_t n_train = count / 2;
        const std::size_t n_dev = count / 4;
        for (std::size_t i = 0; i < count; ++i) {
            auto& u = corpus.utterances[begin + i];
            if (i < n_train) s.train.push_back(std::move(u));
            else if (i < n_train + n_dev) s.dev.push_back(std::move(u));
            else s.eval.push_back(std::move(u));
        }
    };
    push_class(0, corpus.config.n_bonafide);
    push_class(corpus.config.n_bonafide, corpus.config.n_spoof);
    return s;
}

} // namespace

ResultTable run_experiment(const ExperimentGrid& grid) {
    if (grid.train_specs.empty() || grid.eval_specs.empty() || grid.seeds.empty()) {
        throw ConfigError("experiment grid needs train specs, eval specs and seeds");
    }
    dsp::validate(grid.stft);

    const std::size_t n_rows = grid.train_specs.size();
    const std::size_t n_evals = grid.eval_specs.size();
    const std::size_t n_seeds = grid.seeds.size();

    ResultTable table;
    for (const auto& s : grid.train_specs) table.train_labels.push_back(s.label());
    for (const auto& s : grid.eval_specs) table.eval_labels.push_back(s.label());
    table.trials.assign(n_rows, std::vector<std::vector<metrics::TrialScore>>(n_seeds));

    const double nan = std::numeric_limits<double>::quiet_NaN();
    // [row][eval][seed] EER, then averaged.
    std::vector per_seed_eer(n_rows, std::vector(n_evals, std::vector(n_seeds, nan)));
    std::vector per_seed_pooled(n_rows, std::vector(n_seeds, nan));
    std::vector<std::string> cell_errors;

    for (std::size_t si = 0; si < n_seeds; ++si) {
        const Seed replicate =
            derive_seed(grid.corpus.seed, grid.seeds[si].value);

        ToyCorpusConfig cfg = grid.corpus;
        cfg.seed = derive_seed(replicate, "corpus");
        Splits splits = split_corpus(gen_toy_corpus(cfg));

        // Eval-side waveforms are perturbed once per condition; the seed
        // depends only on (replicate, utterance), so every condition reuses
        // the same underlying draws and comparisons are paired.
        const Seed eval_seed = derive_seed(replicate, "eval");
        std::vector<std::vector<FeatureVector>> eval_features(
            n_evals, std::vector<FeatureVector>(splits.eval.size()));
        std::vector<std::string> eval_errors(n_evals);
        parallel_for(n_evals, grid.workers, [&](std::size_t ei) {
            try {
                for (std::size_t u = 0; u < splits.eval.size(); ++u) {
                    const auto& utt = splits.eval[u];
                    const auto wave = perturb::apply(
                        utt.wave, grid.eval_specs[ei], grid.stft,
                        corpus::utterance_seed(eval_seed, utt.utt_id));
                    eval_features[ei][u] = extract_features(wave, grid.stft);
                }
            } catch (const std::exception& e) {
                eval_errors[ei] = e.what();
            }
        });

        std::vector<std::string> row_errors(n_rows);
        parallel_for(n_rows, grid.workers, [&](std::size_t ri) {
            try {
                const Seed train_seed = derive_seed(
                    replicate, "train/" + grid.train_specs[ri].label());
                const auto model =
                    train_classifier(splits.train, splits.dev,
                                     grid.train_specs[ri], grid.stft,
                                     grid.hyper, train_seed);

                auto& row_trials = table.trials[ri][si];
                for (std::size_t ei = 0; ei < n_evals; ++ei) {
                    if (!eval_errors[ei].empty()) continue;
                    std::vector<metrics::TrialScore> cond_trials;
                    cond_trials.reserve(splits.eval.size());
                    for (std::size_t u = 0; u < splits.eval.size(); ++u) {
                        cond_trials.push_back({splits.eval[u].utt_id,
                                               table.eval_labels[ei],
                                               score(model, eval_features[ei][u]),
                                               splits.eval[u].label});
                    }
                    per_seed_eer[ri][ei][si] =
                        metrics::compute_eer(cond_trials).eer;
                    row_trials.insert(row_trials.end(), cond_trials.begin(),
                                      cond_trials.end());
                }
                if (!row_trials.empty()) {
                    std::set<std::string> all_conditions(
                        table.eval_labels.begin(), table.eval_labels.end());
                    per_seed_pooled[ri][si] =
                        metrics::pooled_eer(row_trials, all_conditions).eer;
                }
            } catch (const std::exception& e) {
                row_errors[ri] = e.what();
            }
        });

        for (std::size_t ei = 0; ei < n_evals; ++ei) {
            if (!eval_errors[ei].empty()) {
                cell_errors.push_back("eval " + table.eval_labels[ei] + "|seed " +
                                      std::to_string(grid.seeds[si].value) + ": " +
                                      eval_errors[ei]);
            }
        }
        for (std::size_t ri = 0; ri < n_rows; ++ri) {
            if (!row_errors[ri].empty()) {
                cell_errors.push_back("train " + table.train_labels[ri] + "|seed " +
                                      std::to_string(grid.seeds[si].value) + ": " +
                                      row_errors[ri]);
            }
        }
    }

    table.cell_errors = std::move(cell_errors);
    table.eer.assign(n_rows, std::vector<double>(n_evals, nan));
    table.pooled_eer.assign(n_rows, nan);
    for (std::size_t ri = 0; ri < n_rows; ++ri) {
        for (std::size_t ei = 0; ei < n_evals; ++ei) {
            double sum = 0.0;
            std::size_t count = 0;
            for (std::size_t si = 0; si < n_seeds; ++si) {
                if (std::isfinite(per_seed_eer[ri][ei][si])) {
                    sum += per_seed_eer[ri][ei][si];
                    ++count;
                }
            }
            if (count > 0) table.eer[ri][ei] = sum / static_cast<double>(count);
        }
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t si = 0; si < n_seeds; ++si) {
            if (std::isfinite(per_seed_pooled[ri][si])) {
                sum += per_seed_pooled[ri][si];
                ++count;
            }
        }
        if (count > 0) table.pooled_eer[ri] = sum / static_cast<double>(count);
    }
    return table;
}

void write_result_csv(std::ostream& out, const ResultTable& table) {
    out << "train";
    for (const auto& e : table.eval_labels) out << ',' << e;
    out << ",pooled\n";
    char buf[32];
    for (std::size_t ri = 0; ri < table.train_labels.size(); ++ri) {
        out << table.train_labels[ri];
        for (std::size_t ei = 0; ei < table.eval_labels.size(); ++ei) {
            std::snprintf(buf, sizeof(buf), "%.6f", table.eer[ri][ei]);
            out << ',' << buf;
        }
        std::snprintf(buf, sizeof(buf), "%.6f", table.pooled_eer[ri]);
        out << ',' << buf << '\n';
    }
}

void write_result_csv(const std::string& path, const ResultTable& table) {
    std::ofstream f(path);
    if (!f) throw InvalidInput("cannot open CSV for write: " + path);
    write_result_csv(f, table);
}

} // namespace phaselab::toybench

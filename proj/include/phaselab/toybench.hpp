#ifndef PHASELAB_TOYBENCH_HPP
#define PHASELAB_TOYBENCH_HPP

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "phaselab/dsp.hpp"
#include "phaselab/metrics.hpp"
#include "phaselab/perturb.hpp"
#include "phaselab/rng.hpp"

namespace phaselab::toybench {

/// Synthetic corpus configuration.
///
/// Bonafide utterances are sums of randomly detuned harmonics whose
/// frequencies drift slowly (natural phase evolution) over a low noise floor.
/// Spoof utterances share the same magnitude construction but carry a
/// systematic group-delay phase artifact: a phase offset proportional to
/// harmonic number (a constant phase slope across frequency) with a
/// constant-rate drift component plus a slow oscillation, so frame-local
/// phase statistics can observe it. A weak spectral-tilt magnitude artifact
/// keeps the magnitude stream informative without making it trivially
/// sufficient.
struct ToyCorpusConfig {
    std::size_t n_bonafide = 400;
    std::size_t n_spoof = 400;
    double duration = 0.5; // seconds
    int sample_rate = 16000;
    /// Peak group-delay phase offset at the fundamental, radians.
    double spoof_phase_artifact = 1.5707963267948966; // pi/2
    /// Spectral tilt from lowest to highest harmonic, dB.
    double spoof_magnitude_artifact_db = 3.0;
    Seed seed;
};

struct ToyUtterance {
    std::string utt_id;
    metrics::Label label = metrics::Label::Bonafide;
    dsp::Waveform wave;
};

struct ToyCorpus {
    ToyCorpusConfig config;
    std::vector<ToyUtterance> utterances; // all bonafide, then all spoof
};

/// Generate the corpus. Bit-identical for identical (config, seed).
/// Throws ConfigError for counts < 10 or duration*sample_rate < 4*512.
ToyCorpus gen_toy_corpus(const ToyCorpusConfig& cfg);

inline constexpr std::size_t kBandCount = 16;
inline constexpr std::size_t kFeatureDim = 3 * kBandCount;
/// Additive floor inside log10 for band energies; all-zero input sits at
/// log10(kLogFloor).
inline constexpr double kLogFloor = 1e-12;

/// Per-band features over 16 linear bands covering bins [1, fft/2] (DC
/// excluded). magnitude = log10 mean band energy. phase_* = circular mean and
/// variance, per band, of the frame-to-frame phase advance minus the advance
/// expected from the bin frequency and hop, over bins whose magnitude exceeds
/// 1e-8 of the utterance's peak magnitude (0 when a band has no such bins).
struct FeatureVector {
    std::array<double, kBandCount> magnitude{};
    std::array<double, kBandCount> phase_mean{};
    std::array<double, kBandCount> phase_var{};

    std::array<double, kFeatureDim> flat() const;
};

/// Throws InvalidInput for inputs shorter than two frames.
FeatureVector extract_features(const dsp::Waveform& wave,
                               const dsp::StftParams& params);
FeatureVector extract_features(const dsp::ComplexSpectrogram& spec);

struct TrainHyper {
    std::size_t epochs = 60;
    double learning_rate = 0.3;
    double l2 = 1e-4;
    std::size_t check_every = 5; // dev-EER checkpoint interval
};

/// Logistic-regression model on standardized features. Scores are logits;
/// higher means more bonafide-like.
struct LinearModel {
    std::vector<double> weights; // kFeatureDim
    double bias = 0.0;
    std::vector<double> feat_mean;  // standardization fixed at training time
    std::vector<double> feat_scale;
    // training metadata
    perturb::PerturbationSpec train_spec = perturb::PerturbationSpec::none();
    TrainHyper hyper;
    Seed seed;
    std::size_t selected_epoch = 0;
    double dev_eer = 1.0;
};

double score(const LinearModel& model, const FeatureVector& features);

/// Mean logistic loss with L2 penalty on the weights (not the bias), plus its
/// gradient, at the given parameters. labels: 1 = bonafide, 0 = spoof.
/// Gradient layout: kFeatureDim weight entries then the bias.
struct LossGradient {
    double loss = 0.0;
    std::vector<double> gradient; // size kFeatureDim + 1
};
LossGradient logistic_loss_gradient(const std::vector<std::array<double, kFeatureDim>>& x,
                                    const std::vector<int>& labels,
                                    const std::vector<double>& weights,
                                    double bias, double l2);

/// Full-batch gradient descent on precomputed feature vectors.
/// Standardization statistics are computed from `train_x` and stored in the
/// model. The checkpoint with the lowest dev EER is kept (earlier epoch wins
/// ties). Throws TrainingError on a non-finite loss and InvalidInput unless
/// both classes are present.
LinearModel train_on_features(const std::vector<FeatureVector>& train_x,
                              const std::vector<int>& train_labels,
                              const std::vector<FeatureVector>& dev_x,
                              const std::vector<int>& dev_labels,
                              const TrainHyper& hyper);

/// Train on utterances under a training-time perturbation. When train_spec is
/// not None, every training utterance is re-perturbed with a fresh derived
/// seed each epoch before feature extraction (the dev split stays clean).
/// Standardization comes from the first epoch's training features, squashed
/// through a soft winsorizer so off-distribution eval audio stays bounded.
LinearModel train_classifier(const std::vector<ToyUtterance>& train_utts,
                             const std::vector<ToyUtterance>& dev_utts,
                             const perturb::PerturbationSpec& train_spec,
                             const dsp::StftParams& stft,
                             const TrainHyper& hyper, Seed seed);

struct ExperimentGrid {
    std::vector<perturb::PerturbationSpec> train_specs;
    std::vector<perturb::PerturbationSpec> eval_specs;
    std::vector<Seed> seeds = {Seed{1}, Seed{2}, Seed{3}};
    ToyCorpusConfig corpus;
    dsp::StftParams stft;
    TrainHyper hyper;
    unsigned workers = 1;
};

/// rows = train specs, cols = eval specs; cells are mean EER over seeds, and
/// the pooled column concatenates all eval conditions per seed before scoring
/// (pooling is never an average of per-condition EERs).
struct ResultTable {
    std::vector<std::string> train_labels;
    std::vector<std::string> eval_labels;
    std::vector<std::vector<double>> eer; // [row][col], mean over seeds
    std::vector<double> pooled_eer;       // [row], mean over seeds
    /// Raw per-seed trials, condition = eval label: [row][seed].
    std::vector<std::vector<std::vector<metrics::TrialScore>>> trials;
    std::vector<std::string> cell_errors; // "train|eval|seed: message"
};

/// Per replicate seed: regenerate the corpus, split each class 50/25/25 into
/// train/dev/eval, train one model per row, then score every eval condition.
/// Eval-time perturbation seeds depend only on (replicate, utterance), not on
/// the condition, so conditions are compared on paired random draws. The
/// whole table is a pure function of the grid. Cell failures are recorded in
/// cell_errors (cells become NaN) and the grid continues.
ResultTable run_experiment(const ExperimentGrid& grid);

/// CSV: header "train,<eval...>,pooled"; one row per train spec, cells with
/// six decimals. Byte-stable for identical tables.
void write_result_csv(std::ostream& out, const ResultTable& table);
void write_result_csv(const std::string& path, const ResultTable& table);

} // namespace phaselab::toybench

#endif

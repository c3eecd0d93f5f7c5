#ifndef PHASELAB_CORPUS_HPP
#define PHASELAB_CORPUS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "phaselab/dsp.hpp"
#include "phaselab/metrics.hpp"
#include "phaselab/perturb.hpp"
#include "phaselab/rng.hpp"

namespace phaselab::corpus {

/// One manifest line binding an utterance to its label and attack tag.
struct ProtocolEntry {
    std::string speaker_id;
    std::string utt_id;
    std::string attack_id = "-"; // "-" for bonafide
    metrics::Label label = metrics::Label::Bonafide;
};

/// Parse a protocol manifest. Line format (whitespace separated):
///   speaker_id utt_id system attack label
/// with "-" placeholders tolerated in the system/attack columns and label in
/// {bonafide, spoof}. Utterance ids must be unique. Throws ParseError with
/// the offending line number.
std::vector<ProtocolEntry> parse_protocol(std::istream& in);
std::vector<ProtocolEntry> parse_protocol(const std::string& text);
std::vector<ProtocolEntry> load_protocol(const std::filesystem::path& path);

enum class WavEncoding { Pcm16, Float32 };

/// Read a mono RIFF WAV file, 16-bit PCM or 32-bit float. Integer samples map
/// to [-1, 1) by division by 32768. Throws UnsupportedFormat for anything
/// else (stereo, other codecs), CorruptFile for structural damage.
dsp::Waveform read_audio(const std::filesystem::path& path);
/// Same, also reporting the source encoding.
dsp::Waveform read_audio(const std::filesystem::path& path, WavEncoding& encoding);

/// Write a mono RIFF WAV file at the given encoding. 16-bit samples are
/// rounded and clamped to [-32768, 32767].
void write_audio(const std::filesystem::path& path, const dsp::Waveform& wave,
                 WavEncoding encoding);

/// Deterministic per-utterance seed: splitmix64/FNV-1a mix of the global seed
/// and the utterance id. Independent of processing order and worker count.
Seed utterance_seed(Seed global_seed, const std::string& utt_id);

/// Batch perturbation job over a manifest.
struct BatchJob {
    std::vector<ProtocolEntry> manifest;
    std::filesystem::path audio_root;  // input: audio_root/<utt_id>.wav
    std::filesystem::path output_root; // mirrored layout, must differ from audio_root
    perturb::PerturbationSpec spec = perturb::PerturbationSpec::none();
    dsp::StftParams stft;
    Seed global_seed;
    unsigned workers = 1;
};

struct BatchFailure {
    std::string utt_id;
    std::string message;
};

struct BatchReport {
    std::size_t processed = 0;
    std::size_t failed = 0;
    std::vector<BatchFailure> failures; // in manifest order
    double wall_seconds = 0.0;
    double audio_seconds = 0.0;
    double realtime_factor = 0.0; // audio_seconds / wall_seconds
};

/// Run the batch: for every manifest entry, read audio_root/<utt_id>.wav,
/// apply the perturbation with utterance_seed(global_seed, utt_id), and write
/// the result (at the source encoding) under output_root, plus a
/// job_metadata.txt sidecar recording spec, seed, STFT params and version.
/// Output bytes depend only on (manifest, spec, stft, global_seed) — never on
/// worker count or scheduling. Per-file errors are recorded in the report and
/// do not abort the batch. Throws ConfigError for an unusable job.
BatchReport run_batch(const BatchJob& job);

/// Worker count from the PHASELAB_WORKERS environment variable, falling back
/// to the hardware concurrency.
unsigned default_workers();

} // namespace phaselab::corpus

#endif

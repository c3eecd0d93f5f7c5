#include "phaselab/corpus.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "phaselab/errors.hpp"
#include "phaselab/version.hpp"

namespace phaselab::corpus {

std::vector<ProtocolEntry> parse_protocol(std::istream& in) {
    std::vector<ProtocolEntry> entries;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        ProtocolEntry e;
        std::string system, label_text, extra;
        if (!(ss >> e.speaker_id)) continue; // blank line
        if (!(ss >> e.utt_id >> system >> e.attack_id >> label_text)) {
            throw ParseError(line_no,
                             "expected 'speaker utt_id system attack label'");
        }
        if (ss >> extra) {
            throw ParseError(line_no, "trailing field '" + extra + "'");
        }
        try {
            e.label = metrics::parse_label(label_text);
        } catch (const InvalidInput&) {
            throw ParseError(line_no, "bad label '" + label_text +
                                          "' (want bonafide|spoof)");
        }
        if (e.utt_id.empty()) throw ParseError(line_no, "empty utterance id");
        if (!seen.insert(e.utt_id).second) {
            throw ParseError(line_no, "duplicate utterance id '" + e.utt_id + "'");
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<ProtocolEntry> parse_protocol(const std::string& text) {
    std::istringstream ss(text);
    return parse_protocol(ss);
}

std::vector<ProtocolEntry> load_protocol(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw InvalidInput("cannot open protocol file: " + path.string());
    return parse_protocol(f);
}

Seed utterance_seed(Seed global_seed, const std::string& utt_id) {
    return derive_seed(global_seed, utt_id);
}

unsigned default_workers() {
    if (const char* env = std::getenv("PHASELAB_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw >= 1 ? hw : 1;
}

namespace {

void write_job_metadata(const BatchJob& job) {
    // Reproducibility sidecar. Deliberately excludes worker count and timing
    // so output trees are byte-identical across runs of the same job.
    std::ofstream f(job.output_root / "job_metadata.txt");
    if (!f) {
        throw ConfigError("cannot write metadata in " + job.output_root.string());
    }
    f << "toolkit_version " << kVersion << "\n"
      << "perturbation " << job.spec.label() << "\n"
      << "stft_fft_size " << job.stft.fft_size << "\n"
      << "stft_hop_size " << job.stft.hop_size << "\n"
      << "stft_window " << dsp::window_name(job.stft.window) << "\n"
      << "global_seed " << job.global_seed.value << "\n"
      << "entries " << job.manifest.size() << "\n";
}

} // namespace

BatchReport run_batch(const BatchJob& job) {
    namespace fs = std::filesystem;
    if (job.workers < 1) throw ConfigError("workers must be >= 1");
    if (job.manifest.empty()) throw ConfigError("empty manifest");
    if (!fs::is_directory(job.audio_root)) {
        throw ConfigError("audio root is not a directory: " +
                          job.audio_root.string());
    }
    if (fs::weakly_canonical(job.output_root) ==
        fs::weakly_canonical(job.audio_root)) {
        throw ConfigError("output_root must differ from audio_root");
    }
    dsp::validate(job.stft);
    fs::create_directories(job.output_root);

    const auto t0 = std::chrono::steady_clock::now();

    // One slot per entry keeps the report in manifest order no matter which
    // worker finishes first.
    std::vector<std::string> errors(job.manifest.size());
    std::vector<double> audio_secs(job.manifest.size(), 0.0);
    std::atomic<std::size_t> next{0};

    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= job.manifest.size()) return;
            const auto& entry = job.manifest[i];
            try {
                const auto in_path = job.audio_root / (entry.utt_id + ".wav");
                WavEncoding encoding;
                const auto wave = read_audio(in_path, encoding);
                audio_secs[i] = wave.duration_seconds();
                const auto seed = utterance_seed(job.global_seed, entry.utt_id);
                const auto out =
                    perturb::apply(wave, job.spec, job.stft, seed);
                write_audio(job.output_root / (entry.utt_id + ".wav"), out,
                            encoding);
            } catch (const std::exception& e) {
                errors[i] = e.what();
                if (errors[i].empty()) errors[i] = "unknown error";
            }
        }
    };

    const unsigned workers =
        std::min<std::size_t>(job.workers, job.manifest.size());
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    write_job_metadata(job);

    BatchReport report;
    for (std::size_t i = 0; i < job.manifest.size(); ++i) {
        if (errors[i].empty()) {
            ++report.processed;
            report.audio_seconds += audio_secs[i];
        } else {
            ++report.failed;
            report.failures.push_back({job.manifest[i].utt_id, errors[i]});
        }
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    report.realtime_factor =
        report.wall_seconds > 0.0 ? report.audio_seconds / report.wall_seconds
                                  : 0.0;
    return report;
}

} // namespace phaselab::corpus

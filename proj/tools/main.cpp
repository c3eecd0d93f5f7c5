// phaselab command-line front-end: perturbation batches, EER scoring, and the
// synthetic benchmark as reproducible, seed-driven jobs.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phaselab/corpus.hpp"
#include "phaselab/errors.hpp"
#include "phaselab/metrics.hpp"
#include "phaselab/perturb.hpp"
#include "phaselab/plot.hpp"
#include "phaselab/toybench.hpp"
#include "phaselab/version.hpp"

namespace {

// Exit codes, also printed by `phaselab info`.
constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitPartialFailure = 3;
constexpr int kExitFailure = 4;

using phaselab::Seed;
namespace dsp = phaselab::dsp;
namespace corpus = phaselab::corpus;
namespace metrics = phaselab::metrics;
namespace perturb = phaselab::perturb;
namespace toybench = phaselab::toybench;

struct StftFlags {
    std::size_t fft_size = dsp::StftParams{}.fft_size;
    std::size_t hop_size = dsp::StftParams{}.hop_size;
    std::string window = "hann";

    dsp::StftParams params() const {
        dsp::StftParams p;
        p.fft_size = fft_size;
        p.hop_size = hop_size;
        p.window = dsp::parse_window(window);
        dsp::validate(p);
        return p;
    }
};

void add_stft_flags(CLI::App* cmd, StftFlags& flags) {
    cmd->add_option("--fft-size", flags.fft_size, "STFT frame size (power of two)")
        ->capture_default_str();
    cmd->add_option("--hop", flags.hop_size, "STFT hop size (must divide fft-size)")
        ->capture_default_str();
    cmd->add_option("--window", flags.window, "hann|hamming|blackman|rect")
        ->capture_default_str();
}

void print_provenance(const std::string& what, const dsp::StftParams& stft,
                      Seed seed) {
    std::cout << "phaselab " << phaselab::kVersion << " | " << what
              << " | seed " << seed.value << " | stft " << stft.fft_size << "/"
              << stft.hop_size << " " << dsp::window_name(stft.window) << "\n";
}

int cmd_perturb(const std::string& manifest_path, const std::string& in_dir,
                const std::string& out_dir, const std::string& phase_text,
                bool has_snr, double snr_db, bool none, std::uint64_t seed,
                unsigned workers, const StftFlags& stft_flags) {
    perturb::PerturbationSpec spec = perturb::PerturbationSpec::none();
    const int selected = (!phase_text.empty()) + has_snr + none;
    if (selected != 1) {
        std::cerr << "error: exactly one of --phase, --snr, --none is required "
                     "(phase and magnitude are never combined)\n";
        return kExitUsage;
    }
    try {
        if (!phase_text.empty()) {
            spec = perturb::PerturbationSpec::phase(
                perturb::parse_radians(phase_text));
        } else if (has_snr) {
            spec = perturb::PerturbationSpec::magnitude(snr_db);
        }
    } catch (const phaselab::InvalidParams& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    corpus::BatchJob job;
    try {
        job.manifest = corpus::load_protocol(manifest_path);
        job.audio_root = in_dir;
        job.output_root = out_dir;
        job.spec = spec;
        job.stft = stft_flags.params();
        job.global_seed = Seed{seed};
        job.workers = workers;

        print_provenance("perturb " + spec.label(), job.stft, job.global_seed);
        std::cout << "manifest " << manifest_path << " (" << job.manifest.size()
                  << " entries) | in " << in_dir << " | out " << out_dir
                  << " | workers " << workers << "\n";

        const auto report = corpus::run_batch(job);
        std::printf("processed %zu | failed %zu | wall %.2fs | audio %.2fs | "
                    "%.1fx realtime\n",
                    report.processed, report.failed, report.wall_seconds,
                    report.audio_seconds, report.realtime_factor);
        for (const auto& f : report.failures) {
            std::cout << "  failed " << f.utt_id << ": " << f.message << "\n";
        }
        if (report.processed == 0) return kExitFailure;
        if (report.failed > 0) return kExitPartialFailure;
        return kExitOk;
    } catch (const phaselab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

int cmd_score(const std::string& scores_path, const std::string& csv_path) {
    try {
        const auto trials = metrics::read_score_file(scores_path);
        std::set<std::string> conditions;
        for (const auto& t : trials) conditions.insert(t.condition);

        std::cout << "phaselab " << phaselab::kVersion << " | score "
                  << scores_path << " | " << trials.size() << " trials, "
                  << conditions.size() << " condition(s)\n";
        std::printf("%-12s %10s %12s\n", "condition", "EER%", "threshold");

        std::vector<std::pair<std::string, double>> rows;
        for (const auto& c : conditions) {
            const auto r = metrics::pooled_eer(trials, {c});
            std::printf("%-12s %10.3f %12.5g\n", c.c_str(), 100.0 * r.eer,
                        r.threshold);
            rows.emplace_back(c, r.eer);
        }
        const auto pooled = metrics::pooled_eer(trials, conditions);
        std::printf("%-12s %10.3f %12.5g\n", "pooled", 100.0 * pooled.eer,
                    pooled.threshold);
        rows.emplace_back("pooled", pooled.eer);

        if (!csv_path.empty()) {
            std::ofstream f(csv_path);
            if (!f) throw phaselab::InvalidInput("cannot open " + csv_path);
            f << "condition,eer\n";
            char buf[32];
            for (const auto& [name, eer] : rows) {
                std::snprintf(buf, sizeof(buf), "%.6f", eer);
                f << name << ',' << buf << '\n';
            }
        }
        return kExitOk;
    } catch (const phaselab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

std::vector<perturb::PerturbationSpec> parse_spec_list(const std::string& text) {
    std::vector<perturb::PerturbationSpec> specs;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string item =
            text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        if (!item.empty()) specs.push_back(perturb::PerturbationSpec::parse(item));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return specs;
}

void write_bench_plots(const std::filesystem::path& out_dir,
                       const toybench::ResultTable& table) {
    auto curve_for = [&](const std::vector<std::size_t>& eval_cols,
                         const std::string& file, const std::string& title) {
        if (eval_cols.size() < 2) return;
        std::vector<std::string> cats;
        for (auto c : eval_cols) cats.push_back(table.eval_labels[c]);
        std::vector<phaselab::plot::Series> series;
        for (std::size_t r = 0; r < table.train_labels.size(); ++r) {
            phaselab::plot::Series s;
            s.name = "train " + table.train_labels[r];
            for (auto c : eval_cols) s.values.push_back(table.eer[r][c]);
            series.push_back(std::move(s));
        }
        phaselab::plot::write_line_chart((out_dir / file).string(), title, cats,
                                         series, "EER (%)");
    };

    std::vector<std::size_t> phase_cols, mag_cols;
    for (std::size_t c = 0; c < table.eval_labels.size(); ++c) {
        const auto& l = table.eval_labels[c];
        if (l == "none" || l.rfind("phase:", 0) == 0) phase_cols.push_back(c);
        if (l == "none" || l.rfind("mag:", 0) == 0) mag_cols.push_back(c);
    }
    curve_for(phase_cols, "eer_vs_eval_phase.svg", "EER under phase-perturbed evaluation");
    curve_for(mag_cols, "eer_vs_eval_mag.svg", "EER under magnitude-perturbed evaluation");
}

int cmd_bench(const std::string& out_dir, const std::string& train_list,
              const std::string& eval_list, std::uint64_t seed,
              std::size_t n_seeds, std::size_t corpus_per_class,
              double duration, double phase_artifact, double mag_artifact_db,
              std::size_t epochs, unsigned workers, bool plots) {
    try {
        toybench::ExperimentGrid grid;
        grid.train_specs = parse_spec_list(train_list);
        grid.eval_specs = parse_spec_list(eval_list);
        grid.seeds.clear();
        for (std::size_t i = 0; i < n_seeds; ++i) {
            grid.seeds.push_back(Seed{i + 1});
        }
        grid.corpus.seed = Seed{seed};
        grid.corpus.n_bonafide = corpus_per_class;
        grid.corpus.n_spoof = corpus_per_class;
        grid.corpus.duration = duration;
        grid.corpus.spoof_phase_artifact = phase_artifact;
        grid.corpus.spoof_magnitude_artifact_db = mag_artifact_db;
        grid.hyper.epochs = epochs;
        grid.workers = workers;

        print_provenance("bench", grid.stft, grid.corpus.seed);
        std::cout << "corpus " << corpus_per_class << "+" << corpus_per_class
                  << " x " << duration << "s | artifacts phase "
                  << phase_artifact << " rad, mag " << mag_artifact_db
                  << " dB | " << n_seeds << " seed(s) | epochs " << epochs
                  << " | workers " << workers << "\n";

        const auto table = toybench::run_experiment(grid);

        std::filesystem::create_directories(out_dir);
        const auto csv_path = std::filesystem::path(out_dir) / "results.csv";
        toybench::write_result_csv(csv_path.string(), table);
        if (plots) write_bench_plots(out_dir, table);

        std::printf("%-14s", "train\\eval");
        for (const auto& e : table.eval_labels) std::printf(" %10s", e.c_str());
        std::printf(" %10s\n", "pooled");
        for (std::size_t r = 0; r < table.train_labels.size(); ++r) {
            std::printf("%-14s", table.train_labels[r].c_str());
            for (std::size_t c = 0; c < table.eval_labels.size(); ++c) {
                std::printf(" %10.4f", table.eer[r][c]);
            }
            std::printf(" %10.4f\n", table.pooled_eer[r]);
        }
        for (const auto& err : table.cell_errors) {
            std::cout << "cell error: " << err << "\n";
        }
        std::cout << "wrote " << csv_path.string() << "\n";
        return table.cell_errors.empty() ? kExitOk : kExitPartialFailure;
    } catch (const phaselab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

int cmd_info() {
    const dsp::StftParams defaults;
    std::cout << "phaselab " << phaselab::kVersion << "\n"
              << "default stft: fft " << defaults.fft_size << ", hop "
              << defaults.hop_size << ", window "
              << dsp::window_name(defaults.window) << " (32 ms / 8 ms at 16 kHz)\n"
              << "audio: RIFF WAV, mono, 16-bit PCM or 32-bit float\n"
              << "features: " << toybench::kBandCount << " linear bands -> "
              << toybench::kFeatureDim << " dims (log energy, phase-advance "
                 "circular mean/variance)\n"
              << "worker default: PHASELAB_WORKERS env var, else hardware "
                 "concurrency (" << corpus::default_workers() << " here)\n"
              << "exit codes: 0 ok, 2 usage error, 3 partial batch failure, "
                 "4 failure, 1 internal\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"phaselab: phase/magnitude perturbation, EER scoring, and a "
                 "synthetic robustness benchmark"};
    app.require_subcommand(1);

    // perturb
    std::string manifest, in_dir, out_dir, phase_text;
    double snr_db = 0.0;
    bool none = false;
    std::uint64_t seed = 0;
    unsigned workers = corpus::default_workers();
    StftFlags stft_flags;
    auto* p = app.add_subcommand("perturb", "Perturb a corpus per a manifest");
    p->add_option("--manifest", manifest, "protocol manifest file")->required();
    p->add_option("--in", in_dir, "input audio root (<utt_id>.wav)")->required();
    p->add_option("--out", out_dir, "output root")->required();
    auto* phase_opt =
        p->add_option("--phase", phase_text,
                      "phase width n in radians (accepts pi/2, pi, 3pi/2, 2pi)");
    auto* snr_opt = p->add_option("--snr", snr_db, "magnitude perturbation SNR in dB");
    auto* none_opt = p->add_flag("--none", none, "identity pass-through");
    phase_opt->excludes(snr_opt)->excludes(none_opt);
    snr_opt->excludes(none_opt);
    p->add_option("--seed", seed, "global seed")->capture_default_str();
    p->add_option("--workers", workers, "worker threads")->capture_default_str();
    add_stft_flags(p, stft_flags);

    // score
    std::string scores_path, csv_path;
    auto* s = app.add_subcommand("score", "EER per condition plus pooled EER");
    s->add_option("scores", scores_path, "score file (utt cond score label)")
        ->required();
    s->add_option("--csv", csv_path, "also write a CSV summary");

    // bench
    std::string bench_out = "bench_out";
    std::string train_list =
        "none,phase:pi/2,phase:pi,phase:3pi/2,phase:2pi,"
        "mag:10,mag:5,mag:0,mag:-5,mag:-10";
    std::string eval_list = train_list;
    std::uint64_t bench_seed = 1;
    std::size_t bench_seeds = 3, corpus_per_class = 400, epochs = 60;
    double duration = 0.5;
    double phase_artifact = toybench::ToyCorpusConfig{}.spoof_phase_artifact;
    double mag_artifact = toybench::ToyCorpusConfig{}.spoof_magnitude_artifact_db;
    unsigned bench_workers = corpus::default_workers();
    bool no_plots = false;
    auto* b = app.add_subcommand("bench", "Run the synthetic benchmark grid");
    b->add_option("--out", bench_out, "output directory")->capture_default_str();
    b->add_option("--train", train_list, "train specs, comma separated")
        ->capture_default_str();
    b->add_option("--eval", eval_list, "eval specs, comma separated")
        ->capture_default_str();
    b->add_option("--seed", bench_seed, "base seed")->capture_default_str();
    b->add_option("--seeds", bench_seeds, "number of replicate seeds")
        ->capture_default_str();
    b->add_option("--corpus-size", corpus_per_class, "utterances per class")
        ->capture_default_str();
    b->add_option("--duration", duration, "utterance length, seconds")
        ->capture_default_str();
    b->add_option("--phase-artifact", phase_artifact,
                  "spoof group-delay artifact, radians")
        ->capture_default_str();
    b->add_option("--mag-artifact", mag_artifact, "spoof spectral tilt, dB")
        ->capture_default_str();
    b->add_option("--epochs", epochs, "training epochs")->capture_default_str();
    b->add_option("--workers", bench_workers, "worker threads")
        ->capture_default_str();
    b->add_flag("--no-plots", no_plots, "skip SVG plot output");

    auto* i = app.add_subcommand("info", "Print defaults, formats, exit codes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (p->parsed()) {
            return cmd_perturb(manifest, in_dir, out_dir, phase_text,
                               snr_opt->count() > 0, snr_db, none, seed,
                               workers, stft_flags);
        }
        if (s->parsed()) return cmd_score(scores_path, csv_path);
        if (b->parsed()) {
            return cmd_bench(bench_out, train_list, eval_list, bench_seed,
                             bench_seeds, corpus_per_class, duration,
                             phase_artifact, mag_artifact, epochs,
                             bench_workers, !no_plots);
        }
        if (i->parsed()) return cmd_info();
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}

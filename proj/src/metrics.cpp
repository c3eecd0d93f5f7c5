#include "phaselab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "phaselab/errors.hpp"

namespace phaselab::metrics {

Label parse_label(const std::string& text) {
    if (text == "bonafide") return Label::Bonafide;
    if (text == "spoof") return Label::Spoof;
    throw InvalidInput("unknown label: '" + text + "'");
}

std::string label_name(Label label) {
    return label == Label::Bonafide ? "bonafide" : "spoof";
}

namespace {

struct SplitScores {
    std::vector<double> bona; // sorted ascending
    std::vector<double> spoof;
};

SplitScores split_and_sort(const std::vector<TrialScore>& trials) {
    SplitScores s;
    for (const auto& t : trials) {
        if (!std::isfinite(t.score)) {
            throw InvalidInput("non-finite score for trial '" + t.utt_id + "'");
        }
        (t.label == Label::Bonafide ? s.bona : s.spoof).push_back(t.score);
    }
    if (s.bona.empty() || s.spoof.empty()) {
        throw InvalidInput("EER needs at least one bonafide and one spoof trial");
    }
    std::sort(s.bona.begin(), s.bona.end());
    std::sort(s.spoof.begin(), s.spoof.end());
    return s;
}

} // namespace

std::vector<DetPoint> det_points(const std::vector<TrialScore>& trials) {
    const SplitScores s = split_and_sort(trials);
    const double nb = static_cast<double>(s.bona.size());
    const double ns = static_cast<double>(s.spoof.size());

    std::vector<double> thresholds;
    thresholds.reserve(s.bona.size() + s.spoof.size());
    std::merge(s.bona.begin(), s.bona.end(), s.spoof.begin(), s.spoof.end(),
               std::back_inserter(thresholds));
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                     thresholds.end());

    std::vector<DetPoint> points;
    points.reserve(thresholds.size() + 1);
    for (double t : thresholds) {
        // spoof scores >= t accepted; bonafide scores < t rejected
        const auto spoof_ge =
            s.spoof.end() - std::lower_bound(s.spoof.begin(), s.spoof.end(), t);
        const auto bona_lt =
            std::lower_bound(s.bona.begin(), s.bona.end(), t) - s.bona.begin();
        points.push_back({t, static_cast<double>(spoof_ge) / ns,
                          static_cast<double>(bona_lt) / nb});
    }
    points.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
    return points;
}

EerResult compute_eer(const std::vector<TrialScore>& trials) {
    const auto points = det_points(trials);
    // far - frr is nonincreasing along the sweep, from +1 down to -1, so a
    // sign change always exists and brackets the crossing.
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = points[i].far - points[i].frr;
        if (d > 0.0) continue;
        if (d == 0.0) return {points[i].far, points[i].threshold};
        const auto& lo = points[i - 1]; // d > 0 here; i >= 1 since d(0) = 1
        const auto& hi = points[i];
        const double dlo = lo.far - lo.frr;
        const double dhi = hi.far - hi.frr;
        const double lambda = dlo / (dlo - dhi);
        const double eer = lo.far + lambda * (hi.far - lo.far);
        // Report the bracketing operating point nearest the crossing.
        const double threshold =
            (std::abs(dlo) <= std::abs(dhi)) ? lo.threshold : hi.threshold;
        return {eer, threshold};
    }
    throw InvalidInput("compute_eer: no FAR/FRR crossing found"); // unreachable
}

EerResult pooled_eer(const std::vector<TrialScore>& trials,
                     const std::set<std::string>& conditions) {
    std::vector<TrialScore> pool;
    for (const auto& t : trials) {
        if (conditions.count(t.condition)) pool.push_back(t);
    }
    if (pool.empty()) {
        throw InvalidInput("pooled_eer: no trials match the condition set");
    }
    return compute_eer(pool);
}

std::vector<TrialScore> read_score_file(std::istream& in) {
    std::vector<TrialScore> trials;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        TrialScore t;
        std::string score_text, label_text, extra;
        if (!(ss >> t.utt_id >> t.condition >> score_text >> label_text)) {
            throw ParseError(line_no, "expected 'utt_id condition score label'");
        }
        if (ss >> extra) {
            throw ParseError(line_no, "trailing field '" + extra + "'");
        }
        try {
            std::size_t pos = 0;
            t.score = std::stod(score_text, &pos);
            if (pos != score_text.size()) throw std::invalid_argument(score_text);
        } catch (const std::logic_error&) {
            throw ParseError(line_no, "bad score '" + score_text + "'");
        }
        if (!std::isfinite(t.score)) {
            throw ParseError(line_no, "non-finite score '" + score_text + "'");
        }
        try {
            t.label = parse_label(label_text);
        } catch (const InvalidInput&) {
            throw ParseError(line_no, "bad label '" + label_text +
                                          "' (want bonafide|spoof)");
        }
        trials.push_back(std::move(t));
    }
    return trials;
}

std::vector<TrialScore> read_score_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InvalidInput("cannot open score file: " + path);
    return read_score_file(f);
}

void write_score_file(std::ostream& out, const std::vector<TrialScore>& trials) {
    char buf[64];
    for (const auto& t : trials) {
        std::snprintf(buf, sizeof(buf), "%.17g", t.score);
        out << t.utt_id << ' ' << t.condition << ' ' << buf << ' '
            << label_name(t.label) << '\n';
    }
}

void write_score_file(const std::string& path,
                      const std::vector<TrialScore>& trials) {
    std::ofstream f(path);
    if (!f) throw InvalidInput("cannot open score file for write: " + path);
    write_score_file(f, trials);
}

} // namespace phaselab::metrics

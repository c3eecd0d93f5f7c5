// Independent reference implementations used only by tests. These stay
// deliberately naive (direct definitions, brute-force enumeration) and must
// not share code with the library paths they check.
#ifndef PHASELAB_TESTS_ORACLES_HPP
#define PHASELAB_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "phaselab/metrics.hpp"

namespace oracles {

// ---------------------------------------------------------------------------
// O(N^2) DFT by the definition: X[k] = sum_n x[n] e^{-2*pi*i*k*n/N}.
inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            const double a = -2.0 * std::numbers::pi * static_cast<double>(k) *
                             static_cast<double>(m) / static_cast<double>(n);
            acc += x[m] * std::complex<double>(std::cos(a), std::sin(a));
        }
        out[k] = acc;
    }
    return out;
}

// Reflected (mirror, no edge duplication) indexing, written from the padding
// definition rather than shared with the library.
inline double reflect_sample(const std::vector<double>& x, long long v) {
    const long long len = static_cast<long long>(x.size());
    if (len == 1) return x[0];
    while (v < 0 || v >= len) {
        if (v < 0) v = -v;
        if (v >= len) v = 2 * (len - 1) - v;
    }
    return x[static_cast<std::size_t>(v)];
}

// ---------------------------------------------------------------------------
// Exhaustive-threshold EER oracle. Enumerates candidate thresholds at every
// distinct score and just above it, computes FAR/FRR by direct counting, and
// linearly interpolates the FAR/FRR crossing between the two bracketing
// operating points.
struct OracleOperatingPoint {
    double far = 0.0, frr = 0.0;
};

inline std::vector<OracleOperatingPoint> oracle_points(
    const std::vector<phaselab::metrics::TrialScore>& trials) {
    using phaselab::metrics::Label;
    std::vector<double> bona, spoof, all;
    for (const auto& t : trials) {
        (t.label == Label::Bonafide ? bona : spoof).push_back(t.score);
        all.push_back(t.score);
    }
    if (bona.empty() || spoof.empty()) {
        throw std::runtime_error("oracle: both classes required");
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());

    // Candidate thresholds: each distinct score s and a value just above s.
    std::vector<double> candidates;
    for (double s : all) {
        candidates.push_back(s);
        candidates.push_back(std::nextafter(s, std::numeric_limits<double>::infinity()));
    }
    candidates.push_back(std::numeric_limits<double>::infinity());

    std::vector<OracleOperatingPoint> points;
    for (double t : candidates) {
        std::size_t false_accepts = 0, false_rejects = 0;
        for (double s : spoof) false_accepts += (s >= t);
        for (double s : bona) false_rejects += (s < t);
        OracleOperatingPoint p{
            static_cast<double>(false_accepts) / static_cast<double>(spoof.size()),
            static_cast<double>(false_rejects) / static_cast<double>(bona.size())};
        if (points.empty() || points.back().far != p.far ||
            points.back().frr != p.frr) {
            points.push_back(p);
        }
    }
    return points;
}

inline double oracle_eer(const std::vector<phaselab::metrics::TrialScore>& trials) {
    const auto points = oracle_points(trials);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = points[i].far - points[i].frr;
        if (d > 0.0) continue;
        if (d == 0.0) return points[i].far;
        const double dlo = points[i - 1].far - points[i - 1].frr;
        const double lambda = dlo / (dlo - d);
        return points[i - 1].far + lambda * (points[i].far - points[i - 1].far);
    }
    throw std::runtime_error("oracle: no crossing");
}

// ---------------------------------------------------------------------------
// One-sample Kolmogorov-Smirnov test against a uniform distribution on
// [lo, hi]. Returns true when the empirical CDF stays within the critical
// band at the given significance (0.01 supported).
inline bool ks_uniform_passes(std::vector<double> samples, double lo, double hi,
                              double significance = 0.01) {
    if (samples.empty() || hi <= lo) throw std::runtime_error("ks: bad inputs");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d_max = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double cdf = (samples[i] - lo) / (hi - lo);
        const double hi_step = static_cast<double>(i + 1) / n;
        const double lo_step = static_cast<double>(i) / n;
        d_max = std::max({d_max, std::abs(hi_step - cdf), std::abs(cdf - lo_step)});
    }
    if (significance != 0.01) throw std::runtime_error("ks: only alpha=0.01");
    // Stephens' approximation for the alpha=0.01 critical value.
    const double c = 1.628;
    const double critical = c / (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n));
    return d_max < critical;
}

} // namespace oracles

#endif

#include "phaselab/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace phaselab::dsp {

namespace {

std::vector<std::size_t> make_bit_reverse(std::size_t n) {
    std::vector<std::size_t> rev(n, 0);
    for (std::size_t i = 1; i < n; ++i) {
        rev[i] = (rev[i >> 1] >> 1) | ((i & 1) ? n >> 1 : 0);
    }
    return rev;
}

std::vector<std::complex<double>> make_twiddle(std::size_t n) {
    std::vector<std::complex<double>> tw(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        double a = -2.0 * std::numbers::pi * static_cast<double>(k) /
                   static_cast<double>(n);
        tw[k] = {std::cos(a), std::sin(a)};
    }
    return tw;
}

void radix2(std::vector<std::complex<double>>& data,
            const std::vector<std::size_t>& rev,
            const std::vector<std::complex<double>>& tw, bool invert) {
    const std::size_t n = data.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (i < rev[i]) std::swap(data[i], data[rev[i]]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t step = n / len;
        for (std::size_t start = 0; start < n; start += len) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                std::complex<double> w = tw[j * step];
                if (invert) w = std::conj(w);
                std::complex<double> u = data[start + j];
                std::complex<double> v = data[start + j + len / 2] * w;
                data[start + j] = u + v;
                data[start + j + len / 2] = u - v;
            }
        }
    }
    if (invert) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& x : data) x *= scale;
    }
}

} // namespace

Fft::Fft(std::size_t size) : n_(size) {
    if (!is_power_of_two(size)) {
        throw std::invalid_argument("Fft: size must be a power of two >= 2");
    }
    bit_reverse_ = make_bit_reverse(n_);
    twiddle_ = make_twiddle(n_);
    if (n_ >= 4) {
        half_bit_reverse_ = make_bit_reverse(n_ / 2);
        half_twiddle_ = make_twiddle(n_ / 2);
    }
}

void Fft::transform(std::vector<std::complex<double>>& data,
                    bool invert) const {
    if (data.size() != n_) {
        throw std::invalid_argument("Fft: buffer size mismatch");
    }
    radix2(data, bit_reverse_, twiddle_, invert);
}

void Fft::forward(std::vector<std::complex<double>>& data) const {
    transform(data, false);
}

void Fft::inverse(std::vector<std::complex<double>>& data) const {
    transform(data, true);
}

void Fft::forward_real(const std::vector<double>& input,
                       std::vector<std::complex<double>>& bins) const {
    if (input.size() != n_) {
        throw std::invalid_argument("Fft: buffer size mismatch");
    }
    const std::size_t half = n_ / 2;
    bins.resize(half + 1);
    if (n_ == 2) {
        bins[0] = {input[0] + input[1], 0.0};
        bins[1] = {input[0] - input[1], 0.0};
        return;
    }
    // Pack even/odd samples into a half-size complex transform, then split.
    std::vector<std::complex<double>> z(half);
    for (std::size_t m = 0; m < half; ++m) {
        z[m] = {input[2 * m], input[2 * m + 1]};
    }
    radix2(z, half_bit_reverse_, half_twiddle_, false);

    const std::complex<double> i_unit(0.0, 1.0);
    for (std::size_t k = 0; k <= half / 2; ++k) {
        const std::size_t kc = (half - k) % half;
        std::complex<double> zk = z[k];
        std::complex<double> zkc = std::conj(z[kc]);
        std::complex<double> even = 0.5 * (zk + zkc);
        std::complex<double> odd = -0.5 * i_unit * (zk - zkc);
        std::complex<double> w = twiddle_[k]; // e^{-2*pi*i*k/N}
        bins[k] = even + w * odd;
        if (k != 0 && k != half - k) {
            // Mirror entry inside the half-spectrum: X[half-k].
            std::complex<double> w2 = twiddle_[half - k];
            bins[half - k] = std::conj(even) + w2 * std::conj(odd);
        }
    }
    bins[half] = {z[0].real() - z[0].imag(), 0.0}; // Nyquist
    bins[0] = {z[0].real() + z[0].imag(), 0.0};    // DC
}

void Fft::inverse_real(const std::vector<std::complex<double>>& bins,
                       std::vector<double>& output) const {
    const std::size_t half = n_ / 2;
    if (bins.size() != half + 1) {
        throw std::invalid_argument("Fft: one-sided bin count mismatch");
    }
    output.resize(n_);
    if (n_ == 2) {
        double dc = bins[0].real(), ny = bins[1].real();
        output[0] = 0.5 * (dc + ny);
        output[1] = 0.5 * (dc - ny);
        return;
    }
    // Rebuild the packed half-size spectrum and invert it.
    std::vector<std::complex<double>> z(half);
    const std::complex<double> i_unit(0.0, 1.0);
    for (std::size_t k = 0; k < half; ++k) {
        std::complex<double> xk =
            (k == 0) ? std::complex<double>(bins[0].real(), 0.0) : bins[k];
        std::complex<double> xnk =
            (k == 0) ? std::complex<double>(bins[half].real(), 0.0)
                     : std::conj(bins[half - k]);
        std::complex<double> even = 0.5 * (xk + xnk);
        std::complex<double> odd = 0.5 * (xk - xnk);
        // Undo the split twiddle: w = e^{+2*pi*i*k/N}.
        std::complex<double> w = std::conj(twiddle_[k]);
        z[k] = even + i_unit * (w * odd);
    }
    radix2(z, half_bit_reverse_, half_twiddle_, true);
    for (std::size_t m = 0; m < half; ++m) {
        output[2 * m] = z[m].real();
        output[2 * m + 1] = z[m].imag();
    }
}

} // namespace phaselab::dsp

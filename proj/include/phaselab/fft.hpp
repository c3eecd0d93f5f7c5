#ifndef PHASELAB_FFT_HPP
#define PHASELAB_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace phaselab::dsp {

/// Radix-2 FFT for one transform size, with precomputed twiddle and
/// bit-reversal tables. Instances are cheap to build and self-contained, so
/// callers create their own instead of sharing global plans; that keeps every
/// transform bit-deterministic and safe to run from any number of threads.
class Fft {
public:
    /// size must be a power of two, >= 2.
    explicit Fft(std::size_t size);

    std::size_t size() const { return n_; }

    /// In-place complex DFT, no scaling.
    void forward(std::vector<std::complex<double>>& data) const;

    /// In-place complex inverse DFT, scaled by 1/N.
    void inverse(std::vector<std::complex<double>>& data) const;

    /// Real-input DFT: n_ real samples -> n_/2 + 1 one-sided bins.
    void forward_real(const std::vector<double>& input,
                      std::vector<std::complex<double>>& bins) const;

    /// One-sided bins -> n_ real samples. Imaginary parts of the DC and
    /// Nyquist bins are ignored (Hermitian projection onto real signals).
    void inverse_real(const std::vector<std::complex<double>>& bins,
                      std::vector<double>& output) const;

    static bool is_power_of_two(std::size_t n) {
        return n >= 2 && (n & (n - 1)) == 0;
    }

private:
    void transform(std::vector<std::complex<double>>& data, bool invert) const;

    std::size_t n_;
    std::vector<std::size_t> bit_reverse_;
    std::vector<std::complex<double>> twiddle_;     // e^{-2*pi*i*k/N}, k < N/2
    // Half-size tables for the packed real transform.
    std::vector<std::size_t> half_bit_reverse_;
    std::vector<std::complex<double>> half_twiddle_;
};

} // namespace phaselab::dsp

#endif

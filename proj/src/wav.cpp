#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "phaselab/corpus.hpp"
#include "phaselab/errors.hpp"

namespace phaselab::corpus {

namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;

struct FmtChunk {
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits_per_sample = 0;
};

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (p[1] << 8) | (p[2] << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InvalidInput("cannot open audio file: " + path.string());
    f.seekg(0, std::ios::end);
    const auto size = f.tellg();
    f.seekg(0);
    std::vector<unsigned char> data(static_cast<std::size_t>(size));
    if (size > 0) f.read(reinterpret_cast<char*>(data.data()), size);
    if (!f) throw CorruptFile("short read: " + path.string());
    return data;
}

void append_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xFF));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
    out.push_back(static_cast<unsigned char>((v >> 16) & 0xFF));
    out.push_back(static_cast<unsigned char>((v >> 24) & 0xFF));
}

void append_u16(std::vector<unsigned char>& out, std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xFF));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
}

void append_tag(std::vector<unsigned char>& out, const char* tag) {
    out.insert(out.end(), tag, tag + 4);
}

} // namespace

dsp::Waveform read_audio(const std::filesystem::path& path, WavEncoding& encoding) {
    const auto data = read_file(path);
    if (data.size() < 12 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
        std::memcmp(data.data() + 8, "WAVE", 4) != 0) {
        throw CorruptFile("not a RIFF/WAVE file: " + path.string());
    }

    FmtChunk fmt;
    bool have_fmt = false;
    const unsigned char* pcm_data = nullptr;
    std::size_t pcm_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= data.size()) {
        const char* tag = reinterpret_cast<const char*>(data.data() + pos);
        const std::uint32_t chunk_size = read_u32(data.data() + pos + 4);
        const std::size_t body = pos + 8;
        if (body + chunk_size > data.size()) {
            throw CorruptFile("truncated chunk '" + std::string(tag, 4) +
                              "': " + path.string());
        }
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            if (chunk_size < 16) throw CorruptFile("fmt chunk too small: " + path.string());
            fmt.format = read_u16(data.data() + body);
            fmt.channels = read_u16(data.data() + body + 2);
            fmt.sample_rate = read_u32(data.data() + body + 4);
            fmt.bits_per_sample = read_u16(data.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            pcm_data = data.data() + body;
            pcm_size = chunk_size;
        }
        pos = body + chunk_size + (chunk_size & 1); // chunks are word-aligned
    }

    if (!have_fmt || pcm_data == nullptr) {
        throw CorruptFile("missing fmt or data chunk: " + path.string());
    }
    if (fmt.channels != 1) {
        throw UnsupportedFormat("only mono supported, got " +
                                std::to_string(fmt.channels) + " channels: " +
                                path.string());
    }
    if (fmt.sample_rate == 0) throw CorruptFile("zero sample rate: " + path.string());

    dsp::Waveform wave;
    wave.sample_rate = static_cast<int>(fmt.sample_rate);
    if (fmt.format == kFormatPcm && fmt.bits_per_sample == 16) {
        encoding = WavEncoding::Pcm16;
        if (pcm_size % 2 != 0) throw CorruptFile("odd PCM16 data size: " + path.string());
        const std::size_t n = pcm_size / 2;
        wave.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto u = read_u16(pcm_data + 2 * i);
            wave.samples[i] = static_cast<std::int16_t>(u) / 32768.0;
        }
    } else if (fmt.format == kFormatFloat && fmt.bits_per_sample == 32) {
        encoding = WavEncoding::Float32;
        if (pcm_size % 4 != 0) throw CorruptFile("odd float32 data size: " + path.string());
        const std::size_t n = pcm_size / 4;
        wave.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t u = read_u32(pcm_data + 4 * i);
            float f;
            std::memcpy(&f, &u, 4);
            if (!std::isfinite(f)) {
                throw CorruptFile("non-finite sample: " + path.string());
            }
            wave.samples[i] = static_cast<double>(f);
        }
    } else {
        throw UnsupportedFormat("only 16-bit PCM or 32-bit float supported: " +
                                path.string());
    }
    return wave;
}

dsp::Waveform read_audio(const std::filesystem::path& path) {
    WavEncoding enc;
    return read_audio(path, enc);
}

void write_audio(const std::filesystem::path& path, const dsp::Waveform& wave,
                 WavEncoding encoding) {
    const std::size_t n = wave.samples.size();
    const bool is_float = encoding == WavEncoding::Float32;
    const std::uint32_t bytes_per_sample = is_float ? 4 : 2;
    const std::uint32_t data_size = static_cast<std::uint32_t>(n * bytes_per_sample);

    std::vector<unsigned char> out;
    out.reserve(64 + data_size);
    append_tag(out, "RIFF");
    append_u32(out, 0); // patched below
    append_tag(out, "WAVE");

    append_tag(out, "fmt ");
    append_u32(out, 16);
    append_u16(out, is_float ? kFormatFloat : kFormatPcm);
    append_u16(out, 1); // mono
    append_u32(out, static_cast<std::uint32_t>(wave.sample_rate));
    append_u32(out, static_cast<std::uint32_t>(wave.sample_rate) * bytes_per_sample);
    append_u16(out, static_cast<std::uint16_t>(bytes_per_sample));
    append_u16(out, static_cast<std::uint16_t>(8 * bytes_per_sample));

    if (is_float) {
        append_tag(out, "fact");
        append_u32(out, 4);
        append_u32(out, static_cast<std::uint32_t>(n));
    }

    append_tag(out, "data");
    append_u32(out, data_size);
    if (is_float) {
        for (double s : wave.samples) {
            const float f = static_cast<float>(s);
            std::uint32_t u;
            std::memcpy(&u, &f, 4);
            append_u32(out, u);
        }
    } else {
        for (double s : wave.samples) {
            double q = std::nearbyint(s * 32768.0);
            q = std::min(32767.0, std::max(-32768.0, q));
            append_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
        }
    }

    const std::uint32_t riff_size = static_cast<std::uint32_t>(out.size() - 8);
    out[4] = static_cast<unsigned char>(riff_size & 0xFF);
    out[5] = static_cast<unsigned char>((riff_size >> 8) & 0xFF);
    out[6] = static_cast<unsigned char>((riff_size >> 16) & 0xFF);
    out[7] = static_cast<unsigned char>((riff_size >> 24) & 0xFF);

    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidInput("cannot open for write: " + path.string());
    f.write(reinterpret_cast<const char*>(out.data()),
            static_cast<std::streamsize>(out.size()));
    if (!f) throw InvalidInput("short write: " + path.string());
}

} // namespace phaselab::corpus

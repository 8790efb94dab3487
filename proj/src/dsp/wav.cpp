//
//  wav.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/dsp/wav.hpp>
#include <classroom/errors.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace classroom::dsp {

namespace {

static_assert(std::endian::native == std::endian::little, "WAV codec assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

std::uint16_t get_u16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

struct Header {
    WavInfo info;
    std::uint16_t bitsPerSample = 0;
    std::size_t dataOffset = 0;
};

Header parse_header(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw IoError("not a RIFF/WAVE stream");
    }
    Header h;
    bool haveFmt = false;
    std::uint16_t formatTag = 0;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint8_t* chunk = bytes.data() + pos;
        const std::uint32_t size = get_u32(chunk + 4);
        const std::size_t body = pos + 8;
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (size < 16 || body + size > bytes.size()) throw IoError("truncated fmt chunk");
            formatTag = get_u16(bytes.data() + body);
            h.info.channels = get_u16(bytes.data() + body + 2);
            h.info.rate = get_u32(bytes.data() + body + 4);
            h.bitsPerSample = get_u16(bytes.data() + body + 14);
            if (formatTag == kFormatExtensible) {
                if (size < 40) throw IoError("truncated extensible fmt chunk");
                formatTag = get_u16(bytes.data() + body + 24); // first two bytes of the subformat GUID
            }
            haveFmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            if (!haveFmt) throw IoError("data chunk before fmt chunk");
            h.dataOffset = body;
            const std::size_t available = std::min<std::size_t>(size, bytes.size() - body);
            const std::size_t frameBytes = static_cast<std::size_t>(h.info.channels) * (h.bitsPerSample / 8);
            if (frameBytes == 0) throw IoError("zero-sized sample frame");
            h.info.frames = available / frameBytes;
            break;
        }
        pos = body + size + (size & 1U);
    }
    if (!haveFmt || h.dataOffset == 0) throw IoError("missing fmt or data chunk");
    if (formatTag == kFormatPcm && h.bitsPerSample == 16) {
        h.info.format = SampleFormat::Pcm16;
    } else if (formatTag == kFormatFloat && h.bitsPerSample == 32) {
        h.info.format = SampleFormat::Float32;
    } else {
        throw IoError("unsupported WAV encoding (format " + std::to_string(formatTag) + ", " +
                      std::to_string(h.bitsPerSample) + " bits)");
    }
    if (h.info.channels < 1 || !(h.info.rate > 0)) throw IoError("invalid channel count or rate");
    return h;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

std::vector<std::uint8_t> encode_wav(const std::vector<AudioBuffer>& channels, SampleFormat format) {
    if (channels.empty()) throw InvalidInput("write_wav needs at least one channel");
    const std::size_t frames = channels.front().size();
    const double rate = channels.front().rate();
    for (const auto& c : channels) {
        if (c.size() != frames || c.rate() != rate) throw InvalidInput("write_wav channels differ in length or rate");
    }
    const auto numChannels = static_cast<std::uint16_t>(channels.size());
    const std::uint16_t bits = format == SampleFormat::Pcm16 ? 16 : 32;
    const std::uint32_t blockAlign = numChannels * bits / 8;
    const auto dataBytes = static_cast<std::uint32_t>(frames * blockAlign);
    const auto sampleRate = static_cast<std::uint32_t>(std::lround(rate));

    std::vector<std::uint8_t> out;
    out.reserve(44 + dataBytes);
    put_tag(out, "RIFF");
    put_u32(out, 36 + dataBytes);
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, 16);
    put_u16(out, format == SampleFormat::Pcm16 ? kFormatPcm : kFormatFloat);
    put_u16(out, numChannels);
    put_u32(out, sampleRate);
    put_u32(out, sampleRate * blockAlign);
    put_u16(out, static_cast<std::uint16_t>(blockAlign));
    put_u16(out, bits);
    put_tag(out, "data");
    put_u32(out, dataBytes);
    for (std::size_t i = 0; i < frames; ++i) {
        for (const auto& c : channels) {
            if (format == SampleFormat::Pcm16) {
                const long q = std::clamp(std::lround(c[i] * 32768.0), -32768L, 32767L);
                put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
            } else {
                put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(c[i])));
            }
        }
    }
    return out;
}

std::vector<AudioBuffer> decode_wav(const std::vector<std::uint8_t>& bytes) {
    const Header h = parse_header(bytes);
    std::vector<AudioBuffer> channels;
    channels.reserve(static_cast<std::size_t>(h.info.channels));
    for (int c = 0; c < h.info.channels; ++c) channels.emplace_back(h.info.rate, h.info.frames);
    const std::size_t width = h.bitsPerSample / 8;
    const std::uint8_t* p = bytes.data() + h.dataOffset;
    for (std::size_t i = 0; i < h.info.frames; ++i) {
        for (int c = 0; c < h.info.channels; ++c, p += width) {
            double v = 0.0;
            if (h.info.format == SampleFormat::Pcm16) {
                v = static_cast<std::int16_t>(get_u16(p)) / 32768.0;
            } else {
                v = std::bit_cast<float>(get_u32(p));
            }
            channels[static_cast<std::size_t>(c)][i] = v;
        }
    }
    for (const auto& c : channels) c.check_finite();
    return channels;
}

std::vector<AudioBuffer> read_wav(const std::filesystem::path& path) {
    try {
        return decode_wav(read_file(path));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

WavInfo read_wav_info(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    // Headers are small; read enough to reach the data chunk in ordinary files.
    std::vector<std::uint8_t> head(4096);
    in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
    head.resize(static_cast<std::size_t>(in.gcount()));
    in.clear();
    in.seekg(0, std::ios::end);
    const auto fileSize = static_cast<std::size_t>(in.tellg());
    try {
        Header h = parse_header(head);
        const std::size_t frameBytes = static_cast<std::size_t>(h.info.channels) * (h.bitsPerSample / 8);
        const std::uint32_t declared = get_u32(head.data() + h.dataOffset - 4);
        h.info.frames = std::min<std::size_t>(declared, fileSize - h.dataOffset) / frameBytes;
        return h.info;
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_wav(const std::filesystem::path& path, const std::vector<AudioBuffer>& channels, SampleFormat format) {
    const auto bytes = encode_wav(channels, format);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path.string());
}

void write_wav(const std::filesystem::path& path, const BinauralBuffer& stereo, SampleFormat format) {
    write_wav(path, std::vector<AudioBuffer>{stereo.left(), stereo.right()}, format);
}

BinauralBuffer read_binaural_wav(const std::filesystem::path& path) {
    auto channels = read_wav(path);
    if (channels.size() != 2) {
        throw IoError(path.string() + ": expected 2 channels, found " + std::to_string(channels.size()));
    }
    return {std::move(channels[0]), std::move(channels[1])};
}

} // namespace classroom::dsp

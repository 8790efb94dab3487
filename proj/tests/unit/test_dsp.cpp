#include <classroom/dsp/audio_buffer.hpp>
#include <classroom/dsp/rng.hpp>
#include <classroom/dsp/signal.hpp>
#include <classroom/dsp/stft.hpp>
#include <classroom/dsp/wav.hpp>
#include <classroom/errors.hpp>

#include <doctest.h>
#include "../support/oracles.hpp"

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>

using namespace classroom;
using namespace classroom::dsp;

namespace {

using oracle::direct_convolution;

AudioBuffer noise(Rng& rng, std::size_t n, double rate = kCorpusRate) {
    AudioBuffer b(rate, n);
    for (std::size_t i = 0; i < n; ++i) b[i] = rng.normal();
    return b;
}

AudioBuffer impulse(std::size_t length, std::size_t at) {
    AudioBuffer b(kCorpusRate, length);
    b[at] = 1.0;
    return b;
}

// Amplitude of a sinusoid at `freq` from a single-bin DFT over whole periods.
double dft_amplitude(const AudioBuffer& x, double freq, std::size_t begin, std::size_t count) {
    std::complex<double> acc{};
    for (std::size_t n = 0; n < count; ++n) {
        const double ph = -2.0 * std::numbers::pi * freq * static_cast<double>(n) / x.rate();
        acc += x[begin + n] * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    return 2.0 * std::abs(acc) / static_cast<double>(count);
}

} // namespace

TEST_CASE("fft_convolve: identity, length law and shift composition") {
    Rng rng(7);
    const auto x = noise(rng, 100);
    const auto y = fft_convolve(x, impulse(46, 0));
    CHECK(y.size() == 145);
    for (std::size_t i = 0; i < 100; ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-12));
    for (std::size_t i = 100; i < 145; ++i) CHECK(std::abs(y[i]) < 1e-12);

    const auto shifted = fft_convolve(impulse(10, 3), impulse(10, 5));
    for (std::size_t i = 0; i < shifted.size(); ++i) CHECK(shifted[i] == doctest::Approx(i == 8 ? 1.0 : 0.0));
}

TEST_CASE("fft_convolve matches direct summation on random sizes") {
    Rng rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        const auto n = static_cast<std::size_t>(rng.integer(1, 4000));
        const auto m = static_cast<std::size_t>(rng.integer(1, std::max<std::int64_t>(1, 1000000 / static_cast<std::int64_t>(n))));
        const auto x = noise(rng, n);
        const auto h = noise(rng, std::min<std::size_t>(m, 3000));
        const auto fast = fft_convolve(x, h);
        const auto slow = direct_convolution(x.vector(), h.vector());
        REQUIRE(fast.size() == slow.size());
        double peak = 0.0, err = 0.0;
        for (std::size_t i = 0; i < slow.size(); ++i) {
            peak = std::max(peak, std::abs(slow[i]));
            err = std::max(err, std::abs(slow[i] - fast[i]));
        }
        CHECK(err / peak < 1e-9);
    }
}

TEST_CASE("fft_convolve rejects mismatched rates and empty input") {
    CHECK_THROWS_AS(fft_convolve(AudioBuffer(16000, 4), AudioBuffer(48000, 4)), InvalidInput);
    CHECK_THROWS_AS(fft_convolve(AudioBuffer(16000, 0), AudioBuffer(16000, 4)), InvalidInput);
}

TEST_CASE("resample length law, identity and sine amplitude") {
    const AudioBuffer x48(48000, 4800);
    CHECK(resample(x48, 16000).size() == 1600);

    Rng rng(3);
    const auto x = noise(rng, 500);
    CHECK(resample(x, kCorpusRate) == x);

    AudioBuffer sine(48000, 48000);
    for (std::size_t n = 0; n < sine.size(); ++n) sine[n] = std::sin(2.0 * std::numbers::pi * 1000.0 * n / 48000.0);
    const auto down = resample(sine, 16000);
    REQUIRE(down.size() == 16000);
    // 1 kHz has whole periods every 16 samples at 16 kHz; skip kernel edges.
    const double amp = dft_amplitude(down, 1000.0, 800, 14400);
    CHECK(amp == doctest::Approx(1.0).epsilon(0.01));
    // Phase is preserved: a 1 kHz sine sampled at 16 kHz directly.
    for (std::size_t n = 1000; n < 1100; ++n) {
        CHECK(down[n] == doctest::Approx(std::sin(2.0 * std::numbers::pi * 1000.0 * n / 16000.0)).epsilon(0.01).scale(1.0));
    }
}

TEST_CASE("crossfade_concat") {
    SUBCASE("constant segments stay constant through the fade") {
        std::vector<AudioBuffer> segs{AudioBuffer(16000, std::vector<double>(200, 1.0)),
                                      AudioBuffer(16000, std::vector<double>(300, 1.0))};
        const auto y = crossfade_concat(segs, 80);
        CHECK(y.size() == 420);
        for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("single segment is returned unchanged") {
        Rng rng(5);
        std::vector<AudioBuffer> segs{noise(rng, 50)};
        CHECK(crossfade_concat(segs, 10) == segs[0]);
    }
    SUBCASE("gains are complementary at every overlap sample") {
        for (std::size_t overlap : {1u, 2u, 7u, 80u, 333u}) {
            for (std::size_t i = 0; i < overlap; ++i) {
                const double g = crossfade_gain(i, overlap);
                CHECK(g + (1.0 - g) == 1.0);
                CHECK(g > 0.0);
                CHECK(g < 1.0);
            }
        }
    }
    SUBCASE("segment shorter than the overlap is rejected") {
        std::vector<AudioBuffer> segs{AudioBuffer(16000, 100), AudioBuffer(16000, 40)};
        CHECK_THROWS_AS(crossfade_concat(segs, 80), InvalidInput);
    }
}

TEST_CASE("Rng streams are reproducible and order-insensitive") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

    const Rng root(99);
    Rng s1 = root.stream("room/17/trajectory/0");
    std::vector<std::uint64_t> first;
    for (int i = 0; i < 16; ++i) first.push_back(s1.next_u64());
    Rng other = root.stream("room/3");
    for (int i = 0; i < 100; ++i) other.next_u64();
    Rng s2 = root.stream("room/17/trajectory/0");
    for (int i = 0; i < 16; ++i) CHECK(s2.next_u64() == first[static_cast<std::size_t>(i)]);
    CHECK(root.stream("x", 1).next_u64() != root.stream("x", 2).next_u64());

    Rng u(1);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double v = u.uniform();
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        const auto k = u.integer(-3, 3);
        CHECK(k >= -3);
        CHECK(k <= 3);
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
}

TEST_CASE("stft frame and bin counts") {
    const AudioBuffer x(16000, 100);
    const auto s = stft(x, 16, 8);
    CHECK(s.bins == 9);
    CHECK(s.frames == 11);
    CHECK(frame_count(38400, 16, 8) == 4799);
    CHECK(frame_count(10, 16, 8) == 0);
    CHECK_THROWS_AS(stft(x, 16, 17), InvalidInput);
}

TEST_CASE("wav encode/decode preserves float samples and quantises pcm16") {
    Rng rng(9);
    AudioBuffer l(16000, 64), r(16000, 64);
    for (std::size_t i = 0; i < 64; ++i) {
        l[i] = rng.uniform(-0.9, 0.9);
        r[i] = rng.uniform(-0.9, 0.9);
    }
    const auto f = decode_wav(encode_wav({l, r}, SampleFormat::Float32));
    REQUIRE(f.size() == 2);
    CHECK(f[0].rate() == 16000);
    for (std::size_t i = 0; i < 64; ++i) CHECK(f[1][i] == static_cast<double>(static_cast<float>(r[i])));

    const auto p = decode_wav(encode_wav({l}, SampleFormat::Pcm16));
    REQUIRE(p.size() == 1);
    for (std::size_t i = 0; i < 64; ++i) CHECK(std::abs(p[0][i] - l[i]) < 1.0 / 32767.0);

    const auto path = std::filesystem::temp_directory_path() / "classroom_test_seven.wav";
    std::vector<AudioBuffer> seven(7, l);
    write_wav(path, seven);
    const auto info = read_wav_info(path);
    CHECK(info.channels == 7);
    CHECK(info.frames == 64);
    CHECK(read_wav(path).size() == 7);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(decode_wav({1, 2, 3}), IoError);
}

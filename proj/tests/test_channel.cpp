#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mirage/channel.hpp"
#include "mirage/crc32.hpp"
#include "mirage/rng.hpp"

using namespace mirage;
using namespace mirage::channel;

namespace {

Bitstream random_bits(size_t n, uint64_t seed) {
    std::mt19937_64 eng(seed);
    Bitstream b;
    for (size_t i = 0; i < n; ++i) b.push_back(eng() & 1u);
    return b;
}

ChannelConfig cfg_of(double snr_db, double bw, double t0 = 0.0) {
    ChannelConfig c;
    c.snr_db = snr_db;
    c.bandwidth_hz = bw;
    c.fixed_overhead_s = t0;
    return c;
}

}  // namespace

TEST_CASE("crc32 matches the standard check value") {
    const char* s = "123456789";
    CHECK(crc32(reinterpret_cast<const uint8_t*>(s), 9) == 0xCBF43926u);
}

TEST_CASE("erfc reference values") {
    // Oracle values computed with a 50-digit series evaluation ahead of the build.
    CHECK(channel::erfc(0.0) == 1.0);
    CHECK(std::abs(channel::erfc(1.0) - 0.15729920705028513) < 1e-12);
    CHECK(std::abs(channel::erfc(0.5) - 0.47950012218695348) < 1e-12);
    CHECK(std::abs(channel::erfc(2.0) - 0.0046777349810472662) < 1e-12);
    CHECK(std::abs(channel::erfc(4.0) - 1.541725790028002e-08) < 1e-18);
    CHECK(channel::erfc(6.0) <= 1e-16);  // tail bound exp(-36)
    CHECK(channel::erfc(6.0) > 0.0);
    CHECK(std::abs(channel::erfc(-1.0) - 1.8427007929497148) < 1e-12);
    CHECK(std::abs(channel::erfc(-6.0) - 2.0) < 1e-15);
}

TEST_CASE("erfc grid accuracy <= 1e-10") {
    static const double grid[][2] = {
#include "erfc_grid.inc"
    };
    double worst = 0.0;
    for (const auto& p : grid) worst = std::max(worst, std::abs(channel::erfc(p[0]) - p[1]));
    CHECK(worst <= 1e-10);
}

TEST_CASE("link_budget at 0 dB, 1 MHz") {
    const LinkBudget lb = link_budget(cfg_of(0.0, 1e6));
    CHECK(lb.snr_linear == doctest::Approx(1.0));
    CHECK(lb.throughput_bps == doctest::Approx(1e6));
    CHECK(lb.spectral_efficiency == doctest::Approx(1.0));
    CHECK(lb.eb_n0 == doctest::Approx(1.0));
    CHECK(std::abs(lb.ber - 0.078649603525142567) < 1e-11);
}

TEST_CASE("link_budget at -10 dB, 20 MHz") {
    const LinkBudget lb = link_budget(cfg_of(-10.0, 20e6));
    CHECK(std::abs(lb.spectral_efficiency - 0.13750352374993491) < 1e-12);
    CHECK(lb.throughput_bps == doctest::Approx(2750070.4749986983).epsilon(1e-12));
    CHECK(std::abs(lb.ber - 0.11390297613655991) < 1e-11);
}

TEST_CASE("link_budget at +10 dB, 1 MHz") {
    const LinkBudget lb = link_budget(cfg_of(10.0, 1e6));
    CHECK(std::abs(lb.spectral_efficiency - 3.4594316186372973) < 1e-12);
    CHECK(std::abs(lb.ber - 0.0080987945567028985) < 1e-11);
}

TEST_CASE("link_budget rejects degenerate and invalid configs") {
    CHECK_THROWS_AS(link_budget(cfg_of(-10000.0, 1e6)), DegenerateChannelError);
    CHECK_THROWS_AS(link_budget(cfg_of(0.0, 0.0)), ConfigError);
    CHECK_THROWS_AS(link_budget(cfg_of(std::nan(""), 1e6)), ConfigError);
    ChannelConfig bad = cfg_of(0.0, 1e6);
    bad.fixed_overhead_s = -1.0;
    CHECK_THROWS_AS(link_budget(bad), ConfigError);
}

TEST_CASE("ber is non-increasing in snr_db on [-20, 20]") {
    double prev = 1.0;
    for (double s = -20.0; s <= 20.0; s += 0.5) {
        const double b = link_budget(cfg_of(s, 1e6)).ber;
        CHECK(b <= prev + 1e-15);
        prev = b;
    }
}

TEST_CASE("transmit_bits endpoints") {
    const Bitstream in = random_bits(4096, 7);
    CHECK(transmit_bits(in, 0.0, 1) == in);
    const Bitstream flipped = transmit_bits(in, 1.0, 1);
    CHECK(hamming_distance(in, flipped) == in.size());
}

TEST_CASE("transmit_bits is deterministic per seed") {
    const Bitstream in = random_bits(2048, 3);
    CHECK(transmit_bits(in, 0.3, 42) == transmit_bits(in, 0.3, 42));
    CHECK(transmit_bits(in, 0.3, 42) != transmit_bits(in, 0.3, 43));
}

TEST_CASE("transmit_bits flip count concentrates at ber") {
    const Bitstream zeros(1000000);
    for (double ber : {0.001, 0.01, 0.1}) {
        const Bitstream out = transmit_bits(zeros, ber, 99);
        const double flips = static_cast<double>(hamming_distance(zeros, out));
        const double mean = 1e6 * ber;
        const double sigma = std::sqrt(1e6 * ber * (1.0 - ber));
        CHECK(std::abs(flips - mean) <= 3.0 * sigma);
    }
}

TEST_CASE("block_error_rate") {
    CHECK(block_error_rate(0.0, 12345) == 0.0);
    CHECK(block_error_rate(1.0, 3) == 1.0);
    CHECK(std::abs(block_error_rate(1e-3, 1000) - 0.63230457522903594) < 1e-12);
    // monotone in both arguments
    double prev = 0.0;
    for (double ber = 0.0; ber <= 1.0; ber += 0.05) {
        const double v = block_error_rate(ber, 64);
        CHECK(v >= prev - 1e-15);
        prev = v;
    }
    prev = 0.0;
    for (uint64_t n = 1; n < 4096; n *= 2) {
        const double v = block_error_rate(1e-3, n);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("arq_transmit delivers exactly on a clean channel") {
    const LinkBudget lb = link_budget(cfg_of(200.0, 1e6));  // ber ~ 0
    ReliabilityConfig rel;
    const Bitstream payload = random_bits(777, 5);
    const ArqResult r = arq_transmit(payload, lb, rel, 11);
    CHECK(r.success);
    CHECK(r.attempts == 1);
    CHECK(r.delivered == payload);
}

TEST_CASE("arq_transmit mean attempts matches the geometric oracle") {
    // 1000-bit payload at ber = 1e-3. With the 32 CRC bits the block spans
    // 1032 bits, so E[attempts] = 1/(1-BLER(1032)) = 2.8081231562304336.
    LinkBudget lb;
    lb.ber = 1e-3;
    lb.throughput_bps = 1e6;
    ReliabilityConfig rel;
    const Bitstream payload = random_bits(1000, 21);
    const int trials = 600;
    double total = 0.0;
    for (int t = 0; t < trials; ++t)
        total += arq_transmit(payload, lb, rel, derive_seed(1234, "trial", t)).attempts;
    const double mean = total / trials;
    const double expect = 2.8081231562304336;
    const double sigma_mean = std::sqrt((1.0 - 1.0 / expect)) * expect / std::sqrt(trials);
    CHECK(std::abs(mean - expect) <= 3.0 * sigma_mean);
}

TEST_CASE("arq_transmit exhausts at ber 0.5 with one attempt") {
    LinkBudget lb;
    lb.ber = 0.5;
    ReliabilityConfig rel;
    rel.max_attempts = 1;
    CHECK_THROWS_AS(arq_transmit(random_bits(256, 9), lb, rel, 77), ReliabilityExhaustedError);
}

TEST_CASE("arq_transmit property: success implies bit-exact delivery") {
    std::mt19937_64 eng(2024);
    int successes = 0;
    for (int i = 0; i < 60; ++i) {
        const size_t n = 32 + eng() % 225;
        const double u = uniform01(eng);
        const double ber = u * u * u * 0.2;  // biased low so a good share succeed
        LinkBudget lb;
        lb.ber = ber;
        ReliabilityConfig rel;
        rel.max_attempts = 200;
        const Bitstream payload = random_bits(n, eng());
        try {
            const ArqResult r = arq_transmit(payload, lb, rel, eng());
            CHECK(r.success);
            CHECK(r.delivered == payload);
            ++successes;
        } catch (const ReliabilityExhaustedError&) {
            // heavy-noise draws may legitimately run out of attempts
        }
    }
    CHECK(successes >= 25);
}

TEST_CASE("arq_transmit rejects unattainable epsilon") {
    LinkBudget lb;
    lb.ber = 0.1;
    ReliabilityConfig rel;
    rel.epsilon = 1e-13;  // below the CRC-32 undetected-error floor at this BLER
    CHECK_THROWS_AS(arq_transmit(random_bits(512, 1), lb, rel, 1), ConfigError);
}

TEST_CASE("transmission_latency") {
    const ChannelConfig cfg = cfg_of(0.0, 1e6);
    const LinkBudget lb = link_budget(cfg);
    CHECK(transmission_latency(1000000, 1, lb, cfg) == doctest::Approx(1.0));
    CHECK(transmission_latency(0, 1, lb, cfg) == 0.0);

    const ChannelConfig with_t0 = cfg_of(0.0, 1e6, 0.25);
    CHECK(transmission_latency(0, 1, lb, with_t0) == doctest::Approx(0.25));

    const ChannelConfig low = cfg_of(-10.0, 20e6);
    const LinkBudget lb_low = link_budget(low);
    CHECK(transmission_latency(2048, 1, lb_low, low) ==
          doctest::Approx(7.4470818788779207e-4).epsilon(1e-12));

    CHECK_THROWS_AS(transmission_latency(10, 0, lb, cfg), ConfigError);
    LinkBudget dead;
    CHECK_THROWS_AS(transmission_latency(10, 1, dead, cfg), DegenerateChannelError);
}

TEST_CASE("transmission_latency is additive in payload size") {
    const ChannelConfig cfg = cfg_of(3.0, 5e6, 0.01);
    const LinkBudget lb = link_budget(cfg);
    std::mt19937_64 eng(5);
    for (int i = 0; i < 20; ++i) {
        const uint64_t a = eng() % 100000, b = eng() % 100000;
        const double lhs = transmission_latency(a + b, 1, lb, cfg);
        const double rhs = transmission_latency(a, 1, lb, cfg) +
                           transmission_latency(b, 1, lb, cfg) - cfg.fixed_overhead_s;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("reliable_transmit segments and reassembles") {
    LinkBudget lb;
    lb.ber = 0.01;
    ReliabilityConfig rel;
    const Bitstream payload = random_bits(5000, 13);
    const ReliableResult r = reliable_transmit(payload, lb, rel, 3);
    CHECK(r.delivered == payload);
    CHECK(r.blocks > 1);
    CHECK(r.total_attempts >= r.blocks);
    CHECK(r.transmitted_bits >= payload.size() + 32 * r.blocks);
}

TEST_CASE("reliable_transmit single block on a clean channel") {
    LinkBudget lb;
    lb.ber = 0.0;
    ReliabilityConfig rel;
    const Bitstream payload = random_bits(5000, 13);
    const ReliableResult r = reliable_transmit(payload, lb, rel, 3);
    CHECK(r.blocks == 1);
    CHECK(r.total_attempts == 1);
    CHECK(r.delivered == payload);
}

TEST_CASE("choose_block_bits shrinks with BER") {
    CHECK(choose_block_bits(0.1) <= choose_block_bits(0.01));
    CHECK(choose_block_bits(0.01) <= choose_block_bits(0.001));
    CHECK(choose_block_bits(0.1) >= 8);
}

TEST_CASE("derive_seed separates named substreams") {
    CHECK(derive_seed(1, "channel") != derive_seed(1, "training"));
    CHECK(derive_seed(1, "channel", 0) != derive_seed(1, "channel", 1));
    CHECK(derive_seed(1, "channel", 5) == derive_seed(1, "channel", 5));
}

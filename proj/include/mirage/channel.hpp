#pragma once

#include <cstdint>

#include "mirage/bitio.hpp"
#include "mirage/errors.hpp"

namespace mirage::channel {

struct ChannelConfig {
    double snr_db = 0.0;
    double bandwidth_hz = 1e6;
    double fixed_overhead_s = 0.0;  // per-transmission protocol setup time t0
    uint64_t seed = 0;

    void validate() const;
};

// Derived analytic link quantities for an AWGN channel.
struct LinkBudget {
    double snr_linear = 0.0;
    double throughput_bps = 0.0;       // Shannon capacity b*log2(1+SNR)
    double spectral_efficiency = 0.0;  // bits/s/Hz
    double eb_n0 = 0.0;
    double ber = 0.0;                  // coherent BPSK at capacity-matched Eb/N0
};

struct ReliabilityConfig {
    double epsilon = 1e-6;   // target residual block error probability
    int max_attempts = 10000;
    int crc_bits = 32;       // fixed CRC-32
    size_t block_bits = 0;   // segmented transport block size; 0 = choose from BER

    void validate() const;
};

// Complementary error function, 2/sqrt(pi) * integral_x^inf exp(-t^2) dt.
// Series expansion for small |x|, Lentz continued fraction for the tail;
// absolute error <= 1e-10 on |x| <= 6.
double erfc(double x);

LinkBudget link_budget(const ChannelConfig& cfg);

// Independent bit flips with probability `ber`, deterministic per seed.
Bitstream transmit_bits(const Bitstream& bits, double ber, uint64_t rng_seed);

// Probability that at least one of n_bits flips: 1 - (1-ber)^n.
double block_error_rate(double ber, uint64_t n_bits);

struct ArqResult {
    Bitstream delivered;
    int attempts = 0;
    bool success = false;
};

// Whole-payload stop-and-wait ARQ: payload + CRC32 resent until the CRC
// verifies. Throws ReliabilityExhaustedError when max_attempts runs out and
// ConfigError when the residual undetected-error rate BLER*2^-32 cannot meet
// epsilon.
ArqResult arq_transmit(const Bitstream& payload, const LinkBudget& budget,
                       const ReliabilityConfig& rel, uint64_t rng_seed);

// attempts * n_bits / throughput + t0.
double transmission_latency(uint64_t n_bits, int attempts, const LinkBudget& budget,
                            const ChannelConfig& cfg);

// Block size minimizing expected transmitted bits per payload bit at this BER.
size_t choose_block_bits(double ber);

struct ReliableResult {
    Bitstream delivered;
    uint64_t total_attempts = 0;   // summed over blocks
    uint64_t transmitted_bits = 0; // actual bits pushed through the channel
    size_t blocks = 0;
};

// Segmented caption transport: the payload is split into CRC-protected blocks,
// each delivered by arq_transmit. This is the reliability sublayer the
// pipeline routes captions through.
ReliableResult reliable_transmit(const Bitstream& payload, const LinkBudget& budget,
                                 const ReliabilityConfig& rel, uint64_t rng_seed);

}  // namespace mirage::channel

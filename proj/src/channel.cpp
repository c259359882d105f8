#include "mirage/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "mirage/crc32.hpp"
#include "mirage/rng.hpp"

namespace mirage::channel {

namespace {
constexpr double kTwoOverSqrtPi = 1.1283791670955126;
constexpr double kOneOverSqrtPi = 0.56418958354775628;
}

void ChannelConfig::validate() const {
    if (!std::isfinite(snr_db)) throw ConfigError("channel: snr_db must be finite");
    if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz))
        throw ConfigError("channel: bandwidth_hz must be positive");
    if (fixed_overhead_s < 0.0 || !std::isfinite(fixed_overhead_s))
        throw ConfigError("channel: fixed_overhead_s must be >= 0");
}

void ReliabilityConfig::validate() const {
    if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw ConfigError("reliability: epsilon must be in (0,1)");
    if (max_attempts < 1) throw ConfigError("reliability: max_attempts must be >= 1");
    if (crc_bits != 32) throw ConfigError("reliability: only CRC-32 is supported");
}

double erfc(double x) {
    if (std::isnan(x)) throw ConfigError("erfc: input must be finite");
    if (x < 0.0) return 2.0 - erfc(-x);
    if (x == 0.0) return 1.0;
    if (x > 26.5) return 0.0;  // exp(-x^2) underflows

    if (x < 2.0) {
        // erf(x) = 2/sqrt(pi) * sum (-1)^n x^(2n+1) / (n! (2n+1))
        double term = x;
        double sum = x;
        const double x2 = x * x;
        for (int n = 1; n < 80; ++n) {
            term *= -x2 / n;
            const double inc = term / (2 * n + 1);
            sum += inc;
            if (std::abs(inc) < 1e-18 * std::abs(sum)) break;
        }
        return 1.0 - kTwoOverSqrtPi * sum;
    }

    // Tail: erfc(x) = 1/sqrt(pi) * exp(-x^2) * F with
    // F = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), i.e. a1 = 1, a_n = (n-1)/2,
    // b_n = x, evaluated with the modified Lentz algorithm.
    const double tiny = 1e-300;
    double f = tiny, c = f, d = 0.0;
    for (int n = 1; n <= 200; ++n) {
        const double a = (n == 1) ? 1.0 : (n - 1) / 2.0;
        d = x + a * d;
        if (d == 0.0) d = tiny;
        c = x + a / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return kOneOverSqrtPi * std::exp(-x * x) * f;
}

LinkBudget link_budget(const ChannelConfig& cfg) {
    cfg.validate();
    LinkBudget lb;
    lb.snr_linear = std::pow(10.0, cfg.snr_db / 10.0);
    // log1p keeps precision for deeply negative SNR
    const double capacity_per_hz = std::log1p(lb.snr_linear) / std::numbers::ln2;
    if (!(capacity_per_hz > 0.0))
        throw DegenerateChannelError("link_budget: capacity underflowed to zero");
    lb.spectral_efficiency = capacity_per_hz;
    lb.throughput_bps = cfg.bandwidth_hz * capacity_per_hz;
    lb.eb_n0 = lb.snr_linear / lb.spectral_efficiency;
    lb.ber = 0.5 * erfc(std::sqrt(lb.eb_n0));
    lb.ber = std::clamp(lb.ber, 0.0, 0.5);
    return lb;
}

Bitstream transmit_bits(const Bitstream& bits, double ber, uint64_t rng_seed) {
    if (!(ber >= 0.0 && ber <= 1.0)) throw ConfigError("transmit_bits: ber must be in [0,1]");
    Bitstream out = bits;
    if (ber == 0.0) return out;
    std::mt19937_64 eng(rng_seed);
    const size_t n = out.size();
    for (size_t i = 0; i < n; ++i) {
        if (uniform01(eng) < ber) out.flip(i);
    }
    return out;
}

double block_error_rate(double ber, uint64_t n_bits) {
    if (!(ber >= 0.0 && ber <= 1.0)) throw ConfigError("block_error_rate: ber must be in [0,1]");
    if (n_bits < 1) throw ConfigError("block_error_rate: n_bits must be >= 1");
    if (ber == 0.0) return 0.0;
    if (ber == 1.0) return 1.0;
    return -std::expm1(static_cast<double>(n_bits) * std::log1p(-ber));
}

namespace {

// CRC over the zero-padded bytes of a bit sequence.
uint32_t bit_crc(const Bitstream& bits) { return crc32(bits.bytes()); }

}  // namespace

ArqResult arq_transmit(const Bitstream& payload, const LinkBudget& budget,
                       const ReliabilityConfig& rel, uint64_t rng_seed) {
    rel.validate();
    if (payload.empty()) throw ConfigError("arq_transmit: payload must be non-empty");

    // Residual undetected-error rate must meet the configured target.
    const double bler = block_error_rate(budget.ber, payload.size() + 32);
    if (bler * 0x1.0p-32 > rel.epsilon)
        throw ConfigError("arq_transmit: CRC-32 residual error rate exceeds epsilon");

    Bitstream framed = payload;
    framed.append_bits(bit_crc(payload), 32);

    for (int attempt = 1; attempt <= rel.max_attempts; ++attempt) {
        const Bitstream received =
            transmit_bits(framed, budget.ber, derive_seed(rng_seed, "arq", static_cast<uint64_t>(attempt)));
        Bitstream body = received.slice(0, payload.size());
        const uint32_t got = static_cast<uint32_t>(received.read_bits(payload.size(), 32));
        if (bit_crc(body) == got) return ArqResult{std::move(body), attempt, true};
    }
    throw ReliabilityExhaustedError("arq_transmit: max attempts reached without CRC pass",
                                    rel.max_attempts);
}

double transmission_latency(uint64_t n_bits, int attempts, const LinkBudget& budget,
                            const ChannelConfig& cfg) {
    if (attempts < 1) throw ConfigError("transmission_latency: attempts must be >= 1");
    if (!(budget.throughput_bps > 0.0))
        throw DegenerateChannelError("transmission_latency: zero throughput");
    return static_cast<double>(attempts) * static_cast<double>(n_bits) / budget.throughput_bps +
           cfg.fixed_overhead_s;
}

size_t choose_block_bits(double ber) {
    if (!(ber > 0.0)) return std::numeric_limits<size_t>::max();  // noiseless: single block
    const double lambda = -std::log1p(-std::min(ber, 0.999999));
    // minimize (1 + 32/B) * exp(lambda*(B+32)) over B: lambda B^2 + 32 lambda B - 32 = 0
    const double b = (-32.0 * lambda + std::sqrt(1024.0 * lambda * lambda + 128.0 * lambda)) /
                     (2.0 * lambda);
    const double clamped = std::clamp(b, 8.0, 65536.0);
    return static_cast<size_t>((static_cast<size_t>(clamped) + 7) / 8 * 8);
}

ReliableResult reliable_transmit(const Bitstream& payload, const LinkBudget& budget,
                                 const ReliabilityConfig& rel, uint64_t rng_seed) {
    rel.validate();
    if (payload.empty()) throw ConfigError("reliable_transmit: payload must be non-empty");

    size_t block = rel.block_bits ? rel.block_bits : choose_block_bits(budget.ber);
    block = std::min(block, payload.size());
    const size_t blocks = (payload.size() + block - 1) / block;

    // Union bound over blocks for the undetected-error rate.
    const double worst_bler = block_error_rate(budget.ber, block + 32);
    if (static_cast<double>(blocks) * worst_bler * 0x1.0p-32 > rel.epsilon)
        throw ConfigError("reliable_transmit: residual error rate exceeds epsilon");

    ReliableResult res;
    res.blocks = blocks;
    for (size_t i = 0; i < blocks; ++i) {
        const size_t off = i * block;
        const size_t len = std::min(block, payload.size() - off);
        const Bitstream piece = payload.slice(off, len);
        ArqResult a = arq_transmit(piece, budget, rel, derive_seed(rng_seed, "arq-block", i));
        res.total_attempts += static_cast<uint64_t>(a.attempts);
        res.transmitted_bits += static_cast<uint64_t>(a.attempts) * (len + 32);
        res.delivered.append(a.delivered);
    }
    return res;
}

}  // namespace mirage::channel

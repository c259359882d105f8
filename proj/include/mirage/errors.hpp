#pragma once

#include <stdexcept>
#include <string>

namespace mirage {

// Base class for all simulator errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration or precondition violation.
struct ConfigError : Error {
    using Error::Error;
};

// Channel capacity underflowed to zero; latency/throughput undefined.
struct DegenerateChannelError : Error {
    using Error::Error;
};

// ARQ gave up before a CRC-clean block was received.
struct ReliabilityExhaustedError : Error {
    ReliabilityExhaustedError(const std::string& what, int attempts_made)
        : Error(what), attempts(attempts_made) {}
    int attempts;
};

struct DimensionError : Error {
    using Error::Error;
};

struct UnknownScorerError : Error {
    using Error::Error;
};

// IndexMap refers to a codebook other than the one supplied.
struct UnknownCodebookError : Error {
    using Error::Error;
};

struct InsufficientDataError : Error {
    using Error::Error;
};

// Training loss became non-finite.
struct DivergenceError : Error {
    using Error::Error;
};

// Lossless caption stream failed to inflate.
struct CompressionError : Error {
    using Error::Error;
};

struct FramingError : Error {
    enum class Reason { BadMagic, BadVersion, CrcMismatch, Truncated, BadField };
    FramingError(Reason r, const std::string& what) : Error(what), reason(r) {}
    Reason reason;
};

// Filesystem / ingestion failures (missing manifest, unreadable frame, ...).
struct IoError : Error {
    using Error::Error;
};

// Generation endpoint problems.
struct EndpointError : Error {
    using Error::Error;
};

}  // namespace mirage

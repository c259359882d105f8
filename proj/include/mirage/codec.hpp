#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mirage/bitio.hpp"
#include "mirage/types.hpp"

namespace mirage::codec {

// Shared vector-quantization codebook. `id` is a content hash (CRC-32 of the
// big-endian float32 serialization) so sender and receiver can detect
// mismatched books.
struct Codebook {
    uint32_t id = 0;
    int dim = 0;
    std::vector<std::vector<double>> codewords;

    int size() const { return static_cast<int>(codewords.size()); }
    int index_bits() const;
    void refresh_id();
    void validate() const;
};

// Encoder output: a c-channel latent grid. Cell (y, x) holds a contiguous
// c-vector at values[(y*width + x)*channels + k].
struct LatentGrid {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> values;

    LatentGrid() = default;
    LatentGrid(int c, int h, int w)
        : channels(c), height(h), width(w), values(static_cast<size_t>(c) * h * w, 0.0) {}

    size_t cells() const { return static_cast<size_t>(height) * width; }
    const double* cell(size_t j) const { return values.data() + j * channels; }
    double* cell(size_t j) { return values.data() + j * channels; }
};

// Discrete codeword indices for one keyframe.
struct IndexMap {
    int height = 0;
    int width = 0;
    uint32_t codebook_id = 0;
    std::vector<uint32_t> indices;  // h*w entries, row-major
};

struct VqVaeConfig {
    int patch_size = 4;
    int latent_dim = 8;
    int codebook_size = 16;
    double beta = 0.25;  // commitment weight
    double learning_rate = 0.05;
    int steps = 200;

    void validate() const;
};

// ---------------------------------------------------------------------------
// Raw pixel quantization (baseline scheme)

struct PixelQuantizeResult {
    Bitstream codes;  // q bits per sample, MSB first
    FrameTensor recon;
};

PixelQuantizeResult quantize_pixels(const FrameTensor& frame, int q_bits);
FrameTensor dequantize_pixels(const Bitstream& codes, int q_bits, int height, int width,
                              int channels);

// ---------------------------------------------------------------------------
// Affine per-patch autoencoder. The latent rate is pinned to two values per
// source pixel, so q-bit latents serialize at exactly 2q bpp.

struct AeParams {
    int patch = 4;
    int channels = 3;
    std::vector<double> enc;       // (2p^2) x (p^2*D), row-major
    std::vector<double> enc_bias;  // 2p^2
    std::vector<double> dec;       // (p^2*D) x (2p^2)
    std::vector<double> dec_bias;  // p^2*D

    int input_dim() const { return patch * patch * channels; }
    int latent_dim() const { return 2 * patch * patch; }

    // Luma/chroma-style analytic map with a least-squares inverse.
    static AeParams identity_for(int patch, int channels);
    static AeParams zeros(int patch, int channels);
};

LatentGrid ae_encode(const FrameTensor& frame, const AeParams& params);
FrameTensor ae_decode(const LatentGrid& grid, const AeParams& params);

// Scalar-quantized latent serialization (values clamped to [0,1]).
Bitstream pack_latents(const LatentGrid& grid, int q_bits);
LatentGrid unpack_latents(const Bitstream& codes, int q_bits, int channels, int height, int width);

// ---------------------------------------------------------------------------
// Vector quantization

IndexMap vq_encode(const LatentGrid& z, const Codebook& cb);

// Codeword lookup with saturation: indices >= K (possible after channel
// corruption) clamp to K-1 so decoding is total.
LatentGrid codeword_lookup(const IndexMap& s, const Codebook& cb);

uint64_t vq_cost_bits(int h, int w, int K);

// Affine decoder from codeword space back to patch pixels.
struct VqDecoder {
    int patch = 1;
    int channels = 1;
    int latent_dim = 1;
    std::vector<double> weights;  // (p^2*D) x d
    std::vector<double> bias;     // p^2*D

    static VqDecoder identity1d();
};

FrameTensor vq_decode(const IndexMap& s, const Codebook& cb, const VqDecoder& dec);

// ---------------------------------------------------------------------------
// Trainable VQ-VAE (affine encoder/decoder + codebook)

struct VqVaeModel {
    int patch = 4;
    int channels = 1;
    int latent_dim = 8;
    std::vector<double> enc;       // d x n
    std::vector<double> enc_bias;  // d
    VqDecoder decoder;
    Codebook codebook;

    int input_dim() const { return patch * patch * channels; }
    LatentGrid encode(const FrameTensor& frame) const;
};

struct VqvaeLoss {
    double total = 0.0;
    double recon = 0.0;     // MSE(x, x_hat)
    double codebook = 0.0;  // ||sg[z_e] - e_s||^2, averaged over latent elements
    double commit = 0.0;    // beta * ||z_e - sg[e_s]||^2, same averaging
};

VqvaeLoss vqvae_loss(const FrameTensor& x, const FrameTensor& recon, const LatentGrid& z_e,
                     const LatentGrid& e_s, double beta);

// Per-parameter gradients of the training objective over a patch batch.
// enc/dec/codebook are the straight-through training gradients; the *_commit
// entries isolate the commitment share for finite-difference validation.
struct VqvaeGrads {
    std::vector<double> enc, enc_bias;
    std::vector<double> dec, dec_bias;
    std::vector<double> codebook;  // K x d, flat
    std::vector<double> enc_commit, enc_bias_commit;
};

VqvaeLoss vqvae_forward(const VqVaeModel& model, const std::vector<std::vector<double>>& patches,
                        double beta, VqvaeGrads* grads = nullptr);

struct TrainResult {
    VqVaeModel model;
    std::vector<double> loss_trace;  // loss at each step before the update
    double initial_recon_mse = 0.0;
    double final_recon_mse = 0.0;
};

std::vector<std::vector<double>> extract_patches(const std::vector<FrameTensor>& frames,
                                                 int patch);

TrainResult train_vqvae(const std::vector<FrameTensor>& frames, const VqVaeConfig& cfg,
                        uint64_t seed);

// ---------------------------------------------------------------------------
// Codebook training (Lloyd iterations, k-means++ seeding)

struct KmeansResult {
    Codebook codebook;
    std::vector<double> objective_trace;  // mean squared distance per iteration
};

KmeansResult kmeans_codebook(const std::vector<std::vector<double>>& latents, int K,
                             uint64_t seed, int iters);

// ---------------------------------------------------------------------------
// Codebook binary format: "MRGC", version, K (u32 BE), d (u16 BE),
// codewords as float32 BE, trailing CRC-32.

std::vector<uint8_t> serialize_codebook(const Codebook& cb);
Codebook deserialize_codebook(const std::vector<uint8_t>& bytes);
void save_codebook(const Codebook& cb, const std::string& path);
Codebook load_codebook(const std::string& path);

}  // namespace mirage::codec

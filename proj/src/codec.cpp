#include "mirage/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "mirage/crc32.hpp"
#include "mirage/rng.hpp"

namespace mirage::codec {

namespace {

// y = M x + b for a rows x cols row-major matrix.
void affine(const std::vector<double>& m, const std::vector<double>& b, const double* x,
            double* y, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        double acc = b.empty() ? 0.0 : b[r];
        const double* row = m.data() + static_cast<size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
}

double sq(double v) { return v * v; }

void append_f32_be(std::vector<uint8_t>& out, float f) {
    const uint32_t u = std::bit_cast<uint32_t>(f);
    out.push_back(static_cast<uint8_t>(u >> 24));
    out.push_back(static_cast<uint8_t>(u >> 16));
    out.push_back(static_cast<uint8_t>(u >> 8));
    out.push_back(static_cast<uint8_t>(u));
}

void append_u32_be(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void append_u16_be(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

uint32_t read_u32_be(const uint8_t* p) {
    return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | uint32_t(p[3]);
}

uint16_t read_u16_be(const uint8_t* p) { return uint16_t((uint16_t(p[0]) << 8) | p[1]); }

std::vector<uint8_t> codeword_bytes(const Codebook& cb) {
    std::vector<uint8_t> out;
    out.reserve(static_cast<size_t>(cb.size()) * cb.dim * 4);
    for (const auto& cw : cb.codewords)
        for (double v : cw) append_f32_be(out, static_cast<float>(v));
    return out;
}

void gather_patch(const FrameTensor& f, int py, int px, int patch, double* out) {
    int i = 0;
    for (int y = 0; y < patch; ++y)
        for (int x = 0; x < patch; ++x)
            for (int c = 0; c < f.channels; ++c)
                out[i++] = f.at(py * patch + y, px * patch + x, c);
}

void scatter_patch(FrameTensor& f, int py, int px, int patch, const double* in) {
    int i = 0;
    for (int y = 0; y < patch; ++y)
        for (int x = 0; x < patch; ++x)
            for (int c = 0; c < f.channels; ++c)
                f.at(py * patch + y, px * patch + x, c) = std::clamp(in[i++], 0.0, 1.0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Codebook

int Codebook::index_bits() const {
    return std::max(1, static_cast<int>(std::bit_width(static_cast<uint32_t>(size() - 1))));
}

void Codebook::refresh_id() { id = crc32(codeword_bytes(*this)); }

void Codebook::validate() const {
    if (size() < 2) throw ConfigError("codebook: K must be >= 2");
    if (dim < 1) throw ConfigError("codebook: dim must be >= 1");
    for (const auto& cw : codewords) {
        if (static_cast<int>(cw.size()) != dim) throw DimensionError("codebook: codeword dim mismatch");
        for (double v : cw)
            if (!std::isfinite(v)) throw ConfigError("codebook: non-finite codeword");
    }
}

// ---------------------------------------------------------------------------
// Pixel quantization

PixelQuantizeResult quantize_pixels(const FrameTensor& frame, int q_bits) {
    if (q_bits < 1 || q_bits > 16) throw ConfigError("quantize_pixels: q must be in [1,16]");
    const uint32_t max_code = (1u << q_bits) - 1u;
    PixelQuantizeResult out;
    out.recon = frame;
    for (size_t i = 0; i < frame.values.size(); ++i) {
        const double v = frame.values[i];
        long code = std::lround(v * max_code);
        code = std::clamp(code, 0l, static_cast<long>(max_code));
        out.codes.append_bits(static_cast<uint64_t>(code), q_bits);
        out.recon.values[i] = static_cast<double>(code) / max_code;
    }
    return out;
}

FrameTensor dequantize_pixels(const Bitstream& codes, int q_bits, int height, int width,
                              int channels) {
    if (q_bits < 1 || q_bits > 16) throw ConfigError("dequantize_pixels: q must be in [1,16]");
    FrameTensor frame(height, width, channels);
    if (codes.size() != frame.values.size() * static_cast<size_t>(q_bits))
        throw DimensionError("dequantize_pixels: code length does not match dimensions");
    const double max_code = static_cast<double>((1u << q_bits) - 1u);
    for (size_t i = 0; i < frame.values.size(); ++i)
        frame.values[i] = static_cast<double>(codes.read_bits(i * q_bits, q_bits)) / max_code;
    return frame;
}

// ---------------------------------------------------------------------------
// Affine autoencoder

AeParams AeParams::identity_for(int patch, int channels) {
    if (patch < 1 || channels < 1) throw ConfigError("ae params: bad dimensions");
    AeParams p;
    p.patch = patch;
    p.channels = channels;
    const int n = p.input_dim();
    const int m = p.latent_dim();
    p.enc.assign(static_cast<size_t>(m) * n, 0.0);
    p.enc_bias.assign(m, 0.0);
    p.dec.assign(static_cast<size_t>(n) * m, 0.0);
    p.dec_bias.assign(n, 0.0);

    const int d = channels;
    for (int j = 0; j < patch * patch; ++j) {
        const int row0 = 2 * j;      // per-pixel mean
        const int row1 = 2 * j + 1;  // first-minus-last contrast, biased to [0,1]
        const int col0 = j * d;
        for (int c = 0; c < d; ++c) p.enc[static_cast<size_t>(row0) * n + col0 + c] = 1.0 / d;
        if (d >= 2) {
            p.enc[static_cast<size_t>(row1) * n + col0] = 0.5;
            p.enc[static_cast<size_t>(row1) * n + col0 + d - 1] = -0.5;
        }
        p.enc_bias[row1] = 0.5;

        // least-squares inverse of the per-pixel map
        for (int c = 0; c < d; ++c) {
            double* row = p.dec.data() + static_cast<size_t>(col0 + c) * m;
            row[row0] = 1.0;
            if (d >= 2 && c == 0) {
                row[row1] = 1.0;
                p.dec_bias[col0 + c] = -0.5;
            }
            if (d >= 2 && c == d - 1) {
                row[row1] = -1.0;
                p.dec_bias[col0 + c] = 0.5;
            }
        }
    }
    return p;
}

AeParams AeParams::zeros(int patch, int channels) {
    AeParams p;
    p.patch = patch;
    p.channels = channels;
    p.enc.assign(static_cast<size_t>(p.latent_dim()) * p.input_dim(), 0.0);
    p.enc_bias.assign(p.latent_dim(), 0.0);
    p.dec.assign(static_cast<size_t>(p.input_dim()) * p.latent_dim(), 0.0);
    p.dec_bias.assign(p.input_dim(), 0.0);
    return p;
}

LatentGrid ae_encode(const FrameTensor& frame, const AeParams& params) {
    if (frame.channels != params.channels) throw DimensionError("ae_encode: channel count mismatch");
    if (params.patch < 1 || frame.height % params.patch != 0 || frame.width % params.patch != 0)
        throw DimensionError("ae_encode: patch size must divide frame dimensions");
    const int gh = frame.height / params.patch;
    const int gw = frame.width / params.patch;
    LatentGrid grid(params.latent_dim(), gh, gw);
    std::vector<double> x(params.input_dim());
    for (int py = 0; py < gh; ++py)
        for (int px = 0; px < gw; ++px) {
            gather_patch(frame, py, px, params.patch, x.data());
            affine(params.enc, params.enc_bias, x.data(),
                   grid.cell(static_cast<size_t>(py) * gw + px), params.latent_dim(),
                   params.input_dim());
        }
    return grid;
}

FrameTensor ae_decode(const LatentGrid& grid, const AeParams& params) {
    if (grid.channels != params.latent_dim()) throw DimensionError("ae_decode: latent dim mismatch");
    FrameTensor frame(grid.height * params.patch, grid.width * params.patch, params.channels);
    std::vector<double> x(params.input_dim());
    for (int py = 0; py < grid.height; ++py)
        for (int px = 0; px < grid.width; ++px) {
            affine(params.dec, params.dec_bias,
                   grid.cell(static_cast<size_t>(py) * grid.width + px), x.data(),
                   params.input_dim(), params.latent_dim());
            scatter_patch(frame, py, px, params.patch, x.data());
        }
    return frame;
}

Bitstream pack_latents(const LatentGrid& grid, int q_bits) {
    if (q_bits < 1 || q_bits > 16) throw ConfigError("pack_latents: q must be in [1,16]");
    const uint32_t max_code = (1u << q_bits) - 1u;
    Bitstream out;
    for (double v : grid.values) {
        const long code = std::lround(std::clamp(v, 0.0, 1.0) * max_code);
        out.append_bits(static_cast<uint64_t>(std::clamp(code, 0l, static_cast<long>(max_code))),
                        q_bits);
    }
    return out;
}

LatentGrid unpack_latents(const Bitstream& codes, int q_bits, int channels, int height, int width) {
    LatentGrid grid(channels, height, width);
    if (codes.size() != grid.values.size() * static_cast<size_t>(q_bits))
        throw DimensionError("unpack_latents: code length does not match dimensions");
    const double max_code = static_cast<double>((1u << q_bits) - 1u);
    for (size_t i = 0; i < grid.values.size(); ++i)
        grid.values[i] = static_cast<double>(codes.read_bits(i * q_bits, q_bits)) / max_code;
    return grid;
}

// ---------------------------------------------------------------------------
// Vector quantization

IndexMap vq_encode(const LatentGrid& z, const Codebook& cb) {
    cb.validate();
    if (z.channels != cb.dim) throw DimensionError("vq_encode: latent dim != codebook dim");
    IndexMap map;
    map.height = z.height;
    map.width = z.width;
    map.codebook_id = cb.id;
    map.indices.resize(z.cells());
    const int k_count = cb.size();
    for (size_t j = 0; j < z.cells(); ++j) {
        const double* v = z.cell(j);
        double best = std::numeric_limits<double>::infinity();
        uint32_t best_k = 0;
        for (int k = 0; k < k_count; ++k) {
            double dist = 0.0;
            const auto& cw = cb.codewords[k];
            for (int c = 0; c < cb.dim; ++c) dist += sq(v[c] - cw[c]);
            if (dist < best) {
                best = dist;
                best_k = static_cast<uint32_t>(k);
            }
        }
        map.indices[j] = best_k;
    }
    return map;
}

LatentGrid codeword_lookup(const IndexMap& s, const Codebook& cb) {
    cb.validate();
    if (s.codebook_id != cb.id) throw UnknownCodebookError("codeword_lookup: codebook id mismatch");
    LatentGrid grid(cb.dim, s.height, s.width);
    const uint32_t top = static_cast<uint32_t>(cb.size()) - 1;
    for (size_t j = 0; j < s.indices.size(); ++j) {
        const uint32_t k = std::min(s.indices[j], top);  // saturate corrupted indices
        std::copy(cb.codewords[k].begin(), cb.codewords[k].end(), grid.cell(j));
    }
    return grid;
}

uint64_t vq_cost_bits(int h, int w, int K) {
    if (K < 2) throw ConfigError("vq_cost_bits: K must be >= 2");
    const uint64_t bits = std::max(1, static_cast<int>(std::bit_width(static_cast<uint32_t>(K - 1))));
    return static_cast<uint64_t>(h) * static_cast<uint64_t>(w) * bits;
}

VqDecoder VqDecoder::identity1d() {
    VqDecoder d;
    d.patch = 1;
    d.channels = 1;
    d.latent_dim = 1;
    d.weights = {1.0};
    d.bias = {0.0};
    return d;
}

FrameTensor vq_decode(const IndexMap& s, const Codebook& cb, const VqDecoder& dec) {
    if (dec.latent_dim != cb.dim) throw DimensionError("vq_decode: decoder latent dim mismatch");
    const LatentGrid grid = codeword_lookup(s, cb);
    FrameTensor frame(grid.height * dec.patch, grid.width * dec.patch, dec.channels);
    const int n = dec.patch * dec.patch * dec.channels;
    std::vector<double> x(n);
    for (int py = 0; py < grid.height; ++py)
        for (int px = 0; px < grid.width; ++px) {
            affine(dec.weights, dec.bias, grid.cell(static_cast<size_t>(py) * grid.width + px),
                   x.data(), n, dec.latent_dim);
            scatter_patch(frame, py, px, dec.patch, x.data());
        }
    return frame;
}

// ---------------------------------------------------------------------------
// VQ-VAE

void VqVaeConfig::validate() const {
    if (patch_size < 1) throw ConfigError("vqvae: patch_size must be >= 1");
    if (latent_dim < 1) throw ConfigError("vqvae: latent_dim must be >= 1");
    if (codebook_size < 2) throw ConfigError("vqvae: codebook_size must be >= 2");
    if (!(beta > 0.0)) throw ConfigError("vqvae: beta must be > 0");
    if (!(learning_rate >= 0.0)) throw ConfigError("vqvae: learning_rate must be >= 0");
    if (steps < 0) throw ConfigError("vqvae: steps must be >= 0");
}

LatentGrid VqVaeModel::encode(const FrameTensor& frame) const {
    if (frame.channels != channels) throw DimensionError("vqvae encode: channel mismatch");
    if (frame.height % patch != 0 || frame.width % patch != 0)
        throw DimensionError("vqvae encode: patch must divide frame dims");
    const int gh = frame.height / patch;
    const int gw = frame.width / patch;
    LatentGrid grid(latent_dim, gh, gw);
    std::vector<double> x(input_dim());
    for (int py = 0; py < gh; ++py)
        for (int px = 0; px < gw; ++px) {
            gather_patch(frame, py, px, patch, x.data());
            affine(enc, enc_bias, x.data(), grid.cell(static_cast<size_t>(py) * gw + px),
                   latent_dim, input_dim());
        }
    return grid;
}

VqvaeLoss vqvae_loss(const FrameTensor& x, const FrameTensor& recon, const LatentGrid& z_e,
                     const LatentGrid& e_s, double beta) {
    if (!x.same_shape(recon)) throw DimensionError("vqvae_loss: frame shape mismatch");
    if (z_e.channels != e_s.channels || z_e.height != e_s.height || z_e.width != e_s.width)
        throw DimensionError("vqvae_loss: latent shape mismatch");
    VqvaeLoss l;
    for (size_t i = 0; i < x.values.size(); ++i) l.recon += sq(x.values[i] - recon.values[i]);
    l.recon /= static_cast<double>(x.values.size());
    double d2 = 0.0;
    for (size_t i = 0; i < z_e.values.size(); ++i) d2 += sq(z_e.values[i] - e_s.values[i]);
    d2 /= static_cast<double>(z_e.values.size());
    l.codebook = d2;
    l.commit = beta * d2;
    l.total = l.recon + l.codebook + l.commit;
    return l;
}

VqvaeLoss vqvae_forward(const VqVaeModel& model, const std::vector<std::vector<double>>& patches,
                        double beta, VqvaeGrads* grads) {
    if (patches.empty()) throw ConfigError("vqvae_forward: empty batch");
    const int n = model.input_dim();
    const int d = model.latent_dim;
    const int k_count = model.codebook.size();
    const double batch = static_cast<double>(patches.size());

    if (grads) {
        grads->enc.assign(static_cast<size_t>(d) * n, 0.0);
        grads->enc_bias.assign(d, 0.0);
        grads->dec.assign(static_cast<size_t>(n) * d, 0.0);
        grads->dec_bias.assign(n, 0.0);
        grads->codebook.assign(static_cast<size_t>(k_count) * d, 0.0);
        grads->enc_commit.assign(static_cast<size_t>(d) * n, 0.0);
        grads->enc_bias_commit.assign(d, 0.0);
    }

    VqvaeLoss loss;
    std::vector<double> z(d), xhat(n), g_xhat(n);
    for (const auto& x : patches) {
        if (static_cast<int>(x.size()) != n) throw DimensionError("vqvae_forward: patch dim mismatch");
        affine(model.enc, model.enc_bias, x.data(), z.data(), d, n);

        int s = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k < k_count; ++k) {
            double dist = 0.0;
            for (int c = 0; c < d; ++c) dist += sq(z[c] - model.codebook.codewords[k][c]);
            if (dist < best) {
                best = dist;
                s = k;
            }
        }
        const auto& e = model.codebook.codewords[s];

        affine(model.decoder.weights, model.decoder.bias, e.data(), xhat.data(), n, d);

        double rec = 0.0;
        for (int i = 0; i < n; ++i) rec += sq(xhat[i] - x[i]);
        loss.recon += rec / n / batch;
        double d2 = 0.0;
        for (int c = 0; c < d; ++c) d2 += sq(z[c] - e[c]);
        loss.codebook += d2 / d / batch;

        if (grads) {
            for (int i = 0; i < n; ++i) g_xhat[i] = 2.0 * (xhat[i] - x[i]) / (n * batch);
            for (int i = 0; i < n; ++i) {
                grads->dec_bias[i] += g_xhat[i];
                double* row = grads->dec.data() + static_cast<size_t>(i) * d;
                for (int c = 0; c < d; ++c) row[c] += g_xhat[i] * e[c];
            }
            // straight-through: the reconstruction gradient reaches the encoder
            // as if the quantizer were the identity; the codebook is driven only
            // by the dictionary term
            for (int c = 0; c < d; ++c) {
                double acc = 0.0;
                for (int i = 0; i < n; ++i)
                    acc += model.decoder.weights[static_cast<size_t>(i) * d + c] * g_xhat[i];
                const double commit_g = beta * 2.0 * (z[c] - e[c]) / (d * batch);
                const double gz = acc + commit_g;
                grads->enc_bias[c] += gz;
                grads->enc_bias_commit[c] += commit_g;
                double* erow = grads->enc.data() + static_cast<size_t>(c) * n;
                double* crow = grads->enc_commit.data() + static_cast<size_t>(c) * n;
                for (int i = 0; i < n; ++i) {
                    erow[i] += gz * x[i];
                    crow[i] += commit_g * x[i];
                }
                grads->codebook[static_cast<size_t>(s) * d + c] += 2.0 * (e[c] - z[c]) / (d * batch);
            }
        }
    }
    loss.commit = beta * loss.codebook;
    loss.total = loss.recon + loss.codebook + loss.commit;
    return loss;
}

std::vector<std::vector<double>> extract_patches(const std::vector<FrameTensor>& frames,
                                                 int patch) {
    if (frames.empty()) throw ConfigError("extract_patches: no frames");
    std::vector<std::vector<double>> out;
    for (const auto& f : frames) {
        if (f.channels != frames.front().channels)
            throw DimensionError("extract_patches: channel mismatch across frames");
        if (f.height % patch != 0 || f.width % patch != 0)
            throw DimensionError("extract_patches: patch must divide frame dims");
        const int gh = f.height / patch;
        const int gw = f.width / patch;
        for (int py = 0; py < gh; ++py)
            for (int px = 0; px < gw; ++px) {
                std::vector<double> x(static_cast<size_t>(patch) * patch * f.channels);
                gather_patch(f, py, px, patch, x.data());
                out.push_back(std::move(x));
            }
    }
    return out;
}

TrainResult train_vqvae(const std::vector<FrameTensor>& frames, const VqVaeConfig& cfg,
                        uint64_t seed) {
    cfg.validate();
    if (frames.empty()) throw ConfigError("train_vqvae: empty dataset");
    const auto patches = extract_patches(frames, cfg.patch_size);

    VqVaeModel model;
    model.patch = cfg.patch_size;
    model.channels = frames.front().channels;
    model.latent_dim = cfg.latent_dim;
    const int n = model.input_dim();
    const int d = cfg.latent_dim;

    std::mt19937_64 eng(derive_seed(seed, "vqvae-init"));
    auto uniform_pm = [&eng]() { return 2.0 * uniform01(eng) - 1.0; };
    model.enc.resize(static_cast<size_t>(d) * n);
    for (auto& v : model.enc) v = uniform_pm() / std::sqrt(static_cast<double>(n));
    model.enc_bias.assign(d, 0.0);
    model.decoder.patch = cfg.patch_size;
    model.decoder.channels = model.channels;
    model.decoder.latent_dim = d;
    model.decoder.weights.resize(static_cast<size_t>(n) * d);
    for (auto& v : model.decoder.weights) v = uniform_pm() / std::sqrt(static_cast<double>(d));
    model.decoder.bias.assign(n, 0.0);

    // codebook seeded from initial latents of randomly drawn patches
    model.codebook.dim = d;
    model.codebook.codewords.reserve(cfg.codebook_size);
    std::vector<double> z(d);
    for (int k = 0; k < cfg.codebook_size; ++k) {
        const auto& x = patches[eng() % patches.size()];
        affine(model.enc, model.enc_bias, x.data(), z.data(), d, n);
        auto cw = z;
        if (patches.size() < static_cast<size_t>(cfg.codebook_size))
            for (auto& v : cw) v += 1e-3 * uniform_pm();  // break duplicates on tiny datasets
        model.codebook.codewords.push_back(std::move(cw));
    }
    model.codebook.refresh_id();

    TrainResult res;
    res.initial_recon_mse = vqvae_forward(model, patches, cfg.beta).recon;
    VqvaeGrads g;
    for (int step = 0; step < cfg.steps; ++step) {
        const VqvaeLoss l = vqvae_forward(model, patches, cfg.beta, &g);
        if (!std::isfinite(l.total)) throw DivergenceError("train_vqvae: loss became non-finite");
        res.loss_trace.push_back(l.total);
        const double lr = cfg.learning_rate;
        for (size_t i = 0; i < model.enc.size(); ++i) model.enc[i] -= lr * g.enc[i];
        for (size_t i = 0; i < model.enc_bias.size(); ++i) model.enc_bias[i] -= lr * g.enc_bias[i];
        for (size_t i = 0; i < model.decoder.weights.size(); ++i)
            model.decoder.weights[i] -= lr * g.dec[i];
        for (size_t i = 0; i < model.decoder.bias.size(); ++i)
            model.decoder.bias[i] -= lr * g.dec_bias[i];
        for (int k = 0; k < model.codebook.size(); ++k)
            for (int c = 0; c < d; ++c)
                model.codebook.codewords[k][c] -= lr * g.codebook[static_cast<size_t>(k) * d + c];
    }
    model.codebook.refresh_id();
    res.final_recon_mse = vqvae_forward(model, patches, cfg.beta).recon;
    res.model = std::move(model);
    return res;
}

// ---------------------------------------------------------------------------
// k-means codebook

KmeansResult kmeans_codebook(const std::vector<std::vector<double>>& latents, int K,
                             uint64_t seed, int iters) {
    if (K < 2) throw ConfigError("kmeans_codebook: K must be >= 2");
    if (latents.empty()) throw InsufficientDataError("kmeans_codebook: no latents");
    const int dim = static_cast<int>(latents.front().size());
    for (const auto& v : latents)
        if (static_cast<int>(v.size()) != dim)
            throw DimensionError("kmeans_codebook: inconsistent latent dims");

    {
        auto distinct = latents;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        if (static_cast<int>(distinct.size()) < K)
            throw InsufficientDataError("kmeans_codebook: fewer distinct latents than K");
    }

    const size_t point_count = latents.size();
    std::mt19937_64 eng(derive_seed(seed, "kmeans"));
    auto dist2 = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double acc = 0.0;
        for (int c = 0; c < dim; ++c) acc += sq(a[c] - b[c]);
        return acc;
    };

    // k-means++ seeding
    std::vector<std::vector<double>> centers;
    centers.push_back(latents[eng() % point_count]);
    std::vector<double> d2(point_count);
    while (static_cast<int>(centers.size()) < K) {
        double total = 0.0;
        for (size_t i = 0; i < point_count; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centers) best = std::min(best, dist2(latents[i], c));
            d2[i] = best;
            total += best;
        }
        size_t pick = 0;
        if (total > 0.0) {
            const double r = uniform01(eng) * total;
            double acc = 0.0;
            for (size_t i = 0; i < point_count; ++i) {
                acc += d2[i];
                pick = i;
                if (acc >= r) break;
            }
        } else {
            pick = eng() % point_count;
        }
        centers.push_back(latents[pick]);
    }

    std::vector<int> assignment(point_count, 0);
    std::vector<double> trace;
    for (int it = 0; it < std::max(1, iters); ++it) {
        // assignment step, ties to the lower index
        double objective = 0.0;
        for (size_t i = 0; i < point_count; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int best_k = 0;
            for (int k = 0; k < K; ++k) {
                const double v = dist2(latents[i], centers[k]);
                if (v < best) {
                    best = v;
                    best_k = k;
                }
            }
            assignment[i] = best_k;
            objective += best;
        }
        trace.push_back(objective / static_cast<double>(point_count));

        // update step
        std::vector<std::vector<double>> sums(K, std::vector<double>(dim, 0.0));
        std::vector<size_t> counts(K, 0);
        for (size_t i = 0; i < point_count; ++i) {
            ++counts[assignment[i]];
            for (int c = 0; c < dim; ++c) sums[assignment[i]][c] += latents[i][c];
        }
        for (int k = 0; k < K; ++k)
            if (counts[k] > 0)
                for (int c = 0; c < dim; ++c) centers[k][c] = sums[k][c] / counts[k];

        // re-seed empty clusters from the point farthest from its own center
        for (int k = 0; k < K; ++k) {
            if (counts[k] > 0) continue;
            double worst = -1.0;
            size_t worst_i = 0;
            for (size_t i = 0; i < point_count; ++i) {
                const double v = dist2(latents[i], centers[assignment[i]]);
                if (v > worst) {
                    worst = v;
                    worst_i = i;
                }
            }
            centers[k] = latents[worst_i];
        }
    }

    KmeansResult res;
    res.codebook.dim = dim;
    res.codebook.codewords = std::move(centers);
    res.codebook.refresh_id();
    res.objective_trace = std::move(trace);
    return res;
}

// ---------------------------------------------------------------------------
// Codebook serialization

std::vector<uint8_t> serialize_codebook(const Codebook& cb) {
    cb.validate();
    std::vector<uint8_t> out = {'M', 'R', 'G', 'C', 0x01};
    append_u32_be(out, static_cast<uint32_t>(cb.size()));
    append_u16_be(out, static_cast<uint16_t>(cb.dim));
    const auto words = codeword_bytes(cb);
    out.insert(out.end(), words.begin(), words.end());
    append_u32_be(out, crc32(out));
    return out;
}

Codebook deserialize_codebook(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 15) throw FramingError(FramingError::Reason::Truncated, "codebook: too short");
    if (std::memcmp(bytes.data(), "MRGC", 4) != 0)
        throw FramingError(FramingError::Reason::BadMagic, "codebook: bad magic");
    if (bytes[4] != 0x01) throw FramingError(FramingError::Reason::BadVersion, "codebook: bad version");
    const uint32_t k_count = read_u32_be(bytes.data() + 5);
    const uint16_t dim = read_u16_be(bytes.data() + 9);
    if (k_count < 2 || dim < 1)
        throw FramingError(FramingError::Reason::BadField, "codebook: bad K or dim");
    const size_t expect = 11 + static_cast<size_t>(k_count) * dim * 4 + 4;
    if (bytes.size() != expect)
        throw FramingError(FramingError::Reason::Truncated, "codebook: length mismatch");
    const uint32_t stored = read_u32_be(bytes.data() + bytes.size() - 4);
    if (crc32(bytes.data(), bytes.size() - 4) != stored)
        throw FramingError(FramingError::Reason::CrcMismatch, "codebook: CRC mismatch");

    Codebook cb;
    cb.dim = dim;
    cb.codewords.assign(k_count, std::vector<double>(dim, 0.0));
    const uint8_t* p = bytes.data() + 11;
    for (uint32_t k = 0; k < k_count; ++k)
        for (int c = 0; c < dim; ++c, p += 4)
            cb.codewords[k][c] = static_cast<double>(std::bit_cast<float>(read_u32_be(p)));
    cb.refresh_id();
    cb.validate();
    return cb;
}

void save_codebook(const Codebook& cb, const std::string& path) {
    const auto bytes = serialize_codebook(cb);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("save_codebook: cannot open " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<long>(bytes.size()));
    if (!f) throw IoError("save_codebook: write failed for " + path);
}

Codebook load_codebook(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("load_codebook: cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return deserialize_codebook(bytes);
}

}  // namespace mirage::codec

#pragma once

#include <cstddef>
#include <vector>

#include "mirage/errors.hpp"

namespace mirage {

// Single frame, values in [0,1], row-major (y, x, c).
struct FrameTensor {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> values;

    FrameTensor() = default;
    FrameTensor(int h, int w, int d)
        : height(h), width(w), channels(d), values(static_cast<size_t>(h) * w * d, 0.0) {}

    size_t index(int y, int x, int c) const {
        return (static_cast<size_t>(y) * width + x) * channels + c;
    }
    double at(int y, int x, int c) const { return values[index(y, x, c)]; }
    double& at(int y, int x, int c) { return values[index(y, x, c)]; }

    size_t sample_count() const { return values.size(); }
    size_t pixel_count() const { return static_cast<size_t>(height) * width; }

    bool same_shape(const FrameTensor& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
};

// Frame sequence; all frames share dimensions.
struct VideoTensor {
    std::vector<FrameTensor> frames;
    double fps = 30.0;

    int frame_count() const { return static_cast<int>(frames.size()); }

    void validate() const {
        if (frames.empty()) throw ConfigError("video: no frames");
        for (const auto& f : frames) {
            if (!f.same_shape(frames.front())) throw DimensionError("video: inconsistent frame dimensions");
            if (f.sample_count() == 0) throw DimensionError("video: empty frame");
        }
    }
};

}  // namespace mirage

#pragma once

#include <utility>
#include <vector>

#include "gfuse/error.hpp"
#include "gfuse/matrix.hpp"

namespace gfuse {

// Dense H x W (x C) raster, row-major with interleaved channels.
// Loaded images are normalized to [0,1]; derived rasters (gradient
// magnitudes) may exceed that range.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 1;
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, int c = 1, double fill = 0.0)
        : height(h), width(w), channels(c),
          data(static_cast<size_t>(h) * w * c, fill) {
        if (h < 0 || w < 0 || (c != 1 && c != 3))
            throw ShapeError("image must have 1 or 3 channels and non-negative size");
    }

    double& at(int r, int c, int ch = 0) {
        return data[(static_cast<size_t>(r) * width + c) * channels + ch];
    }
    double at(int r, int c, int ch = 0) const {
        return data[(static_cast<size_t>(r) * width + c) * channels + ch];
    }

    size_t size() const { return data.size(); }
    bool same_shape(const Image& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
    bool in_unit_range() const {
        for (double v : data)
            if (!(v >= 0.0 && v <= 1.0)) return false;
        return true;
    }
};

// Three H x W planes in [0,1]; cb/cr centered at 0.5 for neutral chroma.
struct YcbcrImage {
    Image y, cb, cr;
};

// Full-range BT.601. Round-trips within 1e-6 on [0,1] inputs.
YcbcrImage rgb_to_ycbcr(const Image& rgb);
Image ycbcr_to_rgb(const YcbcrImage& img);
Image ycbcr_to_rgb(const Image& y, const Image& cb, const Image& cr);

// Grayscale view of any image: C==1 passes through, C==3 takes the Y plane.
Image luminance(const Image& img);

void clamp01_inplace(Image& img);

// Number of aligned size-length windows at offsets {0, stride, 2*stride, ...}
// that fit inside dim: floor((dim - size)/stride) + 1.
int crop_count(int dim, int size, int stride);

Image crop_window(const Image& img, int top, int left, int size);

// All aligned size x size window pairs over an ir/vis pair sharing H x W.
std::vector<std::pair<Image, Image>> crop_pairs(const Image& ir, const Image& vis,
                                                int size, int stride);

// Patch grid over a single-channel image, padded to a multiple of `patch` by
// edge replication. Row i of the result is the row-major flattening of patch i
// in raster order: N x patch^2.
VertexFeatures patchify(const Image& img, int patch);

// Exact inverse of patchify: reassembles the padded grid and crops to h x w.
Image unpatchify(const VertexFeatures& vf, int h, int w, int patch);

// Scatter-adds an H x W gradient raster back onto the patch rows; padded
// cells (cropped away by unpatchify) contribute zero.
Matrix unpatchify_backward(const Image& dimg, int patch);

// 3x3 Sobel responses with edge-replicate padding.
void sobel_xy(const Image& img, Image& gx, Image& gy);

// Gradient magnitude |Gx| + |Gy|.
Image sobel_gradient(const Image& img);

// d/dimg of sum(upstream .* sobel_gradient(img)); the subgradient at
// |Gx|=0 or |Gy|=0 is taken as 0.
Image sobel_gradient_backward(const Image& img, const Image& upstream);

}  // namespace gfuse

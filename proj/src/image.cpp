#include "gfuse/image.hpp"

#include <algorithm>
#include <cmath>

namespace gfuse {

namespace {

// Full-range BT.601 luma coefficients.
constexpr double kYR = 0.299, kYG = 0.587, kYB = 0.114;
// Chroma scale so cb/cr land in [0,1] around a 0.5 center for [0,1] RGB.
constexpr double kCbDen = 1.772;  // 2*(1 - kYB)
constexpr double kCrDen = 1.402;  // 2*(1 - kYR)

void require_plane_match(const Image& a, const Image& b, const char* what) {
    if (a.height != b.height || a.width != b.width || a.channels != 1 || b.channels != 1)
        throw ShapeError(std::string(what) + ": planes must be single-channel and same size");
}

inline int clamp_idx(int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); }

const int kSobelX[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
const int kSobelY[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};

}  // namespace

YcbcrImage rgb_to_ycbcr(const Image& rgb) {
    if (rgb.channels != 3) throw ShapeError("rgb_to_ycbcr: input must have 3 channels");
    YcbcrImage out;
    out.y = Image(rgb.height, rgb.width, 1);
    out.cb = Image(rgb.height, rgb.width, 1);
    out.cr = Image(rgb.height, rgb.width, 1);
    for (int r = 0; r < rgb.height; ++r) {
        for (int c = 0; c < rgb.width; ++c) {
            const double R = rgb.at(r, c, 0), G = rgb.at(r, c, 1), B = rgb.at(r, c, 2);
            const double y = kYR * R + kYG * G + kYB * B;
            out.y.at(r, c) = y;
            out.cb.at(r, c) = (B - y) / kCbDen + 0.5;
            out.cr.at(r, c) = (R - y) / kCrDen + 0.5;
        }
    }
    return out;
}

Image ycbcr_to_rgb(const Image& y, const Image& cb, const Image& cr) {
    require_plane_match(y, cb, "ycbcr_to_rgb");
    require_plane_match(y, cr, "ycbcr_to_rgb");
    Image rgb(y.height, y.width, 3);
    for (int r = 0; r < y.height; ++r) {
        for (int c = 0; c < y.width; ++c) {
            const double Y = y.at(r, c);
            const double Pb = cb.at(r, c) - 0.5;
            const double Pr = cr.at(r, c) - 0.5;
            const double R = Y + kCrDen * Pr;
            const double B = Y + kCbDen * Pb;
            const double G = (Y - kYR * R - kYB * B) / kYG;
            rgb.at(r, c, 0) = std::clamp(R, 0.0, 1.0);
            rgb.at(r, c, 1) = std::clamp(G, 0.0, 1.0);
            rgb.at(r, c, 2) = std::clamp(B, 0.0, 1.0);
        }
    }
    return rgb;
}

Image ycbcr_to_rgb(const YcbcrImage& img) { return ycbcr_to_rgb(img.y, img.cb, img.cr); }

Image luminance(const Image& img) {
    if (img.channels == 1) return img;
    return rgb_to_ycbcr(img).y;
}

void clamp01_inplace(Image& img) {
    for (double& v : img.data) v = std::clamp(v, 0.0, 1.0);
}

int crop_count(int dim, int size, int stride) {
    if (size > dim) return 0;
    return (dim - size) / stride + 1;
}

Image crop_window(const Image& img, int top, int left, int size) {
    if (top < 0 || left < 0 || top + size > img.height || left + size > img.width)
        throw SizeError("crop_window: window exceeds image bounds");
    Image out(size, size, img.channels);
    for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c)
            for (int ch = 0; ch < img.channels; ++ch)
                out.at(r, c, ch) = img.at(top + r, left + c, ch);
    return out;
}

std::vector<std::pair<Image, Image>> crop_pairs(const Image& ir, const Image& vis,
                                                int size, int stride) {
    if (ir.height != vis.height || ir.width != vis.width)
        throw ShapeError("crop_pairs: pair dimensions differ");
    if (size > std::min(ir.height, ir.width))
        throw SizeError("crop_pairs: crop size exceeds image");
    if (stride < 1) throw SizeError("crop_pairs: stride must be >= 1");
    std::vector<std::pair<Image, Image>> out;
    for (int y = 0; y + size <= ir.height; y += stride)
        for (int x = 0; x + size <= ir.width; x += stride)
            out.emplace_back(crop_window(ir, y, x, size), crop_window(vis, y, x, size));
    return out;
}

VertexFeatures patchify(const Image& img, int patch) {
    if (img.channels != 1) throw ShapeError("patchify: input must be single-channel");
    if (patch < 1) throw SizeError("patchify: patch must be >= 1");
    const int rows = (img.height + patch - 1) / patch;
    const int cols = (img.width + patch - 1) / patch;
    VertexFeatures vf(rows * cols, patch * patch);
    for (int pr = 0; pr < rows; ++pr) {
        for (int pc = 0; pc < cols; ++pc) {
            double* row = vf.row(pr * cols + pc);
            for (int dr = 0; dr < patch; ++dr) {
                const int r = clamp_idx(pr * patch + dr, img.height - 1);
                for (int dc = 0; dc < patch; ++dc) {
                    const int c = clamp_idx(pc * patch + dc, img.width - 1);
                    row[dr * patch + dc] = img.at(r, c);
                }
            }
        }
    }
    return vf;
}

Image unpatchify(const VertexFeatures& vf, int h, int w, int patch) {
    if (patch < 1) throw SizeError("unpatchify: patch must be >= 1");
    const int rows = (h + patch - 1) / patch;
    const int cols = (w + patch - 1) / patch;
    if (vf.rows() != rows * cols || vf.cols() != patch * patch)
        throw ShapeError("unpatchify: vertex features inconsistent with target grid");
    Image out(h, w, 1);
    for (int pr = 0; pr < rows; ++pr) {
        for (int pc = 0; pc < cols; ++pc) {
            const double* row = vf.row(pr * cols + pc);
            for (int dr = 0; dr < patch; ++dr) {
                const int r = pr * patch + dr;
                if (r >= h) break;
                for (int dc = 0; dc < patch; ++dc) {
                    const int c = pc * patch + dc;
                    if (c >= w) break;
                    out.at(r, c) = row[dr * patch + dc];
                }
            }
        }
    }
    return out;
}

Matrix unpatchify_backward(const Image& dimg, int patch) {
    const int h = dimg.height, w = dimg.width;
    const int rows = (h + patch - 1) / patch;
    const int cols = (w + patch - 1) / patch;
    Matrix dvf(rows * cols, patch * patch);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const int v = (r / patch) * cols + c / patch;
            dvf(v, (r % patch) * patch + c % patch) = dimg.at(r, c);
        }
    }
    return dvf;
}

void sobel_xy(const Image& img, Image& gx, Image& gy) {
    if (img.channels != 1) throw ShapeError("sobel: input must be single-channel");
    gx = Image(img.height, img.width, 1);
    gy = Image(img.height, img.width, 1);
    // grouped as (positive taps) - (negative taps) so that constant inputs
    // cancel exactly, not merely to rounding error
    for (int r = 0; r < img.height; ++r) {
        const int rm = clamp_idx(r - 1, img.height - 1);
        const int rp = clamp_idx(r + 1, img.height - 1);
        for (int c = 0; c < img.width; ++c) {
            const int cm = clamp_idx(c - 1, img.width - 1);
            const int cp = clamp_idx(c + 1, img.width - 1);
            const double right = img.at(rm, cp) + 2.0 * img.at(r, cp) + img.at(rp, cp);
            const double left = img.at(rm, cm) + 2.0 * img.at(r, cm) + img.at(rp, cm);
            const double below = img.at(rp, cm) + 2.0 * img.at(rp, c) + img.at(rp, cp);
            const double above = img.at(rm, cm) + 2.0 * img.at(rm, c) + img.at(rm, cp);
            gx.at(r, c) = right - left;
            gy.at(r, c) = below - above;
        }
    }
}

Image sobel_gradient(const Image& img) {
    Image gx, gy;
    sobel_xy(img, gx, gy);
    Image mag(img.height, img.width, 1);
    for (size_t i = 0; i < mag.size(); ++i)
        mag.data[i] = std::abs(gx.data[i]) + std::abs(gy.data[i]);
    return mag;
}

Image sobel_gradient_backward(const Image& img, const Image& upstream) {
    if (!img.same_shape(upstream) || img.channels != 1)
        throw ShapeError("sobel_gradient_backward: shape mismatch");
    Image gx, gy;
    sobel_xy(img, gx, gy);
    Image dimg(img.height, img.width, 1);
    auto sgn = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            const double ux = upstream.at(r, c) * sgn(gx.at(r, c));
            const double uy = upstream.at(r, c) * sgn(gy.at(r, c));
            if (ux == 0.0 && uy == 0.0) continue;
            for (int u = -1; u <= 1; ++u) {
                const int rr = clamp_idx(r + u, img.height - 1);
                for (int v = -1; v <= 1; ++v) {
                    const int cc = clamp_idx(c + v, img.width - 1);
                    dimg.at(rr, cc) += kSobelX[u + 1][v + 1] * ux + kSobelY[u + 1][v + 1] * uy;
                }
            }
        }
    }
    return dimg;
}

}  // namespace gfuse

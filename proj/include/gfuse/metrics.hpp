#pragma once

#include <string>
#include <vector>

#include "gfuse/image.hpp"

namespace gfuse {

// Evaluation metrics in the two-reference fusion convention: SSIM is the SUM
// over both sources (values above 1 are expected), PSNR and CC are the MEAN.
// All metrics operate on single-channel [0,1] images; color inputs are
// reduced to luminance by callers.
//
// Pinned constants, documented so results are reproducible bit-for-bit:
//   SSIM: 11x11 Gaussian window, sigma 1.5, C1=(0.01*L)^2, C2=(0.03*L)^2, L=1,
//         mean over windows fully inside the image.
//   PSNR: 10*log10(L^2/MSE) with L=1, clamped to [0, 100] dB.
//   CC:   Pearson correlation over flattened pixels.
//   Nabf: Sobel edge strength/orientation, edge-preservation sigmoids
//         Qg = 0.9994/(1+exp(-15(G-0.5))), Qa = 0.9879/(1+exp(-22(A-0.8))),
//         artifact pixels are those whose fused edge strength exceeds both
//         sources; sum of w*(1-Q) there over the total edge weight.

double ssim_pair(const Image& fused, const Image& ref);

// ssim_pair(fused, ir) + ssim_pair(fused, vis)
double ssim_fusion(const Image& fused, const Image& ir, const Image& vis);

double psnr_fusion(const Image& fused, const Image& ir, const Image& vis);

// Mean Pearson correlation against both sources; NaN when either pairing
// involves a zero-variance image (callers flag such pairs).
double cc_fusion(const Image& fused, const Image& ir, const Image& vis);

double nabf(const Image& fused, const Image& ir, const Image& vis);

struct PairMetrics {
    std::string name;
    double ssim = 0.0, psnr = 0.0, cc = 0.0, nabf = 0.0;
};

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;  // population
};

struct MetricReport {
    std::vector<PairMetrics> rows;
    MetricSummary ssim, psnr, cc, nabf;
    int cc_flagged = 0;  // pairs whose CC was undefined (zero variance)
};

struct EvalTriple {
    std::string name;
    Image fused, ir, vis;
};

MetricReport evaluate_corpus(const std::vector<EvalTriple>& triples);

// CSV rows `pair,ssim,psnr,cc,nabf` plus a final `mean±std` summary row;
// 6 significant digits throughout.
void write_report_csv(const MetricReport& report, const std::string& path);

}  // namespace gfuse

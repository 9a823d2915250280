#include "gfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace gfuse {

namespace {

constexpr int kWin = 11;
constexpr int kHalf = kWin / 2;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;  // (0.01*L)^2, L=1
constexpr double kC2 = 0.03 * 0.03;

void require_triple(const Image& f, const Image& a, const Image& b, const char* what) {
    if (!f.same_shape(a) || !f.same_shape(b) || f.channels != 1)
        throw ShapeError(std::string(what) + ": need aligned single-channel images");
}

std::vector<double> gaussian_taps() {
    std::vector<double> w(kWin);
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
        const double u = i - kHalf;
        w[i] = std::exp(-u * u / (2.0 * kSigma * kSigma));
        sum += w[i];
    }
    for (double& v : w) v /= sum;
    return w;
}

// Separable Gaussian filtering evaluated where the full window fits:
// (H-10) x (W-10) map of windowed means.
Matrix filter_valid(const Image& img) {
    static const std::vector<double> taps = gaussian_taps();
    const int h = img.height, w = img.width;
    const int vw = w - 2 * kHalf;
    Matrix horiz(h, vw);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < vw; ++c) {
            double s = 0.0;
            for (int t = 0; t < kWin; ++t) s += taps[t] * img.at(r, c + t);
            horiz(r, c) = s;
        }
    const int vh = h - 2 * kHalf;
    Matrix out(vh, vw);
    for (int r = 0; r < vh; ++r)
        for (int c = 0; c < vw; ++c) {
            double s = 0.0;
            for (int t = 0; t < kWin; ++t) s += taps[t] * horiz(r + t, c);
            out(r, c) = s;
        }
    return out;
}

Image product(const Image& a, const Image& b) {
    Image p(a.height, a.width, 1);
    for (size_t i = 0; i < p.size(); ++i) p.data[i] = a.data[i] * b.data[i];
    return p;
}

double mse(const Image& a, const Image& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return s / static_cast<double>(a.size());
}

double psnr_db(const Image& a, const Image& b) {
    const double m = mse(a, b);
    if (m <= 0.0) return 100.0;
    return std::clamp(10.0 * std::log10(1.0 / m), 0.0, 100.0);
}

double pearson(const Image& a, const Image& b) {
    const size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        ma += a.data[i];
        mb += b.data[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double da = a.data[i] - ma;
        const double db = b.data[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sab / (std::sqrt(saa) * std::sqrt(sbb));
}

// edge-preservation sigmoid constants
constexpr double kGammaG = 0.9994, kKappaG = -15.0, kSigmaG = 0.5;
constexpr double kGammaA = 0.9879, kKappaA = -22.0, kSigmaA = 0.8;
constexpr double kEdgeEps = 1e-12;

struct EdgeMap {
    Image strength, angle;
};

EdgeMap edge_map(const Image& img) {
    Image gx, gy;
    sobel_xy(img, gx, gy);
    EdgeMap e{Image(img.height, img.width, 1), Image(img.height, img.width, 1)};
    for (size_t i = 0; i < gx.size(); ++i) {
        e.strength.data[i] = std::hypot(gx.data[i], gy.data[i]);
        e.angle.data[i] = std::atan2(gy.data[i], gx.data[i]);
    }
    return e;
}

// Q^{XF}: how well the fused image preserves source X's edge at one pixel.
double edge_preservation(double g_src, double a_src, double g_fus, double a_fus) {
    if (g_src < kEdgeEps && g_fus < kEdgeEps) return 1.0;  // no edge on either side
    const double g_rel = std::min(g_src, g_fus) / std::max(g_src, g_fus);
    double delta = std::abs(a_src - a_fus);
    if (delta > M_PI) delta = 2.0 * M_PI - delta;
    if (delta > M_PI / 2.0) delta = M_PI - delta;  // orientation, not direction
    const double a_rel = 1.0 - delta / (M_PI / 2.0);
    const double qg = kGammaG / (1.0 + std::exp(kKappaG * (g_rel - kSigmaG)));
    const double qa = kGammaA / (1.0 + std::exp(kKappaA * (a_rel - kSigmaA)));
    return qg * qa;
}

}  // namespace

double ssim_pair(const Image& fused, const Image& ref) {
    if (!fused.same_shape(ref) || fused.channels != 1)
        throw ShapeError("ssim_pair: need aligned single-channel images");
    if (fused.height < kWin || fused.width < kWin)
        throw SizeError("ssim_pair: image smaller than the 11x11 window");

    Matrix mu_x = filter_valid(fused);
    Matrix mu_y = filter_valid(ref);
    Matrix xx = filter_valid(product(fused, fused));
    Matrix yy = filter_valid(product(ref, ref));
    Matrix xy = filter_valid(product(fused, ref));

    double acc = 0.0;
    for (int r = 0; r < mu_x.rows(); ++r) {
        for (int c = 0; c < mu_x.cols(); ++c) {
            const double mx = mu_x(r, c), my = mu_y(r, c);
            const double sx = xx(r, c) - mx * mx;
            const double sy = yy(r, c) - my * my;
            const double sxy = xy(r, c) - mx * my;
            const double num = (2.0 * mx * my + kC1) * (2.0 * sxy + kC2);
            const double den = (mx * mx + my * my + kC1) * (sx + sy + kC2);
            acc += num / den;
        }
    }
    return acc / (static_cast<double>(mu_x.rows()) * mu_x.cols());
}

double ssim_fusion(const Image& fused, const Image& ir, const Image& vis) {
    require_triple(fused, ir, vis, "ssim_fusion");
    return ssim_pair(fused, ir) + ssim_pair(fused, vis);
}

double psnr_fusion(const Image& fused, const Image& ir, const Image& vis) {
    require_triple(fused, ir, vis, "psnr_fusion");
    return 0.5 * (psnr_db(fused, ir) + psnr_db(fused, vis));
}

double cc_fusion(const Image& fused, const Image& ir, const Image& vis) {
    require_triple(fused, ir, vis, "cc_fusion");
    return 0.5 * (pearson(fused, ir) + pearson(fused, vis));
}

double nabf(const Image& fused, const Image& ir, const Image& vis) {
    require_triple(fused, ir, vis, "nabf");
    EdgeMap f = edge_map(fused);
    EdgeMap a = edge_map(ir);
    EdgeMap b = edge_map(vis);

    double artifact = 0.0, weight = 0.0;
    for (size_t i = 0; i < f.strength.size(); ++i) {
        const double ga = a.strength.data[i], gb = b.strength.data[i], gf = f.strength.data[i];
        weight += ga + gb;
        if (gf > ga && gf > gb) {
            const double qaf = edge_preservation(ga, a.angle.data[i], gf, f.angle.data[i]);
            const double qbf = edge_preservation(gb, b.angle.data[i], gf, f.angle.data[i]);
            artifact += ga * (1.0 - qaf) + gb * (1.0 - qbf);
        }
    }
    return weight > 0.0 ? artifact / weight : 0.0;
}

namespace {

MetricSummary summarize(const std::vector<double>& values) {
    MetricSummary s;
    if (values.empty()) return s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
    return s;
}

}  // namespace

MetricReport evaluate_corpus(const std::vector<EvalTriple>& triples) {
    MetricReport rep;
    std::vector<double> ssims, psnrs, ccs, nabfs;
    for (const auto& t : triples) {
        const Image f = luminance(t.fused);
        const Image a = luminance(t.ir);
        const Image b = luminance(t.vis);
        PairMetrics pm;
        pm.name = t.name;
        pm.ssim = ssim_fusion(f, a, b);
        pm.psnr = psnr_fusion(f, a, b);
        pm.cc = cc_fusion(f, a, b);
        pm.nabf = nabf(f, a, b);
        rep.rows.push_back(pm);
        ssims.push_back(pm.ssim);
        psnrs.push_back(pm.psnr);
        nabfs.push_back(pm.nabf);
        if (std::isnan(pm.cc))
            ++rep.cc_flagged;
        else
            ccs.push_back(pm.cc);
    }
    rep.ssim = summarize(ssims);
    rep.psnr = summarize(psnrs);
    rep.cc = summarize(ccs);
    rep.nabf = summarize(nabfs);
    return rep;
}

void write_report_csv(const MetricReport& report, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw FormatError("report: cannot open " + path);
    std::fputs("pair,ssim,psnr,cc,nabf\n", f);
    for (const auto& r : report.rows)
        std::fprintf(f, "%s,%.6g,%.6g,%.6g,%.6g\n", r.name.c_str(), r.ssim, r.psnr, r.cc, r.nabf);
    std::fprintf(f, "mean±std,%.6g±%.6g,%.6g±%.6g,%.6g±%.6g,%.6g±%.6g\n",
                 report.ssim.mean, report.ssim.stddev, report.psnr.mean, report.psnr.stddev,
                 report.cc.mean, report.cc.stddev, report.nabf.mean, report.nabf.stddev);
    std::fclose(f);
}

}  // namespace gfuse

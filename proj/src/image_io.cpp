#include "gfuse/image_io.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace gfuse {

Image load_image(const std::string& path) {
    cv::Mat m = cv::imread(path, cv::IMREAD_UNCHANGED);
    if (m.empty()) throw FormatError("load_image: cannot decode " + path);

    double scale;
    switch (m.depth()) {
        case CV_8U: scale = 1.0 / 255.0; break;
        case CV_16U: scale = 1.0 / 65535.0; break;
        default: throw FormatError("load_image: unsupported bit depth in " + path);
    }
    if (m.channels() == 4) {  // drop alpha
        cv::Mat rgb(m.rows, m.cols, CV_MAKETYPE(m.depth(), 3));
        const int from_to[] = {0, 0, 1, 1, 2, 2};
        cv::mixChannels(&m, 1, &rgb, 1, from_to, 3);
        m = rgb;
    }
    if (m.channels() != 1 && m.channels() != 3)
        throw FormatError("load_image: unsupported channel count in " + path);

    Image img(m.rows, m.cols, m.channels());
    for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c) {
            if (m.channels() == 1) {
                const double v = m.depth() == CV_8U ? m.at<uint8_t>(r, c) : m.at<uint16_t>(r, c);
                img.at(r, c) = v * scale;
            } else {
                // OpenCV decodes interleaved BGR
                if (m.depth() == CV_8U) {
                    const auto& px = m.at<cv::Vec3b>(r, c);
                    img.at(r, c, 0) = px[2] * scale;
                    img.at(r, c, 1) = px[1] * scale;
                    img.at(r, c, 2) = px[0] * scale;
                } else {
                    const auto& px = m.at<cv::Vec3w>(r, c);
                    img.at(r, c, 0) = px[2] * scale;
                    img.at(r, c, 1) = px[1] * scale;
                    img.at(r, c, 2) = px[0] * scale;
                }
            }
        }
    }
    return img;
}

void save_image(const Image& img, const std::string& path) {
    cv::Mat m(img.height, img.width, img.channels == 1 ? CV_8UC1 : CV_8UC3);
    auto q = [](double v) {
        return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    };
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            if (img.channels == 1) {
                m.at<uint8_t>(r, c) = q(img.at(r, c));
            } else {
                m.at<cv::Vec3b>(r, c) = {q(img.at(r, c, 2)), q(img.at(r, c, 1)), q(img.at(r, c, 0))};
            }
        }
    }
    if (!cv::imwrite(path, m)) throw FormatError("save_image: cannot write " + path);
}

}  // namespace gfuse

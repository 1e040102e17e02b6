#include "xfish/image_io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/videoio.hpp>

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "xfish/imaging.hpp"

namespace xfish {

namespace {

cv::Mat decode(const std::filesystem::path& path, int flags) {
    cv::Mat m = cv::imread(path.string(), flags);
    if (m.empty()) {
        throw std::runtime_error("cannot decode image: " + path.string());
    }
    return m;
}

}  // namespace

RgbU8 read_rgb(const std::filesystem::path& path) {
    cv::Mat bgr = decode(path, cv::IMREAD_COLOR);
    RgbU8 out(bgr.rows, bgr.cols);
    for (int r = 0; r < bgr.rows; ++r) {
        const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(r);
        for (int c = 0; c < bgr.cols; ++c) {
            out.at(r, c, 0) = row[c][2];
            out.at(r, c, 1) = row[c][1];
            out.at(r, c, 2) = row[c][0];
        }
    }
    return out;
}

GrayU8 read_gray(const std::filesystem::path& path) {
    cv::Mat m = decode(path, cv::IMREAD_UNCHANGED);
    if (m.channels() == 1 && m.depth() == CV_8U) {
        GrayU8 out(m.rows, m.cols);
        for (int r = 0; r < m.rows; ++r) {
            const std::uint8_t* row = m.ptr<std::uint8_t>(r);
            std::copy(row, row + m.cols, &out.at(r, 0));
        }
        return out;
    }
    return to_grayscale(read_rgb(path));
}

void write_png(const GrayU8& img, const std::filesystem::path& path) {
    cv::Mat m(img.rows, img.cols, CV_8UC1);
    for (int r = 0; r < img.rows; ++r) {
        const std::uint8_t* row = img.pix.data() + static_cast<std::size_t>(r) * img.cols;
        std::copy(row, row + img.cols, m.ptr<std::uint8_t>(r));
    }
    if (!cv::imwrite(path.string(), m)) {
        throw std::runtime_error("cannot write image: " + path.string());
    }
}

void write_png(const RgbU8& img, const std::filesystem::path& path) {
    cv::Mat m(img.rows, img.cols, CV_8UC3);
    for (int r = 0; r < img.rows; ++r) {
        cv::Vec3b* row = m.ptr<cv::Vec3b>(r);
        for (int c = 0; c < img.cols; ++c) {
            row[c] = cv::Vec3b(img.at(r, c, 2), img.at(r, c, 1), img.at(r, c, 0));
        }
    }
    if (!cv::imwrite(path.string(), m)) {
        throw std::runtime_error("cannot write image: " + path.string());
    }
}

bool is_image_file(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp" || ext == ".tif" ||
           ext == ".tiff";
}

int extract_frames(const std::filesystem::path& video, const std::filesystem::path& out_dir) {
    cv::VideoCapture cap(video.string());
    if (!cap.isOpened()) {
        throw std::runtime_error("cannot open video: " + video.string());
    }
    std::filesystem::create_directories(out_dir);
    cv::Mat frame;
    int count = 0;
    char name[32];
    while (cap.read(frame)) {
        std::snprintf(name, sizeof(name), "frame_%06d.png", count);
        if (!cv::imwrite((out_dir / name).string(), frame)) {
            throw std::runtime_error("cannot write frame under " + out_dir.string());
        }
        ++count;
    }
    return count;
}

}  // namespace xfish

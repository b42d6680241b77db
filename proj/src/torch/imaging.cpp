#include "ddb/torch/imaging.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "ddb/errors.hpp"

namespace fs = std::filesystem;

namespace ddb::img {

torch::Tensor load_image(const fs::path& file) {
    cv::Mat bgr = cv::imread(file.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw IoError("cannot read image: " + file.string());
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    cv::Mat f32;
    rgb.convertTo(f32, CV_32FC3, 1.0 / 255.0);
    auto t = torch::from_blob(f32.data, {rgb.rows, rgb.cols, 3}, torch::kFloat32)
                 .permute({2, 0, 1});
    return t.clone();
}

void save_image(const torch::Tensor& image, const fs::path& file) {
    if (image.dim() != 3 || image.size(0) != 3) throw ShapeError("save_image: expected 3xHxW");
    auto hwc = image.clamp(0, 1).mul(255.0).to(torch::kUInt8).permute({1, 2, 0}).contiguous();
    cv::Mat rgb(static_cast<int>(hwc.size(0)), static_cast<int>(hwc.size(1)), CV_8UC3,
                hwc.data_ptr<std::uint8_t>());
    cv::Mat bgr;
    cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
    if (!cv::imwrite(file.string(), bgr)) throw IoError("cannot write image: " + file.string());
}

void save_gray_png(const GrayImage& image, const fs::path& file) {
    cv::Mat gray(image.height, image.width, CV_8UC1);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            gray.at<std::uint8_t>(y, x) =
                static_cast<std::uint8_t>(std::clamp(image.at(y, x), 0.0f, 1.0f) * 255.0f + 0.5f);
        }
    }
    if (!cv::imwrite(file.string(), gray)) throw IoError("cannot write image: " + file.string());
}

}  // namespace ddb::img

#include "ddb/torch/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "ddb/errors.hpp"

namespace fs = std::filesystem;

namespace ddb::data {

namespace {

// Reads fixed-size records of (label bytes + 3072 image bytes).
void read_batch_file(const fs::path& file, int label_bytes, int label_offset,
                     std::vector<std::uint8_t>& pixels, std::vector<std::int32_t>& labels) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("dataset file not found: " + file.string());
    const std::int64_t record = label_bytes + 3072;
    std::vector<char> buf(record);
    while (in.read(buf.data(), record)) {
        labels.push_back(static_cast<std::uint8_t>(buf[label_offset]));
        pixels.insert(pixels.end(), buf.begin() + label_bytes, buf.end());
    }
    if (in.gcount() != 0) throw IoError("truncated dataset record in " + file.string());
}

ImageDataset assemble(std::vector<std::uint8_t> pixels, std::vector<std::int32_t> labels,
                      int num_classes) {
    const auto n = static_cast<std::int64_t>(labels.size());
    if (n == 0) throw IoError("dataset split is empty");
    auto images = torch::from_blob(pixels.data(), {n, 3, 32, 32}, torch::kUInt8)
                      .to(torch::kFloat32)
                      .div_(255.0);
    ImageDataset ds;
    ds.images = images.clone();
    ds.labels = std::move(labels);
    ds.num_classes = num_classes;
    return ds;
}

}  // namespace

ImageDataset load_dataset(DatasetId dataset, const std::string& data_root, bool train) {
    const fs::path root(data_root);
    std::vector<std::uint8_t> pixels;
    std::vector<std::int32_t> labels;
    switch (dataset) {
        case DatasetId::cifar10: {
            if (train) {
                for (int b = 1; b <= 5; ++b) {
                    read_batch_file(root / ("data_batch_" + std::to_string(b) + ".bin"), 1, 0,
                                    pixels, labels);
                }
            } else {
                read_batch_file(root / "test_batch.bin", 1, 0, pixels, labels);
            }
            return assemble(std::move(pixels), std::move(labels), 10);
        }
        case DatasetId::cifar100: {
            // 2 label bytes per record: coarse then fine; fine is used.
            read_batch_file(root / (train ? "train.bin" : "test.bin"), 2, 1, pixels, labels);
            return assemble(std::move(pixels), std::move(labels), 100);
        }
        case DatasetId::custom: {
            read_batch_file(root / (train ? "train.bin" : "test.bin"), 1, 0, pixels, labels);
            const int num_classes = *std::max_element(labels.begin(), labels.end()) + 1;
            return assemble(std::move(pixels), std::move(labels), num_classes);
        }
    }
    throw ValidationError("unknown dataset id");
}

torch::Tensor normalize(const torch::Tensor& images, DatasetId dataset) {
    static const float cifar_mean[3] = {0.4914f, 0.4822f, 0.4465f};
    static const float cifar_std[3] = {0.2470f, 0.2435f, 0.2616f};
    static const float c100_mean[3] = {0.5071f, 0.4865f, 0.4409f};
    static const float c100_std[3] = {0.2673f, 0.2564f, 0.2762f};
    static const float half[3] = {0.5f, 0.5f, 0.5f};

    const float* mean = half;
    const float* std = half;
    if (dataset == DatasetId::cifar10) { mean = cifar_mean; std = cifar_std; }
    else if (dataset == DatasetId::cifar100) { mean = c100_mean; std = c100_std; }

    auto m = torch::tensor({mean[0], mean[1], mean[2]}).view({1, 3, 1, 1});
    auto s = torch::tensor({std[0], std[1], std[2]}).view({1, 3, 1, 1});
    if (images.dim() == 3) { m = m.squeeze(0); s = s.squeeze(0); }
    return (images - m) / s;
}

}  // namespace ddb::data

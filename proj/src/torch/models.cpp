#include "ddb/torch/models.hpp"

#include <torch/script.h>

#include "ddb/errors.hpp"

namespace ddb::nets {

namespace {

void push_tap(std::vector<torch::Tensor>* taps, const torch::Tensor& t) {
    if (taps) taps->push_back(t);
}

// ------------------------------------------------------------- ResNet18

struct BasicBlockImpl : torch::nn::Module {
    torch::nn::Conv2d conv1{nullptr}, conv2{nullptr};
    torch::nn::BatchNorm2d bn1{nullptr}, bn2{nullptr};
    torch::nn::Sequential shortcut{nullptr};

    BasicBlockImpl(int in_ch, int out_ch, int stride) {
        conv1 = register_module(
            "conv1", torch::nn::Conv2d(
                         torch::nn::Conv2dOptions(in_ch, out_ch, 3).stride(stride).padding(1).bias(false)));
        bn1 = register_module("bn1", torch::nn::BatchNorm2d(out_ch));
        conv2 = register_module(
            "conv2",
            torch::nn::Conv2d(torch::nn::Conv2dOptions(out_ch, out_ch, 3).stride(1).padding(1).bias(false)));
        bn2 = register_module("bn2", torch::nn::BatchNorm2d(out_ch));
        if (stride != 1 || in_ch != out_ch) {
            shortcut = torch::nn::Sequential(
                torch::nn::Conv2d(torch::nn::Conv2dOptions(in_ch, out_ch, 1).stride(stride).bias(false)),
                torch::nn::BatchNorm2d(out_ch));
            register_module("shortcut", shortcut);
        }
    }

    torch::Tensor forward_collect(torch::Tensor x, std::vector<torch::Tensor>* taps) {
        auto out = torch::relu(bn1->forward(conv1->forward(x)));
        push_tap(taps, out);
        out = bn2->forward(conv2->forward(out));
        auto identity = shortcut.is_empty() ? x : shortcut->forward(x);
        out = torch::relu(out + identity);
        push_tap(taps, out);
        return out;
    }
};
TORCH_MODULE(BasicBlock);

class ResNet18Impl : public ConvNet {
  public:
    explicit ResNet18Impl(int num_classes) {
        stem_ = register_module(
            "stem", torch::nn::Conv2d(torch::nn::Conv2dOptions(3, 64, 3).stride(1).padding(1).bias(false)));
        stem_bn_ = register_module("stem_bn", torch::nn::BatchNorm2d(64));
        int in_ch = 64;
        const int widths[4] = {64, 128, 256, 512};
        for (int stage = 0; stage < 4; ++stage) {
            const int stride = stage == 0 ? 1 : 2;
            blocks_.push_back(BasicBlock(in_ch, widths[stage], stride));
            blocks_.push_back(BasicBlock(widths[stage], widths[stage], 1));
            in_ch = widths[stage];
        }
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            register_module("block" + std::to_string(i), blocks_[i]);
        }
        fc_ = register_module("fc", torch::nn::Linear(512, num_classes));
        channels_ = {64};
        for (int stage = 0; stage < 4; ++stage) {
            for (int c = 0; c < 4; ++c) channels_.push_back(widths[stage]);
        }
    }

    torch::Tensor forward_collect(torch::Tensor x, std::vector<torch::Tensor>* taps) override {
        auto out = torch::relu(stem_bn_->forward(stem_->forward(x)));
        push_tap(taps, out);
        for (auto& block : blocks_) out = block->forward_collect(out, taps);
        out = torch::adaptive_avg_pool2d(out, {1, 1}).flatten(1);
        return fc_->forward(out);
    }

    int num_taps() const override { return 17; }
    torch::nn::Conv2d first_conv() override { return stem_; }
    int tap_channels(int tap_index) const override { return channels_[tap_index - 1]; }

  private:
    torch::nn::Conv2d stem_{nullptr};
    torch::nn::BatchNorm2d stem_bn_{nullptr};
    std::vector<BasicBlock> blocks_;
    torch::nn::Linear fc_{nullptr};
    std::vector<int> channels_;
};

// -------------------------------------------------------------- TinyCNN

class TinyCnnImpl : public ConvNet {
  public:
    explicit TinyCnnImpl(int num_classes, int width = 32) {
        const int w2 = 2 * width;
        const int chans[4] = {width, width, w2, w2};
        int in_ch = 3;
        for (int i = 0; i < 4; ++i) {
            convs_.push_back(register_module(
                "conv" + std::to_string(i),
                torch::nn::Conv2d(torch::nn::Conv2dOptions(in_ch, chans[i], 3).padding(1).bias(false))));
            bns_.push_back(register_module("bn" + std::to_string(i), torch::nn::BatchNorm2d(chans[i])));
            in_ch = chans[i];
            channels_.push_back(chans[i]);
        }
        fc_ = register_module("fc", torch::nn::Linear(w2, num_classes));
    }

    torch::Tensor forward_collect(torch::Tensor x, std::vector<torch::Tensor>* taps) override {
        auto out = x;
        for (int i = 0; i < 4; ++i) {
            out = torch::relu(bns_[i]->forward(convs_[i]->forward(out)));
            push_tap(taps, out);
            if (i == 1 || i == 3) out = torch::max_pool2d(out, 2);
        }
        out = torch::adaptive_avg_pool2d(out, {1, 1}).flatten(1);
        return fc_->forward(out);
    }

    int num_taps() const override { return 4; }
    torch::nn::Conv2d first_conv() override { return convs_[0]; }
    int tap_channels(int tap_index) const override { return channels_[tap_index - 1]; }

  private:
    std::vector<torch::nn::Conv2d> convs_;
    std::vector<torch::nn::BatchNorm2d> bns_;
    torch::nn::Linear fc_{nullptr};
    std::vector<int> channels_;
};

// ---------------------------------------------------------- MobileNetV2

struct InvertedResidualImpl : torch::nn::Module {
    torch::nn::Sequential layers;
    bool use_residual = false;

    InvertedResidualImpl(int in_ch, int out_ch, int stride, int expand) {
        use_residual = stride == 1 && in_ch == out_ch;
        const int hidden = in_ch * expand;
        if (expand != 1) {
            layers->push_back(torch::nn::Conv2d(torch::nn::Conv2dOptions(in_ch, hidden, 1).bias(false)));
            layers->push_back(torch::nn::BatchNorm2d(hidden));
            layers->push_back(torch::nn::Functional(torch::relu6));
        }
        layers->push_back(torch::nn::Conv2d(
            torch::nn::Conv2dOptions(hidden, hidden, 3).stride(stride).padding(1).groups(hidden).bias(false)));
        layers->push_back(torch::nn::BatchNorm2d(hidden));
        layers->push_back(torch::nn::Functional(torch::relu6));
        layers->push_back(torch::nn::Conv2d(torch::nn::Conv2dOptions(hidden, out_ch, 1).bias(false)));
        layers->push_back(torch::nn::BatchNorm2d(out_ch));
        register_module("layers", layers);
    }

    torch::Tensor forward(torch::Tensor x) {
        auto out = layers->forward(x);
        return use_residual ? x + out : out;
    }
};
TORCH_MODULE(InvertedResidual);

class MobileNetV2Impl : public ConvNet {
  public:
    explicit MobileNetV2Impl(int num_classes) {
        stem_ = register_module(
            "stem", torch::nn::Conv2d(torch::nn::Conv2dOptions(3, 32, 3).stride(1).padding(1).bias(false)));
        stem_bn_ = register_module("stem_bn", torch::nn::BatchNorm2d(32));
        channels_ = {32};
        // (expand, out, repeats, stride); first two strides flattened for 32x32 inputs
        const int cfg[7][4] = {{1, 16, 1, 1},  {6, 24, 2, 1},  {6, 32, 3, 2}, {6, 64, 4, 2},
                               {6, 96, 3, 1},  {6, 160, 3, 2}, {6, 320, 1, 1}};
        int in_ch = 32;
        for (const auto& [expand, out_ch, repeats, stride] : cfg) {
            for (int r = 0; r < repeats; ++r) {
                blocks_.push_back(InvertedResidual(in_ch, out_ch, r == 0 ? stride : 1, expand));
                in_ch = out_ch;
                channels_.push_back(out_ch);
            }
        }
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            register_module("block" + std::to_string(i), blocks_[i]);
        }
        head_ = register_module("head",
                                torch::nn::Conv2d(torch::nn::Conv2dOptions(in_ch, 1280, 1).bias(false)));
        head_bn_ = register_module("head_bn", torch::nn::BatchNorm2d(1280));
        channels_.push_back(1280);
        fc_ = register_module("fc", torch::nn::Linear(1280, num_classes));
    }

    torch::Tensor forward_collect(torch::Tensor x, std::vector<torch::Tensor>* taps) override {
        auto out = torch::relu6(stem_bn_->forward(stem_->forward(x)));
        push_tap(taps, out);
        for (auto& block : blocks_) {
            out = block->forward(out);
            push_tap(taps, out);
        }
        out = torch::relu6(head_bn_->forward(head_->forward(out)));
        push_tap(taps, out);
        out = torch::adaptive_avg_pool2d(out, {1, 1}).flatten(1);
        return fc_->forward(out);
    }

    int num_taps() const override { return static_cast<int>(channels_.size()); }
    torch::nn::Conv2d first_conv() override { return stem_; }
    int tap_channels(int tap_index) const override { return channels_[tap_index - 1]; }

  private:
    torch::nn::Conv2d stem_{nullptr}, head_{nullptr};
    torch::nn::BatchNorm2d stem_bn_{nullptr}, head_bn_{nullptr};
    std::vector<InvertedResidual> blocks_;
    torch::nn::Linear fc_{nullptr};
    std::vector<int> channels_;
};

// ---------------------------------------------------------- DenseNet121

struct DenseLayerImpl : torch::nn::Module {
    torch::nn::BatchNorm2d bn1{nullptr}, bn2{nullptr};
    torch::nn::Conv2d conv1{nullptr}, conv2{nullptr};

    DenseLayerImpl(int in_ch, int growth) {
        bn1 = register_module("bn1", torch::nn::BatchNorm2d(in_ch));
        conv1 = register_module(
            "conv1", torch::nn::Conv2d(torch::nn::Conv2dOptions(in_ch, 4 * growth, 1).bias(false)));
        bn2 = register_module("bn2", torch::nn::BatchNorm2d(4 * growth));
        conv2 = register_module(
            "conv2", torch::nn::Conv2d(torch::nn::Conv2dOptions(4 * growth, growth, 3).padding(1).bias(false)));
    }

    torch::Tensor forward(torch::Tensor x) {
        auto out = conv1->forward(torch::relu(bn1->forward(x)));
        out = conv2->forward(torch::relu(bn2->forward(out)));
        return torch::cat({x, out}, 1);
    }
};
TORCH_MODULE(DenseLayer);

struct TransitionImpl : torch::nn::Module {
    torch::nn::BatchNorm2d bn{nullptr};
    torch::nn::Conv2d conv{nullptr};

    TransitionImpl(int in_ch, int out_ch) {
        bn = register_module("bn", torch::nn::BatchNorm2d(in_ch));
        conv = register_module("conv",
                               torch::nn::Conv2d(torch::nn::Conv2dOptions(in_ch, out_ch, 1).bias(false)));
    }

    torch::Tensor forward(torch::Tensor x) {
        return torch::avg_pool2d(conv->forward(torch::relu(bn->forward(x))), 2);
    }
};
TORCH_MODULE(Transition);

class DenseNet121Impl : public ConvNet {
  public:
    explicit DenseNet121Impl(int num_classes) {
        const int growth = 32;
        stem_ = register_module(
            "stem", torch::nn::Conv2d(torch::nn::Conv2dOptions(3, 64, 3).stride(1).padding(1).bias(false)));
        stem_bn_ = register_module("stem_bn", torch::nn::BatchNorm2d(64));
        channels_ = {64};
        const int block_sizes[4] = {6, 12, 24, 16};
        int ch = 64;
        for (int b = 0; b < 4; ++b) {
            torch::nn::Sequential block;
            for (int l = 0; l < block_sizes[b]; ++l) {
                block->push_back(DenseLayer(ch, growth));
                ch += growth;
            }
            dense_blocks_.push_back(block);
            register_module("dense" + std::to_string(b), block);
            channels_.push_back(ch);
            if (b < 3) {
                transitions_.push_back(Transition(ch, ch / 2));
                register_module("trans" + std::to_string(b), transitions_.back());
                ch /= 2;
                channels_.push_back(ch);
            }
        }
        final_bn_ = register_module("final_bn", torch::nn::BatchNorm2d(ch));
        fc_ = register_module("fc", torch::nn::Linear(ch, num_classes));
    }

    torch::Tensor forward_collect(torch::Tensor x, std::vector<torch::Tensor>* taps) override {
        auto out = torch::relu(stem_bn_->forward(stem_->forward(x)));
        push_tap(taps, out);
        for (int b = 0; b < 4; ++b) {
            out = dense_blocks_[b]->forward(out);
            if (b < 3) {
                push_tap(taps, out);
                out = transitions_[b]->forward(out);
                push_tap(taps, out);
            } else {
                out = torch::relu(final_bn_->forward(out));
                push_tap(taps, out);
            }
        }
        out = torch::adaptive_avg_pool2d(out, {1, 1}).flatten(1);
        return fc_->forward(out);
    }

    int num_taps() const override { return 8; }
    torch::nn::Conv2d first_conv() override { return stem_; }
    int tap_channels(int tap_index) const override { return channels_[tap_index - 1]; }

  private:
    torch::nn::Conv2d stem_{nullptr};
    torch::nn::BatchNorm2d stem_bn_{nullptr}, final_bn_{nullptr};
    std::vector<torch::nn::Sequential> dense_blocks_;
    std::vector<Transition> transitions_;
    torch::nn::Linear fc_{nullptr};
    std::vector<int> channels_;
};

// ------------------------------------------------------- EfficientNetB0

struct SqueezeExciteImpl : torch::nn::Module {
    torch::nn::Conv2d reduce{nullptr}, expand{nullptr};

    SqueezeExciteImpl(int ch, int squeezed) {
        reduce = register_module("reduce", torch::nn::Conv2d(torch::nn::Conv2dOptions(ch, squeezed, 1)));
        expand = register_module("expand", torch::nn::Conv2d(torch::nn::Conv2dOptions(squeezed, ch, 1)));
    }

    torch::Tensor forward(torch::Tensor x) {
        auto s = torch::adaptive_avg_pool2d(x, {1, 1});
        s = torch::silu(reduce->forward(s));
        s = torch::sigmoid(expand->forward(s));
        return x * s;
    }
};
TORCH_MODULE(SqueezeExcite);

struct MBConvImpl : torch::nn::Module {
    torch::nn::Conv2d expand_conv{nullptr}, dw_conv{nullptr}, project{nullptr};
    torch::nn::BatchNorm2d expand_bn{nullptr}, dw_bn{nullptr}, project_bn{nullptr};
    SqueezeExcite se{nullptr};
    bool has_expand = false;
    bool use_residual = false;

    MBConvImpl(int in_ch, int out_ch, int stride, int expand, int kernel) {
        use_residual = stride == 1 && in_ch == out_ch;
        const int hidden = in_ch * expand;
        has_expand = expand != 1;
        if (has_expand) {
            expand_conv = register_module(
                "expand_conv", torch::nn::Conv2d(torch::nn::Conv2dOptions(in_ch, hidden, 1).bias(false)));
            expand_bn = register_module("expand_bn", torch::nn::BatchNorm2d(hidden));
        }
        dw_conv = register_module(
            "dw_conv", torch::nn::Conv2d(torch::nn::Conv2dOptions(hidden, hidden, kernel)
                                             .stride(stride)
                                             .padding(kernel / 2)
                                             .groups(hidden)
                                             .bias(false)));
        dw_bn = register_module("dw_bn", torch::nn::BatchNorm2d(hidden));
        se = register_module("se", SqueezeExcite(hidden, std::max(1, in_ch / 4)));
        project = register_module(
            "project", torch::nn::Conv2d(torch::nn::Conv2dOptions(hidden, out_ch, 1).bias(false)));
        project_bn = register_module("project_bn", torch::nn::BatchNorm2d(out_ch));
    }

    torch::Tensor forward(torch::Tensor x) {
        auto out = x;
        if (has_expand) out = torch::silu(expand_bn->forward(expand_conv->forward(out)));
        out = torch::silu(dw_bn->forward(dw_conv->forward(out)));
        out = se->forward(out);
        out = project_bn->forward(project->forward(out));
        return use_residual ? x + out : out;
    }
};
TORCH_MODULE(MBConv);

class EfficientNetB0Impl : public ConvNet {
  public:
    explicit EfficientNetB0Impl(int num_classes) {
        stem_ = register_module(
            "stem", torch::nn::Conv2d(torch::nn::Conv2dOptions(3, 32, 3).stride(1).padding(1).bias(false)));
        stem_bn_ = register_module("stem_bn", torch::nn::BatchNorm2d(32));
        channels_ = {32};
        // (expand, out, repeats, stride, kernel); early strides flattened for 32x32
        const int cfg[7][5] = {{1, 16, 1, 1, 3},  {6, 24, 2, 1, 3},  {6, 40, 2, 2, 5},
                               {6, 80, 3, 2, 3},  {6, 112, 3, 1, 5}, {6, 192, 4, 2, 5},
                               {6, 320, 1, 1, 3}};
        int in_ch = 32;
        for (const auto& [expand, out_ch, repeats, stride, kernel] : cfg) {
            for (int r = 0; r < repeats; ++r) {
                blocks_.push_back(MBConv(in_ch, out_ch, r == 0 ? stride : 1, expand, kernel));
                in_ch = out_ch;
                channels_.push_back(out_ch);
            }
        }
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            register_module("block" + std::to_string(i), blocks_[i]);
        }
        head_ = register_module("head",
                                torch::nn::Conv2d(torch::nn::Conv2dOptions(in_ch, 1280, 1).bias(false)));
        head_bn_ = register_module("head_bn", torch::nn::BatchNorm2d(1280));
        channels_.push_back(1280);
        fc_ = register_module("fc", torch::nn::Linear(1280, num_classes));
    }

    torch::Tensor forward_collect(torch::Tensor x, std::vector<torch::Tensor>* taps) override {
        auto out = torch::silu(stem_bn_->forward(stem_->forward(x)));
        push_tap(taps, out);
        for (auto& block : blocks_) {
            out = block->forward(out);
            push_tap(taps, out);
        }
        out = torch::silu(head_bn_->forward(head_->forward(out)));
        push_tap(taps, out);
        out = torch::adaptive_avg_pool2d(out, {1, 1}).flatten(1);
        return fc_->forward(out);
    }

    int num_taps() const override { return static_cast<int>(channels_.size()); }
    torch::nn::Conv2d first_conv() override { return stem_; }
    int tap_channels(int tap_index) const override { return channels_[tap_index - 1]; }

  private:
    torch::nn::Conv2d stem_{nullptr}, head_{nullptr};
    torch::nn::BatchNorm2d stem_bn_{nullptr}, head_bn_{nullptr};
    std::vector<MBConv> blocks_;
    torch::nn::Linear fc_{nullptr};
    std::vector<int> channels_;
};

}  // namespace

std::shared_ptr<ConvNet> make_model(ArchitectureId arch, int num_classes) {
    switch (arch) {
        case ArchitectureId::resnet18: return std::make_shared<ResNet18Impl>(num_classes);
        case ArchitectureId::tinycnn: return std::make_shared<TinyCnnImpl>(num_classes);
        case ArchitectureId::mobilenetv2: return std::make_shared<MobileNetV2Impl>(num_classes);
        case ArchitectureId::densenet121: return std::make_shared<DenseNet121Impl>(num_classes);
        case ArchitectureId::efficientnetb0: return std::make_shared<EfficientNetB0Impl>(num_classes);
    }
    throw ValidationError("unknown architecture id");
}

int resolve_tap_index(const ConvNet& model, int layer_index) {
    if (layer_index == -1) return model.num_taps();
    if (layer_index < 1 || layer_index > model.num_taps()) {
        throw LookupError("invalid conv layer index " + std::to_string(layer_index) +
                          " (model has " + std::to_string(model.num_taps()) + " tap points)");
    }
    return layer_index;
}

int load_pretrained(ConvNet& model, const std::string& torchscript_path) {
    torch::jit::script::Module source;
    try {
        source = torch::jit::load(torchscript_path);
    } catch (const c10::Error& e) {
        throw IoError("cannot load pretrained weights from " + torchscript_path);
    }

    // Suffix-name and shape matching; the CIFAR stem usually has no match
    // in an ImageNet checkpoint and keeps its fresh initialization.
    std::vector<std::pair<std::string, torch::Tensor>> source_tensors;
    for (const auto& p : source.named_parameters()) source_tensors.emplace_back(p.name, p.value);
    for (const auto& b : source.named_buffers()) source_tensors.emplace_back(b.name, b.value);

    int copied = 0;
    torch::NoGradGuard no_grad;
    auto try_copy = [&](const std::string& name, torch::Tensor dest) {
        for (const auto& [sname, svalue] : source_tensors) {
            const auto tail = sname.size() >= name.size()
                                  ? sname.substr(sname.size() - name.size())
                                  : std::string();
            if ((sname == name || tail == name) && svalue.sizes() == dest.sizes()) {
                dest.copy_(svalue.to(dest.dtype()));
                ++copied;
                return;
            }
        }
    };
    for (const auto& p : model.named_parameters()) try_copy(p.key(), p.value());
    for (const auto& b : model.named_buffers()) try_copy(b.key(), b.value());
    return copied;
}

}  // namespace ddb::nets

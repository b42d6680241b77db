#pragma once

#include <memory>
#include <vector>

#include <torch/torch.h>

#include "ddb/run_store.hpp"

namespace ddb::nets {

// A classifier whose convolutional activations can be tapped by layer
// index. Tap indices are 1-based and count conv layers in forward order
// (projection shortcuts excluded); index -1 aliases the final conv layer.
// Taps are taken after the layer's batch norm and nonlinearity, i.e. the
// feature map the next layer consumes.
class ConvNet : public torch::nn::Module {
  public:
    ~ConvNet() override = default;

    // Forward to logits. When taps is non-null it receives one feature map
    // per conv layer, in tap-index order (taps->at(i) is tap index i+1).
    virtual torch::Tensor forward_collect(torch::Tensor x,
                                          std::vector<torch::Tensor>* taps) = 0;
    torch::Tensor forward(torch::Tensor x) { return forward_collect(std::move(x), nullptr); }

    virtual int num_taps() const = 0;
    virtual torch::nn::Conv2d first_conv() = 0;

    // Channel count at a tap, for validation without a forward pass.
    virtual int tap_channels(int tap_index) const = 0;
};

// 32x32 RGB input models. init_mode=pretrained loads name+shape matched
// parameters from a TorchScript file <arch>.pt under pretrained_dir; the
// CIFAR-adapted stem keeps its fresh initialization when shapes differ.
std::shared_ptr<ConvNet> make_model(ArchitectureId arch, int num_classes);

// Resolve -1 to the final tap and validate the index.
int resolve_tap_index(const ConvNet& model, int layer_index);

// Best-effort parameter transfer from a TorchScript module saved by the
// Python side. Returns the number of tensors copied.
int load_pretrained(ConvNet& model, const std::string& torchscript_path);

}  // namespace ddb::nets

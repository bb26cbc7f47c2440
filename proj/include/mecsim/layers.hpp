#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mecsim/rng.hpp"

namespace mecsim {

/// One differentiable stage. forward caches whatever backward needs, so each
/// backward call must follow the forward call of the same sample. backward
/// ACCUMULATES parameter gradients; callers zero them between optimizer steps.
class Layer {
public:
    virtual ~Layer() = default;
    virtual std::vector<double> forward(const std::vector<double>& x) = 0;
    virtual std::vector<double> backward(const std::vector<double>& grad_out) = 0;
    virtual std::size_t in_size() const = 0;
    virtual std::size_t out_size() const = 0;
    virtual std::string kind() const = 0;
    /// Layer-shape line for checkpoints, e.g. "dense 128 32".
    virtual std::string spec() const = 0;
    virtual void init(Rng& rng) = 0;
    virtual std::vector<double>* weights() { return nullptr; }
    virtual std::vector<double>* bias() { return nullptr; }
    virtual std::vector<double>* weight_grads() { return nullptr; }
    virtual std::vector<double>* bias_grads() { return nullptr; }
};

/// y = W x + b with W stored row-major (out x in).
class Dense : public Layer {
public:
    Dense(int in, int out);
    std::vector<double> forward(const std::vector<double>& x) override;
    std::vector<double> backward(const std::vector<double>& grad_out) override;
    std::size_t in_size() const override { return static_cast<std::size_t>(in_); }
    std::size_t out_size() const override { return static_cast<std::size_t>(out_); }
    std::string kind() const override { return "dense"; }
    std::string spec() const override;
    void init(Rng& rng) override;
    std::vector<double>* weights() override { return &w_; }
    std::vector<double>* bias() override { return &b_; }
    std::vector<double>* weight_grads() override { return &gw_; }
    std::vector<double>* bias_grads() override { return &gb_; }

private:
    int in_, out_;
    std::vector<double> w_, b_, gw_, gb_, x_;
};

/// Same-length 1d convolution over channel-major input x[c * W + t],
/// stride 1, zero padding. Weights are indexed [oc][ic][j].
class Conv1d : public Layer {
public:
    Conv1d(int in_ch, int out_ch, int kernel, int width, int pad);
    std::vector<double> forward(const std::vector<double>& x) override;
    std::vector<double> backward(const std::vector<double>& grad_out) override;
    std::size_t in_size() const override { return static_cast<std::size_t>(in_ch_) * width_; }
    std::size_t out_size() const override { return static_cast<std::size_t>(out_ch_) * width_; }
    std::string kind() const override { return "conv1d"; }
    std::string spec() const override;
    void init(Rng& rng) override;
    std::vector<double>* weights() override { return &w_; }
    std::vector<double>* bias() override { return &b_; }
    std::vector<double>* weight_grads() override { return &gw_; }
    std::vector<double>* bias_grads() override { return &gb_; }

private:
    int in_ch_, out_ch_, k_, width_, pad_;
    std::vector<double> w_, b_, gw_, gb_, x_;
};

class Relu : public Layer {
public:
    explicit Relu(int size);
    std::vector<double> forward(const std::vector<double>& x) override;
    std::vector<double> backward(const std::vector<double>& grad_out) override;
    std::size_t in_size() const override { return static_cast<std::size_t>(size_); }
    std::size_t out_size() const override { return static_cast<std::size_t>(size_); }
    std::string kind() const override { return "relu"; }
    std::string spec() const override;
    void init(Rng&) override {}

private:
    int size_;
    std::vector<double> x_;
};

class Network {
public:
    Network() = default;
    Network(Network&&) = default;
    Network& operator=(Network&&) = default;

    void add(std::unique_ptr<Layer> layer);
    std::vector<double> forward(const std::vector<double>& x);
    /// Returns d loss / d input for the sample of the last forward call.
    std::vector<double> backward(const std::vector<double>& grad_out);
    void init(Rng& rng);
    void zero_grads();
    std::size_t n_layers() const { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_[i]; }
    const Layer& layer(std::size_t i) const { return *layers_[i]; }
    std::size_t in_size() const;
    std::size_t out_size() const;
    std::size_t param_count() const;
    /// Stable flat views over all parameters and their gradients, layer order.
    std::vector<double*> param_view();
    std::vector<double*> grad_view();

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

/// Scales the joint gradient of the given networks down to max_norm (L2)
/// when it exceeds it. Returns the pre-clip norm.
double clip_grad_norm(std::initializer_list<Network*> nets, double max_norm);

/// Classic momentum: v = momentum * v + g; w -= lr * v.
class SgdMomentum {
public:
    SgdMomentum(double lr, double momentum) : lr_(lr), momentum_(momentum) {}
    void step(Network& net);

private:
    double lr_, momentum_;
    std::vector<double> velocity_;
};

/// Versioned text checkpoint; hexfloat parameters reload bit-identically.
std::string save_network(const Network& net);
Network load_network(const std::string& text, std::string_view origin);
void save_network_file(const Network& net, const std::string& path);
Network load_network_file(const std::string& path);

}  // namespace mecsim

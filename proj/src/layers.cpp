#include "mecsim/layers.hpp"

#include <algorithm>
#include <cmath>

#include "mecsim/csv.hpp"
#include "mecsim/error.hpp"
#include "mecsim/text.hpp"

namespace mecsim {

namespace {

// Glorot uniform bound. Keeps early activations near unit scale so the first
// epochs of the tiny nets here neither saturate nor vanish.
double glorot_bound(int fan_in, int fan_out) { return std::sqrt(6.0 / (fan_in + fan_out)); }

void check_size(const std::vector<double>& v, std::size_t want, const char* what, const std::string& kind) {
    if (v.size() != want) {
        fail(Errc::InvalidArgument, kind + ": expected " + std::string(what) + " of size " + format_u64(want) +
                                        ", got " + format_u64(v.size()));
    }
}

}  // namespace

Dense::Dense(int in, int out) : in_(in), out_(out) {
    if (in < 1 || out < 1) fail(Errc::InvalidArgument, "dense layer sizes must be positive");
    w_.assign(static_cast<std::size_t>(in) * out, 0.0);
    b_.assign(static_cast<std::size_t>(out), 0.0);
    gw_.assign(w_.size(), 0.0);
    gb_.assign(b_.size(), 0.0);
}

std::vector<double> Dense::forward(const std::vector<double>& x) {
    check_size(x, in_size(), "input", kind());
    x_ = x;
    std::vector<double> y(static_cast<std::size_t>(out_));
    for (int o = 0; o < out_; ++o) {
        double acc = b_[static_cast<std::size_t>(o)];
        const double* row = &w_[static_cast<std::size_t>(o) * in_];
        for (int i = 0; i < in_; ++i) acc += row[i] * x[static_cast<std::size_t>(i)];
        y[static_cast<std::size_t>(o)] = acc;
    }
    return y;
}

std::vector<double> Dense::backward(const std::vector<double>& go) {
    check_size(go, out_size(), "gradient", kind());
    check_size(x_, in_size(), "cached input", kind());
    std::vector<double> gx(static_cast<std::size_t>(in_), 0.0);
    for (int o = 0; o < out_; ++o) {
        const double g = go[static_cast<std::size_t>(o)];
        gb_[static_cast<std::size_t>(o)] += g;
        const double* row = &w_[static_cast<std::size_t>(o) * in_];
        double* grow = &gw_[static_cast<std::size_t>(o) * in_];
        for (int i = 0; i < in_; ++i) {
            grow[i] += g * x_[static_cast<std::size_t>(i)];
            gx[static_cast<std::size_t>(i)] += g * row[i];
        }
    }
    return gx;
}

std::string Dense::spec() const { return "dense " + format_int(in_) + " " + format_int(out_); }

void Dense::init(Rng& rng) {
    const double a = glorot_bound(in_, out_);
    for (double& w : w_) w = rng.uniform(-a, a);
    for (double& b : b_) b = 0.0;
}

Conv1d::Conv1d(int in_ch, int out_ch, int kernel, int width, int pad)
    : in_ch_(in_ch), out_ch_(out_ch), k_(kernel), width_(width), pad_(pad) {
    if (in_ch < 1 || out_ch < 1 || kernel < 1 || width < 1 || pad < 0) {
        fail(Errc::InvalidArgument, "conv1d shape parameters must be positive (pad may be 0)");
    }
    if (width + 2 * pad < kernel) fail(Errc::InvalidArgument, "conv1d kernel wider than padded input");
    if (width + 2 * pad - kernel + 1 != width) {
        fail(Errc::InvalidArgument, "conv1d must preserve length: need 2*pad == kernel-1");
    }
    w_.assign(static_cast<std::size_t>(out_ch) * in_ch * kernel, 0.0);
    b_.assign(static_cast<std::size_t>(out_ch), 0.0);
    gw_.assign(w_.size(), 0.0);
    gb_.assign(b_.size(), 0.0);
}

std::vector<double> Conv1d::forward(const std::vector<double>& x) {
    check_size(x, in_size(), "input", kind());
    x_ = x;
    std::vector<double> y(out_size(), 0.0);
    for (int oc = 0; oc < out_ch_; ++oc) {
        for (int t = 0; t < width_; ++t) {
            double acc = b_[static_cast<std::size_t>(oc)];
            for (int ic = 0; ic < in_ch_; ++ic) {
                const double* wrow = &w_[(static_cast<std::size_t>(oc) * in_ch_ + ic) * k_];
                const double* xrow = &x[static_cast<std::size_t>(ic) * width_];
                for (int j = 0; j < k_; ++j) {
                    const int src = t + j - pad_;
                    if (src >= 0 && src < width_) acc += wrow[j] * xrow[src];
                }
            }
            y[static_cast<std::size_t>(oc) * width_ + t] = acc;
        }
    }
    return y;
}

std::vector<double> Conv1d::backward(const std::vector<double>& go) {
    check_size(go, out_size(), "gradient", kind());
    check_size(x_, in_size(), "cached input", kind());
    std::vector<double> gx(in_size(), 0.0);
    for (int oc = 0; oc < out_ch_; ++oc) {
        for (int t = 0; t < width_; ++t) {
            const double g = go[static_cast<std::size_t>(oc) * width_ + t];
            gb_[static_cast<std::size_t>(oc)] += g;
            for (int ic = 0; ic < in_ch_; ++ic) {
                const double* wrow = &w_[(static_cast<std::size_t>(oc) * in_ch_ + ic) * k_];
                double* gwrow = &gw_[(static_cast<std::size_t>(oc) * in_ch_ + ic) * k_];
                for (int j = 0; j < k_; ++j) {
                    const int src = t + j - pad_;
                    if (src < 0 || src >= width_) continue;
                    gwrow[j] += g * x_[static_cast<std::size_t>(ic) * width_ + src];
                    gx[static_cast<std::size_t>(ic) * width_ + src] += g * wrow[j];
                }
            }
        }
    }
    return gx;
}

std::string Conv1d::spec() const {
    return "conv1d " + format_int(in_ch_) + " " + format_int(out_ch_) + " " + format_int(k_) + " " +
           format_int(width_) + " " + format_int(pad_);
}

void Conv1d::init(Rng& rng) {
    const double a = glorot_bound(in_ch_ * k_, out_ch_ * k_);
    for (double& w : w_) w = rng.uniform(-a, a);
    for (double& b : b_) b = 0.0;
}

Relu::Relu(int size) : size_(size) {
    if (size < 1) fail(Errc::InvalidArgument, "relu size must be positive");
}

std::vector<double> Relu::forward(const std::vector<double>& x) {
    check_size(x, in_size(), "input", kind());
    x_ = x;
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
    return y;
}

std::vector<double> Relu::backward(const std::vector<double>& go) {
    check_size(go, out_size(), "gradient", kind());
    check_size(x_, in_size(), "cached input", kind());
    std::vector<double> gx(go.size());
    for (std::size_t i = 0; i < go.size(); ++i) gx[i] = x_[i] > 0.0 ? go[i] : 0.0;
    return gx;
}

std::string Relu::spec() const { return "relu " + format_int(size_); }

void Network::add(std::unique_ptr<Layer> layer) {
    if (!layers_.empty() && layers_.back()->out_size() != layer->in_size()) {
        fail(Errc::InvalidArgument, "layer " + format_u64(layers_.size()) + " (" + layer->kind() +
                                        "): input size " + format_u64(layer->in_size()) +
                                        " does not match previous output " +
                                        format_u64(layers_.back()->out_size()));
    }
    layers_.push_back(std::move(layer));
}

std::vector<double> Network::forward(const std::vector<double>& x) {
    if (layers_.empty()) fail(Errc::InvalidArgument, "network has no layers");
    std::vector<double> h = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (h.size() != layers_[i]->in_size()) {
            fail(Errc::InvalidArgument, "layer " + format_u64(i) + " (" + layers_[i]->kind() +
                                            "): expected input " + format_u64(layers_[i]->in_size()) + ", got " +
                                            format_u64(h.size()));
        }
        h = layers_[i]->forward(h);
    }
    return h;
}

std::vector<double> Network::backward(const std::vector<double>& grad_out) {
    if (layers_.empty()) fail(Errc::InvalidArgument, "network has no layers");
    std::vector<double> g = grad_out;
    for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g);
    return g;
}

void Network::init(Rng& rng) {
    for (auto& l : layers_) l->init(rng);
}

void Network::zero_grads() {
    for (auto& l : layers_) {
        if (auto* g = l->weight_grads()) std::fill(g->begin(), g->end(), 0.0);
        if (auto* g = l->bias_grads()) std::fill(g->begin(), g->end(), 0.0);
    }
}

std::size_t Network::in_size() const {
    if (layers_.empty()) fail(Errc::InvalidArgument, "network has no layers");
    return layers_.front()->in_size();
}

std::size_t Network::out_size() const {
    if (layers_.empty()) fail(Errc::InvalidArgument, "network has no layers");
    return layers_.back()->out_size();
}

std::size_t Network::param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) {
        auto& mut = const_cast<Layer&>(*l);
        if (auto* w = mut.weights()) n += w->size();
        if (auto* b = mut.bias()) n += b->size();
    }
    return n;
}

std::vector<double*> Network::param_view() {
    std::vector<double*> out;
    for (auto& l : layers_) {
        if (auto* w = l->weights())
            for (double& v : *w) out.push_back(&v);
        if (auto* b = l->bias())
            for (double& v : *b) out.push_back(&v);
    }
    return out;
}

std::vector<double*> Network::grad_view() {
    std::vector<double*> out;
    for (auto& l : layers_) {
        if (auto* w = l->weight_grads())
            for (double& v : *w) out.push_back(&v);
        if (auto* b = l->bias_grads())
            for (double& v : *b) out.push_back(&v);
    }
    return out;
}

void SgdMomentum::step(Network& net) {
    const auto params = net.param_view();
    const auto grads = net.grad_view();
    if (velocity_.empty()) velocity_.assign(params.size(), 0.0);
    if (velocity_.size() != params.size()) fail(Errc::InvalidArgument, "optimizer bound to a different network");
    for (std::size_t i = 0; i < params.size(); ++i) {
        velocity_[i] = momentum_ * velocity_[i] + *grads[i];
        *params[i] -= lr_ * velocity_[i];
    }
}

double clip_grad_norm(std::initializer_list<Network*> nets, double max_norm) {
    if (!(max_norm > 0.0)) fail(Errc::InvalidArgument, "max_norm must be positive");
    double sq = 0.0;
    for (Network* net : nets)
        for (double* g : net->grad_view()) sq += *g * *g;
    const double norm = std::sqrt(sq);
    if (norm > max_norm) {
        const double scale = max_norm / norm;
        for (Network* net : nets)
            for (double* g : net->grad_view()) *g *= scale;
    }
    return norm;
}

namespace {

void write_param_line(std::string& out, const char* tag, const std::vector<double>& v) {
    out += tag;
    for (double x : v) {
        out += ' ';
        out += format_double_hex(x);
    }
    out += '\n';
}

std::vector<double> parse_param_line(const std::string& line, const char* tag, std::size_t want,
                                     const std::string& where) {
    const auto parts = split(std::string(trim(line)), ' ');
    if (parts.empty() || parts[0] != tag) {
        fail(Errc::Validation, where + ": expected '" + tag + "' parameter line");
    }
    if (parts.size() != want + 1) {
        fail(Errc::Validation, where + ": expected " + format_u64(want) + " values, got " +
                                   format_u64(parts.size() - 1));
    }
    std::vector<double> v(want);
    for (std::size_t i = 0; i < want; ++i) v[i] = parse_double_hex(parts[i + 1], where);
    return v;
}

}  // namespace

std::string save_network(const Network& net) {
    std::string out = "mecnet 1\nlayers " + format_u64(net.n_layers()) + "\n";
    for (std::size_t i = 0; i < net.n_layers(); ++i) {
        auto& l = const_cast<Layer&>(net.layer(i));
        out += l.spec();
        out += '\n';
        if (auto* w = l.weights()) write_param_line(out, "w", *w);
        if (auto* b = l.bias()) write_param_line(out, "b", *b);
    }
    return out;
}

Network load_network(const std::string& text, std::string_view origin) {
    const auto lines = split(text, '\n');
    std::size_t li = 0;
    auto next_line = [&]() -> std::string {
        while (li < lines.size()) {
            std::string s(trim(lines[li]));
            ++li;
            if (!s.empty()) return s;
        }
        fail(Errc::Validation, std::string(origin) + ": truncated network checkpoint");
    };
    auto where = [&]() { return std::string(origin) + ":" + format_u64(li); };

    if (next_line() != "mecnet 1") fail(Errc::Validation, std::string(origin) + ": not a mecnet version 1 file");
    const auto count_parts = split(next_line(), ' ');
    if (count_parts.size() != 2 || count_parts[0] != "layers") {
        fail(Errc::Validation, where() + ": expected 'layers <n>'");
    }
    const auto n_layers = parse_u64(count_parts[1], where() + " layer count");

    Network net;
    for (std::uint64_t i = 0; i < n_layers; ++i) {
        const auto spec = split(next_line(), ' ');
        std::unique_ptr<Layer> layer;
        if (spec[0] == "dense" && spec.size() == 3) {
            layer = std::make_unique<Dense>(static_cast<int>(parse_int(spec[1], where())),
                                            static_cast<int>(parse_int(spec[2], where())));
        } else if (spec[0] == "conv1d" && spec.size() == 6) {
            layer = std::make_unique<Conv1d>(
                static_cast<int>(parse_int(spec[1], where())), static_cast<int>(parse_int(spec[2], where())),
                static_cast<int>(parse_int(spec[3], where())), static_cast<int>(parse_int(spec[4], where())),
                static_cast<int>(parse_int(spec[5], where())));
        } else if (spec[0] == "relu" && spec.size() == 2) {
            layer = std::make_unique<Relu>(static_cast<int>(parse_int(spec[1], where())));
        } else {
            fail(Errc::Validation, where() + ": unknown layer spec");
        }
        if (auto* w = layer->weights()) *w = parse_param_line(next_line(), "w", w->size(), where());
        if (auto* b = layer->bias()) *b = parse_param_line(next_line(), "b", b->size(), where());
        net.add(std::move(layer));
    }
    return net;
}

void save_network_file(const Network& net, const std::string& path) { write_text_file(path, save_network(net)); }

Network load_network_file(const std::string& path) { return load_network(read_text_file(path), path); }

}  // namespace mecsim

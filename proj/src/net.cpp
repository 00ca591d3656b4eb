#include "ppg/net.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ppg/binary_io.hpp"
#include "ppg/errors.hpp"
#include "ppg/rng.hpp"

namespace ppg {

namespace {

constexpr double kLeakySlope = 0.2;
constexpr char kMagic[4] = {'N', 'E', 'T', '1'};

bool relu_family(Activation a) {
    return a == Activation::Relu || a == Activation::LeakyRelu;
}

Activation activation_from_tag(std::uint8_t tag, const std::string& context) {
    if (tag > static_cast<std::uint8_t>(Activation::Tanh)) {
        std::ostringstream os;
        os << context << ": unknown activation tag " << static_cast<int>(tag);
        throw ParseError(os.str());
    }
    return static_cast<Activation>(tag);
}

void check_congruence(const Net& net, std::size_t got_layers,
                      const std::vector<Eigen::MatrixXd>& shapes,
                      const char* what) {
    if (got_layers != net.layers.size()) {
        throw ArgumentError(std::string(what) + ": layer count does not match net");
    }
    for (std::size_t l = 0; l < shapes.size(); ++l) {
        if (shapes[l].rows() != net.layers[l].weights.rows()) {
            std::ostringstream os;
            os << what << ": shape mismatch at layer " << l;
            throw ArgumentError(os.str());
        }
    }
}

}  // namespace

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Relu: return "relu";
        case Activation::LeakyRelu: return "leaky_relu";
        case Activation::Tanh: return "tanh";
    }
    return "unknown";
}

Net init_net(const std::vector<int>& layer_sizes,
             const std::vector<Activation>& activations, std::uint64_t seed) {
    if (layer_sizes.size() < 2) {
        throw ArgumentError("init_net: need at least an input and an output size");
    }
    if (activations.size() != layer_sizes.size() - 1) {
        throw ArgumentError("init_net: one activation per layer required");
    }
    for (int size : layer_sizes) {
        if (size < 1) throw ArgumentError("init_net: layer sizes must be >= 1");
    }
    Rng rng(seed);
    Net net;
    net.layers.reserve(activations.size());
    for (std::size_t l = 0; l < activations.size(); ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        const double limit = relu_family(activations[l])
                                 ? std::sqrt(6.0 / fan_in)
                                 : std::sqrt(6.0 / (fan_in + fan_out));
        Layer layer;
        layer.activation = activations[l];
        layer.weights.resize(fan_out, fan_in);
        for (Eigen::Index r = 0; r < fan_out; ++r) {
            for (Eigen::Index c = 0; c < fan_in; ++c) {
                layer.weights(r, c) = rng.uniform(-limit, limit);
            }
        }
        layer.biases = Eigen::VectorXd::Zero(fan_out);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

Eigen::MatrixXd apply_activation(Activation a, const Eigen::MatrixXd& z) {
    switch (a) {
        case Activation::Identity:
            return z;
        case Activation::Relu:
            return z.array().max(0.0);
        case Activation::LeakyRelu:
            return (z.array() >= 0.0).select(z.array(), kLeakySlope * z.array());
        case Activation::Tanh:
            return z.array().tanh();
    }
    throw ArgumentError("apply_activation: unknown activation");
}

Eigen::MatrixXd activation_derivative(Activation a, const Eigen::MatrixXd& z) {
    switch (a) {
        case Activation::Identity:
            return Eigen::MatrixXd::Ones(z.rows(), z.cols());
        case Activation::Relu:
            return (z.array() > 0.0).select(Eigen::MatrixXd::Ones(z.rows(), z.cols()), 0.0);
        case Activation::LeakyRelu:
            return (z.array() > 0.0)
                .select(Eigen::MatrixXd::Ones(z.rows(), z.cols()), kLeakySlope);
        case Activation::Tanh: {
            const Eigen::ArrayXXd t = z.array().tanh();
            return 1.0 - t.square();
        }
    }
    throw ArgumentError("activation_derivative: unknown activation");
}

std::pair<Eigen::MatrixXd, ForwardCache> forward(const Net& net,
                                                 const Eigen::MatrixXd& input) {
    if (net.layers.empty()) throw ArgumentError("forward: net has no layers");
    if (input.rows() != net.in_dim()) {
        std::ostringstream os;
        os << "forward: input has " << input.rows() << " rows, net expects "
           << net.in_dim();
        throw ArgumentError(os.str());
    }
    ForwardCache cache;
    cache.input = input;
    cache.pre_activations.reserve(net.layers.size());
    cache.activations.reserve(net.layers.size());
    Eigen::MatrixXd current = input;
    for (const Layer& layer : net.layers) {
        Eigen::MatrixXd z = (layer.weights * current).colwise() + layer.biases;
        current = apply_activation(layer.activation, z);
        cache.pre_activations.push_back(std::move(z));
        cache.activations.push_back(current);
    }
    return {current, std::move(cache)};
}

std::pair<Eigen::VectorXd, ForwardCache> forward(const Net& net,
                                                 const Eigen::VectorXd& input) {
    auto [out, cache] = forward(net, Eigen::MatrixXd(input));
    return {Eigen::VectorXd(out.col(0)), std::move(cache)};
}

std::pair<Gradients, Eigen::MatrixXd> backward(
    const Net& net, const ForwardCache& cache,
    const Eigen::MatrixXd& output_gradient) {
    check_congruence(net, cache.pre_activations.size(), cache.pre_activations,
                     "backward");
    if (output_gradient.rows() != net.layers.back().weights.rows() ||
        output_gradient.cols() != cache.input.cols()) {
        throw ArgumentError("backward: output gradient shape does not match cache");
    }
    const std::size_t n_layers = net.layers.size();
    Gradients grads;
    grads.weights.resize(n_layers);
    grads.biases.resize(n_layers);
    Eigen::MatrixXd delta = output_gradient;
    for (std::size_t l = n_layers; l-- > 0;) {
        const Layer& layer = net.layers[l];
        delta = delta.cwiseProduct(
            activation_derivative(layer.activation, cache.pre_activations[l]));
        const Eigen::MatrixXd& below =
            l == 0 ? cache.input : cache.activations[l - 1];
        grads.weights[l] = delta * below.transpose();
        grads.biases[l] = delta.rowwise().sum();
        if (l > 0) delta = layer.weights.transpose() * delta;
    }
    Eigen::MatrixXd input_gradient = net.layers.front().weights.transpose() * delta;
    return {std::move(grads), std::move(input_gradient)};
}

std::pair<Gradients, Eigen::VectorXd> backward(
    const Net& net, const ForwardCache& cache,
    const Eigen::VectorXd& output_gradient) {
    auto [grads, in_grad] = backward(net, cache, Eigen::MatrixXd(output_gradient));
    return {std::move(grads), Eigen::VectorXd(in_grad.col(0))};
}

void accumulate(Gradients& target, const Gradients& addend) {
    if (target.weights.size() != addend.weights.size()) {
        throw ArgumentError("accumulate: gradient layer counts differ");
    }
    for (std::size_t l = 0; l < target.weights.size(); ++l) {
        target.weights[l] += addend.weights[l];
        target.biases[l] += addend.biases[l];
    }
}

void scale(Gradients& grads, double factor) {
    for (std::size_t l = 0; l < grads.weights.size(); ++l) {
        grads.weights[l] *= factor;
        grads.biases[l] *= factor;
    }
}

Net sgd_step(const Net& net, const Gradients& grads, double learning_rate) {
    if (grads.weights.size() != net.layers.size() ||
        grads.biases.size() != net.layers.size()) {
        throw ArgumentError("sgd_step: gradient layer count does not match net");
    }
    Net out = net;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        if (grads.weights[l].rows() != net.layers[l].weights.rows() ||
            grads.weights[l].cols() != net.layers[l].weights.cols() ||
            grads.biases[l].size() != net.layers[l].biases.size()) {
            std::ostringstream os;
            os << "sgd_step: gradient shape mismatch at layer " << l;
            throw ArgumentError(os.str());
        }
        if (!grads.weights[l].allFinite() || !grads.biases[l].allFinite()) {
            std::ostringstream os;
            os << "sgd_step: non-finite gradient at layer " << l;
            throw NumericError(os.str());
        }
        out.layers[l].weights -= learning_rate * grads.weights[l];
        out.layers[l].biases -= learning_rate * grads.biases[l];
    }
    return out;
}

void save_net(std::ostream& out, const Net& net) {
    out.write(kMagic, 4);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(net.layers.size()));
    for (const Layer& layer : net.layers) {
        write_le<std::uint32_t>(out, static_cast<std::uint32_t>(layer.weights.rows()));
        write_le<std::uint32_t>(out, static_cast<std::uint32_t>(layer.weights.cols()));
        write_le<std::uint8_t>(out, static_cast<std::uint8_t>(layer.activation));
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
                write_le<double>(out, layer.weights(r, c));
            }
        }
        for (Eigen::Index i = 0; i < layer.biases.size(); ++i) {
            write_le<double>(out, layer.biases[i]);
        }
    }
}

Net load_net(std::istream& in, const std::string& context) {
    const std::string magic = read_bytes(in, 4, context + ": magic");
    if (std::memcmp(magic.data(), kMagic, 4) != 0) {
        throw ParseError(context + ": not a network file (bad magic)");
    }
    const std::uint32_t n_layers = read_le<std::uint32_t>(in, context + ": layer count");
    Net net;
    net.layers.reserve(n_layers);
    Eigen::Index prev_out = -1;
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        std::ostringstream ctx;
        ctx << context << ": layer " << l;
        const std::uint32_t rows = read_le<std::uint32_t>(in, ctx.str() + " rows");
        const std::uint32_t cols = read_le<std::uint32_t>(in, ctx.str() + " cols");
        const std::uint8_t tag = read_le<std::uint8_t>(in, ctx.str() + " activation");
        if (rows == 0 || cols == 0) {
            throw ParseError(ctx.str() + ": zero dimension");
        }
        if (prev_out >= 0 && static_cast<Eigen::Index>(cols) != prev_out) {
            throw IntegrityError(ctx.str() + ": input dimension does not chain");
        }
        Layer layer;
        layer.activation = activation_from_tag(tag, ctx.str());
        layer.weights.resize(rows, cols);
        for (std::uint32_t r = 0; r < rows; ++r) {
            for (std::uint32_t c = 0; c < cols; ++c) {
                layer.weights(r, c) = read_le<double>(in, ctx.str() + " weights");
            }
        }
        layer.biases.resize(rows);
        for (std::uint32_t i = 0; i < rows; ++i) {
            layer.biases[i] = read_le<double>(in, ctx.str() + " biases");
        }
        if (!layer.weights.allFinite() || !layer.biases.allFinite()) {
            throw IntegrityError(ctx.str() + ": non-finite parameters");
        }
        prev_out = rows;
        net.layers.push_back(std::move(layer));
    }
    if (net.layers.empty()) {
        throw ParseError(context + ": network has no layers");
    }
    return net;
}

void save_net(const std::string& path, const Net& net) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ArgumentError("net: cannot open '" + path + "' for writing");
    save_net(os, net);
    if (!os) throw ArgumentError("net: write to '" + path + "' failed");
}

Net load_net(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IntegrityError("net: cannot open '" + path + "' for reading");
    return load_net(is, path);
}

}  // namespace ppg

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace ppg {

enum class Activation : std::uint8_t {
    Identity = 0,
    Relu = 1,
    LeakyRelu = 2,  // fixed negative slope 0.2
    Tanh = 3,
};

const char* activation_name(Activation a);

struct Layer {
    Eigen::MatrixXd weights;  // out_dim x in_dim
    Eigen::VectorXd biases;   // out_dim
    Activation activation = Activation::Identity;
};

// A plain dense feed-forward network. Nets are values: forward/backward never
// mutate them, and sgd_step returns an updated copy.
struct Net {
    std::vector<Layer> layers;

    Eigen::Index in_dim() const {
        return layers.empty() ? 0 : layers.front().weights.cols();
    }
    Eigen::Index out_dim() const {
        return layers.empty() ? 0 : layers.back().weights.rows();
    }
};

// Shape-congruent with the Net whose loss they differentiate.
struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

// Everything backward needs from the corresponding forward call. Columns are
// samples, so the single-vector API is the one-column special case.
struct ForwardCache {
    Eigen::MatrixXd input;
    std::vector<Eigen::MatrixXd> pre_activations;
    std::vector<Eigen::MatrixXd> activations;
};

// Weights are drawn uniform in [-L, L] with He scaling (L = sqrt(6/fan_in))
// for relu-family activations and Xavier scaling (L = sqrt(6/(fan_in +
// fan_out))) otherwise; biases start at zero.
Net init_net(const std::vector<int>& layer_sizes,
             const std::vector<Activation>& activations, std::uint64_t seed);

Eigen::MatrixXd apply_activation(Activation a, const Eigen::MatrixXd& z);
// Derivative evaluated at the pre-activation z.
Eigen::MatrixXd activation_derivative(Activation a, const Eigen::MatrixXd& z);

// Batched forward pass: each column of `input` is one sample.
std::pair<Eigen::MatrixXd, ForwardCache> forward(const Net& net,
                                                 const Eigen::MatrixXd& input);
std::pair<Eigen::VectorXd, ForwardCache> forward(const Net& net,
                                                 const Eigen::VectorXd& input);

// Exact reverse-mode gradients of the forward composition. `output_gradient`
// holds d(loss)/d(output) per column; weight gradients sum over columns, so
// any batch-level normalization belongs in the loss gradient itself. Also
// returns d(loss)/d(input).
std::pair<Gradients, Eigen::MatrixXd> backward(
    const Net& net, const ForwardCache& cache,
    const Eigen::MatrixXd& output_gradient);
std::pair<Gradients, Eigen::VectorXd> backward(
    const Net& net, const ForwardCache& cache,
    const Eigen::VectorXd& output_gradient);

// In-place accumulation: target += addend (shapes must agree).
void accumulate(Gradients& target, const Gradients& addend);
void scale(Gradients& grads, double factor);

Net sgd_step(const Net& net, const Gradients& grads, double learning_rate);

void save_net(std::ostream& out, const Net& net);
Net load_net(std::istream& in, const std::string& context);
void save_net(const std::string& path, const Net& net);
Net load_net(const std::string& path);

}  // namespace ppg

#include "ppg/gan.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "ppg/binary_io.hpp"
#include "ppg/errors.hpp"
#include "ppg/rng.hpp"

namespace ppg {

namespace {

constexpr char kMagic[4] = {'G', 'A', 'N', '1'};

// The generator's tanh output lives in (-1, 1); signals live in [0, 2] once
// noise clamping is applied. A fixed shift converts between the two.
constexpr double kDomainShift = 1.0;

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
    return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

Eigen::MatrixXd stack_pair(const Eigen::MatrixXd& condition,
                           const Eigen::MatrixXd& candidate) {
    Eigen::MatrixXd stacked(condition.rows() + candidate.rows(), condition.cols());
    stacked.topRows(condition.rows()) = condition;
    stacked.bottomRows(candidate.rows()) = candidate;
    return stacked;
}

void validate_config(const GanTrainConfig& c) {
    if (c.window_length < 2) throw ArgumentError("gan: window_length must be >= 2");
    if (c.stride < 1) throw ArgumentError("gan: stride must be >= 1");
    if (!(c.lr_discriminator > 0.0) || !(c.lr_generator > 0.0)) {
        throw ArgumentError("gan: learning rates must be positive");
    }
    if (c.lambda_l1 < 0.0) throw ArgumentError("gan: lambda_l1 must be >= 0");
    if (c.patience < 1) throw ArgumentError("gan: patience must be >= 1");
    if (c.max_epochs < 0) throw ArgumentError("gan: max_epochs must be >= 0");
    if (c.batch_size < 1) throw ArgumentError("gan: batch_size must be >= 1");
    if (c.windows_per_signal < 1) {
        throw ArgumentError("gan: windows_per_signal must be >= 1");
    }
    if (c.patch_logits < 1) throw ArgumentError("gan: patch_logits must be >= 1");
}

void validate_pairs(const std::vector<PairedSignals>& pairs, int window_length,
                    const char* which) {
    for (const PairedSignals& p : pairs) {
        if (p.noisy.length() != p.clean.length()) {
            throw IntegrityError(std::string("train_gan: ") + which + " pair '" +
                                 p.id + "' has mismatched lengths");
        }
        if (p.noisy.length() < window_length) {
            throw ArgumentError(std::string("train_gan: ") + which + " pair '" +
                                p.id + "' is shorter than the window");
        }
    }
}

double validation_l1(const GanModel& model, const std::vector<PairedSignals>& val) {
    double total = 0.0;
    for (const PairedSignals& p : val) {
        total += mean_l1(gan_denoise(model, p.noisy), p.clean);
    }
    return total / static_cast<double>(val.size());
}

}  // namespace

double d_loss(const Eigen::VectorXd& d_real, const Eigen::VectorXd& d_fake) {
    if (d_real.size() == 0 || d_fake.size() == 0) {
        throw ArgumentError("d_loss: empty logit vector");
    }
    if (d_real.size() != d_fake.size()) {
        throw ArgumentError("d_loss: real and fake logit counts differ");
    }
    const double real_term = (d_real.array() - 1.0).square().mean();
    const double fake_term = d_fake.array().square().mean();
    return 0.5 * (real_term + fake_term);
}

GeneratorLoss g_loss(const Eigen::VectorXd& d_fake, const Eigen::VectorXd& generated,
                     const Eigen::VectorXd& target, double lambda_l1) {
    if (d_fake.size() == 0) throw ArgumentError("g_loss: empty logit vector");
    if (generated.size() == 0) throw ArgumentError("g_loss: empty window");
    if (generated.size() != target.size()) {
        throw ArgumentError("g_loss: generated and target lengths differ");
    }
    GeneratorLoss loss;
    loss.gan_term = (d_fake.array() - 1.0).square().mean();
    loss.l1_term = lambda_l1 * (target - generated).array().abs().mean();
    loss.total = loss.gan_term + loss.l1_term;
    return loss;
}

GanModel init_gan(const GanTrainConfig& config) {
    validate_config(config);
    std::vector<int> g_sizes;
    g_sizes.push_back(config.window_length);
    g_sizes.insert(g_sizes.end(), config.generator_hidden.begin(),
                   config.generator_hidden.end());
    g_sizes.push_back(config.window_length);
    std::vector<Activation> g_acts(config.generator_hidden.size(),
                                   Activation::LeakyRelu);
    g_acts.push_back(Activation::Tanh);

    std::vector<int> d_sizes;
    d_sizes.push_back(2 * config.window_length);
    d_sizes.insert(d_sizes.end(), config.discriminator_hidden.begin(),
                   config.discriminator_hidden.end());
    d_sizes.push_back(config.patch_logits);
    std::vector<Activation> d_acts(config.discriminator_hidden.size(),
                                   Activation::LeakyRelu);
    d_acts.push_back(Activation::Identity);

    GanModel model;
    model.window_length = config.window_length;
    model.stride = config.stride;
    model.generator = init_net(g_sizes, g_acts, splitmix64(config.seed ^ 0x67656e));
    model.discriminator =
        init_net(d_sizes, d_acts, splitmix64(config.seed ^ 0x64697363));
    return model;
}

GanTrainResult train_gan(const std::vector<PairedSignals>& train_pairs,
                         const std::vector<PairedSignals>& val_pairs,
                         const GanTrainConfig& config) {
    GanTrainResult result;
    result.model = init_gan(config);
    if (config.max_epochs == 0) return result;

    if (train_pairs.empty()) throw ArgumentError("train_gan: no training pairs");
    if (val_pairs.empty()) {
        throw ArgumentError("train_gan: early stopping needs validation pairs");
    }
    validate_pairs(train_pairs, config.window_length, "training");
    validate_pairs(val_pairs, config.window_length, "validation");

    const int win = config.window_length;
    Rng rng(splitmix64(config.seed ^ 0x747261696e));
    Net generator = result.model.generator;
    Net discriminator = result.model.discriminator;
    GanModel best = result.model;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    int epochs_without_improvement = 0;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        // Fresh random crops each epoch, visited in shuffled order.
        std::vector<std::pair<std::size_t, Eigen::Index>> crops;
        crops.reserve(train_pairs.size() * config.windows_per_signal);
        for (std::size_t p = 0; p < train_pairs.size(); ++p) {
            const Eigen::Index max_start = train_pairs[p].noisy.length() - win;
            for (int k = 0; k < config.windows_per_signal; ++k) {
                crops.emplace_back(p, static_cast<Eigen::Index>(rng.uniform_index(
                                          static_cast<std::size_t>(max_start) + 1)));
            }
        }
        rng.shuffle(crops);

        double d_loss_sum = 0.0;
        double g_loss_sum = 0.0;
        int batches = 0;
        for (std::size_t offset = 0; offset < crops.size();
             offset += static_cast<std::size_t>(config.batch_size)) {
            const Eigen::Index batch = static_cast<Eigen::Index>(
                std::min(crops.size() - offset,
                         static_cast<std::size_t>(config.batch_size)));
            Eigen::MatrixXd noisy(win, batch);
            Eigen::MatrixXd clean(win, batch);
            for (Eigen::Index b = 0; b < batch; ++b) {
                const auto& [pair_idx, start] = crops[offset + b];
                noisy.col(b) = train_pairs[pair_idx]
                                   .noisy.samples.segment(start, win)
                                   .matrix();
                clean.col(b) = train_pairs[pair_idx]
                                   .clean.samples.segment(start, win)
                                   .matrix();
            }
            noisy.array() -= kDomainShift;
            clean.array() -= kDomainShift;

            // Any non-finite loss or parameter update means the run has
            // diverged; report where so the hyperparameters can be blamed.
            const auto diverged = [&](const char* what) {
                std::ostringstream os;
                os << "train_gan: " << what << " at epoch " << epoch << ", batch "
                   << batches + 1;
                return TrainingError(os.str());
            };
            const auto checked_step = [&](const Net& net, const Gradients& grads,
                                          double lr) {
                try {
                    return sgd_step(net, grads, lr);
                } catch (const NumericError&) {
                    throw diverged("non-finite gradient");
                }
            };

            // Discriminator first: real pair toward 1, generated pair toward 0.
            auto [fake, fake_cache_unused] = forward(generator, noisy);
            auto [d_real, real_cache] =
                forward(discriminator, stack_pair(noisy, clean));
            auto [d_fake, fake_cache] =
                forward(discriminator, stack_pair(noisy, fake));
            const double d_batch_loss = d_loss(flatten(d_real), flatten(d_fake));
            if (!std::isfinite(d_batch_loss)) throw diverged("non-finite loss");

            const double logit_inv = 1.0 / static_cast<double>(d_real.size());
            Eigen::MatrixXd d_real_grad = (d_real.array() - 1.0) * logit_inv;
            Eigen::MatrixXd d_fake_grad = d_fake.array() * logit_inv;
            auto [real_grads, real_in_grad] =
                backward(discriminator, real_cache, d_real_grad);
            auto [fake_grads, fake_in_grad] =
                backward(discriminator, fake_cache, d_fake_grad);
            accumulate(real_grads, fake_grads);
            discriminator =
                checked_step(discriminator, real_grads, config.lr_discriminator);

            // Generator second, against the just-updated discriminator.
            auto [generated, gen_cache] = forward(generator, noisy);
            auto [d_gen, d_gen_cache] =
                forward(discriminator, stack_pair(noisy, generated));
            const GeneratorLoss g_batch_loss =
                g_loss(flatten(d_gen), flatten(generated), flatten(clean),
                       config.lambda_l1);
            if (!std::isfinite(g_batch_loss.total)) throw diverged("non-finite loss");

            Eigen::MatrixXd gan_logit_grad =
                2.0 * (d_gen.array() - 1.0) / static_cast<double>(d_gen.size());
            auto [d_grads_unused, d_input_grad] =
                backward(discriminator, d_gen_cache, gan_logit_grad);
            Eigen::MatrixXd generated_grad = d_input_grad.bottomRows(win);
            generated_grad.array() +=
                config.lambda_l1 / static_cast<double>(generated.size()) *
                (generated - clean).array().sign();
            auto [gen_grads, gen_in_grad] =
                backward(generator, gen_cache, generated_grad);
            generator = checked_step(generator, gen_grads, config.lr_generator);

            d_loss_sum += d_batch_loss;
            g_loss_sum += g_batch_loss.total;
            ++batches;
        }
        result.epoch_d_loss.push_back(d_loss_sum / batches);
        result.epoch_g_loss.push_back(g_loss_sum / batches);

        GanModel current{generator, discriminator, config.window_length,
                         config.stride};
        const double val = validation_l1(current, val_pairs);
        result.epoch_val_l1.push_back(val);
        result.epochs_run = epoch;
        if (val < best_val) {
            best_val = val;
            best = std::move(current);
            best_epoch = epoch;
            epochs_without_improvement = 0;
        } else if (++epochs_without_improvement >= config.patience) {
            break;
        }
    }

    result.model = std::move(best);
    result.best_epoch = best_epoch;
    result.best_val_l1 = best_val;
    return result;
}

Signal gan_denoise(const GanModel& model, const Signal& signal) {
    const Eigen::Index win = model.window_length;
    const Eigen::Index n = signal.length();
    if (model.stride < 1) throw ArgumentError("gan_denoise: stride must be >= 1");
    if (n < win) {
        throw ArgumentError("gan_denoise: signal shorter than the model window");
    }
    std::vector<Eigen::Index> starts;
    for (Eigen::Index s = 0; s + win <= n; s += model.stride) starts.push_back(s);
    if (starts.back() != n - win) starts.push_back(n - win);

    Eigen::MatrixXd windows(win, static_cast<Eigen::Index>(starts.size()));
    for (std::size_t i = 0; i < starts.size(); ++i) {
        windows.col(static_cast<Eigen::Index>(i)) =
            (signal.samples.segment(starts[i], win) - kDomainShift).matrix();
    }
    auto [generated, cache] = forward(model.generator, windows);

    Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(n);
    Eigen::ArrayXd hits = Eigen::ArrayXd::Zero(n);
    for (std::size_t i = 0; i < starts.size(); ++i) {
        sum.segment(starts[i], win) +=
            generated.col(static_cast<Eigen::Index>(i)).array() + kDomainShift;
        hits.segment(starts[i], win) += 1.0;
    }
    return Signal{sum / hits, signal.sample_rate_hz};
}

double mean_l1(const Signal& a, const Signal& b) {
    if (a.length() != b.length()) {
        throw ArgumentError("mean_l1: signal lengths differ");
    }
    if (a.length() == 0) throw ArgumentError("mean_l1: empty signals");
    return (a.samples - b.samples).abs().mean();
}

void save_gan(const std::string& path, const GanModel& model) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ArgumentError("gan: cannot open '" + path + "' for writing");
    os.write(kMagic, 4);
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.window_length));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.stride));
    save_net(os, model.generator);
    save_net(os, model.discriminator);
    if (!os) throw ArgumentError("gan: write to '" + path + "' failed");
}

GanModel load_gan(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IntegrityError("gan: cannot open '" + path + "' for reading");
    const std::string magic = read_bytes(is, 4, path + ": magic");
    if (std::memcmp(magic.data(), kMagic, 4) != 0) {
        throw ParseError(path + ": not a denoiser model file (bad magic)");
    }
    GanModel model;
    model.window_length =
        static_cast<int>(read_le<std::uint32_t>(is, path + ": window length"));
    model.stride = static_cast<int>(read_le<std::uint32_t>(is, path + ": stride"));
    model.generator = load_net(is, path + ": generator");
    model.discriminator = load_net(is, path + ": discriminator");
    if (model.window_length < 2 || model.stride < 1) {
        throw IntegrityError(path + ": invalid window/stride header");
    }
    if (model.generator.in_dim() != model.window_length ||
        model.generator.out_dim() != model.window_length) {
        throw IntegrityError(path + ": generator dimensions do not match window");
    }
    if (model.discriminator.in_dim() != 2 * model.window_length) {
        throw IntegrityError(path + ": discriminator input does not match window");
    }
    return model;
}

}  // namespace ppg

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ppg/net.hpp"
#include "ppg/signal.hpp"

namespace ppg {

// Conditional denoiser pair. The generator maps one noisy window to a clean
// window; the discriminator sees a (condition, candidate) window pair
// concatenated into one vector and emits a vector of patch logits. Signals
// enter the nets shifted by -1 so the generator's tanh output spans the
// data range, and leave shifted back.
struct GanModel {
    Net generator;
    Net discriminator;
    int window_length = 64;
    int stride = 16;
};

struct GanTrainConfig {
    double lr_discriminator = 1e-5;
    double lr_generator = 2e-4;
    double lambda_l1 = 100.0;
    int patience = 3;
    int max_epochs = 40;
    int batch_size = 16;
    int windows_per_signal = 8;  // fresh random crops per signal per epoch
    int window_length = 64;
    int stride = 16;
    std::vector<int> generator_hidden = {64, 96, 64};
    std::vector<int> discriminator_hidden = {128, 96};
    int patch_logits = 8;
    std::uint64_t seed = 0;
};

struct GanTrainResult {
    GanModel model;
    std::vector<double> epoch_d_loss;  // training means per epoch
    std::vector<double> epoch_g_loss;
    std::vector<double> epoch_val_l1;  // validation mean |clean - denoised|
    int best_epoch = -1;               // -1 when no epoch ran
    double best_val_l1 = 0.0;
    int epochs_run = 0;
};

// Least-squares adversarial losses. Real patches are pulled toward logit 1,
// fake patches toward 0; the generator pushes its fakes toward 1 and pays an
// L1 penalty for straying from the target window.
double d_loss(const Eigen::VectorXd& d_real, const Eigen::VectorXd& d_fake);

struct GeneratorLoss {
    double total = 0.0;
    double gan_term = 0.0;
    double l1_term = 0.0;
};
GeneratorLoss g_loss(const Eigen::VectorXd& d_fake, const Eigen::VectorXd& generated,
                     const Eigen::VectorXd& target, double lambda_l1);

GanModel init_gan(const GanTrainConfig& config);

// Alternating minibatch training, discriminator step first, then generator.
// After each epoch the validation pairs are denoised in full and scored by
// mean absolute error against their clean targets; training stops once that
// score has not improved for `patience` consecutive epochs, and the model
// with the best validation score is returned.
GanTrainResult train_gan(const std::vector<PairedSignals>& train_pairs,
                         const std::vector<PairedSignals>& val_pairs,
                         const GanTrainConfig& config);

// Denoises a full signal by sliding the generator across it at the model's
// stride (plus a final tail-aligned window) and averaging the overlaps.
Signal gan_denoise(const GanModel& model, const Signal& signal);

double mean_l1(const Signal& a, const Signal& b);

void save_gan(const std::string& path, const GanModel& model);
GanModel load_gan(const std::string& path);

}  // namespace ppg

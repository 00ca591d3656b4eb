#include "ppg/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "ppg/binary_io.hpp"
#include "ppg/errors.hpp"
#include "ppg/hash.hpp"
#include "ppg/rng.hpp"

namespace ppg {

namespace {

constexpr char kMagic[4] = {'C', 'L', 'F', '1'};
constexpr int kNumClasses = 2;
constexpr double kConstantFeatureStd = 1e-12;

Eigen::MatrixXd feature_matrix(const Dataset& dataset) {
    Eigen::MatrixXd features(kFeatureCount, dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        features.col(static_cast<Eigen::Index>(i)) =
            extract_features(dataset.records[i].signal);
    }
    return features;
}

Eigen::MatrixXd normalize_columns(const ClassifierModel& model,
                                  const Eigen::MatrixXd& features) {
    Eigen::MatrixXd z(features.rows(), features.cols());
    for (Eigen::Index f = 0; f < features.rows(); ++f) {
        if (model.feature_stds[f] > 0.0) {
            z.row(f) = ((features.row(f).array() - model.feature_means[f]) /
                        model.feature_stds[f])
                           .max(-kMaxNormalizedFeature)
                           .min(kMaxNormalizedFeature);
        } else {
            z.row(f).setZero();
        }
    }
    return z;
}

double mean_cross_entropy(const ClassifierModel& model, const Eigen::MatrixXd& z,
                          const std::vector<int>& labels) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < z.cols(); ++i) {
        const Eigen::VectorXd logits = model.weights * z.col(i) + model.biases;
        PredictiveDistribution p{softmax(logits)};
        total += cross_entropy(p, labels[static_cast<std::size_t>(i)]);
    }
    return total / static_cast<double>(z.cols());
}

}  // namespace

Eigen::VectorXd normalize_features(const ClassifierModel& model,
                                   const Eigen::VectorXd& features) {
    if (features.size() != model.num_features()) {
        throw ArgumentError("classifier: feature count does not match model");
    }
    Eigen::VectorXd z(features.size());
    for (Eigen::Index f = 0; f < features.size(); ++f) {
        z[f] = model.feature_stds[f] > 0.0
                   ? std::clamp(
                         (features[f] - model.feature_means[f]) /
                             model.feature_stds[f],
                         -kMaxNormalizedFeature, kMaxNormalizedFeature)
                   : 0.0;
    }
    return z;
}

ClassifierTrainResult train_classifier(const Dataset& train,
                                       const Dataset& validation,
                                       const ClassifierTrainConfig& config) {
    if (train.size() == 0) throw ArgumentError("train_classifier: empty training set");
    if (!(config.learning_rate > 0.0)) {
        throw ArgumentError("train_classifier: learning rate must be positive");
    }
    if (config.epochs < 0) throw ArgumentError("train_classifier: epochs must be >= 0");
    if (config.batch_size < 1) {
        throw ArgumentError("train_classifier: batch_size must be >= 1");
    }
    bool seen[kNumClasses] = {false, false};
    std::vector<int> labels;
    labels.reserve(train.size());
    for (const LabeledSignal& r : train.records) {
        labels.push_back(r.label);
        if (r.label >= 0 && r.label < kNumClasses) seen[r.label] = true;
    }
    if (!seen[0] || !seen[1]) {
        throw ArgumentError("train_classifier: training set contains a single class");
    }

    const Eigen::MatrixXd features = feature_matrix(train);
    ClassifierTrainResult result;
    ClassifierModel& model = result.model;
    model.feature_means = features.rowwise().mean();
    model.feature_stds.resize(kFeatureCount);
    for (Eigen::Index f = 0; f < kFeatureCount; ++f) {
        const Eigen::ArrayXd row = features.row(f).array() - model.feature_means[f];
        const double std_dev = std::sqrt(row.square().mean());
        model.feature_stds[f] = std_dev > kConstantFeatureStd ? std_dev : 0.0;
    }
    model.weights = Eigen::MatrixXd::Zero(kNumClasses, kFeatureCount);
    model.biases = Eigen::VectorXd::Zero(kNumClasses);

    const Eigen::MatrixXd z = normalize_columns(model, features);
    Eigen::MatrixXd val_z;
    std::vector<int> val_labels;
    if (validation.size() > 0) {
        val_z = normalize_columns(model, feature_matrix(validation));
        for (const LabeledSignal& r : validation.records) val_labels.push_back(r.label);
    }

    Rng rng(splitmix64(config.seed ^ 0x636c66));
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    ClassifierModel best = model;
    double best_val = std::numeric_limits<double>::infinity();

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t offset = 0; offset < order.size();
             offset += static_cast<std::size_t>(config.batch_size)) {
            const Eigen::Index batch = static_cast<Eigen::Index>(
                std::min(order.size() - offset,
                         static_cast<std::size_t>(config.batch_size)));
            Eigen::MatrixXd zb(kFeatureCount, batch);
            Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(kNumClasses, batch);
            for (Eigen::Index b = 0; b < batch; ++b) {
                const std::size_t idx = order[offset + static_cast<std::size_t>(b)];
                zb.col(b) = z.col(static_cast<Eigen::Index>(idx));
                onehot(labels[idx], b) = 1.0;
            }
            Eigen::MatrixXd probs(kNumClasses, batch);
            for (Eigen::Index b = 0; b < batch; ++b) {
                probs.col(b) = softmax(model.weights * zb.col(b) + model.biases);
                loss_sum += -std::log(std::max(
                    probs.col(b).dot(onehot.col(b)), 1e-300));
            }
            const Eigen::MatrixXd delta =
                (probs - onehot) / static_cast<double>(batch);
            model.weights -= config.learning_rate * (delta * zb.transpose());
            model.biases -= config.learning_rate * delta.rowwise().sum();
        }
        result.epoch_train_loss.push_back(loss_sum / static_cast<double>(train.size()));
        if (validation.size() > 0) {
            const double val_loss = mean_cross_entropy(model, val_z, val_labels);
            result.epoch_val_loss.push_back(val_loss);
            if (val_loss < best_val) {
                best_val = val_loss;
                best = model;
                result.best_epoch = epoch;
            }
        }
    }
    if (validation.size() > 0 && result.best_epoch > 0) {
        model = best;
    }
    return result;
}

PredictiveDistribution predict_features(const ClassifierModel& model,
                                        const Eigen::VectorXd& features) {
    const Eigen::VectorXd z = normalize_features(model, features);
    return PredictiveDistribution{softmax(model.weights * z + model.biases)};
}

PredictiveDistribution predict(const ClassifierModel& model, const Signal& signal) {
    return predict_features(model, extract_features(signal));
}

double cross_entropy(const PredictiveDistribution& p, int label) {
    if (label < 0 || label >= p.k()) {
        throw ArgumentError("cross_entropy: label out of range");
    }
    return -std::log(std::max(p.probs[label], 1e-300));
}

void save_classifier(const std::string& path, const ClassifierModel& model) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ArgumentError("classifier: cannot open '" + path + "' for writing");
    os.write(kMagic, 4);
    write_le<std::uint64_t>(os, fnv1a64(feature_schema()));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.num_classes()));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.num_features()));
    for (Eigen::Index f = 0; f < model.num_features(); ++f) {
        write_le<double>(os, model.feature_means[f]);
    }
    for (Eigen::Index f = 0; f < model.num_features(); ++f) {
        write_le<double>(os, model.feature_stds[f]);
    }
    for (Eigen::Index r = 0; r < model.num_classes(); ++r) {
        for (Eigen::Index c = 0; c < model.num_features(); ++c) {
            write_le<double>(os, model.weights(r, c));
        }
    }
    for (Eigen::Index r = 0; r < model.num_classes(); ++r) {
        write_le<double>(os, model.biases[r]);
    }
    if (!os) throw ArgumentError("classifier: write to '" + path + "' failed");
}

ClassifierModel load_classifier(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IntegrityError("classifier: cannot open '" + path + "' for reading");
    const std::string magic = read_bytes(is, 4, path + ": magic");
    if (std::memcmp(magic.data(), kMagic, 4) != 0) {
        throw ParseError(path + ": not a classifier model file (bad magic)");
    }
    const std::uint64_t schema = read_le<std::uint64_t>(is, path + ": schema hash");
    if (schema != fnv1a64(feature_schema())) {
        throw SchemaError(path +
                          ": model was trained against a different feature schema");
    }
    const std::uint32_t classes = read_le<std::uint32_t>(is, path + ": class count");
    const std::uint32_t feats = read_le<std::uint32_t>(is, path + ": feature count");
    if (classes < 2 || feats != kFeatureCount) {
        throw IntegrityError(path + ": implausible model dimensions");
    }
    ClassifierModel model;
    model.feature_means.resize(feats);
    model.feature_stds.resize(feats);
    for (std::uint32_t f = 0; f < feats; ++f) {
        model.feature_means[f] = read_le<double>(is, path + ": feature means");
    }
    for (std::uint32_t f = 0; f < feats; ++f) {
        model.feature_stds[f] = read_le<double>(is, path + ": feature stds");
        if (model.feature_stds[f] < 0.0) {
            throw IntegrityError(path + ": negative feature std");
        }
    }
    model.weights.resize(classes, feats);
    for (std::uint32_t r = 0; r < classes; ++r) {
        for (std::uint32_t c = 0; c < feats; ++c) {
            model.weights(r, c) = read_le<double>(is, path + ": weights");
        }
    }
    model.biases.resize(classes);
    for (std::uint32_t r = 0; r < classes; ++r) {
        model.biases[r] = read_le<double>(is, path + ": biases");
    }
    if (!model.feature_means.allFinite() || !model.feature_stds.allFinite() ||
        !model.weights.allFinite() || !model.biases.allFinite()) {
        throw IntegrityError(path + ": non-finite model parameters");
    }
    return model;
}

}  // namespace ppg

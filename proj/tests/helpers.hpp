// Shared fixtures and independent oracles for the test binaries. The oracles
// deliberately recompute results with naive loops and textbook formulas so a
// bug in the library cannot hide inside its own checker.
#pragma once

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ppg/calibration.hpp"
#include "ppg/distribution.hpp"
#include "ppg/dtuq.hpp"
#include "ppg/rng.hpp"

namespace testutil {

inline double relative_error(double got, double want) {
    const double scale = std::max({std::abs(got), std::abs(want), 1e-8});
    return std::abs(got - want) / scale;
}

// Central finite difference of `loss` with respect to one parameter reached
// through a mutable reference; restores the parameter afterwards.
inline double central_difference(double& param, const std::function<double()>& loss,
                                 double step = 1e-5) {
    const double saved = param;
    param = saved + step;
    const double hi = loss();
    param = saved - step;
    const double lo = loss();
    param = saved;
    return (hi - lo) / (2.0 * step);
}

// Dirichlet(1,...,1) draw: a uniformly random probability vector.
inline ppg::PredictiveDistribution random_distribution(ppg::Rng& rng, int k) {
    Eigen::VectorXd p(k);
    for (int i = 0; i < k; ++i) {
        p[i] = -std::log(1.0 - rng.uniform());
    }
    p /= p.sum();
    return ppg::PredictiveDistribution{p};
}

// ---------------------------------------------------------------------------
// Metric oracles

// AUC as the literal fraction of positive/negative pairs where the positive
// scores higher, ties counting one half.
inline double pairwise_auc(const std::vector<double>& scores,
                           const std::vector<int>& labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) {
                wins += 1.0;
            } else if (scores[i] == scores[j]) {
                wins += 0.5;
            }
        }
    }
    return wins / static_cast<double>(pairs);
}

struct NaiveConfusion {
    double tp = 0, fp = 0, tn = 0, fn = 0;
};

inline NaiveConfusion naive_confusion(const std::vector<double>& scores,
                                      const std::vector<int>& labels,
                                      double threshold) {
    NaiveConfusion c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        if (labels[i] == 1) {
            (predicted ? c.tp : c.fn) += 1;
        } else {
            (predicted ? c.fp : c.tn) += 1;
        }
    }
    return c;
}

enum class NaiveMetric { Mcc, F1, BalancedAccuracy, Sensitivity, Specificity };

inline double naive_metric(NaiveMetric metric, const NaiveConfusion& c) {
    switch (metric) {
        case NaiveMetric::Mcc: {
            const double denom = (c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) *
                                 (c.tn + c.fn);
            if (denom == 0.0) return 0.0;
            return (c.tp * c.tn - c.fp * c.fn) / std::sqrt(denom);
        }
        case NaiveMetric::F1: {
            const double denom = 2.0 * c.tp + c.fp + c.fn;
            return denom == 0.0 ? 0.0 : 2.0 * c.tp / denom;
        }
        case NaiveMetric::BalancedAccuracy: {
            const double sens = c.tp + c.fn == 0.0 ? 0.0 : c.tp / (c.tp + c.fn);
            const double spec = c.tn + c.fp == 0.0 ? 0.0 : c.tn / (c.tn + c.fp);
            return 0.5 * (sens + spec);
        }
        case NaiveMetric::Sensitivity:
            return c.tp + c.fn == 0.0 ? 0.0 : c.tp / (c.tp + c.fn);
        case NaiveMetric::Specificity:
            return c.tn + c.fp == 0.0 ? 0.0 : c.tn / (c.tn + c.fp);
    }
    return 0.0;
}

struct NaiveOperatingPoint {
    double value = std::numeric_limits<double>::quiet_NaN();
    double threshold = std::numeric_limits<double>::quiet_NaN();
    double achieved = std::numeric_limits<double>::quiet_NaN();
    bool feasible = false;
};

// Exhaustive threshold scan over the distinct scores: keep thresholds
// meeting the constraint, take minimal slack, break ties toward the higher
// metric and then the lower threshold.
inline NaiveOperatingPoint brute_force_operating_point(
    const std::vector<double>& scores, const std::vector<int>& labels,
    bool sensitivity_constraint, double level, NaiveMetric metric) {
    std::vector<double> thresholds = scores;
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                     thresholds.end());

    NaiveOperatingPoint best;
    for (double t : thresholds) {
        const NaiveConfusion c = naive_confusion(scores, labels, t);
        const double achieved =
            naive_metric(sensitivity_constraint ? NaiveMetric::Sensitivity
                                                : NaiveMetric::Specificity,
                         c);
        if (achieved < level) continue;
        const double value = naive_metric(metric, c);
        bool wins = false;
        if (!best.feasible) {
            wins = true;
        } else if (achieved != best.achieved) {
            wins = achieved < best.achieved;
        } else if (value != best.value) {
            wins = value > best.value;
        } else {
            wins = t < best.threshold;
        }
        if (wins) best = {value, t, achieved, true};
    }
    return best;
}

// ---------------------------------------------------------------------------
// Calibration oracle

// Recomputes the calibration error one item at a time: assign each item to
// its equal-width bin, then weight each occupied bin's |err - 0.5 * uncert|.
inline double naive_uce(const std::vector<double>& uncertainty,
                        const std::vector<bool>& correct, int num_bins) {
    std::vector<double> sum_u(static_cast<std::size_t>(num_bins), 0.0);
    std::vector<double> wrong(static_cast<std::size_t>(num_bins), 0.0);
    std::vector<double> count(static_cast<std::size_t>(num_bins), 0.0);
    for (std::size_t i = 0; i < uncertainty.size(); ++i) {
        int b = static_cast<int>(uncertainty[i] * num_bins);
        if (b >= num_bins) b = num_bins - 1;
        sum_u[static_cast<std::size_t>(b)] += uncertainty[i];
        count[static_cast<std::size_t>(b)] += 1.0;
        if (!correct[i]) wrong[static_cast<std::size_t>(b)] += 1.0;
    }
    double total = 0.0;
    for (int b = 0; b < num_bins; ++b) {
        const auto i = static_cast<std::size_t>(b);
        if (count[i] == 0.0) continue;
        const double err = wrong[i] / count[i];
        const double mean_u = sum_u[i] / count[i];
        total += count[i] / static_cast<double>(uncertainty.size()) *
                 std::abs(err - 0.5 * mean_u);
    }
    return total;
}

// ---------------------------------------------------------------------------
// Miscalibration fixture

// Two clusters of binary predictions. The "calibrated" one draws an
// assertive probability q in (0.80, 0.999) and is right with probability q,
// so its error rate tracks its entropy. The "assertively wrong" one sits at
// q in (0.70, 0.78) — higher entropy than the calibrated bulk — and is
// always wrong, concentrating all its mass in the top uncertainty bins.
inline std::vector<ppg::ScoredGeneration> miscalibrated_fixture(
    int calibrated_count, int wrong_count, std::uint64_t seed) {
    ppg::Rng rng(seed);
    std::vector<ppg::ScoredGeneration> items;
    items.reserve(static_cast<std::size_t>(calibrated_count + wrong_count));
    const auto make = [](const std::string& id, double q, int argmax, int label) {
        ppg::ScoredGeneration item;
        item.id = id;
        Eigen::VectorXd p(2);
        p[argmax] = q;
        p[1 - argmax] = 1.0 - q;
        item.probs = ppg::PredictiveDistribution{p};
        item.uncertainty = ppg::normalized_entropy(item.probs);
        item.label = label;
        return item;
    };
    for (int i = 0; i < calibrated_count; ++i) {
        const double q = rng.uniform(0.80, 0.999);
        const int argmax = static_cast<int>(rng.uniform_index(2));
        const int label = rng.uniform() < q ? argmax : 1 - argmax;
        items.push_back(make("cal-" + std::to_string(i), q, argmax, label));
    }
    for (int i = 0; i < wrong_count; ++i) {
        const double q = rng.uniform(0.70, 0.78);
        const int argmax = static_cast<int>(rng.uniform_index(2));
        items.push_back(make("wrong-" + std::to_string(i), q, argmax, 1 - argmax));
    }
    return items;
}

inline double misclassification_rate(const std::vector<ppg::ScoredGeneration>& items) {
    double wrong = 0.0;
    for (const ppg::ScoredGeneration& item : items) {
        Eigen::Index argmax = 0;
        item.probs.probs.maxCoeff(&argmax);
        if (static_cast<int>(argmax) != *item.label) wrong += 1.0;
    }
    return wrong / static_cast<double>(items.size());
}

// ---------------------------------------------------------------------------
// Filesystem and process helpers

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("ppgdtuq_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

inline bool files_equal(const std::string& a, const std::string& b) {
    return read_file(a) == read_file(b);
}

// Runs the pipeline binary with the given arguments; returns its exit code
// and leaves combined stdout/stderr in `output` when requested. Only the
// binaries that spawn the CLI define PPG_CLI_PATH.
#ifdef PPG_CLI_PATH
inline int run_cli(const std::string& args, const TempDir& dir,
                   std::string* output = nullptr) {
    const std::string capture = dir.file("cli_output.txt");
    const std::string command =
        std::string(PPG_CLI_PATH) + " " + args + " > " + capture + " 2>&1";
    const int status = std::system(command.c_str());
    if (output != nullptr) *output = read_file(capture);
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -1;
}
#endif

// Minimal CSV reader for the report and reliability files the CLI writes
// (no quoting in those files, so splitting on commas is exact).
inline std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream is(path);
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

inline std::size_t csv_column(const std::vector<std::vector<std::string>>& rows,
                              const std::string& name) {
    const auto& header = rows.at(0);
    const auto it = std::find(header.begin(), header.end(), name);
    return static_cast<std::size_t>(it - header.begin());
}

}  // namespace testutil

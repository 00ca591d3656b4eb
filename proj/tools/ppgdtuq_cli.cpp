// Pipeline driver: synthesize datasets, corrupt them with noise, train the
// denoiser and the classifier, score/filter by uncertainty, and emit the
// calibration and comparison reports. Every stage writes its artifact plus a
// manifest so any number in a report can be traced back to a seed.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ppg/calibration.hpp"
#include "ppg/classifier.hpp"
#include "ppg/dataset_io.hpp"
#include "ppg/denoise.hpp"
#include "ppg/dtuq.hpp"
#include "ppg/errors.hpp"
#include "ppg/format.hpp"
#include "ppg/gan.hpp"
#include "ppg/hash.hpp"
#include "ppg/manifest.hpp"
#include "ppg/metrics.hpp"
#include "ppg/rng.hpp"
#include "ppg/signal.hpp"

namespace {

using nlohmann::json;

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream is(path);
    if (!is) throw ppg::ConfigError("config: cannot open '" + path + "'");
    json doc;
    try {
        is >> doc;
    } catch (const json::exception& e) {
        throw ppg::ConfigError("config: " + path + ": " + e.what());
    }
    if (!doc.is_object()) {
        throw ppg::ConfigError("config: " + path + ": root must be an object");
    }
    return doc;
}

json config_section(const json& config, const std::string& command) {
    if (!config.contains(command)) return json::object();
    const json& section = config.at(command);
    if (!section.is_object()) {
        throw ppg::ConfigError("config: section '" + command + "' must be an object");
    }
    return section;
}

// Flags win over config-file values; config keys are the long option names
// without the leading dashes.
template <typename T>
void config_override(const CLI::App* cmd, const json& section, const std::string& key,
                     T& value) {
    if (cmd->get_option("--" + key)->count() > 0) return;
    if (!section.contains(key)) return;
    try {
        value = section.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ppg::ConfigError("config: key '" + key + "': " + e.what());
    }
}

bool seed_explicit(const CLI::App* cmd, const json& section) {
    return cmd->get_option("--seed")->count() > 0 || section.contains("seed");
}

// Commands get disjoint default seed streams derived from the global seed.
std::uint64_t derive_seed(std::uint64_t global_seed, const std::string& command) {
    return ppg::splitmix64(global_seed ^ ppg::fnv1a64(command));
}

std::string with_suffix(const std::string& path, const std::string& suffix,
                        const std::string& extension) {
    std::filesystem::path p(path);
    return (p.parent_path() / (p.stem().string() + suffix + extension)).string();
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOptions {
    std::string out_dir = "data";
    std::string format = "binary";
    int train_count = 600;
    int val_count = 200;
    int test_count = 800;
    double duration_s = 25.0;
    double sample_rate_hz = 32.0;
    double af_jitter = 0.18;
    double nonaf_jitter = 0.05;
    std::uint64_t seed = 0;
};

int cmd_generate(const GenerateOptions& opt, bool deterministic) {
    ppg::SynthConfig base;
    base.duration_s = opt.duration_s;
    base.sample_rate_hz = opt.sample_rate_hz;
    base.af_interval_jitter = opt.af_jitter;
    base.non_af_interval_jitter = opt.nonaf_jitter;
    if (opt.train_count < 1 || opt.val_count < 1 || opt.test_count < 1) {
        throw ppg::ConfigError("generate: split sizes must be positive");
    }
    std::filesystem::create_directories(opt.out_dir);
    const std::string extension = opt.format == "text" ? ".jsonl" : ".ppgd";

    const std::vector<std::pair<std::string, int>> splits = {
        {"train", opt.train_count},
        {"validation", opt.val_count},
        {"test", opt.test_count}};
    std::vector<std::string> paths;
    for (const auto& [name, count] : splits) {
        const std::uint64_t split_seed =
            ppg::splitmix64(opt.seed ^ ppg::fnv1a64(name));
        ppg::Dataset dataset;
        dataset.split = name;
        dataset.records.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            ppg::SynthConfig config = base;
            config.seed = split_seed ^ static_cast<std::uint64_t>(i);
            dataset.records.push_back(ppg::synth_ppg(config, i % 2));
        }
        ppg::validate_dataset(dataset);
        const std::string path =
            (std::filesystem::path(opt.out_dir) / (name + extension)).string();
        ppg::write_dataset(dataset, path);
        paths.push_back(path);
        std::cout << "wrote " << path << " (" << count << " records)\n";
    }

    std::vector<std::string> hashes;
    for (const std::string& path : paths) hashes.push_back(ppg::hash_file(path));
    const std::string root = ppg::combined_hash(hashes);
    for (std::size_t i = 0; i < paths.size(); ++i) {
        ppg::Manifest manifest;
        manifest.command = "generate";
        manifest.seed = opt.seed;
        manifest.config = {{"split", splits[i].first},
                           {"count", splits[i].second},
                           {"duration-s", opt.duration_s},
                           {"sample-rate-hz", opt.sample_rate_hz},
                           {"af-jitter", opt.af_jitter},
                           {"nonaf-jitter", opt.nonaf_jitter},
                           {"format", opt.format}};
        manifest.outputs = {ppg::ArtifactRef{
            std::filesystem::path(paths[i]).filename().string(), hashes[i]}};
        manifest.root_dataset_hash = root;
        manifest.deterministic = deterministic;
        ppg::write_manifest(manifest, paths[i]);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// augment

struct AugmentOptions {
    std::string input;
    std::string output;
    double sigma = 0.1;
    double clamp_lo = 0.0;
    double clamp_hi = 2.0;
    std::uint64_t seed = 0;
};

int cmd_augment(const AugmentOptions& opt, bool deterministic) {
    const ppg::Dataset input = ppg::read_dataset(opt.input);
    ppg::Dataset output;
    output.split = input.split;
    output.records.reserve(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) {
        const ppg::LabeledSignal& record = input.records[i];
        ppg::LabeledSignal noisy = record;
        noisy.signal =
            ppg::add_noise(record.signal, opt.sigma, opt.clamp_lo, opt.clamp_hi,
                           ppg::splitmix64(opt.seed ^ i));
        output.records.push_back(std::move(noisy));
    }
    ppg::write_dataset(output, opt.output);
    std::cout << "wrote " << opt.output << " (" << output.size() << " records)\n";

    ppg::Manifest manifest;
    manifest.command = "augment";
    manifest.seed = opt.seed;
    manifest.config = {{"sigma", opt.sigma},
                       {"clamp-lo", opt.clamp_lo},
                       {"clamp-hi", opt.clamp_hi}};
    manifest.inputs = {ppg::artifact_ref(opt.input)};
    manifest.outputs = {ppg::artifact_ref(opt.output)};
    manifest.root_dataset_hash = ppg::resolve_root_hash({opt.input});
    manifest.deterministic = deterministic;
    ppg::write_manifest(manifest, opt.output);
    return 0;
}

// ---------------------------------------------------------------------------
// train-gan

struct TrainGanOptions {
    std::string noisy;
    std::string clean;
    std::string val_noisy;
    std::string val_clean;
    std::string model = "gan.bin";
    ppg::GanTrainConfig config;
};

int cmd_train_gan(const TrainGanOptions& opt, bool deterministic) {
    const std::vector<ppg::PairedSignals> train_pairs =
        ppg::pair_datasets(ppg::read_dataset(opt.noisy), ppg::read_dataset(opt.clean));
    const std::vector<ppg::PairedSignals> val_pairs = ppg::pair_datasets(
        ppg::read_dataset(opt.val_noisy), ppg::read_dataset(opt.val_clean));

    const ppg::GanTrainResult result =
        ppg::train_gan(train_pairs, val_pairs, opt.config);
    ppg::save_gan(opt.model, result.model);
    std::cout << "trained denoiser for " << result.epochs_run << " epochs; best "
              << "validation L1 " << ppg::format_number(result.best_val_l1)
              << " at epoch " << result.best_epoch << "\n";
    std::cout << "wrote " << opt.model << "\n";

    ppg::Manifest manifest;
    manifest.command = "train-gan";
    manifest.seed = opt.config.seed;
    manifest.config = {{"window", opt.config.window_length},
                       {"stride", opt.config.stride},
                       {"lr-d", opt.config.lr_discriminator},
                       {"lr-g", opt.config.lr_generator},
                       {"lambda-l1", opt.config.lambda_l1},
                       {"patience", opt.config.patience},
                       {"max-epochs", opt.config.max_epochs},
                       {"batch-size", opt.config.batch_size},
                       {"windows-per-signal", opt.config.windows_per_signal},
                       {"epochs-run", result.epochs_run},
                       {"best-epoch", result.best_epoch},
                       {"best-val-l1", result.best_val_l1}};
    manifest.inputs = {ppg::artifact_ref(opt.noisy), ppg::artifact_ref(opt.clean),
                       ppg::artifact_ref(opt.val_noisy),
                       ppg::artifact_ref(opt.val_clean)};
    manifest.outputs = {ppg::artifact_ref(opt.model)};
    manifest.root_dataset_hash = ppg::resolve_root_hash(
        {opt.noisy, opt.clean, opt.val_noisy, opt.val_clean});
    manifest.deterministic = deterministic;
    ppg::write_manifest(manifest, opt.model);
    return 0;
}

// ---------------------------------------------------------------------------
// train-classifier

struct TrainClassifierOptions {
    std::string train;
    std::string val;
    std::string model = "classifier.bin";
    ppg::ClassifierTrainConfig config;
};

int cmd_train_classifier(const TrainClassifierOptions& opt, bool deterministic) {
    const ppg::Dataset train = ppg::read_dataset(opt.train);
    const ppg::Dataset val = ppg::read_dataset(opt.val);
    const ppg::ClassifierTrainResult result =
        ppg::train_classifier(train, val, opt.config);
    ppg::save_classifier(opt.model, result.model);
    std::cout << "trained classifier";
    if (result.best_epoch > 0) {
        std::cout << "; best validation loss at epoch " << result.best_epoch;
    }
    std::cout << "\nwrote " << opt.model << "\n";

    ppg::Manifest manifest;
    manifest.command = "train-classifier";
    manifest.seed = opt.config.seed;
    manifest.config = {{"lr", opt.config.learning_rate},
                       {"epochs", opt.config.epochs},
                       {"batch-size", opt.config.batch_size},
                       {"best-epoch", result.best_epoch}};
    manifest.inputs = {ppg::artifact_ref(opt.train), ppg::artifact_ref(opt.val)};
    manifest.outputs = {ppg::artifact_ref(opt.model)};
    manifest.root_dataset_hash = ppg::resolve_root_hash({opt.train, opt.val});
    manifest.deterministic = deterministic;
    ppg::write_manifest(manifest, opt.model);
    return 0;
}

// ---------------------------------------------------------------------------
// denoise

struct DenoiseOptions {
    std::string input;
    std::string output;
    std::string method = "fir";
    double cutoff_hz = 4.0;
    int num_taps = 65;
    int window = 9;
    std::string model;
};

int cmd_denoise(const DenoiseOptions& opt, bool deterministic) {
    const ppg::Dataset input = ppg::read_dataset(opt.input);
    ppg::Dataset output;
    output.split = input.split;
    output.records.reserve(input.size());

    if (opt.method == "gan") {
        if (opt.model.empty()) {
            throw ppg::ConfigError("denoise: --method gan requires --model");
        }
        const ppg::GanModel model = ppg::load_gan(opt.model);
        for (const ppg::LabeledSignal& record : input.records) {
            ppg::LabeledSignal out = record;
            out.signal = ppg::gan_denoise(model, record.signal);
            output.records.push_back(std::move(out));
        }
    } else if (opt.method == "fir") {
        // One filter per sample rate; datasets are usually homogeneous.
        std::map<double, ppg::FirFilter> filters;
        for (const ppg::LabeledSignal& record : input.records) {
            auto it = filters.find(record.signal.sample_rate_hz);
            if (it == filters.end()) {
                it = filters
                         .emplace(record.signal.sample_rate_hz,
                                  ppg::design_lowpass(opt.cutoff_hz,
                                                      record.signal.sample_rate_hz,
                                                      opt.num_taps))
                         .first;
            }
            ppg::LabeledSignal out = record;
            out.signal = ppg::apply_fir(it->second, record.signal);
            output.records.push_back(std::move(out));
        }
    } else {
        for (const ppg::LabeledSignal& record : input.records) {
            ppg::LabeledSignal out = record;
            out.signal = ppg::moving_average(record.signal, opt.window);
            output.records.push_back(std::move(out));
        }
    }
    ppg::write_dataset(output, opt.output);
    std::cout << "wrote " << opt.output << " (" << output.size() << " records, "
              << opt.method << ")\n";

    ppg::Manifest manifest;
    manifest.command = "denoise";
    manifest.config = {{"method", opt.method}};
    if (opt.method == "fir") {
        manifest.config["cutoff-hz"] = opt.cutoff_hz;
        manifest.config["num-taps"] = opt.num_taps;
    } else if (opt.method == "movavg") {
        manifest.config["window"] = opt.window;
    }
    manifest.inputs = {ppg::artifact_ref(opt.input)};
    std::vector<std::string> lineage = {opt.input};
    if (!opt.model.empty()) {
        manifest.inputs.push_back(ppg::artifact_ref(opt.model));
        lineage.push_back(opt.model);
    }
    manifest.outputs = {ppg::artifact_ref(opt.output)};
    manifest.root_dataset_hash = ppg::resolve_root_hash(lineage);
    manifest.deterministic = deterministic;
    ppg::write_manifest(manifest, opt.output);
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
    std::string dataset;
    std::string model;
    std::string scored = "scored.jsonl";
    int bins = 10;
    std::string baseline_scored;
};

int cmd_evaluate(const EvaluateOptions& opt, bool deterministic) {
    const ppg::Dataset dataset = ppg::read_dataset(opt.dataset);
    if (dataset.size() == 0) throw ppg::IntegrityError("evaluate: empty dataset");
    const ppg::ClassifierModel model = ppg::load_classifier(opt.model);

    std::vector<ppg::ScoredGeneration> scored;
    scored.reserve(dataset.size());
    std::vector<ppg::LabeledPrediction> predictions;
    predictions.reserve(dataset.size());
    for (const ppg::LabeledSignal& record : dataset.records) {
        scored.push_back(ppg::score_generation(model, record));
        predictions.push_back({scored.back().probs, record.label});
    }
    ppg::write_scored(scored, opt.scored);
    std::cout << "wrote " << opt.scored << " (" << scored.size() << " records)\n";
    std::vector<std::string> outputs = {opt.scored};

    const auto emit_reliability = [&](std::optional<int> class_filter,
                                      const std::string& suffix) {
        const ppg::ReliabilityReport report =
            ppg::reliability_report(predictions, opt.bins, class_filter);
        const std::string csv = with_suffix(opt.scored, suffix, ".csv");
        const std::string svg = with_suffix(opt.scored, suffix, ".svg");
        ppg::write_reliability_csv(report, csv);
        ppg::write_reliability_svg(report, svg);
        outputs.push_back(csv);
        outputs.push_back(svg);
        std::cout << "uce" << (suffix.ends_with("class0")   ? " (class 0)"
                               : suffix.ends_with("class1") ? " (class 1)"
                                                            : "")
                  << " = " << ppg::format_number(report.uce) << " over "
                  << report.total << " items\n";
    };
    emit_reliability(std::nullopt, "_reliability");
    emit_reliability(0, "_reliability_class0");
    emit_reliability(1, "_reliability_class1");

    if (!opt.baseline_scored.empty()) {
        const std::vector<ppg::ScoredGeneration> baseline =
            ppg::read_scored(opt.baseline_scored);
        std::map<std::string, double> baseline_by_id;
        for (const ppg::ScoredGeneration& item : baseline) {
            baseline_by_id[item.id] = item.uncertainty;
        }
        std::map<std::string, double> ours_by_id;
        for (const ppg::ScoredGeneration& item : scored) {
            ours_by_id[item.id] = item.uncertainty;
        }
        std::vector<double> baseline_entropy;
        std::vector<double> our_entropy;
        std::vector<std::string> missing;
        for (const auto& [id, uncertainty] : ours_by_id) {
            const auto it = baseline_by_id.find(id);
            if (it == baseline_by_id.end()) {
                missing.push_back(id);
                continue;
            }
            our_entropy.push_back(uncertainty);
            baseline_entropy.push_back(it->second);
        }
        if (!missing.empty() || baseline_by_id.size() != ours_by_id.size()) {
            throw ppg::IntegrityError(
                "evaluate: baseline scored file does not cover the same ids as '" +
                opt.dataset + "'");
        }
        // A constant entropy series (every prediction fully saturated) leaves
        // the correlation undefined; report null rather than failing the run.
        const auto correlate =
            [&](double (*stat)(const std::vector<double>&,
                               const std::vector<double>&)) -> json {
            try {
                return stat(baseline_entropy, our_entropy);
            } catch (const ppg::NumericError&) {
                return nullptr;
            }
        };
        const json correlation = {
            {"n", our_entropy.size()},
            {"pearson", correlate(&ppg::pearson)},
            {"spearman", correlate(&ppg::spearman)},
        };
        const std::string path =
            with_suffix(opt.scored, "_entropy_correlation", ".json");
        std::ofstream os(path, std::ios::binary);
        if (!os) throw ppg::ArgumentError("evaluate: cannot open '" + path + "'");
        os << correlation.dump(2) << '\n';
        outputs.push_back(path);
        const auto describe = [](const json& value) {
            return value.is_null() ? std::string("undefined")
                                   : ppg::format_number(value.get<double>());
        };
        std::cout << "entropy correlation vs baseline: pearson "
                  << describe(correlation["pearson"]) << ", spearman "
                  << describe(correlation["spearman"]) << "\n";
    }

    ppg::Manifest manifest;
    manifest.command = "evaluate";
    manifest.config = {{"bins", opt.bins}};
    manifest.inputs = {ppg::artifact_ref(opt.dataset), ppg::artifact_ref(opt.model)};
    std::vector<std::string> lineage = {opt.dataset, opt.model};
    if (!opt.baseline_scored.empty()) {
        manifest.inputs.push_back(ppg::artifact_ref(opt.baseline_scored));
        lineage.push_back(opt.baseline_scored);
    }
    for (const std::string& path : outputs) {
        manifest.outputs.push_back(ppg::artifact_ref(path));
    }
    manifest.root_dataset_hash = ppg::resolve_root_hash(lineage);
    manifest.deterministic = deterministic;
    ppg::write_manifest(manifest, opt.scored);
    return 0;
}

// ---------------------------------------------------------------------------
// filter

struct FilterOptions {
    std::string scored;
    std::string output;
    double keep_fraction = 0.75;
};

int cmd_filter(const FilterOptions& opt, bool deterministic) {
    const std::vector<ppg::ScoredGeneration> items = ppg::read_scored(opt.scored);
    const std::vector<ppg::ScoredGeneration> kept =
        ppg::filter_by_uncertainty(items, opt.keep_fraction);
    ppg::write_scored(kept, opt.output);
    std::cout << "kept " << kept.size() << " of " << items.size() << " records -> "
              << opt.output << "\n";

    ppg::Manifest manifest;
    manifest.command = "filter";
    manifest.config = {{"keep-fraction", opt.keep_fraction}};
    manifest.inputs = {ppg::artifact_ref(opt.scored)};
    manifest.outputs = {ppg::artifact_ref(opt.output)};
    manifest.root_dataset_hash = ppg::resolve_root_hash({opt.scored});
    manifest.deterministic = deterministic;
    ppg::write_manifest(manifest, opt.output);
    return 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportOptions {
    std::string clean_scored;
    std::string noisy_scored;
    std::string denoised_scored;
    std::string filtered_scored;
    std::string output = "report.csv";
    double operating_level = 0.8;
};

int cmd_report(const ReportOptions& opt, bool deterministic) {
    const auto clean = ppg::read_scored(opt.clean_scored);
    const auto noisy = ppg::read_scored(opt.noisy_scored);
    const auto denoised = ppg::read_scored(opt.denoised_scored);
    const auto filtered = ppg::read_scored(opt.filtered_scored);
    if (denoised.empty()) throw ppg::IntegrityError("report: empty denoised file");

    // Mixing scored files from different pipeline runs produces nonsense
    // comparisons, so lineage must agree before any metric is computed.
    const std::string root = ppg::resolve_root_hash(
        {opt.clean_scored, opt.noisy_scored, opt.denoised_scored,
         opt.filtered_scored});

    std::vector<std::string> filtered_ids;
    filtered_ids.reserve(filtered.size());
    for (const ppg::ScoredGeneration& item : filtered) filtered_ids.push_back(item.id);

    ppg::ConditionReportConfig config;
    config.operating_level = opt.operating_level;
    config.filter_fraction = static_cast<double>(filtered.size()) /
                             static_cast<double>(denoised.size());
    const ppg::ConditionReport report =
        ppg::condition_report(clean, noisy, denoised, filtered_ids, config);

    for (const ppg::ConditionRow& row : report.rows) {
        const std::pair<const char*, const ppg::OperatingPoint*> points[] = {
            {"mcc at the sensitivity constraint", &row.metrics.mcc_at_sens},
            {"mcc at the specificity constraint", &row.metrics.mcc_at_spec},
            {"sensitivity at the specificity constraint",
             &row.metrics.sensitivity_at_spec},
            {"specificity at the sensitivity constraint",
             &row.metrics.specificity_at_sens},
        };
        for (const auto& [name, point] : points) {
            if (!point->feasible) {
                throw ppg::InfeasibleError("report: condition '" + row.condition +
                                           "': " + name + " is unattainable");
            }
        }
    }

    ppg::write_condition_csv(report, opt.output);
    const std::string text = ppg::render_condition_text(report);
    const std::string text_path = with_suffix(opt.output, "", ".txt");
    std::ofstream os(text_path, std::ios::binary);
    if (!os) throw ppg::ArgumentError("report: cannot open '" + text_path + "'");
    os << text;
    os.close();
    std::cout << text;
    std::cout << "wrote " << opt.output << " and " << text_path << "\n";

    ppg::Manifest manifest;
    manifest.command = "report";
    manifest.config = {{"operating-level", opt.operating_level},
                       {"filter-fraction", config.filter_fraction}};
    manifest.inputs = {
        ppg::artifact_ref(opt.clean_scored), ppg::artifact_ref(opt.noisy_scored),
        ppg::artifact_ref(opt.denoised_scored),
        ppg::artifact_ref(opt.filtered_scored)};
    manifest.outputs = {ppg::artifact_ref(opt.output),
                        ppg::artifact_ref(text_path)};
    manifest.root_dataset_hash = root;
    manifest.deterministic = deterministic;
    ppg::write_manifest(manifest, opt.output);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Denoising with decision-theoretic uncertainty auditing for "
                 "synthetic PPG signals"};
    app.require_subcommand(1);
    std::string config_path;
    std::uint64_t global_seed = 42;
    bool deterministic = false;
    app.add_option("--config", config_path, "JSON config file; flags win");
    app.add_option("--seed", global_seed, "global seed commands derive theirs from");
    app.add_flag("--deterministic", deterministic,
                 "omit timestamps from manifests for byte-identical reruns");

    GenerateOptions gen;
    CLI::App* generate = app.add_subcommand("generate", "synthesize split datasets");
    generate->add_option("--out-dir", gen.out_dir, "output directory");
    generate->add_option("--format", gen.format, "dataset file format")
        ->check(CLI::IsMember({"binary", "text"}));
    generate->add_option("--train-count", gen.train_count, "training signals");
    generate->add_option("--val-count", gen.val_count, "validation signals");
    generate->add_option("--test-count", gen.test_count, "test signals");
    generate->add_option("--duration-s", gen.duration_s, "signal duration");
    generate->add_option("--sample-rate-hz", gen.sample_rate_hz, "sample rate");
    generate->add_option("--af-jitter", gen.af_jitter,
                         "beat-interval CV for the AF class");
    generate->add_option("--nonaf-jitter", gen.nonaf_jitter,
                         "beat-interval CV for the non-AF class");
    generate->add_option("--seed", gen.seed, "synthesis seed");

    AugmentOptions aug;
    CLI::App* augment = app.add_subcommand("augment", "add clamped Gaussian noise");
    augment->add_option("--input", aug.input, "dataset to corrupt")->required();
    augment->add_option("--output", aug.output, "noisy dataset path")->required();
    augment->add_option("--sigma", aug.sigma, "noise standard deviation");
    augment->add_option("--clamp-lo", aug.clamp_lo, "lower clamp");
    augment->add_option("--clamp-hi", aug.clamp_hi, "upper clamp");
    augment->add_option("--seed", aug.seed, "noise seed");

    TrainGanOptions tg;
    CLI::App* train_gan = app.add_subcommand("train-gan", "train the denoiser");
    train_gan->add_option("--noisy", tg.noisy, "noisy training dataset")->required();
    train_gan->add_option("--clean", tg.clean, "clean training dataset")->required();
    train_gan->add_option("--val-noisy", tg.val_noisy, "noisy validation dataset")
        ->required();
    train_gan->add_option("--val-clean", tg.val_clean, "clean validation dataset")
        ->required();
    train_gan->add_option("--model", tg.model, "model output path");
    train_gan->add_option("--window", tg.config.window_length, "window length");
    train_gan->add_option("--stride", tg.config.stride, "denoising stride");
    train_gan->add_option("--lr-d", tg.config.lr_discriminator,
                          "discriminator learning rate");
    train_gan->add_option("--lr-g", tg.config.lr_generator, "generator learning rate");
    train_gan->add_option("--lambda-l1", tg.config.lambda_l1, "L1 weight");
    train_gan->add_option("--patience", tg.config.patience,
                          "epochs without improvement before stopping");
    train_gan->add_option("--max-epochs", tg.config.max_epochs, "epoch cap");
    train_gan->add_option("--batch-size", tg.config.batch_size, "windows per batch");
    train_gan->add_option("--windows-per-signal", tg.config.windows_per_signal,
                          "crops per signal per epoch");
    train_gan->add_option("--seed", tg.config.seed, "training seed");

    TrainClassifierOptions tc;
    CLI::App* train_classifier =
        app.add_subcommand("train-classifier", "train the probabilistic classifier");
    train_classifier->add_option("--train", tc.train, "training dataset")->required();
    train_classifier->add_option("--val", tc.val, "validation dataset")->required();
    train_classifier->add_option("--model", tc.model, "model output path");
    train_classifier->add_option("--lr", tc.config.learning_rate, "learning rate");
    train_classifier->add_option("--epochs", tc.config.epochs, "training epochs");
    train_classifier->add_option("--batch-size", tc.config.batch_size, "batch size");
    train_classifier->add_option("--seed", tc.config.seed, "training seed");

    DenoiseOptions dn;
    CLI::App* denoise = app.add_subcommand("denoise", "denoise a dataset");
    denoise->add_option("--input", dn.input, "noisy dataset")->required();
    denoise->add_option("--output", dn.output, "denoised dataset path")->required();
    denoise->add_option("--method", dn.method, "fir, movavg, or gan")
        ->check(CLI::IsMember({"fir", "movavg", "gan"}));
    denoise->add_option("--cutoff-hz", dn.cutoff_hz, "FIR cutoff");
    denoise->add_option("--num-taps", dn.num_taps, "FIR tap count (odd)");
    denoise->add_option("--window", dn.window, "moving-average window (odd)");
    denoise->add_option("--model", dn.model, "trained denoiser model");

    EvaluateOptions ev;
    CLI::App* evaluate =
        app.add_subcommand("evaluate", "score a dataset and audit calibration");
    evaluate->add_option("--dataset", ev.dataset, "dataset to score")->required();
    evaluate->add_option("--model", ev.model, "classifier model")->required();
    evaluate->add_option("--scored", ev.scored, "scored output path");
    evaluate->add_option("--bins", ev.bins, "uncertainty bins");
    evaluate->add_option("--baseline-scored", ev.baseline_scored,
                         "earlier scored file for the entropy correlation");

    FilterOptions fl;
    CLI::App* filter =
        app.add_subcommand("filter", "keep the lowest-uncertainty records");
    filter->add_option("--scored", fl.scored, "scored input file")->required();
    filter->add_option("--output", fl.output, "filtered output path")->required();
    filter->add_option("--keep-fraction", fl.keep_fraction, "fraction to keep");

    ReportOptions rp;
    CLI::App* report =
        app.add_subcommand("report", "four-condition comparison report");
    report->add_option("--clean-scored", rp.clean_scored, "clean scored file")
        ->required();
    report->add_option("--noisy-scored", rp.noisy_scored, "noisy scored file")
        ->required();
    report->add_option("--denoised-scored", rp.denoised_scored,
                       "denoised scored file")
        ->required();
    report->add_option("--filtered-scored", rp.filtered_scored,
                       "filtered scored file")
        ->required();
    report->add_option("--output", rp.output, "report CSV path");
    report->add_option("--operating-level", rp.operating_level,
                       "sensitivity/specificity constraint level");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(ppg::ExitCode::Config);
    }

    try {
        const json config = load_config_file(config_path);
        if (config.contains("seed") && app.get_option("--seed")->count() == 0) {
            global_seed = config.at("seed").get<std::uint64_t>();
        }
        if (config.contains("deterministic") &&
            app.get_option("--deterministic")->count() == 0) {
            deterministic = config.at("deterministic").get<bool>();
        }

        if (generate->parsed()) {
            const json section = config_section(config, "generate");
            config_override(generate, section, "out-dir", gen.out_dir);
            config_override(generate, section, "format", gen.format);
            config_override(generate, section, "train-count", gen.train_count);
            config_override(generate, section, "val-count", gen.val_count);
            config_override(generate, section, "test-count", gen.test_count);
            config_override(generate, section, "duration-s", gen.duration_s);
            config_override(generate, section, "sample-rate-hz", gen.sample_rate_hz);
            config_override(generate, section, "af-jitter", gen.af_jitter);
            config_override(generate, section, "nonaf-jitter", gen.nonaf_jitter);
            config_override(generate, section, "seed", gen.seed);
            if (!seed_explicit(generate, section)) {
                gen.seed = derive_seed(global_seed, "generate");
            }
            return cmd_generate(gen, deterministic);
        }
        if (augment->parsed()) {
            const json section = config_section(config, "augment");
            config_override(augment, section, "sigma", aug.sigma);
            config_override(augment, section, "clamp-lo", aug.clamp_lo);
            config_override(augment, section, "clamp-hi", aug.clamp_hi);
            config_override(augment, section, "seed", aug.seed);
            if (!seed_explicit(augment, section)) {
                aug.seed = derive_seed(global_seed, "augment");
            }
            return cmd_augment(aug, deterministic);
        }
        if (train_gan->parsed()) {
            const json section = config_section(config, "train-gan");
            config_override(train_gan, section, "window", tg.config.window_length);
            config_override(train_gan, section, "stride", tg.config.stride);
            config_override(train_gan, section, "lr-d", tg.config.lr_discriminator);
            config_override(train_gan, section, "lr-g", tg.config.lr_generator);
            config_override(train_gan, section, "lambda-l1", tg.config.lambda_l1);
            config_override(train_gan, section, "patience", tg.config.patience);
            config_override(train_gan, section, "max-epochs", tg.config.max_epochs);
            config_override(train_gan, section, "batch-size", tg.config.batch_size);
            config_override(train_gan, section, "windows-per-signal",
                            tg.config.windows_per_signal);
            config_override(train_gan, section, "seed", tg.config.seed);
            if (!seed_explicit(train_gan, section)) {
                tg.config.seed = derive_seed(global_seed, "train-gan");
            }
            return cmd_train_gan(tg, deterministic);
        }
        if (train_classifier->parsed()) {
            const json section = config_section(config, "train-classifier");
            config_override(train_classifier, section, "lr", tc.config.learning_rate);
            config_override(train_classifier, section, "epochs", tc.config.epochs);
            config_override(train_classifier, section, "batch-size",
                            tc.config.batch_size);
            config_override(train_classifier, section, "seed", tc.config.seed);
            if (!seed_explicit(train_classifier, section)) {
                tc.config.seed = derive_seed(global_seed, "train-classifier");
            }
            return cmd_train_classifier(tc, deterministic);
        }
        if (denoise->parsed()) {
            const json section = config_section(config, "denoise");
            config_override(denoise, section, "method", dn.method);
            config_override(denoise, section, "cutoff-hz", dn.cutoff_hz);
            config_override(denoise, section, "num-taps", dn.num_taps);
            config_override(denoise, section, "window", dn.window);
            config_override(denoise, section, "model", dn.model);
            return cmd_denoise(dn, deterministic);
        }
        if (evaluate->parsed()) {
            const json section = config_section(config, "evaluate");
            config_override(evaluate, section, "bins", ev.bins);
            return cmd_evaluate(ev, deterministic);
        }
        if (filter->parsed()) {
            const json section = config_section(config, "filter");
            config_override(filter, section, "keep-fraction", fl.keep_fraction);
            return cmd_filter(fl, deterministic);
        }
        if (report->parsed()) {
            const json section = config_section(config, "report");
            config_override(report, section, "operating-level", rp.operating_level);
            return cmd_report(rp, deterministic);
        }
    } catch (const ppg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.exit_code());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return static_cast<int>(ppg::ExitCode::Numeric);
    }
    return 0;
}

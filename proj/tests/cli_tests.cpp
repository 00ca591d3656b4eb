// Drives the installed binary end to end: exit codes, artifact plumbing,
// config overrides, and byte-level determinism.
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "helpers.hpp"
#include "ppg/calibration.hpp"
#include "ppg/dataset_io.hpp"
#include "ppg/dtuq.hpp"
#include "ppg/errors.hpp"
#include "ppg/manifest.hpp"

using namespace ppg;

namespace {

// One shared pipeline run that the read-only cases below inspect. Built on
// first use; `failed_step` records the first command that exited nonzero.
struct Pipeline {
    testutil::TempDir dir{"cli_pipeline"};
    std::string failed_step;
    std::string failed_output;

    std::string file(const std::string& name) const { return dir.file(name); }

    void run(const std::string& step, const std::string& args) {
        if (!failed_step.empty()) return;
        std::string output;
        if (testutil::run_cli(args, dir, &output) != 0) {
            failed_step = step;
            failed_output = output;
        }
    }
};

const Pipeline& pipeline() {
    static Pipeline p;
    static const bool built = [] {
        const std::string common = "--deterministic --seed 4242 ";
        const std::string data = p.file("data");
        p.run("generate", common + "generate --out-dir " + data +
                              " --train-count 30 --val-count 10 --test-count 40");
        for (const char* split : {"train", "validation", "test"}) {
            p.run("augment", common + "augment --input " + data + "/" + split +
                                 ".ppgd --output " + data + "/" + split +
                                 "_noisy.ppgd --sigma 0.2");
        }
        p.run("train-gan", common + "train-gan --noisy " + data +
                               "/train_noisy.ppgd --clean " + data +
                               "/train.ppgd --val-noisy " + data +
                               "/validation_noisy.ppgd --val-clean " + data +
                               "/validation.ppgd --model " + p.file("gan.bin") +
                               " --max-epochs 2");
        p.run("train-classifier", common + "train-classifier --train " + data +
                                      "/train.ppgd --val " + data +
                                      "/validation.ppgd --model " +
                                      p.file("classifier.bin"));
        p.run("denoise", common + "denoise --input " + data +
                             "/test_noisy.ppgd --output " + data +
                             "/test_denoised.ppgd --method fir");
        p.run("evaluate clean", common + "evaluate --dataset " + data +
                                    "/test.ppgd --model " +
                                    p.file("classifier.bin") + " --scored " +
                                    p.file("clean_scored.jsonl"));
        p.run("evaluate noisy", common + "evaluate --dataset " + data +
                                    "/test_noisy.ppgd --model " +
                                    p.file("classifier.bin") + " --scored " +
                                    p.file("noisy_scored.jsonl"));
        p.run("evaluate denoised",
              common + "evaluate --dataset " + data + "/test_denoised.ppgd" +
                  " --model " + p.file("classifier.bin") + " --scored " +
                  p.file("denoised_scored.jsonl") + " --baseline-scored " +
                  p.file("noisy_scored.jsonl"));
        p.run("filter", common + "filter --scored " +
                            p.file("denoised_scored.jsonl") + " --output " +
                            p.file("filtered_scored.jsonl") +
                            " --keep-fraction 0.75");
        p.run("report", common + "report --clean-scored " +
                            p.file("clean_scored.jsonl") + " --noisy-scored " +
                            p.file("noisy_scored.jsonl") + " --denoised-scored " +
                            p.file("denoised_scored.jsonl") +
                            " --filtered-scored " +
                            p.file("filtered_scored.jsonl") + " --output " +
                            p.file("report.csv"));
        return true;
    }();
    (void)built;
    return p;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream os(path);
    for (const auto& line : lines) os << line << '\n';
}

// Two records whose top class-1 score belongs to the class-0 item, so no
// threshold can reach high specificity.
const std::vector<std::string> kInfeasibleScored = {
    R"({"id":"a","uncertainty":0.72,"probs":[0.8,0.2],"label":1})",
    R"({"id":"b","uncertainty":0.47,"probs":[0.1,0.9],"label":0})",
};

}  // namespace

TEST_SUITE("cli pipeline") {

TEST_CASE("the full pipeline runs end to end") {
    const Pipeline& p = pipeline();
    REQUIRE_MESSAGE(p.failed_step.empty(),
                    "step '", p.failed_step, "' failed:\n", p.failed_output);
    for (const char* name :
         {"data/train.ppgd", "data/test_denoised.ppgd", "gan.bin",
          "classifier.bin", "clean_scored.jsonl", "denoised_scored.jsonl",
          "denoised_scored_reliability.csv", "denoised_scored_reliability.svg",
          "denoised_scored_reliability_class0.csv",
          "denoised_scored_reliability_class1.csv",
          "denoised_scored_entropy_correlation.json", "filtered_scored.jsonl",
          "report.csv", "report.txt"}) {
        CAPTURE(name);
        CHECK(std::filesystem::exists(p.file(name)));
    }
    // Every artifact carries a manifest with the shared dataset lineage.
    const auto root = read_root_hash(p.file("data/train.ppgd"));
    REQUIRE(root.has_value());
    for (const char* name :
         {"data/test_denoised.ppgd", "gan.bin", "classifier.bin",
          "denoised_scored.jsonl", "filtered_scored.jsonl", "report.csv"}) {
        CAPTURE(name);
        CHECK(read_root_hash(p.file(name)) == root);
    }
}

TEST_CASE("the report carries four conditions over the full test split") {
    const Pipeline& p = pipeline();
    REQUIRE(p.failed_step.empty());
    const auto rows = testutil::read_csv(p.file("report.csv"));
    REQUIRE(rows.size() == 5);
    const std::size_t cond = testutil::csv_column(rows, "condition");
    const std::size_t count = testutil::csv_column(rows, "count");
    const std::size_t auc = testutil::csv_column(rows, "auc");
    CHECK(rows[1][cond] == "unaugmented");
    CHECK(rows[2][cond] == "noisy");
    CHECK(rows[3][cond] == "denoised");
    CHECK(rows[4][cond] == "denoised_low_uncertainty");
    CHECK(rows[1][count] == "40");
    CHECK(rows[4][count] == "30");  // ceil(0.75 * 40)
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const double value = std::stod(rows[r][auc]);
        CHECK(value >= 0.0);
        CHECK(value <= 1.0);
    }
}

TEST_CASE("the entropy correlation sidecar compares denoised against noisy") {
    const Pipeline& p = pipeline();
    REQUIRE(p.failed_step.empty());
    const auto doc = nlohmann::json::parse(
        testutil::read_file(p.file("denoised_scored_entropy_correlation.json")));
    CHECK(doc.at("n") == 40);
    for (const char* key : {"pearson", "spearman"}) {
        const double value = doc.at(key);
        CHECK(value >= -1.0);
        CHECK(value <= 1.0);
    }
}

TEST_CASE("the reliability csv reproduces the library's calibration audit") {
    const Pipeline& p = pipeline();
    REQUIRE(p.failed_step.empty());

    // Recompute the audit from the scored file through the library...
    const auto items = read_scored(p.file("denoised_scored.jsonl"));
    std::vector<LabeledPrediction> predictions;
    for (const auto& item : items) {
        REQUIRE(item.label.has_value());
        predictions.push_back({item.probs, *item.label});
    }
    const ReliabilityReport report = reliability_report(predictions, 10, std::nullopt);

    // ...and independently from the emitted csv's columns.
    const auto rows = testutil::read_csv(p.file("denoised_scored_reliability.csv"));
    REQUIRE(rows.size() == 11);  // header + one row per bin
    const std::size_t count_col = testutil::csv_column(rows, "count");
    const std::size_t uncert_col = testutil::csv_column(rows, "mean_uncert");
    const std::size_t err_col = testutil::csv_column(rows, "mean_err");
    double total = 0.0;
    double weighted = 0.0;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const double count = std::stod(rows[r][count_col]);
        if (count == 0.0) continue;
        const double uncert = std::stod(rows[r][uncert_col]);
        const double err = std::stod(rows[r][err_col]);
        total += count;
        weighted += count * std::abs(err - kCalibrationSlope * uncert);
    }
    REQUIRE(total == static_cast<double>(items.size()));
    CHECK(weighted / total == doctest::Approx(report.uce).epsilon(1e-9));
}

TEST_CASE("filtering with keep fraction one reproduces its input bytes") {
    const Pipeline& p = pipeline();
    REQUIRE(p.failed_step.empty());
    testutil::TempDir dir("cli_filter_identity");
    const int code = testutil::run_cli(
        "--deterministic filter --scored " + p.file("denoised_scored.jsonl") +
            " --output " + dir.file("all.jsonl") + " --keep-fraction 1.0",
        dir);
    REQUIRE(code == 0);
    CHECK(testutil::files_equal(p.file("denoised_scored.jsonl"),
                                dir.file("all.jsonl")));
}

}

TEST_SUITE("cli exit codes") {

TEST_CASE("help exits zero") {
    testutil::TempDir dir("cli_help");
    CHECK(testutil::run_cli("--help", dir) == 0);
    CHECK(testutil::run_cli("generate --help", dir) == 0);
}

TEST_CASE("argument mistakes exit 2") {
    testutil::TempDir dir("cli_args");
    CHECK(testutil::run_cli("frobnicate", dir) == 2);
    CHECK(testutil::run_cli("generate --no-such-flag", dir) == 2);
    CHECK(testutil::run_cli("augment --sigma 0.1", dir) == 2);  // missing required
    CHECK(testutil::run_cli("", dir) == 2);  // a subcommand is required
}

TEST_CASE("config file problems exit 2") {
    testutil::TempDir dir("cli_config_err");
    std::string output;
    CHECK(testutil::run_cli("--config " + dir.file("absent.json") +
                                " generate --out-dir " + dir.file("d"),
                            dir, &output) == 2);
    write_lines(dir.file("broken.json"), {"{not json"});
    CHECK(testutil::run_cli("--config " + dir.file("broken.json") +
                                " generate --out-dir " + dir.file("d"),
                            dir) == 2);
    write_lines(dir.file("array.json"), {"[1, 2, 3]"});
    CHECK(testutil::run_cli("--config " + dir.file("array.json") +
                                " generate --out-dir " + dir.file("d"),
                            dir) == 2);
}

TEST_CASE("denoising with the trained method but no model exits 2") {
    const Pipeline& p = pipeline();
    REQUIRE(p.failed_step.empty());
    testutil::TempDir dir("cli_no_model");
    std::string output;
    const int code = testutil::run_cli(
        "denoise --input " + p.file("data/test_noisy.ppgd") + " --output " +
            dir.file("out.ppgd") + " --method gan",
        dir, &output);
    CHECK(code == 2);
    CHECK(output.find("model") != std::string::npos);
}

TEST_CASE("corrupt inputs exit 3") {
    const Pipeline& p = pipeline();
    REQUIRE(p.failed_step.empty());
    testutil::TempDir dir("cli_corrupt");

    write_lines(dir.file("garbage.jsonl"), {"this is not a dataset"});
    CHECK(testutil::run_cli("evaluate --dataset " + dir.file("garbage.jsonl") +
                                " --model " + p.file("classifier.bin") +
                                " --scored " + dir.file("s.jsonl"),
                            dir) == 3);

    // A classifier whose embedded feature-schema hash no longer matches.
    std::string bytes = testutil::read_file(p.file("classifier.bin"));
    bytes[5] ^= 0x40;
    std::ofstream os(dir.file("stale.bin"), std::ios::binary);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    os.close();
    std::string output;
    CHECK(testutil::run_cli("evaluate --dataset " + p.file("data/test.ppgd") +
                                " --model " + dir.file("stale.bin") +
                                " --scored " + dir.file("s.jsonl"),
                            dir, &output) == 3);
}

TEST_CASE("mixing scored files from different lineages exits 3") {
    testutil::TempDir dir("cli_lineage");
    for (const char* name : {"clean", "noisy", "denoised", "filtered"}) {
        write_lines(dir.file(std::string(name) + ".jsonl"), kInfeasibleScored);
    }
    Manifest a;
    a.command = "evaluate";
    a.deterministic = true;
    a.root_dataset_hash = "aaaaaaaaaaaaaaaa";
    write_manifest(a, dir.file("clean.jsonl"));
    Manifest b = a;
    b.root_dataset_hash = "bbbbbbbbbbbbbbbb";
    write_manifest(b, dir.file("denoised.jsonl"));

    std::string output;
    const int code = testutil::run_cli(
        "report --clean-scored " + dir.file("clean.jsonl") + " --noisy-scored " +
            dir.file("noisy.jsonl") + " --denoised-scored " +
            dir.file("denoised.jsonl") + " --filtered-scored " +
            dir.file("filtered.jsonl") + " --output " + dir.file("report.csv"),
        dir, &output);
    CHECK(code == 3);
    CHECK_FALSE(std::filesystem::exists(dir.file("report.csv")));
}

TEST_CASE("training divergence exits 4") {
    const Pipeline& p = pipeline();
    REQUIRE(p.failed_step.empty());
    testutil::TempDir dir("cli_diverge");
    std::string output;
    const int code = testutil::run_cli(
        "train-gan --noisy " + p.file("data/train_noisy.ppgd") + " --clean " +
            p.file("data/train.ppgd") + " --val-noisy " +
            p.file("data/validation_noisy.ppgd") + " --val-clean " +
            p.file("data/validation.ppgd") + " --model " + dir.file("gan.bin") +
            " --max-epochs 12 --window 16 --lr-d 1e18",
        dir, &output);
    CHECK(code == 4);
}

TEST_CASE("an unattainable operating constraint exits 5 and names the row") {
    testutil::TempDir dir("cli_infeasible");
    for (const char* name : {"clean", "noisy", "denoised", "filtered"}) {
        write_lines(dir.file(std::string(name) + ".jsonl"), kInfeasibleScored);
    }
    std::string output;
    const int code = testutil::run_cli(
        "report --clean-scored " + dir.file("clean.jsonl") + " --noisy-scored " +
            dir.file("noisy.jsonl") + " --denoised-scored " +
            dir.file("denoised.jsonl") + " --filtered-scored " +
            dir.file("filtered.jsonl") + " --output " + dir.file("report.csv"),
        dir, &output);
    CHECK(code == 5);
    CHECK(output.find("unaugmented") != std::string::npos);
    CHECK(output.find("specificity") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir.file("report.csv")));
}

}

TEST_SUITE("cli configuration") {

TEST_CASE("config file values apply and explicit flags beat them") {
    testutil::TempDir dir("cli_config");
    write_lines(dir.file("settings.json"),
                {R"({"generate": {"train-count": 7, "test-count": 9,)",
                 R"(  "duration-s": 8, "val-count": 3}})"});
    const int code = testutil::run_cli(
        "--deterministic --config " + dir.file("settings.json") +
            " generate --out-dir " + dir.file("data") + " --test-count 4",
        dir);
    REQUIRE(code == 0);
    CHECK(read_dataset(dir.file("data/train.ppgd")).size() == 7);  // from config
    CHECK(read_dataset(dir.file("data/validation.ppgd")).size() == 3);
    CHECK(read_dataset(dir.file("data/test.ppgd")).size() == 4);  // flag wins
}

TEST_CASE("the text format writes datasets the reader accepts") {
    testutil::TempDir dir("cli_text");
    const int code = testutil::run_cli(
        "--deterministic generate --out-dir " + dir.file("data") +
            " --format text --train-count 3 --val-count 2 --test-count 2"
            " --duration-s 8",
        dir);
    REQUIRE(code == 0);
    const Dataset train = read_dataset(dir.file("data/train.jsonl"));
    CHECK(train.size() == 3);
    // And the first line really is a standalone JSON object.
    const std::string text = testutil::read_file(dir.file("data/train.jsonl"));
    const auto line_end = text.find('\n');
    REQUIRE(line_end != std::string::npos);
    const auto doc = nlohmann::json::parse(text.substr(0, line_end));
    CHECK(doc.contains("id"));
    CHECK(doc.contains("samples"));
}

TEST_CASE("reruns with the same seed are byte-identical") {
    testutil::TempDir a("cli_det_a");
    testutil::TempDir b("cli_det_b");
    for (const testutil::TempDir* dir : {&a, &b}) {
        REQUIRE(testutil::run_cli(
                    "--deterministic --seed 99 generate --out-dir " +
                        dir->file("data") + " --train-count 5 --val-count 2"
                        " --test-count 3 --duration-s 8",
                    *dir) == 0);
        REQUIRE(testutil::run_cli("--deterministic --seed 99 augment --input " +
                                      dir->file("data/test.ppgd") + " --output " +
                                      dir->file("data/test_noisy.ppgd") +
                                      " --sigma 0.2",
                                  *dir) == 0);
    }
    for (const char* name :
         {"data/train.ppgd", "data/train.ppgd.manifest.json", "data/test.ppgd",
          "data/test_noisy.ppgd", "data/test_noisy.ppgd.manifest.json"}) {
        CAPTURE(name);
        CHECK(testutil::files_equal(a.file(name), b.file(name)));
    }
}

TEST_CASE("different seeds change the data") {
    testutil::TempDir a("cli_seed_a");
    testutil::TempDir b("cli_seed_b");
    REQUIRE(testutil::run_cli("--deterministic --seed 1 generate --out-dir " +
                                  a.file("data") + " --train-count 4"
                                  " --val-count 2 --test-count 2 --duration-s 8",
                              a) == 0);
    REQUIRE(testutil::run_cli("--deterministic --seed 2 generate --out-dir " +
                                  b.file("data") + " --train-count 4"
                                  " --val-count 2 --test-count 2 --duration-s 8",
                              b) == 0);
    CHECK_FALSE(testutil::files_equal(a.file("data/train.ppgd"),
                                      b.file("data/train.ppgd")));
}

}

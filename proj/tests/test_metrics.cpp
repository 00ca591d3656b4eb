#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "ppg/errors.hpp"
#include "ppg/metrics.hpp"

using namespace ppg;

namespace {

// Random instance with deliberate score collisions so tie handling is hit.
void random_instance(Rng& rng, int n, std::vector<double>& scores,
                     std::vector<int>& labels) {
    scores.clear();
    labels.clear();
    const bool quantized = rng.uniform() < 0.5;
    for (int i = 0; i < n; ++i) {
        double s = rng.uniform();
        if (quantized) s = std::floor(s * 8.0) / 8.0;
        scores.push_back(s);
        labels.push_back(i < n / 2 ? 0 : 1);  // both classes present
    }
    rng.shuffle(scores);
    rng.shuffle(labels);
    // shuffle may still leave a single class for tiny n; force both.
    labels[0] = 0;
    labels[static_cast<std::size_t>(n - 1)] = 1;
}

std::vector<ScoredGeneration> scored_set(const std::vector<double>& p1,
                                         const std::vector<int>& labels,
                                         const std::string& prefix) {
    std::vector<ScoredGeneration> items;
    for (std::size_t i = 0; i < p1.size(); ++i) {
        ScoredGeneration item;
        item.id = prefix + std::to_string(i);
        Eigen::VectorXd p(2);
        p << 1.0 - p1[i], p1[i];
        item.probs = PredictiveDistribution{p};
        item.uncertainty = normalized_entropy(item.probs);
        item.label = labels[i];
        items.push_back(item);
    }
    return items;
}

}  // namespace

TEST_SUITE("rank auc") {

TEST_CASE("separated scores give one, reversed give zero") {
    CHECK(roc_auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == doctest::Approx(1.0));
    CHECK(roc_auc({0.9, 0.8, 0.2, 0.1}, {0, 0, 1, 1}) == doctest::Approx(0.0));
}

TEST_CASE("all-equal scores give one half") {
    CHECK(roc_auc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == doctest::Approx(0.5));
}

TEST_CASE("one discordant pair in four gives 0.75") {
    CHECK(roc_auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == doctest::Approx(0.75));
}

TEST_CASE("the rank formula matches pairwise counting") {
    Rng rng(501);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int trial = 0; trial < 40; ++trial) {
        random_instance(rng, 4 + static_cast<int>(rng.uniform_index(200)), scores,
                        labels);
        CHECK(std::abs(roc_auc(scores, labels) -
                       testutil::pairwise_auc(scores, labels)) < 1e-9);
    }
}

TEST_CASE("negating scores complements the auc") {
    Rng rng(502);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int trial = 0; trial < 20; ++trial) {
        random_instance(rng, 50, scores, labels);
        std::vector<double> negated;
        for (double s : scores) negated.push_back(-s);
        CHECK(std::abs(roc_auc(scores, labels) + roc_auc(negated, labels) - 1.0) <
              1e-12);
    }
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
    Rng rng(503);
    std::vector<double> scores;
    std::vector<int> labels;
    random_instance(rng, 80, scores, labels);
    std::vector<double> transformed;
    for (double s : scores) transformed.push_back(std::exp(3.0 * s) - 2.0);
    CHECK(roc_auc(scores, labels) == doctest::Approx(roc_auc(transformed, labels))
                                         .epsilon(1e-12));
}

TEST_CASE("degenerate inputs are rejected") {
    CHECK_THROWS_AS(roc_auc({0.5, 0.6}, {1, 1}), ArgumentError);
    CHECK_THROWS_AS(roc_auc({0.5}, {0, 1}), ArgumentError);
    CHECK_THROWS_AS(roc_auc({}, {}), ArgumentError);
    CHECK_THROWS_AS(roc_auc({0.5, 0.6}, {0, 2}), ArgumentError);
}

}

TEST_SUITE("confusion counts") {

TEST_CASE("threshold zero predicts everything positive") {
    const Confusion c = confusion_at_threshold({0.2, 0.6, 0.9}, {0, 1, 1}, 0.0);
    CHECK(c.fn == 0);
    CHECK(c.tn == 0);
    CHECK(c.tp == 2);
    CHECK(c.fp == 1);
}

TEST_CASE("a threshold above the max predicts everything negative") {
    const Confusion c = confusion_at_threshold({0.2, 0.6, 0.9}, {0, 1, 1}, 0.95);
    CHECK(c.tp == 0);
    CHECK(c.fp == 0);
    CHECK(c.fn == 2);
    CHECK(c.tn == 1);
}

TEST_CASE("the two-point fixture splits cleanly at one half") {
    const Confusion c = confusion_at_threshold({0.2, 0.6}, {0, 1}, 0.5);
    CHECK(c.tp == 1);
    CHECK(c.tn == 1);
    CHECK(c.fp == 0);
    CHECK(c.fn == 0);
}

}

TEST_SUITE("confusion metrics") {

TEST_CASE("a perfect confusion scores one on every metric") {
    const Confusion c{10, 0, 10, 0};
    CHECK(mcc(c) == doctest::Approx(1.0));
    CHECK(f1(c) == doctest::Approx(1.0));
    CHECK(balanced_accuracy(c) == doctest::Approx(1.0));
}

TEST_CASE("label-independent predictions score zero mcc") {
    const Confusion c{5, 5, 5, 5};
    CHECK(mcc(c) == doctest::Approx(0.0));
    CHECK(balanced_accuracy(c) == doctest::Approx(0.5));
}

TEST_CASE("the 40/10/35/15 confusion matches its closed forms") {
    const Confusion c{40, 10, 35, 15};
    // mcc = (40*35 - 10*15) / sqrt(50 * 55 * 45 * 50)
    CHECK(mcc(c) == doctest::Approx(1250.0 / std::sqrt(6187500.0)).epsilon(1e-12));
    CHECK(mcc(c) == doctest::Approx(0.502519).epsilon(1e-6));
    CHECK(f1(c) == doctest::Approx(80.0 / 105.0).epsilon(1e-12));
    CHECK(balanced_accuracy(c) ==
          doctest::Approx(0.5 * (40.0 / 55.0 + 35.0 / 45.0)).epsilon(1e-12));
}

TEST_CASE("zero denominators fall back to zero by convention") {
    CHECK(mcc(Confusion{0, 0, 5, 5}) == 0.0);   // no predicted positives
    CHECK(f1(Confusion{0, 0, 5, 0}) == 0.0);    // no positives anywhere
    CHECK(sensitivity(Confusion{0, 3, 2, 0}) == 0.0);
    CHECK(specificity(Confusion{3, 0, 0, 2}) == 0.0);
}

TEST_CASE("mcc is symmetric under swapping classes and predictions") {
    Rng rng(601);
    for (int trial = 0; trial < 30; ++trial) {
        const Confusion c{rng.uniform_index(20), rng.uniform_index(20),
                          rng.uniform_index(20), rng.uniform_index(20)};
        const Confusion swapped{c.tn, c.fn, c.tp, c.fp};
        CHECK(mcc(c) == doctest::Approx(mcc(swapped)).epsilon(1e-12));
    }
}

}

TEST_SUITE("operating points") {

TEST_CASE("perfect separation pins every metric at its maximum") {
    const std::vector<double> scores{0.1, 0.2, 0.8, 0.9};
    const std::vector<int> labels{0, 0, 1, 1};
    const OperatingPoint sens_at_spec = metric_at_operating_point(
        scores, labels, {ConstraintKind::SpecificityAtLeast, 0.8},
        BinaryMetric::Sensitivity);
    CHECK(sens_at_spec.feasible);
    CHECK(sens_at_spec.value == doctest::Approx(1.0));
    CHECK(sens_at_spec.achieved == doctest::Approx(1.0));
    const OperatingPoint mcc_at_sens = metric_at_operating_point(
        scores, labels, {ConstraintKind::SensitivityAtLeast, 0.8}, BinaryMetric::Mcc);
    CHECK(mcc_at_sens.value == doctest::Approx(1.0));
}

TEST_CASE("the scan agrees with exhaustive brute force") {
    Rng rng(602);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int trial = 0; trial < 60; ++trial) {
        random_instance(rng, 20 + static_cast<int>(rng.uniform_index(150)), scores,
                        labels);
        for (const bool sens : {true, false}) {
            for (const double level : {0.0, 0.5, 0.8, 0.95, 1.0}) {
                const Constraint constraint{sens
                                                ? ConstraintKind::SensitivityAtLeast
                                                : ConstraintKind::SpecificityAtLeast,
                                            level};
                const auto pairs = {
                    std::pair{BinaryMetric::Mcc, testutil::NaiveMetric::Mcc},
                    std::pair{BinaryMetric::F1, testutil::NaiveMetric::F1},
                    std::pair{BinaryMetric::Sensitivity,
                              testutil::NaiveMetric::Sensitivity},
                    std::pair{BinaryMetric::Specificity,
                              testutil::NaiveMetric::Specificity},
                };
                for (const auto& [metric, naive] : pairs) {
                    const OperatingPoint got =
                        metric_at_operating_point(scores, labels, constraint, metric);
                    const testutil::NaiveOperatingPoint want =
                        testutil::brute_force_operating_point(scores, labels, sens,
                                                              level, naive);
                    REQUIRE(got.feasible == want.feasible);
                    if (got.feasible) {
                        CHECK(got.value == doctest::Approx(want.value).epsilon(1e-12));
                        CHECK(got.threshold == want.threshold);
                        CHECK(got.achieved ==
                              doctest::Approx(want.achieved).epsilon(1e-12));
                    } else {
                        CHECK(std::isnan(got.value));
                        CHECK(std::isnan(got.threshold));
                    }
                }
            }
        }
    }
}

TEST_CASE("an unattainable specificity reports infeasible, not zero") {
    // The only negative holds the top score, so every threshold that predicts
    // anything also false-positives it.
    const std::vector<double> scores{0.2, 0.9};
    const std::vector<int> labels{1, 0};
    const OperatingPoint point = metric_at_operating_point(
        scores, labels, {ConstraintKind::SpecificityAtLeast, 0.8}, BinaryMetric::Mcc);
    CHECK_FALSE(point.feasible);
    CHECK(std::isnan(point.value));
    CHECK(std::isnan(point.threshold));
    CHECK(std::isnan(point.achieved));
}

TEST_CASE("constraint levels outside [0, 1] are rejected") {
    const std::vector<double> scores{0.2, 0.9};
    const std::vector<int> labels{0, 1};
    CHECK_THROWS_AS(metric_at_operating_point(
                        scores, labels, {ConstraintKind::SensitivityAtLeast, 1.2},
                        BinaryMetric::Mcc),
                    ArgumentError);
}

}

TEST_SUITE("correlation") {

TEST_CASE("affine relations give exactly one") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> y;
    for (double v : x) y.push_back(2.0 * v + 1.0);
    CHECK(std::abs(pearson(x, y) - 1.0) < 1e-12);
    CHECK(std::abs(spearman(x, y) - 1.0) < 1e-12);
}

TEST_CASE("strictly decreasing relations give minus one") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> y{9.0, 7.0, 2.0, -3.0};
    CHECK(std::abs(spearman(x, y) + 1.0) < 1e-12);
}

TEST_CASE("the crossed-pairs fixture gives spearman 0.6") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> y{2.0, 1.0, 4.0, 3.0};
    CHECK(std::abs(spearman(x, y) - 0.6) < 1e-12);
}

TEST_CASE("spearman is invariant under monotone transforms") {
    Rng rng(603);
    std::vector<double> x, y;
    for (int i = 0; i < 60; ++i) {
        x.push_back(rng.uniform());
        y.push_back(rng.uniform());
    }
    std::vector<double> tx, ty;
    for (double v : x) tx.push_back(std::exp(5.0 * v));
    for (double v : y) ty.push_back(std::atan(10.0 * v));
    CHECK(spearman(x, y) == doctest::Approx(spearman(tx, ty)).epsilon(1e-12));
}

TEST_CASE("tied values share average ranks") {
    const std::vector<double> ranks = average_ranks({3.0, 1.0, 3.0, 2.0});
    CHECK(ranks[0] == doctest::Approx(3.5));
    CHECK(ranks[1] == doctest::Approx(1.0));
    CHECK(ranks[2] == doctest::Approx(3.5));
    CHECK(ranks[3] == doctest::Approx(2.0));
    // Hand value for one tied triple.
    CHECK(spearman({1.0, 1.0, 2.0}, {1.0, 2.0, 3.0}) ==
          doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("constant sequences have no defined pearson") {
    CHECK_THROWS_AS(pearson({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}), NumericError);
    CHECK_THROWS_AS(pearson({1.0, 2.0}, {4.0, 4.0}), NumericError);
    CHECK_THROWS_AS(pearson({1.0}, {2.0}), ArgumentError);
    CHECK_THROWS_AS(pearson({1.0, 2.0}, {1.0, 2.0, 3.0}), ArgumentError);
}

}

TEST_SUITE("condition reports") {

TEST_CASE("identical inputs give four identical rows") {
    const std::vector<double> p1{0.1, 0.3, 0.6, 0.9, 0.2, 0.8};
    const std::vector<int> labels{0, 0, 1, 1, 0, 1};
    const auto items = scored_set(p1, labels, "x");
    std::vector<std::string> all_ids;
    for (const auto& item : items) all_ids.push_back(item.id);
    const ConditionReport report =
        condition_report(items, items, items, all_ids, ConditionReportConfig{});
    REQUIRE(report.rows.size() == 4);
    for (const ConditionRow& row : report.rows) {
        CHECK(row.count == 6);
        CHECK(row.metrics.auc == doctest::Approx(report.rows[0].metrics.auc));
        CHECK(row.metrics.f1_at_half ==
              doctest::Approx(report.rows[0].metrics.f1_at_half));
    }
    CHECK(report.rows[0].condition == "unaugmented");
    CHECK(report.rows[3].condition == "denoised_low_uncertainty");
}

TEST_CASE("a full filter set makes the filtered row equal the denoised row") {
    Rng rng(604);
    std::vector<double> clean_p, noisy_p, den_p;
    std::vector<int> labels;
    for (int i = 0; i < 30; ++i) {
        labels.push_back(static_cast<int>(rng.uniform_index(2)));
        clean_p.push_back(rng.uniform());
        noisy_p.push_back(rng.uniform());
        den_p.push_back(rng.uniform());
    }
    labels[0] = 0;
    labels[1] = 1;
    const auto clean = scored_set(clean_p, labels, "s");
    const auto noisy = scored_set(noisy_p, labels, "s");
    const auto denoised = scored_set(den_p, labels, "s");
    std::vector<std::string> all_ids;
    for (const auto& item : denoised) all_ids.push_back(item.id);
    const ConditionReport report =
        condition_report(clean, noisy, denoised, all_ids, ConditionReportConfig{});
    CHECK(report.rows[2].metrics.auc == doctest::Approx(report.rows[3].metrics.auc));
    CHECK(report.rows[2].metrics.balanced_accuracy_at_half ==
          doctest::Approx(report.rows[3].metrics.balanced_accuracy_at_half));
    CHECK(report.rows[2].count == report.rows[3].count);
}

TEST_CASE("mismatched id sets are refused with the offenders named") {
    const auto a = scored_set({0.2, 0.8}, {0, 1}, "a");
    const auto b = scored_set({0.2, 0.8}, {0, 1}, "b");
    CHECK_THROWS_WITH_AS(
        condition_report(a, a, b, {"b0", "b1"}, ConditionReportConfig{}),
        doctest::Contains("a0"), IntegrityError);
}

TEST_CASE("filtered ids outside the denoised set are refused") {
    const auto items = scored_set({0.2, 0.8}, {0, 1}, "x");
    CHECK_THROWS_AS(
        condition_report(items, items, items, {"x0", "ghost"},
                         ConditionReportConfig{}),
        IntegrityError);
}

TEST_CASE("an empty filter set is refused") {
    const auto items = scored_set({0.2, 0.8}, {0, 1}, "x");
    CHECK_THROWS_AS(condition_report(items, items, items, {}, ConditionReportConfig{}),
                    ArgumentError);
}

TEST_CASE("items without labels are refused") {
    auto items = scored_set({0.2, 0.8}, {0, 1}, "x");
    items[0].label.reset();
    std::vector<std::string> ids{"x0", "x1"};
    CHECK_THROWS_AS(condition_report(items, items, items, ids, ConditionReportConfig{}),
                    IntegrityError);
}

TEST_CASE("the csv and text renderings carry the same numbers") {
    const std::vector<double> p1{0.1, 0.3, 0.6, 0.9, 0.2, 0.8};
    const std::vector<int> labels{0, 0, 1, 1, 0, 1};
    const auto items = scored_set(p1, labels, "x");
    std::vector<std::string> all_ids;
    for (const auto& item : items) all_ids.push_back(item.id);
    const ConditionReport report =
        condition_report(items, items, items, all_ids, ConditionReportConfig{});
    testutil::TempDir dir("condition_csv");
    write_condition_csv(report, dir.file("report.csv"));
    const auto rows = testutil::read_csv(dir.file("report.csv"));
    REQUIRE(rows.size() == 5);
    const std::size_t auc_col = testutil::csv_column(rows, "auc");
    CHECK(std::stod(rows[1][auc_col]) ==
          doctest::Approx(report.rows[0].metrics.auc).epsilon(1e-12));
    const std::string text = render_condition_text(report);
    CHECK(text.find("unaugmented") != std::string::npos);
    CHECK(text.find("denoised_low_uncertainty") != std::string::npos);
}

}

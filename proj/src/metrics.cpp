#include "ppg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "ppg/errors.hpp"
#include "ppg/format.hpp"

namespace ppg {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void check_binary_inputs(const std::vector<double>& scores,
                         const std::vector<int>& labels, const char* what) {
    if (scores.size() != labels.size()) {
        throw ArgumentError(std::string(what) + ": scores and labels differ in length");
    }
    if (scores.empty()) throw ArgumentError(std::string(what) + ": empty input");
    bool has_positive = false;
    bool has_negative = false;
    for (int label : labels) {
        if (label == 1) {
            has_positive = true;
        } else if (label == 0) {
            has_negative = true;
        } else {
            std::ostringstream os;
            os << what << ": label " << label << " is not 0 or 1";
            throw ArgumentError(os.str());
        }
    }
    if (!has_positive || !has_negative) {
        throw ArgumentError(std::string(what) + ": both classes must be present");
    }
}

// Joins up to `limit` offenders for an integrity message.
std::string join_ids(const std::vector<std::string>& ids, std::size_t limit = 5) {
    std::string out;
    for (std::size_t i = 0; i < ids.size() && i < limit; ++i) {
        if (!out.empty()) out += ", ";
        out += ids[i];
    }
    if (ids.size() > limit) out += ", ...";
    return out;
}

std::string fixed3(double value) {
    if (std::isnan(value)) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", value);
    return buf;
}

std::string pad(const std::string& text, std::size_t width, bool right_align) {
    if (text.size() >= width) return text;
    const std::string fill(width - text.size(), ' ');
    return right_align ? fill + text : text + fill;
}

}  // namespace

std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        // 1-based ranks i+1..j share their average.
        const double avg = static_cast<double>(i + 1 + j) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
        i = j;
    }
    return ranks;
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_binary_inputs(scores, labels, "roc_auc");
    const std::vector<double> ranks = average_ranks(scores);
    double positive_rank_sum = 0.0;
    std::size_t positives = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) {
            positive_rank_sum += ranks[i];
            ++positives;
        }
    }
    const std::size_t negatives = labels.size() - positives;
    const double p = static_cast<double>(positives);
    return (positive_rank_sum - p * (p + 1.0) / 2.0) /
           (p * static_cast<double>(negatives));
}

Confusion confusion_at_threshold(const std::vector<double>& scores,
                                 const std::vector<int>& labels, double threshold) {
    if (scores.size() != labels.size()) {
        throw ArgumentError("confusion_at_threshold: scores and labels differ in length");
    }
    Confusion c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        const bool actual = labels[i] == 1;
        if (predicted && actual) {
            ++c.tp;
        } else if (predicted) {
            ++c.fp;
        } else if (actual) {
            ++c.fn;
        } else {
            ++c.tn;
        }
    }
    return c;
}

double mcc(const Confusion& c) {
    const double tp = static_cast<double>(c.tp);
    const double fp = static_cast<double>(c.fp);
    const double tn = static_cast<double>(c.tn);
    const double fn = static_cast<double>(c.fn);
    const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom == 0.0) return 0.0;
    return (tp * tn - fp * fn) / std::sqrt(denom);
}

double f1(const Confusion& c) {
    const double denom = static_cast<double>(2 * c.tp + c.fp + c.fn);
    if (denom == 0.0) return 0.0;
    return 2.0 * static_cast<double>(c.tp) / denom;
}

double sensitivity(const Confusion& c) {
    const double denom = static_cast<double>(c.tp + c.fn);
    return denom == 0.0 ? 0.0 : static_cast<double>(c.tp) / denom;
}

double specificity(const Confusion& c) {
    const double denom = static_cast<double>(c.tn + c.fp);
    return denom == 0.0 ? 0.0 : static_cast<double>(c.tn) / denom;
}

double balanced_accuracy(const Confusion& c) {
    return 0.5 * (sensitivity(c) + specificity(c));
}

const char* metric_name(BinaryMetric metric) {
    switch (metric) {
        case BinaryMetric::Mcc: return "mcc";
        case BinaryMetric::F1: return "f1";
        case BinaryMetric::BalancedAccuracy: return "balanced_accuracy";
        case BinaryMetric::Sensitivity: return "sensitivity";
        case BinaryMetric::Specificity: return "specificity";
    }
    return "unknown";
}

double binary_metric(BinaryMetric metric, const Confusion& c) {
    switch (metric) {
        case BinaryMetric::Mcc: return mcc(c);
        case BinaryMetric::F1: return f1(c);
        case BinaryMetric::BalancedAccuracy: return balanced_accuracy(c);
        case BinaryMetric::Sensitivity: return sensitivity(c);
        case BinaryMetric::Specificity: return specificity(c);
    }
    throw ArgumentError("binary_metric: unknown metric");
}

OperatingPoint metric_at_operating_point(const std::vector<double>& scores,
                                         const std::vector<int>& labels,
                                         Constraint constraint, BinaryMetric metric) {
    check_binary_inputs(scores, labels, "metric_at_operating_point");
    if (!(constraint.level >= 0.0) || constraint.level > 1.0) {
        throw ArgumentError("metric_at_operating_point: constraint level outside [0,1]");
    }
    // Candidate thresholds are the distinct scores: every reachable confusion
    // appears at one of them, and the scan stays O(n²) at worst.
    std::vector<double> candidates = scores;
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());

    OperatingPoint best;
    best.value = kNan;
    best.threshold = kNan;
    best.achieved = kNan;
    double best_slack = std::numeric_limits<double>::infinity();
    for (double threshold : candidates) {
        const Confusion c = confusion_at_threshold(scores, labels, threshold);
        const double achieved = constraint.kind == ConstraintKind::SensitivityAtLeast
                                    ? sensitivity(c)
                                    : specificity(c);
        if (achieved < constraint.level) continue;
        const double slack = achieved - constraint.level;
        const double value = binary_metric(metric, c);
        const bool wins =
            !best.feasible || slack < best_slack ||
            (slack == best_slack &&
             (value > best.value ||
              (value == best.value && threshold < best.threshold)));
        if (wins) {
            best.value = value;
            best.threshold = threshold;
            best.achieved = achieved;
            best.feasible = true;
            best_slack = slack;
        }
    }
    return best;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ArgumentError("pearson: lengths differ");
    if (x.size() < 2) throw ArgumentError("pearson: need at least two points");
    const auto [x_min, x_max] = std::minmax_element(x.begin(), x.end());
    const auto [y_min, y_max] = std::minmax_element(y.begin(), y.end());
    if (*x_min == *x_max || *y_min == *y_max) {
        throw NumericError("pearson: constant input has no defined correlation");
    }
    const double n = static_cast<double>(x.size());
    const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw NumericError("pearson: degenerate variance");
    }
    return sxy / std::sqrt(sxx * syy);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ArgumentError("spearman: lengths differ");
    return pearson(average_ranks(x), average_ranks(y));
}

OperatingPointMetrics compute_operating_metrics(const std::vector<double>& scores,
                                                const std::vector<int>& labels,
                                                double operating_level) {
    OperatingPointMetrics m;
    m.auc = roc_auc(scores, labels);
    const Confusion at_half = confusion_at_threshold(scores, labels, 0.5);
    m.f1_at_half = f1(at_half);
    m.balanced_accuracy_at_half = balanced_accuracy(at_half);
    const Constraint sens{ConstraintKind::SensitivityAtLeast, operating_level};
    const Constraint spec{ConstraintKind::SpecificityAtLeast, operating_level};
    m.mcc_at_sens = metric_at_operating_point(scores, labels, sens, BinaryMetric::Mcc);
    m.mcc_at_spec = metric_at_operating_point(scores, labels, spec, BinaryMetric::Mcc);
    m.sensitivity_at_spec =
        metric_at_operating_point(scores, labels, spec, BinaryMetric::Sensitivity);
    m.specificity_at_sens =
        metric_at_operating_point(scores, labels, sens, BinaryMetric::Specificity);
    return m;
}

ConditionReport condition_report(const std::vector<ScoredGeneration>& clean,
                                 const std::vector<ScoredGeneration>& noisy,
                                 const std::vector<ScoredGeneration>& denoised,
                                 const std::vector<std::string>& filtered_ids,
                                 const ConditionReportConfig& config) {
    auto index_by_id = [](const std::vector<ScoredGeneration>& items,
                          const char* which) {
        std::map<std::string, const ScoredGeneration*> index;
        for (const ScoredGeneration& item : items) {
            if (!index.emplace(item.id, &item).second) {
                throw IntegrityError(std::string("condition_report: duplicate id '") +
                                     item.id + "' in " + which);
            }
            if (!item.label) {
                throw IntegrityError(std::string("condition_report: '") + item.id +
                                     "' in " + which + " has no true label");
            }
            if (item.probs.k() != 2) {
                throw ArgumentError(std::string("condition_report: '") + item.id +
                                    "' has a non-binary distribution");
            }
        }
        return index;
    };
    const auto clean_index = index_by_id(clean, "the clean set");
    const auto noisy_index = index_by_id(noisy, "the noisy set");
    const auto denoised_index = index_by_id(denoised, "the denoised set");

    auto check_same_ids = [&](const std::map<std::string, const ScoredGeneration*>& got,
                              const char* which) {
        std::vector<std::string> missing;
        std::vector<std::string> extra;
        for (const auto& [id, item] : clean_index) {
            const auto it = got.find(id);
            if (it == got.end()) {
                missing.push_back(id);
            } else if (*it->second->label != *item->label) {
                throw IntegrityError(std::string("condition_report: label for '") +
                                     id + "' differs in " + which);
            }
        }
        for (const auto& [id, item] : got) {
            if (!clean_index.count(id)) extra.push_back(id);
        }
        if (!missing.empty() || !extra.empty()) {
            std::string msg = std::string("condition_report: id mismatch in ") + which;
            if (!missing.empty()) msg += "; missing: " + join_ids(missing);
            if (!extra.empty()) msg += "; unexpected: " + join_ids(extra);
            throw IntegrityError(msg);
        }
    };
    check_same_ids(noisy_index, "the noisy set");
    check_same_ids(denoised_index, "the denoised set");

    std::set<std::string> filter_set(filtered_ids.begin(), filtered_ids.end());
    std::vector<std::string> unknown;
    for (const std::string& id : filtered_ids) {
        if (!denoised_index.count(id)) unknown.push_back(id);
    }
    if (!unknown.empty()) {
        throw IntegrityError("condition_report: filtered ids not in the denoised set: " +
                             join_ids(unknown));
    }
    if (filter_set.empty()) {
        throw ArgumentError("condition_report: empty filtered id set");
    }

    auto row_for = [&](const std::string& name,
                       const std::vector<ScoredGeneration>& items,
                       const std::set<std::string>* keep) {
        std::vector<double> scores;
        std::vector<int> labels;
        for (const ScoredGeneration& item : items) {
            if (keep && !keep->count(item.id)) continue;
            scores.push_back(item.probs.probs[1]);
            labels.push_back(*item.label);
        }
        ConditionRow row;
        row.condition = name;
        row.count = scores.size();
        row.metrics =
            compute_operating_metrics(scores, labels, config.operating_level);
        return row;
    };

    ConditionReport report;
    report.config = config;
    report.rows.push_back(row_for("unaugmented", clean, nullptr));
    report.rows.push_back(row_for("noisy", noisy, nullptr));
    report.rows.push_back(row_for("denoised", denoised, nullptr));
    report.rows.push_back(
        row_for("denoised_low_uncertainty", denoised, &filter_set));
    return report;
}

namespace {

int level_percent(double level) {
    return static_cast<int>(std::lround(level * 100.0));
}

void append_operating_cells(std::ostream& os, const OperatingPoint& op) {
    os << ',' << format_number(op.value) << ',' << format_number(op.threshold)
       << ',' << format_number(op.achieved);
}

}  // namespace

void write_condition_csv(const ConditionReport& report, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ArgumentError("report: cannot open '" + path + "' for writing");
    const int pct = level_percent(report.config.operating_level);
    os << "condition,count,auc,f1_at_half,balanced_accuracy_at_half";
    for (const char* op : {"mcc_at_sens", "mcc_at_spec", "sensitivity_at_spec",
                           "specificity_at_sens"}) {
        os << ',' << op << pct << ',' << op << pct << "_threshold,"
           << op << pct << "_achieved";
    }
    os << ",operating_level,filter_fraction\n";
    for (const ConditionRow& row : report.rows) {
        os << row.condition << ',' << row.count << ','
           << format_number(row.metrics.auc) << ','
           << format_number(row.metrics.f1_at_half) << ','
           << format_number(row.metrics.balanced_accuracy_at_half);
        append_operating_cells(os, row.metrics.mcc_at_sens);
        append_operating_cells(os, row.metrics.mcc_at_spec);
        append_operating_cells(os, row.metrics.sensitivity_at_spec);
        append_operating_cells(os, row.metrics.specificity_at_sens);
        os << ',' << format_number(report.config.operating_level) << ','
           << format_number(report.config.filter_fraction) << '\n';
    }
    if (!os) throw ArgumentError("report: write to '" + path + "' failed");
}

std::string render_condition_text(const ConditionReport& report) {
    const int pct = level_percent(report.config.operating_level);
    std::vector<std::string> headers = {
        "condition",
        "n",
        "AUC",
        "F1@0.5",
        "BalAcc@0.5",
        "MCC@sens" + std::to_string(pct),
        "MCC@spec" + std::to_string(pct),
        "Sens@spec" + std::to_string(pct),
        "Spec@sens" + std::to_string(pct),
    };
    std::vector<std::vector<std::string>> cells;
    for (const ConditionRow& row : report.rows) {
        cells.push_back({row.condition, std::to_string(row.count),
                         fixed3(row.metrics.auc), fixed3(row.metrics.f1_at_half),
                         fixed3(row.metrics.balanced_accuracy_at_half),
                         fixed3(row.metrics.mcc_at_sens.value),
                         fixed3(row.metrics.mcc_at_spec.value),
                         fixed3(row.metrics.sensitivity_at_spec.value),
                         fixed3(row.metrics.specificity_at_sens.value)});
    }
    std::vector<std::size_t> widths(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) {
        widths[c] = headers[c].size();
        for (const auto& row : cells) widths[c] = std::max(widths[c], row[c].size());
    }
    std::ostringstream os;
    for (std::size_t c = 0; c < headers.size(); ++c) {
        if (c > 0) os << "  ";
        os << pad(headers[c], widths[c], c > 0);
    }
    os << '\n';
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) os << "  ";
            os << pad(row[c], widths[c], c > 0);
        }
        os << '\n';
    }
    os << "low-uncertainty subset keeps fraction "
       << format_number(report.config.filter_fraction)
       << "; operating thresholds take minimal slack above the constraint "
          "(achieved values and thresholds in the CSV)\n";
    return os.str();
}

}  // namespace ppg

#include "ppg/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ppg/dtuq.hpp"
#include "ppg/errors.hpp"
#include "ppg/format.hpp"

namespace ppg {

std::vector<BinStats> bin_equal_width(const std::vector<ScoredOutcome>& items, int m) {
    if (m < 1) throw ArgumentError("bin_equal_width: need at least one bin");
    std::vector<BinStats> bins(static_cast<std::size_t>(m));
    for (int b = 0; b < m; ++b) {
        bins[static_cast<std::size_t>(b)].index = b;
        bins[static_cast<std::size_t>(b)].lo = static_cast<double>(b) / m;
        bins[static_cast<std::size_t>(b)].hi = static_cast<double>(b + 1) / m;
    }
    for (const ScoredOutcome& item : items) {
        if (!(item.uncertainty >= 0.0) || item.uncertainty > 1.0) {
            std::ostringstream os;
            os << "bin_equal_width: uncertainty " << item.uncertainty
               << " outside [0,1]";
            throw ArgumentError(os.str());
        }
        // Half-open bins [b/M, (b+1)/M) with the last closed at 1.0.
        const int b = std::min(static_cast<int>(item.uncertainty * m), m - 1);
        BinStats& bin = bins[static_cast<std::size_t>(b)];
        ++bin.count;
        bin.mean_uncert += item.uncertainty;
        bin.mean_err += item.correct ? 0.0 : 1.0;
    }
    for (BinStats& bin : bins) {
        if (bin.count > 0) {
            bin.mean_uncert /= static_cast<double>(bin.count);
            bin.mean_err /= static_cast<double>(bin.count);
        }
    }
    return bins;
}

double uce(const std::vector<BinStats>& bins, std::size_t total) {
    if (total == 0) throw ArgumentError("uce: total count must be positive");
    std::size_t counted = 0;
    double sum = 0.0;
    for (const BinStats& bin : bins) {
        counted += bin.count;
        if (bin.count > 0) {
            sum += static_cast<double>(bin.count) / static_cast<double>(total) *
                   std::abs(bin.mean_err - kCalibrationSlope * bin.mean_uncert);
        }
    }
    if (counted != total) {
        std::ostringstream os;
        os << "uce: bin counts sum to " << counted << ", expected " << total;
        throw ArgumentError(os.str());
    }
    return sum;
}

ReliabilityReport reliability_report(const std::vector<LabeledPrediction>& predictions,
                                     int m, std::optional<int> class_filter) {
    if (predictions.empty()) {
        throw ArgumentError("reliability_report: no predictions");
    }
    const Eigen::Index k = predictions.front().probs.k();
    const LossMatrix loss = misclassification_loss(k);
    std::vector<ScoredOutcome> items;
    items.reserve(predictions.size());
    for (const LabeledPrediction& pred : predictions) {
        if (pred.probs.k() != k) {
            throw ArgumentError("reliability_report: mixed distribution sizes");
        }
        if (pred.label < 0 || pred.label >= k) {
            std::ostringstream os;
            os << "reliability_report: label " << pred.label << " out of range";
            throw ArgumentError(os.str());
        }
        if (class_filter && pred.label != *class_filter) continue;
        ScoredOutcome item;
        item.uncertainty = normalized_entropy(pred.probs);
        item.correct = bayes_action(loss, pred.probs) == pred.label;
        items.push_back(item);
    }
    if (items.empty()) {
        std::ostringstream os;
        os << "reliability_report: no items with true class " << *class_filter;
        throw ArgumentError(os.str());
    }
    ReliabilityReport report;
    report.bins = bin_equal_width(items, m);
    report.total = items.size();
    report.uce = uce(report.bins, report.total);
    report.class_filter = class_filter;
    return report;
}

void write_reliability_csv(const ReliabilityReport& report, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ArgumentError("reliability: cannot open '" + path + "' for writing");
    os << "bin,lo,hi,count,mean_uncert,mean_err\n";
    for (const BinStats& bin : report.bins) {
        os << bin.index << ',' << format_number(bin.lo) << ','
           << format_number(bin.hi) << ',' << bin.count << ','
           << format_number(bin.mean_uncert) << ',' << format_number(bin.mean_err)
           << '\n';
    }
    if (!os) throw ArgumentError("reliability: write to '" + path + "' failed");
}

void write_reliability_svg(const ReliabilityReport& report, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ArgumentError("reliability: cannot open '" + path + "' for writing");
    // Plot area: [0,1]^2 mapped into a fixed viewport, y up.
    const double left = 60, top = 20, width = 360, height = 300;
    auto px = [&](double u) { return left + u * width; };
    auto py = [&](double e) { return top + (1.0 - e) * height; };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"380\" "
          "viewBox=\"0 0 480 380\">\n";
    os << "  <rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width
       << "\" height=\"" << height << "\" fill=\"white\" stroke=\"black\"/>\n";
    // Reference: perfectly calibrated bins sit on err = 0.5 * uncert.
    os << "  <line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1)
       << "\" y2=\"" << py(kCalibrationSlope)
       << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
    for (const BinStats& bin : report.bins) {
        if (bin.count == 0) continue;
        os << "  <circle cx=\"" << px(bin.mean_uncert) << "\" cy=\""
           << py(bin.mean_err) << "\" r=\"4\" fill=\"steelblue\"/>\n";
    }
    std::ostringstream title;
    title << "UCE " << format_number(report.uce) << " over " << report.total
          << " items";
    if (report.class_filter) title << " (class " << *report.class_filter << ")";
    os << "  <text x=\"" << left << "\" y=\"" << top + height + 30
       << "\" font-family=\"sans-serif\" font-size=\"13\">" << title.str()
       << "</text>\n";
    os << "  <text x=\"" << left << "\" y=\"" << top + height + 48
       << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"gray\">"
          "uncertainty (x) vs decision error rate (y); dashed slope "
       << format_number(kCalibrationSlope) << " reference</text>\n";
    os << "</svg>\n";
    if (!os) throw ArgumentError("reliability: write to '" + path + "' failed");
}

}  // namespace ppg

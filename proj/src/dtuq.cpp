#include "ppg/dtuq.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "ppg/denoise.hpp"
#include "ppg/errors.hpp"

namespace ppg {

namespace {

using nlohmann::json;

}  // namespace

LossMatrix misclassification_loss(Eigen::Index k) {
    if (k < 2) throw ArgumentError("misclassification_loss: need at least 2 outcomes");
    LossMatrix loss;
    loss.entries = Eigen::MatrixXd::Ones(k, k) - Eigen::MatrixXd::Identity(k, k);
    return loss;
}

void validate_loss(const LossMatrix& loss) {
    if (loss.num_actions() < 1 || loss.num_outcomes() < 2) {
        throw ArgumentError("loss matrix: need >= 1 action and >= 2 outcomes");
    }
    if (!loss.entries.allFinite() || (loss.entries.array() < 0.0).any()) {
        throw ArgumentError("loss matrix: entries must be finite and nonnegative");
    }
}

double normalized_entropy(const PredictiveDistribution& p) {
    validate_distribution(p);
    double entropy = 0.0;
    for (Eigen::Index i = 0; i < p.k(); ++i) {
        const double v = p.probs[i];
        if (v > 0.0) entropy -= v * std::log(v);
    }
    const double normalized = entropy / std::log(static_cast<double>(p.k()));
    // Rounding can push the result a hair outside [0,1] at the extremes.
    return std::clamp(normalized, 0.0, 1.0);
}

double conditional_risk(const LossMatrix& loss, const PredictiveDistribution& p,
                        Eigen::Index action) {
    validate_loss(loss);
    validate_distribution(p);
    if (loss.num_outcomes() != p.k()) {
        throw ArgumentError("conditional_risk: loss matrix outcomes != distribution size");
    }
    if (action < 0 || action >= loss.num_actions()) {
        std::ostringstream os;
        os << "conditional_risk: action " << action << " out of range [0, "
           << loss.num_actions() << ")";
        throw ArgumentError(os.str());
    }
    return loss.entries.row(action).dot(p.probs);
}

Eigen::Index bayes_action(const LossMatrix& loss, const PredictiveDistribution& p) {
    validate_loss(loss);
    validate_distribution(p);
    if (loss.num_outcomes() != p.k()) {
        throw ArgumentError("bayes_action: loss matrix outcomes != distribution size");
    }
    Eigen::Index best = 0;
    double best_risk = loss.entries.row(0).dot(p.probs);
    for (Eigen::Index a = 1; a < loss.num_actions(); ++a) {
        const double risk = loss.entries.row(a).dot(p.probs);
        if (risk < best_risk) {
            best = a;
            best_risk = risk;
        }
    }
    return best;
}

ScoredGeneration score_generation(const ClassifierModel& model, const Signal& signal) {
    ScoredGeneration scored;
    scored.probs = predict(model, clamp_nonnegative(signal));
    scored.uncertainty = normalized_entropy(scored.probs);
    return scored;
}

ScoredGeneration score_generation(const ClassifierModel& model,
                                  const LabeledSignal& record) {
    ScoredGeneration scored = score_generation(model, record.signal);
    scored.id = record.id;
    scored.label = record.label;
    return scored;
}

std::vector<ScoredGeneration> filter_by_uncertainty(
    const std::vector<ScoredGeneration>& items, double keep_fraction) {
    if (items.empty()) throw ArgumentError("filter_by_uncertainty: empty input");
    if (!(keep_fraction > 0.0) || keep_fraction > 1.0) {
        throw ArgumentError("filter_by_uncertainty: keep_fraction must be in (0, 1]");
    }
    const std::size_t n = items.size();
    // Nearest-rank count; the epsilon keeps representation error in f*N from
    // bumping an exact integer product up to the next rank.
    const double raw = std::ceil(keep_fraction * static_cast<double>(n) - 1e-12);
    const std::size_t keep =
        std::clamp(static_cast<std::size_t>(std::max(raw, 1.0)),
                   static_cast<std::size_t>(1), n);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (items[a].uncertainty != items[b].uncertainty) {
            return items[a].uncertainty < items[b].uncertainty;
        }
        return items[a].id < items[b].id;
    });
    std::vector<bool> kept(n, false);
    for (std::size_t i = 0; i < keep; ++i) kept[order[i]] = true;

    std::vector<ScoredGeneration> survivors;
    survivors.reserve(keep);
    for (std::size_t i = 0; i < n; ++i) {
        if (kept[i]) survivors.push_back(items[i]);
    }
    return survivors;
}

void write_scored(const std::vector<ScoredGeneration>& items, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ArgumentError("scored: cannot open '" + path + "' for writing");
    for (const ScoredGeneration& item : items) {
        json rec;
        rec["id"] = item.id;
        rec["uncertainty"] = item.uncertainty;
        json probs = json::array();
        for (Eigen::Index i = 0; i < item.probs.k(); ++i) {
            probs.push_back(item.probs.probs[i]);
        }
        rec["probs"] = std::move(probs);
        if (item.label) rec["label"] = *item.label;
        os << rec.dump() << '\n';
    }
    if (!os) throw ArgumentError("scored: write to '" + path + "' failed");
}

std::vector<ScoredGeneration> read_scored(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IntegrityError("scored: cannot open '" + path + "' for reading");
    std::vector<ScoredGeneration> items;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::ostringstream where;
        where << path << ": line " << line_no;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(where.str() + ": " + e.what());
        }
        try {
            ScoredGeneration item;
            item.id = rec.at("id").get<std::string>();
            item.uncertainty = rec.at("uncertainty").get<double>();
            const auto& probs = rec.at("probs");
            if (!probs.is_array()) throw ParseError(where.str() + ": probs is not an array");
            item.probs.probs.resize(static_cast<Eigen::Index>(probs.size()));
            Eigen::Index i = 0;
            for (const auto& v : probs) item.probs.probs[i++] = v.get<double>();
            if (rec.contains("label")) item.label = rec.at("label").get<int>();
            if (!(item.uncertainty >= 0.0) || item.uncertainty > 1.0) {
                throw IntegrityError(where.str() + ": uncertainty outside [0,1]");
            }
            try {
                validate_distribution(item.probs);
            } catch (const ArgumentError& e) {
                throw IntegrityError(where.str() + ": " + e.what());
            }
            items.push_back(std::move(item));
        } catch (const json::exception& e) {
            throw ParseError(where.str() + ": " + e.what());
        }
    }
    return items;
}

}  // namespace ppg

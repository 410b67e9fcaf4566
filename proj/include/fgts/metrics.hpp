#pragma once

#include <span>
#include <string>
#include <vector>

#include "fgts/label.hpp"

namespace fgts {

/// A classifier output. Higher score means more likely fake.
struct ScoredSample {
    double score = 0.0;
    Label label = Label::real;
    std::string generator{kRealGenerator};
};

/// score >= 0 is fake; a zero score is classified fake.
inline Label predicted_label(double score) noexcept { return score >= 0.0 ? Label::fake : Label::real; }

double accuracy(std::span<const ScoredSample> samples);

/// Mann-Whitney AUC with average ranks for ties; fake is the positive class.
double roc_auc(std::span<const ScoredSample> samples);

/// Un-interpolated average precision. Samples are ordered by descending score,
/// ties keeping input order.
double average_precision(std::span<const ScoredSample> samples);

struct MetricTriple {
    double acc = 0.0;
    double auc = 0.0;
    double ap = 0.0;
};

MetricTriple evaluate(std::span<const ScoredSample> samples);

struct GeneratorMetrics {
    std::string generator;
    std::size_t n_fake = 0;
    std::size_t n_real = 0;
    MetricTriple metrics;
};

struct GroupedMetrics {
    std::vector<GeneratorMetrics> rows;  // first-appearance order of each generator
    MetricTriple aggregate;              // unweighted mean over rows
    std::size_t n_real = 0;              // size of the shared real pool
};

/// Scores each generator's fakes against the full real pool. AUC is NaN for a
/// group when the real pool is empty.
GroupedMetrics group_by_generator(std::span<const ScoredSample> samples);

MetricTriple mean_of(std::span<const GeneratorMetrics> rows);

}  // namespace fgts

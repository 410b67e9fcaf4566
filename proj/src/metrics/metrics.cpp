#include "fgts/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fgts/error.hpp"

namespace fgts {

namespace {

void check_finite(std::span<const ScoredSample> samples) {
    for (const auto& s : samples)
        if (!std::isfinite(s.score)) throw ValidationError("non-finite score");
}

}  // namespace

double accuracy(std::span<const ScoredSample> samples) {
    if (samples.empty()) throw ValidationError("accuracy: empty input");
    check_finite(samples);
    std::size_t correct = 0;
    for (const auto& s : samples) correct += predicted_label(s.score) == s.label;
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

double roc_auc(std::span<const ScoredSample> samples) {
    check_finite(samples);
    const std::size_t n = samples.size();
    std::size_t n_fake = 0;
    for (const auto& s : samples) n_fake += s.label == Label::fake;
    const std::size_t n_real = n - n_fake;
    if (n_fake == 0 || n_real == 0) throw ValidationError("roc_auc: needs at least one sample of each class");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return samples[a].score < samples[b].score; });

    // Ranks are 1-based; a tie group spanning positions [i, j) gets (i + j + 1) / 2.
    double fake_rank_sum = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && samples[order[j]].score == samples[order[i]].score) ++j;
        const double rank = 0.5 * static_cast<double>(i + j + 1);
        for (std::size_t t = i; t < j; ++t)
            if (samples[order[t]].label == Label::fake) fake_rank_sum += rank;
        i = j;
    }
    const double nf = static_cast<double>(n_fake);
    const double u = fake_rank_sum - nf * (nf + 1.0) / 2.0;
    return u / (nf * static_cast<double>(n_real));
}

double average_precision(std::span<const ScoredSample> samples) {
    check_finite(samples);
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return samples[a].score > samples[b].score; });

    std::size_t positives = 0;
    for (const auto& s : samples) positives += s.label == Label::fake;
    if (positives == 0) throw ValidationError("average_precision: no positive (fake) samples");

    // Sum of (R_n - R_{n-1}) * P_n; only cut points at a positive change recall.
    const double p = static_cast<double>(positives);
    std::size_t tp = 0;
    double ap = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (samples[order[i]].label != Label::fake) continue;
        const double recall_before = static_cast<double>(tp) / p;
        ++tp;
        const double recall = static_cast<double>(tp) / p;
        ap += (recall - recall_before) * (static_cast<double>(tp) / static_cast<double>(i + 1));
    }
    return ap;
}

MetricTriple evaluate(std::span<const ScoredSample> samples) {
    MetricTriple m;
    m.acc = accuracy(samples);
    bool has_real = false, has_fake = false;
    for (const auto& s : samples) (s.label == Label::fake ? has_fake : has_real) = true;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    m.auc = has_real && has_fake ? roc_auc(samples) : nan;
    m.ap = has_fake ? average_precision(samples) : nan;
    return m;
}

MetricTriple mean_of(std::span<const GeneratorMetrics> rows) {
    MetricTriple m;
    if (rows.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return {nan, nan, nan};
    }
    for (const auto& r : rows) {
        m.acc += r.metrics.acc;
        m.auc += r.metrics.auc;
        m.ap += r.metrics.ap;
    }
    const double n = static_cast<double>(rows.size());
    return {m.acc / n, m.auc / n, m.ap / n};
}

GroupedMetrics group_by_generator(std::span<const ScoredSample> samples) {
    if (samples.empty()) throw ValidationError("group_by_generator: empty input");

    std::vector<ScoredSample> reals;
    std::vector<std::string> generators;
    for (const auto& s : samples) {
        if (s.label == Label::real) {
            reals.push_back(s);
        } else if (std::find(generators.begin(), generators.end(), s.generator) == generators.end()) {
            generators.push_back(s.generator);
        }
    }

    GroupedMetrics out;
    out.n_real = reals.size();
    for (const auto& g : generators) {
        // Keep the input order within the group so AP tie handling is stable.
        std::vector<ScoredSample> group;
        std::size_t n_fake = 0;
        for (const auto& s : samples) {
            if (s.label == Label::real || s.generator == g) {
                group.push_back(s);
                n_fake += s.label == Label::fake;
            }
        }
        out.rows.push_back({g, n_fake, reals.size(), evaluate(group)});
    }
    out.aggregate = mean_of(out.rows);
    return out;
}

}  // namespace fgts

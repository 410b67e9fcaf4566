#include <algorithm>

#include "fgts/error.hpp"
#include "fgts/fgts.hpp"

namespace fgts {

ClassStatsAccumulator::ClassStatsAccumulator(TokenLayout layout, std::size_t dim, TokenStrategy scope)
    : layout_(layout), dim_(dim), scope_(std::move(scope)), tokens_(scope_.rows(layout_)) {
    if (tokens_.empty()) throw ValidationError("ranking scope \"" + scope_.name() + "\" selects no tokens");
    std::sort(tokens_.begin(), tokens_.end());
    if (std::adjacent_find(tokens_.begin(), tokens_.end()) != tokens_.end())
        throw ValidationError("ranking scope lists a token twice");
    for (int c = 0; c < 2; ++c) {
        mean_[c].assign(tokens_.size() * dim_, 0.0);
        m2_[c].assign(tokens_.size() * dim_, 0.0);
    }
}

void ClassStatsAccumulator::add(const FeatureTensor& tensor, Label label) {
    if (tensor.layout != layout_ || tensor.dim != dim_)
        throw ValidationError("layout mismatch: sample " + describe(tensor.layout) + " dim=" +
                              std::to_string(tensor.dim) + " vs " + describe(layout_) +
                              " dim=" + std::to_string(dim_));
    const int c = static_cast<int>(label);
    const double n = static_cast<double>(++count_[c]);
    auto& mean = mean_[c];
    auto& m2 = m2_[c];
    for (std::size_t pos = 0; pos < tokens_.size(); ++pos) {
        const auto row = tensor.row(tokens_[pos]);
        const std::size_t base = pos * dim_;
        for (std::size_t d = 0; d < dim_; ++d) {
            const double x = row[d];
            const double delta = x - mean[base + d];
            mean[base + d] += delta / n;
            m2[base + d] += delta * (x - mean[base + d]);
        }
    }
}

ClassStats ClassStatsAccumulator::finish() const {
    for (Label c : {Label::real, Label::fake}) {
        if (count(c) < 2)
            throw ValidationError("class " + std::string(to_string(c)) + " has " + std::to_string(count(c)) +
                                  " reference samples; at least 2 are required");
    }
    ClassStats s;
    s.layout = layout_;
    s.dim = dim_;
    s.scope = scope_;
    s.tokens = tokens_;
    s.count = count_;
    for (int c = 0; c < 2; ++c) {
        s.mean[c] = mean_[c];
        s.var[c].resize(m2_[c].size());
        const double denom = static_cast<double>(count_[c] - 1);
        for (std::size_t i = 0; i < m2_[c].size(); ++i) s.var[c][i] = std::max(0.0, m2_[c][i] / denom);
    }
    return s;
}

ClassStats compute_class_stats(std::span<const FeatureTensor> samples, std::span<const Label> labels,
                               const TokenStrategy& scope) {
    if (samples.size() != labels.size()) throw ValidationError("samples and labels differ in length");
    if (samples.empty()) throw ValidationError("no reference samples");
    ClassStatsAccumulator acc(samples.front().layout, samples.front().dim, scope);
    for (std::size_t i = 0; i < samples.size(); ++i) acc.add(samples[i], labels[i]);
    return acc.finish();
}

}  // namespace fgts

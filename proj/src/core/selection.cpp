#include <algorithm>
#include <random>

#include "fgts/error.hpp"
#include "fgts/fgts.hpp"

namespace fgts {

std::string_view to_string(SelectionConfig::Method method) noexcept {
    return method == SelectionConfig::Method::random_k ? "random" : "fisher";
}

SelectionConfig::Method parse_selection_method(std::string_view text) {
    if (text == "fisher" || text == "fisher_topk") return SelectionConfig::Method::fisher_topk;
    if (text == "random" || text == "random_k") return SelectionConfig::Method::random_k;
    throw ValidationError("unknown selection method \"" + std::string(text) + "\"");
}

std::string SelectionConfig::describe() const {
    std::string out = std::string(to_string(method)) + "-" + std::to_string(k);
    if (method == Method::random_k) out += "(seed=" + std::to_string(seed) + ")";
    return out;
}

std::vector<std::size_t> select_top_k(const TokenRanking& ranking, const SelectionConfig& cfg) {
    const std::size_t n = ranking.tokens.size();
    if (cfg.k < 1 || cfg.k > n)
        throw ValidationError("K=" + std::to_string(cfg.k) + " out of range [1, " + std::to_string(n) + "]");

    if (cfg.method == SelectionConfig::Method::fisher_topk)
        return {ranking.sorted_indices.begin(), ranking.sorted_indices.begin() + static_cast<std::ptrdiff_t>(cfg.k)};

    std::vector<std::size_t> out;
    out.reserve(cfg.k);
    std::mt19937_64 rng(cfg.seed);
    std::sample(ranking.tokens.begin(), ranking.tokens.end(), std::back_inserter(out), cfg.k, rng);
    std::sort(out.begin(), out.end());
    return out;
}

Embedding aggregate(const FeatureTensor& tensor, std::span<const std::size_t> indices) {
    if (indices.empty()) throw ValidationError("aggregate: empty index list");
    std::vector<std::size_t> order(indices.begin(), indices.end());
    std::sort(order.begin(), order.end());
    for (std::size_t i : order)
        if (i >= tensor.rows())
            throw ValidationError("aggregate: token index " + std::to_string(i) + " out of range");

    Embedding z(tensor.dim, 0.0);
    for (std::size_t i : order) {
        const auto row = tensor.row(i);
        for (std::size_t d = 0; d < tensor.dim; ++d) z[d] += row[d];
    }
    const double count = static_cast<double>(order.size());
    for (double& v : z) v /= count;
    return z;
}

}  // namespace fgts

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fgts/feature_store.hpp"

namespace fgts {

/// Per-class, per-token, per-dimension sample mean and unbiased variance over
/// the tokens named by `scope`.
struct ClassStats {
    TokenLayout layout;
    std::size_t dim = 0;
    TokenStrategy scope;
    std::vector<std::size_t> tokens;          // scored rows of the layout, ascending
    std::array<std::vector<double>, 2> mean;  // indexed by Label, [token position * dim + d]
    std::array<std::vector<double>, 2> var;
    std::array<std::size_t, 2> count{};

    double mean_at(Label c, std::size_t pos, std::size_t d) const {
        return mean[static_cast<int>(c)][pos * dim + d];
    }
    double var_at(Label c, std::size_t pos, std::size_t d) const {
        return var[static_cast<int>(c)][pos * dim + d];
    }
};

/// Streaming Welford accumulation so that reference sets never have to be
/// resident in memory. Samples are folded in call order.
class ClassStatsAccumulator {
public:
    ClassStatsAccumulator(TokenLayout layout, std::size_t dim, TokenStrategy scope);

    void add(const FeatureTensor& tensor, Label label);
    std::size_t count(Label label) const { return count_[static_cast<int>(label)]; }
    /// Throws ValidationError if either class has fewer than two samples.
    ClassStats finish() const;

private:
    TokenLayout layout_;
    std::size_t dim_;
    TokenStrategy scope_;
    std::vector<std::size_t> tokens_;
    std::array<std::vector<double>, 2> mean_;
    std::array<std::vector<double>, 2> m2_;
    std::array<std::size_t, 2> count_{};
};

ClassStats compute_class_stats(std::span<const FeatureTensor> samples, std::span<const Label> labels,
                               const TokenStrategy& scope = TokenStrategy::of(TokenStrategy::Kind::patch));

inline constexpr double kDefaultFisherEps = 1e-12;
inline constexpr std::size_t kDefaultK = 10;

/// Fisher scores of the scored tokens and their descending order.
struct TokenRanking {
    TokenLayout layout;
    TokenStrategy scope;
    std::vector<std::size_t> tokens;          // scored token rows, ascending
    std::vector<double> scores;               // scores[j] belongs to tokens[j]
    std::vector<std::size_t> sorted_indices;  // token rows, best first; ties by ascending row
    double eps = kDefaultFisherEps;
    std::size_t k_default = kDefaultK;
    std::size_t n_real = 0;
    std::size_t n_fake = 0;

    double score_of(std::size_t token) const;
    /// "patch_only", "all_tokens", or the strategy name for other scopes.
    std::string scope_name() const;
};

/// F[i,d] = (mu_real - mu_fake)^2 / (var_real + var_fake + eps); F[i] = mean over d.
TokenRanking fisher_scores(const ClassStats& stats, double eps = kDefaultFisherEps);

/// Sorts scores descending, breaking ties by ascending token row.
std::vector<std::size_t> sort_by_score(std::span<const std::size_t> tokens, std::span<const double> scores);

std::string ranking_to_json(const TokenRanking& ranking);
TokenRanking ranking_from_json(std::string_view text);
void save_ranking(const TokenRanking& ranking, const std::filesystem::path& path);
TokenRanking load_ranking(const std::filesystem::path& path);

struct SelectionConfig {
    enum class Method { fisher_topk, random_k };

    std::size_t k = kDefaultK;
    Method method = Method::fisher_topk;
    std::uint64_t seed = 0;

    std::string describe() const;
};

std::string_view to_string(SelectionConfig::Method method) noexcept;
SelectionConfig::Method parse_selection_method(std::string_view text);

/// fisher_topk: the first k of sorted_indices. random_k: k scored rows drawn
/// without replacement from a seeded stream, returned ascending.
std::vector<std::size_t> select_top_k(const TokenRanking& ranking, const SelectionConfig& cfg);

using Embedding = std::vector<double>;

/// Mean of the selected rows. Rows are summed in ascending order, so the
/// result depends only on the index set.
Embedding aggregate(const FeatureTensor& tensor, std::span<const std::size_t> indices);

}  // namespace fgts

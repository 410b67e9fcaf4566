#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "fgts/error.hpp"
#include "fgts/fgts.hpp"

namespace fgts {

double TokenRanking::score_of(std::size_t token) const {
    const auto it = std::lower_bound(tokens.begin(), tokens.end(), token);
    if (it == tokens.end() || *it != token)
        throw ValidationError("token " + std::to_string(token) + " is not in the ranking scope");
    return scores[static_cast<std::size_t>(it - tokens.begin())];
}

std::string TokenRanking::scope_name() const {
    if (scope.kind == TokenStrategy::Kind::patch) return "patch_only";
    if (scope.kind == TokenStrategy::Kind::all) return "all_tokens";
    return scope.name();
}

std::vector<std::size_t> sort_by_score(std::span<const std::size_t> tokens, std::span<const double> scores) {
    std::vector<std::size_t> order(tokens.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return tokens[a] < tokens[b];
    });
    std::vector<std::size_t> out;
    out.reserve(order.size());
    for (std::size_t j : order) out.push_back(tokens[j]);
    return out;
}

TokenRanking fisher_scores(const ClassStats& stats, double eps) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw ValidationError("fisher eps must be finite and >= 0");
    TokenRanking r;
    r.layout = stats.layout;
    r.scope = stats.scope;
    r.tokens = stats.tokens;
    r.eps = eps;
    r.n_real = stats.count[static_cast<int>(Label::real)];
    r.n_fake = stats.count[static_cast<int>(Label::fake)];
    r.scores.resize(stats.tokens.size());

    for (std::size_t pos = 0; pos < stats.tokens.size(); ++pos) {
        double sum = 0.0;
        for (std::size_t d = 0; d < stats.dim; ++d) {
            const double gap = stats.mean_at(Label::real, pos, d) - stats.mean_at(Label::fake, pos, d);
            const double num = gap * gap;
            const double den = stats.var_at(Label::real, pos, d) + stats.var_at(Label::fake, pos, d) + eps;
            if (den == 0.0) {
                if (num != 0.0)
                    throw ValidationError("token " + std::to_string(stats.tokens[pos]) +
                                          " has zero variance and a nonzero mean gap; use eps > 0");
                continue;
            }
            sum += num / den;
        }
        r.scores[pos] = sum / static_cast<double>(stats.dim);
    }
    r.sorted_indices = sort_by_score(r.tokens, r.scores);
    return r;
}

std::string ranking_to_json(const TokenRanking& r) {
    nlohmann::ordered_json j;
    j["scope"] = r.scope_name();
    j["scores"] = r.scores;
    j["sorted_indices"] = r.sorted_indices;
    j["k_default"] = r.k_default;
    j["strategy"] = r.scope.name();
    j["token_indices"] = r.tokens;
    j["layout"] = {{"n_cls", r.layout.n_cls}, {"n_reg", r.layout.n_reg},
                   {"grid_h", r.layout.grid_h}, {"grid_w", r.layout.grid_w}};
    j["eps"] = r.eps;
    j["n_real"] = r.n_real;
    j["n_fake"] = r.n_fake;
    return j.dump(2) + "\n";
}

TokenRanking ranking_from_json(std::string_view text) {
    TokenRanking r;
    try {
        const auto j = nlohmann::json::parse(text);
        const auto& layout = j.at("layout");
        r.layout = TokenLayout{layout.at("n_cls").get<std::size_t>(), layout.at("n_reg").get<std::size_t>(),
                               layout.at("grid_h").get<std::size_t>(), layout.at("grid_w").get<std::size_t>()};
        r.scope = TokenStrategy::parse(j.at("strategy").get<std::string>());
        r.tokens = j.at("token_indices").get<std::vector<std::size_t>>();
        r.scores = j.at("scores").get<std::vector<double>>();
        r.sorted_indices = j.at("sorted_indices").get<std::vector<std::size_t>>();
        r.k_default = j.value("k_default", kDefaultK);
        r.eps = j.value("eps", kDefaultFisherEps);
        r.n_real = j.value("n_real", std::size_t{0});
        r.n_fake = j.value("n_fake", std::size_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed ranking: ") + e.what());
    }
    r.layout.validate();
    if (r.scores.size() != r.tokens.size() || r.sorted_indices.size() != r.tokens.size())
        throw ValidationError("malformed ranking: scores, token_indices and sorted_indices differ in length");
    if (!std::is_sorted(r.tokens.begin(), r.tokens.end()) ||
        std::adjacent_find(r.tokens.begin(), r.tokens.end()) != r.tokens.end())
        throw ValidationError("malformed ranking: token_indices must be strictly ascending");
    if (!r.tokens.empty() && r.tokens.back() >= r.layout.total())
        throw ValidationError("malformed ranking: token index out of range");
    for (double s : r.scores)
        if (!std::isfinite(s) || s < 0.0) throw ValidationError("malformed ranking: scores must be finite and >= 0");
    auto sorted = r.sorted_indices;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != r.tokens) throw ValidationError("malformed ranking: sorted_indices is not a permutation of the scored tokens");
    return r;
}

void save_ranking(const TokenRanking& ranking, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
    out << ranking_to_json(ranking);
}

TokenRanking load_ranking(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open ranking " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return ranking_from_json(buf.str());
}

}  // namespace fgts

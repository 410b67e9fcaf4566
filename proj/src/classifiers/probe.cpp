#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fgts/classifiers.hpp"
#include "fgts/error.hpp"

namespace fgts {

namespace {

std::vector<double> prepare_input(std::span<const double> z, bool normalize) {
    std::vector<double> x(z.begin(), z.end());
    if (!normalize) return x;
    double sq = 0.0;
    for (double v : x) sq += v * v;
    if (sq > 0.0) {
        const double norm = std::sqrt(sq);
        for (double& v : x) v /= norm;
    }
    return x;
}

// Numerically stable two-way log-softmax loss and fake-class probability.
struct SoftmaxOut {
    double loss;
    double p_fake;
};

SoftmaxOut softmax_ce(double logit_real, double logit_fake, Label y) {
    const double hi = std::max(logit_real, logit_fake);
    const double lse = hi + std::log(std::exp(logit_real - hi) + std::exp(logit_fake - hi));
    const double target = y == Label::fake ? logit_fake : logit_real;
    return {lse - target, std::exp(logit_fake - lse)};
}

struct Params {
    std::size_t dim;
    std::vector<double> w;  // 2 x dim
    std::array<double, 2> b{};

    std::array<double, 2> logits(std::span<const double> x) const {
        std::array<double, 2> out = b;
        for (int c = 0; c < 2; ++c) {
            const double* row = w.data() + c * dim;
            for (std::size_t d = 0; d < dim; ++d) out[c] += row[d] * x[d];
        }
        return out;
    }
};

double mean_loss(const Params& p, const std::vector<std::vector<double>>& xs, std::span<const Label> labels) {
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto l = p.logits(xs[i]);
        total += softmax_ce(l[0], l[1], labels[i]).loss;
    }
    return total / static_cast<double>(xs.size());
}

class Adam {
public:
    Adam(std::size_t n, const TrainingMeta& meta) : m_(n, 0.0), v_(n, 0.0), meta_(meta) {}

    void begin_step() {
        ++t_;
        c1_ = 1.0 - std::pow(meta_.beta1, static_cast<double>(t_));
        c2_ = 1.0 - std::pow(meta_.beta2, static_cast<double>(t_));
    }

    void apply(double& param, double grad, std::size_t slot) {
        double& m = m_[slot];
        double& v = v_[slot];
        m = meta_.beta1 * m + (1.0 - meta_.beta1) * grad;
        v = meta_.beta2 * v + (1.0 - meta_.beta2) * grad * grad;
        const double m_hat = m / c1_;
        const double v_hat = v / c2_;
        param -= meta_.lr * m_hat / (std::sqrt(v_hat) + meta_.adam_eps);
    }

private:
    std::vector<double> m_, v_;
    TrainingMeta meta_;
    std::uint64_t t_ = 0;
    double c1_ = 1.0, c2_ = 1.0;
};

}  // namespace

LinearProbe LinearProbe::zeros(std::size_t dim) {
    LinearProbe p;
    p.dim = dim;
    p.weights.assign(2 * dim, 0.0f);
    return p;
}

LinearProbe fit_probe(std::span<const Embedding> embeddings, std::span<const Label> labels,
                      const TrainingMeta& meta, bool normalize_input) {
    if (embeddings.size() != labels.size()) throw ValidationError("embeddings and labels differ in length");
    if (embeddings.empty()) throw ValidationError("fit_probe: no training embeddings");
    const std::size_t n = embeddings.size();
    const std::size_t dim = embeddings.front().size();
    if (dim == 0) throw ValidationError("fit_probe: zero-dimensional embeddings");
    const auto n_fake = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::fake));
    if (n_fake == 0 || n_fake == n) throw ValidationError("fit_probe: degenerate single-class input");
    if (meta.epochs == 0) throw ValidationError("fit_probe: epochs must be positive");
    if (!(meta.lr > 0.0)) throw ValidationError("fit_probe: lr must be positive");

    std::vector<std::vector<double>> xs;
    xs.reserve(n);
    for (const auto& e : embeddings) {
        if (e.size() != dim) throw ValidationError("fit_probe: embedding dimension mismatch");
        for (double v : e)
            if (!std::isfinite(v)) throw ValidationError("fit_probe: non-finite embedding value");
        xs.push_back(prepare_input(e, normalize_input));
    }

    Params p{dim, std::vector<double>(2 * dim, 0.0), {0.0, 0.0}};
    Adam adam(2 * dim + 2, meta);
    const std::size_t batch = meta.batch_size == 0 ? n : std::min(meta.batch_size, n);
    const bool full_batch = batch == n;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(meta.seed);

    std::vector<double> gw(2 * dim);
    LinearProbe probe = LinearProbe::zeros(dim);
    probe.normalize_input = normalize_input;
    probe.meta = meta;

    for (std::size_t epoch = 0; epoch < meta.epochs; ++epoch) {
        if (!full_batch) std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(start + batch, n);
            std::fill(gw.begin(), gw.end(), 0.0);
            std::array<double, 2> gb{0.0, 0.0};
            for (std::size_t j = start; j < end; ++j) {
                const std::size_t i = order[j];
                const auto l = p.logits(xs[i]);
                const double p_fake = softmax_ce(l[0], l[1], labels[i]).p_fake;
                const double y_fake = labels[i] == Label::fake ? 1.0 : 0.0;
                // d(loss)/d(logit_fake) = p_fake - y_fake, d/d(logit_real) is its negation.
                const double g_fake = p_fake - y_fake;
                const std::array<double, 2> g{-g_fake, g_fake};
                for (int c = 0; c < 2; ++c) {
                    double* row = gw.data() + c * dim;
                    for (std::size_t d = 0; d < dim; ++d) row[d] += g[c] * xs[i][d];
                    gb[c] += g[c];
                }
            }
            const double inv_b = 1.0 / static_cast<double>(end - start);
            adam.begin_step();
            for (std::size_t s = 0; s < 2 * dim; ++s) adam.apply(p.w[s], gw[s] * inv_b, s);
            for (int c = 0; c < 2; ++c) adam.apply(p.b[c], gb[c] * inv_b, 2 * dim + c);
        }
        probe.loss_history.push_back(mean_loss(p, xs, labels));
    }

    for (std::size_t s = 0; s < 2 * dim; ++s) probe.weights[s] = static_cast<float>(p.w[s]);
    probe.bias = {static_cast<float>(p.b[0]), static_cast<float>(p.b[1])};
    for (float v : probe.weights)
        if (!std::isfinite(v)) throw ValidationError("fit_probe: training diverged (non-finite weights)");
    return probe;
}

namespace {

std::array<double, 2> probe_logits(const LinearProbe& probe, std::span<const double> z) {
    if (z.size() != probe.dim)
        throw ValidationError("probe: dimension mismatch (" + std::to_string(z.size()) + " vs " +
                              std::to_string(probe.dim) + ")");
    const auto x = prepare_input(z, probe.normalize_input);
    std::array<double, 2> out{probe.bias[0], probe.bias[1]};
    for (int c = 0; c < 2; ++c) {
        const float* row = probe.weights.data() + c * probe.dim;
        for (std::size_t d = 0; d < probe.dim; ++d) out[c] += static_cast<double>(row[d]) * x[d];
    }
    return out;
}

}  // namespace

Prediction probe_predict(const LinearProbe& probe, std::span<const double> z) {
    const auto l = probe_logits(probe, z);
    return make_prediction(l[1] - l[0]);
}

double probe_loss(const LinearProbe& probe, std::span<const Embedding> embeddings, std::span<const Label> labels) {
    if (embeddings.empty() || embeddings.size() != labels.size())
        throw ValidationError("probe_loss: need matching, non-empty embeddings and labels");
    double total = 0.0;
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        const auto l = probe_logits(probe, embeddings[i]);
        total += softmax_ce(l[0], l[1], labels[i]).loss;
    }
    return total / static_cast<double>(embeddings.size());
}

}  // namespace fgts

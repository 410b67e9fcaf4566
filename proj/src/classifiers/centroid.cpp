#include <cmath>

#include "fgts/classifiers.hpp"
#include "fgts/error.hpp"

namespace fgts {

Prediction make_prediction(double score) noexcept {
    return {score, score >= 0.0 ? Label::fake : Label::real};
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double cosine(std::span<const double> z, double z_norm, std::span<const double> mu) {
    const double mu_norm = std::sqrt(dot(mu, mu));
    if (mu_norm == 0.0) return 0.0;
    return dot(z, mu) / (z_norm * mu_norm);
}

}  // namespace

CentroidModel fit_centroids(std::span<const Embedding> embeddings, std::span<const Label> labels,
                            std::vector<std::size_t> token_indices) {
    if (embeddings.size() != labels.size()) throw ValidationError("embeddings and labels differ in length");
    if (embeddings.empty()) throw ValidationError("fit_centroids: no reference embeddings");
    const std::size_t dim = embeddings.front().size();
    if (dim == 0) throw ValidationError("fit_centroids: zero-dimensional embeddings");

    CentroidModel m;
    m.mu_real.assign(dim, 0.0);
    m.mu_fake.assign(dim, 0.0);
    std::size_t n_real = 0, n_fake = 0;
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        if (embeddings[i].size() != dim) throw ValidationError("fit_centroids: embedding dimension mismatch");
        auto& mu = labels[i] == Label::fake ? m.mu_fake : m.mu_real;
        (labels[i] == Label::fake ? n_fake : n_real)++;
        for (std::size_t d = 0; d < dim; ++d) mu[d] += embeddings[i][d];
    }
    if (n_real == 0) throw ValidationError("fit_centroids: empty class real");
    if (n_fake == 0) throw ValidationError("fit_centroids: empty class fake");
    for (double& v : m.mu_real) v /= static_cast<double>(n_real);
    for (double& v : m.mu_fake) v /= static_cast<double>(n_fake);

    for (const auto* mu : {&m.mu_real, &m.mu_fake})
        for (double v : *mu)
            if (!std::isfinite(v)) throw ValidationError("fit_centroids: non-finite centroid");
    if (dot(m.mu_real, m.mu_real) == 0.0 && dot(m.mu_fake, m.mu_fake) == 0.0)
        throw ValidationError("fit_centroids: both centroids are zero vectors");

    m.k = token_indices.size();
    m.token_indices = std::move(token_indices);
    return m;
}

Prediction centroid_predict(const CentroidModel& model, std::span<const double> z) {
    if (z.size() != model.dim())
        throw ValidationError("centroid_predict: dimension mismatch (" + std::to_string(z.size()) + " vs " +
                              std::to_string(model.dim()) + ")");
    const double z_norm = std::sqrt(dot(z, z));
    if (z_norm == 0.0) throw ValidationError("centroid_predict: zero-norm embedding (cosine undefined)");
    return make_prediction(cosine(z, z_norm, model.mu_fake) - cosine(z, z_norm, model.mu_real));
}

}  // namespace fgts

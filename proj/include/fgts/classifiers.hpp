#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fgts/fgts.hpp"
#include "fgts/label.hpp"

namespace fgts {

struct Prediction {
    double score = 0.0;  // higher means more likely fake
    Label label = Label::fake;
};

Prediction make_prediction(double score) noexcept;

// ---------------------------------------------------------------------------
// Training-free protocol: cosine similarity to class centroids.

struct CentroidModel {
    Embedding mu_real;
    Embedding mu_fake;
    std::size_t k = 0;
    std::vector<std::size_t> token_indices;

    std::size_t dim() const noexcept { return mu_real.size(); }
};

CentroidModel fit_centroids(std::span<const Embedding> embeddings, std::span<const Label> labels,
                            std::vector<std::size_t> token_indices = {});

/// score = cos(z, mu_fake) - cos(z, mu_real). A zero centroid contributes cosine 0.
Prediction centroid_predict(const CentroidModel& model, std::span<const double> z);

// ---------------------------------------------------------------------------
// Linear probe: one 2-way fully connected layer trained with softmax
// cross-entropy and Adam.

struct TrainingMeta {
    std::size_t epochs = 50;
    double lr = 1e-2;
    std::size_t batch_size = 32;  // 0 means full batch
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
};

struct LinearProbe {
    std::size_t dim = 0;
    std::vector<float> weights;  // 2 x dim, row 0 = real logit, row 1 = fake logit
    std::array<float, 2> bias{};
    bool normalize_input = true;
    TrainingMeta meta;
    std::size_t k = 0;
    std::vector<std::size_t> token_indices;
    std::vector<double> loss_history;  // mean training loss after each epoch

    static LinearProbe zeros(std::size_t dim);
};

LinearProbe fit_probe(std::span<const Embedding> embeddings, std::span<const Label> labels,
                      const TrainingMeta& meta = {}, bool normalize_input = true);

/// score = logit_fake - logit_real.
Prediction probe_predict(const LinearProbe& probe, std::span<const double> z);

/// Mean softmax cross-entropy of a probe over a labelled set.
double probe_loss(const LinearProbe& probe, std::span<const Embedding> embeddings, std::span<const Label> labels);

// ---------------------------------------------------------------------------
// Persistence. Centroids are plain JSON; probe weights are base64 float32 LE.

using Model = std::variant<CentroidModel, LinearProbe>;

std::string protocol_name(const Model& model);
const std::vector<std::size_t>& model_tokens(const Model& model);
Prediction predict(const Model& model, std::span<const double> z);

std::string model_to_json(const Model& model);
Model model_from_json(std::string_view text);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace fgts

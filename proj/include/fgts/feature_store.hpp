#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fgts/label.hpp"

namespace fgts {

/// Token arrangement of one feature tensor: CLS tokens first, then register
/// tokens, then grid_h x grid_w patch tokens in row-major order.
struct TokenLayout {
    std::size_t n_cls = 1;
    std::size_t n_reg = 4;
    std::size_t grid_h = 14;
    std::size_t grid_w = 14;

    std::size_t patch_count() const noexcept { return grid_h * grid_w; }
    std::size_t total() const noexcept { return n_cls + n_reg + patch_count(); }
    std::size_t first_register() const noexcept { return n_cls; }
    std::size_t first_patch() const noexcept { return n_cls + n_reg; }

    /// Throws ValidationError("layout inconsistency: ...") on an empty patch grid.
    void validate() const;

    bool operator==(const TokenLayout&) const = default;
};

std::string describe(const TokenLayout& layout);

/// One image's token features: layout.total() rows of `dim` float32 values.
struct FeatureTensor {
    TokenLayout layout;
    std::size_t dim = 0;
    std::vector<float> data;  // row-major, row = token
    std::string meta;         // free-form provenance note carried in the file header

    FeatureTensor() = default;
    FeatureTensor(TokenLayout layout, std::size_t dim);

    std::size_t rows() const noexcept { return layout.total(); }
    std::span<const float> row(std::size_t token) const {
        return {data.data() + token * dim, dim};
    }
    std::span<float> row(std::size_t token) { return {data.data() + token * dim, dim}; }
    float& at(std::size_t token, std::size_t d) { return data[token * dim + d]; }
    float at(std::size_t token, std::size_t d) const { return data[token * dim + d]; }

    /// Checks shape arithmetic and finiteness; throws ValidationError.
    void validate() const;
};

inline constexpr std::uint16_t kFeatureFileVersion = 1;

// Binary container: "FGTS" | u16 version | u32 header length | JSON header | f32 LE payload.
void write_feature_file(const FeatureTensor& tensor, const std::filesystem::path& path);
FeatureTensor read_feature_file(const std::filesystem::path& path);
std::vector<std::byte> encode_feature_file(const FeatureTensor& tensor);
FeatureTensor decode_feature_file(std::span<const std::byte> bytes);

enum class Split { reference, eval };
std::string_view to_string(Split split) noexcept;

struct SampleRecord {
    std::string sample_id;
    std::optional<std::filesystem::path> image_path;
    std::filesystem::path feature_path;
    Label label = Label::real;
    std::string generator{kRealGenerator};
    Split split = Split::eval;
};

struct SampleManifest {
    TokenLayout layout;
    std::size_t dim = 0;
    std::set<std::string> seen_generators;
    std::set<std::string> unseen_generators;
    std::vector<SampleRecord> records;
    // Relative feature/image paths are resolved against this directory.
    std::filesystem::path base_dir;

    std::filesystem::path feature_file(const SampleRecord& record) const;
    std::optional<std::filesystem::path> image_file(const SampleRecord& record) const;
    std::vector<SampleRecord> with_split(Split split) const;
    /// Reads a record's feature file and checks it against the manifest header.
    FeatureTensor load_features(const SampleRecord& record) const;
};

/// Parses the JSON Lines manifest. Relative paths resolve against
/// `features_dir` when given, else against the manifest's directory.
SampleManifest load_manifest(const std::filesystem::path& path,
                             const std::optional<std::filesystem::path>& features_dir = std::nullopt);
SampleManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir);
std::string format_manifest(const SampleManifest& manifest);
void write_manifest(const SampleManifest& manifest, const std::filesystem::path& path);

struct ValidationReport {
    std::size_t files_checked = 0;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    bool ok() const noexcept { return errors.empty(); }
};

/// Opens every feature file named by the manifest and records problems
/// instead of throwing.
ValidationReport validate_manifest(const SampleManifest& manifest);

/// Which token rows to use from a tensor.
struct TokenStrategy {
    enum class Kind { all, cls, reg, patch, cls_reg, cls_patch, indices };

    Kind kind = Kind::patch;
    std::vector<std::size_t> indices;  // only for Kind::indices

    static TokenStrategy parse(std::string_view text);
    static TokenStrategy of(Kind kind) { return TokenStrategy{kind, {}}; }
    static TokenStrategy from_indices(std::vector<std::size_t> idx) {
        return TokenStrategy{Kind::indices, std::move(idx)};
    }

    std::string name() const;
    /// Row indices named by the strategy, in ascending layout order (or list order for indices).
    std::vector<std::size_t> rows(const TokenLayout& layout) const;

    bool operator==(const TokenStrategy&) const = default;
};

/// Dense row-major float matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;

    std::span<const float> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
    bool operator==(const Matrix&) const = default;
};

Matrix select_tokens(const FeatureTensor& tensor, const TokenStrategy& strategy);

}  // namespace fgts

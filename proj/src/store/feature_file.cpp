#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "fgts/error.hpp"
#include "fgts/feature_store.hpp"

namespace fgts {

namespace {

constexpr char kMagic[4] = {'F', 'G', 'T', 'S'};
constexpr std::size_t kPreambleBytes = 10;  // magic + u16 version + u32 header length

void put_u16(std::vector<std::byte>& out, std::uint16_t v) {
    out.push_back(std::byte(v & 0xff));
    out.push_back(std::byte(v >> 8));
}

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out.push_back(std::byte((v >> s) & 0xff));
}

std::uint32_t get_u32(const std::byte* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
           std::uint32_t(p[3]) << 24;
}

std::size_t get_count(const nlohmann::json& header, const char* key) {
    const auto it = header.find(key);
    if (it == header.end()) throw ValidationError(std::string("malformed header: missing \"") + key + "\"");
    if (!it->is_number_unsigned())
        throw ValidationError(std::string("malformed header: \"") + key + "\" must be a non-negative integer");
    return it->get<std::size_t>();
}

}  // namespace

void TokenLayout::validate() const {
    if (patch_count() == 0)
        throw ValidationError("layout inconsistency: patch grid " + std::to_string(grid_h) + "x" +
                              std::to_string(grid_w) + " is empty");
}

std::string describe(const TokenLayout& layout) {
    return "(n_cls=" + std::to_string(layout.n_cls) + ", n_reg=" + std::to_string(layout.n_reg) +
           ", grid=" + std::to_string(layout.grid_h) + "x" + std::to_string(layout.grid_w) + ")";
}

FeatureTensor::FeatureTensor(TokenLayout layout_, std::size_t dim_)
    : layout(layout_), dim(dim_), data(layout_.total() * dim_, 0.0f) {}

void FeatureTensor::validate() const {
    layout.validate();
    if (dim == 0) throw ValidationError("layout inconsistency: dim must be positive");
    if (data.size() != layout.total() * dim)
        throw ValidationError("layout inconsistency: " + std::to_string(data.size()) +
                              " values for " + std::to_string(layout.total()) + " tokens x " +
                              std::to_string(dim) + " dims");
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i]))
            throw ValidationError("non-finite value at (" + std::to_string(i / dim) + "," +
                                  std::to_string(i % dim) + ")");
    }
}

std::vector<std::byte> encode_feature_file(const FeatureTensor& tensor) {
    tensor.validate();

    nlohmann::ordered_json header;
    header["n_cls"] = tensor.layout.n_cls;
    header["n_reg"] = tensor.layout.n_reg;
    header["grid_h"] = tensor.layout.grid_h;
    header["grid_w"] = tensor.layout.grid_w;
    header["dim"] = tensor.dim;
    if (!tensor.meta.empty()) header["meta"] = tensor.meta;
    const std::string text = header.dump();

    std::vector<std::byte> out;
    out.reserve(kPreambleBytes + text.size() + tensor.data.size() * 4);
    for (char c : kMagic) out.push_back(std::byte(c));
    put_u16(out, kFeatureFileVersion);
    put_u32(out, static_cast<std::uint32_t>(text.size()));
    for (char c : text) out.push_back(std::byte(c));
    for (float v : tensor.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

FeatureTensor decode_feature_file(std::span<const std::byte> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw ValidationError("bad magic");
    if (bytes.size() < kPreambleBytes) throw ValidationError("truncated header");
    const auto version = static_cast<std::uint16_t>(std::uint16_t(bytes[4]) | std::uint16_t(bytes[5]) << 8);
    if (version != kFeatureFileVersion)
        throw ValidationError("unsupported version " + std::to_string(version));
    const std::size_t header_len = get_u32(bytes.data() + 6);
    if (bytes.size() - kPreambleBytes < header_len) throw ValidationError("truncated header");

    const auto* header_begin = reinterpret_cast<const char*>(bytes.data() + kPreambleBytes);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_begin, header_begin + header_len);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("malformed header: ") + e.what());
    }
    if (!header.is_object()) throw ValidationError("malformed header: not a JSON object");

    TokenLayout layout{get_count(header, "n_cls"), get_count(header, "n_reg"),
                       get_count(header, "grid_h"), get_count(header, "grid_w")};
    layout.validate();
    const std::size_t dim = get_count(header, "dim");
    if (dim == 0) throw ValidationError("layout inconsistency: dim must be positive");

    FeatureTensor tensor(layout, dim);
    if (const auto it = header.find("meta"); it != header.end())
        tensor.meta = it->is_string() ? it->get<std::string>() : it->dump();

    const std::size_t payload = bytes.size() - kPreambleBytes - header_len;
    const std::size_t expected = tensor.data.size() * 4;
    if (payload < expected) throw ValidationError("truncated payload");
    if (payload > expected)
        throw ValidationError("trailing bytes after payload (" + std::to_string(payload - expected) + ")");

    const std::byte* p = bytes.data() + kPreambleBytes + header_len;
    for (std::size_t i = 0; i < tensor.data.size(); ++i, p += 4) {
        const float v = std::bit_cast<float>(get_u32(p));
        if (!std::isfinite(v))
            throw ValidationError("non-finite value at (" + std::to_string(i / dim) + "," +
                                  std::to_string(i % dim) + ")");
        tensor.data[i] = v;
    }
    return tensor;
}

void write_feature_file(const FeatureTensor& tensor, const std::filesystem::path& path) {
    const auto bytes = encode_feature_file(tensor);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ValidationError("write failed: " + path.string());
}

FeatureTensor read_feature_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_feature_file(std::as_bytes(std::span(raw)));
    } catch (const ValidationError& e) {
        throw ValidationError(path.filename().string() + ": " + e.what());
    }
}

}  // namespace fgts

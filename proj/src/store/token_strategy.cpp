#include <charconv>

#include "fgts/error.hpp"
#include "fgts/feature_store.hpp"

namespace fgts {

TokenStrategy TokenStrategy::parse(std::string_view text) {
    using K = Kind;
    if (text == "all") return of(K::all);
    if (text == "cls") return of(K::cls);
    if (text == "reg") return of(K::reg);
    if (text == "patch") return of(K::patch);
    if (text == "cls+reg") return of(K::cls_reg);
    if (text == "cls+patch") return of(K::cls_patch);

    constexpr std::string_view prefix = "indices:";
    if (text.starts_with(prefix)) {
        std::vector<std::size_t> idx;
        std::string_view rest = text.substr(prefix.size());
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const auto item = rest.substr(0, comma);
            std::size_t value = 0;
            const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
            if (ec != std::errc{} || ptr != item.data() + item.size() || item.empty())
                throw ValidationError("bad token index \"" + std::string(item) + "\"");
            idx.push_back(value);
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
        if (idx.empty()) throw ValidationError("indices strategy needs at least one index");
        return from_indices(std::move(idx));
    }
    throw ValidationError("unknown token strategy \"" + std::string(text) + "\"");
}

std::string TokenStrategy::name() const {
    switch (kind) {
        case Kind::all: return "all";
        case Kind::cls: return "cls";
        case Kind::reg: return "reg";
        case Kind::patch: return "patch";
        case Kind::cls_reg: return "cls+reg";
        case Kind::cls_patch: return "cls+patch";
        case Kind::indices: break;
    }
    std::string out = "indices:";
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(indices[i]);
    }
    return out;
}

std::vector<std::size_t> TokenStrategy::rows(const TokenLayout& layout) const {
    std::vector<std::size_t> out;
    auto push_range = [&](std::size_t begin, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) out.push_back(begin + i);
    };
    const bool want_cls = kind == Kind::all || kind == Kind::cls || kind == Kind::cls_reg || kind == Kind::cls_patch;
    const bool want_reg = kind == Kind::all || kind == Kind::reg || kind == Kind::cls_reg;
    const bool want_patch = kind == Kind::all || kind == Kind::patch || kind == Kind::cls_patch;

    if (kind == Kind::indices) {
        for (std::size_t i : indices) {
            if (i >= layout.total())
                throw ValidationError("token index " + std::to_string(i) + " out of range (N=" +
                                      std::to_string(layout.total()) + ")");
        }
        return indices;
    }
    if (want_cls) push_range(0, layout.n_cls);
    if (want_reg) push_range(layout.first_register(), layout.n_reg);
    if (want_patch) push_range(layout.first_patch(), layout.patch_count());
    return out;
}

Matrix select_tokens(const FeatureTensor& tensor, const TokenStrategy& strategy) {
    const auto rows = strategy.rows(tensor.layout);
    Matrix m{rows.size(), tensor.dim, {}};
    m.data.reserve(rows.size() * tensor.dim);
    for (std::size_t r : rows) {
        const auto src = tensor.row(r);
        m.data.insert(m.data.end(), src.begin(), src.end());
    }
    return m;
}

}  // namespace fgts

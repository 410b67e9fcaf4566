#include <cmath>

#include <fmt/format.h>

#include "fgts/error.hpp"
#include "fgts/perturb.hpp"

namespace fgts {

namespace {

using Kind = PerturbSpec::Kind;

struct KindName {
    Kind kind;
    std::string_view name;
    std::size_t min_params;
    std::size_t max_params;
};

constexpr KindName kKinds[] = {
    {Kind::identity, "identity", 0, 0}, {Kind::lowpass, "lowpass", 1, 1}, {Kind::highpass, "highpass", 1, 1},
    {Kind::mask, "mask", 1, 1},         {Kind::shuffle, "shuffle", 1, 1}, {Kind::cond_a, "cond_a", 1, 1},
    {Kind::cond_b, "cond_b", 1, 2},     {Kind::cond_c, "cond_c", 1, 2},   {Kind::gaussian, "gaussian", 1, 1},
    {Kind::jpeg, "jpeg", 1, 1},         {Kind::resize, "resize", 1, 1},
};

const KindName& lookup(std::string_view name) {
    for (const auto& k : kKinds)
        if (k.name == name) return k;
    throw ValidationError("unknown perturbation kind \"" + std::string(name) + "\"");
}

const KindName& lookup(Kind kind) {
    for (const auto& k : kKinds)
        if (k.kind == kind) return k;
    throw std::logic_error("unhandled perturbation kind");
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

std::size_t as_count(double v, const char* what) {
    if (!(v >= 1.0) || v != std::floor(v)) throw ValidationError(std::string(what) + " must be a positive integer");
    return static_cast<std::size_t>(v);
}

}  // namespace

PerturbSpec PerturbSpec::make(std::string_view kind, std::span<const double> params) {
    const KindName& k = lookup(kind);
    if (params.size() < k.min_params || params.size() > k.max_params)
        throw ValidationError("perturbation \"" + std::string(kind) + "\" takes " + std::to_string(k.min_params) +
                              (k.max_params != k.min_params ? "-" + std::to_string(k.max_params) : "") +
                              " parameter(s)");
    PerturbSpec s;
    s.kind = k.kind;
    switch (k.kind) {
        case Kind::identity: break;
        case Kind::lowpass:
        case Kind::highpass:
        case Kind::cond_a: s.r = params[0]; break;
        case Kind::cond_b:
        case Kind::cond_c:
            s.r = params[0];
            if (params.size() > 1) s.block = as_count(params[1], "block");
            break;
        case Kind::mask: s.fraction = params[0]; break;
        case Kind::shuffle: s.window = as_count(params[0], "window"); break;
        case Kind::gaussian: s.sigma_255 = params[0]; break;
        case Kind::jpeg:
            if (params[0] != std::floor(params[0])) throw ValidationError("JPEG quality must be an integer");
            s.quality = static_cast<int>(params[0]);
            break;
        case Kind::resize: s.factor = params[0]; break;
    }
    s.validate();
    return s;
}

PerturbSpec PerturbSpec::parse(std::string_view text) {
    text = trim(text);
    const auto open = text.find('(');
    if (open == std::string_view::npos) return make(text, {});
    if (text.back() != ')') throw ValidationError("malformed perturbation \"" + std::string(text) + "\"");
    const std::string_view name = trim(text.substr(0, open));
    std::string_view rest = text.substr(open + 1, text.size() - open - 2);
    std::vector<double> params;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        std::string item(trim(rest.substr(0, comma)));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size())
            throw ValidationError("bad perturbation parameter \"" + item + "\"");
        params.push_back(v);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return make(name, params);
}

void PerturbSpec::validate() const {
    switch (kind) {
        case Kind::lowpass:
        case Kind::highpass:
        case Kind::cond_a:
        case Kind::cond_b:
        case Kind::cond_c:
            if (!(r > 0.0 && r <= 1.0)) throw ValidationError("cutoff ratio must be in (0, 1]");
            if ((kind == Kind::cond_b || kind == Kind::cond_c) && block == 0)
                throw ValidationError("block must be positive");
            break;
        case Kind::mask:
            if (!(fraction >= 0.0 && fraction <= 1.0)) throw ValidationError("mask fraction must be in [0, 1]");
            break;
        case Kind::shuffle:
            if (window == 0) throw ValidationError("shuffle window must be positive");
            break;
        case Kind::gaussian:
            if (!(sigma_255 >= 0.0) || !std::isfinite(sigma_255)) throw ValidationError("noise sigma must be >= 0");
            break;
        case Kind::jpeg:
            if (quality < 1 || quality > 100) throw ValidationError("JPEG quality must be in [1, 100]");
            break;
        case Kind::resize:
            if (!(factor > 0.0 && factor <= 1.0)) throw ValidationError("resize factor must be in (0, 1]");
            break;
        case Kind::identity: break;
    }
}

bool PerturbSpec::seeded() const noexcept {
    return kind == Kind::mask || kind == Kind::shuffle || kind == Kind::cond_a || kind == Kind::cond_b ||
           kind == Kind::gaussian;
}

std::string PerturbSpec::canonical() const {
    const std::string_view name = lookup(kind).name;
    switch (kind) {
        case Kind::identity: return std::string(name);
        case Kind::lowpass:
        case Kind::highpass:
        case Kind::cond_a: return fmt::format("{}({})", name, r);
        case Kind::cond_b:
        case Kind::cond_c: return fmt::format("{}({},{})", name, r, block);
        case Kind::mask: return fmt::format("{}({})", name, fraction);
        case Kind::shuffle: return fmt::format("{}({})", name, window);
        case Kind::gaussian: return fmt::format("{}({})", name, sigma_255);
        case Kind::jpeg: return fmt::format("{}({})", name, quality);
        case Kind::resize: return fmt::format("{}({})", name, factor);
    }
    return std::string(name);
}

std::string PerturbSpec::label() const {
    switch (kind) {
        case Kind::identity: return "Identity";
        case Kind::lowpass: return fmt::format("LP ({})", r);
        case Kind::highpass: return fmt::format("HP ({})", r);
        case Kind::mask: return fmt::format("Mask ({})", fraction);
        case Kind::shuffle: return fmt::format("Shuffle ({})", window);
        case Kind::cond_a: return fmt::format("Condition A ({})", r);
        case Kind::cond_b: return fmt::format("Condition B ({}, {})", r, block);
        case Kind::cond_c: return fmt::format("Condition C ({}, {})", r, block);
        case Kind::gaussian: return fmt::format("Gaussian ({})", sigma_255);
        case Kind::jpeg: return fmt::format("JPEG ({})", quality);
        case Kind::resize: return fmt::format("Resize ({})", factor);
    }
    return "?";
}

ImageBuffer apply_perturbation(const ImageBuffer& img, const PerturbSpec& spec, std::uint64_t seed) {
    spec.validate();
    ImageBuffer out;
    switch (spec.kind) {
        case Kind::identity: out = img; break;
        case Kind::lowpass: out = lowpass(img, spec.r); break;
        case Kind::highpass: out = highpass(img, spec.r); break;
        case Kind::mask: out = random_mask(img, spec.fraction, seed); break;
        case Kind::shuffle: out = local_shuffle(img, spec.window, seed); break;
        case Kind::cond_a: out = condition_a(img, spec.r, seed); break;
        case Kind::cond_b: out = condition_b(img, spec.r, spec.block, seed); break;
        case Kind::cond_c: out = condition_c(img, spec.r, spec.block); break;
        case Kind::gaussian: out = gaussian_noise(img, spec.sigma_255, seed); break;
        case Kind::jpeg: out = jpeg_compress(img, spec.quality); break;
        case Kind::resize: out = resize_cycle(img, spec.factor); break;
    }
    return out.clamp();
}

std::vector<PerturbSpec> default_robustness_specs() {
    std::vector<PerturbSpec> out;
    for (const char* s : {"gaussian(5)", "gaussian(10)", "jpeg(70)", "jpeg(80)", "resize(0.5)", "resize(0.75)"})
        out.push_back(PerturbSpec::parse(s));
    return out;
}

}  // namespace fgts

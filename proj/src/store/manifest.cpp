#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "fgts/error.hpp"
#include "fgts/feature_store.hpp"

namespace fgts {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end())
        throw ValidationError("manifest line " + std::to_string(line) + ": missing \"" + key + "\"");
    return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
    const json& v = require(obj, key, line);
    if (!v.is_string())
        throw ValidationError("manifest line " + std::to_string(line) + ": \"" + key + "\" must be a string");
    return v.get<std::string>();
}

std::size_t require_count(const json& obj, const char* key, std::size_t line) {
    const json& v = require(obj, key, line);
    if (!v.is_number_unsigned())
        throw ValidationError("manifest line " + std::to_string(line) + ": \"" + key +
                              "\" must be a non-negative integer");
    return v.get<std::size_t>();
}

std::set<std::string> generator_set(const json& header, const char* key) {
    std::set<std::string> out;
    const auto it = header.find(key);
    if (it == header.end()) return out;
    if (!it->is_array()) throw ValidationError(std::string("manifest header: \"") + key + "\" must be an array");
    for (const auto& g : *it) {
        if (!g.is_string()) throw ValidationError(std::string("manifest header: \"") + key + "\" entries must be strings");
        const auto name = g.get<std::string>();
        if (name == kRealGenerator)
            throw ValidationError("manifest header: \"-\" is reserved for real samples");
        out.insert(name);
    }
    return out;
}

Split parse_split(std::string_view text, std::size_t line) {
    if (text == "reference") return Split::reference;
    if (text == "eval") return Split::eval;
    throw ValidationError("manifest line " + std::to_string(line) + ": unknown split \"" +
                          std::string(text) + "\"");
}

fs::path resolve(const fs::path& base, const fs::path& p) {
    return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

std::string_view to_string(Split split) noexcept {
    return split == Split::reference ? "reference" : "eval";
}

fs::path SampleManifest::feature_file(const SampleRecord& record) const {
    return resolve(base_dir, record.feature_path);
}

std::optional<fs::path> SampleManifest::image_file(const SampleRecord& record) const {
    if (!record.image_path) return std::nullopt;
    return resolve(base_dir, *record.image_path);
}

std::vector<SampleRecord> SampleManifest::with_split(Split split) const {
    std::vector<SampleRecord> out;
    for (const auto& r : records)
        if (r.split == split) out.push_back(r);
    return out;
}

FeatureTensor SampleManifest::load_features(const SampleRecord& record) const {
    FeatureTensor t = read_feature_file(feature_file(record));
    if (t.layout != layout || t.dim != dim)
        throw ValidationError("layout mismatch: " + record.sample_id + " has " + describe(t.layout) +
                              " dim=" + std::to_string(t.dim) + ", manifest declares " +
                              describe(layout) + " dim=" + std::to_string(dim));
    return t;
}

SampleManifest parse_manifest(std::string_view text, const fs::path& base_dir) {
    SampleManifest m;
    m.base_dir = base_dir;

    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::unordered_set<std::string> ids;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!obj.is_object())
            throw ValidationError("manifest line " + std::to_string(line_no) + ": expected an object");

        if (!have_header) {
            if (!obj.contains("fgts_manifest"))
                throw ValidationError("manifest line " + std::to_string(line_no) +
                                      ": first line must be the header object");
            const std::size_t version = require_count(obj, "fgts_manifest", line_no);
            if (version != 1)
                throw ValidationError("manifest: unsupported version " + std::to_string(version));
            const json& layout = require(obj, "layout", line_no);
            m.layout = TokenLayout{require_count(layout, "n_cls", line_no), require_count(layout, "n_reg", line_no),
                                   require_count(layout, "grid_h", line_no),
                                   require_count(layout, "grid_w", line_no)};
            m.layout.validate();
            m.dim = require_count(obj, "dim", line_no);
            if (m.dim == 0) throw ValidationError("manifest header: dim must be positive");
            m.seen_generators = generator_set(obj, "seen_generators");
            m.unseen_generators = generator_set(obj, "unseen_generators");
            for (const auto& g : m.seen_generators)
                if (m.unseen_generators.count(g))
                    throw ValidationError("generator partition overlap: \"" + g + "\" is both seen and unseen");
            have_header = true;
            continue;
        }

        SampleRecord r;
        r.sample_id = require_string(obj, "sample_id", line_no);
        if (r.sample_id.empty())
            throw ValidationError("manifest line " + std::to_string(line_no) + ": empty sample_id");
        if (!ids.insert(r.sample_id).second)
            throw ValidationError("duplicate sample_id \"" + r.sample_id + "\"");
        if (const auto it = obj.find("image_path"); it != obj.end() && !it->is_null())
            r.image_path = fs::path(require_string(obj, "image_path", line_no));
        r.feature_path = require_string(obj, "feature_path", line_no);
        try {
            r.label = parse_label(require_string(obj, "label", line_no));
        } catch (const ValidationError& e) {
            throw ValidationError("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
        r.generator = require_string(obj, "generator", line_no);
        r.split = parse_split(require_string(obj, "split", line_no), line_no);

        if (r.label == Label::real && r.generator != kRealGenerator)
            throw ValidationError("manifest line " + std::to_string(line_no) +
                                  ": real sample must use generator \"-\"");
        if (r.label == Label::fake) {
            if (r.generator == kRealGenerator || r.generator.empty())
                throw ValidationError("manifest line " + std::to_string(line_no) +
                                      ": fake sample needs a generator name");
            if (!m.seen_generators.count(r.generator) && !m.unseen_generators.count(r.generator))
                throw ValidationError("manifest line " + std::to_string(line_no) + ": generator \"" +
                                      r.generator + "\" is in neither seen_generators nor unseen_generators");
        }
        m.records.push_back(std::move(r));
    }
    if (!have_header) throw ValidationError("manifest: missing header line");
    return m;
}

SampleManifest load_manifest(const fs::path& path, const std::optional<fs::path>& features_dir) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open manifest " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const fs::path base = features_dir ? *features_dir : path.parent_path();
    return parse_manifest(buf.str(), base);
}

std::string format_manifest(const SampleManifest& m) {
    std::string out;
    nlohmann::ordered_json header;
    header["fgts_manifest"] = 1;
    header["layout"] = {{"n_cls", m.layout.n_cls}, {"n_reg", m.layout.n_reg},
                        {"grid_h", m.layout.grid_h}, {"grid_w", m.layout.grid_w}};
    header["dim"] = m.dim;
    header["seen_generators"] = m.seen_generators;
    header["unseen_generators"] = m.unseen_generators;
    out += header.dump() + "\n";
    for (const auto& r : m.records) {
        nlohmann::ordered_json rec;
        rec["sample_id"] = r.sample_id;
        if (r.image_path) rec["image_path"] = r.image_path->generic_string();
        rec["feature_path"] = r.feature_path.generic_string();
        rec["label"] = to_string(r.label);
        rec["generator"] = r.generator;
        rec["split"] = to_string(r.split);
        out += rec.dump() + "\n";
    }
    return out;
}

void write_manifest(const SampleManifest& m, const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
    out << format_manifest(m);
}

ValidationReport validate_manifest(const SampleManifest& m) {
    ValidationReport report;
    std::size_t ref_real = 0, ref_fake = 0;
    for (const auto& r : m.records) {
        if (r.split == Split::reference) (r.label == Label::real ? ref_real : ref_fake)++;
        if (const auto img = m.image_file(r); img && !fs::exists(*img))
            report.warnings.push_back(r.sample_id + ": image " + img->string() + " not found");
        try {
            m.load_features(r);
        } catch (const ValidationError& e) {
            report.errors.push_back(r.sample_id + ": " + e.what());
        }
        ++report.files_checked;
    }
    if (ref_real + ref_fake > 0 && (ref_real == 0 || ref_fake == 0))
        report.warnings.push_back("reference split has only one class (" + std::to_string(ref_real) +
                                  " real, " + std::to_string(ref_fake) + " fake)");
    return report;
}

}  // namespace fgts

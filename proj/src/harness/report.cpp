#include "fgts/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "fgts/error.hpp"

namespace fgts {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kCsvHeader = "method,fingerprint,generator,n_fake,n_real,acc,auc,ap";

std::string fixed4(double v) { return std::isnan(v) ? "n/a" : fmt::format("{:.4f}", v); }

std::vector<std::string> split_csv_line(const std::string& line) {
    // Fields never contain commas except the quoted method label.
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

double parse_metric(const std::string& s) {
    if (s == "nan") return std::nan("");
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ValidationError("bad metric value \"" + s + "\"");
    return v;
}

}  // namespace

std::string format_metric(double v) { return std::isnan(v) ? "nan" : fmt::format("{}", v); }

EvalReport average_reports(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw ValidationError("average_reports: no reports");
    EvalReport out = reports.front();
    out.seed_reports = reports;
    for (std::size_t r = 1; r < reports.size(); ++r) {
        const auto& rows = reports[r].metrics.rows;
        if (rows.size() != out.metrics.rows.size())
            throw ValidationError("average_reports: reports cover different generators");
        for (std::size_t g = 0; g < rows.size(); ++g) {
            if (rows[g].generator != out.metrics.rows[g].generator)
                throw ValidationError("average_reports: reports cover different generators");
            out.metrics.rows[g].metrics.acc += rows[g].metrics.acc;
            out.metrics.rows[g].metrics.auc += rows[g].metrics.auc;
            out.metrics.rows[g].metrics.ap += rows[g].metrics.ap;
        }
    }
    const double n = static_cast<double>(reports.size());
    for (auto& row : out.metrics.rows) {
        row.metrics.acc /= n;
        row.metrics.auc /= n;
        row.metrics.ap /= n;
    }
    out.metrics.aggregate = mean_of(out.metrics.rows);
    return out;
}

std::string report_csv(const EvalReport& r) {
    std::string out(kCsvHeader);
    out += '\n';
    const std::string label = quote(r.label);
    for (const auto& row : r.metrics.rows)
        out += fmt::format("{},{},{},{},{},{},{},{}\n", label, r.fingerprint, row.generator, row.n_fake, row.n_real,
                           format_metric(row.metrics.acc), format_metric(row.metrics.auc),
                           format_metric(row.metrics.ap));
    std::size_t n_fake = 0;
    for (const auto& row : r.metrics.rows) n_fake += row.n_fake;
    const auto& a = r.metrics.aggregate;
    out += fmt::format("{},{},Avg,{},{},{},{},{}\n", label, r.fingerprint, n_fake, r.metrics.n_real,
                       format_metric(a.acc), format_metric(a.auc), format_metric(a.ap));
    return out;
}

EvalReport parse_report_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw ValidationError("report CSV: unexpected header");
    EvalReport r;
    bool have_avg = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 8) throw ValidationError("report CSV: expected 8 fields in \"" + line + "\"");
        r.label = f[0];
        r.fingerprint = f[1];
        const MetricTriple m{parse_metric(f[5]), parse_metric(f[6]), parse_metric(f[7])};
        if (f[2] == "Avg") {
            r.metrics.aggregate = m;
            r.metrics.n_real = std::stoul(f[4]);
            have_avg = true;
        } else {
            r.metrics.rows.push_back({f[2], std::stoul(f[3]), std::stoul(f[4]), m});
        }
    }
    if (!have_avg) throw ValidationError("report CSV: missing Avg row");
    return r;
}

std::string report_markdown(const EvalReport& r) {
    std::string out = fmt::format("# Evaluation: {}\n\n", r.label);
    out += fmt::format("- fingerprint: `{}`\n", r.fingerprint);
    if (!r.parent_fingerprint.empty()) out += fmt::format("- sweep: `{}`\n", r.parent_fingerprint);
    out += fmt::format("- token strategy: {}; selection: {}; protocol: {}\n", r.strategy, r.selection, r.protocol);
    out += fmt::format("- eval samples: {}; real pool per generator column: {}\n", r.n_eval, r.metrics.n_real);
    out += "- AUC and AP treat fake as the positive class; Avg is the unweighted mean over generators\n";
    if (!r.seed_reports.empty())
        out += fmt::format("- random-K metrics are the mean over {} seeds\n", r.seed_reports.size());
    out += "\n" + accuracy_table_markdown({r}) + "\n";

    out += "| Generator | n_fake | n_real | Acc | AUC | AP |\n|---|---:|---:|---:|---:|---:|\n";
    for (const auto& row : r.metrics.rows)
        out += fmt::format("| {} | {} | {} | {} | {} | {} |\n", row.generator, row.n_fake, row.n_real,
                           fixed4(row.metrics.acc), fixed4(row.metrics.auc), fixed4(row.metrics.ap));
    const auto& a = r.metrics.aggregate;
    out += fmt::format("| Avg | | | {} | {} | {} |\n", fixed4(a.acc), fixed4(a.auc), fixed4(a.ap));

    if (!r.seed_reports.empty()) {
        out += "\n| Seed run | Avg-acc | AUC | AP |\n|---|---:|---:|---:|\n";
        for (const auto& s : r.seed_reports) {
            const auto& m = s.metrics.aggregate;
            out += fmt::format("| {} | {} | {} | {} |\n", s.selection, fixed4(m.acc), fixed4(m.auc), fixed4(m.ap));
        }
    }
    return out;
}

void write_text(const fs::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw ValidationError("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_report(const EvalReport& report, const fs::path& dir) {
    fs::create_directories(dir);
    write_text(dir / "report.csv", report_csv(report));
    write_text(dir / "report.md", report_markdown(report));
}

EvalReport read_report(const fs::path& dir_or_csv) {
    const fs::path csv = fs::is_directory(dir_or_csv) ? dir_or_csv / "report.csv" : dir_or_csv;
    return parse_report_csv(read_text(csv));
}

std::string accuracy_table_markdown(const std::vector<EvalReport>& reports) {
    std::vector<std::string> generators;
    for (const auto& r : reports)
        for (const auto& row : r.metrics.rows)
            if (std::find(generators.begin(), generators.end(), row.generator) == generators.end())
                generators.push_back(row.generator);

    std::string out = "| Method |";
    std::string rule = "|---|";
    for (const auto& g : generators) {
        out += fmt::format(" {} |", g);
        rule += "---:|";
    }
    out += " Avg-acc |\n" + rule + "---:|\n";
    for (const auto& r : reports) {
        out += fmt::format("| {} |", r.label);
        for (const auto& g : generators) {
            const auto it = std::find_if(r.metrics.rows.begin(), r.metrics.rows.end(),
                                         [&](const GeneratorMetrics& m) { return m.generator == g; });
            out += it == r.metrics.rows.end() ? " - |" : fmt::format(" {} |", fixed4(it->metrics.acc));
        }
        out += fmt::format(" {} |\n", fixed4(r.metrics.aggregate.acc));
    }
    return out;
}

std::string accuracy_table_csv(const std::vector<EvalReport>& reports) {
    std::string out;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        std::string csv = report_csv(reports[i]);
        if (i > 0) csv = csv.substr(csv.find('\n') + 1);
        out += csv;
    }
    return out;
}

std::string summary_table_markdown(const std::vector<std::pair<std::string, EvalReport>>& rows,
                                   const std::string& first_column) {
    std::string out = fmt::format("| {} | Acc | AUC | AP |\n|---|---:|---:|---:|\n", first_column);
    for (const auto& [name, r] : rows) {
        const auto& a = r.metrics.aggregate;
        out += fmt::format("| {} | {} | {} | {} |\n", name, fixed4(a.acc), fixed4(a.auc), fixed4(a.ap));
    }
    return out;
}

std::string summary_table_csv(const std::vector<std::pair<std::string, EvalReport>>& rows,
                              const std::string& first_column) {
    std::string out = fmt::format("{},acc,auc,ap,fingerprint\n", first_column);
    for (const auto& [name, r] : rows) {
        const auto& a = r.metrics.aggregate;
        out += fmt::format("{},{},{},{},{}\n", quote(name), format_metric(a.acc), format_metric(a.auc),
                           format_metric(a.ap), r.fingerprint);
    }
    return out;
}

}  // namespace fgts

#include "fundsep/csvio.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fundsep {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

Csv::Csv(std::vector<std::string> header) : n_cols_(header.size()) {
    if (header.empty()) throw ValidationError("CSV needs at least one column");
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) text_ += ',';
        text_ += header[i];
    }
    text_ += '\n';
}

void Csv::add_row(std::vector<std::string> cells) {
    if (cells.size() != n_cols_)
        throw ValidationError("CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(n_cols_));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) text_ += ',';
        text_ += cells[i];
    }
    text_ += '\n';
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string manifest_json(const RunManifest& manifest) {
    nlohmann::ordered_json j;
    j["config_hash"] = manifest.config_hash;
    j["seed"] = manifest.seed;
    j["tool_version"] = manifest.tool_version;
    j["command"] = manifest.command;
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& [name, digest] : manifest.outputs) {
        nlohmann::ordered_json f;
        f["name"] = name;
        f["digest"] = digest;
        files.push_back(f);
    }
    j["outputs"] = files;
    return j.dump(2) + "\n";
}

RunManifest build_manifest(const std::string& canonical_cfg, std::uint64_t seed,
                           const std::string& command, const std::vector<OutputFile>& files) {
    RunManifest m;
    m.config_hash = hex64(fnv1a64(canonical_cfg));
    m.seed = seed;
    m.tool_version = "fundsep 1.0.0";
    m.command = command;
    for (const OutputFile& f : files) m.outputs.emplace_back(f.name, hex64(fnv1a64(f.content)));
    return m;
}

void write_outputs(const std::string& out_dir, const std::vector<OutputFile>& files,
                   const RunManifest& manifest) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    for (const OutputFile& f : files) {
        std::ofstream out(fs::path(out_dir) / f.name, std::ios::binary);
        if (!out) throw ValidationError("cannot write output file '" + f.name + "'");
        out << f.content;
    }
    std::ofstream out(fs::path(out_dir) / "manifest.json", std::ios::binary);
    if (!out) throw ValidationError("cannot write manifest.json");
    out << manifest_json(manifest);
}

std::vector<std::string> check_outputs(const std::string& out_dir,
                                       const std::vector<OutputFile>& files) {
    namespace fs = std::filesystem;
    std::vector<std::string> bad;
    for (const OutputFile& f : files) {
        const fs::path p = fs::path(out_dir) / f.name;
        std::ifstream in(p, std::ios::binary);
        if (!in) {
            bad.push_back(f.name + " (missing)");
            continue;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        if (fnv1a64(buf.str()) != fnv1a64(f.content)) bad.push_back(f.name + " (digest mismatch)");
    }
    return bad;
}

} // namespace fundsep

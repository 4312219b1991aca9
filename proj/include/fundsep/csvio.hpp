#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fundsep/types.hpp"

namespace fundsep {

// fixed numeric formatting: every emitted byte must be reproducible, so all
// doubles go through the same "%.12g" path
std::string format_double(double v);

// minimal CSV builder: comma separators, LF line endings, mandatory header
class Csv {
  public:
    explicit Csv(std::vector<std::string> header);
    void add_row(std::vector<std::string> cells);
    const std::string& str() const { return text_; }

  private:
    std::size_t n_cols_;
    std::string text_;
};

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

// one output file queued for writing: name relative to the out dir + content
struct OutputFile {
    std::string name;
    std::string content;
};

struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string tool_version;
    std::string command;
    std::vector<std::pair<std::string, std::string>> outputs;  // name -> digest
};

std::string manifest_json(const RunManifest& manifest);

RunManifest build_manifest(const std::string& canonical_cfg, std::uint64_t seed,
                           const std::string& command, const std::vector<OutputFile>& files);

// writes all files plus manifest.json under out_dir (created if missing)
void write_outputs(const std::string& out_dir, const std::vector<OutputFile>& files,
                   const RunManifest& manifest);

// --check mode: compare the would-be digests against the files on disk;
// returns the list of mismatched or missing names (empty = clean)
std::vector<std::string> check_outputs(const std::string& out_dir,
                                       const std::vector<OutputFile>& files);

} // namespace fundsep

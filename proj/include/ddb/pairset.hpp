#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ddb {

// One probe pair. Shape pairs share content and differ in style; texture
// pairs share style and differ in content. The synthetic generator stores
// mask ids in the content slots and fill ids in the style slots.
struct ProbePair {
    std::string content_a;
    std::string style_a;
    std::string content_b;
    std::string style_b;
    std::string path_a;  // materialized image, may be empty for in-memory sets
    std::string path_b;
};

struct PairSet {
    std::vector<ProbePair> shape_pairs;
    std::vector<ProbePair> texture_pairs;
    std::uint64_t seed = 0;

    void validate() const;
};

// Seeded pair sampling over two id corpora. With exhaustive=true the counts
// are ignored and one shape pair per content plus one texture pair per
// style are emitted.
PairSet sample_pair_plan(const std::vector<std::string>& content_ids,
                         const std::vector<std::string>& style_ids,
                         std::int64_t n_shape_pairs, std::int64_t n_texture_pairs,
                         std::uint64_t seed, bool exhaustive = false);

// Line-delimited provenance manifest next to an image directory.
void save_pairset_manifest(const PairSet& set, const std::filesystem::path& file);
PairSet load_pairset_manifest(const std::filesystem::path& file);

}  // namespace ddb

#include "ddb/pairset.hpp"

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "ddb/errors.hpp"

namespace ddb {

void PairSet::validate() const {
    for (const auto& p : shape_pairs) {
        if (p.content_a != p.content_b) throw ValidationError("shape pair with differing content ids");
        if (p.style_a == p.style_b) throw ValidationError("shape pair with identical style ids");
    }
    for (const auto& p : texture_pairs) {
        if (p.style_a != p.style_b) throw ValidationError("texture pair with differing style ids");
        if (p.content_a == p.content_b) throw ValidationError("texture pair with identical content ids");
    }
}

namespace {

// Two distinct indices in [0, n), seeded.
std::pair<std::size_t, std::size_t> draw_distinct(std::mt19937_64& rng, std::size_t n) {
    const std::size_t a = rng() % n;
    std::size_t b = rng() % (n - 1);
    if (b >= a) ++b;
    return {a, b};
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == '\t') { out.push_back(cur); cur.clear(); }
        else cur.push_back(c);
    }
    out.push_back(cur);
    return out;
}

}  // namespace

PairSet sample_pair_plan(const std::vector<std::string>& content_ids,
                         const std::vector<std::string>& style_ids,
                         std::int64_t n_shape_pairs, std::int64_t n_texture_pairs,
                         std::uint64_t seed, bool exhaustive) {
    PairSet set;
    set.seed = seed;
    std::mt19937_64 rng(seed);

    const bool want_shape = exhaustive ? !content_ids.empty() : n_shape_pairs > 0;
    const bool want_texture = exhaustive ? !style_ids.empty() : n_texture_pairs > 0;
    if (want_shape && (content_ids.empty() || style_ids.size() < 2)) {
        throw CapacityError("shape pairs need >= 1 content and >= 2 styles");
    }
    if (want_texture && (style_ids.empty() || content_ids.size() < 2)) {
        throw CapacityError("texture pairs need >= 2 contents and >= 1 style");
    }

    if (exhaustive) {
        for (const auto& c : content_ids) {
            auto [i, j] = draw_distinct(rng, style_ids.size());
            set.shape_pairs.push_back({c, style_ids[i], c, style_ids[j], "", ""});
        }
        for (const auto& s : style_ids) {
            auto [i, j] = draw_distinct(rng, content_ids.size());
            set.texture_pairs.push_back({content_ids[i], s, content_ids[j], s, "", ""});
        }
        return set;
    }

    for (std::int64_t k = 0; k < n_shape_pairs; ++k) {
        const auto& c = content_ids[rng() % content_ids.size()];
        auto [i, j] = draw_distinct(rng, style_ids.size());
        set.shape_pairs.push_back({c, style_ids[i], c, style_ids[j], "", ""});
    }
    for (std::int64_t k = 0; k < n_texture_pairs; ++k) {
        const auto& s = style_ids[rng() % style_ids.size()];
        auto [i, j] = draw_distinct(rng, content_ids.size());
        set.texture_pairs.push_back({content_ids[i], s, content_ids[j], s, "", ""});
    }
    return set;
}

void save_pairset_manifest(const PairSet& set, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw IoError("cannot write pairset manifest: " + file.string());
    out << "# kind\tcontent_a\tstyle_a\tcontent_b\tstyle_b\tpath_a\tpath_b\n";
    out << "seed\t" << set.seed << "\n";
    auto emit = [&out](const char* kind, const ProbePair& p) {
        out << kind << '\t' << p.content_a << '\t' << p.style_a << '\t' << p.content_b << '\t'
            << p.style_b << '\t' << p.path_a << '\t' << p.path_b << '\n';
    };
    for (const auto& p : set.shape_pairs) emit("shape", p);
    for (const auto& p : set.texture_pairs) emit("texture", p);
    out.flush();
    if (!out) throw IoError("pairset manifest write failed");
}

PairSet load_pairset_manifest(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("pairset manifest not found: " + file.string());
    PairSet set;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto f = split_fields(line);
        if (f[0] == "seed" && f.size() >= 2) {
            set.seed = std::stoull(f[1]);
            continue;
        }
        if (f.size() != 7) throw ValidationError("pairset manifest: bad line: " + line);
        ProbePair p{f[1], f[2], f[3], f[4], f[5], f[6]};
        if (f[0] == "shape") set.shape_pairs.push_back(std::move(p));
        else if (f[0] == "texture") set.texture_pairs.push_back(std::move(p));
        else throw ValidationError("pairset manifest: unknown pair kind: " + f[0]);
    }
    set.validate();
    return set;
}

}  // namespace ddb

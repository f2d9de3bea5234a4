#include "monarch/string_match.hpp"

#include <algorithm>
#include <cctype>
#include <random>

namespace monarch {

namespace {

constexpr uint64_t kSetBytes = uint64_t{kBlocksPerSet} * kBlockBytes;
constexpr uint64_t kWordsPerSet = kSetBytes / 8;

uint64_t pack(std::string_view s) {
    uint64_t w = 0;
    for (size_t i = 0; i < s.size() && i < 8; ++i) {
        w |= uint64_t{static_cast<unsigned char>(s[i])} << (8 * i);
    }
    return w;
}

Block replicate(uint64_t w) { return Block{w, w, w, w, w, w, w, w}; }

void store_text(Core& core, uint64_t base, const std::string& raw, uint64_t& requests) {
    for (uint64_t off = 0; off < raw.size(); off += kBlockBytes) {
        Request r;
        r.op = Op::Write;
        r.addr = base + off;
        r.size = static_cast<uint32_t>(std::min<uint64_t>(kBlockBytes, raw.size() - off));
        r.critical = false;
        for (unsigned i = 0; i < r.size; ++i) put_bytes(r.data, i, static_cast<unsigned char>(raw[off + i]), 1);
        core.issue(r);
        ++requests;
    }
}

void check_patterns(const std::vector<std::string>& patterns) {
    for (const auto& p : patterns) {
        if (p.empty()) throw ConfigError("empty search pattern");
        if (p.find('\0') != std::string::npos) throw ConfigError("search pattern contains NUL");
    }
}

}  // namespace

StringCorpus StringCorpus::encode(std::string text) {
    StringCorpus c;
    c.raw = std::move(text);
    c.words.resize(c.raw.size());
    const std::string_view v(c.raw);
    for (size_t i = 0; i < c.raw.size(); ++i) c.words[i] = pack(v.substr(i, 8));
    return c;
}

std::vector<uint64_t> encode_words(const std::string& text) {
    std::vector<uint64_t> out;
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        for (size_t k = i; k < j; k += 8) out.push_back(pack(std::string_view(text).substr(k, std::min<size_t>(8, j - k))));
        i = j;
    }
    return out;
}

std::string synthetic_corpus(uint64_t bytes, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::string s;
    s.reserve(bytes);
    while (s.size() < bytes) {
        const unsigned len = 2 + static_cast<unsigned>(rng() % 9);
        for (unsigned i = 0; i < len && s.size() < bytes; ++i) s.push_back(static_cast<char>('a' + rng() % 26));
        if (s.size() < bytes) s.push_back(' ');
    }
    return s;
}

StringMatchResult string_match_baseline(Core& core, const StringCorpus& corpus,
                                        const std::vector<std::string>& patterns,
                                        kernels::Policy policy) {
    check_patterns(patterns);
    StringMatchResult res;
    const uint64_t n = corpus.raw.size();
    const uint64_t base = core.port().alloc(AllocKind::Hbm, std::max<uint64_t>(n, 1)).base;
    store_text(core, base, corpus.raw, res.load_requests);

    std::string seen(n, '\0');
    for (uint64_t off = 0; off < n; off += kBlockBytes) {
        Request r;
        r.op = Op::Read;
        r.addr = base + off;
        r.size = static_cast<uint32_t>(std::min<uint64_t>(kBlockBytes, n - off));
        const Response resp = core.issue(r);
        ++res.search_requests;
        for (unsigned i = 0; i < r.size; ++i) seen[off + i] = static_cast<char>(get_bytes(resp.data, i, 1));
    }
    for (const auto& p : patterns) {
        const auto hits = kernels::scan_matches(seen, p, policy);
        res.positions.emplace_back(hits.begin(), hits.end());
    }
    return res;
}

StringMatchResult string_match_monarch(Core& core, const StringCorpus& corpus,
                                       const std::vector<std::string>& patterns) {
    check_patterns(patterns);
    StringMatchResult res;
    MemoryPort& port = core.port();
    const uint64_t n = corpus.raw.size();

    // The raw text starts in main memory and is copied into the CAM words.
    const uint64_t raw_base = port.alloc(AllocKind::Main, std::max<uint64_t>(n, 1)).base;
    store_text(core, raw_base, corpus.raw, res.load_requests);
    const uint64_t sets = std::max<uint64_t>(1, (corpus.encoded_bytes() + kSetBytes - 1) / kSetBytes);
    const Allocation cam = port.alloc(AllocKind::FlatCam, sets * kSetBytes);
    for (uint64_t off = 0; off < n; off += kBlockBytes) {
        read_field(core, raw_base + off, 1);
        ++res.load_requests;
    }
    for (uint64_t w = 0; w < corpus.words.size(); w += 8) {
        Request r;
        r.op = Op::Write;
        r.addr = cam.base + w * 8;
        r.critical = false;
        for (unsigned s = 0; s < 8 && w + s < corpus.words.size(); ++s) r.data[s] = corpus.words[w + s];
        core.issue(r);
        ++res.load_requests;
    }

    for (const auto& p : patterns) {
        const uint64_t head = pack(p);
        const uint64_t mask = low_bits(8 * static_cast<unsigned>(std::min<size_t>(p.size(), 8)));
        Request k;
        k.op = Op::Key;
        k.addr = cam.key_ptr;
        k.data = replicate(head);
        k.critical = false;
        core.issue(k);
        Request m = k;
        m.op = Op::Mask;
        m.addr = cam.mask_ptr;
        m.data = replicate(mask);
        core.issue(m);
        res.search_requests += 2;

        std::vector<uint64_t> found;
        for (uint64_t s = 0; s < sets; ++s) {
            Request q;
            q.op = Op::Match;
            q.addr = cam.base + s * kSetBytes;
            const Response resp = core.issue(q);
            ++res.search_requests;
            ++res.searches;
            res.max_search_bytes = std::max(res.max_search_bytes, kSetBytes);
            for (unsigned e = 0; e < kWordsPerSet; ++e) {
                if (!((resp.match_vector[e / 64] >> (e % 64)) & 1)) continue;
                const uint64_t pos = s * kWordsPerSet + e;
                if (pos + p.size() > n) continue;
                bool ok = true;
                for (size_t off = 8; off < p.size() && ok; off += 8) {
                    const size_t len = std::min<size_t>(8, p.size() - off);
                    const uint64_t got = read_field(core, cam.base + (pos + off) * 8, 8);
                    ++res.search_requests;
                    ok = (got & low_bits(8 * static_cast<unsigned>(len))) ==
                         pack(std::string_view(p).substr(off, len));
                }
                if (ok) found.push_back(pos);
            }
        }
        res.positions.push_back(std::move(found));
    }
    return res;
}

}  // namespace monarch

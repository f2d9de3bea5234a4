#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "monarch/kernels.hpp"
#include "monarch/workloads.hpp"

namespace monarch {

/// Block-aligned corpus: word i holds bytes i .. i+7 of the raw text (zero
/// padded past the end), so every byte position starts on a 64-bit CAM word
/// and a pattern of up to 8 bytes is found with one masked compare per word.
struct StringCorpus {
    std::string raw;
    std::vector<uint64_t> words;

    static StringCorpus encode(std::string text);
    uint64_t encoded_bytes() const { return words.size() * 8; }
};

/// Whitespace-delimited words, one per 64-bit slot (longer words are split
/// into 8-byte pieces). This is the word-per-slot packing used when the
/// corpus is already tokenized.
std::vector<uint64_t> encode_words(const std::string& text);

/// Deterministic lowercase corpus of `bytes` bytes with space-separated words.
std::string synthetic_corpus(uint64_t bytes, uint64_t seed);

struct StringMatchResult {
    std::vector<std::vector<uint64_t>> positions;  // per pattern, ascending
    uint64_t load_requests = 0;    // requests spent placing the corpus
    uint64_t search_requests = 0;  // requests spent answering the patterns
    uint64_t searches = 0;         // MATCH requests (Monarch path)
    uint64_t max_search_bytes = 0; // data covered by one search
};

/// Streams the raw corpus through the memory and compares in the core.
StringMatchResult string_match_baseline(Core& core, const StringCorpus& corpus,
                                        const std::vector<std::string>& patterns,
                                        kernels::Policy policy = kernels::Policy::Serial);

/// Copies the encoded corpus into flat-CAM and answers each pattern with
/// one key/mask load and one search per 4KB set. Bytes past the eighth are
/// verified by reading the following words.
StringMatchResult string_match_monarch(Core& core, const StringCorpus& corpus,
                                       const std::vector<std::string>& patterns);

}  // namespace monarch

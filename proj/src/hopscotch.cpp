#include "monarch/hopscotch.hpp"

#include <algorithm>
#include <bit>

namespace monarch {

namespace {

constexpr unsigned kBucketBytes = 16;
constexpr unsigned kWordBytes = 8;
constexpr uint64_t kSetBytes = uint64_t{kBlocksPerSet} * kBlockBytes;
constexpr uint64_t kBucketsPerSet = kSetBytes / kWordBytes;

Block replicate(uint64_t w) { return Block{w, w, w, w, w, w, w, w}; }

}  // namespace

void HashTableConfig::validate() const {
    if (log2_size < 1 || log2_size > 30) throw ConfigError("hashing.log2_size must lie in 1..30");
    if (window != 32 && window != 64 && window != 128) {
        throw ConfigError("hashing.window must be 32, 64 or 128");
    }
    if (window > buckets()) throw ConfigError("hashing.window exceeds the table size");
    if (read_pct < 0.0 || read_pct > 100.0) throw ConfigError("hashing.read_pct must lie in 0..100");
    if (density < 0.0 || density >= 1.0) throw ConfigError("hashing.density must lie in [0, 1)");
    if (!(zipf_skew > 0.0) || zipf_skew >= 1.0) throw ConfigError("hashing.zipf_skew must lie in (0, 1)");
}

HopscotchTable::HopscotchTable(Core* core, HashPath path, unsigned log2_size, unsigned window)
    : core_(core), path_(path), window_(window) {
    if (window == 0 || window > 128 || window % 8 != 0) {
        throw ConfigError("window must be a multiple of 8 up to 128");
    }
    if ((uint64_t{1} << log2_size) < window) throw ConfigError("window exceeds the table size");
    allocate(log2_size);
    if (core_ && path_ == HashPath::Monarch) {
        Request m;
        m.op = Op::Mask;
        m.addr = cam_.mask_ptr;
        m.data = full_mask();
        m.critical = false;
        core_->issue(m);
    }
}

void HopscotchTable::set_hop(Hop& h, unsigned o, bool v) {
    const uint64_t bit = uint64_t{1} << (o % 64);
    h[o / 64] = v ? (h[o / 64] | bit) : (h[o / 64] & ~bit);
}

void HopscotchTable::allocate(unsigned log2_size) {
    const uint64_t cap = uint64_t{1} << log2_size;
    keys_.assign(cap, 0);
    values_.assign(cap, 0);
    hops_.assign(cap, Hop{});
    count_ = 0;
    key_loaded_.reset();
    if (!core_) return;
    MemoryPort& port = core_->port();
    const uint64_t meta = std::max<uint64_t>(cap * (window_ / 8), kBlockBytes);
    if (path_ == HashPath::Baseline) {
        bucket_base_ = port.alloc(AllocKind::Hbm, cap * kBucketBytes).base;
        meta_base_ = port.alloc(AllocKind::Hbm, meta).base;
    } else {
        cam_ = port.alloc(AllocKind::FlatCam, std::max<uint64_t>(cap * kWordBytes, kSetBytes));
        key_base_ = cam_.base;
        value_base_ = port.alloc(AllocKind::FlatRam, cap * kWordBytes).base;
        meta_base_ = port.alloc(AllocKind::Main, meta).base;
        occ_base_ = port.alloc(AllocKind::Main, std::max<uint64_t>(cap / 8, kBlockBytes)).base;
    }
}

std::optional<uint64_t> HopscotchTable::host_find(uint64_t key) const {
    const uint64_t h = home(key);
    for (unsigned o = 0; o < window_; ++o) {
        if (hop_bit(hops_[h], o) && keys_[wrap(h + o)] == key) return wrap(h + o);
    }
    return std::nullopt;
}

// ------------------------------------------------------------ memory traffic

uint64_t HopscotchTable::mem_read_key(uint64_t b) {
    if (path_ == HashPath::Baseline) return read_field(*core_, bucket_base_ + b * kBucketBytes, kWordBytes);
    return read_field(*core_, key_base_ + b * kWordBytes, kWordBytes);
}

uint64_t HopscotchTable::mem_read_value(uint64_t b) {
    if (path_ == HashPath::Baseline) {
        return read_field(*core_, bucket_base_ + b * kBucketBytes + kWordBytes, kWordBytes);
    }
    return read_field(*core_, value_base_ + b * kWordBytes, kWordBytes);
}

void HopscotchTable::mem_write_bucket(uint64_t b, uint64_t key, uint64_t value) {
    if (path_ == HashPath::Baseline) {
        Request r;
        r.op = Op::Write;
        r.addr = bucket_base_ + b * kBucketBytes;
        r.size = kBucketBytes;
        r.critical = false;
        const unsigned off = static_cast<unsigned>(r.addr % kBlockBytes);
        put_bytes(r.data, off, key, kWordBytes);
        put_bytes(r.data, off + kWordBytes, value, kWordBytes);
        core_->issue(r);
        return;
    }
    write_field(*core_, key_base_ + b * kWordBytes, key, kWordBytes);
    if (key != 0) write_field(*core_, value_base_ + b * kWordBytes, value, kWordBytes);
}

HopscotchTable::Hop HopscotchTable::mem_read_hop(uint64_t b) {
    const unsigned mb = window_ / 8;
    Request r;
    r.op = Op::Read;
    r.addr = meta_base_ + b * mb;
    r.size = mb;
    const Response resp = core_->issue(r);
    const unsigned off = static_cast<unsigned>(r.addr % kBlockBytes);
    Hop h{};
    h[0] = get_bytes(resp.data, off, std::min(mb, kWordBytes));
    if (mb > kWordBytes) h[1] = get_bytes(resp.data, off + kWordBytes, mb - kWordBytes);
    return h;
}

void HopscotchTable::mem_write_hop(uint64_t b) {
    const unsigned mb = window_ / 8;
    Request r;
    r.op = Op::Write;
    r.addr = meta_base_ + b * mb;
    r.size = mb;
    r.critical = false;
    const unsigned off = static_cast<unsigned>(r.addr % kBlockBytes);
    put_bytes(r.data, off, hops_[b][0], std::min(mb, kWordBytes));
    if (mb > kWordBytes) put_bytes(r.data, off + kWordBytes, hops_[b][1], mb - kWordBytes);
    core_->issue(r);
}

void HopscotchTable::mem_probe(uint64_t b, uint64_t& occ_block) {
    if (path_ == HashPath::Baseline) {
        mem_read_key(b);
        return;
    }
    const uint64_t blk = b / (kBlockBytes * 8);
    if (blk != occ_block) {
        read_field(*core_, occ_base_ + blk * kBlockBytes, 1);
        occ_block = blk;
    }
}

void HopscotchTable::mem_write_occupancy(uint64_t b) {
    if (path_ != HashPath::Monarch) return;
    const uint64_t first = b & ~uint64_t{7};
    uint64_t byte = 0;
    for (unsigned i = 0; i < 8 && first + i < capacity(); ++i) {
        if (keys_[first + i] != 0) byte |= uint64_t{1} << i;
    }
    write_field(*core_, occ_base_ + first / 8, byte, 1);
}

void HopscotchTable::mem_write_region(uint64_t base, uint64_t bytes,
                                      const std::vector<uint8_t>& image) {
    for (uint64_t off = 0; off < bytes; off += kBlockBytes) {
        Request r;
        r.op = Op::Write;
        r.addr = base + off;
        r.size = static_cast<uint32_t>(std::min<uint64_t>(kBlockBytes, bytes - off));
        r.critical = false;
        bool any = false;
        for (unsigned i = 0; i < r.size; ++i) {
            const uint8_t v = image[off + i];
            if (v) {
                any = true;
                put_bytes(r.data, i, v, 1);
            }
        }
        if (any) core_->issue(r);
    }
}

// ------------------------------------------------------------------- lookup

std::optional<uint64_t> HopscotchTable::baseline_lookup(uint64_t key) {
    const uint64_t h = home(key);
    const Hop hop = mem_read_hop(h);
    for (unsigned o = 0; o < window_; ++o) {
        if (!hop_bit(hop, o)) continue;
        const uint64_t b = wrap(h + o);
        Request r;
        r.op = Op::Read;
        r.addr = bucket_base_ + b * kBucketBytes;
        r.size = kBucketBytes;
        const Response resp = core_->issue(r);
        const unsigned off = static_cast<unsigned>(r.addr % kBlockBytes);
        if (get_bytes(resp.data, off, kWordBytes) == key) {
            return get_bytes(resp.data, off + kWordBytes, kWordBytes);
        }
    }
    return std::nullopt;
}

std::optional<uint64_t> HopscotchTable::monarch_lookup(uint64_t key) {
    if (key_loaded_ != key) {
        Request k;
        k.op = Op::Key;
        k.addr = cam_.key_ptr;
        k.data = replicate(key);
        k.critical = false;
        core_->issue(k);
        key_loaded_ = key;
    }
    const uint64_t h = home(key);
    const uint64_t sets = std::max<uint64_t>(1, capacity() / kBucketsPerSet);
    const uint64_t first = h / kBucketsPerSet;
    const uint64_t last = wrap(h + window_ - 1) / kBucketsPerSet;
    for (uint64_t s = first;; s = (s + 1) % sets) {
        Request m;
        m.op = Op::Match;
        m.addr = key_base_ + s * kSetBytes;
        const Response resp = core_->issue(m);
        if (resp.match) {
            const uint64_t b = s * kBucketsPerSet + *resp.match;
            if (b < capacity() && dist(h, b) < window_) return mem_read_value(b);
        }
        if (s == last) break;
    }
    return std::nullopt;
}

std::optional<uint64_t> HopscotchTable::lookup(uint64_t key) {
    if (key == 0) throw ConfigError("key 0 is reserved for empty buckets");
    if (!core_) {
        const auto b = host_find(key);
        return b ? std::optional<uint64_t>(values_[*b]) : std::nullopt;
    }
    return path_ == HashPath::Baseline ? baseline_lookup(key) : monarch_lookup(key);
}

// ------------------------------------------------------------------- insert

bool HopscotchTable::place(uint64_t key, uint64_t value, bool emit) {
    emit = emit && core_;
    const uint64_t h = home(key);
    std::optional<uint64_t> free;
    uint64_t occ_block = ~uint64_t{0};
    for (uint64_t d = 0; d < capacity(); ++d) {
        const uint64_t b = wrap(h + d);
        if (emit) mem_probe(b, occ_block);
        if (keys_[b] == 0) {
            free = b;
            break;
        }
    }
    if (!free) return false;

    while (dist(h, *free) >= window_) {
        bool moved = false;
        for (unsigned back = window_ - 1; back >= 1 && !moved; --back) {
            const uint64_t cand = wrap(*free - back);
            if (emit) mem_read_hop(cand);
            for (unsigned o = 0; o < back; ++o) {
                if (!hop_bit(hops_[cand], o)) continue;
                const uint64_t p = wrap(cand + o);
                const uint64_t k = keys_[p];
                const uint64_t v = values_[p];
                if (emit) {
                    mem_read_key(p);
                    mem_read_value(p);
                }
                keys_[*free] = k;
                values_[*free] = v;
                keys_[p] = 0;
                values_[p] = 0;
                set_hop(hops_[cand], o, false);
                set_hop(hops_[cand], back, true);
                if (emit) {
                    mem_write_bucket(*free, k, v);
                    mem_write_bucket(p, 0, 0);
                    mem_write_hop(cand);
                    mem_write_occupancy(*free);
                    mem_write_occupancy(p);
                }
                free = p;
                moved = true;
                break;
            }
        }
        if (!moved) return false;
    }

    const uint64_t b = *free;
    keys_[b] = key;
    values_[b] = value;
    set_hop(hops_[h], static_cast<unsigned>(dist(h, b)), true);
    ++count_;
    if (emit) {
        mem_write_bucket(b, key, value);
        mem_write_hop(h);
        mem_write_occupancy(b);
    }
    return true;
}

void HopscotchTable::rehash() {
    std::vector<std::pair<uint64_t, uint64_t>> live;
    live.reserve(count_);
    const uint64_t old_cap = capacity();
    const uint64_t old_bucket = bucket_base_, old_key = key_base_, old_value = value_base_;
    for (uint64_t b = 0; b < old_cap; ++b) {
        if (keys_[b] != 0) live.emplace_back(keys_[b], values_[b]);
    }
    if (core_) {
        // The old table is streamed out block by block.
        auto stream = [&](uint64_t base, uint64_t bytes) {
            for (uint64_t off = 0; off < bytes; off += kBlockBytes) read_field(*core_, base + off, 1);
        };
        if (path_ == HashPath::Baseline) {
            stream(old_bucket, old_cap * kBucketBytes);
        } else {
            stream(old_key, old_cap * kWordBytes);
            stream(old_value, old_cap * kWordBytes);
        }
    }
    unsigned log2 = static_cast<unsigned>(std::countr_zero(old_cap)) + 1;
    for (;;) {
        allocate(log2);
        bool ok = true;
        for (const auto& [k, v] : live) {
            if (!place(k, v, false)) {
                ok = false;
                break;
            }
        }
        if (ok) break;
        ++log2;
    }
    ++rehashes_;
    if (!core_) return;

    // The rebuilt table is copied in block by block.
    const uint64_t cap = capacity();
    const unsigned mb = window_ / 8;
    auto word_image = [&](const std::vector<uint64_t>& words, unsigned stride, unsigned at) {
        std::vector<uint8_t> img(cap * stride, 0);
        for (uint64_t b = 0; b < cap; ++b) {
            for (unsigned i = 0; i < kWordBytes; ++i) img[b * stride + at + i] = (words[b] >> (8 * i)) & 0xff;
        }
        return img;
    };
    std::vector<uint8_t> meta(cap * mb, 0);
    for (uint64_t b = 0; b < cap; ++b) {
        for (unsigned i = 0; i < mb; ++i) meta[b * mb + i] = (hops_[b][i / 8] >> (8 * (i % 8))) & 0xff;
    }
    if (path_ == HashPath::Baseline) {
        std::vector<uint8_t> img = word_image(keys_, kBucketBytes, 0);
        const std::vector<uint8_t> vals = word_image(values_, kBucketBytes, kWordBytes);
        for (size_t i = 0; i < img.size(); ++i) img[i] |= vals[i];
        mem_write_region(bucket_base_, cap * kBucketBytes, img);
    } else {
        mem_write_region(key_base_, cap * kWordBytes, word_image(keys_, kWordBytes, 0));
        mem_write_region(value_base_, cap * kWordBytes, word_image(values_, kWordBytes, 0));
        std::vector<uint8_t> occ((cap + 7) / 8, 0);
        for (uint64_t b = 0; b < cap; ++b) {
            if (keys_[b]) occ[b / 8] |= static_cast<uint8_t>(1u << (b % 8));
        }
        mem_write_region(occ_base_, occ.size(), occ);
    }
    mem_write_region(meta_base_, cap * mb, meta);
}

unsigned HopscotchTable::insert(uint64_t key, uint64_t value) {
    if (key == 0) throw ConfigError("key 0 is reserved for empty buckets");
    if (const auto b = host_find(key)) {
        if (core_) lookup(key);
        values_[*b] = value;
        if (core_) mem_write_bucket(*b, key, value);
        return 0;
    }
    if (core_) lookup(key);
    unsigned n = 0;
    while (!place(key, value, true)) {
        rehash();
        ++n;
    }
    return n;
}

bool HopscotchTable::try_place(uint64_t key, uint64_t value) {
    if (key == 0) throw ConfigError("key 0 is reserved for empty buckets");
    if (host_find(key)) return true;
    return place(key, value, false);
}

bool HopscotchTable::check_invariant() const {
    uint64_t n = 0;
    for (uint64_t b = 0; b < capacity(); ++b) {
        const uint64_t k = keys_[b];
        if (k == 0) continue;
        ++n;
        const uint64_t h = home(k);
        const uint64_t d = dist(h, b);
        if (d >= window_ || !hop_bit(hops_[h], static_cast<unsigned>(d))) return false;
    }
    for (uint64_t h = 0; h < capacity(); ++h) {
        for (unsigned o = 0; o < window_; ++o) {
            if (!hop_bit(hops_[h], o)) continue;
            const uint64_t k = keys_[wrap(h + o)];
            if (k == 0 || home(k) != h) return false;
        }
    }
    return n == count_;
}

double max_density_before_rehash(unsigned log2_size, unsigned window, uint64_t seed) {
    HopscotchTable t(nullptr, HashPath::Baseline, log2_size, window);
    const uint64_t base = seed << 32;
    for (uint64_t i = 0; i < t.capacity(); ++i) {
        if (!t.try_place(base + i + 1, i)) break;
    }
    return t.load();
}

HashingResult run_hashing(Core& core, HashPath path, const HashTableConfig& cfg, uint64_t seed) {
    cfg.validate();
    HopscotchTable table(&core, path, cfg.log2_size, cfg.window);
    HashingResult res;
    std::vector<uint64_t> keys;
    uint64_t next = 0;
    auto fresh = [&]() { return (seed << 32) + ++next; };
    auto value_of = [](uint64_t k) { return fmix64(k ^ 0x5bd1e995ull); };

    const auto target = static_cast<uint64_t>(cfg.density * static_cast<double>(cfg.buckets()));
    while (table.size() < target) {
        const uint64_t k = fresh();
        res.rehashes += table.insert(k, value_of(k));
        keys.push_back(k);
    }

    ZipfStream stream(std::max<uint64_t>(keys.size(), 1), cfg.zipf_skew, cfg.read_pct / 100.0,
                      seed);
    for (uint64_t i = 0; i < cfg.ops; ++i) {
        const KvRequest r = stream.next();
        if (r.op == KvOp::Read && !keys.empty()) {
            const uint64_t k = keys[fmix64(r.rank) % keys.size()];
            const auto v = table.lookup(k);
            ++res.lookups;
            if (v) ++res.lookup_hits;
            res.answer_digest = fmix64(res.answer_digest ^ (v ? *v : 0x9e3779b97f4a7c15ull)) + i;
        } else {
            const uint64_t k = fresh();
            res.rehashes += table.insert(k, value_of(k));
            keys.push_back(k);
            ++res.inserts;
        }
    }
    res.invariant_ok = table.check_invariant();
    return res;
}

}  // namespace monarch

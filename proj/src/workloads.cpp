#include "monarch/workloads.hpp"

#include <cmath>

namespace monarch {

namespace {

double zeta(uint64_t n, double theta) {
    double s = 0.0;
    for (uint64_t i = 1; i <= n; ++i) s += 1.0 / std::pow(static_cast<double>(i), theta);
    return s;
}

}  // namespace

ZipfGenerator::ZipfGenerator(uint64_t n, double skew) : n_(n), theta_(skew) {
    if (n == 0) throw ConfigError("zipf universe must be non-empty");
    if (!(skew > 0.0) || skew >= 1.0) throw ConfigError("zipf skew must lie in (0, 1)");
    zetan_ = zeta(n, theta_);
    alpha_ = 1.0 / (1.0 - theta_);
    const double zeta2 = zeta(std::min<uint64_t>(n, 2), theta_);
    eta_ = n < 2 ? 0.0
                 : (1.0 - std::pow(2.0 / static_cast<double>(n), 1.0 - theta_)) /
                       (1.0 - zeta2 / zetan_);
}

uint64_t ZipfGenerator::sample(std::mt19937_64& rng) const {
    const double u = unit_double(rng);
    const double uz = u * zetan_;
    if (uz < 1.0 || n_ == 1) return 0;
    if (uz < 1.0 + std::pow(0.5, theta_)) return 1;
    const auto r = static_cast<uint64_t>(static_cast<double>(n_) *
                                         std::pow(eta_ * u - eta_ + 1.0, alpha_));
    return std::min(r, n_ - 1);
}

double ZipfGenerator::probability(uint64_t r) const {
    return 1.0 / std::pow(static_cast<double>(r + 1), theta_) / zetan_;
}

ZipfStream::ZipfStream(uint64_t universe, double skew, double read_fraction, uint64_t seed)
    : zipf_(universe, skew), read_fraction_(read_fraction), rng_(seed) {
    if (read_fraction < 0.0 || read_fraction > 1.0) {
        throw ConfigError("read fraction must lie in [0, 1]");
    }
}

KvRequest ZipfStream::next() {
    const bool read = unit_double(rng_) < read_fraction_;
    if (!read) return KvRequest{KvOp::Write, 0};
    return KvRequest{KvOp::Read, zipf_.sample(rng_)};
}

uint64_t get_bytes(const Block& b, unsigned offset, unsigned size) {
    uint64_t v = 0;
    for (unsigned i = 0; i < size; ++i) {
        const unsigned k = offset + i;
        v |= ((b[k / 8] >> (8 * (k % 8))) & 0xff) << (8 * i);
    }
    return v;
}

void put_bytes(Block& b, unsigned offset, uint64_t value, unsigned size) {
    for (unsigned i = 0; i < size; ++i) {
        const unsigned k = offset + i;
        const uint64_t sh = 8 * (k % 8);
        b[k / 8] = (b[k / 8] & ~(uint64_t{0xff} << sh)) | (((value >> (8 * i)) & 0xff) << sh);
    }
}

uint64_t read_field(Core& core, uint64_t addr, unsigned size) {
    Request r;
    r.op = Op::Read;
    r.addr = addr;
    r.size = size;
    const Response resp = core.issue(r);
    return get_bytes(resp.data, static_cast<unsigned>(addr % kBlockBytes), size);
}

void write_field(Core& core, uint64_t addr, uint64_t value, unsigned size) {
    Request r;
    r.op = Op::Write;
    r.addr = addr;
    r.size = size;
    r.critical = false;
    put_bytes(r.data, static_cast<unsigned>(addr % kBlockBytes), value, size);
    core.issue(r);
}

}  // namespace monarch

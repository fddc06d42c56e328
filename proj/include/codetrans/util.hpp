// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace codetrans {

// Raised for malformed user input (bad CLI args, missing artifacts,
// unparseable files). The CLI maps it to exit code 1.
class UserError : public std::runtime_error {
public:
    explicit UserError(const std::string& msg) : std::runtime_error(msg) {}
};

// Deterministic 64-bit PRNG (splitmix64). Used everywhere a seeded,
// implementation-independent stream is required: dataset shuffles,
// parameter init, fixture generation.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). n must be > 0.
    std::uint64_t next_below(std::uint64_t n) { return next() % n; }

    // Uniform double in [0, 1).
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; second value cached.
    double next_normal();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::string base64_encode(const std::string& data);
std::string base64_decode(const std::string& data);

// FNV-1a 64-bit, hex-encoded. Used for artifact digests in run manifests.
std::uint64_t fnv1a64(const std::string& data);
std::string fnv1a64_hex(const std::string& data);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);
// Writes to a temp file in the same directory, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Runs fn(i) for i in [0, n) on up to nthreads threads. Work is split into
// contiguous index ranges; results must be written to pre-sized slots so the
// outcome is independent of scheduling.
void parallel_for(std::size_t n, unsigned nthreads, const std::function<void(std::size_t)>& fn);

}  // namespace codetrans

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace webverbs {

using Digest256 = std::array<std::uint8_t, 32>;

// Incremental SHA-256 (FIPS 180-4). Self-contained so audit traces hash
// identically on every platform without linking a crypto library.
class Sha256 {
public:
    Sha256();
    void update(const void* data, std::size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }
    Digest256 finish();

private:
    void process_block(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_;
    std::uint64_t total_len_ = 0;
    std::array<std::uint8_t, 64> buffer_;
    std::size_t buffer_len_ = 0;
};

Digest256 sha256(std::string_view data);
std::string sha256_hex(std::string_view data);
std::string to_hex(const Digest256& d);
bool from_hex(std::string_view hex, Digest256& out);

}  // namespace webverbs

#include "comlang/guid.hpp"

#include <cctype>
#include <cstdint>
#include <random>

namespace comlang {

namespace {

constexpr int kGroupLens[5] = {8, 4, 4, 4, 12};

bool is_hex(char c) {
    return std::isxdigit(static_cast<unsigned char>(c)) != 0;
}

std::string format_from_bits(std::uint64_t hi, std::uint64_t lo) {
    // Stamp the version (4) and variant (10xx) bits so generated GUIDs look
    // like ordinary v4 GUIDs.
    hi = (hi & ~0xF000ull) | 0x4000ull;
    lo = (lo & ~(0xC0ull << 56)) | (0x80ull << 56);
    static const char* digits = "0123456789ABCDEF";
    auto hex = [&](std::uint64_t v, int nibbles) {
        std::string out;
        for (int i = nibbles - 1; i >= 0; --i) out.push_back(digits[(v >> (i * 4)) & 0xF]);
        return out;
    };
    return hex(hi >> 32, 8) + "-" + hex((hi >> 16) & 0xFFFF, 4) + "-" + hex(hi & 0xFFFF, 4) +
           "-" + hex(lo >> 48, 4) + "-" + hex(lo & 0xFFFFFFFFFFFFull, 12);
}

}  // namespace

bool is_guid_text(const std::string& text) {
    std::size_t pos = 0;
    for (int g = 0; g < 5; ++g) {
        if (g > 0) {
            if (pos >= text.size() || text[pos] != '-') return false;
            ++pos;
        }
        for (int i = 0; i < kGroupLens[g]; ++i, ++pos) {
            if (pos >= text.size() || !is_hex(text[pos])) return false;
        }
    }
    return pos == text.size();
}

std::optional<Guid> Guid::parse(const std::string& text) {
    if (!is_guid_text(text)) return std::nullopt;
    std::string upper = text;
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return Guid(std::move(upper));
}

Guid Guid::from_seed(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return Guid(format_from_bits(rng(), rng()));
}

Guid Guid::random() {
    std::random_device rd;
    std::uint64_t hi = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::uint64_t lo = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    return Guid(format_from_bits(hi, lo));
}

}  // namespace comlang

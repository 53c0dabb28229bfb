#pragma once

// Binary TT file:
//   magic   "TTSENSE1"                       8 bytes
//   N                                        u64
//   mode_sizes[N]                            u64 each
//   ranks[N+1]                               u64 each
//   trailing_rank_open                       u8 (0 or 1)
//   core data, core by core in storage order f64
// All integers and floats are little-endian.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "ttsense/errors.hpp"
#include "ttsense/tt_tensor.hpp"

namespace ttsense {

inline constexpr std::array<char, 8> kTTMagic{'T', 'T', 'S', 'E', 'N', 'S', 'E', '1'};

namespace detail {

template <typename T>
void write_le(std::ostream& os, T value) {
    std::array<unsigned char, sizeof(T)> bytes{};
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
    std::array<unsigned char, sizeof(T)> bytes{};
    if (!is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) {
        throw Error("TT file: unexpected end of data");
    }
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

}  // namespace detail

inline void write_tt(std::ostream& os, const TTTensor& t) {
    os.write(kTTMagic.data(), kTTMagic.size());
    detail::write_le<std::uint64_t>(os, t.order());
    for (Index s : t.mode_sizes()) detail::write_le<std::uint64_t>(os, s);
    for (Index r : t.ranks()) detail::write_le<std::uint64_t>(os, r);
    detail::write_le<std::uint8_t>(os, t.trailing_rank_open() ? 1 : 0);
    for (const Core& c : t.cores())
        for (double v : c.data()) detail::write_le<double>(os, v);
    if (!os) throw Error("TT file: write failed");
}

inline TTTensor read_tt(std::istream& is) {
    std::array<char, 8> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kTTMagic) {
        throw Error("TT file: bad magic (expected TTSENSE1)");
    }
    const auto N = detail::read_le<std::uint64_t>(is);
    if (N == 0 || N > (1u << 20)) throw Error("TT file: implausible order");
    std::vector<Index> sizes(N);
    for (auto& s : sizes) s = detail::read_le<std::uint64_t>(is);
    std::vector<Index> ranks(N + 1);
    for (auto& r : ranks) r = detail::read_le<std::uint64_t>(is);
    const auto open = detail::read_le<std::uint8_t>(is);
    if (open > 1) throw Error("TT file: bad trailing_rank_open flag");
    std::vector<Core> cores;
    cores.reserve(N);
    for (Index n = 0; n < N; ++n) {
        const Index count = ranks[n] * sizes[n] * ranks[n + 1];
        if (count > (Index{1} << 32)) throw Error("TT file: core too large");
        std::vector<double> data(count);
        for (auto& v : data) v = detail::read_le<double>(is);
        cores.emplace_back(ranks[n], sizes[n], ranks[n + 1], std::move(data));
    }
    return TTTensor(std::move(cores), open == 1);
}

inline void save_tt(const std::string& path, const TTTensor& t) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    write_tt(os, t);
}

inline TTTensor load_tt(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open '" + path + "' for reading");
    return read_tt(is);
}

}  // namespace ttsense

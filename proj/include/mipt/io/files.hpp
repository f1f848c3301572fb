// Copyright 2026 The mipt-decoder Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "mipt/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

namespace mipt::io {

/// Writes `bytes` to a temporary sibling and renames it over `path`, so a
/// reader never sees a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ResourceError("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw ResourceError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw ResourceError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ResourceError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void put_u32_le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFU));
}

inline std::uint32_t get_u32_le(const std::string& in, std::size_t pos) {
    if (pos + 4 > in.size()) throw FormatError("truncated length field");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    return v;
}

inline void put_f64_le(std::string& out, double d) {
    const auto u = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xFFU));
}

inline double get_f64_le(const std::string& in, std::size_t pos) {
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= std::uint64_t(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    return std::bit_cast<double>(u);
}

/// Splits "MAGIC | u32 header length | header | payload" and checks the magic.
struct Framed {
    std::string header;
    std::size_t payload_offset = 0;
};

inline Framed unframe(const std::string& bytes, const char (&magic)[9]) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), magic, 8) != 0) {
        throw FormatError(std::string("bad magic, expected ") + magic);
    }
    const std::uint32_t n = get_u32_le(bytes, 8);
    if (12 + std::size_t(n) > bytes.size()) throw FormatError("header length exceeds file size");
    return {bytes.substr(12, n), 12 + std::size_t(n)};
}

inline std::string frame(const char (&magic)[9], const std::string& header) {
    std::string out(magic, 8);
    put_u32_le(out, static_cast<std::uint32_t>(header.size()));
    out += header;
    return out;
}

}  // namespace mipt::io

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

#include "mipt/io/files.hpp"
#include "mipt/sim/dataset.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace mipt::io {

inline constexpr char kDatasetMagic[9] = "MIPTDS01";
inline constexpr int kDatasetVersion = 1;

inline std::size_t record_bytes(int T, int L) { return (outcome_count(T, L) + 7) / 8; }

/// Bits in X, ZZ, ZXZ order, row-major, LSB first; bit set means outcome -1.
inline void pack_record(const TrajectoryRecord& r, std::string& out) {
    const std::size_t start = out.size();
    out.append(record_bytes(r.T(), r.L()), '\0');
    std::size_t bit = 0;
    for (const SignGrid* g : {&r.x, &r.zz, &r.zxz})
        for (std::int8_t v : g->values) {
            if (v < 0) out[start + bit / 8] = static_cast<char>(out[start + bit / 8] | (1U << (bit % 8)));
            ++bit;
        }
}

inline TrajectoryRecord unpack_record(const std::string& in, std::size_t pos, int T, int L) {
    TrajectoryRecord r(T, L);
    std::size_t bit = 0;
    for (SignGrid* g : {&r.x, &r.zz, &r.zxz})
        for (std::int8_t& v : g->values) {
            v = (static_cast<unsigned char>(in[pos + bit / 8]) >> (bit % 8)) & 1U ? -1 : 1;
            ++bit;
        }
    return r;
}

inline std::string encode_dataset(const Dataset& ds) {
    const CircuitConfig& c = ds.config;
    const nlohmann::json header = {{"version", kDatasetVersion}, {"L", c.L},
                                   {"T", c.T},                   {"gamma_x", c.gamma_x},
                                   {"gamma_zz", c.gamma_zz},     {"gamma_zxz", c.gamma_zxz},
                                   {"M", ds.M()},                {"master_seed", c.master_seed},
                                   {"point_id", c.point_id}};
    std::string out = frame(kDatasetMagic, header.dump());
    out.reserve(out.size() + ds.M() * record_bytes(c.T, c.L));
    for (const auto& r : ds.trajectories) {
        if (r.T() != c.T || r.L() != c.L) throw DomainError("dataset record geometry differs from its header");
        pack_record(r, out);
    }
    return out;
}

/// The header is the only source of geometry. Per-record seeds are
/// recomputed from (master_seed, point_id, index).
inline Dataset decode_dataset(const std::string& bytes) {
    const Framed f = unframe(bytes, kDatasetMagic);
    Dataset ds;
    std::size_t M = 0;
    try {
        const auto h = nlohmann::json::parse(f.header);
        if (h.at("version").get<int>() != kDatasetVersion) throw FormatError("unsupported dataset version");
        ds.config.L = h.at("L").get<int>();
        ds.config.T = h.at("T").get<int>();
        ds.config.gamma_x = h.at("gamma_x").get<double>();
        ds.config.gamma_zz = h.at("gamma_zz").get<double>();
        ds.config.gamma_zxz = h.at("gamma_zxz").get<double>();
        ds.config.master_seed = h.at("master_seed").get<std::uint64_t>();
        ds.config.point_id = h.at("point_id").get<std::string>();
        M = h.at("M").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed dataset header: ") + e.what());
    }
    if (ds.config.L < 2 || ds.config.L > kMaxQubits || ds.config.T < 1) throw FormatError("dataset header geometry invalid");
    const std::size_t rb = record_bytes(ds.config.T, ds.config.L);
    const std::size_t payload = bytes.size() - f.payload_offset;
    if (payload % rb != 0 || payload / rb != M) {
        throw FormatError("dataset payload is " + std::to_string(payload) + " bytes, header declares " +
                          std::to_string(M) + " records of " + std::to_string(rb));
    }
    ds.trajectories.reserve(M);
    for (std::size_t i = 0; i < M; ++i) {
        ds.trajectories.push_back(unpack_record(bytes, f.payload_offset + i * rb, ds.config.T, ds.config.L));
        ds.trajectories.back().seed = trajectory_seed(ds.config, i);
    }
    return ds;
}

inline void save_dataset(const Dataset& ds, const std::filesystem::path& path) { write_file_atomic(path, encode_dataset(ds)); }

inline Dataset load_dataset(const std::filesystem::path& path) { return decode_dataset(read_file(path)); }

}  // namespace mipt::io

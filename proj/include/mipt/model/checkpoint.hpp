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
#include "mipt/model/cnn_attn.hpp"
#include "mipt/model/mlp.hpp"

#include <filesystem>
#include <memory>

namespace mipt {

inline constexpr char kCheckpointMagic[9] = "MIPTCK01";
inline constexpr int kCheckpointVersion = 1;

/// MIPTCK01 | u32 LE header length | JSON manifest | LE float64 payload.
/// `offset` in the manifest is the byte offset of a tensor within the payload.
inline std::string encode_checkpoint(const PhaseModel& model) {
    nlohmann::json header = model.hyper();
    header["version"] = kCheckpointVersion;
    header["arch"] = model.arch();
    nlohmann::json tensors = nlohmann::json::array();
    std::string payload;
    for (const auto& [name, t] : model.named_tensors()) {
        tensors.push_back({{"name", name}, {"shape", t->shape()}, {"offset", payload.size()}});
        for (double v : t->data()) io::put_f64_le(payload, v);
    }
    header["tensors"] = tensors;
    return io::frame(kCheckpointMagic, header.dump()) + payload;
}

inline std::unique_ptr<PhaseModel> decode_checkpoint(const std::string& bytes) {
    const io::Framed f = io::unframe(bytes, kCheckpointMagic);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(f.header);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint header is not valid JSON: ") + e.what());
    }
    std::unique_ptr<PhaseModel> model;
    try {
        if (header.at("version").get<int>() != kCheckpointVersion) throw FormatError("unsupported checkpoint version");
        const std::string arch = header.at("arch").get<std::string>();
        if (arch == "cnn_attn") {
            model = std::make_unique<CnnAttnModel>(CnnAttnModel::hyper_from_json(header), 0);
        } else if (arch == "mlp") {
            model = std::make_unique<MlpModel>(header.at("h").get<int>(), header.at("T").get<int>(),
                                               header.at("L").get<int>(), 0);
        } else {
            throw FormatError("unknown checkpoint arch '" + arch + "'");
        }
        const auto& list = header.at("tensors");
        auto slots = model->named_tensors();
        if (list.size() != slots.size()) {
            throw FormatError("checkpoint lists " + std::to_string(list.size()) + " tensors, model expects " +
                              std::to_string(slots.size()));
        }
        const std::size_t payload = bytes.size() - f.payload_offset;
        std::size_t expected_offset = 0;
        for (std::size_t k = 0; k < slots.size(); ++k) {
            const auto& entry = list[k];
            auto& [name, t] = slots[k];
            if (entry.at("name").get<std::string>() != name) throw FormatError("tensor order mismatch at " + name);
            if (entry.at("shape").get<Shape>() != t->shape()) throw FormatError("shape mismatch for " + name);
            const std::size_t off = entry.at("offset").get<std::size_t>();
            if (off != expected_offset) throw FormatError("offsets must be ascending and contiguous at " + name);
            if (off + 8 * t->size() > payload) throw FormatError("payload truncated at " + name);
            for (std::size_t i = 0; i < t->size(); ++i) (*t)[i] = io::get_f64_le(bytes, f.payload_offset + off + 8 * i);
            expected_offset = off + 8 * t->size();
        }
        if (expected_offset != payload) throw FormatError("payload has trailing bytes");
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed checkpoint header: ") + e.what());
    } catch (const DomainError& e) {
        throw FormatError(std::string("checkpoint hyperparameters invalid: ") + e.what());
    }
    return model;
}

inline void save_checkpoint(const PhaseModel& model, const std::filesystem::path& path) {
    io::write_file_atomic(path, encode_checkpoint(model));
}

inline std::unique_ptr<PhaseModel> load_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint(io::read_file(path));
}

}  // namespace mipt

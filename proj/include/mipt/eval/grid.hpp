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
#include "mipt/eval/voting.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mipt {

struct GridPoint {
    double gamma_x = 0.0;
    double gamma_zz = 0.0;
    double gamma_zxz = 0.0;
    std::string role = "grid";  // vertex | inner | outer | grid
    std::string id;

    CircuitConfig config(int L, int T, std::uint64_t master_seed) const {
        CircuitConfig c;
        c.L = L;
        c.T = T;
        c.gamma_x = gamma_x;
        c.gamma_zz = gamma_zz;
        c.gamma_zxz = gamma_zxz;
        c.master_seed = master_seed;
        c.point_id = id;
        return c;
    }
};

/// Stable identifier from coordinates rounded to 1e-3, e.g. "x0.025_zz0.950_zxz0.025".
inline std::string point_id_for(double gx, double gzz, double gzxz) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "x%.3f_zz%.3f_zxz%.3f", gx, gzz, gzxz);
    return buf;
}

inline GridPoint make_point(double gx, double gzz, double gzxz, std::string role) {
    if (gx < -1e-12 || gzz < -1e-12 || gzxz < -1e-12 || std::abs(gx + gzz + gzxz - 1.0) > 1e-9) {
        throw DomainError("point " + point_id_for(gx, gzz, gzxz) + " is not on the simplex");
    }
    return {gx, gzz, gzxz, std::move(role), point_id_for(gx, gzz, gzxz)};
}

/// gamma_zxz = 0.025, 0.125, ..., 0.925; for each, gamma_x = 0.025 .. 0.95 - gamma_zxz
/// in steps of 0.1; gamma_zz takes the rest.
inline std::vector<GridPoint> sample_grid() {
    std::vector<GridPoint> pts;
    for (int j = 0; j < 10; ++j) {
        const double gzxz = 0.025 + 0.1 * j;
        for (int i = 0; i + j < 10; ++i) {
            const double gx = 0.025 + 0.1 * i;
            pts.push_back(make_point(gx, 1.0 - gx - gzxz, gzxz, "grid"));
        }
    }
    return pts;
}

inline std::vector<GridPoint> vertex_points() {
    return {make_point(0.85, 0.075, 0.075, "vertex"), make_point(0.075, 0.85, 0.075, "vertex"),
            make_point(0.075, 0.075, 0.85, "vertex")};
}

/// (0.7, 0.15, 0.15) and its two coordinate rotations.
inline std::vector<GridPoint> default_inner_points() {
    return {make_point(0.7, 0.15, 0.15, "inner"), make_point(0.15, 0.7, 0.15, "inner"),
            make_point(0.15, 0.15, 0.7, "inner")};
}

struct LabeledPoint {
    GridPoint point;
    std::size_t label = 0;  // 0-based
};

/// CSV: point_id,gamma_x,gamma_zz,gamma_zxz,role,label with label in 1..3.
inline std::string labels_csv(const std::vector<LabeledPoint>& pts) {
    std::ostringstream os;
    os << "point_id,gamma_x,gamma_zz,gamma_zxz,role,label\n";
    char buf[160];
    for (const auto& lp : pts) {
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%s,%zu\n", lp.point.id.c_str(), lp.point.gamma_x,
                      lp.point.gamma_zz, lp.point.gamma_zxz, lp.point.role.c_str(), lp.label + 1);
        os << buf;
    }
    return os.str();
}

inline std::vector<LabeledPoint> parse_labels_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::vector<LabeledPoint> out;
    if (!std::getline(is, line) || line.rfind("point_id,", 0) != 0) throw FormatError("labels file lacks header");
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 6) throw FormatError("labels line " + std::to_string(lineno) + ": expected 6 fields");
        try {
            LabeledPoint lp;
            lp.point = make_point(std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), f[4]);
            lp.point.id = f[0];
            const int label = std::stoi(f[5]);
            if (label < 1 || label > 3) throw FormatError("label must be 1, 2 or 3");
            lp.label = static_cast<std::size_t>(label - 1);
            out.push_back(std::move(lp));
        } catch (const std::logic_error& e) {
            throw FormatError("labels line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

inline std::vector<LabeledPoint> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ResourceError("cannot open labels file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_labels_csv(ss.str());
}

inline std::vector<LabeledPoint> with_role(const std::vector<LabeledPoint>& pts, const std::string& role) {
    std::vector<LabeledPoint> out;
    for (const auto& p : pts)
        if (p.point.role == role) out.push_back(p);
    return out;
}

struct DiagramEntry {
    GridPoint point;
    std::optional<std::size_t> label;  // empty: no dataset (a hole)
    double agreement = 0.0;
    std::vector<std::size_t> votes;
};

using DatasetSource = std::function<std::optional<Dataset>(const GridPoint&)>;

/// One ensemble majority per point. Points without data become holes.
inline std::vector<DiagramEntry> reconstruct_phase_diagram(const Ensemble& models, const std::vector<GridPoint>& pts,
                                                           const DatasetSource& source, std::size_t N,
                                                           unsigned threads = 1) {
    std::vector<DiagramEntry> out;
    for (const auto& p : pts) {
        DiagramEntry e{p, std::nullopt, 0.0, {}};
        if (auto ds = source(p)) {
            const VoteRecord v = ensemble_majority(models, *ds, N, threads);
            e.label = v.majority;
            e.agreement = v.agreement;
            e.votes = v.votes;
        }
        out.push_back(std::move(e));
    }
    return out;
}

/// Grid points with a lattice neighbour (step 0.1 along any simplex direction)
/// carrying a different label.
inline std::vector<GridPoint> boundary_points(const std::vector<LabeledPoint>& grid) {
    auto key = [](const GridPoint& p) {
        return std::make_pair(static_cast<int>(std::lround((p.gamma_x - 0.025) * 10)),
                              static_cast<int>(std::lround((p.gamma_zxz - 0.025) * 10)));
    };
    std::map<std::pair<int, int>, std::size_t> label;
    for (const auto& lp : grid) label[key(lp.point)] = lp.label;
    std::vector<GridPoint> out;
    const int dirs[6][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, -1}, {-1, 1}};
    for (const auto& lp : grid) {
        const auto [i, j] = key(lp.point);
        for (const auto& d : dirs) {
            auto it = label.find({i + d[0], j + d[1]});
            if (it != label.end() && it->second != lp.label) {
                GridPoint p = lp.point;
                p.role = "outer";
                out.push_back(p);
                break;
            }
        }
    }
    return out;
}

}  // namespace mipt

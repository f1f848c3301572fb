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

#include "mipt/eval/grid.hpp"
#include "mipt/io/files.hpp"
#include "mipt/sim/entropy.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#ifndef MIPT_GIT_DESCRIBE
#define MIPT_GIT_DESCRIBE "unknown"
#endif

namespace mipt::io {

inline std::string fmt(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

/// Comma-separated rows; cells are written verbatim.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header) { row(header); }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
        os_ << '\n';
    }

    std::string str() const { return os_.str(); }
    void save(const std::filesystem::path& path) const { write_file_atomic(path, str()); }

  private:
    std::ostringstream os_;
};

/// Provenance sidecar written next to an output as "<output>.manifest.json".
struct RunManifest {
    std::string command;
    nlohmann::json config = nlohmann::json::object();
    nlohmann::json seeds = nlohmann::json::object();
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    nlohmann::json to_json() const {
        const double wall =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
        return {{"command", command}, {"config", config},   {"seeds", seeds},
                {"outputs", outputs}, {"git_describe", MIPT_GIT_DESCRIBE}, {"wall_ms", wall}};
    }

    /// Writes one sidecar per output; each cites its sibling outputs.
    void write() const {
        const std::string text = to_json().dump(2) + "\n";
        for (const auto& o : outputs) write_file_atomic(o + ".manifest.json", text);
    }
};

// ---------------------------------------------------------------------------
// SVG.

inline const char* phase_color(std::size_t c) {
    static const char* colors[] = {"#7b3fa0", "#2f6fd0", "#2e9e4f"};  // trivial, LR, SPT
    return c < 3 ? colors[c] : "#999999";
}

/// Ternary plot: gamma_X at the lower left, gamma_ZZ lower right, gamma_ZXZ on top.
/// Fill colour is the majority class and opacity the agreement.
inline std::string ternary_svg(const std::vector<DiagramEntry>& entries, const std::string& title) {
    const double W = 520, H = 480, side = 420, x0 = 50, y0 = 430;
    const double h = side * std::sqrt(3.0) / 2;
    auto pos = [&](const GridPoint& p, double& x, double& y) {
        x = x0 + side * (p.gamma_zz + 0.5 * p.gamma_zxz);
        y = y0 - h * p.gamma_zxz;
    };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
       << ' ' << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
       << title << "</text>\n";
    os << "<polygon points=\"" << x0 << ',' << y0 << ' ' << x0 + side << ',' << y0 << ' ' << x0 + side / 2 << ','
       << y0 - h << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.2\"/>\n";
    os << "<text x=\"" << x0 - 8 << "\" y=\"" << y0 + 20 << "\" font-family=\"sans-serif\" font-size=\"13\">X</text>\n";
    os << "<text x=\"" << x0 + side - 8 << "\" y=\"" << y0 + 20
       << "\" font-family=\"sans-serif\" font-size=\"13\">ZZ</text>\n";
    os << "<text x=\"" << x0 + side / 2 - 14 << "\" y=\"" << y0 - h - 8
       << "\" font-family=\"sans-serif\" font-size=\"13\">ZXZ</text>\n";
    const double r = side * 0.1 / std::sqrt(3.0);
    for (const auto& e : entries) {
        double x, y;
        pos(e.point, x, y);
        if (!e.label) {
            os << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"" << fmt(r * 0.5)
               << "\" fill=\"none\" stroke=\"#999999\" stroke-dasharray=\"2,2\"/>\n";
            continue;
        }
        os << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"" << fmt(r) << "\" fill=\""
           << phase_color(*e.label) << "\" fill-opacity=\"" << fmt(e.agreement, 4) << "\"><title>" << e.point.id
           << " label " << *e.label + 1 << " agreement " << fmt(e.agreement, 4) << "</title></circle>\n";
    }
    const char* names[] = {"trivial", "LR", "SPT"};
    for (std::size_t c = 0; c < 3; ++c) {
        const double ly = 50 + 20 * double(c);
        os << "<rect x=\"" << W - 110 << "\" y=\"" << ly - 10 << "\" width=\"12\" height=\"12\" fill=\""
           << phase_color(c) << "\"/><text x=\"" << W - 92 << "\" y=\"" << ly
           << "\" font-family=\"sans-serif\" font-size=\"12\">" << names[c] << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

/// Mean half-chain entropy against time with one-standard-error bars.
inline std::string entropy_svg(const EntropyReport& rep, const std::string& title) {
    const double W = 520, H = 360, left = 60, right = 20, top = 40, bottom = 50;
    const double pw = W - left - right, ph = H - top - bottom;
    double tmax = 1, smax = 0.1;
    for (std::size_t k = 0; k < rep.times.size(); ++k) {
        tmax = std::max(tmax, double(rep.times[k]));
        smax = std::max(smax, rep.s_half[k] + rep.s_half_se[k]);
    }
    smax *= 1.1;
    auto X = [&](double t) { return left + pw * t / tmax; };
    auto Y = [&](double s) { return top + ph * (1 - s / smax); };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
       << title << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 12
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">t</text>\n";
    os << "<text x=\"16\" y=\"" << top + ph / 2 << "\" font-family=\"sans-serif\" font-size=\"12\">S</text>\n";
    for (int k = 0; k <= 4; ++k) {
        const double s = smax * k / 4, t = tmax * k / 4;
        os << "<text x=\"" << left - 6 << "\" y=\"" << fmt(Y(s) + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << fmt(s, 3) << "</text>\n";
        os << "<text x=\"" << fmt(X(t)) << "\" y=\"" << top + ph + 16
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << fmt(t, 3) << "</text>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"#2f6fd0\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < rep.times.size(); ++k) os << fmt(X(rep.times[k])) << ',' << fmt(Y(rep.s_half[k])) << ' ';
    os << "\"/>\n";
    for (std::size_t k = 0; k < rep.times.size(); ++k) {
        const double x = X(rep.times[k]);
        os << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(Y(rep.s_half[k] - rep.s_half_se[k])) << "\" x2=\"" << fmt(x)
           << "\" y2=\"" << fmt(Y(rep.s_half[k] + rep.s_half_se[k])) << "\" stroke=\"#2f6fd0\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace mipt::io

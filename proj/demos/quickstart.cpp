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

// Trains a small classifier on the three vertex presets and classifies the
// three inner points. Runs in a few seconds:  ./build/demos/quickstart

#include "mipt/pipeline.hpp"

#include <cstdio>

int main() {
    using namespace mipt;
    const int L = 6, T = 36;
    const unsigned threads = default_thread_count();

    const LabeledPool pool = vertex_pool(L, T, 300, /*master_seed=*/1, threads);

    ArchHyper h;
    h.h1 = 4;
    h.h2 = 4;
    h.T = T;
    h.L = L;
    TrainConfig cfg;
    cfg.lr = 1e-3;
    cfg.epochs = 5;
    cfg.N = 25;
    cfg.seed = 2;
    CnnAttnModel model(h, /*seed=*/3);
    train(model, pool, cfg, [](const EpochLog& e) { std::printf("epoch %d  loss %.4f\n", e.epoch, e.mean_loss); });

    for (const auto& p : default_inner_points()) {
        const Dataset test = simulate_point(p, L, T, 100, /*master_seed=*/4, threads);
        const auto pred = predict_dataset(model, test, cfg.N);
        std::printf("%s  y = (%.3f, %.3f, %.3f)  -> %s\n", p.id.c_str(), pred.y[0], pred.y[1], pred.y[2],
                    phase_name(argmax_lowest(pred.y)));
    }
}

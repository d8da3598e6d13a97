// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctp/recovery.hpp"

#include <algorithm>
#include <stdexcept>

namespace ctp {

ClusterAssignment assign_clusters(const SelectionTrace& trace, const SimilarityMatrix& sim) {
    if (trace.entries.empty()) {
        throw std::invalid_argument("cannot assign clusters to an empty selection");
    }
    const std::size_t n = sim.size();
    std::vector<std::size_t> retained = trace.indices();
    std::sort(retained.begin(), retained.end());

    ClusterAssignment out{std::vector<std::size_t>(n, kNoOwner), {}};
    std::vector<bool> kept(n, false);
    for (const std::size_t j : retained) {
        if (j >= n) {
            throw BoundsError("trace index " + std::to_string(j) + " out of range");
        }
        kept[j] = true;
        out.members[j];
    }
    for (std::size_t u = 0; u < n; ++u) {
        if (kept[u]) {
            continue;
        }
        std::size_t best = retained.front();
        double best_sim = sim(u, best);
        for (std::size_t k = 1; k < retained.size(); ++k) {
            const double m = sim(u, retained[k]);
            if (m > best_sim) {
                best_sim = m;
                best = retained[k];
            }
        }
        out.owner[u] = best;
        out.members[best].push_back(u);
    }
    return out;
}

std::vector<double> cluster_weights(std::size_t owner, const ClusterAssignment& assignment,
                                    const SimilarityMatrix& sim, const SwaOptions& options) {
    const auto& members = assignment.members.at(owner);
    std::vector<double> w;
    w.reserve(members.size());
    double total = 0.0;
    for (const std::size_t u : members) {
        const double m = sim(u, owner);
        w.push_back(options.raw_weights ? m : std::max(m, 0.0));
        total += w.back();
    }
    const double denom = total + options.eps;
    for (auto& v : w) {
        v /= denom;
    }
    return w;
}

Matrix swa_update(const Matrix& hidden, const SelectionTrace& trace, const ClusterAssignment& assignment,
                  const SimilarityMatrix& sim, const SwaOptions& options) {
    const std::size_t d = hidden.cols();
    Matrix out(trace.size(), d);
    std::vector<double> pooled(d);
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const std::size_t j = trace.entries[k].index;
        const auto src = hidden.row(j);
        auto dst = out.row(k);
        const auto& members = assignment.members.at(j);
        if (members.empty()) {
            std::copy(src.begin(), src.end(), dst.begin());
            continue;
        }
        const auto alpha = cluster_weights(j, assignment, sim, options);
        std::fill(pooled.begin(), pooled.end(), 0.0);
        for (std::size_t m = 0; m < members.size(); ++m) {
            const auto h = hidden.row(members[m]);
            for (std::size_t c = 0; c < d; ++c) {
                pooled[c] += alpha[m] * h[c];
            }
        }
        for (std::size_t c = 0; c < d; ++c) {
            dst[c] = options.blend * src[c] + (1.0 - options.blend) * pooled[c];
        }
    }
    return out;
}

}  // namespace ctp

// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ctp/core.hpp"
#include "ctp/similarity.hpp"

namespace ctp {

/// Max-min pivot seeding in key space.
///
/// The first pivot is the token with the largest L1 key norm. Each further pivot is the
/// unchosen token whose nearest chosen pivot is farthest away in Euclidean key distance
/// (compared on squared distances). Ties go to the lowest index. Returns pivots in
/// selection order; `kappa` is clamped to N.
std::vector<std::size_t> init_pivots(const Matrix& keys, std::size_t kappa);

/// Incremental state of the greedy loop.
///
/// Besides the selected set and candidate mask it caches, for every token, the distance
/// to the nearest selected token and the largest raw similarity to any selected token.
/// Since the spatial gain (1 + lambda * delta_bar) is the same for every selected j,
/// the largest modulated similarity of candidate i is max_sim[i] * gain(i).
class BssState {
public:
    BssState(const SimilarityMatrix& sim, const DistanceMatrix& dist, std::span<const std::size_t> initial);

    /// Moves `index` from the candidates to the selected set and refreshes both caches.
    void add(std::size_t index);

    const std::vector<std::size_t>& selected() const { return m_selected; }
    const std::vector<bool>& candidate_mask() const { return m_candidate; }
    bool is_candidate(std::size_t i) const { return m_candidate[i]; }
    std::size_t candidate_count() const { return m_candidate_count; }
    std::vector<std::size_t> candidates() const;

    const std::vector<double>& min_dist() const { return m_min_dist; }
    const std::vector<double>& max_sim() const { return m_max_sim; }

    /// delta_bar_i(S) = min_dist[i] / d_max
    double normalized_distance(std::size_t i) const { return m_min_dist[i] / m_dist.dmax; }
    /// 1 + lambda * delta_bar_i(S)
    double gain(std::size_t i, double lambda) const { return 1.0 + lambda * normalized_distance(i); }
    /// max over selected j of the modulated similarity.
    double modulated_max(std::size_t i, double lambda) const { return m_max_sim[i] * gain(i, lambda); }

    int loop = 0;
    double tau = 0.0;

private:
    const SimilarityMatrix& m_sim;
    const DistanceMatrix& m_dist;
    std::vector<std::size_t> m_selected;
    std::vector<bool> m_candidate;
    std::size_t m_candidate_count = 0;
    std::vector<double> m_min_dist;
    std::vector<double> m_max_sim;
};

/// Records `newly_selected` in `state`; min_dist[i] <- min(min_dist[i], D[i][newly_selected]).
void update_min_dist(BssState& state, std::size_t newly_selected);

/// M~_ij = M_ij * (1 + lambda * delta_bar_i(S)) for every selected j, in selection order.
std::vector<double> bss_modulated_row(std::size_t i, const SimilarityMatrix& sim, const BssState& state,
                                      const DistanceMatrix& dist, double lambda);

struct CandidateScore {
    std::size_t index = 0;
    double score = 0.0;
};

/// r_i = 1 - max_j M~_ij for every candidate, ascending by index.
std::vector<CandidateScore> non_duplication_scores(const SimilarityMatrix& sim, const BssState& state,
                                                   const DistanceMatrix& dist, double lambda);

/// Threshold-annealed, batched greedy expansion from `pivots` until min(R, N) tokens are held.
///
/// Each loop scores all candidates once against the loop-start selection and sorts them by
/// descending r (ties: lower index). Batches of `batch` candidates are then taken in that
/// order; each batch is tested against the selection as of the batch start, accepting every
/// candidate whose largest modulated similarity is below tau. After a loop that leaves the
/// budget unfilled, tau grows by dtau.
SelectionTrace greedy_select(const SimilarityMatrix& sim, const DistanceMatrix& dist,
                             std::span<const std::size_t> pivots, const PrunerConfig& cfg);

}  // namespace ctp

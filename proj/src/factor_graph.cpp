#include "hcpi/factor_graph.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "hcpi/error.hpp"

namespace hcpi {

FactorGraph FactorGraph::from_occupancy(std::vector<std::vector<std::uint8_t>> occupancy) {
    FactorGraph g;
    g.K = static_cast<int>(occupancy.size());
    if (g.K == 0) fail("invalid-graph", "empty occupancy matrix");
    g.J = static_cast<int>(occupancy[0].size());
    if (g.J == 0) fail("invalid-graph", "occupancy matrix has no users");
    for (const auto& row : occupancy)
        if (static_cast<int>(row.size()) != g.J)
            fail("invalid-graph", "ragged occupancy matrix");

    g.F = std::move(occupancy);
    g.xi.assign(g.K, {});
    g.zeta.assign(g.J, {});
    for (int k = 0; k < g.K; ++k)
        for (int j = 0; j < g.J; ++j) {
            if (g.F[k][j] > 1) fail("invalid-graph", "occupancy entries must be 0 or 1");
            if (g.F[k][j]) {
                g.xi[k].push_back(j);
                g.zeta[j].push_back(k);
            }
        }

    g.d_f = static_cast<int>(g.xi[0].size());
    for (int k = 0; k < g.K; ++k)
        if (static_cast<int>(g.xi[k].size()) != g.d_f)
            fail("invalid-graph", "resource degrees are not uniform");
    g.d_v = static_cast<int>(g.zeta[0].size());
    for (int j = 0; j < g.J; ++j)
        if (static_cast<int>(g.zeta[j].size()) != g.d_v)
            fail("invalid-graph", "user degrees are not uniform");
    if (g.d_f < 1 || g.d_v < 1) fail("invalid-graph", "graph has an isolated node");

    std::set<std::vector<int>> distinct(g.zeta.begin(), g.zeta.end());
    if (static_cast<int>(distinct.size()) != g.J)
        fail("invalid-graph", "two users share the same occupancy pattern");

    g.pos_in_xi.assign(g.K, std::vector<int>(g.J, -1));
    g.pos_in_zeta.assign(g.J, std::vector<int>(g.K, -1));
    for (int k = 0; k < g.K; ++k)
        for (int a = 0; a < g.d_f; ++a) g.pos_in_xi[k][g.xi[k][a]] = a;
    for (int j = 0; j < g.J; ++j)
        for (int b = 0; b < g.d_v; ++b) g.pos_in_zeta[j][g.zeta[j][b]] = b;
    return g;
}

namespace {

// all weight-t subsets of {0..K-1} in lexicographic order
std::vector<std::vector<int>> weight_subsets(int K, int t) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(t);
    for (int i = 0; i < t; ++i) cur[i] = i;
    if (t > K) return out;
    while (true) {
        out.push_back(cur);
        int i = t - 1;
        while (i >= 0 && cur[i] == K - t + i) --i;
        if (i < 0) break;
        ++cur[i];
        for (int l = i + 1; l < t; ++l) cur[l] = cur[l - 1] + 1;
    }
    return out;
}

// lexicographically first choice of J columns keeping all row weights <= d_f
// and exactly d_f once all J columns are placed
bool pick_columns(const std::vector<std::vector<int>>& pool, int start, int K, int J, int d_f,
                  std::vector<int>& row_weight, std::vector<int>& chosen) {
    if (static_cast<int>(chosen.size()) == J) {
        for (int k = 0; k < K; ++k)
            if (row_weight[k] != d_f) return false;
        return true;
    }
    int remaining = J - static_cast<int>(chosen.size());
    if (static_cast<int>(pool.size()) - start < remaining) return false;
    for (int c = start; c < static_cast<int>(pool.size()); ++c) {
        bool ok = true;
        for (int k : pool[c])
            if (row_weight[k] + 1 > d_f) { ok = false; break; }
        if (!ok) continue;
        for (int k : pool[c]) ++row_weight[k];
        chosen.push_back(c);
        if (pick_columns(pool, c + 1, K, J, d_f, row_weight, chosen)) return true;
        chosen.pop_back();
        for (int k : pool[c]) --row_weight[k];
    }
    return false;
}

}  // namespace

FactorGraph canonical_factor_graph(int K, int J, int d_f, int d_v) {
    if (K < 1 || J < 1 || d_f < 1 || d_v < 1 || d_v > K)
        fail("infeasible-degrees", "degrees out of range");
    if (static_cast<long long>(K) * d_f != static_cast<long long>(J) * d_v)
        fail("infeasible-degrees", "edge count mismatch: K*d_f != J*d_v");

    auto pool = weight_subsets(K, d_v);
    if (static_cast<int>(pool.size()) < J)
        fail("infeasible-degrees", "fewer than J distinct weight-d_v columns exist");

    std::vector<int> row_weight(K, 0);
    std::vector<int> chosen;
    if (!pick_columns(pool, 0, K, J, d_f, row_weight, chosen))
        fail("infeasible-degrees", "no degree-regular column selection exists");

    std::vector<std::vector<std::uint8_t>> F(K, std::vector<std::uint8_t>(J, 0));
    for (int j = 0; j < J; ++j)
        for (int k : pool[chosen[j]]) F[k][j] = 1;
    return FactorGraph::from_occupancy(std::move(F));
}

}  // namespace hcpi

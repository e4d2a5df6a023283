#pragma once

#include <cstdint>
#include <memory>
#include <vector>

namespace hcpi {

// Bipartite resource/user occupancy structure of one detection unit.
//
// F is the K x J binary indicator matrix: F[k][j] = 1 when user j occupies
// resource (chip) k. The graph is degree-regular: every resource serves
// exactly d_f users and every user occupies exactly d_v resources, and no two
// users share the same occupancy column.
struct FactorGraph {
    int K = 0;  // resources (chips per detection unit)
    int J = 0;  // users
    int d_f = 0;
    int d_v = 0;
    std::vector<std::vector<std::uint8_t>> F;  // K x J
    std::vector<std::vector<int>> xi;          // per resource k: its users, ascending
    std::vector<std::vector<int>> zeta;        // per user j: its resources, ascending
    std::vector<std::vector<int>> pos_in_xi;   // K x J, index of j in xi[k], -1 if absent
    std::vector<std::vector<int>> pos_in_zeta; // J x K, index of k in zeta[j], -1 if absent

    // Builds neighbor sets and degrees from an occupancy matrix; rejects
    // irregular degrees and duplicate columns.
    static FactorGraph from_occupancy(std::vector<std::vector<std::uint8_t>> occupancy);

    bool same_occupancy(const FactorGraph& other) const { return F == other.F; }
};

// Deterministic graph for (K, J, d_f, d_v): columns are the lexicographically
// first selection of distinct weight-d_v patterns whose rows all end up with
// weight d_f. Throws "infeasible-degrees" when no such graph exists.
FactorGraph canonical_factor_graph(int K, int J, int d_f, int d_v);

}  // namespace hcpi

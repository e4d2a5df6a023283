#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hcpi/channel.hpp"
#include "hcpi/codebook.hpp"
#include "hcpi/mapper.hpp"

namespace hcpi {

// Per-unit soft output: p[j][col] over the merged-symbol columns (order
// blocks 1..R first, the zero symbol last). Rows are normalized to 1.
struct SoftMessageMatrix {
    int unit = 0;  // kappa, 1-based
    int J = 0;
    int cols = 0;
    std::vector<double> p;  // row-major J x cols

    double at(int j, int col) const { return p[static_cast<std::size_t>(j) * cols + col]; }
    double& at(int j, int col) { return p[static_cast<std::size_t>(j) * cols + col]; }
    std::span<const double> row(int j) const {
        return {p.data() + static_cast<std::size_t>(j) * cols, static_cast<std::size_t>(cols)};
    }
};

struct DetectorStats {
    // joint symbol assignments scored during FN updates; one resource and one
    // iteration contribute exactly cols^d_f
    std::uint64_t fn_hypothesis_evals = 0;
};

// Edge messages of one detection unit, probability domain, normalized.
// fn_to_un[k][a][q]: message from resource k to its a-th neighbor xi[k][a];
// un_to_fn[j][b][q]: message from user j to its b-th resource zeta[j][b].
struct MessageSet {
    std::vector<std::vector<std::vector<double>>> fn_to_un;
    std::vector<std::vector<std::vector<double>>> un_to_fn;
    int iteration = 0;

    static MessageSet uniform(const FactorGraph& graph, int cols);
};

// One FN update at resource k (the k-th chip of the unit): for every neighbor
// and symbol, sums exp(-|y_k - sum of hypothesized contributions|^2 / N0)
// times the other neighbors' incoming beliefs over all joint hypotheses.
// Log-domain with per-output max shift; outputs normalized.
void fn_update(const MergedAlphabet& alphabet, int k, cplx y_k, std::span<const cplx> h_unit,
               double n0, MessageSet& msgs, DetectorStats* stats = nullptr);

// un_to_fn[j][b] = normalized product of the other resources' messages to j.
void un_update(const MergedAlphabet& alphabet, int j, MessageSet& msgs);

// Merging-codebook MPA over one K-chip unit; h_unit is J x K row-major.
SoftMessageMatrix mc_mpa(int unit, std::span<const cplx> y_unit, std::span<const cplx> h_unit,
                         double n0, const MergedAlphabet& alphabet, int iters,
                         DetectorStats* stats = nullptr);

struct UnitPosterior {
    SoftMessageMatrix marginals;
    std::vector<int> joint_map;  // per user, merged column of the joint argmax
};

// Exhaustive-enumeration oracle over cols^J joint hypotheses (guarded by
// instance-too-large above 2^24). Exact marginals under the same likelihood
// and uniform priors as mc_mpa.
UnitPosterior exact_map_unit(int unit, std::span<const cplx> y_unit, std::span<const cplx> h_unit,
                             double n0, const MergedAlphabet& alphabet);

// Vacant-position detection: per user, the (n - sum t) positions with the
// largest zero-symbol belief, ties to the smaller position.
std::vector<std::vector<int>> detect_vacant(const std::vector<SoftMessageMatrix>& phis,
                                            const HcpiConfig& config,
                                            const MergedAlphabet& alphabet);

// Probability that user j uses the order-r codebook at this unit.
double order_usage_probability(const SoftMessageMatrix& phi, int j, int r, int C);

struct OrderDetection {
    std::vector<int> indices;  // absolute positions, ascending
    std::vector<int> symbols;  // data symbol per position, same order
};

// Order-r index and data decision for user j. Candidate rows are those
// consistent with the detected vacancies and everything already assigned;
// scored by the product of order-usage probabilities, ties to the lowest
// table row. Throws empty-candidate-set when nothing is consistent.
OrderDetection detect_order(int r, int j, const std::vector<SoftMessageMatrix>& phis,
                            const std::vector<int>& vacant,
                            const std::vector<std::vector<int>>& fixed_lower,
                            const BtiMapperSet& mapper, const HcpiConfig& config,
                            const MergedAlphabet& alphabet);

enum class SoftEngine { McMpa, ExactUnit };

struct UserDetection {
    std::vector<std::uint8_t> bits;
    std::vector<int> vacant;
    std::vector<std::vector<int>> index_sets;  // [r-1]
    std::vector<std::vector<int>> symbols;     // [r-1]
    bool failed = false;  // empty-candidate-set: unrecoverable, block counted in error
};

struct MpadResult {
    std::vector<SoftMessageMatrix> phis;  // per unit
    std::vector<UserDetection> users;
};

// Full staged detection of one received block: per-unit soft messages, then
// vacancy, per-order index, and data recovery, then bit reassembly (per order:
// index bits then data bits).
MpadResult mpad_block(std::span<const cplx> y, const ChannelRealization& h, double n0,
                      const MergedAlphabet& alphabet, const BtiMapperSet& mapper,
                      const HcpiConfig& config, int iters, SoftEngine engine = SoftEngine::McMpa,
                      DetectorStats* stats = nullptr);

}  // namespace hcpi

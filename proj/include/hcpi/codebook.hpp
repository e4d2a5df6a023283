#pragma once

#include <complex>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hcpi/factor_graph.hpp"

namespace hcpi {

using cplx = std::complex<double>;

// One C-point SCMA codebook per user for a single hybrid order r.
// codewords[j][c] is a K-dimensional vector that is nonzero only on user j's
// occupied resources and has unit energy.
struct CodebookFamily {
    int order = 1;  // r, 1-based
    int C = 0;
    std::shared_ptr<const FactorGraph> graph;
    std::vector<std::vector<std::vector<cplx>>> codewords;  // [j][c][k]

    // Throws sparsity-mismatch / power-violation / duplicate-codeword.
    void validate() const;
};

// Deterministic stand-in codebook: a C-ary unit-circle constellation on each
// of the user's d_v resources, energy split evenly, with phase rotations
// separating colliding users on a resource and separating hybrid orders.
// rotation_seed adds a further per-(user, order) rotation angle.
CodebookFamily generate_phase_rotation_family(std::shared_ptr<const FactorGraph> graph, int C,
                                              int order, double rotation_seed = 0.0);

struct MergedSymbol {
    int order = 0;   // 0 for the zero symbol
    int symbol = -1; // c within the order's codebook, -1 for zero
    bool is_zero = false;
};

// Union alphabet used by the detector: per user, the codewords of S_1..S_R in
// order-block layout followed (by default) by the all-zero symbol. Column
// index q-1 holds merged symbol q = (r-1)*C + c + 1; the last column is q = 0.
class MergedAlphabet {
public:
    // Standard merge: R*C + 1 columns, zero last. Throws inconsistent-families.
    static MergedAlphabet merge(const std::vector<CodebookFamily>& families);
    // Plain-MPA variant without the zero column (conventional SCMA detection).
    static MergedAlphabet merge_without_zero(const std::vector<CodebookFamily>& families);

    int J() const { return J_; }
    int K() const { return K_; }
    int C() const { return C_; }
    int R() const { return R_; }
    bool has_zero() const { return has_zero_; }
    int cols() const { return R_ * C_ + (has_zero_ ? 1 : 0); }
    int zero_col() const { return R_ * C_; }
    // column block [first, last) covering order r
    int order_col_begin(int r) const { return (r - 1) * C_; }
    int order_col_end(int r) const { return r * C_; }

    std::span<const cplx> symbol(int j, int col) const {
        return {data_.data() + (static_cast<std::size_t>(j) * cols() + col) * K_,
                static_cast<std::size_t>(K_)};
    }
    MergedSymbol provenance(int col) const;

    std::shared_ptr<const FactorGraph> graph;

private:
    static MergedAlphabet build(const std::vector<CodebookFamily>& families, bool with_zero);
    int J_ = 0, K_ = 0, C_ = 0, R_ = 0;
    bool has_zero_ = true;
    std::vector<cplx> data_;  // [j][col][k]
};

struct DistanceReport {
    std::vector<double> per_user;  // min over distinct merged-symbol pairs
    double global = 0.0;
};

// Minimum Euclidean distance among merged symbols (zero included) per user.
// Small values flag codebook combinations the detector will struggle with.
DistanceReport cross_codebook_min_distance(const std::vector<CodebookFamily>& families);

// Codebook document I/O. The JSON layout is
//   {K, J, C, R, F: K x J 0/1, families: [{order, codewords[user][symbol][k] = [re, im]}]}
// with all reals printed to 17 significant digits so save -> load -> save is
// byte-stable. Load throws parse-error plus the CodebookFamily validation set.
std::string codebook_to_json(const std::vector<CodebookFamily>& families);
std::vector<CodebookFamily> codebook_from_json(const std::string& text);
void save_codebook_family(const std::string& path, const std::vector<CodebookFamily>& families);
std::vector<CodebookFamily> load_codebook_family(const std::string& path);

}  // namespace hcpi

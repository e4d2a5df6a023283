#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hcpi/codebook.hpp"

namespace hcpi {

// Exact fraction for transmission-efficiency bookkeeping.
struct Rational {
    long long num = 0;
    long long den = 1;

    static Rational make(long long n, long long d);
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Rational&) const = default;
    bool operator<(const Rational& o) const { return num * o.den < o.num * den; }
    bool operator>=(const Rational& o) const { return !(*this < o); }
};

// Block-level index-modulation parameters: n codeword positions split across
// R hybrid orders, order r activating t[r] of the positions still available.
struct HcpiConfig {
    int n = 1;
    int C = 4;
    std::vector<int> t = {1};  // size R

    int R() const { return static_cast<int>(t.size()); }
    int t_total() const { return std::accumulate(t.begin(), t.end(), 0); }
    int vacancies() const { return n - t_total(); }
    int bits_per_symbol() const;      // log2 C
    int avail(int r) const;           // positions still free when order r starts
    void validate() const;            // invalid-config
};

struct BitBudget {
    std::vector<int> m1;  // index bits per order
    std::vector<int> m2;  // data bits per order
    int m = 0;            // total per user per block
};

// m1[r] = floor(log2(binom(avail_r, t_r))), m2[r] = t_r * log2(C).
BitBudget bit_budget(const HcpiConfig& config);

std::uint64_t binomial(int n, int k);

// Lexicographic t-combinations of {1..n_avail}: rank 0 is {1..t}.
std::vector<int> combinadic_unrank(std::uint64_t rank, int n_avail, int t);
std::uint64_t combinadic_rank(const std::vector<int>& set, int n_avail);

// Bits-to-indices tables, one per hybrid order. Row b (the index-bit pattern
// read MSB-first) holds t[r] relative ranks, 1-based, into the ascending list
// of positions not yet taken by lower orders.
class BtiMapperSet {
public:
    enum class Kind { Combinadic, Builtin, File };

    static BtiMapperSet combinadic(const HcpiConfig& config);
    // "table1-n4t2": the 4-row n=4, t=2 example table.
    // "table2-hcpi-n4": the R=2 table pairing table1 with the 1-bit
    //                   first/last-vacancy rule.
    static BtiMapperSet builtin(const std::string& name, const HcpiConfig& config);
    // Reads a {"mappers": [{order, table: [[rank,...], ...]}]} document
    // (the same file family codebooks live in).
    static BtiMapperSet from_file(const std::string& path, const HcpiConfig& config);

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    const std::vector<std::vector<int>>& table(int r) const { return tables_[r - 1]; }

    // relative ranks -> bit pattern, throws unmappable-index-set
    std::uint64_t pattern_of(int r, const std::vector<int>& ranks) const;

private:
    BtiMapperSet(Kind kind, std::string name, std::vector<std::vector<std::vector<int>>> tables,
                 const HcpiConfig& config);
    Kind kind_;
    std::string name_;
    std::vector<std::vector<std::vector<int>>> tables_;           // [r-1][pattern] -> ranks
    std::vector<std::map<std::vector<int>, std::uint64_t>> rev_;  // ranks -> pattern
};

// Absolute active positions for one order: the mapper row selected by `bits`
// applied to the ascending positions of {1..n} minus `occupied`.
std::vector<int> map_bits_to_indices(std::span<const std::uint8_t> bits, int r,
                                     const std::vector<int>& occupied, const BtiMapperSet& mapper,
                                     const HcpiConfig& config);

// Inverse of map_bits_to_indices across all orders; index_sets[r-1] holds the
// absolute positions of order r. Throws unmappable-index-set.
std::vector<std::vector<std::uint8_t>> demap_indices_to_bits(
    const std::vector<std::vector<int>>& index_sets, const BtiMapperSet& mapper,
    const HcpiConfig& config);

struct Slot {
    int order = 0;    // 0 = EMPTY
    int symbol = -1;  // c within the order's codebook
    bool operator==(const Slot&) const = default;
};

// One user's encoded block: slot occupancy, the transmitted chip sequence,
// and the index/data record that produced it.
struct CodewordBlock {
    int user = 0;
    int n = 0;
    int K = 0;
    std::vector<Slot> slots;                  // n entries, position order
    std::vector<cplx> chips;                  // n*K chips
    std::vector<std::vector<int>> index_sets; // [r-1]: absolute positions, ascending
    std::vector<std::vector<int>> symbols;    // [r-1]: data symbols, position order
    std::vector<int> vacant;                  // ascending
    std::vector<std::uint8_t> bits;           // the m source bits
};

// Bit layout per order r = 1..R: m1[r] index bits then m2[r] data bits, data
// symbols filling that order's active positions in ascending position order.
CodewordBlock encode_block(std::span<const std::uint8_t> bits, int user, const HcpiConfig& config,
                           const BtiMapperSet& mapper, const std::vector<CodebookFamily>& families);

// Transmission efficiency in bits per chip.
Rational te_cscma(int J, int K, int C);
Rational te_cpi(int J, int K, const HcpiConfig& config);   // requires R = 1
Rational te_hcpi(int J, int K, const HcpiConfig& config);

}  // namespace hcpi

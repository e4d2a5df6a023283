#include "hcpi/mapper.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hcpi/error.hpp"

namespace hcpi {

Rational Rational::make(long long n, long long d) {
    if (d == 0) fail("invalid-config", "zero denominator");
    if (d < 0) { n = -n; d = -d; }
    long long g = std::gcd(n < 0 ? -n : n, d);
    if (g == 0) g = 1;
    return {n / g, d / g};
}

int HcpiConfig::bits_per_symbol() const {
    return std::bit_width(static_cast<unsigned>(C)) - 1;
}

int HcpiConfig::avail(int r) const {
    int used = 0;
    for (int g = 0; g < r - 1; ++g) used += t[g];
    return n - used;
}

void HcpiConfig::validate() const {
    if (n < 1) fail("invalid-config", "n must be >= 1");
    if (t.empty()) fail("invalid-config", "at least one hybrid order required");
    for (int v : t)
        if (v < 1) fail("invalid-config", "every t[r] must be >= 1");
    if (t_total() > n) fail("invalid-config", "sum of t exceeds n");
    if (C < 2 || (C & (C - 1)) != 0) fail("invalid-config", "C must be a power of 2, >= 2");
}

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
    return r;
}

BitBudget bit_budget(const HcpiConfig& config) {
    config.validate();
    BitBudget b;
    for (int r = 1; r <= config.R(); ++r) {
        std::uint64_t rows = binomial(config.avail(r), config.t[r - 1]);
        b.m1.push_back(std::bit_width(rows) - 1);  // floor(log2)
        b.m2.push_back(config.t[r - 1] * config.bits_per_symbol());
        b.m += b.m1.back() + b.m2.back();
    }
    return b;
}

std::vector<int> combinadic_unrank(std::uint64_t rank, int n_avail, int t) {
    if (t < 0 || t > n_avail || rank >= binomial(n_avail, t))
        fail("rank-out-of-range", "rank " + std::to_string(rank) + " outside C(" +
                                      std::to_string(n_avail) + "," + std::to_string(t) + ")");
    std::vector<int> out;
    out.reserve(t);
    int next = 1;
    for (int slot = t; slot >= 1; --slot) {
        // advance until the block of combinations starting at `next` covers rank
        while (true) {
            std::uint64_t block = binomial(n_avail - next, slot - 1);
            if (rank < block) break;
            rank -= block;
            ++next;
        }
        out.push_back(next++);
    }
    return out;
}

std::uint64_t combinadic_rank(const std::vector<int>& set, int n_avail) {
    const int t = static_cast<int>(set.size());
    std::vector<int> s = set;
    std::sort(s.begin(), s.end());
    for (int i = 0; i < t; ++i)
        if (s[i] < 1 || s[i] > n_avail || (i && s[i] == s[i - 1]))
            fail("rank-out-of-range", "not a valid combination");
    std::uint64_t rank = 0;
    int prev = 0;
    for (int i = 0; i < t; ++i) {
        for (int v = prev + 1; v < s[i]; ++v) rank += binomial(n_avail - v, t - i - 1);
        prev = s[i];
    }
    return rank;
}

namespace {

std::vector<std::vector<int>> combinadic_table(int n_avail, int t, int m1) {
    std::vector<std::vector<int>> rows;
    rows.reserve(1ull << m1);
    for (std::uint64_t b = 0; b < (1ull << m1); ++b) rows.push_back(combinadic_unrank(b, n_avail, t));
    return rows;
}

void check_table(const std::vector<std::vector<int>>& rows, int n_avail, int t, int m1) {
    if (rows.size() != (1ull << m1))
        fail("invalid-config", "mapper table must have 2^m1 rows");
    std::set<std::vector<int>> seen;
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != t) fail("invalid-config", "mapper row has wrong size");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (row[i] < 1 || row[i] > n_avail) fail("invalid-config", "mapper rank out of range");
            if (i && row[i] <= row[i - 1]) fail("invalid-config", "mapper rows must be ascending");
        }
        if (!seen.insert(row).second) fail("invalid-config", "duplicate mapper row");
    }
}

}  // namespace

BtiMapperSet::BtiMapperSet(Kind kind, std::string name,
                           std::vector<std::vector<std::vector<int>>> tables,
                           const HcpiConfig& config)
    : kind_(kind), name_(std::move(name)), tables_(std::move(tables)) {
    config.validate();
    BitBudget b = bit_budget(config);
    if (static_cast<int>(tables_.size()) != config.R())
        fail("invalid-config", "mapper must provide one table per order");
    rev_.resize(tables_.size());
    for (int r = 1; r <= config.R(); ++r) {
        check_table(tables_[r - 1], config.avail(r), config.t[r - 1], b.m1[r - 1]);
        for (std::uint64_t p = 0; p < tables_[r - 1].size(); ++p)
            rev_[r - 1][tables_[r - 1][p]] = p;
    }
}

BtiMapperSet BtiMapperSet::combinadic(const HcpiConfig& config) {
    config.validate();
    BitBudget b = bit_budget(config);
    std::vector<std::vector<std::vector<int>>> tables;
    for (int r = 1; r <= config.R(); ++r)
        tables.push_back(combinadic_table(config.avail(r), config.t[r - 1], b.m1[r - 1]));
    return BtiMapperSet(Kind::Combinadic, "combinadic", std::move(tables), config);
}

BtiMapperSet BtiMapperSet::builtin(const std::string& name, const HcpiConfig& config) {
    const std::vector<std::vector<int>> table1 = {{1, 3}, {2, 4}, {2, 3}, {1, 4}};
    if (name == "table1-n4t2") {
        if (config.n != 4 || config.R() != 1 || config.t[0] != 2)
            fail("invalid-config", "table1-n4t2 needs n=4, R=1, t=[2]");
        return BtiMapperSet(Kind::Builtin, name, {table1}, config);
    }
    if (name == "table2-hcpi-n4") {
        if (config.n != 4 || config.R() != 2 || config.t[0] != 2 || config.t[1] != 1)
            fail("invalid-config", "table2-hcpi-n4 needs n=4, R=2, t=[2,1]");
        // second order: bit 0 -> first vacant position, bit 1 -> last one
        return BtiMapperSet(Kind::Builtin, name, {table1, {{1}, {2}}}, config);
    }
    fail("invalid-config", "unknown builtin mapper " + name);
}

BtiMapperSet BtiMapperSet::from_file(const std::string& path, const HcpiConfig& config) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail("io-failure", "cannot open " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    nlohmann::json doc = nlohmann::json::parse(buf.str(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("mappers"))
        fail("parse-error", "no mappers section in " + path);
    const auto& mj = doc["mappers"];
    if (!mj.is_array()) fail("parse-error", "mappers must be an array");
    std::vector<std::vector<std::vector<int>>> tables(config.R());
    std::vector<bool> present(config.R(), false);
    for (const auto& entry : mj) {
        if (!entry.is_object() || !entry.contains("order") || !entry.contains("table"))
            fail("parse-error", "mapper entries need order and table");
        int r = entry["order"].get<int>();
        if (r < 1 || r > config.R() || present[r - 1])
            fail("parse-error", "mapper orders must be 1..R, each once");
        present[r - 1] = true;
        for (const auto& row : entry["table"]) {
            std::vector<int> ranks;
            for (const auto& v : row) ranks.push_back(v.get<int>());
            tables[r - 1].push_back(std::move(ranks));
        }
    }
    for (bool p : present)
        if (!p) fail("parse-error", "mapper file missing an order");
    return BtiMapperSet(Kind::File, path, std::move(tables), config);
}

std::uint64_t BtiMapperSet::pattern_of(int r, const std::vector<int>& ranks) const {
    const auto& rev = rev_[r - 1];
    auto it = rev.find(ranks);
    if (it == rev.end()) fail("unmappable-index-set", "rank set absent from order-" +
                                                          std::to_string(r) + " table");
    return it->second;
}

namespace {

std::uint64_t bits_to_pattern(std::span<const std::uint8_t> bits) {
    std::uint64_t p = 0;
    for (std::uint8_t b : bits) p = (p << 1) | (b & 1);
    return p;
}

void pattern_to_bits(std::uint64_t p, int width, std::vector<std::uint8_t>& out) {
    for (int i = width - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((p >> i) & 1));
}

std::vector<int> available_positions(int n, const std::vector<int>& occupied) {
    std::vector<bool> used(n + 1, false);
    for (int p : occupied) used[p] = true;
    std::vector<int> avail;
    for (int p = 1; p <= n; ++p)
        if (!used[p]) avail.push_back(p);
    return avail;
}

}  // namespace

std::vector<int> map_bits_to_indices(std::span<const std::uint8_t> bits, int r,
                                     const std::vector<int>& occupied, const BtiMapperSet& mapper,
                                     const HcpiConfig& config) {
    auto avail = available_positions(config.n, occupied);
    if (static_cast<int>(avail.size()) != config.avail(r))
        fail("invalid-config", "occupied set inconsistent with order " + std::to_string(r));
    const auto& table = mapper.table(r);
    std::uint64_t pattern = bits_to_pattern(bits);
    if (pattern >= table.size()) fail("bits-out-of-table", "no row for this bit pattern");
    std::vector<int> abs;
    for (int rank : table[pattern]) abs.push_back(avail[rank - 1]);
    return abs;
}

std::vector<std::vector<std::uint8_t>> demap_indices_to_bits(
    const std::vector<std::vector<int>>& index_sets, const BtiMapperSet& mapper,
    const HcpiConfig& config) {
    if (static_cast<int>(index_sets.size()) != config.R())
        fail("unmappable-index-set", "need one index set per order");
    BitBudget b = bit_budget(config);
    std::vector<std::vector<std::uint8_t>> out;
    std::vector<int> occupied;
    for (int r = 1; r <= config.R(); ++r) {
        auto avail = available_positions(config.n, occupied);
        std::vector<int> ranks;
        for (int p : index_sets[r - 1]) {
            auto it = std::lower_bound(avail.begin(), avail.end(), p);
            if (it == avail.end() || *it != p)
                fail("unmappable-index-set", "position " + std::to_string(p) +
                                                 " not available at order " + std::to_string(r));
            ranks.push_back(static_cast<int>(it - avail.begin()) + 1);
        }
        std::sort(ranks.begin(), ranks.end());
        std::uint64_t pattern = mapper.pattern_of(r, ranks);
        out.emplace_back();
        pattern_to_bits(pattern, b.m1[r - 1], out.back());
        occupied.insert(occupied.end(), index_sets[r - 1].begin(), index_sets[r - 1].end());
    }
    return out;
}

CodewordBlock encode_block(std::span<const std::uint8_t> bits, int user, const HcpiConfig& config,
                           const BtiMapperSet& mapper, const std::vector<CodebookFamily>& families) {
    config.validate();
    BitBudget budget = bit_budget(config);
    if (static_cast<int>(bits.size()) != budget.m)
        fail("invalid-length", "expected " + std::to_string(budget.m) + " bits, got " +
                                   std::to_string(bits.size()));
    if (static_cast<int>(families.size()) < config.R())
        fail("inconsistent-families", "need one codebook family per order");
    const FactorGraph& g = *families.front().graph;
    const int bps = config.bits_per_symbol();

    CodewordBlock blk;
    blk.user = user;
    blk.n = config.n;
    blk.K = g.K;
    blk.slots.assign(config.n, {});
    blk.bits.assign(bits.begin(), bits.end());

    std::size_t cursor = 0;
    std::vector<int> occupied;
    for (int r = 1; r <= config.R(); ++r) {
        auto idx_bits = bits.subspan(cursor, budget.m1[r - 1]);
        cursor += budget.m1[r - 1];
        std::vector<int> active = map_bits_to_indices(idx_bits, r, occupied, mapper, config);
        std::sort(active.begin(), active.end());

        std::vector<int> syms;
        for (int i = 0; i < config.t[r - 1]; ++i) {
            int c = static_cast<int>(bits_to_pattern(bits.subspan(cursor, bps)));
            cursor += bps;
            blk.slots[active[i] - 1] = {r, c};
            syms.push_back(c);
        }
        blk.index_sets.push_back(active);
        blk.symbols.push_back(std::move(syms));
        occupied.insert(occupied.end(), active.begin(), active.end());
    }
    for (int p = 1; p <= config.n; ++p)
        if (blk.slots[p - 1].order == 0) blk.vacant.push_back(p);

    blk.chips.assign(static_cast<std::size_t>(config.n) * g.K, cplx{});
    const CodebookFamily* by_order[16] = {};
    for (const auto& fam : families) {
        if (fam.order >= 1 && fam.order <= config.R()) by_order[fam.order - 1] = &fam;
    }
    for (int r = 1; r <= config.R(); ++r)
        if (!by_order[r - 1]) fail("inconsistent-families", "no codebook for order " + std::to_string(r));
    for (int p = 1; p <= config.n; ++p) {
        const Slot& s = blk.slots[p - 1];
        if (s.order == 0) continue;
        const auto& w = by_order[s.order - 1]->codewords[user][s.symbol];
        std::copy(w.begin(), w.end(), blk.chips.begin() + static_cast<std::size_t>(p - 1) * g.K);
    }
    return blk;
}

Rational te_cscma(int J, int K, int C) {
    HcpiConfig probe{1, C, {1}};
    probe.validate();
    return Rational::make(static_cast<long long>(J) * probe.bits_per_symbol(), K);
}

Rational te_hcpi(int J, int K, const HcpiConfig& config) {
    BitBudget b = bit_budget(config);
    return Rational::make(static_cast<long long>(J) * b.m,
                          static_cast<long long>(config.n) * K);
}

Rational te_cpi(int J, int K, const HcpiConfig& config) {
    if (config.R() != 1) fail("invalid-config", "CPI efficiency needs R = 1");
    return te_hcpi(J, K, config);
}

}  // namespace hcpi

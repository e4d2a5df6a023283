#include "hcpi/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hcpi/error.hpp"

namespace hcpi {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void normalize_or_uniform(std::span<double> v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    if (sum > 0.0 && std::isfinite(sum)) {
        for (double& x : v) x /= sum;
    } else {
        std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
    }
}

}  // namespace

MessageSet MessageSet::uniform(const FactorGraph& graph, int cols) {
    MessageSet m;
    const double u = 1.0 / cols;
    m.fn_to_un.assign(graph.K, {});
    for (int k = 0; k < graph.K; ++k)
        m.fn_to_un[k].assign(graph.xi[k].size(), std::vector<double>(cols, u));
    m.un_to_fn.assign(graph.J, {});
    for (int j = 0; j < graph.J; ++j)
        m.un_to_fn[j].assign(graph.zeta[j].size(), std::vector<double>(cols, u));
    return m;
}

void fn_update(const MergedAlphabet& alphabet, int k, cplx y_k, std::span<const cplx> h_unit,
               double n0, MessageSet& msgs, DetectorStats* stats) {
    const FactorGraph& g = *alphabet.graph;
    const int A = alphabet.cols();
    const int d = static_cast<int>(g.xi[k].size());
    const int K = g.K;

    // per-neighbor, per-symbol channel contribution h * x at this chip
    static thread_local std::vector<cplx> contrib;
    static thread_local std::vector<double> loginc, vals, maxima;
    contrib.assign(static_cast<std::size_t>(d) * A, cplx{});
    loginc.assign(static_cast<std::size_t>(d) * A, 0.0);
    for (int a = 0; a < d; ++a) {
        const int j = g.xi[k][a];
        const int b = g.pos_in_zeta[j][k];
        const auto& inc = msgs.un_to_fn[j][b];
        for (int q = 0; q < A; ++q) {
            contrib[static_cast<std::size_t>(a) * A + q] =
                h_unit[static_cast<std::size_t>(j) * K + k] * alphabet.symbol(j, q)[k];
            loginc[static_cast<std::size_t>(a) * A + q] = std::log(inc[q]);
        }
    }

    std::uint64_t hyps = 1;
    for (int a = 0; a < d; ++a) hyps *= static_cast<std::uint64_t>(A);
    if (stats) stats->fn_hypothesis_evals += hyps;

    // pass 1: score every joint hypothesis once, remember per-(neighbor,
    // symbol) leave-one-out terms and their maxima for a stable exp pass
    vals.assign(static_cast<std::size_t>(d) * hyps, 0.0);
    maxima.assign(static_cast<std::size_t>(d) * A, kNegInf);
    std::vector<int> digit(d, 0);
    std::vector<double> prefix(d + 1), suffix(d + 1);
    for (std::uint64_t hi = 0; hi < hyps; ++hi) {
        cplx sum{};
        for (int a = 0; a < d; ++a) sum += contrib[static_cast<std::size_t>(a) * A + digit[a]];
        const double w = -std::norm(y_k - sum) / n0;

        prefix[0] = 0.0;
        for (int a = 0; a < d; ++a)
            prefix[a + 1] = prefix[a] + loginc[static_cast<std::size_t>(a) * A + digit[a]];
        suffix[d] = 0.0;
        for (int a = d - 1; a >= 0; --a)
            suffix[a] = suffix[a + 1] + loginc[static_cast<std::size_t>(a) * A + digit[a]];
        for (int a = 0; a < d; ++a) {
            const double v = w + prefix[a] + suffix[a + 1];
            vals[static_cast<std::size_t>(a) * hyps + hi] = v;
            double& mx = maxima[static_cast<std::size_t>(a) * A + digit[a]];
            if (v > mx) mx = v;
        }
        for (int a = d - 1; a >= 0; --a) {
            if (++digit[a] < A) break;
            digit[a] = 0;
        }
    }

    // pass 2: accumulate exp(v - max) per output bin, then softmax per edge
    static thread_local std::vector<double> acc;
    acc.assign(static_cast<std::size_t>(d) * A, 0.0);
    std::fill(digit.begin(), digit.end(), 0);
    for (std::uint64_t hi = 0; hi < hyps; ++hi) {
        for (int a = 0; a < d; ++a) {
            const double v = vals[static_cast<std::size_t>(a) * hyps + hi];
            if (v == kNegInf) continue;
            const int q = digit[a];
            acc[static_cast<std::size_t>(a) * A + q] +=
                std::exp(v - maxima[static_cast<std::size_t>(a) * A + q]);
        }
        for (int a = d - 1; a >= 0; --a) {
            if (++digit[a] < A) break;
            digit[a] = 0;
        }
    }
    for (int a = 0; a < d; ++a) {
        auto& out = msgs.fn_to_un[k][a];
        double mx = kNegInf;
        for (int q = 0; q < A; ++q) {
            const double m = maxima[static_cast<std::size_t>(a) * A + q];
            const double l = (m == kNegInf) ? kNegInf
                                            : m + std::log(acc[static_cast<std::size_t>(a) * A + q]);
            out[q] = l;
            if (l > mx) mx = l;
        }
        for (int q = 0; q < A; ++q) out[q] = (out[q] == kNegInf) ? 0.0 : std::exp(out[q] - mx);
        normalize_or_uniform(out);
    }
}

void un_update(const MergedAlphabet& alphabet, int j, MessageSet& msgs) {
    const FactorGraph& g = *alphabet.graph;
    const int A = alphabet.cols();
    const int d = static_cast<int>(g.zeta[j].size());
    for (int b = 0; b < d; ++b) {
        auto& out = msgs.un_to_fn[j][b];
        std::fill(out.begin(), out.end(), 1.0);
        for (int b2 = 0; b2 < d; ++b2) {
            if (b2 == b) continue;
            const int k = g.zeta[j][b2];
            const auto& in = msgs.fn_to_un[k][g.pos_in_xi[k][j]];
            for (int q = 0; q < A; ++q) out[q] *= in[q];
        }
        normalize_or_uniform(out);
    }
}

SoftMessageMatrix mc_mpa(int unit, std::span<const cplx> y_unit, std::span<const cplx> h_unit,
                         double n0, const MergedAlphabet& alphabet, int iters,
                         DetectorStats* stats) {
    if (iters < 1) fail("invalid-config", "iteration count must be >= 1");
    const FactorGraph& g = *alphabet.graph;
    const int A = alphabet.cols();

    MessageSet msgs = MessageSet::uniform(g, A);
    for (int it = 0; it < iters; ++it) {
        for (int k = 0; k < g.K; ++k) fn_update(alphabet, k, y_unit[k], h_unit, n0, msgs, stats);
        for (int j = 0; j < g.J; ++j) un_update(alphabet, j, msgs);
        msgs.iteration = it + 1;
    }

    SoftMessageMatrix phi;
    phi.unit = unit;
    phi.J = g.J;
    phi.cols = A;
    phi.p.assign(static_cast<std::size_t>(g.J) * A, 1.0);
    for (int j = 0; j < g.J; ++j) {
        auto row = std::span<double>(phi.p).subspan(static_cast<std::size_t>(j) * A, A);
        for (int k : g.zeta[j]) {
            const auto& in = msgs.fn_to_un[k][g.pos_in_xi[k][j]];
            for (int q = 0; q < A; ++q) row[q] *= in[q];
        }
        normalize_or_uniform(row);
    }
    return phi;
}

UnitPosterior exact_map_unit(int unit, std::span<const cplx> y_unit, std::span<const cplx> h_unit,
                             double n0, const MergedAlphabet& alphabet) {
    const FactorGraph& g = *alphabet.graph;
    const int A = alphabet.cols();
    const int J = g.J;
    const int K = g.K;

    double joint = 1.0;
    for (int j = 0; j < J; ++j) {
        joint *= A;
        if (joint > static_cast<double>(1 << 24))
            fail("instance-too-large", "joint hypothesis space exceeds 2^24");
    }
    const std::uint64_t total = static_cast<std::uint64_t>(joint);

    // per-user, per-symbol contributions on the user's occupied chips
    std::vector<cplx> contrib(static_cast<std::size_t>(J) * A * K);
    for (int j = 0; j < J; ++j)
        for (int q = 0; q < A; ++q) {
            auto x = alphabet.symbol(j, q);
            for (int k : g.zeta[j])
                contrib[(static_cast<std::size_t>(j) * A + q) * K + k] =
                    h_unit[static_cast<std::size_t>(j) * K + k] * x[k];
        }

    std::vector<double> ll(total);
    std::vector<cplx> res(y_unit.begin(), y_unit.end());
    double nrm = 0.0;
    for (int k = 0; k < K; ++k) nrm += std::norm(res[k]);
    double best = kNegInf;
    std::uint64_t best_idx = 0;
    std::uint64_t flat = 0;

    // depth-first over users; residual norm maintained incrementally
    auto recurse = [&](auto&& self, int j) -> void {
        if (j == J) {
            const double v = -nrm / n0;
            ll[flat] = v;
            if (v > best) { best = v; best_idx = flat; }
            ++flat;
            return;
        }
        for (int q = 0; q < A; ++q) {
            const cplx* cw = &contrib[(static_cast<std::size_t>(j) * A + q) * K];
            for (int k : g.zeta[j]) {
                nrm -= std::norm(res[k]);
                res[k] -= cw[k];
                nrm += std::norm(res[k]);
            }
            self(self, j + 1);
            for (int k : g.zeta[j]) {
                nrm -= std::norm(res[k]);
                res[k] += cw[k];
                nrm += std::norm(res[k]);
            }
        }
    };
    recurse(recurse, 0);

    UnitPosterior post;
    post.marginals.unit = unit;
    post.marginals.J = J;
    post.marginals.cols = A;
    post.marginals.p.assign(static_cast<std::size_t>(J) * A, 0.0);
    std::vector<int> digit(J, 0);
    for (std::uint64_t hi = 0; hi < total; ++hi) {
        const double d = ll[hi] - best;
        if (d > -46.0) {  // below exp(-46) a term cannot move a marginal
            const double e = std::exp(d);
            for (int j = 0; j < J; ++j)
                post.marginals.p[static_cast<std::size_t>(j) * A + digit[j]] += e;
        }
        for (int j = J - 1; j >= 0; --j) {
            if (++digit[j] < A) break;
            digit[j] = 0;
        }
    }
    for (int j = 0; j < J; ++j)
        normalize_or_uniform(std::span<double>(post.marginals.p)
                                 .subspan(static_cast<std::size_t>(j) * A, A));

    post.joint_map.assign(J, 0);
    for (int j = J - 1; j >= 0; --j) {
        post.joint_map[j] = static_cast<int>(best_idx % A);
        best_idx /= A;
    }
    return post;
}

std::vector<std::vector<int>> detect_vacant(const std::vector<SoftMessageMatrix>& phis,
                                            const HcpiConfig& config,
                                            const MergedAlphabet& alphabet) {
    const int n = config.n;
    if (static_cast<int>(phis.size()) != n) fail("dimension-mismatch", "need one matrix per unit");
    const int v = config.vacancies();
    std::vector<std::vector<int>> out(alphabet.J());
    if (v == 0) return out;
    const int zc = alphabet.zero_col();
    for (int j = 0; j < alphabet.J(); ++j) {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return phis[a].at(j, zc) > phis[b].at(j, zc);  // ties keep smaller unit first
        });
        std::vector<int> picks(order.begin(), order.begin() + v);
        std::sort(picks.begin(), picks.end());
        for (int p : picks) out[j].push_back(p + 1);
    }
    return out;
}

double order_usage_probability(const SoftMessageMatrix& phi, int j, int r, int C) {
    double s = 0.0;
    for (int q = (r - 1) * C; q < r * C; ++q) s += phi.at(j, q);
    return s;
}

OrderDetection detect_order(int r, int j, const std::vector<SoftMessageMatrix>& phis,
                            const std::vector<int>& vacant,
                            const std::vector<std::vector<int>>& fixed_lower,
                            const BtiMapperSet& mapper, const HcpiConfig& config,
                            const MergedAlphabet& alphabet) {
    std::vector<int> occupied;
    for (const auto& s : fixed_lower) occupied.insert(occupied.end(), s.begin(), s.end());
    std::vector<bool> blocked(config.n + 1, false);
    for (int p : vacant) blocked[p] = true;
    for (int p : occupied) blocked[p] = true;

    std::vector<int> avail;
    for (int p = 1; p <= config.n; ++p)
        if (std::find(occupied.begin(), occupied.end(), p) == occupied.end()) avail.push_back(p);

    // per-unit probability of this order for user j
    std::vector<double> usage(config.n);
    for (int u = 0; u < config.n; ++u)
        usage[u] = order_usage_probability(phis[u], j, r, alphabet.C());

    const auto& table = mapper.table(r);
    double best_score = -1.0;
    int best_row = -1;
    std::vector<int> best_abs;
    for (std::size_t row = 0; row < table.size(); ++row) {
        std::vector<int> abs;
        bool ok = true;
        for (int rank : table[row]) {
            const int p = avail[rank - 1];
            if (blocked[p]) { ok = false; break; }
            abs.push_back(p);
        }
        if (!ok) continue;
        double score = 1.0;
        for (int p : abs) score *= usage[p - 1];
        if (score > best_score) {  // ties keep the lowest table row
            best_score = score;
            best_row = static_cast<int>(row);
            best_abs = abs;
        }
    }
    if (best_row < 0)
        fail("empty-candidate-set", "no order-" + std::to_string(r) +
                                        " mapping is consistent with earlier decisions");

    std::sort(best_abs.begin(), best_abs.end());
    OrderDetection det;
    det.indices = best_abs;
    for (int p : best_abs) {
        const auto& phi = phis[p - 1];
        int best_q = alphabet.order_col_begin(r);
        for (int q = alphabet.order_col_begin(r); q < alphabet.order_col_end(r); ++q)
            if (phi.at(j, q) > phi.at(j, best_q)) best_q = q;
        det.symbols.push_back(best_q - alphabet.order_col_begin(r));
    }
    return det;
}

namespace {

void append_pattern_bits(std::uint64_t pattern, int width, std::vector<std::uint8_t>& out) {
    for (int i = width - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((pattern >> i) & 1));
}

}  // namespace

MpadResult mpad_block(std::span<const cplx> y, const ChannelRealization& h, double n0,
                      const MergedAlphabet& alphabet, const BtiMapperSet& mapper,
                      const HcpiConfig& config, int iters, SoftEngine engine,
                      DetectorStats* stats) {
    const FactorGraph& g = *alphabet.graph;
    const int K = g.K;
    if (static_cast<int>(y.size()) != config.n * K)
        fail("dimension-mismatch", "received block has wrong length");

    MpadResult res;
    res.phis.reserve(config.n);
    for (int u = 0; u < config.n; ++u) {
        auto y_unit = y.subspan(static_cast<std::size_t>(u) * K, K);
        auto h_unit = h.unit_gains(u, K);
        if (engine == SoftEngine::McMpa)
            res.phis.push_back(mc_mpa(u + 1, y_unit, h_unit, n0, alphabet, iters, stats));
        else
            res.phis.push_back(exact_map_unit(u + 1, y_unit, h_unit, n0, alphabet).marginals);
    }

    const BitBudget budget = bit_budget(config);
    const int bps = config.bits_per_symbol();
    auto vacancies = alphabet.has_zero()
                         ? detect_vacant(res.phis, config, alphabet)
                         : std::vector<std::vector<int>>(alphabet.J());

    res.users.resize(alphabet.J());
    for (int j = 0; j < alphabet.J(); ++j) {
        UserDetection& det = res.users[j];
        det.vacant = vacancies[j];
        for (int r = 1; r <= config.R(); ++r) {
            if (det.failed) {
                // unrecoverable earlier stage: emit zero bits for this order
                det.bits.insert(det.bits.end(), budget.m1[r - 1] + budget.m2[r - 1], 0);
                det.index_sets.emplace_back();
                det.symbols.emplace_back();
                continue;
            }
            try {
                OrderDetection od =
                    detect_order(r, j, res.phis, det.vacant, det.index_sets, mapper, config, alphabet);
                std::vector<int> ranks;
                {
                    std::vector<int> occupied;
                    for (const auto& s : det.index_sets)
                        occupied.insert(occupied.end(), s.begin(), s.end());
                    std::vector<bool> used(config.n + 1, false);
                    for (int p : occupied) used[p] = true;
                    std::vector<int> avail;
                    for (int p = 1; p <= config.n; ++p)
                        if (!used[p]) avail.push_back(p);
                    for (int p : od.indices) {
                        auto it = std::lower_bound(avail.begin(), avail.end(), p);
                        ranks.push_back(static_cast<int>(it - avail.begin()) + 1);
                    }
                }
                append_pattern_bits(mapper.pattern_of(r, ranks), budget.m1[r - 1], det.bits);
                for (int c : od.symbols)
                    append_pattern_bits(static_cast<std::uint64_t>(c), bps, det.bits);
                det.index_sets.push_back(od.indices);
                det.symbols.push_back(od.symbols);
            } catch (const Error& e) {
                if (e.code() != "empty-candidate-set") throw;
                det.failed = true;
                det.bits.insert(det.bits.end(), budget.m1[r - 1] + budget.m2[r - 1], 0);
                det.index_sets.emplace_back();
                det.symbols.emplace_back();
            }
        }
    }
    return res;
}

}  // namespace hcpi

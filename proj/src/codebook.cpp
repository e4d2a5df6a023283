#include "hcpi/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "hcpi/error.hpp"

namespace hcpi {

namespace {
constexpr double kPowerTol = 1e-9;

bool is_power_of_two(int x) { return x > 0 && (x & (x - 1)) == 0; }
}  // namespace

void CodebookFamily::validate() const {
    if (!graph) fail("inconsistent-families", "codebook family has no factor graph");
    const auto& g = *graph;
    if (static_cast<int>(codewords.size()) != g.J)
        fail("inconsistent-families", "codeword table does not cover all users");
    for (int j = 0; j < g.J; ++j) {
        if (static_cast<int>(codewords[j].size()) != C)
            fail("inconsistent-families", "user " + std::to_string(j) + " has wrong codebook size");
        for (int c = 0; c < C; ++c) {
            const auto& w = codewords[j][c];
            if (static_cast<int>(w.size()) != g.K)
                fail("inconsistent-families", "codeword dimension mismatch");
            double energy = 0.0;
            for (int k = 0; k < g.K; ++k) {
                if (!g.F[k][j] && std::norm(w[k]) > 0.0)
                    fail("sparsity-mismatch", "user " + std::to_string(j) + " symbol " +
                                                  std::to_string(c) + " is nonzero at resource " +
                                                  std::to_string(k) + " outside its pattern");
                energy += std::norm(w[k]);
            }
            if (std::abs(energy - 1.0) > kPowerTol)
                fail("power-violation", "user " + std::to_string(j) + " symbol " +
                                            std::to_string(c) + " has energy " +
                                            std::to_string(energy));
        }
        for (int c = 0; c < C; ++c)
            for (int c2 = c + 1; c2 < C; ++c2)
                if (codewords[j][c] == codewords[j][c2])
                    fail("duplicate-codeword", "user " + std::to_string(j) + " symbols " +
                                                   std::to_string(c) + " and " + std::to_string(c2) +
                                                   " coincide");
    }
}

CodebookFamily generate_phase_rotation_family(std::shared_ptr<const FactorGraph> graph, int C,
                                              int order, double rotation_seed) {
    if (!is_power_of_two(C) || C < 2) fail("invalid-config", "codebook size must be a power of 2");
    if (order < 1) fail("invalid-config", "hybrid order must be >= 1");
    const FactorGraph& g = *graph;

    CodebookFamily fam;
    fam.order = order;
    fam.C = C;
    fam.graph = graph;
    fam.codewords.assign(g.J, std::vector<std::vector<cplx>>(C, std::vector<cplx>(g.K, cplx{})));

    const double amp = 1.0 / std::sqrt(static_cast<double>(g.d_v));
    const double pi = std::numbers::pi;
    // order offsets live in [0, pi/C) so two orders never differ by a multiple
    // of the constellation step 2*pi/C
    const double order_offset = (pi / C) * (1.0 - std::ldexp(1.0, 1 - order));

    for (int j = 0; j < g.J; ++j) {
        const double user_order_rot = rotation_seed * static_cast<double>((j + 1) * order);
        for (int c = 0; c < C; ++c) {
            for (int k : g.zeta[j]) {
                const int pos = g.pos_in_xi[k][j];
                const double phase = 2.0 * pi * c / C + 2.0 * pi * pos / (C * g.d_f) +
                                     order_offset + user_order_rot;
                fam.codewords[j][c][k] = std::polar(amp, phase);
            }
        }
    }
    fam.validate();
    return fam;
}

MergedAlphabet MergedAlphabet::build(const std::vector<CodebookFamily>& families, bool with_zero) {
    if (families.empty()) fail("inconsistent-families", "no codebook families given");
    const int R = static_cast<int>(families.size());
    std::vector<const CodebookFamily*> by_order(R, nullptr);
    for (const auto& f : families) {
        if (f.order < 1 || f.order > R || by_order[f.order - 1])
            fail("inconsistent-families", "orders must be 1..R, each present once");
        by_order[f.order - 1] = &f;
    }
    const auto& first = *by_order[0];
    for (const auto* f : by_order) {
        if (f->C != first.C) fail("inconsistent-families", "codebook sizes differ across orders");
        if (!f->graph || !f->graph->same_occupancy(*first.graph))
            fail("inconsistent-families", "families do not share a factor graph");
        f->validate();
    }

    MergedAlphabet a;
    a.graph = first.graph;
    a.J_ = first.graph->J;
    a.K_ = first.graph->K;
    a.C_ = first.C;
    a.R_ = R;
    a.has_zero_ = with_zero;
    a.data_.assign(static_cast<std::size_t>(a.J_) * a.cols() * a.K_, cplx{});
    for (int j = 0; j < a.J_; ++j)
        for (int r = 1; r <= R; ++r)
            for (int c = 0; c < a.C_; ++c) {
                const auto& w = by_order[r - 1]->codewords[j][c];
                std::copy(w.begin(), w.end(),
                          a.data_.begin() +
                              (static_cast<std::size_t>(j) * a.cols() + a.order_col_begin(r) + c) *
                                  a.K_);
            }
    // zero column (when present) stays value-initialized
    return a;
}

MergedAlphabet MergedAlphabet::merge(const std::vector<CodebookFamily>& families) {
    return build(families, true);
}

MergedAlphabet MergedAlphabet::merge_without_zero(const std::vector<CodebookFamily>& families) {
    return build(families, false);
}

MergedSymbol MergedAlphabet::provenance(int col) const {
    if (has_zero_ && col == zero_col()) return {0, -1, true};
    return {col / C_ + 1, col % C_, false};
}

DistanceReport cross_codebook_min_distance(const std::vector<CodebookFamily>& families) {
    MergedAlphabet a = MergedAlphabet::merge(families);
    DistanceReport rep;
    rep.per_user.assign(a.J(), std::numeric_limits<double>::infinity());
    for (int j = 0; j < a.J(); ++j) {
        for (int q = 0; q < a.cols(); ++q)
            for (int q2 = q + 1; q2 < a.cols(); ++q2) {
                auto x = a.symbol(j, q);
                auto y = a.symbol(j, q2);
                double d2 = 0.0;
                for (int k = 0; k < a.K(); ++k) d2 += std::norm(x[k] - y[k]);
                rep.per_user[j] = std::min(rep.per_user[j], std::sqrt(d2));
            }
    }
    rep.global = *std::min_element(rep.per_user.begin(), rep.per_user.end());
    return rep;
}

namespace {

// canonical real formatting: 17 significant digits, locale-independent
std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double json_number(const nlohmann::json& v, const char* what) {
    if (!v.is_number()) fail("parse-error", std::string("expected a number for ") + what);
    return v.get<double>();
}

int json_int(const nlohmann::json& v, const char* what) {
    if (!v.is_number_integer()) fail("parse-error", std::string("expected an integer for ") + what);
    return v.get<int>();
}

}  // namespace

std::string codebook_to_json(const std::vector<CodebookFamily>& families) {
    if (families.empty()) fail("inconsistent-families", "nothing to serialize");
    const FactorGraph& g = *families.front().graph;
    std::ostringstream os;
    os << "{\n";
    os << "  \"K\": " << g.K << ",\n";
    os << "  \"J\": " << g.J << ",\n";
    os << "  \"C\": " << families.front().C << ",\n";
    os << "  \"R\": " << families.size() << ",\n";
    os << "  \"F\": [";
    for (int k = 0; k < g.K; ++k) {
        os << (k ? ", [" : "[");
        for (int j = 0; j < g.J; ++j) os << (j ? ", " : "") << int(g.F[k][j]);
        os << "]";
    }
    os << "],\n";
    os << "  \"families\": [\n";
    for (std::size_t fi = 0; fi < families.size(); ++fi) {
        const auto& fam = families[fi];
        os << "    {\"order\": " << fam.order << ", \"codewords\": [\n";
        for (int j = 0; j < g.J; ++j) {
            os << "      [";
            for (int c = 0; c < fam.C; ++c) {
                os << (c ? ", [" : "[");
                for (int k = 0; k < g.K; ++k) {
                    const cplx& v = fam.codewords[j][c][k];
                    os << (k ? ", [" : "[") << fmt17(v.real()) << ", " << fmt17(v.imag()) << "]";
                }
                os << "]";
            }
            os << "]" << (j + 1 < g.J ? "," : "") << "\n";
        }
        os << "    ]}" << (fi + 1 < families.size() ? "," : "") << "\n";
    }
    os << "  ]\n}\n";
    return os.str();
}

std::vector<CodebookFamily> codebook_from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) fail("parse-error", "not a JSON object");
    for (const char* key : {"K", "J", "C", "R", "F", "families"})
        if (!doc.contains(key)) fail("parse-error", std::string("missing field ") + key);

    const int K = json_int(doc["K"], "K");
    const int J = json_int(doc["J"], "J");
    const int C = json_int(doc["C"], "C");
    const int R = json_int(doc["R"], "R");
    if (K < 1 || J < 1 || C < 1 || R < 1) fail("parse-error", "dimensions must be positive");

    const auto& fjson = doc["F"];
    if (!fjson.is_array() || static_cast<int>(fjson.size()) != K)
        fail("parse-error", "F must be a K-row array");
    std::vector<std::vector<std::uint8_t>> F(K, std::vector<std::uint8_t>(J));
    for (int k = 0; k < K; ++k) {
        if (!fjson[k].is_array() || static_cast<int>(fjson[k].size()) != J)
            fail("parse-error", "F rows must have J entries");
        for (int j = 0; j < J; ++j) {
            int v = json_int(fjson[k][j], "F entry");
            if (v != 0 && v != 1) fail("parse-error", "F entries must be 0 or 1");
            F[k][j] = static_cast<std::uint8_t>(v);
        }
    }
    auto graph = std::make_shared<const FactorGraph>(FactorGraph::from_occupancy(std::move(F)));

    const auto& fams = doc["families"];
    if (!fams.is_array() || static_cast<int>(fams.size()) != R)
        fail("parse-error", "families must list R entries");
    std::vector<CodebookFamily> out;
    out.reserve(R);
    for (const auto& fj : fams) {
        if (!fj.is_object() || !fj.contains("order") || !fj.contains("codewords"))
            fail("parse-error", "family entries need order and codewords");
        CodebookFamily fam;
        fam.order = json_int(fj["order"], "order");
        fam.C = C;
        fam.graph = graph;
        const auto& cw = fj["codewords"];
        if (!cw.is_array() || static_cast<int>(cw.size()) != J)
            fail("parse-error", "codewords must cover J users");
        fam.codewords.assign(J, {});
        for (int j = 0; j < J; ++j) {
            if (!cw[j].is_array() || static_cast<int>(cw[j].size()) != C)
                fail("parse-error", "each user needs C codewords");
            fam.codewords[j].assign(C, std::vector<cplx>(K));
            for (int c = 0; c < C; ++c) {
                if (!cw[j][c].is_array() || static_cast<int>(cw[j][c].size()) != K)
                    fail("parse-error", "codewords must be K-dimensional");
                for (int k = 0; k < K; ++k) {
                    const auto& pair = cw[j][c][k];
                    if (!pair.is_array() || pair.size() != 2)
                        fail("parse-error", "codeword entries must be [re, im] pairs");
                    fam.codewords[j][c][k] = {json_number(pair[0], "re"), json_number(pair[1], "im")};
                }
            }
        }
        fam.validate();
        out.push_back(std::move(fam));
    }
    // the merge checks order coverage 1..R
    MergedAlphabet::merge(out);
    return out;
}

void save_codebook_family(const std::string& path, const std::vector<CodebookFamily>& families) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail("io-failure", "cannot open " + path + " for writing");
    f << codebook_to_json(families);
    if (!f.good()) fail("io-failure", "short write to " + path);
}

std::vector<CodebookFamily> load_codebook_family(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail("io-failure", "cannot open " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return codebook_from_json(buf.str());
}

}  // namespace hcpi

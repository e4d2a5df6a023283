#include "hcpi/channel.hpp"

#include <cmath>

#include "hcpi/error.hpp"

namespace hcpi {

FadingModel fading_model_from_string(const std::string& name) {
    if (name == "per-chip-iid") return FadingModel::PerChipIid;
    if (name == "block-per-unit") return FadingModel::BlockPerUnit;
    if (name == "none") return FadingModel::None;
    fail("config-invalid", "unknown fading model " + name);
}

std::string to_string(FadingModel model) {
    switch (model) {
        case FadingModel::PerChipIid: return "per-chip-iid";
        case FadingModel::BlockPerUnit: return "block-per-unit";
        case FadingModel::None: return "none";
    }
    return "?";
}

std::vector<cplx> ChannelRealization::unit_gains(int unit, int K) const {
    std::vector<cplx> out(static_cast<std::size_t>(J) * K);
    for (int j = 0; j < J; ++j)
        for (int k = 0; k < K; ++k) out[static_cast<std::size_t>(j) * K + k] = at(j, unit * K + k);
    return out;
}

ChannelRealization sample_channel(int J, int S, FadingModel model, RngStream& rng,
                                  int chips_per_unit) {
    ChannelRealization ch;
    ch.J = J;
    ch.S = S;
    ch.model = model;
    ch.h.resize(static_cast<std::size_t>(J) * S);
    switch (model) {
        case FadingModel::PerChipIid:
            for (auto& v : ch.h) v = rng.complex_gaussian(1.0);
            break;
        case FadingModel::BlockPerUnit:
            for (int j = 0; j < J; ++j)
                for (int s = 0; s < S; ++s) {
                    if (s % chips_per_unit == 0)
                        ch.h[static_cast<std::size_t>(j) * S + s] = rng.complex_gaussian(1.0);
                    else
                        ch.h[static_cast<std::size_t>(j) * S + s] =
                            ch.h[static_cast<std::size_t>(j) * S + s - 1];
                }
            break;
        case FadingModel::None:
            for (auto& v : ch.h) v = 1.0;
            break;
    }
    return ch;
}

std::vector<cplx> superpose(const std::vector<CodewordBlock>& blocks,
                            const ChannelRealization& h, const NoiseParams& noise,
                            RngStream& rng) {
    if (blocks.empty()) fail("dimension-mismatch", "no user blocks");
    const int S = blocks.front().n * blocks.front().K;
    if (static_cast<int>(blocks.size()) != h.J || h.S != S)
        fail("dimension-mismatch", "channel and block dimensions disagree");
    for (const auto& b : blocks)
        if (static_cast<int>(b.chips.size()) != S)
            fail("dimension-mismatch", "user blocks have different sizes");

    std::vector<cplx> y(S);
    for (int s = 0; s < S; ++s) {
        cplx acc{};
        for (std::size_t j = 0; j < blocks.size(); ++j)
            acc += h.at(static_cast<int>(j), s) * blocks[j].chips[s];
        y[s] = acc + rng.complex_gaussian(noise.n0);
    }
    return y;
}

NoiseParams snr_to_n0(double snr_db, const HcpiConfig& config) {
    BitBudget b = bit_budget(config);
    NoiseParams p;
    p.snr_db = snr_db;
    p.eb = static_cast<double>(config.t_total()) / b.m;
    p.n0 = p.eb * std::pow(10.0, -snr_db / 10.0);
    return p;
}

double es_per_chip_over_n0_db(const NoiseParams& noise, const HcpiConfig& config, int d_v) {
    (void)config;
    return 10.0 * std::log10(1.0 / (d_v * noise.n0));
}

}  // namespace hcpi

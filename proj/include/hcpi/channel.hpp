#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "hcpi/mapper.hpp"
#include "hcpi/rng.hpp"

namespace hcpi {

enum class FadingModel {
    PerChipIid,    // h[j][s] iid CN(0,1) per chip
    BlockPerUnit,  // constant over each K-chip detection unit
    None,          // h = 1 everywhere
};

FadingModel fading_model_from_string(const std::string& name);
std::string to_string(FadingModel model);

struct ChannelRealization {
    int J = 0;
    int S = 0;
    FadingModel model = FadingModel::PerChipIid;
    std::vector<cplx> h;  // J x S row-major

    cplx at(int j, int s) const { return h[static_cast<std::size_t>(j) * S + s]; }
    // gains for detection unit `unit` as a J x K row-major slice
    std::vector<cplx> unit_gains(int unit, int K) const;
};

struct NoiseParams {
    double n0 = 1.0;      // complex noise variance per chip
    double snr_db = 0.0;  // the Eb/N0 that produced it
    double eb = 1.0;      // energy per information bit
};

// chips_per_unit is only consulted by BlockPerUnit.
ChannelRealization sample_channel(int J, int S, FadingModel model, RngStream& rng,
                                  int chips_per_unit = 1);

// y[s] = sum_j h[j][s] c_j[s] + z[s],  z ~ CN(0, N0)
std::vector<cplx> superpose(const std::vector<CodewordBlock>& blocks,
                            const ChannelRealization& h, const NoiseParams& noise,
                            RngStream& rng);

// Eb/N0 convention: each user spends t_total() unit-energy codewords on m
// information bits per block, so Eb = t_total/m and N0 = Eb * 10^(-snr/10).
NoiseParams snr_to_n0(double snr_db, const HcpiConfig& config);

// Es/N0 per active chip implied by the same operating point (reporting aid).
double es_per_chip_over_n0_db(const NoiseParams& noise, const HcpiConfig& config, int d_v);

}  // namespace hcpi

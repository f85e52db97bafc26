#include "shearop/spectral.hpp"

#include "shearop/error.hpp"

namespace shearop::reference {

FeatureField sno_spectral_forward(const FeatureField& u, const SnoLayerParams& p,
                                  const WindowBank& bank) {
    if (!(u.grid == bank.grid())) throw StructuralError("sno layer: field grid differs from bank grid");
    if (u.channels != p.c_in || p.bands != bank.count() ||
        static_cast<int>(p.gamma.size()) != bank.scale_count())
        throw StructuralError("sno layer: parameter shape mismatch");
    const Grid2D& g = u.grid;
    const std::size_t nh = g.spectral_size();
    const SpectralField x = rfft2(u);
    SpectralField y(g, p.c_out);
    SpectralField band(g, p.c_in);
    for (int m = 0; m < p.bands; ++m) {
        const std::vector<double> window = bank.dense(m);
        const double gate = sigmoid(p.gamma[bank.scale_of(m)]);
        for (int c = 0; c < p.c_in; ++c)
            for (std::size_t k = 0; k < nh; ++k)
                band.coeffs[c * nh + k] = x.coeffs[c * nh + k] * window[k];
        for (int o = 0; o < p.c_out; ++o)
            for (int c = 0; c < p.c_in; ++c) {
                const cplx w = gate * p.weight(m, c, o);
                if (w == cplx{}) continue;
                for (std::size_t k = 0; k < nh; ++k) y.coeffs[o * nh + k] += w * band.coeffs[c * nh + k];
            }
    }
    return irfft2(y);
}

FeatureField fno_spectral_forward(const FeatureField& u, const FnoLayerParams& p) {
    const Grid2D& g = u.grid;
    if (u.channels != p.c_in) throw StructuralError("fno layer: channel count mismatch");
    if (2 * p.modes_x > g.nx || 2 * p.modes_y > g.ny)
        throw StructuralError("fno modes exceed grid Nyquist limits");
    const std::size_t nh = g.spectral_size();
    const SpectralField x = rfft2(u);
    SpectralField y(g, p.c_out);
    for (int block = 0; block < 2; ++block)
        for (int mx = 0; mx < p.modes_x; ++mx)
            for (int my = 0; my < p.modes_y; ++my) {
                const int row = block == 0 ? mx : g.nx - p.modes_x + mx;
                const std::size_t k = static_cast<std::size_t>(row) * g.nky() + my;
                for (int o = 0; o < p.c_out; ++o)
                    for (int c = 0; c < p.c_in; ++c)
                        y.coeffs[o * nh + k] += p.weights[p.index(block, mx, my, c, o)] * x.coeffs[c * nh + k];
            }
    return irfft2(y);
}

}  // namespace shearop::reference

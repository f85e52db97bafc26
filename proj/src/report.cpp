#include "shearop/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "shearop/error.hpp"
#include "shearop/image.hpp"

namespace shearop {

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fixed(double v, const char* fmt = "%.4f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw IoError("cannot write " + p.string());
    os << s;
    if (!os) throw IoError("write failed: " + p.string());
}

void check_split(const DatasetComparison& c) {
    if (c.sno.pairs != c.fno.pairs || c.sno.n_test_frames != c.fno.n_test_frames)
        throw StructuralError(c.dataset + ": SNO and FNO were evaluated on different test splits");
}

}  // namespace

double l2_ratio(const DatasetComparison& c) {
    if (c.sno.rel_l2 == c.fno.rel_l2) return 1.0;
    return c.sno.rel_l2 / c.fno.rel_l2;
}

std::string metrics_csv(const std::vector<MetricsRecord>& records) {
    std::string s = "dataset,arch,rel_l2,mse,mae,ssim,n_test_frames,seed\n";
    for (const MetricsRecord& r : records)
        s += r.dataset + "," + r.arch + "," + num(r.rel_l2) + "," + num(r.mse) + "," + num(r.mae) + "," +
             num(r.ssim) + "," + std::to_string(r.n_test_frames) + "," + std::to_string(r.seed) + "\n";
    return s;
}

std::string metrics_csv(const std::vector<DatasetComparison>& rows) {
    std::vector<MetricsRecord> records;
    for (const auto& c : rows)
        for (MetricsRecord r : {c.sno, c.fno}) {
            r.dataset = c.dataset;
            records.push_back(std::move(r));
        }
    return metrics_csv(records);
}

std::string markdown_table(const std::vector<DatasetComparison>& rows) {
    std::string s =
        "| Dataset | SNO L2 | FNO L2 | Ratio | SNO MSE | FNO MSE | SNO MAE | FNO MAE | SNO SSIM | FNO SSIM |\n"
        "|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& c : rows) {
        s += "| " + c.dataset + " | " + fixed(c.sno.rel_l2) + " | " + fixed(c.fno.rel_l2) + " | " +
             fixed(l2_ratio(c)) + " | " + fixed(c.sno.mse, "%.3e") + " | " + fixed(c.fno.mse, "%.3e") + " | " +
             fixed(c.sno.mae, "%.3e") + " | " + fixed(c.fno.mae, "%.3e") + " | " + fixed(c.sno.ssim) + " | " +
             fixed(c.fno.ssim) + " |\n";
    }
    return s;
}

void write_error_panel(const std::string& path, const DatasetComparison& c) {
    const Grid2D& g = c.truth.grid;
    if (!(c.sno_pred.grid == g) || !(c.fno_pred.grid == g))
        throw StructuralError("error panel: grid mismatch");
    const std::size_t n = g.size();
    std::vector<double> esno(n), efno(n), diff(n);
    for (std::size_t i = 0; i < n; ++i) {
        esno[i] = std::abs(c.sno_pred.values[i] - c.truth.values[i]);
        efno[i] = std::abs(c.fno_pred.values[i] - c.truth.values[i]);
        diff[i] = efno[i] - esno[i];
    }

    struct Tile {
        const char* name;
        const std::vector<double>* data;
        double lo, hi;
        bool diverging;
    };
    double flo = *std::min_element(c.truth.values.begin(), c.truth.values.end());
    double fhi = *std::max_element(c.truth.values.begin(), c.truth.values.end());
    for (const auto* f : {&c.sno_pred, &c.fno_pred}) {
        flo = std::min(flo, *std::min_element(f->values.begin(), f->values.end()));
        fhi = std::max(fhi, *std::max_element(f->values.begin(), f->values.end()));
    }
    const double ehi = std::max(*std::max_element(esno.begin(), esno.end()), *std::max_element(efno.begin(), efno.end()));
    double dmax = 0.0;
    for (double v : diff) dmax = std::max(dmax, std::abs(v));
    const std::vector<Tile> tiles = {
        {"truth", &c.truth.values, flo, fhi, false},   {"sno_pred", &c.sno_pred.values, flo, fhi, false},
        {"fno_pred", &c.fno_pred.values, flo, fhi, false}, {"abs_err_sno", &esno, 0.0, ehi, false},
        {"abs_err_fno", &efno, 0.0, ehi, false},        {"err_diff_fno_minus_sno", &diff, -dmax, dmax, true},
    };

    const int scale = std::max(1, (128 + std::max(g.nx, g.ny) - 1) / std::max(g.nx, g.ny));
    const int tw = g.ny * scale, th = g.nx * scale, gap = 4;
    const int width = static_cast<int>(tiles.size()) * tw + (static_cast<int>(tiles.size()) - 1) * gap;
    const int height = th;
    std::vector<std::uint8_t> px(static_cast<std::size_t>(width) * height * 3, 255);
    PngText text;
    for (std::size_t t = 0; t < tiles.size(); ++t) {
        const Tile& tile = tiles[t];
        const double span = tile.hi - tile.lo;
        const int x0 = static_cast<int>(t) * (tw + gap);
        // image rows run top to bottom with y increasing upward; columns follow x
        for (int py = 0; py < th; ++py)
            for (int pxl = 0; pxl < tw; ++pxl) {
                const int i = pxl / scale;
                const int j = g.ny - 1 - py / scale;
                const double v = (*tile.data)[static_cast<std::size_t>(i) * g.ny + j];
                Rgb col;
                if (tile.diverging)
                    col = diverging_color(tile.hi > 0.0 ? v / tile.hi : 0.0);
                else
                    col = sequential_color(span > 0.0 ? (v - tile.lo) / span : 0.0);
                std::uint8_t* p = px.data() + (static_cast<std::size_t>(py) * width + x0 + pxl) * 3;
                p[0] = col.r;
                p[1] = col.g;
                p[2] = col.b;
            }
        text.emplace_back(std::string(tile.name) + ".min", num(tile.lo));
        text.emplace_back(std::string(tile.name) + ".max", num(tile.hi));
    }
    text.emplace_back("dataset", c.dataset);
    text.emplace_back("panels", "truth, sno_pred, fno_pred, abs_err_sno, abs_err_fno, err_diff_fno_minus_sno");
    text.emplace_back("colormap", "sequential black-purple-orange-yellow; diverging blue-white-red");
    write_png_rgb(path, width, height, px, text);
}

void write_comparison(const std::string& dir, const std::vector<DatasetComparison>& rows) {
    for (const auto& c : rows) check_split(c);
    const std::filesystem::path d(dir);
    std::filesystem::create_directories(d);
    write_text(d / "metrics.csv", metrics_csv(rows));
    write_text(d / "table.md", markdown_table(rows));
    for (const auto& c : rows) write_error_panel((d / ("panel_" + c.dataset + ".png")).string(), c);
    std::string curves = "dataset,arch,epoch,train_mse,val_mse\n";
    for (const auto& c : rows)
        for (const auto& [arch, curve] : {std::pair{"sno", &c.sno_curve}, std::pair{"fno", &c.fno_curve}})
            for (const auto& r : *curve)
                curves += c.dataset + "," + arch + "," + std::to_string(r.epoch) + "," + num(r.train_mse) + "," +
                          num(r.val_mse) + "\n";
    write_text(d / "loss_curves.csv", curves);
}

}  // namespace shearop

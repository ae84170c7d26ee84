#include "snapattack/llsi_image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace snapattack::llsi {

BitGrid to_grid(const std::vector<std::uint8_t>& bits, int cols)
{
    if (cols < 1)
        throw std::invalid_argument("grid needs at least one column");
    BitGrid g;
    g.cols = cols;
    g.rows = static_cast<int>((bits.size() + cols - 1) / cols);
    g.bits.assign(static_cast<std::size_t>(g.rows) * cols, 0);
    std::copy(bits.begin(), bits.end(), g.bits.begin());
    return g;
}

CellImage render_cell(int bit, const ImagingConfig& cfg, bool flipped)
{
    CellImage cell(cfg.cell_h, cfg.cell_w, static_cast<float>(cfg.background));
    const Site* sites = bit ? cfg.sites1 : cfg.sites0;
    const double s2 = 2.0 * cfg.blob_sigma * cfg.blob_sigma;
    for (int y = 0; y < cfg.cell_h; ++y) {
        for (int x = 0; x < cfg.cell_w; ++x) {
            double v = cfg.background;
            if (y == 0 || x == 0)
                v += cfg.frame_amplitude;
            for (int k = 0; k < 2; ++k) {
                const double ry = y - sites[k].y, rx = x - sites[k].x;
                v += cfg.blob_amplitude * std::exp(-(ry * ry + rx * rx) / s2);
            }
            cell.at(y, flipped ? cfg.cell_w - 1 - x : x) = static_cast<float>(v);
        }
    }
    return cell;
}

SnapshotImage render_snapshot(const BitGrid& grid, const ImagingConfig& cfg, Rng& rng)
{
    if (grid.rows < 1 || grid.cols < 1)
        throw std::invalid_argument("render: empty grid");
    if (std::abs(cfg.drift_x) > cfg.border || std::abs(cfg.drift_y) > cfg.border)
        throw std::invalid_argument("render: drift exceeds the image border");
    if (cfg.noise_sigma < 0)
        throw std::invalid_argument("render: negative noise");
    const int H = grid.rows * cfg.cell_h + 2 * cfg.border;
    const int W = grid.cols * cfg.cell_w + 2 * cfg.border;
    SnapshotImage img(H, W, static_cast<float>(cfg.background));
    const CellImage proto[2][2] = {{render_cell(0, cfg, false), render_cell(0, cfg, true)},
                                   {render_cell(1, cfg, false), render_cell(1, cfg, true)}};
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            const CellImage& cell = proto[grid.at(r, c) ? 1 : 0][cfg.flipped(c) ? 1 : 0];
            const int y0 = cfg.border + r * cfg.cell_h + cfg.drift_y;
            const int x0 = cfg.border + c * cfg.cell_w + cfg.drift_x;
            for (int y = 0; y < cfg.cell_h; ++y)
                for (int x = 0; x < cfg.cell_w; ++x)
                    img.at(y0 + y, x0 + x) = cell.at(y, x);
        }
    }
    if (cfg.noise_sigma > 0)
        for (float& p : img.px)
            p = static_cast<float>(std::clamp(p + cfg.noise_sigma * rng.normal(), 0.0, 1.0));
    return img;
}

SnapshotImage render_reference(int rows, int cols, const ImagingConfig& cfg)
{
    const BitGrid g{rows, cols, std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(rows * cols, 0)))};
    ImagingConfig clean = cfg;
    // Frame only: blobs depend on the bits and would pull registration
    // towards the site spacing.
    clean.blob_amplitude = 0.0;
    clean.noise_sigma = 0.0;
    clean.drift_x = clean.drift_y = 0;
    Rng unused(0);
    return render_snapshot(g, clean, unused);
}

namespace {

constexpr double kEps = 1e-12;

void check_window(int window)
{
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("wiener2: window must be odd and >= 3");
}

} // namespace

// Direct window sums; the reference for the integral-image version.
Image wiener2_serial(const Image& img, int window)
{
    check_window(window);
    const int r = window / 2;
    std::vector<double> mean(img.px.size()), var(img.px.size());
    for (int y = 0; y < img.h; ++y) {
        for (int x = 0; x < img.w; ++x) {
            double s = 0, s2 = 0;
            int cnt = 0;
            for (int yy = std::max(0, y - r); yy <= std::min(img.h - 1, y + r); ++yy)
                for (int xx = std::max(0, x - r); xx <= std::min(img.w - 1, x + r); ++xx) {
                    const double v = img.at(yy, xx);
                    s += v;
                    s2 += v * v;
                    ++cnt;
                }
            const std::size_t i = static_cast<std::size_t>(y) * img.w + x;
            mean[i] = s / cnt;
            var[i] = std::max(0.0, s2 / cnt - mean[i] * mean[i]);
        }
    }
    double noise = 0;
    for (double v : var)
        noise += v;
    noise /= static_cast<double>(var.size());
    Image out(img.h, img.w);
    for (std::size_t i = 0; i < img.px.size(); ++i) {
        const double gain = std::max(var[i] - noise, 0.0) / std::max(var[i], kEps);
        out.px[i] = static_cast<float>(mean[i] + gain * (img.px[i] - mean[i]));
    }
    return out;
}

Image wiener2(const Image& img, int window)
{
    check_window(window);
    const int r = window / 2;
    const int H = img.h, W = img.w;
    // integral images with a zero first row/column
    std::vector<double> I((H + 1) * static_cast<std::size_t>(W + 1), 0.0), I2(I.size(), 0.0);
    auto idx = [W](int y, int x) { return static_cast<std::size_t>(y) * (W + 1) + x; };
    for (int y = 0; y < H; ++y) {
        double row = 0, row2 = 0;
        for (int x = 0; x < W; ++x) {
            const double v = img.at(y, x);
            row += v;
            row2 += v * v;
            I[idx(y + 1, x + 1)] = I[idx(y, x + 1)] + row;
            I2[idx(y + 1, x + 1)] = I2[idx(y, x + 1)] + row2;
        }
    }
    std::vector<double> mean(img.px.size()), var(img.px.size());
#pragma omp parallel for schedule(static)
    for (int y = 0; y < H; ++y) {
        const int y0 = std::max(0, y - r), y1 = std::min(H, y + r + 1);
        for (int x = 0; x < W; ++x) {
            const int x0 = std::max(0, x - r), x1 = std::min(W, x + r + 1);
            const double cnt = static_cast<double>((y1 - y0) * (x1 - x0));
            const double s = I[idx(y1, x1)] - I[idx(y0, x1)] - I[idx(y1, x0)] + I[idx(y0, x0)];
            const double s2 = I2[idx(y1, x1)] - I2[idx(y0, x1)] - I2[idx(y1, x0)] + I2[idx(y0, x0)];
            const std::size_t i = static_cast<std::size_t>(y) * W + x;
            mean[i] = s / cnt;
            var[i] = std::max(0.0, s2 / cnt - mean[i] * mean[i]);
        }
    }
    // Summed in a fixed order so the result does not depend on the thread count.
    double noise = 0;
    for (double v : var)
        noise += v;
    noise /= static_cast<double>(var.size());
    Image out(H, W);
    const long n = static_cast<long>(img.px.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        const double gain = std::max(var[i] - noise, 0.0) / std::max(var[i], kEps);
        out.px[i] = static_cast<float>(mean[i] + gain * (img.px[i] - mean[i]));
    }
    return out;
}

Peak xcorr2(const Image& img, const Image& tmpl)
{
    if (tmpl.h > img.h || tmpl.w > img.w)
        throw std::invalid_argument("xcorr2: template larger than image");
    Peak best{-std::numeric_limits<double>::infinity(), 0, 0};
    for (int dy = 0; dy + tmpl.h <= img.h; ++dy) {
        for (int dx = 0; dx + tmpl.w <= img.w; ++dx) {
            double s = 0;
            for (int y = 0; y < tmpl.h; ++y)
                for (int x = 0; x < tmpl.w; ++x)
                    s += static_cast<double>(img.at(dy + y, dx + x)) * tmpl.at(y, x);
            if (s > best.score)
                best = {s, dy, dx};
        }
    }
    return best;
}

namespace {

std::vector<float> centered(const Image& img)
{
    double mean = 0;
    for (float p : img.px)
        mean += p;
    mean /= static_cast<double>(std::max<std::size_t>(img.px.size(), 1));
    std::vector<float> out(img.px.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<float>(img.px[i] - mean);
    return out;
}

double shifted_product(const std::vector<float>& a, const std::vector<float>& b, int H, int W, int dy, int dx)
{
    // sum over the overlap of a(y, x) * b(y - dy, x - dx)
    const int y0 = std::max(0, dy), y1 = std::min(H, H + dy);
    const int x0 = std::max(0, dx), x1 = std::min(W, W + dx);
    double s = 0;
    for (int y = y0; y < y1; ++y) {
        const float* pa = a.data() + static_cast<std::size_t>(y) * W;
        const float* pb = b.data() + static_cast<std::size_t>(y - dy) * W - dx;
        float row = 0;
        for (int x = x0; x < x1; ++x)
            row += pa[x] * pb[x];
        s += row;
    }
    return s;
}

void check_same_shape(const Image& a, const Image& b)
{
    if (a.h != b.h || a.w != b.w)
        throw std::invalid_argument("register_translation: images differ in size");
}

// Strictly better score wins; equal scores prefer the smaller shift, then
// the earlier offset, so the result does not depend on evaluation order.
bool better(double s, int dy, int dx, double bs, int bdy, int bdx)
{
    if (s != bs)
        return s > bs;
    const int m = std::abs(dy) + std::abs(dx), bm = std::abs(bdy) + std::abs(bdx);
    if (m != bm)
        return m < bm;
    return std::make_pair(dy, dx) < std::make_pair(bdy, bdx);
}

} // namespace

Translation register_translation_serial(const Image& img, const Image& reference, int max_shift)
{
    check_same_shape(img, reference);
    const auto a = centered(img), b = centered(reference);
    double best = -std::numeric_limits<double>::infinity();
    int bdy = 0, bdx = 0;
    for (int dy = -max_shift; dy <= max_shift; ++dy)
        for (int dx = -max_shift; dx <= max_shift; ++dx) {
            const double s = shifted_product(a, b, img.h, img.w, dy, dx);
            if (better(s, dy, dx, best, bdy, bdx)) {
                best = s;
                bdy = dy;
                bdx = dx;
            }
        }
    return {bdx, bdy};
}

Translation register_translation(const Image& img, const Image& reference, int max_shift)
{
    check_same_shape(img, reference);
    const auto a = centered(img), b = centered(reference);
    const int side = 2 * max_shift + 1;
    std::vector<double> score(static_cast<std::size_t>(side) * side);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < side * side; ++k)
        score[k] = shifted_product(a, b, img.h, img.w, k / side - max_shift, k % side - max_shift);
    double best = -std::numeric_limits<double>::infinity();
    int bdy = 0, bdx = 0;
    for (int k = 0; k < side * side; ++k) {
        const int dy = k / side - max_shift, dx = k % side - max_shift;
        if (better(score[k], dy, dx, best, bdy, bdx)) {
            best = score[k];
            bdy = dy;
            bdx = dx;
        }
    }
    return {bdx, bdy};
}

TemplatePair build_templates(const CellImage& cell0, const CellImage& cell1, double threshold)
{
    if (cell0.h != cell1.h || cell0.w != cell1.w)
        throw std::invalid_argument("build_templates: exemplars differ in shape");
    Image diff(cell0.h, cell0.w);
    for (std::size_t i = 0; i < diff.px.size(); ++i)
        diff.px[i] = cell1.px[i] - cell0.px[i];
    const Image f = wiener2(diff, 3);
    float peak = 0;
    for (float v : f.px)
        peak = std::max(peak, std::abs(v));
    if (peak <= 0)
        throw std::invalid_argument("build_templates: exemplars are identical");
    const float cut = static_cast<float>(threshold) * peak;
    TemplatePair t{Image(f.h, f.w), Image(f.h, f.w)};
    for (std::size_t i = 0; i < f.px.size(); ++i) {
        t.mask1.px[i] = f.px[i] > cut ? 1.0f : 0.0f;
        t.mask0.px[i] = f.px[i] < -cut ? 1.0f : 0.0f;
    }
    return t;
}

namespace {

CellImage average(const std::vector<CellImage>& cells)
{
    if (cells.empty())
        throw std::invalid_argument("build_templates: no exemplars");
    Image acc(cells[0].h, cells[0].w);
    for (const CellImage& c : cells) {
        if (c.h != acc.h || c.w != acc.w)
            throw std::invalid_argument("build_templates: exemplars differ in shape");
        for (std::size_t i = 0; i < acc.px.size(); ++i)
            acc.px[i] += c.px[i];
    }
    for (float& p : acc.px)
        p /= static_cast<float>(cells.size());
    return acc;
}

} // namespace

TemplatePair build_templates(const std::vector<CellImage>& zeros, const std::vector<CellImage>& ones, double threshold)
{
    return build_templates(average(zeros), average(ones), threshold);
}

CellReading classify_cell(const CellImage& cell, const TemplatePair& t, bool flipped)
{
    Image c(cell.h, cell.w);
    double mean = 0;
    for (float p : cell.px)
        mean += p;
    mean /= static_cast<double>(cell.px.size());
    for (int y = 0; y < cell.h; ++y)
        for (int x = 0; x < cell.w; ++x)
            c.at(y, flipped ? cell.w - 1 - x : x) = static_cast<float>(cell.at(y, x) - mean);
    CellReading r;
    r.score0 = xcorr2(c, t.mask0).score;
    r.score1 = xcorr2(c, t.mask1).score;
    r.tie = r.score0 == r.score1;
    r.bit = r.score1 > r.score0 ? 1 : 0;
    return r;
}

namespace {

CellImage cut_cell(const SnapshotImage& snap, const ImagingConfig& cfg, Translation drift, int r, int c)
{
    const int m = cfg.margin;
    CellImage cell(cfg.cell_h + 2 * m, cfg.cell_w + 2 * m, static_cast<float>(cfg.background));
    const int y0 = cfg.border + r * cfg.cell_h + drift.dy - m;
    const int x0 = cfg.border + c * cfg.cell_w + drift.dx - m;
    for (int y = 0; y < cell.h; ++y)
        for (int x = 0; x < cell.w; ++x) {
            const int sy = y0 + y, sx = x0 + x;
            if (sy >= 0 && sy < snap.h && sx >= 0 && sx < snap.w)
                cell.at(y, x) = snap.at(sy, sx);
        }
    return cell;
}

Translation checked_drift(const SnapshotImage& snap, const ImagingConfig& cfg, const SnapshotImage& reference,
                          int rows, int cols, bool parallel)
{
    if (snap.h != rows * cfg.cell_h + 2 * cfg.border || snap.w != cols * cfg.cell_w + 2 * cfg.border)
        throw std::invalid_argument("extract: image size does not match the cell grid");
    const int half = std::min(cfg.cell_h, cfg.cell_w) / 2;
    // Search past half a cell so an oversized drift is reported, not aliased.
    const int search = std::max(half, cfg.border);
    const Translation t =
        parallel ? register_translation(snap, reference, search) : register_translation_serial(snap, reference, search);
    if (std::abs(t.dx) >= half || std::abs(t.dy) >= half)
        throw std::runtime_error("extract: drift of half a cell or more, registration unreliable");
    return t;
}

} // namespace

Extraction extract_bits_serial(const SnapshotImage& snap, const TemplatePair& t, const ImagingConfig& cfg,
                               const SnapshotImage& reference, int rows, int cols)
{
    Extraction e;
    e.drift = checked_drift(snap, cfg, reference, rows, cols, false);
    e.grid = {rows, cols, std::vector<std::uint8_t>(static_cast<std::size_t>(rows) * cols)};
    e.cells.resize(e.grid.bits.size());
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * cols + c;
            e.cells[i] = classify_cell(cut_cell(snap, cfg, e.drift, r, c), t, cfg.flipped(c));
            e.grid.bits[i] = static_cast<std::uint8_t>(e.cells[i].bit);
        }
    return e;
}

Extraction extract_bits(const SnapshotImage& snap, const TemplatePair& t, const ImagingConfig& cfg,
                        const SnapshotImage& reference, int rows, int cols)
{
    Extraction e;
    e.drift = checked_drift(snap, cfg, reference, rows, cols, true);
    e.grid = {rows, cols, std::vector<std::uint8_t>(static_cast<std::size_t>(rows) * cols)};
    e.cells.resize(e.grid.bits.size());
    const int total = rows * cols;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < total; ++i) {
        const int r = i / cols, c = i % cols;
        e.cells[i] = classify_cell(cut_cell(snap, cfg, e.drift, r, c), t, cfg.flipped(c));
        e.grid.bits[i] = static_cast<std::uint8_t>(e.cells[i].bit);
    }
    return e;
}

void write_pgm(const Image& img, std::ostream& out)
{
    out << "P5\n" << img.w << ' ' << img.h << "\n65535\n";
    std::string buf;
    buf.reserve(img.px.size() * 2);
    for (float p : img.px) {
        const auto v = static_cast<std::uint16_t>(std::lround(std::clamp(p, 0.0f, 1.0f) * 65535.0f));
        buf.push_back(static_cast<char>(v >> 8));
        buf.push_back(static_cast<char>(v & 0xff));
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

Image read_pgm(std::istream& in)
{
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic;
    auto skip_comments = [&] {
        in >> std::ws;
        while (in.peek() == '#') {
            std::string line;
            std::getline(in, line);
            in >> std::ws;
        }
    };
    skip_comments();
    in >> w;
    skip_comments();
    in >> h;
    skip_comments();
    in >> maxval;
    if (magic != "P5" || !in || w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
        throw std::runtime_error("PGM: unsupported header");
    in.get();
    Image img(h, w);
    const bool wide = maxval > 255;
    for (float& p : img.px) {
        unsigned v;
        if (wide) {
            const int hi = in.get(), lo = in.get();
            v = (static_cast<unsigned>(hi) << 8) | static_cast<unsigned>(lo);
        } else {
            v = static_cast<unsigned>(in.get());
        }
        p = static_cast<float>(v) / static_cast<float>(maxval);
    }
    if (!in)
        throw std::runtime_error("PGM: truncated pixel data");
    return img;
}

void write_pgm(const Image& img, const std::string& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open " + path);
    write_pgm(img, f);
}

Image read_pgm(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open " + path);
    return read_pgm(f);
}

void write_extraction_csv(const Extraction& e, std::ostream& out)
{
    out << "row,col,bit,score0,score1,tie_flag\n";
    for (int r = 0; r < e.grid.rows; ++r)
        for (int c = 0; c < e.grid.cols; ++c) {
            const CellReading& cr = e.cells[static_cast<std::size_t>(r) * e.grid.cols + c];
            out << r << ',' << c << ',' << cr.bit << ',' << cr.score0 << ',' << cr.score1 << ',' << (cr.tie ? 1 : 0)
                << '\n';
        }
}

} // namespace snapattack::llsi

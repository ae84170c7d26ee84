#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "snapattack/rng.hpp"

namespace snapattack::llsi {

// Row-major grayscale image, nominal range [0, 1].
struct Image {
    int h = 0;
    int w = 0;
    std::vector<float> px;

    Image() = default;
    Image(int height, int width, float fill = 0.0f) : h(height), w(width), px(static_cast<std::size_t>(height) * width, fill) {}

    float& at(int y, int x) { return px[static_cast<std::size_t>(y) * w + x]; }
    float at(int y, int x) const { return px[static_cast<std::size_t>(y) * w + x]; }
    bool operator==(const Image&) const = default;
};

using CellImage = Image;
using SnapshotImage = Image;

struct Site {
    double y;
    double x;
};

struct ImagingConfig {
    int cell_h = 16;
    int cell_w = 16;
    // Blob centres in cell coordinates. Logic 1 lights one diagonal, logic 0
    // the other; a horizontal mirror therefore swaps the two patterns.
    Site sites1[2] = {{4.5, 4.5}, {10.5, 10.5}};
    Site sites0[2] = {{4.5, 10.5}, {10.5, 4.5}};
    double blob_sigma = 1.5;
    double blob_amplitude = 0.6;
    double background = 0.1;
    // Bit-independent cell outline (top and left edge), what registration locks on to.
    double frame_amplitude = 0.25;
    double noise_sigma = 0.0;
    int drift_x = 0;
    int drift_y = 0;
    bool alternate_flip = true;
    // Blank border around the grid so drift never pushes cells off-image.
    int border = 8;
    // Extra pixels cut around each cell so templates can slide.
    int margin = 2;

    bool flipped(int col) const { return alternate_flip && (col % 2 == 1); }
};

// Grid of bits; cells laid out row-major.
struct BitGrid {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> bits;

    std::uint8_t at(int r, int c) const { return bits[static_cast<std::size_t>(r) * cols + c]; }
    bool operator==(const BitGrid&) const = default;
};

// Reshapes a bit vector into a grid with `cols` columns, zero-padded.
BitGrid to_grid(const std::vector<std::uint8_t>& bits, int cols);

// Noiseless single cell (no border, no drift).
CellImage render_cell(int bit, const ImagingConfig& cfg, bool flipped = false);

// Throws std::invalid_argument on an empty grid.
SnapshotImage render_snapshot(const BitGrid& grid, const ImagingConfig& cfg, Rng& rng);

// Golden scan for registration: the bit-independent cell frames only, no
// drift, no noise.
SnapshotImage render_reference(int rows, int cols, const ImagingConfig& cfg);

// Adaptive Wiener filter over a window x window neighbourhood.
// Throws std::invalid_argument unless window is odd and >= 3.
Image wiener2(const Image& img, int window);
Image wiener2_serial(const Image& img, int window);

struct Peak {
    double score = 0.0;
    int dy = 0;
    int dx = 0;
};

// Plain cross-correlation, valid region only: offsets (dy, dx) with the
// template fully inside img. Ties keep the first offset in row-major order.
Peak xcorr2(const Image& img, const Image& tmpl);

struct Translation {
    int dx = 0;
    int dy = 0;
    bool operator==(const Translation&) const = default;
};

// Translation (within +-max_shift) best aligning img to reference, so that
// img(y, x) ~ reference(y - dy, x - dx).
Translation register_translation(const Image& img, const Image& reference, int max_shift);
Translation register_translation_serial(const Image& img, const Image& reference, int max_shift);

struct TemplatePair {
    Image mask0;
    Image mask1;
};

// Throws std::invalid_argument on mismatched shapes or identical exemplars.
TemplatePair build_templates(const CellImage& cell0, const CellImage& cell1, double threshold = 0.3);
// Averages several labeled exemplars per logic value first (e.g. every cell
// of a template snapshot with known contents), which suppresses noise.
// Throws std::invalid_argument on an empty list or mismatched shapes.
TemplatePair build_templates(const std::vector<CellImage>& zeros, const std::vector<CellImage>& ones,
                             double threshold = 0.3);

struct CellReading {
    int bit = 0;
    double score0 = 0.0;
    double score1 = 0.0;
    bool tie = false;
};

CellReading classify_cell(const CellImage& cell, const TemplatePair& t, bool flipped);

struct Extraction {
    Translation drift;
    BitGrid grid;
    std::vector<CellReading> cells; // row-major
};

// Registers against `reference`, cuts every cell and classifies it.
// Throws std::runtime_error if the drift found reaches half a cell.
Extraction extract_bits(const SnapshotImage& snap, const TemplatePair& t, const ImagingConfig& cfg,
                        const SnapshotImage& reference, int rows, int cols);
Extraction extract_bits_serial(const SnapshotImage& snap, const TemplatePair& t, const ImagingConfig& cfg,
                               const SnapshotImage& reference, int rows, int cols);

// 16-bit binary PGM.
void write_pgm(const Image& img, std::ostream& out);
Image read_pgm(std::istream& in);
void write_pgm(const Image& img, const std::string& path);
Image read_pgm(const std::string& path);

// "row,col,bit,score0,score1,tie_flag"
void write_extraction_csv(const Extraction& e, std::ostream& out);

} // namespace snapattack::llsi

// dataio.hpp
//
// MNIST IDX ingestion, 28x28 -> 16x16 box resampling, intensity-to-latency
// encoding, and weight/metric exports.

#ifndef TNN_DATAIO_HPP
#define TNN_DATAIO_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tnn/column.hpp"
#include "tnn/errors.hpp"
#include "tnn/plasticity.hpp"
#include "tnn/temporal.hpp"

namespace tnn::io {

/// Row-major 8-bit image; rows() is the height.
using GrayImage = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Dataset {
    std::vector<GrayImage> images;
    std::vector<int> labels;
};

/// Reads an IDX3 image file (magic 2051).
std::vector<GrayImage> read_idx_images(const std::filesystem::path& path);
/// Reads an IDX1 label file (magic 2049).
std::vector<int> read_idx_labels(const std::filesystem::path& path);
/// Both files; throws CountMismatchError if they disagree on the sample count.
Dataset read_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Writers for the same container, used to build fixtures.
void write_idx_images(const std::filesystem::path& path, const std::vector<GrayImage>& images);
void write_idx_labels(const std::filesystem::path& path, const std::vector<int>& labels);

/// Area-weighted resampling to rows x cols, rounded to nearest.
GrayImage resize_box(const GrayImage& img, int rows, int cols);
/// 28x28 -> 16x16; throws std::invalid_argument for other input sizes.
GrayImage resize_16(const GrayImage& img);

struct EncoderConfig {
    int cutoff = 128;
    int levels = 8;

    void validate() const;
};

/// Pixel v >= cutoff spikes at floor((255 - v) * levels / 256), brighter first;
/// dimmer pixels stay silent. Row-major line order.
Volley encode_image(const GrayImage& img, const EncoderConfig& cfg = {});

/// Weight 0..7 to gray 0..255.
GrayImage weight_image(const WeightMatrix& w, int neuron, int side);

void write_pgm(const std::filesystem::path& path, const GrayImage& img);
GrayImage read_pgm(const std::filesystem::path& path);

/// weights.csv: header "neuron,w0,...,w{p-1}", then one row per neuron.
void write_weights_csv(const std::filesystem::path& path, const WeightMatrix& w);
WeightMatrix read_weights_csv(const std::filesystem::path& path);

/// Writes <dir>/weights.csv and <dir>/weights/neuron_XX.pgm (side x side).
void export_weights(const std::filesystem::path& dir, const WeightMatrix& w, int side = 16);

struct MetricRecord {
    std::int64_t sample = 0;
    std::optional<int> winner;
    std::optional<int> label;
    Reward reward = Reward::Unsupervised;
    double mean_abs_dw = 0;
};

/// JSON-lines stream, one record per gamma cycle.
class MetricsWriter {
public:
    explicit MetricsWriter(const std::filesystem::path& path);
    void write(const MetricRecord& r);

    static std::string format(const MetricRecord& r);

private:
    std::ofstream out_;
};

/// Creates a directory tree, mapping failures to IoError.
void ensure_directory(const std::filesystem::path& dir);

}  // namespace tnn::io

#endif  // TNN_DATAIO_HPP

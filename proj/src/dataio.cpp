#include "tnn/dataio.hpp"

#include <array>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace tnn::io {

namespace fs = std::filesystem;

namespace {

std::vector<unsigned char> slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t off) {
    return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
           std::uint32_t{b[off + 3]};
}

void put_be32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> b = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                                   static_cast<char>(v >> 8), static_cast<char>(v)};
    out.write(b.data(), 4);
}

std::ofstream open_for_write(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

// Overlap, in units of 1/(in*out) pixels, between output cell j and input cell i.
Eigen::MatrixXd box_weights(int out, int in) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(out, in);
    for (int j = 0; j < out; ++j) {
        const long lo = static_cast<long>(j) * in, hi = lo + in;
        for (int i = 0; i < in; ++i) {
            const long a = static_cast<long>(i) * out, b = a + out;
            const long overlap = std::min(hi, b) - std::max(lo, a);
            if (overlap > 0) r(j, i) = static_cast<double>(overlap);
        }
    }
    return r;
}

}  // namespace

std::vector<GrayImage> read_idx_images(const fs::path& path) {
    const auto b = slurp(path);
    if (b.size() < 16) throw LengthError(path.string() + ": IDX image header truncated");
    if (be32(b, 0) != 2051) {
        throw FormatError(path.string() + ": bad IDX image magic " + std::to_string(be32(b, 0)) + " (want 2051)");
    }
    const std::size_t count = be32(b, 4), rows = be32(b, 8), cols = be32(b, 12);
    const std::size_t need = 16 + count * rows * cols;
    if (b.size() < need) {
        throw LengthError(path.string() + ": pixel payload holds " + std::to_string(b.size() - 16) +
                          " bytes, header promises " + std::to_string(need - 16));
    }
    std::vector<GrayImage> images;
    images.reserve(count);
    const unsigned char* px = b.data() + 16;
    for (std::size_t k = 0; k < count; ++k, px += rows * cols) {
        images.emplace_back(Eigen::Map<const GrayImage>(px, static_cast<Eigen::Index>(rows),
                                                        static_cast<Eigen::Index>(cols)));
    }
    return images;
}

std::vector<int> read_idx_labels(const fs::path& path) {
    const auto b = slurp(path);
    if (b.size() < 8) throw LengthError(path.string() + ": IDX label header truncated");
    if (be32(b, 0) != 2049) {
        throw FormatError(path.string() + ": bad IDX label magic " + std::to_string(be32(b, 0)) + " (want 2049)");
    }
    const std::size_t count = be32(b, 4);
    if (b.size() < 8 + count) throw LengthError(path.string() + ": label payload truncated");
    return {b.begin() + 8, b.begin() + 8 + static_cast<std::ptrdiff_t>(count)};
}

Dataset read_idx(const fs::path& images, const fs::path& labels) {
    Dataset d{read_idx_images(images), read_idx_labels(labels)};
    if (d.images.size() != d.labels.size()) {
        throw CountMismatchError("image file holds " + std::to_string(d.images.size()) + " samples, label file " +
                                 std::to_string(d.labels.size()));
    }
    return d;
}

void write_idx_images(const fs::path& path, const std::vector<GrayImage>& images) {
    auto out = open_for_write(path, std::ios::binary);
    const auto rows = images.empty() ? 0 : images.front().rows();
    const auto cols = images.empty() ? 0 : images.front().cols();
    put_be32(out, 2051);
    put_be32(out, static_cast<std::uint32_t>(images.size()));
    put_be32(out, static_cast<std::uint32_t>(rows));
    put_be32(out, static_cast<std::uint32_t>(cols));
    for (const auto& img : images) {
        if (img.rows() != rows || img.cols() != cols) throw std::invalid_argument("IDX images must share one size");
        out.write(reinterpret_cast<const char*>(img.data()), img.size());
    }
}

void write_idx_labels(const fs::path& path, const std::vector<int>& labels) {
    auto out = open_for_write(path, std::ios::binary);
    put_be32(out, 2049);
    put_be32(out, static_cast<std::uint32_t>(labels.size()));
    for (int l : labels) out.put(static_cast<char>(l));
}

GrayImage resize_box(const GrayImage& img, int rows, int cols) {
    if (rows < 1 || cols < 1 || img.size() == 0) throw std::invalid_argument("empty resize");
    const Eigen::MatrixXd wr = box_weights(rows, static_cast<int>(img.rows()));
    const Eigen::MatrixXd wc = box_weights(cols, static_cast<int>(img.cols()));
    const Eigen::MatrixXd acc = wr * img.cast<double>() * wc.transpose();
    const double norm = static_cast<double>(img.rows()) * static_cast<double>(img.cols());
    // Weights and pixels are small integers, so acc is exact in double.
    return (acc / norm).array().round().cwiseMax(0.0).cwiseMin(255.0).cast<std::uint8_t>().matrix();
}

GrayImage resize_16(const GrayImage& img) {
    if (img.rows() != 28 || img.cols() != 28) {
        throw std::invalid_argument("resize_16 expects a 28x28 image, got " + std::to_string(img.rows()) + "x" +
                                    std::to_string(img.cols()));
    }
    return resize_box(img, 16, 16);
}

void EncoderConfig::validate() const {
    if (cutoff < 0 || cutoff > 255) throw std::invalid_argument("encoder cutoff outside 0..255");
    if (levels < 1 || levels > kLatestArrival + 1) throw std::invalid_argument("encoder levels outside 1..8");
}

Volley encode_image(const GrayImage& img, const EncoderConfig& cfg) {
    cfg.validate();
    Volley v(static_cast<std::size_t>(img.size()));
    for (Eigen::Index k = 0; k < img.size(); ++k) {
        const int px = img.data()[k];
        if (px < cfg.cutoff) continue;
        const int t = std::min((255 - px) * cfg.levels / 256, cfg.levels - 1);
        v[static_cast<std::size_t>(k)] = SpikeTime(t);
    }
    return v;
}

GrayImage weight_image(const WeightMatrix& w, int neuron, int side) {
    if (w.rows() != static_cast<Eigen::Index>(side) * side) {
        throw std::invalid_argument("weight column does not form a " + std::to_string(side) + "x" +
                                    std::to_string(side) + " image");
    }
    GrayImage img(side, side);
    for (int k = 0; k < side * side; ++k) {
        img.data()[k] = static_cast<std::uint8_t>((w(k, neuron) * 255 + kWMax / 2) / kWMax);
    }
    return img;
}

void write_pgm(const fs::path& path, const GrayImage& img) {
    auto out = open_for_write(path, std::ios::binary);
    out << "P5\n" << img.cols() << " " << img.rows() << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data()), img.size());
    if (!out) throw IoError("failed writing " + path.string());
}

GrayImage read_pgm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::string magic;
    int cols = 0, rows = 0, maxval = 0;
    in >> magic >> cols >> rows >> maxval;
    in.get();
    if (magic != "P5" || maxval != 255 || cols <= 0 || rows <= 0) throw FormatError(path.string() + ": not an 8-bit P5 PGM");
    GrayImage img(rows, cols);
    in.read(reinterpret_cast<char*>(img.data()), img.size());
    if (in.gcount() != img.size()) throw LengthError(path.string() + ": PGM payload truncated");
    return img;
}

void write_weights_csv(const fs::path& path, const WeightMatrix& w) {
    auto out = open_for_write(path);
    out << "neuron";
    for (Eigen::Index i = 0; i < w.rows(); ++i) out << ",w" << i;
    out << "\n";
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
        out << j;
        for (Eigen::Index i = 0; i < w.rows(); ++i) out << ',' << w(i, j);
        out << "\n";
    }
    if (!out) throw IoError("failed writing " + path.string());
}

WeightMatrix read_weights_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("neuron", 0) != 0) throw FormatError(path.string() + ": missing header");
    std::vector<std::vector<int>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');  // neuron index
        std::vector<int> values;
        while (std::getline(ss, cell, ',')) {
            int v = 0;
            try {
                v = std::stoi(cell);
            } catch (const std::exception&) {
                throw FormatError(path.string() + ": non-numeric weight '" + cell + "'");
            }
            if (v < 0 || v > kWMax) throw FormatError(path.string() + ": weight " + cell + " outside 0..7");
            values.push_back(v);
        }
        if (!rows.empty() && values.size() != rows.front().size()) {
            throw LengthError(path.string() + ": ragged weight rows");
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw LengthError(path.string() + ": no weight rows");
    WeightMatrix w(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j)
        for (std::size_t i = 0; i < rows[j].size(); ++i) w(i, j) = rows[j][i];
    return w;
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

void export_weights(const fs::path& dir, const WeightMatrix& w, int side) {
    ensure_directory(dir / "weights");
    write_weights_csv(dir / "weights.csv", w);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
        char name[32];
        std::snprintf(name, sizeof name, "neuron_%02d.pgm", static_cast<int>(j));
        write_pgm(dir / "weights" / name, weight_image(w, static_cast<int>(j), side));
    }
}

MetricsWriter::MetricsWriter(const fs::path& path) : out_(open_for_write(path)) {}

std::string MetricsWriter::format(const MetricRecord& r) {
    nlohmann::ordered_json j;
    j["sample"] = r.sample;
    j["winner"] = r.winner ? nlohmann::ordered_json(*r.winner) : nlohmann::ordered_json(nullptr);
    j["label"] = r.label ? nlohmann::ordered_json(*r.label) : nlohmann::ordered_json(nullptr);
    j["reward"] = r.reward == Reward::Unsupervised ? nlohmann::ordered_json(nullptr)
                                                   : nlohmann::ordered_json(reward_value(r.reward));
    j["mean_abs_dw"] = r.mean_abs_dw;
    return j.dump();
}

void MetricsWriter::write(const MetricRecord& r) { out_ << format(r) << '\n'; }

}  // namespace tnn::io

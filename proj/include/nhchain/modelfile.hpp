#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nhchain/io.hpp"
#include "nhchain/neuralnet.hpp"

namespace nhchain {

// On-disk model container, all multi-byte values little-endian:
//
//   bytes 0..7   magic "NHCMLP01"
//   u32          task (0 entropy regression, 1 chi regression, 2 chi class)
//   u32          input_dim
//   u32          n_hidden, then u32 x n_hidden hidden widths
//   u32          output_dim
//   u32          softmax flag (0/1)
//   f64 x input_dim   scaler means
//   f64 x input_dim   scaler standard deviations
//   u32          n_layers (= n_hidden + 1)
//   per layer:   u32 rows, u32 cols, f64 x rows*cols weights row-major,
//                f64 x rows biases
//   u64          training seed
//   u32          epochs run
//   f64          final training loss
//   f64          final validation loss

inline constexpr char kModelMagic[8] = {'N', 'H', 'C', 'M', 'L', 'P', '0', '1'};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}
inline void put_f64(std::string& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

struct ByteReader {
  const std::string& data;
  std::size_t pos = 0;
  std::string context;

  void need(std::size_t n) const {
    if (pos + n > data.size())
      throw std::runtime_error(context + ": truncated model file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= std::uint32_t(std::uint8_t(data[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= std::uint64_t(std::uint8_t(data[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
};

}  // namespace detail

inline std::string serialize_model(const Model& model) {
  const ArchSpec& arch = model.net.arch();
  std::string out(kModelMagic, sizeof(kModelMagic));
  detail::put_u32(out, static_cast<std::uint32_t>(model.task));
  detail::put_u32(out, std::uint32_t(arch.input_dim));
  detail::put_u32(out, std::uint32_t(arch.hidden.size()));
  for (int w : arch.hidden) detail::put_u32(out, std::uint32_t(w));
  detail::put_u32(out, std::uint32_t(arch.output_dim));
  detail::put_u32(out, arch.softmax_output ? 1 : 0);
  if (model.scaler.mean.size() != arch.input_dim ||
      model.scaler.stdev.size() != arch.input_dim)
    throw std::invalid_argument("serialize_model: scaler length mismatch");
  for (Eigen::Index i = 0; i < arch.input_dim; ++i)
    detail::put_f64(out, model.scaler.mean[i]);
  for (Eigen::Index i = 0; i < arch.input_dim; ++i)
    detail::put_f64(out, model.scaler.stdev[i]);
  detail::put_u32(out, std::uint32_t(model.net.layers().size()));
  for (const Layer& layer : model.net.layers()) {
    detail::put_u32(out, std::uint32_t(layer.w.rows()));
    detail::put_u32(out, std::uint32_t(layer.w.cols()));
    for (Eigen::Index r = 0; r < layer.w.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c)
        detail::put_f64(out, layer.w(r, c));
    for (Eigen::Index r = 0; r < layer.b.size(); ++r)
      detail::put_f64(out, layer.b[r]);
  }
  detail::put_u64(out, model.meta.seed);
  detail::put_u32(out, model.meta.epochs_run);
  detail::put_f64(out, model.meta.final_train_loss);
  detail::put_f64(out, model.meta.final_val_loss);
  return out;
}

inline Model deserialize_model(const std::string& bytes,
                               const std::string& context) {
  detail::ByteReader r{bytes, 0, context};
  r.need(sizeof(kModelMagic));
  if (std::memcmp(bytes.data(), kModelMagic, sizeof(kModelMagic)) != 0)
    throw std::runtime_error(context + ": not a model file (bad magic)");
  r.pos = sizeof(kModelMagic);

  Model model;
  std::uint32_t task = r.u32();
  if (task > 2) throw std::runtime_error(context + ": unknown task tag");
  model.task = static_cast<Task>(task);

  ArchSpec arch;
  arch.input_dim = int(r.u32());
  std::uint32_t n_hidden = r.u32();
  if (n_hidden > 64) throw std::runtime_error(context + ": absurd layer count");
  for (std::uint32_t i = 0; i < n_hidden; ++i)
    arch.hidden.push_back(int(r.u32()));
  arch.output_dim = int(r.u32());
  arch.softmax_output = r.u32() != 0;
  arch.validate();

  model.scaler.mean.resize(arch.input_dim);
  model.scaler.stdev.resize(arch.input_dim);
  for (int i = 0; i < arch.input_dim; ++i) model.scaler.mean[i] = r.f64();
  for (int i = 0; i < arch.input_dim; ++i) model.scaler.stdev[i] = r.f64();

  std::uint32_t n_layers = r.u32();
  if (n_layers != n_hidden + 1)
    throw std::runtime_error(context + ": layer count mismatch");
  std::vector<Layer> layers;
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    Layer layer;
    std::uint32_t rows = r.u32(), cols = r.u32();
    layer.w.resize(rows, cols);
    for (std::uint32_t row = 0; row < rows; ++row)
      for (std::uint32_t col = 0; col < cols; ++col)
        layer.w(row, col) = r.f64();
    layer.b.resize(rows);
    for (std::uint32_t row = 0; row < rows; ++row) layer.b[row] = r.f64();
    layers.push_back(std::move(layer));
  }
  model.net = Network::from_layers(arch, std::move(layers));

  model.meta.seed = r.u64();
  model.meta.epochs_run = r.u32();
  model.meta.final_train_loss = r.f64();
  model.meta.final_val_loss = r.f64();
  if (r.pos != bytes.size())
    throw std::runtime_error(context + ": trailing bytes in model file");
  return model;
}

inline void save_model(const Model& model, const std::string& path) {
  std::ofstream out = open_output(path);
  std::string bytes = serialize_model(model);
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline Model load_model(const std::string& path) {
  return deserialize_model(read_file(path), path);
}

}  // namespace nhchain

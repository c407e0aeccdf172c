#include <zlib.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "cccpde/model.hpp"

namespace cccpde::model {

namespace {

constexpr std::array<std::uint8_t, 8> kMagic = {'C', 'C', 'C', 'P', 'D', 'E', 0x1a, '\n'};
constexpr std::size_t kHeaderSize = kMagic.size() + 4 + 8;
constexpr std::size_t kTrailerSize = 4;

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f64s(std::span<const double> vs) {
    u64(vs.size());
    for (double v : vs) f64(v);
  }
  void matrix(const Matrix& m) {
    u64(m.rows());
    u64(m.cols());
    for (double v : m.values()) f64(v);
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::vector<double> f64s() {
    const std::uint64_t n = count();
    std::vector<double> out(n);
    for (double& v : out) v = f64();
    return out;
  }
  void matrix_into(Matrix& m) {
    const std::uint64_t r = u64();
    const std::uint64_t c = u64();
    if (r != m.rows() || c != m.cols()) {
      throw ModelFormatError("model file: parameter shape " + std::to_string(r) + "x" +
                             std::to_string(c) + " does not match " + m.shape_string());
    }
    for (double& v : m.values()) v = f64();
  }
  std::uint64_t count() {
    const std::uint64_t n = u64();
    if (n > remaining() / 8 + 1) throw ModelFormatError("model file: implausible element count");
    return n;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw ModelTruncatedError("model file: payload ends early");
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> frame(std::vector<std::uint8_t> payload) {
  Writer w;
  for (std::uint8_t b : kMagic) w.u8(b);
  w.u32(kModelFormatVersion);
  w.u64(payload.size());
  auto& out = w.bytes();
  out.insert(out.end(), payload.begin(), payload.end());
  const std::uint32_t crc = crc32_of(out);
  w.u32(crc);
  return std::move(out);
}

// Validates the envelope and returns the payload.
std::span<const std::uint8_t> unframe(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) throw ModelTruncatedError("model file: header is truncated");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw ModelFormatError("model file: bad magic bytes (not a model file)");
  }
  Reader header(bytes.subspan(kMagic.size(), 12));
  const std::uint32_t version = header.u32();
  if (version != kModelFormatVersion) {
    throw ModelVersionError("model file: format version " + std::to_string(version) +
                            " is not supported (expected " + std::to_string(kModelFormatVersion) +
                            ")");
  }
  const std::uint64_t payload_size = header.u64();
  if (payload_size > bytes.size() || bytes.size() - kHeaderSize - kTrailerSize < payload_size ||
      bytes.size() < kHeaderSize + kTrailerSize) {
    throw ModelTruncatedError("model file: expected " + std::to_string(payload_size) +
                              " payload bytes, file has " + std::to_string(bytes.size()));
  }
  const std::size_t body = kHeaderSize + payload_size;
  if (bytes.size() != body + kTrailerSize) {
    throw ModelFormatError("model file: trailing bytes after checksum");
  }
  Reader trailer(bytes.subspan(body, kTrailerSize));
  const std::uint32_t stored = trailer.u32();
  if (stored != crc32_of(bytes.subspan(0, body))) {
    throw ModelChecksumError("model file: CRC-32 checksum mismatch (file is corrupted)");
  }
  return bytes.subspan(kHeaderSize, payload_size);
}

void write_transform(Writer& w, const data::Standardizer& s) {
  w.f64s(s.mean());
  w.f64s(s.stddev());
}

data::Standardizer read_transform(Reader& r) {
  std::vector<double> mean = r.f64s();
  std::vector<double> sd = r.f64s();
  if (mean.empty() && sd.empty()) return {};
  try {
    return data::Standardizer(std::move(mean), std::move(sd));
  } catch (const std::exception& e) {
    throw ModelFormatError(std::string("model file: bad input transform: ") + e.what());
  }
}

void write_params(Writer& w, const nn::ParamList& params) {
  w.u64(params.size());
  for (const nn::Param* p : params) w.matrix(p->value);
}

void read_params(Reader& r, const nn::ParamList& params) {
  if (r.u64() != params.size()) throw ModelFormatError("model file: parameter count mismatch");
  for (nn::Param* p : params) r.matrix_into(p->value);
}

void expect_kind(Reader& r, ModelKind kind) {
  const std::uint32_t k = r.u32();
  if (k != static_cast<std::uint32_t>(kind)) {
    throw ModelFormatError("model file: holds model kind " + std::to_string(k) + ", expected " +
                           std::to_string(static_cast<std::uint32_t>(kind)));
  }
}

template <typename Fn>
auto wrap_structural(Fn&& fn) {
  try {
    return fn();
  } catch (const ModelFormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw ModelFormatError(std::string("model file: invalid contents: ") + e.what());
  }
}

}  // namespace

std::vector<std::uint8_t> encode_model(const CccpDeModel& model) {
  auto& m = const_cast<CccpDeModel&>(model);
  const CccpDeConfig& c = model.config();
  Writer w;
  w.u32(static_cast<std::uint32_t>(ModelKind::cccpde));
  w.u64(c.dim);
  w.u64(c.num_classes);
  w.u64(c.base_depth);
  w.u64(c.head_depth);
  w.u64(c.coupling_hidden);
  w.u64(c.disc_width);
  w.u64(c.disc_blocks);
  w.f64(c.dropout);
  w.u8(c.zero_init_output ? 1 : 0);
  write_transform(w, model.input_transform());
  w.f64s(model.class_counts());
  w.f64s(model.class_priors());
  w.f64s(model.feature_stddev());
  auto write_perms = [&](const flow::FlowStack& s) {
    for (const auto& layer : s.layers())
      for (std::size_t p : layer.permutation()) w.u64(p);
  };
  write_perms(model.base());
  for (const auto& head : model.heads()) write_perms(head);
  write_params(w, m.params());
  return frame(std::move(w.bytes()));
}

CccpDeModel decode_cccpde(std::span<const std::uint8_t> bytes) {
  Reader r(unframe(bytes));
  expect_kind(r, ModelKind::cccpde);
  CccpDeConfig c;
  c.dim = r.u64();
  c.num_classes = r.u64();
  c.base_depth = r.u64();
  c.head_depth = r.u64();
  c.coupling_hidden = r.u64();
  c.disc_width = r.u64();
  c.disc_blocks = r.u64();
  c.dropout = r.f64();
  c.zero_init_output = r.u8() != 0;
  if (c.dim > (1u << 20) || c.num_classes > (1u << 16) || c.coupling_hidden > (1u << 20) ||
      c.disc_width > (1u << 20) || c.base_depth > 1024 || c.head_depth > 1024 ||
      c.disc_blocks > 1024) {
    throw ModelFormatError("model file: implausible architecture");
  }
  return wrap_structural([&] {
    Rng scratch(0);
    CccpDeModel model(c, scratch);
    model.set_input_transform(read_transform(r));
    std::vector<double> counts = r.f64s();
    std::vector<double> priors = r.f64s();
    model.set_class_statistics(std::move(counts), std::move(priors));
    model.set_feature_stddev(r.f64s());
    auto read_perms = [&](flow::FlowStack& s) {
      for (auto& layer : s.layers()) {
        std::vector<std::size_t> perm(c.dim);
        for (auto& p : perm) p = r.u64();
        layer.set_permutation(std::move(perm));
      }
    };
    read_perms(model.base());
    for (auto& head : model.heads()) read_perms(head);
    read_params(r, model.params());
    if (r.remaining() != 0) throw ModelFormatError("model file: unread payload bytes");
    return model;
  });
}

std::vector<std::uint8_t> encode_model(const FfnnModel& model) {
  auto& m = const_cast<FfnnModel&>(model);
  const FfnnConfig& c = model.config();
  Writer w;
  w.u32(static_cast<std::uint32_t>(ModelKind::ffnn));
  w.u64(c.dim);
  w.u64(c.width);
  w.u64(c.blocks);
  w.f64(c.dropout);
  write_transform(w, model.input_transform());
  write_params(w, m.params());
  return frame(std::move(w.bytes()));
}

FfnnModel decode_ffnn(std::span<const std::uint8_t> bytes) {
  Reader r(unframe(bytes));
  expect_kind(r, ModelKind::ffnn);
  FfnnConfig c;
  c.dim = r.u64();
  c.width = r.u64();
  c.blocks = r.u64();
  c.dropout = r.f64();
  if (c.dim > (1u << 20) || c.width > (1u << 20) || c.blocks > 1024) {
    throw ModelFormatError("model file: implausible architecture");
  }
  return wrap_structural([&] {
    Rng scratch(0);
    FfnnModel model(c, scratch);
    model.set_input_transform(read_transform(r));
    read_params(r, model.params());
    if (r.remaining() != 0) throw ModelFormatError("model file: unread payload bytes");
    return model;
  });
}

ModelKind peek_kind(std::span<const std::uint8_t> bytes) {
  Reader r(unframe(bytes));
  const std::uint32_t k = r.u32();
  if (k != static_cast<std::uint32_t>(ModelKind::cccpde) &&
      k != static_cast<std::uint32_t>(ModelKind::ffnn)) {
    throw ModelFormatError("model file: unknown model kind " + std::to_string(k));
  }
  return static_cast<ModelKind>(k);
}

namespace {

void write_bytes(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for model file " + path.string());
}

}  // namespace

std::vector<std::uint8_t> read_model_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void save_model(const CccpDeModel& model, const std::filesystem::path& path) {
  write_bytes(encode_model(model), path);
}

void save_model(const FfnnModel& model, const std::filesystem::path& path) {
  write_bytes(encode_model(model), path);
}

CccpDeModel load_cccpde(const std::filesystem::path& path) {
  return decode_cccpde(read_model_bytes(path));
}

FfnnModel load_ffnn(const std::filesystem::path& path) { return decode_ffnn(read_model_bytes(path)); }

}  // namespace cccpde::model

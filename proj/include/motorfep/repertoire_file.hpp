#pragma once

// Repertoire container.
//
//   "MOTORFEP"            8-byte magic
//   u32 version           currently 1
//   u32 section count
//   sections              u32 tag, u64 payload length, payload
//   u64 checksum          FNV-1a 64 over every preceding byte
//
// All integers are little-endian; doubles are IEEE-754 binary64 stored as
// little-endian u64. Sections:
//
//   CONF  canonical config text (see config.hpp)
//   WGTS  u64 n_r, u64 n_o, u64 nnz, nnz x (u32 row, u32 col, f64), n_o*n_r f64
//   SIGS  u64 n, u64 n_r, n*n_r f64
//   KMAP  u64 n, u64 d, f64 eps, n*d f64                         (optional)
//   CLSF  u64 count, u64 d, f64 eps, count x (u64 len, label, d f64)  (optional)

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "chaining.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "kohonen.hpp"
#include "learner.hpp"
#include "reservoir.hpp"

namespace motorfep {

inline constexpr std::string_view kRepertoireMagic = "MOTORFEP";
inline constexpr std::uint32_t kRepertoireVersion = 1;

struct RepertoireFile {
  RunConfig config;
  ReservoirWeights weights;
  Repertoire repertoire;
  std::optional<KohonenMap> map;
  std::optional<ClassFilterSet> filters;

  friend bool operator==(const RepertoireFile&, const RepertoireFile&) = default;
};

namespace detail {

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::string_view s) { bytes_.append(s); }
  void f64s(std::span<const double> vs) {
    for (double v : vs) f64(v);
  }

  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string_view raw(std::size_t n) {
    need(n);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::vector<double> f64s(std::uint64_t n) {
    if (n > remaining() / 8) throw IoError("repertoire file: array exceeds payload");
    std::vector<double> out(n);
    for (auto& v : out) v = f64();
    return out;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw IoError("repertoire file is truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

constexpr std::uint32_t tag(const char (&s)[5]) {
  return std::uint32_t(static_cast<unsigned char>(s[0])) | std::uint32_t(static_cast<unsigned char>(s[1])) << 8 |
         std::uint32_t(static_cast<unsigned char>(s[2])) << 16 | std::uint32_t(static_cast<unsigned char>(s[3])) << 24;
}

}  // namespace detail

inline std::string serialize(const RepertoireFile& f) {
  using detail::ByteWriter;
  std::vector<std::pair<std::uint32_t, std::string>> sections;

  sections.emplace_back(detail::tag("CONF"), to_text(f.config));
  {
    ByteWriter w;
    w.u64(f.weights.n_r);
    w.u64(f.weights.n_o);
    w.u64(f.weights.recurrent.size());
    for (const auto& t : f.weights.recurrent) {
      w.u32(t.row);
      w.u32(t.col);
      w.f64(t.value);
    }
    w.f64s(f.weights.readout);
    sections.emplace_back(detail::tag("WGTS"), w.bytes());
  }
  {
    ByteWriter w;
    const std::size_t n_r = f.repertoire.size() ? f.repertoire.signals.front().size() : 0;
    w.u64(f.repertoire.size());
    w.u64(n_r);
    for (const auto& x : f.repertoire.signals) {
      if (x.size() != n_r) throw ShapeError("activation signals differ in length");
      w.f64s(x);
    }
    sections.emplace_back(detail::tag("SIGS"), w.bytes());
  }
  if (f.map) {
    ByteWriter w;
    w.u64(f.map->size());
    w.u64(f.map->dim());
    w.f64(f.map->eps());
    w.f64s(f.map->data());
    sections.emplace_back(detail::tag("KMAP"), w.bytes());
  }
  if (f.filters) {
    ByteWriter w;
    const auto& cf = *f.filters;
    w.u64(cf.size());
    w.u64(cf.filter(0).size());
    w.f64(cf.eps());
    for (std::size_t i = 0; i < cf.size(); ++i) {
      w.u64(cf.labels()[i].size());
      w.raw(cf.labels()[i]);
      w.f64s(cf.filter(i));
    }
    sections.emplace_back(detail::tag("CLSF"), w.bytes());
  }

  ByteWriter out;
  out.raw(kRepertoireMagic);
  out.u32(kRepertoireVersion);
  out.u32(static_cast<std::uint32_t>(sections.size()));
  for (const auto& [t, payload] : sections) {
    out.u32(t);
    out.u64(payload.size());
    out.raw(payload);
  }
  const std::uint64_t checksum = fnv1a64(out.bytes());
  out.u64(checksum);
  return out.bytes();
}

inline RepertoireFile deserialize(std::string_view bytes) {
  if (bytes.size() < kRepertoireMagic.size() + 16) throw IoError("repertoire file is truncated");
  const auto body = bytes.substr(0, bytes.size() - 8);
  detail::ByteReader trailer(bytes.substr(bytes.size() - 8));
  if (trailer.u64() != fnv1a64(body)) throw IoError("repertoire file checksum mismatch");

  detail::ByteReader r(body);
  if (r.raw(kRepertoireMagic.size()) != kRepertoireMagic) throw IoError("not a repertoire file");
  const auto version = r.u32();
  if (version != kRepertoireVersion)
    throw IoError("unsupported repertoire file version " + std::to_string(version));
  const auto count = r.u32();

  RepertoireFile f;
  bool have_conf = false, have_weights = false, have_signals = false;
  std::vector<std::vector<double>> signals;
  for (std::uint32_t s = 0; s < count; ++s) {
    const auto t = r.u32();
    const auto len = r.u64();
    if (len > r.remaining()) throw IoError("repertoire section exceeds file size");
    detail::ByteReader p(r.raw(len));
    if (t == detail::tag("CONF")) {
      f.config = parse_config(std::string(p.raw(len)));
      have_conf = true;
    } else if (t == detail::tag("WGTS")) {
      f.weights.n_r = p.u64();
      f.weights.n_o = p.u64();
      const auto nnz = p.u64();
      if (nnz > p.remaining() / 16) throw IoError("weights section is truncated");
      f.weights.recurrent.resize(nnz);
      for (auto& trip : f.weights.recurrent) {
        trip.row = p.u32();
        trip.col = p.u32();
        trip.value = p.f64();
      }
      f.weights.readout = p.f64s(f.weights.n_o * f.weights.n_r);
      have_weights = true;
    } else if (t == detail::tag("SIGS")) {
      const auto n = p.u64();
      const auto n_r = p.u64();
      if (n_r != 0 && n > p.remaining() / 8 / n_r) throw IoError("signals section is truncated");
      signals.resize(n);
      for (auto& x : signals) x = p.f64s(n_r);
      have_signals = true;
    } else if (t == detail::tag("KMAP")) {
      const auto n = p.u64();
      const auto d = p.u64();
      const double eps = p.f64();
      KohonenMap m(n, d, eps);
      const auto values = p.f64s(n * d);
      for (std::size_t i = 0; i < n; ++i) {
        auto row = m.filter(i);
        std::copy(values.begin() + i * d, values.begin() + (i + 1) * d, row.begin());
      }
      f.map = std::move(m);
    } else if (t == detail::tag("CLSF")) {
      const auto count_f = p.u64();
      const auto d = p.u64();
      const double eps = p.f64();
      std::vector<std::string> labels;
      std::vector<std::vector<double>> filters;
      for (std::uint64_t i = 0; i < count_f; ++i) {
        const auto len_l = p.u64();
        labels.emplace_back(p.raw(len_l));
        filters.push_back(p.f64s(d));
      }
      f.filters = ClassFilterSet(std::move(labels), std::move(filters), eps);
    } else {
      throw IoError("unknown repertoire section tag");
    }
  }
  if (!have_conf || !have_weights || !have_signals)
    throw IoError("repertoire file lacks a required section");
  f.repertoire = Repertoire{std::move(signals), f.config.learner().reservoir, f.config.arm(),
                            f.config.seed};
  return f;
}

inline void save_repertoire(const std::string& path, const RepertoireFile& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  const auto bytes = serialize(f);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline RepertoireFile load_repertoire(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open repertoire file '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

/// Human-readable listing of a repertoire file.
inline void dump(std::ostream& os, const RepertoireFile& f) {
  using detail::format_double;
  os << "# repertoire file version " << kRepertoireVersion << "\n";
  os << "# config (hash " << config_hash(f.config) << ")\n" << to_text(f.config);
  os << "# recurrent weights: " << f.weights.n_r << "x" << f.weights.n_r << ", "
     << f.weights.recurrent.size() << " non-zero (row col value)\n";
  for (const auto& t : f.weights.recurrent)
    os << t.row << ' ' << t.col << ' ' << format_double(t.value) << '\n';
  os << "# readout weights: " << f.weights.n_o << "x" << f.weights.n_r << '\n';
  for (std::size_t o = 0; o < f.weights.n_o; ++o) {
    for (std::size_t j = 0; j < f.weights.n_r; ++j)
      os << (j ? " " : "") << format_double(f.weights.readout_at(o, j));
    os << '\n';
  }
  os << "# activation signals: " << f.repertoire.size() << '\n';
  for (std::size_t k = 0; k < f.repertoire.size(); ++k) {
    os << k << ':';
    for (double v : f.repertoire.signals[k]) os << ' ' << format_double(v);
    os << '\n';
  }
  auto summarize = [&](std::span<const double> row) {
    double lo = row.empty() ? 0.0 : row[0], hi = lo, sum = 0.0;
    for (double v : row) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    os << " sum=" << format_double(sum) << " min=" << format_double(lo) << " max=" << format_double(hi)
       << " entropy=" << format_double(bernoulli_entropy(row)) << '\n';
  };
  if (f.map) {
    os << "# kohonen map: " << f.map->size() << " filters of " << f.map->dim() << " pixels\n";
    for (std::size_t i = 0; i < f.map->size(); ++i) {
      os << i << ':';
      summarize(f.map->filter(i));
    }
  }
  if (f.filters) {
    os << "# class filters: " << f.filters->size() << '\n';
    for (std::size_t i = 0; i < f.filters->size(); ++i) {
      os << f.filters->labels()[i] << ':';
      summarize(f.filters->filter(i));
    }
  }
}

}  // namespace motorfep

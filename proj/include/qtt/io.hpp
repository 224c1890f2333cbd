#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include <qtt/decomp.hpp>
#include <qtt/stream.hpp>
#include <qtt/tensor.hpp>
#include <qtt/transform.hpp>

namespace qtt {

enum class QttKind { tensor, qsvd, components };

struct QttContents {
  QttKind kind = QttKind::tensor;
  std::optional<QtTensor> tensor;
  std::optional<QSvd> qsvd;
  std::optional<ComponentList> components;
  std::optional<TransformSpec> transform;
};

namespace detail {

inline void append_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

inline void append_f64le(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(std::uint8_t(bits >> (8 * i)));
}

inline void append_slice(std::vector<std::uint8_t>& out,
                         const Eigen::MatrixXcd& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      append_f64le(out, s(i, j).real());
      append_f64le(out, s(i, j).imag());
    }
}

class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t size)
      : data_(data), size_(size) {}

  std::size_t remaining() const { return size_ - pos_; }

  std::uint32_t take_u32le() {
    require(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= std::uint32_t(data_[pos_ + std::size_t(i)]) << (8 * i);
    pos_ += 4;
    return v;
  }

  double take_f64le() {
    require(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= std::uint64_t(data_[pos_ + std::size_t(i)]) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }

  Eigen::MatrixXcd take_slice(Eigen::Index m, Eigen::Index p) {
    Eigen::MatrixXcd s(m, p);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < p; ++j) {
        const double re = take_f64le();
        const double im = take_f64le();
        s(i, j) = std::complex<double>(re, im);
      }
    return s;
  }

  std::string take_bytes(std::size_t n) {
    require(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  void require(std::size_t n) const {
    if (remaining() < n)
      throw std::runtime_error("truncated payload: file ends early");
  }

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

inline void write_file_atomic(const std::filesystem::path& path,
                              const std::vector<std::uint8_t>& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot open for writing: " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              std::streamsize(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open for reading: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

inline bool slice_has_nonzero_bits(const Eigen::MatrixXcd& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < s.cols(); ++j)
      if (std::bit_cast<std::uint64_t>(s(i, j).real()) != 0 ||
          std::bit_cast<std::uint64_t>(s(i, j).imag()) != 0)
        return true;
  return false;
}

inline nlohmann::json tensor_header_fields(const QtTensor& x) {
  nlohmann::json j;
  j["m"] = x.m();
  j["p"] = x.p();
  j["lo"] = x.lo();
  j["n_slices"] = std::int64_t(x.band_size());
  j["has_tail"] = slice_has_nonzero_bits(x.tail_slice()) ? 1 : 0;
  return j;
}

inline void append_tensor_payload(std::vector<std::uint8_t>& out,
                                  const QtTensor& x, bool has_tail) {
  for (const auto& s : x.band()) append_slice(out, s);
  if (has_tail) append_slice(out, x.tail_slice());
}

inline std::int64_t header_int(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer())
    throw std::runtime_error(std::string("malformed header: missing ") + key);
  return j.at(key).get<std::int64_t>();
}

inline QtTensor read_tensor_section(const nlohmann::json& fields,
                                    ByteReader& reader) {
  const std::int64_t m = header_int(fields, "m");
  const std::int64_t p = header_int(fields, "p");
  const std::int64_t lo = header_int(fields, "lo");
  const std::int64_t n = header_int(fields, "n_slices");
  const std::int64_t has_tail = header_int(fields, "has_tail");
  if (m < 1 || p < 1 || n < 0 || (has_tail != 0 && has_tail != 1))
    throw std::runtime_error("malformed header: bad tensor shape");
  std::vector<Eigen::MatrixXcd> band(static_cast<std::size_t>(n));
  for (auto& s : band) s = reader.take_slice(m, p);
  Eigen::MatrixXcd tail = has_tail ? reader.take_slice(m, p)
                                   : Eigen::MatrixXcd::Zero(m, p);
  return QtTensor::from_slices(lo, std::move(band), std::move(tail));
}

}  // namespace detail

// JSON descriptor for a transform, embeddable in file headers.
inline nlohmann::json transform_to_json(const TransformSpec& spec) {
  nlohmann::json j;
  switch (spec.kind()) {
    case TransformKind::identity: j["kind"] = "identity"; break;
    case TransformKind::dft_unitary: j["kind"] = "dft_unitary"; break;
    case TransformKind::dct2_orthonormal: j["kind"] = "dct2_orthonormal"; break;
    case TransformKind::custom: j["kind"] = "custom"; break;
  }
  j["n"] = std::int64_t(spec.size());
  if (spec.kind() == TransformKind::custom) {
    std::vector<double> flat;
    const auto& mat = spec.matrix();
    flat.reserve(std::size_t(2 * mat.size()));
    for (Eigen::Index i = 0; i < mat.rows(); ++i)
      for (Eigen::Index j2 = 0; j2 < mat.cols(); ++j2) {
        flat.push_back(mat(i, j2).real());
        flat.push_back(mat(i, j2).imag());
      }
    j["matrix"] = flat;
  }
  return j;
}

inline TransformSpec transform_from_json(const nlohmann::json& j) {
  if (!j.contains("kind") || !j.at("kind").is_string())
    throw std::runtime_error("malformed transform descriptor");
  const std::string kind = j.at("kind").get<std::string>();
  const std::int64_t n = detail::header_int(j, "n");
  if (n < 1) throw std::runtime_error("malformed transform descriptor");
  if (kind == "identity") return TransformSpec::identity(n);
  if (kind == "dft_unitary") return TransformSpec::dft_unitary(n);
  if (kind == "dct2_orthonormal") return TransformSpec::dct2_orthonormal(n);
  if (kind == "custom") {
    if (!j.contains("matrix") || !j.at("matrix").is_array() ||
        std::int64_t(j.at("matrix").size()) != 2 * n * n)
      throw std::runtime_error("malformed transform descriptor");
    Eigen::MatrixXcd mat(n, n);
    const auto& flat = j.at("matrix");
    std::size_t idx = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j2 = 0; j2 < n; ++j2) {
        const double re = flat.at(idx++).get<double>();
        const double im = flat.at(idx++).get<double>();
        mat(i, j2) = std::complex<double>(re, im);
      }
    return TransformSpec::custom(mat);
  }
  throw std::runtime_error("malformed transform descriptor: unknown kind");
}

namespace detail {

inline constexpr char kQttMagic[4] = {'Q', 'T', 'T', '1'};
inline constexpr char kSliceMagic[4] = {'Q', 'T', 'S', '1'};

inline std::vector<std::uint8_t> container_bytes(const nlohmann::json& header,
                                                 const char magic[4]) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), magic, magic + 4);
  const std::string text = header.dump();
  append_u32le(out, std::uint32_t(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  return out;
}

inline nlohmann::json open_container(ByteReader& reader, const char magic[4]) {
  const std::string got = reader.take_bytes(4);
  if (got != std::string(magic, 4))
    throw std::runtime_error("bad magic: not a recognized file");
  const std::uint32_t len = reader.take_u32le();
  const std::string text = reader.take_bytes(len);
  nlohmann::json header = nlohmann::json::parse(text, nullptr, false);
  if (header.is_discarded() || !header.is_object())
    throw std::runtime_error("malformed header: invalid JSON");
  return header;
}

inline void check_version(const nlohmann::json& header) {
  if (header_int(header, "version") != 1)
    throw std::runtime_error("unsupported version");
}

}  // namespace detail

inline void write_qtt(const std::filesystem::path& path, const QtTensor& x,
                      const std::optional<TransformSpec>& transform =
                          std::nullopt) {
  nlohmann::json header = detail::tensor_header_fields(x);
  header["kind"] = "tensor";
  header["version"] = 1;
  if (transform.has_value())
    header["transform"] = transform_to_json(*transform);
  auto bytes = detail::container_bytes(header, detail::kQttMagic);
  detail::append_tensor_payload(bytes, x, header.at("has_tail") == 1);
  detail::write_file_atomic(path, bytes);
}

inline void write_qtt(const std::filesystem::path& path, const QSvd& f,
                      const std::optional<TransformSpec>& transform =
                          std::nullopt) {
  nlohmann::json header;
  header["kind"] = "qsvd";
  header["version"] = 1;
  header["m"] = f.u.m();
  header["p"] = f.v.m();
  header["lo"] = f.s.lo();
  header["n_slices"] = std::int64_t(f.s.band_size());
  header["has_tail"] =
      detail::slice_has_nonzero_bits(f.s.tail_slice()) ? 1 : 0;
  nlohmann::json factors = nlohmann::json::array();
  const QtTensor* parts[3] = {&f.u, &f.s, &f.v};
  const char* names[3] = {"u", "s", "v"};
  for (int i = 0; i < 3; ++i) {
    nlohmann::json entry = detail::tensor_header_fields(*parts[i]);
    entry["name"] = names[i];
    factors.push_back(std::move(entry));
  }
  header["factors"] = std::move(factors);
  if (transform.has_value())
    header["transform"] = transform_to_json(*transform);
  auto bytes = detail::container_bytes(header, detail::kQttMagic);
  for (int i = 0; i < 3; ++i)
    detail::append_tensor_payload(
        bytes, *parts[i],
        header.at("factors").at(i).at("has_tail") == 1);
  detail::write_file_atomic(path, bytes);
}

inline void write_qtt(const std::filesystem::path& path,
                      const ComponentList& list) {
  nlohmann::json header;
  header["kind"] = "components";
  header["version"] = 1;
  const std::int64_t n = std::int64_t(list.items.size());
  const std::int64_t m = n > 0 ? list.items.front().u.size() : 0;
  const std::int64_t p = n > 0 ? list.items.front().v.size() : 0;
  header["m"] = m;
  header["p"] = p;
  header["lo"] = 0;
  header["n_slices"] = n;
  header["has_tail"] = 0;
  header["provenance"] =
      list.provenance == Provenance::streaming ? "streaming" : "offline";
  std::vector<std::int64_t> ls, ts;
  for (const auto& c : list.items) {
    ls.push_back(c.l);
    ts.push_back(c.t);
    if (c.u.size() != m || c.v.size() != p)
      throw std::invalid_argument("component vectors have mixed sizes");
  }
  header["l"] = ls;
  header["t"] = ts;
  auto bytes = detail::container_bytes(header, detail::kQttMagic);
  for (const auto& c : list.items) {
    detail::append_f64le(bytes, c.sigma);
    detail::append_f64le(bytes, 0.0);
    for (Eigen::Index i = 0; i < m; ++i) {
      detail::append_f64le(bytes, c.u(i).real());
      detail::append_f64le(bytes, c.u(i).imag());
    }
    for (Eigen::Index i = 0; i < p; ++i) {
      detail::append_f64le(bytes, c.v(i).real());
      detail::append_f64le(bytes, c.v(i).imag());
    }
  }
  detail::write_file_atomic(path, bytes);
}

inline QttContents read_qtt(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  detail::ByteReader reader(bytes.data(), bytes.size());
  const nlohmann::json header = detail::open_container(reader,
                                                       detail::kQttMagic);
  detail::check_version(header);
  if (!header.contains("kind") || !header.at("kind").is_string())
    throw std::runtime_error("malformed header: missing kind");
  const std::string kind = header.at("kind").get<std::string>();

  QttContents contents;
  if (header.contains("transform"))
    contents.transform = transform_from_json(header.at("transform"));

  if (kind == "tensor") {
    contents.kind = QttKind::tensor;
    contents.tensor = detail::read_tensor_section(header, reader);
  } else if (kind == "qsvd") {
    contents.kind = QttKind::qsvd;
    if (!header.contains("factors") || !header.at("factors").is_array() ||
        header.at("factors").size() != 3)
      throw std::runtime_error("malformed header: qsvd needs three factors");
    QtTensor u = detail::read_tensor_section(header.at("factors").at(0),
                                             reader);
    QtTensor s = detail::read_tensor_section(header.at("factors").at(1),
                                             reader);
    QtTensor v = detail::read_tensor_section(header.at("factors").at(2),
                                             reader);
    contents.qsvd = QSvd{std::move(u), std::move(s), std::move(v)};
  } else if (kind == "components") {
    contents.kind = QttKind::components;
    const std::int64_t n = detail::header_int(header, "n_slices");
    const std::int64_t m = detail::header_int(header, "m");
    const std::int64_t p = detail::header_int(header, "p");
    if (n < 0 || m < 0 || p < 0 || (n > 0 && (m < 1 || p < 1)))
      throw std::runtime_error("malformed header: bad component shape");
    if (!header.contains("l") || !header.at("l").is_array() ||
        std::int64_t(header.at("l").size()) != n || !header.contains("t") ||
        !header.at("t").is_array() ||
        std::int64_t(header.at("t").size()) != n)
      throw std::runtime_error("malformed header: bad component indices");
    ComponentList list;
    if (header.contains("provenance") &&
        header.at("provenance") == "streaming")
      list.provenance = Provenance::streaming;
    for (std::int64_t i = 0; i < n; ++i) {
      Component c;
      c.l = header.at("l").at(std::size_t(i)).get<std::int64_t>();
      c.t = header.at("t").at(std::size_t(i)).get<std::int64_t>();
      c.sigma = reader.take_f64le();
      reader.take_f64le();
      c.u = Eigen::VectorXcd(m);
      for (Eigen::Index r = 0; r < m; ++r) {
        const double re = reader.take_f64le();
        const double im = reader.take_f64le();
        c.u(r) = std::complex<double>(re, im);
      }
      c.v = Eigen::VectorXcd(p);
      for (Eigen::Index r = 0; r < p; ++r) {
        const double re = reader.take_f64le();
        const double im = reader.take_f64le();
        c.v(r) = std::complex<double>(re, im);
      }
      list.items.push_back(std::move(c));
    }
    contents.components = std::move(list);
  } else {
    throw std::runtime_error("malformed header: unknown kind");
  }

  if (reader.remaining() != 0)
    throw std::runtime_error("payload size mismatch: trailing bytes");
  return contents;
}

inline QtTensor read_qtt_tensor(const std::filesystem::path& path) {
  auto contents = read_qtt(path);
  if (contents.kind != QttKind::tensor)
    throw std::runtime_error("kind mismatch: expected a tensor file");
  return std::move(*contents.tensor);
}

inline QSvd read_qtt_qsvd(const std::filesystem::path& path) {
  auto contents = read_qtt(path);
  if (contents.kind != QttKind::qsvd)
    throw std::runtime_error("kind mismatch: expected a factorization file");
  return std::move(*contents.qsvd);
}

inline ComponentList read_qtt_components(const std::filesystem::path& path) {
  auto contents = read_qtt(path);
  if (contents.kind != QttKind::components)
    throw std::runtime_error("kind mismatch: expected a component file");
  return std::move(*contents.components);
}

// Single frontal slice files, named slice_{k}.mat by convention.
inline void write_slice_file(const std::filesystem::path& path,
                             std::int64_t k, const Eigen::MatrixXcd& slice) {
  nlohmann::json header;
  header["version"] = 1;
  header["m"] = slice.rows();
  header["p"] = slice.cols();
  header["k"] = k;
  auto bytes = detail::container_bytes(header, detail::kSliceMagic);
  detail::append_slice(bytes, slice);
  detail::write_file_atomic(path, bytes);
}

inline std::pair<std::int64_t, Eigen::MatrixXcd> read_slice_file(
    const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  detail::ByteReader reader(bytes.data(), bytes.size());
  const nlohmann::json header = detail::open_container(reader,
                                                       detail::kSliceMagic);
  detail::check_version(header);
  const std::int64_t m = detail::header_int(header, "m");
  const std::int64_t p = detail::header_int(header, "p");
  const std::int64_t k = detail::header_int(header, "k");
  if (m < 1 || p < 1)
    throw std::runtime_error("malformed header: bad slice shape");
  Eigen::MatrixXcd slice = reader.take_slice(m, p);
  if (reader.remaining() != 0)
    throw std::runtime_error("payload size mismatch: trailing bytes");
  return {k, std::move(slice)};
}

inline std::filesystem::path slice_file_name(std::int64_t k) {
  return "slice_" + std::to_string(k) + ".mat";
}

// Oracle over a directory of slice_{k}.mat files; absent indices read as
// zero slices, so the stored support is finite.
inline SliceOracle oracle_from_directory(const std::filesystem::path& dir,
                                         Eigen::Index m, Eigen::Index p,
                                         double total_energy) {
  auto slice = [dir, m, p](std::int64_t k) -> Eigen::MatrixXcd {
    const auto path = dir / slice_file_name(k);
    if (!std::filesystem::exists(path)) return Eigen::MatrixXcd::Zero(m, p);
    auto [stored_k, s] = read_slice_file(path);
    if (stored_k != k)
      throw std::runtime_error("slice file index disagrees with its name");
    return s;
  };
  return SliceOracle::with_total_energy(m, p, slice, total_energy);
}

// Component table as CSV with full round-trip precision.
inline void write_components_csv(const std::filesystem::path& path,
                                 const ComponentList& list) {
  std::string text = "n,sigma,l,t";
  const std::int64_t m =
      list.items.empty() ? 0 : std::int64_t(list.items.front().u.size());
  const std::int64_t p =
      list.items.empty() ? 0 : std::int64_t(list.items.front().v.size());
  for (std::int64_t i = 0; i < m; ++i)
    text += ",u_re_" + std::to_string(i) + ",u_im_" + std::to_string(i);
  for (std::int64_t i = 0; i < p; ++i)
    text += ",v_re_" + std::to_string(i) + ",v_im_" + std::to_string(i);
  text += "\n";

  char buf[64];
  auto append_num = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    text += buf;
  };
  std::int64_t n = 0;
  for (const auto& c : list.items) {
    if (c.u.size() != m || c.v.size() != p)
      throw std::invalid_argument("component vectors have mixed sizes");
    text += std::to_string(n++);
    append_num(c.sigma);
    text += "," + std::to_string(c.l) + "," + std::to_string(c.t);
    for (Eigen::Index i = 0; i < m; ++i) {
      append_num(c.u(i).real());
      append_num(c.u(i).imag());
    }
    for (Eigen::Index i = 0; i < p; ++i) {
      append_num(c.v(i).real());
      append_num(c.v(i).imag());
    }
    text += "\n";
  }
  detail::write_file_atomic(
      path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

}  // namespace qtt

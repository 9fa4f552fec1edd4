#include "snnse/model/container.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "snnse/error.hpp"
#include "snnse/util/kv.hpp"

namespace snnse::model {
namespace {

constexpr char kMagic[8] = {'S', 'N', 'N', 'S', 'E', 'C', 'K', '\0'};

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

class Writer {
 public:
  template <typename T>
  void put(T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    out.insert(out.end(), b, b + sizeof(T));
  }
  void put_bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    out.insert(out.end(), c, c + n);
  }
  std::vector<unsigned char> out;
};

class Reader {
 public:
  Reader(const unsigned char* data, std::size_t size) : data_(data), size_(size) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_ + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  const unsigned char* take(std::size_t n) {
    need(n);
    const unsigned char* p = data_ + pos_;
    pos_ += n;
    return p;
  }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (n > size_ - pos_) throw CheckpointError("truncated container");
  }
  const unsigned char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

std::size_t dtype_size(DType d) { return d == DType::kF32 ? 4 : 8; }

template <typename Real>
ContainerEntry make_entry(const std::string& name, const engine::Tensor<Real>& t, DType d) {
  ContainerEntry e{name, d, t.shape(), {}};
  e.bytes.resize(t.size() * sizeof(Real));
  if (!e.bytes.empty()) std::memcpy(e.bytes.data(), t.data(), e.bytes.size());
  return e;
}

template <typename Real>
engine::Tensor<Real> read_entry(const ContainerEntry& e) {
  std::vector<Real> v(e.bytes.size() / sizeof(Real));
  if (!v.empty()) std::memcpy(v.data(), e.bytes.data(), e.bytes.size());
  return engine::Tensor<Real>(e.shape, std::move(v));
}

}  // namespace

std::uint32_t crc32_of(const unsigned char* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void Container::put(const std::string& name, const engine::Tensor<float>& t) {
  entries.push_back(make_entry(name, t, DType::kF32));
}
void Container::put(const std::string& name, const engine::Tensor<double>& t) {
  entries.push_back(make_entry(name, t, DType::kF64));
}

const ContainerEntry* Container::find(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

engine::Tensor<float> Container::get_f32(const std::string& name) const {
  const auto* e = find(name);
  if (!e) throw CheckpointError("missing tensor '" + name + "'");
  if (e->dtype != DType::kF32) throw CheckpointError("tensor '" + name + "' is not f32");
  return read_entry<float>(*e);
}

engine::Tensor<double> Container::get_f64(const std::string& name) const {
  const auto* e = find(name);
  if (!e) throw CheckpointError("missing tensor '" + name + "'");
  if (e->dtype != DType::kF64) throw CheckpointError("tensor '" + name + "' is not f64");
  return read_entry<double>(*e);
}

const std::string& Container::meta(const std::string& key) const {
  const auto it = metadata.find(key);
  if (it == metadata.end()) throw CheckpointError("missing metadata '" + key + "'");
  return it->second;
}

std::vector<unsigned char> encode_container(const Container& c, std::uint32_t version) {
  Writer w;
  w.put_bytes(kMagic, sizeof kMagic);
  w.put<std::uint32_t>(version);
  std::string meta;
  for (const auto& [k, v] : c.metadata) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw CheckpointError("metadata '" + k + "' is not representable");
    }
    meta += k + "=" + v + "\n";
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(meta.size()));
  w.put_bytes(meta.data(), meta.size());
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.entries.size()));
  std::uint64_t offset = 0;
  for (const auto& e : c.entries) {
    if (e.bytes.size() != engine::element_count(e.shape) * dtype_size(e.dtype)) {
      throw CheckpointError("tensor '" + e.name + "' size does not match its shape");
    }
    w.put<std::uint16_t>(static_cast<std::uint16_t>(e.name.size()));
    w.put_bytes(e.name.data(), e.name.size());
    w.put<std::uint8_t>(static_cast<std::uint8_t>(e.dtype));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(e.shape.size()));
    for (auto d : e.shape) w.put<std::uint64_t>(d);
    w.put<std::uint64_t>(offset);
    w.put<std::uint64_t>(e.bytes.size());
    offset += e.bytes.size();
  }
  w.put<std::uint64_t>(offset);
  for (const auto& e : c.entries) w.put_bytes(e.bytes.data(), e.bytes.size());
  w.put<std::uint32_t>(crc32_of(w.out.data(), w.out.size()));
  return std::move(w.out);
}

Container decode_container(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < sizeof kMagic + 8 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw CheckpointError("not a snnse container (bad magic or truncated)");
  }
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + body, 4);
  if (crc32_of(bytes.data(), body) != stored) throw CheckpointError("checksum mismatch");

  Reader r(bytes.data(), body);
  r.take(sizeof kMagic);
  const auto version = r.get<std::uint32_t>();
  if (version != kContainerVersion) {
    throw CheckpointError("unsupported container version " + std::to_string(version) +
                          " (expected " + std::to_string(kContainerVersion) + ")");
  }
  Container c;
  const auto meta_len = r.get<std::uint32_t>();
  c.metadata = util::parse_key_values(r.get_string(meta_len));
  const auto count = r.get<std::uint32_t>();
  struct Dir {
    std::uint64_t offset, size;
  };
  std::vector<Dir> dir;
  for (std::uint32_t i = 0; i < count; ++i) {
    ContainerEntry e;
    e.name = r.get_string(r.get<std::uint16_t>());
    const auto dtype = r.get<std::uint8_t>();
    if (dtype > 1) throw CheckpointError("tensor '" + e.name + "': unknown dtype");
    e.dtype = static_cast<DType>(dtype);
    const auto rank = r.get<std::uint8_t>();
    for (int d = 0; d < rank; ++d) e.shape.push_back(r.get<std::uint64_t>());
    const auto offset = r.get<std::uint64_t>();
    const auto size = r.get<std::uint64_t>();
    if (size != engine::element_count(e.shape) * dtype_size(e.dtype)) {
      throw CheckpointError("tensor '" + e.name + "': size does not match shape");
    }
    dir.push_back({offset, size});
    c.entries.push_back(std::move(e));
  }
  const auto data_len = r.get<std::uint64_t>();
  const unsigned char* data = r.take(data_len);
  if (r.position() != body) throw CheckpointError("trailing bytes in container");
  for (std::size_t i = 0; i < dir.size(); ++i) {
    if (dir[i].offset > data_len || dir[i].size > data_len - dir[i].offset) {
      throw CheckpointError("tensor '" + c.entries[i].name + "' out of bounds");
    }
    c.entries[i].bytes.assign(data + dir[i].offset, data + dir[i].offset + dir[i].size);
  }
  return c;
}

void write_container(const Container& c, const std::filesystem::path& path) {
  const auto bytes = encode_container(c);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + tmp);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                         std::istreambuf_iterator<char>());
  return decode_container(bytes);
}

}  // namespace snnse::model

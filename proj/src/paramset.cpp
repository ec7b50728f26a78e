#include "aclab/paramset.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aclab {

void ParamSet::add(const std::string& name, Tensor t) {
  if (contains(name)) throw std::invalid_argument("ParamSet: duplicate name '" + name + "'");
  entries_.push_back({name, std::move(t)});
}

bool ParamSet::contains(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return true;
  return false;
}

Tensor& ParamSet::get(const std::string& name) {
  for (auto& e : entries_)
    if (e.name == name) return e.tensor;
  throw std::invalid_argument("ParamSet: no entry named '" + name + "'");
}

const Tensor& ParamSet::get(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e.tensor;
  throw std::invalid_argument("ParamSet: no entry named '" + name + "'");
}

std::int64_t ParamSet::total_elements() const {
  std::int64_t n = 0;
  for (const auto& e : entries_) n += e.tensor.numel();
  return n;
}

std::vector<double> ParamSet::flatten() const {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(total_elements()));
  for (const auto& e : entries_) flat.insert(flat.end(), e.tensor.data.begin(), e.tensor.data.end());
  return flat;
}

void ParamSet::unflatten(const std::vector<double>& flat) {
  if (static_cast<std::int64_t>(flat.size()) != total_elements())
    throw std::invalid_argument("ParamSet::unflatten: got " + std::to_string(flat.size()) +
                                " values, need " + std::to_string(total_elements()));
  std::size_t off = 0;
  for (auto& e : entries_) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off),
              flat.begin() + static_cast<std::ptrdiff_t>(off + e.tensor.data.size()),
              e.tensor.data.begin());
    off += e.tensor.data.size();
  }
}

bool ParamSet::operator==(const ParamSet& o) const {
  if (entries_.size() != o.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != o.entries_[i].name) return false;
    if (entries_[i].tensor.shape != o.entries_[i].tensor.shape) return false;
    if (entries_[i].tensor.data != o.entries_[i].tensor.data) return false;
  }
  return true;
}

// ---------------------------------------------------------------- format --

namespace {

void put_u16(std::ostream& os, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  os.write(b, 2);
}

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  os.write(b, 8);
}

[[noreturn]] void fail_at(std::istream& is, const std::string& what) {
  const auto off = is.tellg();
  throw std::runtime_error("checkpoint: " + what + " at byte offset " +
                           (off >= 0 ? std::to_string(static_cast<long long>(off)) : std::string("<eof>")));
}

void get_bytes(std::istream& is, char* dst, std::size_t n, const char* what) {
  is.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) fail_at(is, std::string("truncated ") + what);
}

std::uint16_t get_u16(std::istream& is, const char* what) {
  unsigned char b[2];
  get_bytes(is, reinterpret_cast<char*>(b), 2, what);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(std::istream& is, const char* what) {
  unsigned char b[4];
  get_bytes(is, reinterpret_cast<char*>(b), 4, what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

double get_f64(std::istream& is, const char* what) {
  unsigned char b[8];
  get_bytes(is, reinterpret_cast<char*>(b), 8, what);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void write_checkpoint(const ParamSet& ps, std::ostream& os) {
  os.write("ACLS", 4);
  put_u16(os, kCheckpointVersion);
  put_u32(os, static_cast<std::uint32_t>(ps.size()));
  for (const auto& e : ps) {
    if (e.name.size() > 0xffff)
      throw std::invalid_argument("checkpoint: name too long: " + e.name.substr(0, 32) + "...");
    put_u16(os, static_cast<std::uint16_t>(e.name.size()));
    os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    const auto& sh = e.tensor.shape;
    if (sh.size() > 0xff) throw std::invalid_argument("checkpoint: rank too large");
    os.put(static_cast<char>(sh.size()));
    for (int d : sh) put_u32(os, static_cast<std::uint32_t>(d));
    for (double v : e.tensor.data) put_f64(os, v);
  }
  if (!os) throw std::runtime_error("checkpoint: write failed");
}

ParamSet read_checkpoint(std::istream& is) {
  char magic[4];
  get_bytes(is, magic, 4, "magic");
  if (std::memcmp(magic, "ACLS", 4) != 0) fail_at(is, "bad magic (expected \"ACLS\")");
  const std::uint16_t version = get_u16(is, "version");
  if (version != kCheckpointVersion)
    fail_at(is, "unsupported version " + std::to_string(version));
  const std::uint32_t count = get_u32(is, "entry count");
  ParamSet ps;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t name_len = get_u16(is, "name length");
    std::string name(name_len, '\0');
    get_bytes(is, name.data(), name_len, "name");
    unsigned char rank;
    get_bytes(is, reinterpret_cast<char*>(&rank), 1, "rank");
    std::vector<int> shape(rank);
    std::int64_t numel = 1;
    for (unsigned r = 0; r < rank; ++r) {
      const std::uint32_t d = get_u32(is, "dimension");
      if (d == 0 || d > (1u << 30)) fail_at(is, "invalid dimension " + std::to_string(d));
      shape[r] = static_cast<int>(d);
      numel *= d;
    }
    std::vector<double> data(static_cast<std::size_t>(numel));
    for (auto& v : data) v = get_f64(is, "payload");
    ps.add(name, Tensor(std::move(shape), std::move(data)));
  }
  return ps;
}

void save_checkpoint(const ParamSet& ps, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open for write: " + path);
  write_checkpoint(ps, os);
}

ParamSet load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
  return read_checkpoint(is);
}

}  // namespace aclab

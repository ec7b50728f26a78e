#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "aclab/tensor.hpp"

namespace aclab {

// Named, ordered collection of tensors making up one network's parameters.
// Iteration order is insertion order and is what flatten/unflatten and the
// checkpoint format serialize, so it is stable by construction.
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Tensor tensor;
  };

  void add(const std::string& name, Tensor t);
  bool contains(const std::string& name) const;

  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;

  std::size_t size() const { return entries_.size(); }
  std::int64_t total_elements() const;

  std::vector<Entry>::iterator begin() { return entries_.begin(); }
  std::vector<Entry>::iterator end() { return entries_.end(); }
  std::vector<Entry>::const_iterator begin() const { return entries_.begin(); }
  std::vector<Entry>::const_iterator end() const { return entries_.end(); }
  const Entry& entry(std::size_t i) const { return entries_[i]; }

  // Concatenates all tensors in iteration order; round-trips bit-for-bit.
  std::vector<double> flatten() const;
  void unflatten(const std::vector<double>& flat);

  bool operator==(const ParamSet& o) const;

 private:
  std::vector<Entry> entries_;
};

// Binary checkpoint container. Layout: magic "ACLS", version u16, entry count
// u32, then per entry: name length u16, UTF-8 name, rank u8, dims u32 each,
// payload as little-endian IEEE-754 f64. All integers little-endian.
inline constexpr std::uint16_t kCheckpointVersion = 1;

void save_checkpoint(const ParamSet& ps, const std::string& path);
ParamSet load_checkpoint(const std::string& path);

void write_checkpoint(const ParamSet& ps, std::ostream& os);
ParamSet read_checkpoint(std::istream& is);

}  // namespace aclab

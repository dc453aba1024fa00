// Little-endian binary stream helpers shared by dataset records and
// checkpoints.
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "egoact/common.hpp"

namespace egoact {

inline void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_f64s(std::ostream& os, const double* p, size_t n) {
  os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

inline void write_str(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  require_io(bool(is), "binary read failed (u32)");
  return v;
}

inline std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  require_io(bool(is), "binary read failed (u64)");
  return v;
}

inline double read_f64(std::istream& is) {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  require_io(bool(is), "binary read failed (f64)");
  return v;
}

inline void read_f64s(std::istream& is, double* p, size_t n) {
  is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
  require_io(bool(is), "binary read failed (f64 array)");
}

inline std::string read_str(std::istream& is) {
  std::uint32_t n = read_u32(is);
  require_io(n < (1u << 20), "binary read: unreasonable string length");
  std::string s(n, '\0');
  is.read(s.data(), n);
  require_io(bool(is), "binary read failed (string)");
  return s;
}

}  // namespace egoact

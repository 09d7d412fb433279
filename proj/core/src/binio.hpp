#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "newsrec/error.hpp"

// Little-endian primitive encoding shared by the LKEM and LKCK formats.
namespace newsrec::binio {

inline void put_u16(std::ostream& out, uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>(v >> 8)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

inline void put_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_f32(std::ostream& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

inline void put_f64(std::ostream& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

inline bool get_bytes(std::istream& in, void* dst, size_t n) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  return static_cast<size_t>(in.gcount()) == n;
}

inline bool get_u16(std::istream& in, uint16_t* v) {
  unsigned char b[2];
  if (!get_bytes(in, b, 2)) return false;
  *v = static_cast<uint16_t>(b[0] | (b[1] << 8));
  return true;
}

inline bool get_u32(std::istream& in, uint32_t* v) {
  unsigned char b[4];
  if (!get_bytes(in, b, 4)) return false;
  *v = 0;
  for (int i = 3; i >= 0; --i) *v = (*v << 8) | b[i];
  return true;
}

inline bool get_f32(std::istream& in, float* v) {
  uint32_t bits;
  if (!get_u32(in, &bits)) return false;
  std::memcpy(v, &bits, 4);
  return true;
}

inline bool get_f64(std::istream& in, double* v) {
  unsigned char b[8];
  if (!get_bytes(in, b, 8)) return false;
  uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | b[i];
  std::memcpy(v, &bits, 8);
  return true;
}

}  // namespace newsrec::binio

// SPDX-License-Identifier: Apache-2.0
#include "pnprl/core/npy.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pnprl {

namespace {

void write_header(std::ofstream& f, const std::string& descr, int h, int w) {
  std::ostringstream dict;
  dict << "{'descr': '" << descr << "', 'fortran_order': False, 'shape': ("
       << h << ", " << w << "), }";
  std::string d = dict.str();
  const std::size_t base = 10 + d.size() + 1;      // magic+ver+len + dict + \n
  const std::size_t pad = (64 - base % 64) % 64;
  d.append(pad, ' ');
  d.push_back('\n');
  const std::uint16_t hlen = static_cast<std::uint16_t>(d.size());
  f.write("\x93NUMPY\x01\x00", 8);
  f.write(reinterpret_cast<const char*>(&hlen), 2);
  f.write(d.data(), static_cast<std::streamsize>(d.size()));
}

std::string header_value(const std::string& dict, const std::string& key) {
  const auto kpos = dict.find("'" + key + "'");
  if (kpos == std::string::npos) throw std::runtime_error("npy: missing " + key);
  auto pos = dict.find(':', kpos);
  pos = dict.find_first_not_of(" ", pos + 1);
  auto end = dict.find_first_of(",}", pos);
  // shape tuple contains commas; grab to the closing paren instead
  if (dict[pos] == '(') end = dict.find(')', pos) + 1;
  return dict.substr(pos, end - pos);
}

}  // namespace

void npy_save(const std::string& path, const Tensor& t) {
  if (t.rank() != 2) throw std::invalid_argument("npy_save: rank-2 expected");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("npy_save: cannot open " + path);
  write_header(f, "<f8", t.dim(0), t.dim(1));
  f.write(reinterpret_cast<const char*>(t.data()),
          static_cast<std::streamsize>(t.numel() * sizeof(double)));
}

void npy_save_u8(const std::string& path, const std::vector<std::uint8_t>& data,
                 int h, int w) {
  if (data.size() != static_cast<std::size_t>(h) * w)
    throw std::invalid_argument("npy_save_u8: size mismatch");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("npy_save_u8: cannot open " + path);
  write_header(f, "|u1", h, w);
  f.write(reinterpret_cast<const char*>(data.data()),
          static_cast<std::streamsize>(data.size()));
}

Tensor npy_load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("npy_load: cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (std::memcmp(magic, "\x93NUMPY", 6) != 0)
    throw std::runtime_error("npy_load: bad magic in " + path);
  std::uint16_t hlen = 0;
  f.read(reinterpret_cast<char*>(&hlen), 2);
  std::string dict(hlen, '\0');
  f.read(dict.data(), hlen);

  const std::string descr = header_value(dict, "descr");
  const std::string order = header_value(dict, "fortran_order");
  if (order.find("False") == std::string::npos)
    throw std::runtime_error("npy_load: fortran order unsupported");
  std::string shape = header_value(dict, "shape");
  int h = 0, w = 0;
  if (std::sscanf(shape.c_str(), "(%d, %d)", &h, &w) != 2 || h <= 0 || w <= 0)
    throw std::runtime_error("npy_load: expected 2-D shape, got " + shape);

  Tensor t({h, w});
  const std::size_t n = t.numel();
  if (descr.find("<f8") != std::string::npos) {
    f.read(reinterpret_cast<char*>(t.data()),
           static_cast<std::streamsize>(n * sizeof(double)));
  } else if (descr.find("|u1") != std::string::npos) {
    std::vector<std::uint8_t> raw(n);
    f.read(reinterpret_cast<char*>(raw.data()),
           static_cast<std::streamsize>(n));
    for (std::size_t i = 0; i < n; ++i) t[i] = raw[i];
  } else {
    throw std::runtime_error("npy_load: unsupported dtype " + descr);
  }
  if (!f) throw std::runtime_error("npy_load: truncated file " + path);
  return t;
}

}  // namespace pnprl

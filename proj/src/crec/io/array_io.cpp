#include "crec/io/array_io.hpp"

#include <cstring>
#include <fstream>
#include <vector>

namespace crec {

namespace {

constexpr char kMagic[7] = "\x93NUMPY";

void write_npy(const Tensor& t, const std::string& path, bool f32) {
  std::string shape = "(";
  for (size_t i = 0; i < t.shape.size(); ++i) shape += std::to_string(t.shape[i]) + ",";
  shape += ")";
  std::string header = std::string("{'descr': '") + (f32 ? "<f4" : "<f8") +
                       "', 'fortran_order': False, 'shape': " + shape + ", }";
  const size_t unpadded = 10 + header.size() + 1;
  header += std::string((64 - unpadded % 64) % 64, ' ');
  header += '\n';

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArrayIoError("array_io: cannot open for write: " + path);
  out.write(kMagic, 6);
  const char ver[2] = {1, 0};
  out.write(ver, 2);
  const std::uint16_t hlen = static_cast<std::uint16_t>(header.size());
  out.write(reinterpret_cast<const char*>(&hlen), 2);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  if (f32) {
    std::vector<float> buf(t.v.begin(), t.v.end());
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  } else {
    out.write(reinterpret_cast<const char*>(t.v.data()),
              static_cast<std::streamsize>(t.v.size() * sizeof(double)));
  }
  if (!out) throw ArrayIoError("array_io: write failed: " + path);
}

}  // namespace

void save_array(const Tensor& t, const std::string& path) { write_npy(t, path, false); }
void save_array_f32(const Tensor& t, const std::string& path) { write_npy(t, path, true); }

Tensor load_array(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArrayIoError("array_io: cannot open: " + path);
  char magic[6];
  char ver[2];
  in.read(magic, 6);
  in.read(ver, 2);
  if (!in || std::memcmp(magic, kMagic, 6) != 0)
    throw ArrayIoError("array_io: not an NPY file: " + path);
  std::uint32_t hlen = 0;
  if (ver[0] == 1) {
    std::uint16_t h16 = 0;
    in.read(reinterpret_cast<char*>(&h16), 2);
    hlen = h16;
  } else {
    in.read(reinterpret_cast<char*>(&hlen), 4);
  }
  std::string header(hlen, '\0');
  in.read(header.data(), hlen);
  if (!in) throw ArrayIoError("array_io: truncated header: " + path);

  bool f32;
  if (header.find("'<f8'") != std::string::npos) f32 = false;
  else if (header.find("'<f4'") != std::string::npos) f32 = true;
  else throw ArrayIoError("array_io: unsupported dtype in " + path + ": " + header);
  if (header.find("'fortran_order': False") == std::string::npos)
    throw ArrayIoError("array_io: fortran order not supported: " + path);

  const size_t po = header.find('(');
  const size_t pc = header.find(')', po);
  if (po == std::string::npos || pc == std::string::npos)
    throw ArrayIoError("array_io: malformed shape in " + path);
  std::vector<int> shape;
  std::string tok;
  for (size_t i = po + 1; i <= pc; ++i) {
    const char c = header[i];
    if (c >= '0' && c <= '9') {
      tok += c;
    } else if (!tok.empty()) {
      shape.push_back(std::stoi(tok));
      tok.clear();
    }
  }

  Tensor t(shape);
  if (f32) {
    std::vector<float> buf(t.v.size());
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    for (size_t i = 0; i < buf.size(); ++i) t.v[i] = buf[i];
  } else {
    in.read(reinterpret_cast<char*>(t.v.data()),
            static_cast<std::streamsize>(t.v.size() * sizeof(double)));
  }
  if (!in) throw ArrayIoError("array_io: truncated data: " + path);
  return t;
}

}  // namespace crec

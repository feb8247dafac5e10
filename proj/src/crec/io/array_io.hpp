#pragma once

#include <string>

#include "crec/core/tensor.hpp"

namespace crec {

struct ArrayIoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// NPY v1.0 files (little-endian, C order). save_array writes '<f8';
// save_array_f32 writes '<f4' for bulky data like images. load_array accepts
// either and always returns doubles.
void save_array(const Tensor& t, const std::string& path);
void save_array_f32(const Tensor& t, const std::string& path);
Tensor load_array(const std::string& path);

}  // namespace crec

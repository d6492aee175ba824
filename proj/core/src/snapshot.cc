/*
 * Copyright 2026 The cui Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "cui/error.h"
#include "cui/model.h"

namespace cui {
namespace {

constexpr std::array<char, 4> kMagic = {'C', 'U', 'I', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

// Byte-wise little-endian encoding, independent of host order.
void put_u32(std::ofstream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 4);
}

void put_f64(std::ofstream& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 8);
}

std::uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    fail(ErrorCode::kIoError, "snapshot truncated");
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::ifstream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) {
    fail(ErrorCode::kIoError, "snapshot truncated");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace

void save_snapshot(const ModelParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kFormatVersion);
  const ModelShape& s = params.shape();
  put_u32(out, static_cast<std::uint32_t>(s.input_dim));
  put_u32(out, static_cast<std::uint32_t>(s.hidden_dim));
  put_u32(out, static_cast<std::uint32_t>(s.num_classes));
  for (double v : params.stack().flatten()) put_f64(out, v);
  if (!out) fail(ErrorCode::kIoError, "write failed for " + path.string());
}

ModelParams load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    fail(ErrorCode::kIoError, path.string() + " is not a model snapshot");
  }
  const std::uint32_t version = get_u32(in);
  if (version != kFormatVersion) {
    fail(ErrorCode::kIoError, "unsupported snapshot version " + std::to_string(version));
  }
  ModelShape shape;
  shape.input_dim = static_cast<int>(get_u32(in));
  shape.hidden_dim = static_cast<int>(get_u32(in));
  shape.num_classes = static_cast<int>(get_u32(in));
  ModelParams params(shape);
  LayerStack stack = params.stack();
  std::vector<double> flat(stack.parameter_count());
  for (double& v : flat) v = get_f64(in);
  if (in.peek() != std::char_traits<char>::eof()) {
    fail(ErrorCode::kIoError, "trailing bytes in snapshot " + path.string());
  }
  stack.assign_flat(flat);
  params.assign(stack);
  return params;
}

}  // namespace cui

// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctp/matrix.hpp"

namespace ctp::io {

/// CTP1 layout (all integers little-endian):
///
///   offset 0   magic "CTP1"
///   offset 4   u8 version = 1
///   offset 5   u8 dtype (0 = f32, 1 = f64)
///   offset 6   u8 ndim in [1, 4]
///   offset 7   u8 reserved = 0
///   offset 8   ndim x u64 dims
///   then       row-major payload
enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

std::size_t dtype_size(DType dtype);

struct Tensor {
    DType dtype = DType::f32;
    std::vector<std::uint64_t> dims;
    std::vector<double> values;  ///< widened from f32 when dtype is f32; exact

    std::uint64_t element_count() const;
    bool operator==(const Tensor&) const = default;
};

enum class TensorErrorKind {
    io,
    bad_magic,
    unsupported_version,
    unsupported_dtype,
    unsupported_order,
    bad_header,
    truncated,
    trailing_bytes,
};

class TensorFormatError : public std::runtime_error {
public:
    TensorFormatError(TensorErrorKind kind, const std::string& message) : std::runtime_error(message), m_kind(kind) {}
    TensorErrorKind kind() const { return m_kind; }

private:
    TensorErrorKind m_kind;
};

/// Reads a CTP1 file, or a version 1 .npy file holding little-endian f4/f8 in C order.
Tensor read_tensor(const std::filesystem::path& path);
Tensor parse_tensor(const std::vector<std::uint8_t>& bytes, const std::string& origin = "<memory>");

void write_tensor(const std::filesystem::path& path, const Tensor& tensor);
std::vector<std::uint8_t> encode_tensor(const Tensor& tensor);

/// Requires a 2-D tensor (ShapeError otherwise).
Matrix to_matrix(const Tensor& tensor);
Tensor from_matrix(const Matrix& matrix, DType dtype);

}  // namespace ctp::io

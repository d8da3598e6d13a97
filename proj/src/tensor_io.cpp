// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctp/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <regex>
#include <sstream>

#include "ctp/errors.hpp"

namespace ctp::io {

namespace {

constexpr char kMagic[4] = {'C', 'T', 'P', '1'};
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kFixedHeader = 8;
constexpr char kNpyMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T load_le(const std::uint8_t* p) {
    std::uint8_t buf[sizeof(T)];
    for (std::size_t k = 0; k < sizeof(T); ++k) {
        buf[k] = std::endian::native == std::endian::little ? p[k] : p[sizeof(T) - 1 - k];
    }
    T out;
    std::memcpy(&out, buf, sizeof(T));
    return out;
}

template <typename T>
void store_le(std::vector<std::uint8_t>& out, T value) {
    std::uint8_t buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    for (std::size_t k = 0; k < sizeof(T); ++k) {
        out.push_back(std::endian::native == std::endian::little ? buf[k] : buf[sizeof(T) - 1 - k]);
    }
}

[[noreturn]] void fail(TensorErrorKind kind, const std::string& origin, const std::string& what) {
    throw TensorFormatError(kind, origin + ": " + what);
}

std::uint64_t product(const std::vector<std::uint64_t>& dims) {
    std::uint64_t p = 1;
    for (const auto d : dims) {
        p *= d;
    }
    return p;
}

std::vector<double> decode_payload(const std::uint8_t* data, std::size_t available, DType dtype,
                                   std::uint64_t count, std::size_t header_bytes, const std::string& origin) {
    const std::uint64_t need = count * dtype_size(dtype);
    if (available < need) {
        fail(TensorErrorKind::truncated, origin,
             "truncated payload: expected " + std::to_string(header_bytes + need) + " bytes, found " +
                 std::to_string(header_bytes + available));
    }
    if (available > need) {
        fail(TensorErrorKind::trailing_bytes, origin,
             "unexpected trailing data: expected " + std::to_string(header_bytes + need) + " bytes, found " +
                 std::to_string(header_bytes + available));
    }
    std::vector<double> values(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        values[k] = dtype == DType::f32 ? static_cast<double>(load_le<float>(data + k * 4))
                                        : load_le<double>(data + k * 8);
    }
    return values;
}

Tensor parse_ctp1(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
    if (bytes.size() < kFixedHeader) {
        fail(TensorErrorKind::truncated, origin,
             "truncated header: expected at least 8 bytes, found " + std::to_string(bytes.size()));
    }
    if (bytes[4] != kVersion) {
        fail(TensorErrorKind::unsupported_version, origin, "unsupported CTP1 version " + std::to_string(bytes[4]));
    }
    if (bytes[5] > 1) {
        fail(TensorErrorKind::unsupported_dtype, origin, "unsupported dtype code " + std::to_string(bytes[5]));
    }
    const std::uint8_t ndim = bytes[6];
    if (ndim < 1 || ndim > 4) {
        fail(TensorErrorKind::bad_header, origin, "ndim must be in [1, 4], found " + std::to_string(ndim));
    }
    if (bytes[7] != 0) {
        fail(TensorErrorKind::bad_header, origin, "reserved header byte is not zero");
    }
    const std::size_t header = kFixedHeader + 8 * ndim;
    if (bytes.size() < header) {
        fail(TensorErrorKind::truncated, origin,
             "truncated header: expected " + std::to_string(header) + " bytes, found " + std::to_string(bytes.size()));
    }
    Tensor t;
    t.dtype = static_cast<DType>(bytes[5]);
    for (std::size_t k = 0; k < ndim; ++k) {
        t.dims.push_back(load_le<std::uint64_t>(bytes.data() + kFixedHeader + 8 * k));
    }
    t.values = decode_payload(bytes.data() + header, bytes.size() - header, t.dtype, product(t.dims), header, origin);
    return t;
}

Tensor parse_npy(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
    if (bytes.size() < 10) {
        fail(TensorErrorKind::truncated, origin, "truncated npy preamble");
    }
    if (bytes[6] != 1) {
        fail(TensorErrorKind::unsupported_version, origin,
             "unsupported npy format version " + std::to_string(bytes[6]) + "." + std::to_string(bytes[7]));
    }
    const std::size_t header_len = load_le<std::uint16_t>(bytes.data() + 8);
    const std::size_t header_end = 10 + header_len;
    if (bytes.size() < header_end) {
        fail(TensorErrorKind::truncated, origin,
             "truncated npy header: expected " + std::to_string(header_end) + " bytes, found " +
                 std::to_string(bytes.size()));
    }
    const std::string header(bytes.begin() + 10, bytes.begin() + static_cast<std::ptrdiff_t>(header_end));

    static const std::regex descr_re(R"('descr'\s*:\s*'([^']*)')");
    static const std::regex order_re(R"('fortran_order'\s*:\s*(True|False))");
    static const std::regex shape_re(R"('shape'\s*:\s*\(([^)]*)\))");
    std::smatch m;
    if (!std::regex_search(header, m, descr_re)) {
        fail(TensorErrorKind::bad_header, origin, "npy header lacks 'descr'");
    }
    const std::string descr = m[1];
    Tensor t;
    if (descr == "<f4") {
        t.dtype = DType::f32;
    } else if (descr == "<f8") {
        t.dtype = DType::f64;
    } else {
        fail(TensorErrorKind::unsupported_dtype, origin,
             "unsupported npy dtype '" + descr + "' (only little-endian <f4 and <f8)");
    }
    if (!std::regex_search(header, m, order_re)) {
        fail(TensorErrorKind::bad_header, origin, "npy header lacks 'fortran_order'");
    }
    if (m[1] == "True") {
        fail(TensorErrorKind::unsupported_order, origin, "Fortran-ordered npy arrays are not supported");
    }
    if (!std::regex_search(header, m, shape_re)) {
        fail(TensorErrorKind::bad_header, origin, "npy header lacks 'shape'");
    }
    std::istringstream shape(m[1].str());
    std::string item;
    while (std::getline(shape, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) {
            continue;
        }
        const auto last = item.find_last_not_of(" \tL");
        const std::string digits = item.substr(first, last - first + 1);
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
            fail(TensorErrorKind::bad_header, origin, "malformed npy shape entry '" + item + "'");
        }
        t.dims.push_back(std::stoull(digits));
    }
    if (t.dims.empty() || t.dims.size() > 4) {
        fail(TensorErrorKind::bad_header, origin,
             "npy arrays must have 1 to 4 dimensions, found " + std::to_string(t.dims.size()));
    }
    t.values = decode_payload(bytes.data() + header_end, bytes.size() - header_end, t.dtype, product(t.dims),
                              header_end, origin);
    return t;
}

}  // namespace

std::size_t dtype_size(DType dtype) {
    return dtype == DType::f32 ? 4 : 8;
}

std::uint64_t Tensor::element_count() const {
    return product(dims);
}

Tensor parse_tensor(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0) {
        return parse_ctp1(bytes, origin);
    }
    if (bytes.size() >= 6 && std::memcmp(bytes.data(), kNpyMagic, 6) == 0) {
        return parse_npy(bytes, origin);
    }
    fail(TensorErrorKind::bad_magic, origin, "bad magic: not a CTP1 or npy file");
}

Tensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(TensorErrorKind::io, path.string(), "cannot open file");
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_tensor(bytes, path.string());
}

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor) {
    if (tensor.dims.empty() || tensor.dims.size() > 4) {
        throw ShapeError("CTP1 tensors need 1 to 4 dimensions");
    }
    if (tensor.values.size() != tensor.element_count()) {
        throw ShapeError("tensor holds " + std::to_string(tensor.values.size()) + " values but dims imply " +
                         std::to_string(tensor.element_count()));
    }
    std::vector<std::uint8_t> out(kMagic, kMagic + 4);
    out.push_back(kVersion);
    out.push_back(static_cast<std::uint8_t>(tensor.dtype));
    out.push_back(static_cast<std::uint8_t>(tensor.dims.size()));
    out.push_back(0);
    for (const auto d : tensor.dims) {
        store_le<std::uint64_t>(out, d);
    }
    out.reserve(out.size() + tensor.values.size() * dtype_size(tensor.dtype));
    for (const double v : tensor.values) {
        if (tensor.dtype == DType::f32) {
            store_le<float>(out, static_cast<float>(v));
        } else {
            store_le<double>(out, v);
        }
    }
    return out;
}

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
    const auto bytes = encode_tensor(tensor);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw TensorFormatError(TensorErrorKind::io, path.string() + ": cannot open for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw TensorFormatError(TensorErrorKind::io, path.string() + ": write failed");
    }
}

Matrix to_matrix(const Tensor& tensor) {
    if (tensor.dims.size() != 2) {
        throw ShapeError("expected a 2-D tensor, found " + std::to_string(tensor.dims.size()) + " dimensions");
    }
    return Matrix(tensor.dims[0], tensor.dims[1], tensor.values);
}

Tensor from_matrix(const Matrix& matrix, DType dtype) {
    Tensor t;
    t.dtype = dtype;
    t.dims = {matrix.rows(), matrix.cols()};
    t.values.assign(matrix.data().begin(), matrix.data().end());
    if (dtype == DType::f32) {
        for (auto& v : t.values) {
            v = static_cast<double>(static_cast<float>(v));
        }
    }
    return t;
}

}  // namespace ctp::io

// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <openssl/evp.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

#include "ctp/pipeline.hpp"
#include "ctp/result_doc.hpp"
#include "ctp/tensor_io.hpp"
#include "test_util.hpp"

using namespace ctp;
using namespace ctp::io;
using ctp::testing::data_dir;
using ctp::testing::fixture_dir;
using ctp::testing::random_matrix;
using ctp::testing::slurp;

namespace {

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int k = 0; k < len; ++k) {
        out += hex[digest[k] >> 4];
        out += hex[digest[k] & 0xF];
    }
    return out;
}

std::vector<std::uint8_t> npy_bytes(const std::string& descr, bool fortran, const std::string& shape,
                                    const std::vector<std::uint8_t>& payload) {
    std::string header = "{'descr': '" + descr + "', 'fortran_order': " + (fortran ? "True" : "False") +
                         ", 'shape': (" + shape + "), }";
    while ((10 + header.size() + 1) % 64 != 0) {
        header += ' ';
    }
    header += '\n';
    std::vector<std::uint8_t> out{0x93, 'N', 'U', 'M', 'P', 'Y', 1, 0};
    out.push_back(static_cast<std::uint8_t>(header.size() & 0xFF));
    out.push_back(static_cast<std::uint8_t>(header.size() >> 8));
    out.insert(out.end(), header.begin(), header.end());
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

template <typename T>
std::vector<std::uint8_t> raw(const std::vector<T>& values) {
    std::vector<std::uint8_t> out(values.size() * sizeof(T));
    std::memcpy(out.data(), values.data(), out.size());
    return out;
}

TensorErrorKind kind_of(const std::vector<std::uint8_t>& bytes) {
    try {
        parse_tensor(bytes);
    } catch (const TensorFormatError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected a TensorFormatError";
    return TensorErrorKind::io;
}

}  // namespace

TEST(TensorIo, RandomRoundTrip) {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        Tensor t;
        t.dtype = trial % 2 == 0 ? DType::f32 : DType::f64;
        const std::size_t ndim = 1 + rng.below(4);
        for (std::size_t k = 0; k < ndim; ++k) {
            t.dims.push_back(rng.below(6));
        }
        for (std::uint64_t k = 0; k < t.element_count(); ++k) {
            const double v = rng.normal() * 1e3;
            t.values.push_back(t.dtype == DType::f32 ? static_cast<double>(static_cast<float>(v)) : v);
        }
        ASSERT_EQ(parse_tensor(encode_tensor(t)), t);
    }
}

TEST(TensorIo, FileRoundTripPreservesSpecialValues) {
    Tensor t{DType::f64, {2, 2}, {0.0, -0.0, std::numeric_limits<double>::denorm_min(), 1e308}};
    const auto path = std::filesystem::temp_directory_path() / "ctp_io_roundtrip.ctp";
    write_tensor(path, t);
    const Tensor back = read_tensor(path);
    EXPECT_EQ(back, t);
    EXPECT_TRUE(std::signbit(back.values[1]));
    std::filesystem::remove(path);
}

TEST(TensorIo, MatrixConversion) {
    Rng rng(1);
    const Matrix m = random_matrix(rng, 3, 5);
    const Tensor t = from_matrix(m, DType::f64);
    EXPECT_EQ(t.dims, (std::vector<std::uint64_t>{3, 5}));
    EXPECT_EQ(to_matrix(t), m);
    EXPECT_THROW(to_matrix(Tensor{DType::f32, {4}, {1, 2, 3, 4}}), ShapeError);
}

TEST(TensorIo, TruncatedPayloadNamesBothSizes) {
    auto bytes = encode_tensor(Tensor{DType::f32, {2, 3}, {1, 2, 3, 4, 5, 6}});
    bytes.resize(bytes.size() - 4);
    try {
        parse_tensor(bytes, "x.ctp");
        FAIL();
    } catch (const TensorFormatError& e) {
        EXPECT_EQ(e.kind(), TensorErrorKind::truncated);
        const std::string msg = e.what();
        EXPECT_NE(msg.find("truncated payload: expected 48 bytes, found 44"), std::string::npos) << msg;
        EXPECT_EQ(std::string(e.what()).rfind("x.ctp", 0), 0u);
    }
}

TEST(TensorIo, MalformedHeaders) {
    const auto good = encode_tensor(Tensor{DType::f64, {1}, {1.0}});
    auto b = good;
    b[0] = 'X';
    EXPECT_EQ(kind_of(b), TensorErrorKind::bad_magic);
    b = good;
    b[4] = 2;
    EXPECT_EQ(kind_of(b), TensorErrorKind::unsupported_version);
    b = good;
    b[5] = 7;
    EXPECT_EQ(kind_of(b), TensorErrorKind::unsupported_dtype);
    b = good;
    b[6] = 0;
    EXPECT_EQ(kind_of(b), TensorErrorKind::bad_header);
    b = good;
    b.push_back(0);
    EXPECT_EQ(kind_of(b), TensorErrorKind::trailing_bytes);
    EXPECT_EQ(kind_of({'C', 'T'}), TensorErrorKind::bad_magic);
    EXPECT_THROW(read_tensor("/nonexistent/dir/file.ctp"), TensorFormatError);
}

TEST(Npy, ReadsLittleEndianFloats) {
    const std::vector<float> f{1.5f, -2.0f, 3.25f, 0.0f, 8.0f, -0.5f};
    const Tensor t = parse_tensor(npy_bytes("<f4", false, "2, 3", raw(f)));
    EXPECT_EQ(t.dtype, DType::f32);
    EXPECT_EQ(t.dims, (std::vector<std::uint64_t>{2, 3}));
    EXPECT_EQ(t.values, (std::vector<double>{1.5, -2.0, 3.25, 0.0, 8.0, -0.5}));

    const std::vector<double> d{0.1, 0.2, 0.3};
    const Tensor u = parse_tensor(npy_bytes("<f8", false, "3,", raw(d)));
    EXPECT_EQ(u.dims, std::vector<std::uint64_t>{3});
    EXPECT_EQ(u.values, d);
}

TEST(Npy, RejectsUnsupportedLayouts) {
    const auto payload = raw(std::vector<double>{1.0, 2.0});
    EXPECT_EQ(kind_of(npy_bytes("<f8", true, "2,", payload)), TensorErrorKind::unsupported_order);
    EXPECT_EQ(kind_of(npy_bytes(">f8", false, "2,", payload)), TensorErrorKind::unsupported_dtype);
    EXPECT_EQ(kind_of(npy_bytes("<i4", false, "2,", payload)), TensorErrorKind::unsupported_dtype);
    EXPECT_EQ(kind_of(npy_bytes("<f8", false, "3,", payload)), TensorErrorKind::truncated);
}

TEST(Fixture, DigestsMatch) {
    std::ifstream sums(fixture_dir() / "SHA256SUMS");
    std::string digest;
    std::string name;
    int files = 0;
    while (sums >> digest >> name) {
        EXPECT_EQ(sha256_hex(slurp(fixture_dir() / name)), digest) << name;
        ++files;
    }
    EXPECT_EQ(files, 3);
}

TEST(Fixture, ShapesAndGoldenPrune) {
    const Matrix hidden = to_matrix(read_tensor(fixture_dir() / "hidden.ctp"));
    const Matrix keys = to_matrix(read_tensor(fixture_dir() / "keys.ctp"));
    EXPECT_EQ(hidden.rows(), 576u);
    EXPECT_EQ(hidden.cols(), 4096u);
    EXPECT_EQ(keys.cols(), 128u);
    PrunerConfig cfg;
    cfg.retain = 64;
    const auto result = prune({hidden, keys}, TokenGrid(24, 24), cfg);
    EXPECT_EQ(serialize_result(make_document(result)), slurp(data_dir() / "golden_prune_r64.json"));
}

TEST(ResultDoc, ParseSerializeIsStable) {
    const std::string text = slurp(data_dir() / "golden_prune_r64.json");
    const ResultDocument doc = parse_result(text);
    EXPECT_EQ(serialize_result(doc), text);
    EXPECT_EQ(doc.trace.size(), 64u);
    EXPECT_EQ(doc.grid, TokenGrid(24, 24));
    EXPECT_EQ(parse_result(serialize_result(doc)), doc);
}

TEST(ResultDoc, MetricsBlockRoundTrips) {
    Rng rng(6);
    const TokenGrid grid(4, 5);
    PrunerConfig cfg;
    cfg.retain = 6;
    const auto result = prune({random_matrix(rng, 20, 8), random_matrix(rng, 20, 3)}, grid, cfg);
    harness::MetricsReport m;
    m.strategy = "bss";
    m.seed = 3;
    m.edge_token_count = 4;
    m.dispersion = 1.25;
    m.redundancy = 0.1 + 0.2;
    m.object_recall = 2.0 / 3.0;
    const auto doc = make_document(result, m);
    EXPECT_EQ(parse_result(serialize_result(doc)), doc);
}

TEST(ResultDoc, RejectsMalformedDocuments) {
    EXPECT_THROW(parse_result("{"), ResultParseError);
    EXPECT_THROW(parse_result("{}"), ResultParseError);
    EXPECT_THROW(parse_result("[1, 2]"), ResultParseError);
}

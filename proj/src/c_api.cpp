// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctp/c_api.h"

#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "ctp/pipeline.hpp"

struct ctp_request {
    const float* hidden = nullptr;
    const float* keys = nullptr;
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t d_k = 0;
    ctp::TokenGrid grid;
    ctp_config config{};
};

struct ctp_result {
    std::vector<std::int64_t> indices;
    std::vector<float> hidden;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::int64_t> owners;
    std::vector<std::int64_t> members;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& message) {
    g_last_error = message;
    return code;
}

ctp::PrunerConfig to_engine(const ctp_config& c) {
    std::vector<std::string> bad;
    const auto count = [&](std::int64_t v, const char* name) {
        if (v < 0) {
            bad.emplace_back(name);
            return std::size_t{0};
        }
        return static_cast<std::size_t>(v);
    };
    ctp::PrunerConfig cfg;
    cfg.retain = count(c.retain, "retain");
    cfg.pivots = count(c.pivots, "pivots");
    cfg.channels = count(c.channels, "channels");
    cfg.bss_strength = c.bss_strength;
    cfg.tau0 = c.tau0;
    cfg.dtau = c.dtau;
    cfg.batch = count(c.batch, "batch");
    cfg.blend = c.blend;
    cfg.eps = c.eps;
    cfg.raw_swa_weights = c.raw_swa_weights != 0;
    if (!bad.empty()) {
        throw ctp::ConfigError(bad, "invalid config: negative value for " + bad.front());
    }
    return cfg;
}

ctp::Matrix widen(const float* data, std::size_t rows, std::size_t cols) {
    ctp::Matrix m(rows, cols);
    auto out = m.data();
    for (std::size_t k = 0; k < rows * cols; ++k) {
        out[k] = static_cast<double>(data[k]);
    }
    return m;
}

}  // namespace

extern "C" {

const char* ctp_version(void) {
    static const std::string version(ctp::kEngineVersion);
    return version.c_str();
}

ctp_config ctp_default_config(int64_t retain) {
    const ctp::PrunerConfig d;
    return ctp_config{retain,
                      static_cast<int64_t>(d.pivots),
                      static_cast<int64_t>(d.channels),
                      d.bss_strength,
                      d.tau0,
                      d.dtau,
                      static_cast<int64_t>(d.batch),
                      d.blend,
                      d.eps,
                      d.raw_swa_weights ? 1 : 0};
}

const char* ctp_last_error(void) {
    return g_last_error.c_str();
}

int ctp_request_create(const float* hidden, size_t hidden_len, const float* keys, size_t keys_len, size_t n,
                       size_t d, size_t d_k, size_t height, size_t width, size_t frames, const ctp_config* config,
                       ctp_request** out) {
    g_last_error.clear();
    if (out == nullptr || config == nullptr || hidden == nullptr || keys == nullptr) {
        return fail(CTP_ERR_ARGUMENT, "null pointer argument");
    }
    *out = nullptr;
    if (hidden_len != n * d) {
        return fail(CTP_ERR_SHAPE, "hidden buffer holds " + std::to_string(hidden_len) + " floats, expected n*d = " +
                                       std::to_string(n * d));
    }
    if (keys_len != n * d_k) {
        return fail(CTP_ERR_SHAPE, "keys buffer holds " + std::to_string(keys_len) + " floats, expected n*d_k = " +
                                       std::to_string(n * d_k));
    }
    try {
        ctp::TokenGrid grid(height, width, frames);
        if (grid.token_count() != n) {
            return fail(CTP_ERR_SHAPE, "grid holds " + std::to_string(grid.token_count()) + " tokens but n = " +
                                           std::to_string(n));
        }
        ctp::validate_config(to_engine(*config), n, d);
        *out = new ctp_request{hidden, keys, n, d, d_k, grid, *config};
        return CTP_OK;
    } catch (const ctp::ShapeError& e) {
        return fail(CTP_ERR_SHAPE, e.what());
    } catch (const ctp::ConfigError& e) {
        return fail(CTP_ERR_CONFIG, e.what());
    } catch (const std::bad_alloc&) {
        return fail(CTP_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(CTP_ERR_INTERNAL, e.what());
    }
}

void ctp_request_free(ctp_request* request) {
    delete request;
}

int ctp_run(const ctp_request* request, ctp_result** out) {
    g_last_error.clear();
    if (request == nullptr || out == nullptr) {
        return fail(CTP_ERR_ARGUMENT, "null pointer argument");
    }
    *out = nullptr;
    try {
        const ctp::PrunerConfig cfg = to_engine(request->config);
        const ctp::FeatureSet features{widen(request->hidden, request->n, request->d),
                                       widen(request->keys, request->n, request->d_k)};
        const ctp::PruneResult result = ctp::prune(features, request->grid, cfg);

        auto res = std::make_unique<ctp_result>();
        for (const auto& e : result.trace.entries) {
            res->indices.push_back(static_cast<std::int64_t>(e.index));
            for (const std::size_t u : result.clusters.at(e.index)) {
                res->owners.push_back(static_cast<std::int64_t>(e.index));
                res->members.push_back(static_cast<std::int64_t>(u));
            }
        }
        res->rows = result.updated_hidden.rows();
        res->cols = result.updated_hidden.cols();
        res->hidden.reserve(res->rows * res->cols);
        for (const double v : result.updated_hidden.data()) {
            res->hidden.push_back(static_cast<float>(v));
        }
        *out = res.release();
        return CTP_OK;
    } catch (const ctp::ConfigError& e) {
        return fail(CTP_ERR_CONFIG, e.what());
    } catch (const ctp::ShapeError& e) {
        return fail(CTP_ERR_SHAPE, e.what());
    } catch (const ctp::DataError& e) {
        return fail(CTP_ERR_TENSOR, e.what());
    } catch (const std::exception& e) {
        return fail(CTP_ERR_INTERNAL, e.what());
    }
}

size_t ctp_result_count(const ctp_result* result) {
    return result == nullptr ? 0 : result->indices.size();
}

const int64_t* ctp_result_indices(const ctp_result* result) {
    return result == nullptr ? nullptr : result->indices.data();
}

const float* ctp_result_hidden(const ctp_result* result, size_t* rows, size_t* cols) {
    if (result == nullptr) {
        return nullptr;
    }
    if (rows != nullptr) {
        *rows = result->rows;
    }
    if (cols != nullptr) {
        *cols = result->cols;
    }
    return result->hidden.data();
}

size_t ctp_result_cluster_pairs(const ctp_result* result) {
    return result == nullptr ? 0 : result->owners.size();
}

const int64_t* ctp_result_cluster_owners(const ctp_result* result) {
    return result == nullptr ? nullptr : result->owners.data();
}

const int64_t* ctp_result_cluster_members(const ctp_result* result) {
    return result == nullptr ? nullptr : result->members.data();
}

void ctp_result_free(ctp_result* result) {
    delete result;
}

}  // extern "C"

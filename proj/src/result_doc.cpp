// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctp/result_doc.hpp"

#include <json.hpp>

namespace ctp::io {

namespace {

using Json = nlohmann::ordered_json;

Json config_to_json(const PrunerConfig& c) {
    Json j;
    j["retain"] = c.retain;
    j["pivots"] = c.pivots;
    j["channels"] = c.channels;
    j["bss_strength"] = c.bss_strength;
    j["tau0"] = c.tau0;
    j["dtau"] = c.dtau;
    j["batch"] = c.batch;
    j["blend"] = c.blend;
    j["eps"] = c.eps;
    j["raw_swa_weights"] = c.raw_swa_weights;
    return j;
}

PrunerConfig config_from_json(const Json& j) {
    PrunerConfig c;
    c.retain = j.at("retain").get<std::size_t>();
    c.pivots = j.at("pivots").get<std::size_t>();
    c.channels = j.at("channels").get<std::size_t>();
    c.bss_strength = j.at("bss_strength").get<double>();
    c.tau0 = j.at("tau0").get<double>();
    c.dtau = j.at("dtau").get<double>();
    c.batch = j.at("batch").get<std::size_t>();
    c.blend = j.at("blend").get<double>();
    c.eps = j.at("eps").get<double>();
    c.raw_swa_weights = j.at("raw_swa_weights").get<bool>();
    return c;
}

}  // namespace

ResultDocument make_document(const PruneResult& result, std::optional<harness::MetricsReport> metrics) {
    ResultDocument doc;
    doc.grid = result.grid;
    doc.config = result.config;
    doc.trace = result.trace;
    doc.clusters = result.clusters;
    doc.metrics = std::move(metrics);
    return doc;
}

std::string serialize_result(const ResultDocument& doc) {
    Json root;
    root["engine"] = Json{{"name", "ctprune"}, {"version", doc.engine_version}};
    root["grid"] = Json{{"height", doc.grid.height()}, {"width", doc.grid.width()}, {"frames", doc.grid.frames()}};
    root["config"] = Json{{"requested", config_to_json(doc.config.requested)},
                          {"effective", config_to_json(doc.config.effective)},
                          {"clamped", doc.config.clamped}};

    Json trace = Json::array();
    for (const auto& e : doc.trace.entries) {
        Json item;
        item["index"] = e.index;
        item["order"] = e.order;
        item["stage"] = std::string(to_string(e.stage));
        item["loop"] = e.loop;
        item["tau_at_accept"] = e.tau_at_accept ? Json(*e.tau_at_accept) : Json(nullptr);
        trace.push_back(std::move(item));
    }
    root["trace"] = std::move(trace);

    Json clusters = Json::array();
    for (const auto& e : doc.trace.entries) {
        const auto it = doc.clusters.find(e.index);
        if (it == doc.clusters.end()) {
            continue;
        }
        clusters.push_back(Json{{"owner", it->first}, {"members", it->second}});
    }
    root["clusters"] = std::move(clusters);

    if (doc.metrics) {
        const auto& m = *doc.metrics;
        root["metrics"] = Json{{"strategy", m.strategy},         {"seed", m.seed},
                               {"edge_tokens", m.edge_token_count}, {"dispersion", m.dispersion},
                               {"redundancy", m.redundancy},     {"object_recall", m.object_recall}};
    }
    return root.dump(2) + "\n";
}

ResultDocument parse_result(const std::string& text) {
    try {
        const Json root = Json::parse(text);
        ResultDocument doc;
        doc.engine_version = root.at("engine").at("version").get<std::string>();
        const auto& g = root.at("grid");
        doc.grid = TokenGrid(g.at("height").get<std::size_t>(), g.at("width").get<std::size_t>(),
                             g.at("frames").get<std::size_t>());
        const auto& c = root.at("config");
        doc.config.requested = config_from_json(c.at("requested"));
        doc.config.effective = config_from_json(c.at("effective"));
        doc.config.clamped = c.at("clamped").get<std::vector<std::string>>();

        for (const auto& item : root.at("trace")) {
            TraceEntry e;
            e.index = item.at("index").get<std::size_t>();
            e.order = item.at("order").get<std::size_t>();
            e.stage = stage_from_string(item.at("stage").get<std::string>());
            e.loop = item.at("loop").get<int>();
            const auto& tau = item.at("tau_at_accept");
            if (!tau.is_null()) {
                e.tau_at_accept = tau.get<double>();
            }
            doc.trace.entries.push_back(e);
        }
        for (const auto& item : root.at("clusters")) {
            doc.clusters[item.at("owner").get<std::size_t>()] = item.at("members").get<std::vector<std::size_t>>();
        }
        if (root.contains("metrics")) {
            const auto& m = root.at("metrics");
            harness::MetricsReport report;
            report.strategy = m.at("strategy").get<std::string>();
            report.seed = m.at("seed").get<std::uint64_t>();
            report.edge_token_count = m.at("edge_tokens").get<std::size_t>();
            report.dispersion = m.at("dispersion").get<double>();
            report.redundancy = m.at("redundancy").get<double>();
            report.object_recall = m.at("object_recall").get<double>();
            doc.metrics = report;
        }
        return doc;
    } catch (const nlohmann::json::exception& e) {
        throw ResultParseError(std::string("malformed result document: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ResultParseError(std::string("malformed result document: ") + e.what());
    }
}

}  // namespace ctp::io

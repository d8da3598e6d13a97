// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctp/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <regex>
#include <sstream>

#include "ctp/harness.hpp"
#include "ctp/pipeline.hpp"
#include "ctp/result_doc.hpp"
#include "ctp/tensor_io.hpp"

namespace ctp::cli {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void add_config_flags(CLI::App* cmd, PrunerConfig& cfg) {
    cmd->add_option("--lambda", cfg.bss_strength, "BSS strength")->capture_default_str();
    cmd->add_option("--tau0", cfg.tau0, "initial acceptance threshold")->capture_default_str();
    cmd->add_option("--dtau", cfg.dtau, "threshold increment per loop")->capture_default_str();
    cmd->add_option("--q", cfg.channels, "channels kept by variance screening")->capture_default_str();
    cmd->add_option("--beta", cfg.blend, "share of a retained token's own state after merging")->capture_default_str();
    cmd->add_option("--batch", cfg.batch, "greedy batch size")->capture_default_str();
    cmd->add_option("--pivots", cfg.pivots, "number of max-min pivots")->capture_default_str();
    cmd->add_option("--eps", cfg.eps, "aggregation stabilizer")->capture_default_str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    out << text;
    if (!out) {
        throw IoError("write to " + path + " failed");
    }
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<harness::Strategy> parse_strategies(const std::string& list) {
    std::vector<harness::Strategy> out;
    std::istringstream in(list);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) {
            try {
                out.push_back(harness::parse_strategy(item));
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
        }
    }
    if (out.empty()) {
        throw UsageError("--strategies lists no strategy");
    }
    return out;
}

struct PruneArgs {
    std::string hidden;
    std::string keys;
    std::string grid;
    std::string out;
    std::string updated_hidden;
    bool raw_weights = false;
    PrunerConfig cfg;
};

int cmd_prune(const PruneArgs& a, std::ostream& out) {
    const TokenGrid grid = parse_grid(a.grid);
    const io::Tensor hidden_t = io::read_tensor(a.hidden);
    const io::Tensor keys_t = io::read_tensor(a.keys);
    FeatureSet features{io::to_matrix(hidden_t), io::to_matrix(keys_t)};
    PrunerConfig cfg = a.cfg;
    cfg.raw_swa_weights = a.raw_weights;
    const PruneResult result = prune(features, grid, cfg);
    write_text(a.out, io::serialize_result(io::make_document(result)));
    if (!a.updated_hidden.empty()) {
        io::write_tensor(a.updated_hidden, io::from_matrix(result.updated_hidden, hidden_t.dtype));
    }
    out << "retained " << result.trace.size() << " of " << grid.token_count() << " tokens\n";
    return kOk;
}

struct SynthArgs {
    std::string grid = "24x24";
    std::size_t objects = 3;
    std::uint64_t seed = 0;
    std::string out_dir;
    harness::SceneParams params;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    const TokenGrid grid = parse_grid(a.grid);
    const harness::SyntheticScene scene = harness::gen_scene(grid, a.objects, a.seed, a.params);
    std::filesystem::create_directories(a.out_dir);
    const std::filesystem::path dir(a.out_dir);
    io::write_tensor(dir / "hidden.ctp", io::from_matrix(scene.features.hidden, io::DType::f32));
    io::write_tensor(dir / "keys.ctp", io::from_matrix(scene.features.keys, io::DType::f32));

    nlohmann::ordered_json meta;
    meta["grid"] = {{"height", grid.height()}, {"width", grid.width()}, {"frames", grid.frames()}};
    meta["objects"] = a.objects;
    meta["seed"] = a.seed;
    meta["hidden_dim"] = a.params.hidden_dim;
    meta["key_dim"] = a.params.key_dim;
    meta["object_masks"] = scene.object_masks;
    meta["background_count"] = scene.background_ids.size();
    write_text((dir / "scene.json").string(), meta.dump(2) + "\n");
    out << "wrote scene with " << scene.object_masks.size() << " objects to " << a.out_dir << "\n";
    return kOk;
}

struct CompareArgs {
    std::string grid = "24x24";
    std::size_t objects = 3;
    std::size_t runs = 1;
    std::uint64_t seed = 0;
    std::string strategies = "bss,redundancy_only,random";
    std::string out;
    std::string summary;
    harness::SceneParams params;
    PrunerConfig cfg;
};

int cmd_compare(const CompareArgs& a, std::ostream& out) {
    const TokenGrid grid = parse_grid(a.grid);
    const auto strategies = parse_strategies(a.strategies);
    if (a.runs == 0) {
        throw UsageError("--runs must be at least 1");
    }
    harness::CorpusOptions options;
    options.n_objects = a.objects;
    options.first_seed = a.seed;
    options.params = a.params;
    const auto report = harness::corpus_experiment(a.runs, grid, a.cfg, strategies, options);
    const std::string records = harness::metrics_csv(report.records);
    if (a.out.empty()) {
        out << records;
    } else {
        write_text(a.out, records);
    }
    if (!a.summary.empty()) {
        write_text(a.summary, harness::summary_csv(report.summaries));
    }
    return kOk;
}

struct RenderArgs {
    std::string result;
    std::string out;
    bool no_clusters = false;
};

int cmd_render(const RenderArgs& a, std::ostream& out) {
    io::ResultDocument doc;
    try {
        doc = io::parse_result(read_text(a.result));
    } catch (const io::ResultParseError& e) {
        throw IoError(e.what());
    }
    PruneResult result;
    result.grid = doc.grid;
    result.trace = doc.trace;
    result.clusters = doc.clusters;
    result.config = doc.config;
    harness::RenderOptions options;
    options.tint_clusters = !a.no_clusters;
    write_text(a.out, harness::render_selection(result, doc.grid, options));
    out << "rendered " << doc.trace.size() << " selected tokens to " << a.out << "\n";
    return kOk;
}

struct BenchArgs {
    std::string grid = "24x24";
    std::size_t runs = 5;
    std::uint64_t seed = 0;
    harness::SceneParams params;
    PrunerConfig cfg;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
    const TokenGrid grid = parse_grid(a.grid);
    if (a.runs == 0) {
        throw UsageError("--runs must be at least 1");
    }
    const harness::SyntheticScene scene = harness::gen_scene(grid, 3, a.seed, a.params);
    std::vector<StageTimings> samples;
    for (std::size_t r = 0; r < a.runs; ++r) {
        StageTimings t;
        prune(scene.features, grid, a.cfg, &t);
        samples.push_back(t);
    }
    const auto median = [&](double StageTimings::*field) {
        std::vector<double> v;
        for (const auto& s : samples) {
            v.push_back(s.*field);
        }
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    const double screening = median(&StageTimings::screening);
    const double similarity = median(&StageTimings::similarity);
    const double selection = median(&StageTimings::selection);
    const double recovery = median(&StageTimings::recovery);
    char line[128];
    out << "# N=" << grid.token_count() << " d=" << a.params.hidden_dim << " d_k=" << a.params.key_dim
        << " R=" << a.cfg.retain << " runs=" << a.runs << " (median seconds)\n";
    out << "stage,seconds\n";
    for (const auto& [name, value] : {std::pair{"screening", screening}, std::pair{"similarity", similarity},
                                      std::pair{"selection", selection}, std::pair{"recovery", recovery},
                                      std::pair{"total", screening + similarity + selection + recovery}}) {
        std::snprintf(line, sizeof(line), "%s,%.6f\n", name, value);
        out << line;
    }
    return kOk;
}

}  // namespace

TokenGrid parse_grid(const std::string& text) {
    static const std::regex re(R"((\d+)[xX](\d+)(?:[xX](\d+))?)");
    std::smatch m;
    if (!std::regex_match(text, m, re)) {
        throw UsageError("malformed --grid '" + text + "' (expected HxW or HxWxT)");
    }
    const auto h = std::stoull(m[1]);
    const auto w = std::stoull(m[2]);
    const auto t = m[3].matched ? std::stoull(m[3]) : 1ULL;
    if (h == 0 || w == 0 || t == 0) {
        throw UsageError("grid dimensions in '" + text + "' must be positive");
    }
    return TokenGrid(h, w, t);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Centrifugal visual-token pruning engine", "ctprune"};
    app.set_version_flag("--version", std::string(kEngineVersion));
    app.require_subcommand(1);

    PruneArgs prune_args;
    auto* prune_cmd = app.add_subcommand("prune", "prune one token set and write a result document");
    prune_cmd->add_option("--hidden", prune_args.hidden, "hidden states tensor (N x d)")->required();
    prune_cmd->add_option("--keys", prune_args.keys, "key tensor (N x d_k)")->required();
    prune_cmd->add_option("--grid", prune_args.grid, "token grid HxW or HxWxT")->required();
    prune_cmd->add_option("--retain", prune_args.cfg.retain, "tokens to keep")->required();
    prune_cmd->add_option("--out", prune_args.out, "result document path")->required();
    prune_cmd->add_option("--updated-hidden", prune_args.updated_hidden, "write merged hidden states here");
    prune_cmd->add_flag("--raw-swa-weights", prune_args.raw_weights, "use signed similarities as merge weights");
    add_config_flags(prune_cmd, prune_args.cfg);

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic token scene");
    synth_cmd->add_option("--grid", synth_args.grid)->capture_default_str();
    synth_cmd->add_option("--objects", synth_args.objects)->capture_default_str();
    synth_cmd->add_option("--seed", synth_args.seed)->capture_default_str();
    synth_cmd->add_option("--dim", synth_args.params.hidden_dim, "hidden width")->capture_default_str();
    synth_cmd->add_option("--key-dim", synth_args.params.key_dim, "key width")->capture_default_str();
    synth_cmd->add_option("--out", synth_args.out_dir, "output directory")->required();

    CompareArgs compare_args;
    compare_args.cfg.retain = 64;
    auto* compare_cmd = app.add_subcommand("compare", "run strategies over synthetic scenes and emit metrics");
    compare_cmd->add_option("--grid", compare_args.grid)->capture_default_str();
    compare_cmd->add_option("--objects", compare_args.objects)->capture_default_str();
    compare_cmd->add_option("--runs", compare_args.runs, "number of seeds")->capture_default_str();
    compare_cmd->add_option("--seed", compare_args.seed, "first seed")->capture_default_str();
    compare_cmd->add_option("--strategies", compare_args.strategies, "comma-separated list")->capture_default_str();
    compare_cmd->add_option("--retain", compare_args.cfg.retain)->capture_default_str();
    compare_cmd->add_option("--dim", compare_args.params.hidden_dim)->capture_default_str();
    compare_cmd->add_option("--key-dim", compare_args.params.key_dim)->capture_default_str();
    compare_cmd->add_option("--out", compare_args.out, "metrics CSV (default: stdout)");
    compare_cmd->add_option("--summary", compare_args.summary, "per-strategy median/mean CSV");
    add_config_flags(compare_cmd, compare_args.cfg);

    RenderArgs render_args;
    auto* render_cmd = app.add_subcommand("render", "draw a result document as SVG");
    render_cmd->add_option("--result", render_args.result, "result document")->required();
    render_cmd->add_option("--out", render_args.out, "SVG path")->required();
    render_cmd->add_flag("--no-clusters", render_args.no_clusters, "leave discarded tokens untinted");

    BenchArgs bench_args;
    bench_args.cfg.retain = 64;
    auto* bench_cmd = app.add_subcommand("bench", "time each pipeline stage on a synthetic scene");
    bench_cmd->add_option("--grid", bench_args.grid)->capture_default_str();
    bench_cmd->add_option("--runs", bench_args.runs)->capture_default_str();
    bench_cmd->add_option("--seed", bench_args.seed)->capture_default_str();
    bench_cmd->add_option("--retain", bench_args.cfg.retain)->capture_default_str();
    bench_cmd->add_option("--dim", bench_args.params.hidden_dim)->capture_default_str();
    bench_cmd->add_option("--key-dim", bench_args.params.key_dim)->capture_default_str();
    add_config_flags(bench_cmd, bench_args.cfg);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kEngineVersion << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (*prune_cmd) {
            return cmd_prune(prune_args, out);
        }
        if (*synth_cmd) {
            return cmd_synth(synth_args, out);
        }
        if (*compare_cmd) {
            return cmd_compare(compare_args, out);
        }
        if (*render_cmd) {
            return cmd_render(render_args, out);
        }
        if (*bench_cmd) {
            return cmd_bench(bench_args, out);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ShapeError& e) {
        err << "error: shape mismatch: " << e.what() << "\n";
        return kShapeMismatch;
    } catch (const io::TensorFormatError& e) {
        if (e.kind() == io::TensorErrorKind::io) {
            err << "error: " << e.what() << "\n";
            return kFailure;
        }
        err << "error: malformed tensor: " << e.what() << "\n";
        return kMalformedTensor;
    } catch (const DataError& e) {
        err << "error: malformed tensor: " << e.what() << "\n";
        return kMalformedTensor;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kInvalidConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kUsage;
}

}  // namespace ctp::cli

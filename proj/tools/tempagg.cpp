// Command-line entry point: ingestion stats, synthetic stream generation,
// the benchmark grid, the no-aggregation baseline, single-vote-vector
// certification and the certifier-vs-oracle validation suite. Every
// subcommand is deterministic given its flags; every output directory gets a
// manifest sufficient to reproduce the run.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <tempagg/tempagg.hpp>

namespace fs = std::filesystem;
using namespace tempagg;

namespace {

std::string join_ints(const std::vector<std::int32_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

struct DataArgs {
    std::string data_path;
    bool use_synth = false;
    std::string date_min = "2012-02-01";
    std::string date_max = "2017-12-31";
    std::string epoch = "2012-02";
    SynthConfig synth;

    void add_flags(CLI::App* cmd, bool with_synth) {
        cmd->add_option("--data", data_path,
                        "line-delimited JSON data file (default: $TEMPAGG_DATA)");
        cmd->add_option("--date-min", date_min, "earliest kept date (YYYY-MM-DD)")
            ->capture_default_str();
        cmd->add_option("--date-max", date_max, "latest kept date (YYYY-MM-DD)")
            ->capture_default_str();
        cmd->add_option("--epoch", epoch, "month of period 0 (YYYY-MM)")
            ->capture_default_str();
        if (with_synth) {
            cmd->add_flag("--synth", use_synth, "use a synthetic stream instead of --data");
            cmd->add_option("--synth-periods", synth.n_periods, "synthetic periods")
                ->capture_default_str();
            cmd->add_option("--synth-samples", synth.samples_per_period,
                            "synthetic samples per period")
                ->capture_default_str();
            cmd->add_option("--synth-labels", synth.n_labels, "synthetic label count")
                ->capture_default_str();
            cmd->add_option("--synth-vocab", synth.vocab_size, "synthetic vocabulary size")
                ->capture_default_str();
            cmd->add_option("--synth-drift", synth.drift_rate,
                            "fraction of per-label vocabulary replaced per period")
                ->capture_default_str();
            cmd->add_option("--synth-seed", synth.seed, "synthetic stream seed")
                ->capture_default_str();
        }
    }

    std::string resolved_data_path() const {
        if (!data_path.empty()) return data_path;
        if (const char* env = std::getenv("TEMPAGG_DATA"); env && *env) return env;
        return {};
    }

    struct Loaded {
        PeriodStore store;
        LabelSpace labels;
        std::optional<IngestReport> report;
        std::optional<std::string> input_path;
    };

    Loaded load() const {
        if (use_synth) {
            if (!data_path.empty())
                throw std::runtime_error("--synth and --data are mutually exclusive");
            SynthStream ss = synth_stream(synth);
            return Loaded{std::move(ss.store), std::move(ss.labels), std::nullopt,
                          std::nullopt};
        }
        std::string path = resolved_data_path();
        if (path.empty())
            throw std::runtime_error(
                "no data source: pass --data (or set TEMPAGG_DATA), or --synth");
        ParsedDataset ds = parse_news_category(path, parse_date(date_min),
                                               parse_date(date_max),
                                               parse_year_month(epoch));
        return Loaded{std::move(ds.store), std::move(ds.labels), std::move(ds.report),
                      path};
    }

    void describe(RunManifest& m) const {
        if (use_synth) {
            m.set("source", std::string("synth"));
            m.set("synth_periods", synth.n_periods);
            m.set("synth_samples", synth.samples_per_period);
            m.set("synth_labels", synth.n_labels);
            m.set("synth_vocab", synth.vocab_size);
            m.set_double("synth_drift", synth.drift_rate);
            m.set("synth_seed", std::to_string(synth.seed));
        } else {
            m.set("source", std::string("file"));
            m.set("data", resolved_data_path());
            m.set("date_min", date_min);
            m.set("date_max", date_max);
            m.set("epoch", epoch);
        }
    }
};

void write_manifest(const RunManifest& m, const std::string& out_dir) {
    fs::create_directories(out_dir);
    m.write((fs::path(out_dir) / "manifest.txt").string());
}

int cmd_ingest_stats(const DataArgs& data, const std::string& out_dir) {
    std::string path = data.resolved_data_path();
    if (path.empty())
        throw std::runtime_error("no data source: pass --data or set TEMPAGG_DATA");
    ParsedDataset ds = parse_news_category(path, parse_date(data.date_min),
                                           parse_date(data.date_max),
                                           parse_year_month(data.epoch));
    if (ds.report.total_records_read == 0)
        throw std::runtime_error("empty input: no records in " + path);
    std::cout << ds.report.render();
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream out(fs::path(out_dir) / "ingest_report.txt", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write ingest report");
        out << ds.report.render();
        RunManifest m;
        m.subcommand = "ingest-stats";
        m.set("data", path);
        m.set("date_min", data.date_min);
        m.set("date_max", data.date_max);
        m.set("epoch", data.epoch);
        m.add_input(path);
        write_manifest(m, out_dir);
    }
    return 0;
}

int cmd_synth(const SynthConfig& cfg, const std::string& epoch_str,
              const std::string& out_dir) {
    SynthStream ss = synth_stream(cfg);
    fs::create_directories(out_dir);
    std::string data_path = (fs::path(out_dir) / "data.jsonl").string();
    write_news_jsonl(ss.store, ss.labels, parse_year_month(epoch_str), data_path);
    RunManifest m;
    m.subcommand = "synth";
    m.set("synth_periods", cfg.n_periods);
    m.set("synth_samples", cfg.samples_per_period);
    m.set("synth_labels", cfg.n_labels);
    m.set("synth_vocab", cfg.vocab_size);
    m.set_double("synth_drift", cfg.drift_rate);
    m.set("synth_seed", std::to_string(cfg.seed));
    m.set("epoch", epoch_str);
    write_manifest(m, out_dir);
    std::cout << "periods\t" << ss.store.n_periods() << "\n"
              << "samples\t" << ss.store.total_count() << "\n"
              << "labels\t" << ss.labels.size() << "\n"
              << "data\t" << data_path << "\n";
    return 0;
}

int cmd_bench(const DataArgs& data, BenchConfig cfg, std::int64_t n_start,
              std::int64_t last_period, bool save_votes, const std::string& out_dir) {
    auto loaded = data.load();
    cfg.n_start = PeriodIndex{static_cast<std::int32_t>(n_start)};
    if (last_period >= 0)
        cfg.last_test_period = PeriodIndex{static_cast<std::int32_t>(last_period)};
    if (!cfg.features.valid())
        throw std::runtime_error("hash-dim must be a power of two >= 2");

    fs::create_directories(out_dir);

    struct ComboFiles {
        std::ofstream votes;
        std::ofstream radii;
    };
    std::map<std::pair<std::int32_t, std::int32_t>, std::unique_ptr<ComboFiles>> files;
    BenchSink sink;
    if (save_votes) {
        sink = [&](const AggregationConfig& agg, const VoteRecord& vr,
                   const RadiiRow& rr) {
            auto key = std::make_pair(agg.n, agg.k);
            auto it = files.find(key);
            if (it == files.end()) {
                auto cf = std::make_unique<ComboFiles>();
                std::string stem =
                    "n" + std::to_string(agg.n) + "_k" + std::to_string(agg.k);
                cf->votes.open(fs::path(out_dir) / ("votes_" + stem + ".tsv"),
                               std::ios::binary);
                cf->radii.open(fs::path(out_dir) / ("radii_" + stem + ".tsv"),
                               std::ios::binary);
                if (!cf->votes || !cf->radii)
                    throw std::runtime_error("cannot open vote/radii files in " + out_dir);
                cf->votes << kVoteMatrixHeader << "\n";
                cf->radii << kRadiiTableHeader << "\n";
                it = files.emplace(key, std::move(cf)).first;
            }
            append_vote_row(it->second->votes, vr);
            append_radii_row(it->second->radii, rr);
        };
    }

    RobustFractionReport report = run_bench_grid(loaded.store, loaded.labels, cfg, sink);
    for (auto& [key, cf] : files) {
        cf->votes.flush();
        cf->radii.flush();
        if (!cf->votes || !cf->radii)
            throw std::runtime_error("failed writing vote/radii files in " + out_dir);
    }
    emit_report(report, out_dir);

    RunManifest m;
    m.subcommand = "bench";
    data.describe(m);
    m.set("n_start", static_cast<std::int64_t>(cfg.n_start.v));
    m.set("n", join_ints(cfg.ns));
    m.set("k", join_ints(cfg.ks));
    m.set("tau_max", cfg.tau_max);
    m.set_double("alpha", cfg.alpha);
    m.set("hash_dim", static_cast<std::int64_t>(cfg.features.hash_dim));
    m.set("threads", cfg.threads);
    m.set("last_test_period", static_cast<std::int64_t>(report.last_test_period.v));
    m.set("save_votes", save_votes);
    if (loaded.input_path) m.add_input(*loaded.input_path);
    write_manifest(m, out_dir);

    std::cout << "n\tk\tsamples\tcorrect\tclean_accuracy\n";
    for (const auto& c : report.combos) {
        char acc[32];
        std::snprintf(acc, sizeof acc, "%.6f", c.clean_accuracy());
        std::cout << c.agg.n << '\t' << c.agg.k << '\t' << c.total << '\t' << c.correct
                  << '\t' << acc << "\n";
    }
    return 0;
}

int cmd_baseline(const DataArgs& data, std::vector<std::int32_t> ns,
                 std::int64_t n_start, std::int64_t last_period, double alpha,
                 std::uint32_t hash_dim, std::int32_t threads,
                 const std::string& out_dir) {
    auto loaded = data.load();
    FeatureConfig features{hash_dim};
    if (!features.valid())
        throw std::runtime_error("hash-dim must be a power of two >= 2");
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    std::optional<PeriodIndex> last;
    if (last_period >= 0) last = PeriodIndex{static_cast<std::int32_t>(last_period)};
    std::vector<BaselineResult> results;
    for (auto n : ns)
        results.push_back(baseline_accuracy(loaded.store, loaded.labels, n,
                                            PeriodIndex{static_cast<std::int32_t>(n_start)},
                                            alpha, features, last, threads));
    write_baseline_table(std::cout, results, loaded.labels);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_baseline_table((fs::path(out_dir) / "baseline.tsv").string(), results,
                             loaded.labels);
        RunManifest m;
        m.subcommand = "baseline";
        data.describe(m);
        m.set("n", join_ints(ns));
        m.set("n_start", n_start);
        m.set("last_test_period", last_period);
        m.set_double("alpha", alpha);
        m.set("hash_dim", static_cast<std::int64_t>(hash_dim));
        m.set("threads", threads);
        if (loaded.input_path) m.add_input(*loaded.input_path);
        write_manifest(m, out_dir);
    }
    return 0;
}

int cmd_certify(const std::string& votes_str, const std::string& labels_str,
                std::int32_t n, bool with_oracle) {
    std::vector<std::string> names;
    for (auto part : split(labels_str, ','))
        names.emplace_back(part);
    LabelSpace labels = LabelSpace::from_names(names);
    VoteVector vv;
    for (auto part : split(votes_str, ','))
        vv.votes.push_back(labels.index_of(part));
    if (vv.votes.empty()) throw std::runtime_error("empty vote vector");
    vv.current_period = PeriodIndex{vv.k() - 1};
    CertifiedRadii r = certify(vv, labels, n);
    std::cout << "predicted\t" << labels.name_of(r.predicted) << "\n"
              << "earliness_radius\t" << r.earliness_radius << "\n"
              << "duration_radius\t" << r.duration_radius << "\n";
    if (with_oracle) {
        std::cout << "oracle_earliness_radius\t"
                  << oracle_radius(vv, labels, n, std::nullopt,
                                   RobustnessNotion::earliness)
                  << "\n"
                  << "oracle_duration_radius\t"
                  << oracle_radius(vv, labels, n, std::nullopt,
                                   RobustnessNotion::duration)
                  << "\n";
    }
    return 0;
}

int cmd_oracle_check(const OracleCheckConfig& cfg, const std::string& out_dir) {
    if (cfg.trials == 0)
        std::cerr << "warning: 0 trials requested; the pass is vacuous\n";
    OracleCheckSummary sum = run_oracle_check(cfg);
    std::cout << sum.render();
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream out(fs::path(out_dir) / "oracle_check.txt", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write oracle-check summary");
        out << sum.render();
        RunManifest m;
        m.subcommand = "oracle-check";
        m.set("trials", cfg.trials);
        m.set("k_max", cfg.k_max);
        m.set("labels_max", cfg.labels_max);
        m.set("n_max", cfg.n_max);
        m.set("seed", std::to_string(cfg.seed));
        write_manifest(m, out_dir);
    }
    return sum.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"temporal aggregation: certified defense against "
                 "temporally bounded data poisoning"};
    app.require_subcommand(1);

    // ingest-stats
    auto* ingest_cmd = app.add_subcommand(
        "ingest-stats", "parse a data file and report period/label statistics");
    DataArgs ingest_data;
    ingest_data.add_flags(ingest_cmd, false);
    std::string ingest_out;
    ingest_cmd->add_option("--out", ingest_out, "output directory (optional)");

    // synth
    auto* synth_cmd =
        app.add_subcommand("synth", "generate a synthetic drifting stream as JSONL");
    SynthConfig synth_cfg;
    std::string synth_epoch = "2012-02";
    std::string synth_out;
    synth_cmd->add_option("--periods", synth_cfg.n_periods, "periods")
        ->capture_default_str();
    synth_cmd->add_option("--samples", synth_cfg.samples_per_period, "samples per period")
        ->capture_default_str();
    synth_cmd->add_option("--labels", synth_cfg.n_labels, "label count")
        ->capture_default_str();
    synth_cmd->add_option("--vocab", synth_cfg.vocab_size, "vocabulary size")
        ->capture_default_str();
    synth_cmd->add_option("--drift", synth_cfg.drift_rate, "drift rate in [0,1]")
        ->capture_default_str();
    synth_cmd->add_option("--seed", synth_cfg.seed, "seed")->capture_default_str();
    synth_cmd->add_option("--epoch", synth_epoch, "month of period 0 (YYYY-MM)")
        ->capture_default_str();
    synth_cmd->add_option("--out", synth_out, "output directory")->required();

    // bench
    auto* bench_cmd = app.add_subcommand(
        "bench", "run the robust-fraction benchmark over an (n, k) grid");
    DataArgs bench_data;
    bench_data.add_flags(bench_cmd, true);
    BenchConfig bench_cfg;
    std::int64_t bench_n_start = 36;
    std::int64_t bench_last = -1;
    bool save_votes = true;
    std::string bench_out;
    bench_cmd->add_option("--n", bench_cfg.ns, "base coverage values")
        ->delimiter(',')
        ->capture_default_str();
    bench_cmd->add_option("--k", bench_cfg.ks, "aggregation sizes")
        ->delimiter(',')
        ->capture_default_str();
    bench_cmd->add_option("--n-start", bench_n_start, "first test period")
        ->capture_default_str();
    bench_cmd->add_option("--last-period", bench_last,
                          "last test period (default: last store period)");
    bench_cmd->add_option("--tau-max", bench_cfg.tau_max, "largest tau in the curves")
        ->capture_default_str();
    bench_cmd->add_option("--alpha", bench_cfg.alpha, "smoothing strength")
        ->capture_default_str();
    bench_cmd->add_option("--hash-dim", bench_cfg.features.hash_dim,
                          "feature hashing dimension (power of two)")
        ->capture_default_str();
    bench_cmd->add_option("--threads", bench_cfg.threads, "worker threads");
    bench_cmd->add_flag("--save-votes,!--no-save-votes", save_votes,
                        "persist per-sample vote and radii tables");
    bench_cmd->add_option("--out", bench_out, "output directory")->required();

    // baseline
    auto* base_cmd = app.add_subcommand(
        "baseline", "clean accuracy of single base models, no aggregation");
    DataArgs base_data;
    base_data.add_flags(base_cmd, true);
    std::vector<std::int32_t> base_ns = {1, 3, 6, 9, 12};
    std::int64_t base_n_start = 36;
    std::int64_t base_last = -1;
    double base_alpha = 1.0;
    std::uint32_t base_hash_dim = 1u << 18;
    std::int32_t base_threads = static_cast<std::int32_t>(default_threads());
    std::string base_out;
    base_cmd->add_option("--n", base_ns, "training window lengths")
        ->delimiter(',')
        ->capture_default_str();
    base_cmd->add_option("--n-start", base_n_start, "first test period")
        ->capture_default_str();
    base_cmd->add_option("--last-period", base_last,
                         "last test period (default: last store period)");
    base_cmd->add_option("--alpha", base_alpha, "smoothing strength")
        ->capture_default_str();
    base_cmd->add_option("--hash-dim", base_hash_dim,
                         "feature hashing dimension (power of two)")
        ->capture_default_str();
    base_cmd->add_option("--threads", base_threads, "worker threads");
    base_cmd->add_option("--out", base_out, "output directory (optional)");

    // certify
    auto* cert_cmd = app.add_subcommand(
        "certify", "certify one vote vector (earliness and duration radii)");
    std::string cert_votes, cert_labels;
    std::int32_t cert_n = 1;
    bool cert_oracle = false;
    cert_cmd->add_option("--votes", cert_votes, "votes oldest to newest, e.g. 0,0,1,0,0,1")
        ->required();
    cert_cmd->add_option("--labels", cert_labels, "label names, e.g. 0,1,2")->required();
    cert_cmd->add_option("--n", cert_n, "base coverage")->capture_default_str();
    cert_cmd->add_flag("--oracle", cert_oracle, "also print brute-force oracle radii");

    // oracle-check
    auto* oc_cmd = app.add_subcommand(
        "oracle-check", "randomized certifier-vs-oracle soundness/tightness check");
    OracleCheckConfig oc_cfg;
    std::string oc_out;
    oc_cmd->add_option("--trials", oc_cfg.trials, "number of random vote vectors")
        ->capture_default_str();
    oc_cmd->add_option("--k-max", oc_cfg.k_max, "largest aggregation size")
        ->capture_default_str();
    oc_cmd->add_option("--labels-max", oc_cfg.labels_max, "largest label-space size")
        ->capture_default_str();
    oc_cmd->add_option("--n-max", oc_cfg.n_max, "largest base coverage")
        ->capture_default_str();
    oc_cmd->add_option("--seed", oc_cfg.seed, "seed")->capture_default_str();
    oc_cmd->add_option("--out", oc_out, "output directory (optional)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest_cmd->parsed()) return cmd_ingest_stats(ingest_data, ingest_out);
        if (synth_cmd->parsed()) return cmd_synth(synth_cfg, synth_epoch, synth_out);
        if (bench_cmd->parsed())
            return cmd_bench(bench_data, bench_cfg, bench_n_start, bench_last,
                             save_votes, bench_out);
        if (base_cmd->parsed())
            return cmd_baseline(base_data, base_ns, base_n_start, base_last, base_alpha,
                                base_hash_dim, base_threads, base_out);
        if (cert_cmd->parsed())
            return cmd_certify(cert_votes, cert_labels, cert_n, cert_oracle);
        if (oc_cmd->parsed()) return cmd_oracle_check(oc_cfg, oc_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

// trendlab command-line runner: deterministic batch experiments with
// manifest-based reproducibility. Verbs: signature, trend, replicate,
// riskparity, strangles, selftest.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "trendlab/analysis.hpp"
#include "trendlab/filters.hpp"
#include "trendlab/options.hpp"
#include "trendlab/portfolio.hpp"
#include "trendlab/rng.hpp"
#include "trendlab/strategy.hpp"
#include "trendlab/synth.hpp"
#include "trendlab/timeseries.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace trendlab;

namespace {

constexpr const char* kArtifactVersion = "0.1.0";

int g_exit = 0; // acceptance-style failures (selftest, bound violations) set 3

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// All artifacts are written to a temp file first and renamed into place, so a
// crash never leaves a half-written output and reruns are atomic swaps.
void atomic_write(const fs::path& path, const std::string& content) {
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

// Column-oriented CSV with %.17g cells; NaN becomes an empty cell, matching
// the loader's blank-cell convention.
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& cols) {
    std::string out;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c) out += ',';
        out += header[c];
    }
    out += '\n';
    const std::size_t rows = cols.empty() ? 0 : cols[0].size();
    for (const auto& col : cols)
        if (col.size() != rows)
            throw std::runtime_error("internal: ragged output table");
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) out += ',';
            if (!std::isnan(cols[c][r])) out += fmt(cols[c][r]);
        }
        out += '\n';
    }
    return out;
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config " + path + ": " + e.what());
    }
    // a manifest is itself a valid config: use its embedded config block
    if (j.is_object() && j.contains("config") && j["config"].is_object())
        j = j["config"];
    if (!j.is_object())
        throw std::invalid_argument("config " + path +
                                    ": top level must be a JSON object");
    return j;
}

// flags win over config-file values: only absent flags read from the file
template <class T>
void cfg_get(const CLI::App& cmd, const json& cfg, const char* flag,
             const char* key, T& dst) {
    if (cmd.count(flag) == 0 && cfg.contains(key)) {
        try {
            dst = cfg.at(key).get<T>();
        } catch (const json::exception& e) {
            throw std::invalid_argument(std::string("config field '") + key +
                                        "': " + e.what());
        }
    }
}

struct Common {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
};

void add_common(CLI::App* cmd, Common& c) {
    if (const char* env = std::getenv("TRENDLAB_OUT")) c.out_dir = env;
    cmd->add_option("--config", c.config_path,
                    "JSON config file (a manifest.json also works); "
                    "explicit flags override file values");
    cmd->add_option("--out", c.out_dir,
                    "output directory (default $TRENDLAB_OUT or .)");
    cmd->add_option("--seed", c.seed, "RNG seed");
}

void common_from_cfg(const CLI::App& cmd, const json& cfg, Common& c) {
    cfg_get(cmd, cfg, "--seed", "seed", c.seed);
}

void write_manifest(const Common& c, const std::string& command,
                    const json& resolved,
                    const std::vector<std::string>& artifacts) {
    json m;
    m["artifact_version"] = kArtifactVersion;
    m["command"] = command;
    m["config"] = resolved;
    m["artifacts"] = artifacts;
    atomic_write(fs::path(c.out_dir) / "manifest.json", m.dump(2) + "\n");
}

struct KernelOpts {
    std::string kind = "iid";
    double sigma2 = 1.0;
    double amplitude = 0.0;
    double ell = 1.0;
    double q = 0.0;
};

void add_kernel(CLI::App* cmd, KernelOpts& k) {
    cmd->add_option("--kernel", k.kind, "change correlation kernel: iid|exp|ar1");
    cmd->add_option("--sigma2", k.sigma2, "change variance C(0)");
    cmd->add_option("--amplitude", k.amplitude,
                    "exp kernel C(1): positive trends, negative mean-reverts");
    cmd->add_option("--ell", k.ell, "exp kernel decay scale (ticks)");
    cmd->add_option("--q", k.q, "ar1 kernel autocorrelation");
}

void kernel_from_cfg(const CLI::App& cmd, const json& cfg, KernelOpts& k) {
    cfg_get(cmd, cfg, "--kernel", "kernel", k.kind);
    cfg_get(cmd, cfg, "--sigma2", "sigma2", k.sigma2);
    cfg_get(cmd, cfg, "--amplitude", "amplitude", k.amplitude);
    cfg_get(cmd, cfg, "--ell", "ell", k.ell);
    cfg_get(cmd, cfg, "--q", "q", k.q);
}

CorrelationKernel make_kernel(const KernelOpts& k) {
    if (k.kind == "iid") return CorrelationKernel::iid_kernel(k.sigma2);
    if (k.kind == "exp")
        return CorrelationKernel::exponential(k.sigma2, k.amplitude, k.ell);
    if (k.kind == "ar1") return CorrelationKernel::ar1(k.sigma2, k.q);
    throw std::invalid_argument("unknown kernel '" + k.kind +
                                "' (expected iid|exp|ar1)");
}

json kernel_json(const KernelOpts& k) {
    return {{"kernel", k.kind},
            {"sigma2", k.sigma2},
            {"amplitude", k.amplitude},
            {"ell", k.ell},
            {"q", k.q}};
}

struct InputOpts {
    std::string path; // empty: synthesize instead
    std::string time_column;
    std::string join = "inner";
    bool log_prices = false;
};

void add_input(CLI::App* cmd, InputOpts& in) {
    cmd->add_option("--input", in.path, "CSV input (time column + asset columns); "
                                        "omit to synthesize data");
    cmd->add_option("--time-column", in.time_column,
                    "name of the time column (default: first column)");
    cmd->add_option("--join", in.join, "blank-cell policy: inner|ffill");
    cmd->add_flag("--log-prices", in.log_prices,
                  "work on log levels so changes are relative returns");
}

void input_from_cfg(const CLI::App& cmd, const json& cfg, InputOpts& in) {
    cfg_get(cmd, cfg, "--input", "input", in.path);
    cfg_get(cmd, cfg, "--time-column", "time_column", in.time_column);
    cfg_get(cmd, cfg, "--join", "join", in.join);
    cfg_get(cmd, cfg, "--log-prices", "log_prices", in.log_prices);
}

json input_json(const InputOpts& in) {
    return {{"input", in.path},
            {"time_column", in.time_column},
            {"join", in.join},
            {"log_prices", in.log_prices}};
}

AssetPanel load_panel(const InputOpts& in) {
    CsvOptions o;
    o.time_column = in.time_column;
    o.log_prices = in.log_prices;
    if (in.join == "inner")
        o.join = JoinPolicy::inner_join;
    else if (in.join == "ffill")
        o.join = JoinPolicy::forward_fill;
    else
        throw std::invalid_argument("unknown join '" + in.join +
                                    "' (expected inner|ffill)");
    return load_csv_panel(in.path, o);
}

// One-factor synthetic panel: each column a*F + b*I_k with a^2 + b^2 = 1, so
// every column keeps the kernel's autocovariance while pairs correlate at rho.
AssetPanel synth_panel(const CorrelationKernel& kernel, std::size_t n_assets,
                       std::size_t n_ticks, double rho, std::uint64_t seed) {
    if (n_assets == 0) throw std::invalid_argument("assets must be positive");
    if (rho < 0.0 || rho >= 1.0)
        throw std::invalid_argument("rho must lie in [0, 1)");
    const TimeSeries factor = generate_walk(kernel, n_ticks, seed, 1000);
    const double a = std::sqrt(rho), b = std::sqrt(1.0 - rho);
    AssetPanel p;
    p.ticks = factor.ticks;
    for (std::size_t k = 0; k < n_assets; ++k) {
        const TimeSeries idio = generate_walk(kernel, n_ticks, seed, 2000 + k);
        std::vector<double> col(n_ticks);
        for (std::size_t t = 0; t < n_ticks; ++t)
            col[t] = a * factor.values[t] + b * idio.values[t];
        p.columns.push_back(std::move(col));
        p.names.push_back("asset_" + std::to_string(k + 1));
    }
    p.validate();
    return p;
}

json fit_json(const FitResult& f) {
    json j{{"model", f.model}, {"a", f.a},       {"b", f.b},
           {"c", f.c},         {"se_a", f.se_a}, {"se_b", f.se_b},
           {"se_c", f.se_c},   {"r2", f.r2},     {"n", f.n}};
    if (f.model == "vshape") {
        j["kink"] = f.kink;
        j["se_kink"] = f.se_kink;
    }
    return j;
}

double profile_value(const PositionShape& shape, double tau, double lambda,
                     double x) {
    if (shape.kind == PositionShape::Kind::linear)
        return upsilon(tau, lambda) * (x * x - 1.0);
    return lambda * tau * (std::fabs(x) - std::sqrt(2.0 / std::numbers::pi));
}

// ---------------------------------------------------------------- signature

struct SignatureOpts {
    Common common;
    KernelOpts kernel;
    InputOpts input;
    std::size_t n = 200000;
    int tau_max = 50;
    int batch = 10;
    double s0 = 0.0;
};

void run_signature(const CLI::App& cmd, SignatureOpts& o) {
    const json cfg = load_config(o.common.config_path);
    common_from_cfg(cmd, cfg, o.common);
    kernel_from_cfg(cmd, cfg, o.kernel);
    input_from_cfg(cmd, cfg, o.input);
    cfg_get(cmd, cfg, "--n", "n", o.n);
    cfg_get(cmd, cfg, "--tau-max", "tau_max", o.tau_max);
    cfg_get(cmd, cfg, "--batch", "batch", o.batch);
    cfg_get(cmd, cfg, "--s0", "s0", o.s0);

    const bool synthetic = o.input.path.empty();
    TimeSeries walk;
    if (synthetic) {
        walk = generate_walk(make_kernel(o.kernel), o.n, o.common.seed, 0, o.s0);
    } else {
        walk = load_panel(o.input).series(0);
    }
    const SignatureCurve emp = signature_empirical(walk, o.tau_max, o.batch);

    std::vector<double> analytic(emp.taus.size(),
                                 std::numeric_limits<double>::quiet_NaN());
    if (synthetic) {
        const SignatureCurve ana =
            signature_analytic(make_kernel(o.kernel), o.tau_max);
        analytic = ana.variance;
    }
    atomic_write(fs::path(o.common.out_dir) / "signature.csv",
                 csv_table({"tau", "sigma2_analytic", "sigma2_empirical",
                            "stderr"},
                           {emp.taus, analytic, emp.variance, emp.stderrs}));

    json resolved = kernel_json(o.kernel);
    resolved.update(input_json(o.input));
    resolved["seed"] = o.common.seed;
    resolved["n"] = o.n;
    resolved["tau_max"] = o.tau_max;
    resolved["batch"] = o.batch;
    resolved["s0"] = o.s0;
    write_manifest(o.common, "signature", resolved, {"signature.csv"});
}

// -------------------------------------------------------------------- trend

struct TrendOpts {
    Common common;
    KernelOpts kernel;
    InputOpts input;
    std::size_t n = 200000;
    double tau = 180.0;
    double lambda = 1.0;
    std::string shape = "linear";
    double cap = 1.0;
    double tau_sigma = 10.0;
    double gamma = 1.05;
    double capital = 1.0;
    std::size_t rebalance = 1;
    bool normalized = false;
    std::size_t bins = 20;
    double s0 = 0.0;
};

void run_trend(const CLI::App& cmd, TrendOpts& o) {
    const json cfg = load_config(o.common.config_path);
    common_from_cfg(cmd, cfg, o.common);
    kernel_from_cfg(cmd, cfg, o.kernel);
    input_from_cfg(cmd, cfg, o.input);
    cfg_get(cmd, cfg, "--n", "n", o.n);
    cfg_get(cmd, cfg, "--tau", "tau", o.tau);
    cfg_get(cmd, cfg, "--lambda", "lambda", o.lambda);
    cfg_get(cmd, cfg, "--shape", "shape", o.shape);
    cfg_get(cmd, cfg, "--cap", "cap", o.cap);
    cfg_get(cmd, cfg, "--tau-sigma", "tau_sigma", o.tau_sigma);
    cfg_get(cmd, cfg, "--gamma", "gamma", o.gamma);
    cfg_get(cmd, cfg, "--capital", "capital", o.capital);
    cfg_get(cmd, cfg, "--rebalance", "rebalance", o.rebalance);
    cfg_get(cmd, cfg, "--normalized", "normalized", o.normalized);
    cfg_get(cmd, cfg, "--bins", "bins", o.bins);
    cfg_get(cmd, cfg, "--s0", "s0", o.s0);

    TrendConfig config;
    config.tau = o.tau;
    config.lambda = o.lambda;
    config.shape = PositionShape::parse(o.shape, o.cap);
    config.vol.tau_sigma = o.tau_sigma;
    config.vol.gamma = o.gamma;
    config.capital = o.capital;
    config.rebalance_every = o.rebalance;
    config.normalized_input = o.normalized;
    config.validate();

    TimeSeries in;
    if (o.input.path.empty()) {
        const TimeSeries walk =
            generate_walk(make_kernel(o.kernel), o.n, o.common.seed, 0, o.s0);
        // in normalized mode the strategy consumes returns directly
        in = o.normalized ? diff(walk) : walk;
    } else {
        in = load_panel(o.input).series(0);
    }
    const StrategyLedger led = ema_trend(in, config);

    {
        AssetPanel out;
        out.ticks = led.ticks;
        out.names = {"change", "sigma", "ret", "indicator", "position", "gain",
                     "aggregated"};
        out.columns = {led.changes,  led.sigma, led.returns, led.indicator,
                       led.position, led.gain,  led.aggregated};
        const fs::path target = fs::path(o.common.out_dir) / "ledger.csv";
        if (!target.parent_path().empty())
            fs::create_directories(target.parent_path());
        fs::path tmp = target;
        tmp += ".tmp";
        write_csv(tmp.string(), out);
        fs::rename(tmp, target);
    }

    const bool has_profile =
        o.normalized && (config.shape.kind == PositionShape::Kind::linear ||
                         config.shape.kind == PositionShape::Kind::sign);
    BinOptions bo;
    bo.n_bins = o.bins;
    bo.start = led.warmup;
    bo.stride = led.decorrelation_stride();
    // short inputs: shrink the bin count instead of dropping every bin
    const std::size_t avail =
        led.gain.size() > led.warmup
            ? (led.gain.size() - led.warmup + bo.stride - 1) / bo.stride
            : 0;
    if (avail < 3 * bo.min_count)
        throw std::invalid_argument(
            "trend: only " + std::to_string(avail) +
            " decorrelated samples after warm-up; need at least " +
            std::to_string(3 * bo.min_count) + " for a binned curve");
    bo.n_bins = std::min(bo.n_bins, avail / bo.min_count);
    if (has_profile)
        bo.reference = [&](double x) {
            return profile_value(config.shape, o.tau, o.lambda, x);
        };
    const BinnedCurve curve = bin_conditional(led.indicator, led.aggregated, bo);

    std::vector<double> counts(curve.counts.size());
    std::vector<double> target(curve.centers.size(),
                               std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < counts.size(); ++i)
        counts[i] = static_cast<double>(curve.counts[i]);
    if (!curve.target.empty()) target = curve.target;
    atomic_write(fs::path(o.common.out_dir) / "curve.csv",
                 csv_table({"center", "mean", "stderr", "count", "target"},
                           {curve.centers, curve.means, curve.stderrs, counts,
                            target}));

    json fits;
    fits["quadratic"] = fit_json(fit_quadratic(curve));
    if (config.shape.kind == PositionShape::Kind::sign)
        fits["vshape"] = fit_json(fit_vshape(curve));
    fits["n_samples"] = curve.n_used;
    fits["warmup"] = led.warmup;
    if (o.normalized && config.shape.kind == PositionShape::Kind::linear &&
        o.rebalance == 1) {
        const auto res = theorem_residual(led, config);
        double worst = 0.0;
        for (double r : res) worst = std::max(worst, std::fabs(r));
        fits["theorem"] = {{"upsilon", upsilon(o.tau, o.lambda)},
                           {"max_abs_residual", worst}};
    }
    atomic_write(fs::path(o.common.out_dir) / "fit.json", fits.dump(2) + "\n");

    json resolved = kernel_json(o.kernel);
    resolved.update(input_json(o.input));
    resolved["seed"] = o.common.seed;
    resolved["n"] = o.n;
    resolved["tau"] = o.tau;
    resolved["lambda"] = o.lambda;
    resolved["shape"] = o.shape;
    resolved["cap"] = o.cap;
    resolved["tau_sigma"] = o.tau_sigma;
    resolved["gamma"] = o.gamma;
    resolved["capital"] = o.capital;
    resolved["rebalance"] = o.rebalance;
    resolved["normalized"] = o.normalized;
    resolved["bins"] = o.bins;
    resolved["s0"] = o.s0;
    write_manifest(o.common, "trend", resolved,
                   {"ledger.csv", "curve.csv", "fit.json"});
}

// ---------------------------------------------------------------- replicate

struct ReplicateOpts {
    Common common;
    KernelOpts kernel;
    InputOpts input;
    std::string reference; // CSV of per-tick reference returns
    std::size_t assets = 8;
    std::size_t n = 100000;
    double rho = 0.5;
    double hidden_tau = 180.0;
    std::size_t subset = 0; // 0: half the panel
    std::vector<double> taus{15, 30, 60, 120, 180, 240, 360};
    double lambda = 1.0;
    double tau_sigma = 10.0;
    double gamma = 1.05;
    double tc = 0.02, mf = 0.01, incentive = 0.20, risk_free = 0.0;
    std::size_t tpy = 252;
};

void run_replicate(const CLI::App& cmd, ReplicateOpts& o) {
    const json cfg = load_config(o.common.config_path);
    common_from_cfg(cmd, cfg, o.common);
    kernel_from_cfg(cmd, cfg, o.kernel);
    input_from_cfg(cmd, cfg, o.input);
    cfg_get(cmd, cfg, "--reference", "reference", o.reference);
    cfg_get(cmd, cfg, "--assets", "assets", o.assets);
    cfg_get(cmd, cfg, "--n", "n", o.n);
    cfg_get(cmd, cfg, "--rho", "rho", o.rho);
    cfg_get(cmd, cfg, "--hidden-tau", "hidden_tau", o.hidden_tau);
    cfg_get(cmd, cfg, "--subset", "subset", o.subset);
    cfg_get(cmd, cfg, "--taus", "taus", o.taus);
    cfg_get(cmd, cfg, "--lambda", "lambda", o.lambda);
    cfg_get(cmd, cfg, "--tau-sigma", "tau_sigma", o.tau_sigma);
    cfg_get(cmd, cfg, "--gamma", "gamma", o.gamma);
    cfg_get(cmd, cfg, "--tc", "tc", o.tc);
    cfg_get(cmd, cfg, "--mf", "mf", o.mf);
    cfg_get(cmd, cfg, "--incentive", "incentive", o.incentive);
    cfg_get(cmd, cfg, "--risk-free", "risk_free", o.risk_free);
    cfg_get(cmd, cfg, "--tpy", "tpy", o.tpy);

    const AssetPanel panel =
        o.input.path.empty()
            ? synth_panel(make_kernel(o.kernel), o.assets, o.n, o.rho,
                          o.common.seed)
            : load_panel(o.input);

    PortfolioConfig base;
    base.trend.lambda = o.lambda;
    base.trend.vol.tau_sigma = o.tau_sigma;
    base.trend.vol.gamma = o.gamma;

    std::vector<double> reference;
    if (!o.reference.empty()) {
        InputOpts ref_in;
        ref_in.path = o.reference;
        reference = load_panel(ref_in).series(0).values;
    } else {
        // closed loop: hide a trend portfolio on the leading columns and ask
        // the scan to find its timescale back
        std::size_t subset = o.subset ? o.subset : panel.n_assets() / 2;
        subset = std::max<std::size_t>(1, std::min(subset, panel.n_assets()));
        AssetPanel sub;
        sub.ticks = panel.ticks;
        sub.dated = panel.dated;
        for (std::size_t k = 0; k < subset; ++k) {
            sub.columns.push_back(panel.columns[k]);
            sub.names.push_back(panel.names[k]);
        }
        PortfolioConfig hidden = base;
        hidden.trend.tau = o.hidden_tau;
        reference = run_multi_trend(sub, hidden).gross;
    }

    FeeSchedule fees;
    fees.transaction_cost_rate = o.tc;
    fees.management_fee = o.mf;
    fees.incentive_fee = o.incentive;
    fees.risk_free_rate = o.risk_free;
    fees.ticks_per_year = o.tpy;
    fees.validate();

    const TauScanResult scan = tau_scan(panel, reference, o.taus, base, fees);

    std::vector<double> taus, corrs, lambdas, sg, sn;
    for (const auto& p : scan.points) {
        taus.push_back(p.tau);
        corrs.push_back(p.correlation);
        lambdas.push_back(p.matched_lambda);
        sg.push_back(p.sharpe_gross);
        sn.push_back(p.sharpe_net);
    }
    atomic_write(fs::path(o.common.out_dir) / "tau_scan.csv",
                 csv_table({"tau", "correlation", "matched_lambda",
                            "sharpe_gross", "sharpe_net"},
                           {taus, corrs, lambdas, sg, sn}));

    const TauScanPoint& best = scan.points.at(scan.best_index);
    json bj{{"best_tau", best.tau},
            {"correlation", best.correlation},
            {"matched_lambda", best.matched_lambda},
            {"sharpe_gross", best.sharpe_gross},
            {"sharpe_net", best.sharpe_net}};
    atomic_write(fs::path(o.common.out_dir) / "best.json", bj.dump(2) + "\n");

    PortfolioConfig best_cfg = base;
    best_cfg.trend.tau = best.tau;
    const PortfolioLedger led = run_multi_trend(panel, best_cfg);
    const std::vector<double> net = apply_fees(led.gross, fees);
    {
        AssetPanel out;
        out.ticks = led.ticks;
        out.dated = panel.dated;
        out.names = {"gross", "net"};
        out.columns = {led.gross, net};
        const fs::path target = fs::path(o.common.out_dir) / "net_pnl.csv";
        if (!target.parent_path().empty())
            fs::create_directories(target.parent_path());
        fs::path tmp = target;
        tmp += ".tmp";
        write_csv(tmp.string(), out);
        fs::rename(tmp, target);
    }

    json resolved = kernel_json(o.kernel);
    resolved.update(input_json(o.input));
    resolved["seed"] = o.common.seed;
    resolved["reference"] = o.reference;
    resolved["assets"] = o.assets;
    resolved["n"] = o.n;
    resolved["rho"] = o.rho;
    resolved["hidden_tau"] = o.hidden_tau;
    resolved["subset"] = o.subset;
    resolved["taus"] = o.taus;
    resolved["lambda"] = o.lambda;
    resolved["tau_sigma"] = o.tau_sigma;
    resolved["gamma"] = o.gamma;
    resolved["tc"] = o.tc;
    resolved["mf"] = o.mf;
    resolved["incentive"] = o.incentive;
    resolved["risk_free"] = o.risk_free;
    resolved["tpy"] = o.tpy;
    write_manifest(o.common, "replicate", resolved,
                   {"tau_scan.csv", "best.json", "net_pnl.csv"});
    std::printf("best tau %s (correlation %.4f)\n", fmt(best.tau).c_str(),
                best.correlation);
}

// --------------------------------------------------------------- riskparity

struct RiskParityOpts {
    Common common;
    KernelOpts kernel;
    InputOpts input;
    std::size_t assets = 8;
    std::size_t n = 100000;
    double rho = 0.5;
    double tau = 60.0;
    double lambda = 1.0;
    double tau_sigma = 10.0;
    double gamma = 1.05;
};

void run_riskparity(const CLI::App& cmd, RiskParityOpts& o) {
    const json cfg = load_config(o.common.config_path);
    common_from_cfg(cmd, cfg, o.common);
    kernel_from_cfg(cmd, cfg, o.kernel);
    input_from_cfg(cmd, cfg, o.input);
    cfg_get(cmd, cfg, "--assets", "assets", o.assets);
    cfg_get(cmd, cfg, "--n", "n", o.n);
    cfg_get(cmd, cfg, "--rho", "rho", o.rho);
    cfg_get(cmd, cfg, "--tau", "tau", o.tau);
    cfg_get(cmd, cfg, "--lambda", "lambda", o.lambda);
    cfg_get(cmd, cfg, "--tau-sigma", "tau_sigma", o.tau_sigma);
    cfg_get(cmd, cfg, "--gamma", "gamma", o.gamma);

    const AssetPanel panel =
        o.input.path.empty()
            ? synth_panel(make_kernel(o.kernel), o.assets, o.n, o.rho,
                          o.common.seed)
            : load_panel(o.input);

    PortfolioConfig config;
    config.trend.tau = o.tau;
    config.trend.lambda = o.lambda;
    config.trend.vol.tau_sigma = o.tau_sigma;
    config.trend.vol.gamma = o.gamma;
    config.validate(panel.n_assets());

    const PortfolioLedger led = run_multi_trend(panel, config);
    const BoundReport rep = convexity_bound_check(led, config);

    const auto w = config.resolved_weights(panel.n_assets());
    const std::size_t m = led.gross.size();
    const std::size_t stride = led.per_asset.at(0).decorrelation_stride();
    std::vector<double> sticks, sx, sy;
    for (std::size_t t = led.warmup; t < m; t += stride) {
        double agg = 0.0;
        for (std::size_t k = 0; k < panel.n_assets(); ++k)
            agg += w[k] * led.per_asset[k].aggregated[t];
        sticks.push_back(static_cast<double>(led.ticks[t]));
        sx.push_back(led.rp_indicator[t]);
        sy.push_back(agg);
    }
    atomic_write(fs::path(o.common.out_dir) / "scatter.csv",
                 csv_table({"tick", "rp_indicator", "aggregated"},
                           {sticks, sx, sy}));

    std::vector<double> px, py;
    for (double x = -4.0; x <= 4.0 + 1e-12; x += 0.05) {
        px.push_back(x);
        py.push_back(upsilon(o.tau, o.lambda) * (x * x - 1.0));
    }
    atomic_write(fs::path(o.common.out_dir) / "parabola.csv",
                 csv_table({"x", "parabola"}, {px, py}));

    json vj{{"checked", rep.checked},
            {"violations", rep.violations},
            {"min_gap", rep.min_gap},
            {"max_abs_gap", rep.max_abs_gap},
            {"tolerance", rep.tolerance},
            {"passed", rep.passed()}};
    atomic_write(fs::path(o.common.out_dir) / "violations.json",
                 vj.dump(2) + "\n");

    json resolved = kernel_json(o.kernel);
    resolved.update(input_json(o.input));
    resolved["seed"] = o.common.seed;
    resolved["assets"] = o.assets;
    resolved["n"] = o.n;
    resolved["rho"] = o.rho;
    resolved["tau"] = o.tau;
    resolved["lambda"] = o.lambda;
    resolved["tau_sigma"] = o.tau_sigma;
    resolved["gamma"] = o.gamma;
    write_manifest(o.common, "riskparity", resolved,
                   {"scatter.csv", "parabola.csv", "violations.json"});

    if (!rep.passed()) {
        std::fprintf(stderr,
                     "riskparity: %zu bound violations (min gap %s)\n",
                     rep.violations, fmt(rep.min_gap).c_str());
        g_exit = 3;
    } else {
        std::printf("riskparity: bound holds at %zu points (min gap %s)\n",
                    rep.checked, fmt(rep.min_gap).c_str());
    }
}

// ---------------------------------------------------------------- strangles

struct StrangleOpts {
    Common common;
    KernelOpts kernel;
    InputOpts input;
    double s0 = 100.0;
    double dk = 1.0;
    double range = 0.5;
    double maturity = 252.0;
    double vol = 1.0;
    std::vector<std::size_t> rebalance{1, 2, 5, 21, 63, 126, 252};
};

void run_strangles(const CLI::App& cmd, StrangleOpts& o) {
    const json cfg = load_config(o.common.config_path);
    common_from_cfg(cmd, cfg, o.common);
    kernel_from_cfg(cmd, cfg, o.kernel);
    input_from_cfg(cmd, cfg, o.input);
    cfg_get(cmd, cfg, "--s0", "s0", o.s0);
    cfg_get(cmd, cfg, "--dk", "dk", o.dk);
    cfg_get(cmd, cfg, "--range", "range", o.range);
    cfg_get(cmd, cfg, "--maturity", "maturity", o.maturity);
    cfg_get(cmd, cfg, "--vol", "vol", o.vol);
    cfg_get(cmd, cfg, "--rebalance", "rebalance", o.rebalance);

    StrangleBook book = uniform_book(o.s0, o.dk, o.range, o.maturity);
    price_book(book, o.vol);

    const std::size_t ticks = static_cast<std::size_t>(o.maturity) + 1;
    const TimeSeries path =
        o.input.path.empty()
            ? generate_walk(make_kernel(o.kernel), ticks, o.common.seed, 0,
                            o.s0)
            : load_panel(o.input).series(0);

    const double span = o.range * std::fabs(o.s0);
    std::vector<double> grid, discrete, quad;
    for (double sT = o.s0 - span; sT <= o.s0 + span + 1e-9; sT += o.dk / 4.0) {
        grid.push_back(sT);
        discrete.push_back(strangle_payoff(book, sT));
        quad.push_back(quadratic_payoff(o.s0, sT));
    }
    atomic_write(fs::path(o.common.out_dir) / "payoff.csv",
                 csv_table({"sT", "strangle_payoff", "quadratic_payoff"},
                           {grid, discrete, quad}));

    const VarianceSwapReport tick_rep = variance_swap_pnl(path, book, 1);
    json idj{{"sigma_bar", tick_rep.sigma_bar},
             {"premium", tick_rep.premium},
             {"continuum_payoff", tick_rep.continuum_payoff},
             {"discrete_payoff", tick_rep.discrete_payoff},
             {"payoff_error", tick_rep.payoff_error},
             {"hedge_pnl", tick_rep.hedge_pnl},
             {"realized_variance", tick_rep.realized_variance},
             {"lhs", tick_rep.lhs},
             {"rhs", tick_rep.rhs},
             {"residual", tick_rep.residual}};
    atomic_write(fs::path(o.common.out_dir) / "identity.json",
                 idj.dump(2) + "\n");

    std::vector<double> rn, rres, rrv, rhedge, rlhs;
    for (std::size_t nreb : o.rebalance) {
        if (nreb == 0 || nreb > static_cast<std::size_t>(o.maturity)) continue;
        const VarianceSwapReport r = variance_swap_pnl(path, book, nreb);
        rn.push_back(static_cast<double>(nreb));
        rres.push_back(r.residual);
        rrv.push_back(r.realized_variance);
        rhedge.push_back(r.hedge_pnl);
        rlhs.push_back(r.lhs);
    }
    atomic_write(fs::path(o.common.out_dir) / "sweep.csv",
                 csv_table({"rebalance", "residual", "realized_variance",
                            "hedge_pnl", "net_pnl"},
                           {rn, rres, rrv, rhedge, rlhs}));

    json resolved = kernel_json(o.kernel);
    resolved.update(input_json(o.input));
    resolved["seed"] = o.common.seed;
    resolved["s0"] = o.s0;
    resolved["dk"] = o.dk;
    resolved["range"] = o.range;
    resolved["maturity"] = o.maturity;
    resolved["vol"] = o.vol;
    resolved["rebalance"] = o.rebalance;
    write_manifest(o.common, "strangles", resolved,
                   {"payoff.csv", "identity.json", "sweep.csv"});
}

// ----------------------------------------------------------------- selftest

bool report(const char* name, double worst, double tol) {
    const bool ok = worst < tol;
    std::printf("selftest: %-28s %s  (max residual %.3e, tolerance %.0e)\n",
                name, ok ? "ok  " : "FAIL", worst, tol);
    return ok;
}

void run_selftest(const CLI::App&, Common& c) {
    bool all_ok = true;

    {
        // aggregation identity of the squared filter
        double worst = 0.0;
        GaussRng taus(stream_seed(c.seed, 900));
        for (int rep = 0; rep < 50; ++rep) {
            const double tau = 2.0 + 498.0 * taus.uniform();
            const auto x = gauss_vector(4096, c.seed, 901 + rep);
            const auto res = filter_identity_residual(x, tau);
            for (double r : res) worst = std::max(worst, std::fabs(r));
        }
        all_ok &= report("filter identity", worst, 1e-10);
    }
    {
        // toy strategy telescoping identity
        double worst = 0.0;
        for (int rep = 0; rep < 20; ++rep) {
            const auto walk = generate_walk(CorrelationKernel::iid_kernel(1.0),
                                            2000, c.seed, 910 + rep);
            const ToyRun toy = toy_trend(walk, 0.05);
            const double scale = std::max(1.0, std::fabs(toy.identity_value));
            worst = std::max(
                worst, std::fabs(toy.total_gain - toy.identity_value) / scale);
        }
        all_ok &= report("toy trend identity", worst, 1e-9);
    }
    {
        // aggregated P&L parabola for the linear strategy
        double worst = 0.0;
        for (double tau : {2.0, 5.5, 21.0, 180.0}) {
            for (int rep = 0; rep < 5; ++rep) {
                TrendConfig tc;
                tc.tau = tau;
                tc.normalized_input = true;
                const auto r = TimeSeries::from_values(
                    gauss_vector(5000, c.seed, 920 + rep));
                const StrategyLedger led = ema_trend(r, tc);
                for (double v : theorem_residual(led, tc))
                    worst = std::max(worst, std::fabs(v));
            }
        }
        all_ok &= report("aggregated P&L theorem", worst, 1e-10);
    }
    {
        // static-book variance swap decomposition
        double worst = 0.0;
        StrangleBook book = uniform_book(100.0, 0.5, 0.5, 100.0);
        price_book(book, 1.0);
        for (int rep = 0; rep < 20; ++rep) {
            const auto path = generate_walk(CorrelationKernel::iid_kernel(1.0),
                                            101, c.seed, 940 + rep, 100.0);
            for (std::size_t nreb : {1ul, 5ul, 21ul}) {
                const auto r = variance_swap_pnl(path, book, nreb);
                worst = std::max(worst, std::fabs(r.residual));
            }
        }
        all_ok &= report("variance swap identity", worst, 1e-10);
    }
    {
        // convexity lower bound of the diversified book
        double worst_gap = 0.0;
        std::size_t violations = 0;
        for (int rep = 0; rep < 5; ++rep) {
            const AssetPanel panel =
                synth_panel(CorrelationKernel::iid_kernel(1.0), 6, 20000,
                            0.2 + 0.1 * rep, stream_seed(c.seed, 950 + rep));
            PortfolioConfig pc;
            pc.trend.tau = 30.0;
            const PortfolioLedger led = run_multi_trend(panel, pc);
            const BoundReport rep2 = convexity_bound_check(led, pc);
            violations += rep2.violations;
            worst_gap = std::min(worst_gap, rep2.min_gap);
        }
        const bool ok = violations == 0;
        std::printf("selftest: %-28s %s  (violations %zu, min gap %.3e)\n",
                    "risk-parity bound", ok ? "ok  " : "FAIL", violations,
                    worst_gap);
        all_ok &= ok;
    }

    if (!all_ok) {
        std::fprintf(stderr, "selftest: FAILED\n");
        g_exit = 3;
    } else {
        std::printf("selftest: all identities hold\n");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"trendlab: reproducible trend-following and variance-swap "
                 "experiments"};
    app.require_subcommand(1);

    SignatureOpts sig;
    CLI::App* sig_cmd = app.add_subcommand(
        "signature", "realized variance sigma^2(tau) vs aggregation scale");
    add_common(sig_cmd, sig.common);
    add_kernel(sig_cmd, sig.kernel);
    add_input(sig_cmd, sig.input);
    sig_cmd->add_option("--n", sig.n, "synthetic path length");
    sig_cmd->add_option("--tau-max", sig.tau_max, "largest aggregation scale");
    sig_cmd->add_option("--batch", sig.batch,
                        "batch size multiple for standard errors");
    sig_cmd->add_option("--s0", sig.s0, "synthetic start level");
    sig_cmd->callback([&]() { run_signature(*sig_cmd, sig); });

    TrendOpts tr;
    CLI::App* tr_cmd = app.add_subcommand(
        "trend", "EMA trend strategy ledger, binned P&L curve and fits");
    add_common(tr_cmd, tr.common);
    add_kernel(tr_cmd, tr.kernel);
    add_input(tr_cmd, tr.input);
    tr_cmd->add_option("--n", tr.n, "synthetic path length");
    tr_cmd->add_option("--tau", tr.tau, "trend timescale");
    tr_cmd->add_option("--lambda", tr.lambda, "risk scale");
    tr_cmd->add_option("--shape", tr.shape,
                       "position shape: linear|sign|cap|tanh");
    tr_cmd->add_option("--cap", tr.cap, "saturation level for cap shape");
    tr_cmd->add_option("--tau-sigma", tr.tau_sigma, "volatility EMA timescale");
    tr_cmd->add_option("--gamma", tr.gamma, "volatility calibration factor");
    tr_cmd->add_option("--capital", tr.capital, "capital scale");
    tr_cmd->add_option("--rebalance", tr.rebalance, "rebalancing period");
    tr_cmd->add_flag("--normalized", tr.normalized,
                     "input is already unit-variance returns");
    tr_cmd->add_option("--bins", tr.bins, "bins of the conditional curve");
    tr_cmd->add_option("--s0", tr.s0, "synthetic start level");
    tr_cmd->callback([&]() { run_trend(*tr_cmd, tr); });

    ReplicateOpts rep;
    CLI::App* rep_cmd = app.add_subcommand(
        "replicate",
        "correlation-maximizing tau scan against a reference return series");
    add_common(rep_cmd, rep.common);
    add_kernel(rep_cmd, rep.kernel);
    add_input(rep_cmd, rep.input);
    rep_cmd->add_option("--reference", rep.reference,
                        "CSV of reference returns (default: synthetic "
                        "hidden-tau portfolio)");
    rep_cmd->add_option("--assets", rep.assets, "synthetic panel width");
    rep_cmd->add_option("--n", rep.n, "synthetic panel length");
    rep_cmd->add_option("--rho", rep.rho, "synthetic cross-correlation");
    rep_cmd->add_option("--hidden-tau", rep.hidden_tau,
                        "timescale of the hidden reference trend");
    rep_cmd->add_option("--subset", rep.subset,
                        "assets in the hidden reference (0: half)");
    rep_cmd->add_option("--taus", rep.taus, "scan grid")->delimiter(',');
    rep_cmd->add_option("--lambda", rep.lambda, "risk scale");
    rep_cmd->add_option("--tau-sigma", rep.tau_sigma,
                        "volatility EMA timescale");
    rep_cmd->add_option("--gamma", rep.gamma, "volatility calibration factor");
    rep_cmd->add_option("--tc", rep.tc, "annualized transaction-cost drag");
    rep_cmd->add_option("--mf", rep.mf, "annualized management fee");
    rep_cmd->add_option("--incentive", rep.incentive,
                        "incentive fee above the high-water mark");
    rep_cmd->add_option("--risk-free", rep.risk_free,
                        "flat annualized risk-free rate");
    rep_cmd->add_option("--tpy", rep.tpy, "ticks per year");
    rep_cmd->callback([&]() { run_replicate(*rep_cmd, rep); });

    RiskParityOpts rp;
    CLI::App* rp_cmd = app.add_subcommand(
        "riskparity",
        "trend-on-diversified-book scatter and convexity lower bound check");
    add_common(rp_cmd, rp.common);
    add_kernel(rp_cmd, rp.kernel);
    add_input(rp_cmd, rp.input);
    rp_cmd->add_option("--assets", rp.assets, "synthetic panel width");
    rp_cmd->add_option("--n", rp.n, "synthetic panel length");
    rp_cmd->add_option("--rho", rp.rho, "synthetic cross-correlation");
    rp_cmd->add_option("--tau", rp.tau, "trend timescale");
    rp_cmd->add_option("--lambda", rp.lambda, "risk scale");
    rp_cmd->add_option("--tau-sigma", rp.tau_sigma, "volatility EMA timescale");
    rp_cmd->add_option("--gamma", rp.gamma, "volatility calibration factor");
    rp_cmd->callback([&]() { run_riskparity(*rp_cmd, rp); });

    StrangleOpts st;
    CLI::App* st_cmd = app.add_subcommand(
        "strangles",
        "static strangle book, payoff convergence and variance-swap identity");
    add_common(st_cmd, st.common);
    add_kernel(st_cmd, st.kernel);
    add_input(st_cmd, st.input);
    st_cmd->add_option("--s0", st.s0, "anchor level");
    st_cmd->add_option("--dk", st.dk, "strike spacing");
    st_cmd->add_option("--range", st.range, "strike range as fraction of s0");
    st_cmd->add_option("--maturity", st.maturity, "maturity in ticks");
    st_cmd->add_option("--vol", st.vol, "pricing volatility per sqrt(tick)");
    st_cmd->add_option("--rebalance", st.rebalance, "hedging period sweep")
        ->delimiter(',');
    st_cmd->callback([&]() { run_strangles(*st_cmd, st); });

    Common self;
    CLI::App* self_cmd = app.add_subcommand(
        "selftest", "run the exact-identity suite; nonzero exit on breach");
    add_common(self_cmd, self);
    self_cmd->callback([&]() { run_selftest(*self_cmd, self); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return g_exit;
}

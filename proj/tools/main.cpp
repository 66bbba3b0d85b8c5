// sdseq command-line front end: streaming dominance tests (`run`), the
// simulation lab (`simulate`), and summaries of its outputs (`report`).
//
// Exit codes for `run`: 0 = stream completed without rejection, 10 = the
// dominance null was rejected, 2 = configuration error, 3 = data error.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sdseq/sdseq.hpp"

using json = nlohmann::json;
using namespace sdseq;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRejected = 10;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- small utilities --------------------------------------------------------

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse " + what + " from '" + s + "'");
    }
}

// Shortest round-trip decimal representation; keeps the JSONL schema
// bit-exact across runs.
std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

OrderSpec parse_order(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts[0] == "fsd") {
        if (parts.size() != 1) throw ConfigError("order fsd takes no parameters");
        return OrderSpec::fsd();
    }
    if (parts[0] == "ksd") {
        if (parts.size() != 3) throw ConfigError("order ksd needs the form ksd:K:A");
        const int k = static_cast<int>(parse_double(parts[1], "ksd order k"));
        const double a = parse_double(parts[2], "ksd lower bound");
        try {
            return OrderSpec::ksd(k, a);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }
    if (parts[0] == "icx") {
        if (parts.size() != 2) throw ConfigError("order icx needs the form icx:B");
        return OrderSpec::icx(parse_double(parts[1], "icx upper bound"));
    }
    if (parts[0] == "laplace") {
        if (parts.size() == 1) return OrderSpec::laplace();
        std::vector<double> grid;
        for (const auto& r : split(parts[1], ','))
            grid.push_back(parse_double(r, "laplace index"));
        try {
            return OrderSpec::laplace(std::move(grid));
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }
    throw ConfigError("unknown order '" + text + "' (expect fsd | ksd:K:A | icx:B | laplace[:r,...])");
}

WeightKind parse_weight_kind(const std::string& s) {
    if (s == "exp") return WeightKind::ExpSelfNormalized;
    if (s == "hedge") return WeightKind::Hedge;
    if (s == "linear") return WeightKind::Linear;
    if (s == "uniform") return WeightKind::Uniform;
    throw ConfigError("unknown weight scheme '" + s + "' (expect exp | hedge | linear | uniform)");
}

// --- run --------------------------------------------------------------------

struct RunOptions {
    std::string order = "fsd";
    std::string variant = "adagro-exp";
    std::string weights;  // empty: variant default
    double alpha = 0.05;
    double eta = 1.0;
    int burn_in = 50;
    int grid_k = 100;
    double cap_c = 0.01;
    double constant_lambda = 0.1;
    double grid_lo = 0.0;
    double grid_hi = 1.0;
    int grid_n = 21;
    std::string support;  // comma list; overrides the interval grid
    double subexp_nu = 0.0, subexp_c = 0.0, subexp_rho = 0.0;
    std::string input;     // paired CSV
    std::string input_x, input_y;  // unpaired batch files
    std::string output;    // JSONL; empty = stdout
    std::string config_path;
    std::int64_t bounded_history = 0;
    std::uint64_t seed = 0x5eed;  // reservoir seed for bounded-history mode
};

void apply_config_file(RunOptions& opt, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json cfg;
    try {
        in >> cfg;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    auto get = [&](const char* key, auto& slot) {
        if (cfg.contains(key)) slot = cfg.at(key).get<std::decay_t<decltype(slot)>>();
    };
    get("order", opt.order);
    get("variant", opt.variant);
    get("weights", opt.weights);
    get("alpha", opt.alpha);
    get("eta", opt.eta);
    get("burn_in", opt.burn_in);
    get("grid_k", opt.grid_k);
    get("cap_c", opt.cap_c);
    get("constant_lambda", opt.constant_lambda);
    get("grid_lo", opt.grid_lo);
    get("grid_hi", opt.grid_hi);
    get("grid_n", opt.grid_n);
    get("input", opt.input);
    get("output", opt.output);
    get("bounded_history", opt.bounded_history);
    get("seed", opt.seed);
    if (cfg.contains("support")) {
        std::string joined;
        for (const auto& v : cfg.at("support"))
            joined += (joined.empty() ? "" : ",") + format_double(v.get<double>());
        opt.support = joined;
    }
    if (cfg.contains("subexp")) {
        const auto& se = cfg.at("subexp");
        opt.subexp_nu = se.value("nu", 0.0);
        opt.subexp_c = se.value("scale_c", 0.0);
        opt.subexp_rho = se.value("rho", 0.0);
    }
}

RunConfig build_run_config(const RunOptions& opt) {
    RunConfig cfg;
    cfg.order = parse_order(opt.order);
    const auto v = parse_variant(opt.variant);
    if (!v) throw ConfigError("unknown variant '" + opt.variant + "'");
    cfg.variant = *v;
    if (!opt.weights.empty()) {
        cfg.weights.kind = parse_weight_kind(opt.weights);
        cfg.weights.eta = opt.eta;
        cfg.weights_overridden = true;
    } else {
        cfg.weights.eta = opt.eta;
    }
    if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");
    cfg.alpha = opt.alpha;
    try {
        cfg.cap = BetParams(opt.cap_c);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    cfg.constant_lambda = opt.constant_lambda;
    cfg.grid.lo = opt.grid_lo;
    cfg.grid.hi = opt.grid_hi;
    cfg.grid.initial_count = opt.grid_n;
    cfg.grid.quantile_k = opt.grid_k;
    cfg.grid.burn_in = opt.burn_in;
    if (!opt.support.empty()) {
        std::vector<double> pts;
        for (const auto& s : split(opt.support, ','))
            pts.push_back(parse_double(s, "support point"));
        cfg.grid.finite_support = std::move(pts);
    }
    if (opt.subexp_nu > 0.0 || opt.subexp_c > 0.0 || opt.subexp_rho > 0.0) {
        try {
            cfg.subexp = opt.subexp_rho > 0.0
                             ? SubExpParams(opt.subexp_nu, opt.subexp_c, opt.subexp_rho)
                             : SubExpParams::make_tuned(opt.subexp_nu, opt.subexp_c);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }
    try {
        return cfg.normalized();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

void emit_record(std::ostream& os, const RoundRecord& rec) {
    os << "{\"t\":" << rec.t << ",\"log_e_value\":" << format_double(rec.log_e_value)
       << ",\"rejected\":" << (rec.rejected ? "true" : "false")
       << ",\"active_threshold_count\":" << rec.active_threshold_count << "}\n";
}

// Parses one CSV data row "x,y"; 1-based line number used in errors.
ObservationPair parse_csv_row(const std::string& line, std::size_t line_no, std::int64_t t) {
    const auto cells = split(line, ',');
    if (cells.size() != 2)
        throw DataError("data error at line " + std::to_string(line_no) + ": expected 'x,y'");
    auto cell = [&](const std::string& s) {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    };
    try {
        return ObservationPair{cell(cells[0]), cell(cells[1]), t};
    } catch (const std::exception&) {
        throw DataError("data error at line " + std::to_string(line_no) + ": cannot parse '" +
                        line + "'");
    }
}

std::vector<double> parse_batch_line(const std::string& line, std::size_t line_no,
                                     const std::string& which) {
    std::vector<double> out;
    std::string normalized = line;
    for (char& c : normalized)
        if (c == ',' || c == '\t') c = ' ';
    std::istringstream iss(normalized);
    std::string tok;
    while (iss >> tok) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw DataError("data error in " + which + " at line " + std::to_string(line_no) +
                            ": cannot parse '" + tok + "'");
        }
    }
    if (out.empty())
        throw DataError("data error in " + which + " at line " + std::to_string(line_no) +
                        ": empty batch");
    return out;
}

int cmd_run(const RunOptions& opt) {
    const RunConfig cfg = build_run_config(opt);
    const bool batch_mode = !opt.input_x.empty() || !opt.input_y.empty();
    if (batch_mode && (opt.input_x.empty() || opt.input_y.empty()))
        throw ConfigError("batch mode needs both --input-x and --input-y");
    if (batch_mode && !opt.input.empty())
        throw ConfigError("choose either --input or --input-x/--input-y");
    if (batch_mode && opt.bounded_history > 0)
        throw ConfigError("bounded-history mode applies to paired streaming input only");

    std::ofstream out_file;
    std::ostream* os = &std::cout;
    if (!opt.output.empty()) {
        out_file.open(opt.output);
        if (!out_file) throw ConfigError("cannot open output file " + opt.output);
        os = &out_file;
    }

    bool rejected = false;
    if (batch_mode) {
        // Unpaired batches: one line per round in each file; the round
        // e-variable bets on the batch ECDF difference. Fixed grid, uniform
        // weights, constant or UP bets.
        if (cfg.variant != Variant::Constant && cfg.variant != Variant::Up)
            throw ConfigError("batch mode supports variants constant and up");
        if (!cfg.order.is_fsd()) throw ConfigError("batch mode currently tests the fsd order");
        std::ifstream fx(opt.input_x), fy(opt.input_y);
        if (!fx) throw ConfigError("cannot open " + opt.input_x);
        if (!fy) throw ConfigError("cannot open " + opt.input_y);
        ThresholdGrid grid = cfg.grid.finite_support
                                 ? finite_support_grid(*cfg.grid.finite_support)
                                 : equidistant_grid(cfg.grid.lo, cfg.grid.hi, cfg.grid.initial_count);
        std::vector<UPState> up(cfg.variant == Variant::Up ? grid.size() : 0, UPState(cfg.up));
        EProcess ep;
        std::string lx, ly;
        std::size_t line_no = 0;
        std::int64_t t = 0;
        while (true) {
            const bool gx = static_cast<bool>(std::getline(fx, lx));
            const bool gy = static_cast<bool>(std::getline(fy, ly));
            if (!gx && !gy) break;
            ++line_no;
            if (gx != gy)
                throw DataError("data error: batch files differ in length at line " +
                                std::to_string(line_no));
            if (lx.empty() && ly.empty()) continue;
            const auto bx = parse_batch_line(lx, line_no, opt.input_x);
            const auto by = parse_batch_line(ly, line_no, opt.input_y);
            ++t;
            double s = 0.0;
            const double w = 1.0 / static_cast<double>(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const double lam =
                    cfg.variant == Variant::Constant ? cfg.constant_lambda : up[i].bet();
                s += w * batch_e(lam, grid.z[i], bx, by);
            }
            ep.step(s);
            if (cfg.variant == Variant::Up)
                for (std::size_t i = 0; i < grid.size(); ++i)
                    up[i].update(batch_e(1.0, grid.z[i], bx, by));
            RoundRecord rec{t, ep.log_wealth(), ville_reject(ep, SignificanceLevel(cfg.alpha)),
                            static_cast<std::int64_t>(grid.size())};
            emit_record(*os, rec);
            rejected = rec.rejected;
        }
        if (t == 0) throw DataError("data error: no batches found");
        return rejected ? kExitRejected : kExitOk;
    }

    std::ifstream in(opt.input);
    if (opt.input.empty()) throw ConfigError("--input is required");
    if (!in) throw ConfigError("cannot open input file " + opt.input);
    std::string line;
    if (!std::getline(in, line)) throw DataError("data error: empty input");
    {
        std::string header = line;
        header.erase(std::remove_if(header.begin(), header.end(), ::isspace), header.end());
        if (header != "x,y")
            throw DataError("data error at line 1: expected header 'x,y', got '" + line + "'");
    }

    std::optional<StreamTester> tester;
    std::optional<BoundedStreamTester> bounded;
    if (opt.bounded_history > 0)
        bounded.emplace(cfg, static_cast<std::size_t>(opt.bounded_history), opt.seed);
    else
        tester.emplace(cfg);

    std::size_t line_no = 1;
    std::int64_t t = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto pair = parse_csv_row(line, line_no, ++t);
        try {
            const auto rec = bounded ? bounded->observe(pair) : tester->observe(pair);
            emit_record(*os, rec);
            rejected = rec.rejected;
        } catch (const std::invalid_argument& e) {
            throw DataError("data error at line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (t == 0) throw DataError("data error: no observations found");
    return rejected ? kExitRejected : kExitOk;
}

// --- simulate ---------------------------------------------------------------

struct SimulateOptions {
    std::string scenario = "anticorr";
    std::string order = "fsd";
    std::string variants = "adagro-exp,adagro-hedge,adagro-linear,gro,constant";
    std::int64_t reps = 100;
    std::int64_t horizon = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string out_dir = ".";
    double grid_lo = 0.0, grid_hi = 1.0;
    bool grid_interval_set = false;
    double subexp_nu = 0.0, subexp_c = 0.0, subexp_rho = 0.0;
};

simlab::ScenarioSpec parse_scenario(const SimulateOptions& opt) {
    simlab::ScenarioSpec spec;
    spec.horizon = opt.horizon;
    spec.replications = opt.reps;
    spec.seed = opt.seed;
    const auto parts = split(opt.scenario, ':');
    if (parts[0] == "anticorr") {
        spec.dgp = simlab::AnticorrDiscrete{};
        spec.name = "anticorr";
        return spec;
    }
    if (parts[0] == "gauss" || parts[0] == "gaussian") {
        // gauss:mu_x,sd_x,mu_y,sd_y,rho
        if (parts.size() != 2) throw ConfigError("gaussian scenario: gauss:mu_x,sd_x,mu_y,sd_y,rho");
        const auto p = split(parts[1], ',');
        if (p.size() != 5) throw ConfigError("gaussian scenario needs 5 parameters");
        spec.dgp = simlab::BivariateGaussian{parse_double(p[0], "mu_x"), parse_double(p[1], "sd_x"),
                                             parse_double(p[2], "mu_y"), parse_double(p[3], "sd_y"),
                                             parse_double(p[4], "rho")};
        spec.name = "gauss";
        return spec;
    }
    if (parts[0] == "kink") {
        simlab::KinkedUniform k;
        if (parts.size() >= 2) k.z0 = parse_double(parts[1], "z0");
        if (parts.size() >= 3) k.c0 = parse_double(parts[2], "c0");
        if (parts.size() >= 4) {
            if (parts[3] == "independent") k.coupling = simlab::Coupling::Independent;
            else if (parts[3] == "comonotone") k.coupling = simlab::Coupling::Comonotone;
            else if (parts[3] == "antimonotone") k.coupling = simlab::Coupling::Antimonotone;
            else throw ConfigError("unknown coupling '" + parts[3] + "'");
        }
        spec.dgp = k;
        spec.name = "kink";
        return spec;
    }
    throw ConfigError("unknown scenario '" + opt.scenario + "'");
}

RunConfig scenario_run_config(const SimulateOptions& opt, const simlab::ScenarioSpec& spec,
                              Variant v) {
    RunConfig cfg;
    cfg.variant = v;
    cfg.order = parse_order(opt.order);
    cfg.alpha = opt.alpha;
    if (std::holds_alternative<simlab::AnticorrDiscrete>(spec.dgp)) {
        cfg.grid.finite_support = std::vector<double>{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
    } else if (std::holds_alternative<simlab::KinkedUniform>(spec.dgp)) {
        cfg.grid.lo = 0.0;
        cfg.grid.hi = 1.0;
    } else {
        cfg.grid.lo = -1.5;
        cfg.grid.hi = 1.5;
    }
    if (opt.grid_interval_set) {
        cfg.grid.lo = opt.grid_lo;
        cfg.grid.hi = opt.grid_hi;
        cfg.grid.finite_support.reset();
    }
    if (v == Variant::SubExp) {
        cfg.subexp = opt.subexp_rho > 0.0
                         ? SubExpParams(opt.subexp_nu, opt.subexp_c, opt.subexp_rho)
                         : SubExpParams::make_tuned(opt.subexp_nu, opt.subexp_c);
    }
    return cfg.normalized();
}

int cmd_simulate(const SimulateOptions& opt) {
    if (opt.reps < 1) throw ConfigError("--reps must be >= 1");
    if (opt.horizon < 1) throw ConfigError("--horizon must be >= 1");
    if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");
    const auto spec = parse_scenario(opt);
    const SignificanceLevel alpha(opt.alpha);

    std::vector<Variant> variants;
    for (const auto& name : split(opt.variants, ',')) {
        const auto v = parse_variant(name);
        if (!v) throw ConfigError("unknown variant '" + name + "'");
        variants.push_back(*v);
    }
    if (variants.empty()) throw ConfigError("no variants given");

    std::filesystem::create_directories(opt.out_dir);
    const auto metrics_path = std::filesystem::path(opt.out_dir) / (spec.name + "_metrics.csv");
    const auto rej_path = std::filesystem::path(opt.out_dir) / (spec.name + "_rejections.jsonl");
    std::ofstream metrics_file(metrics_path);
    std::ofstream rej_file(rej_path);
    if (!metrics_file || !rej_file)
        throw ConfigError("cannot write outputs under " + opt.out_dir);

    const unsigned threads =
        opt.threads > 0 ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    std::vector<simlab::VariantMetrics> all;
    std::printf("scenario %s: horizon=%lld reps=%lld alpha=%g\n", spec.name.c_str(),
                static_cast<long long>(spec.horizon), static_cast<long long>(spec.replications),
                opt.alpha);
    for (Variant v : variants) {
        const auto cfg = scenario_run_config(opt, spec, v);
        const auto traces = simlab::run_scenario(spec, cfg, threads);
        auto metrics = simlab::aggregate_metrics(traces, alpha);
        simlab::write_rejections_jsonl(rej_file, spec.name, variant_name(v), opt.alpha, traces);
        const double final_epower = metrics.e_power.back();
        const double max_ville = metrics.max_ville_error();
        double mean_rt = std::numeric_limits<double>::quiet_NaN();
        if (!metrics.rejection_times.empty()) {
            double s = 0;
            for (auto rt : metrics.rejection_times) s += static_cast<double>(rt);
            mean_rt = s / static_cast<double>(metrics.rejection_times.size());
        }
        std::printf("  %-14s max_ville=%.4f e_power(T)=%.3f rejected=%zu/%lld mean_rej_t=%.1f\n",
                    variant_name(v), max_ville, final_epower, metrics.rejection_times.size(),
                    static_cast<long long>(spec.replications), mean_rt);
        all.push_back({variant_name(v), std::move(metrics)});
    }
    simlab::write_metrics_csv(metrics_file, all);
    std::printf("wrote %s and %s\n", metrics_path.string().c_str(), rej_path.string().c_str());
    return kExitOk;
}

// --- report -----------------------------------------------------------------

struct ReportOptions {
    std::string metrics;
    std::string rejections;
    double alpha = 0.05;
};

int cmd_report(const ReportOptions& opt) {
    if (opt.metrics.empty() && opt.rejections.empty())
        throw ConfigError("report needs --metrics and/or --rejections");
    if (!opt.metrics.empty()) {
        std::ifstream in(opt.metrics);
        if (!in) throw ConfigError("cannot open " + opt.metrics);
        std::string header;
        if (!std::getline(in, header)) throw DataError("data error: empty metrics file");
        const auto cols = split(header, ',');
        if (cols.size() < 3 || cols[0] != "t" || cols[1].rfind("ville_error_", 0) != 0)
            throw DataError("data error: unrecognized metrics schema in " + opt.metrics);
        std::vector<std::string> variants;
        for (std::size_t i = 1; i < cols.size(); i += 2)
            variants.push_back(cols[i].substr(std::string("ville_error_").size()));
        std::vector<double> max_ville(variants.size(), 0.0);
        std::vector<double> final_epower(variants.size(), 0.0);
        std::map<std::int64_t, std::vector<double>> checkpoints;
        const std::vector<std::int64_t> marks{100, 500, 1000, 2000};
        std::string line;
        std::int64_t last_t = 0;
        std::size_t rows = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto cells = split(line, ',');
            if (cells.size() != cols.size())
                throw DataError("data error: ragged row in " + opt.metrics);
            ++rows;
            last_t = static_cast<std::int64_t>(parse_double(cells[0], "t"));
            for (std::size_t vi = 0; vi < variants.size(); ++vi) {
                const double ve = parse_double(cells[1 + 2 * vi], "ville_error");
                const double ep = parse_double(cells[2 + 2 * vi], "e_power");
                max_ville[vi] = std::max(max_ville[vi], ve);
                final_epower[vi] = ep;
            }
            if (std::find(marks.begin(), marks.end(), last_t) != marks.end()) {
                std::vector<double> row;
                for (std::size_t vi = 0; vi < variants.size(); ++vi)
                    row.push_back(parse_double(cells[2 + 2 * vi], "e_power"));
                checkpoints[last_t] = row;
            }
        }
        if (rows == 0) throw DataError("data error: metrics file has no rows");
        std::printf("metrics: %s (T = %lld)\n", opt.metrics.c_str(),
                    static_cast<long long>(last_t));
        for (std::size_t vi = 0; vi < variants.size(); ++vi) {
            std::printf("  %-14s max_ville=%.4f (%s alpha=%.3f)  e_power(T)=%.3f\n",
                        variants[vi].c_str(), max_ville[vi],
                        max_ville[vi] <= opt.alpha ? "<=" : "EXCEEDS", opt.alpha,
                        final_epower[vi]);
            for (const auto& [t, row] : checkpoints)
                std::printf("      e_power(%lld) = %.3f\n", static_cast<long long>(t), row[vi]);
        }
    }
    if (!opt.rejections.empty()) {
        std::ifstream in(opt.rejections);
        if (!in) throw ConfigError("cannot open " + opt.rejections);
        std::map<std::string, std::vector<std::int64_t>> times;
        std::map<std::string, std::int64_t> totals;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            json rec;
            try {
                rec = json::parse(line);
            } catch (const std::exception&) {
                throw DataError("data error at line " + std::to_string(line_no) + ": bad JSON");
            }
            if (!rec.contains("variant") || !rec.contains("rejection_time"))
                throw DataError("data error at line " + std::to_string(line_no) +
                                ": missing fields");
            const auto variant = rec.at("variant").get<std::string>();
            ++totals[variant];
            if (!rec.at("rejection_time").is_null())
                times[variant].push_back(rec.at("rejection_time").get<std::int64_t>());
        }
        if (totals.empty()) throw DataError("data error: rejections file is empty");
        std::printf("rejections: %s\n", opt.rejections.c_str());
        for (const auto& [variant, total] : totals) {
            auto ts = times[variant];
            std::sort(ts.begin(), ts.end());
            double mean = std::numeric_limits<double>::quiet_NaN(), median = mean;
            if (!ts.empty()) {
                double s = 0;
                for (auto t : ts) s += static_cast<double>(t);
                mean = s / static_cast<double>(ts.size());
                median = static_cast<double>(ts[ts.size() / 2]);
            }
            std::printf("  %-14s rejected %zu/%lld  mean_t=%.1f median_t=%.0f\n", variant.c_str(),
                        ts.size(), static_cast<long long>(total), mean, median);
        }
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential anytime-valid stochastic dominance testing"};
    app.require_subcommand(1);

    RunOptions run_opt;
    auto* run = app.add_subcommand("run", "Stream a paired CSV (or unpaired batches) through a test");
    run->add_option("--config", run_opt.config_path, "JSON config file (flags win on conflict)");
    run->add_option("--order", run_opt.order, "fsd | ksd:K:A | icx:B | laplace[:r,...]");
    run->add_option("--variant", run_opt.variant,
                    "adagro-exp | adagro-hedge | adagro-linear | gro | constant | up | subexp");
    run->add_option("--weights", run_opt.weights, "exp | hedge | linear | uniform");
    run->add_option("--alpha", run_opt.alpha, "significance level");
    run->add_option("--eta", run_opt.eta, "weight learning rate");
    run->add_option("--burn-in", run_opt.burn_in, "rounds before threshold adaptation");
    run->add_option("--grid-k", run_opt.grid_k, "quantile grid size after burn-in");
    run->add_option("--cap-c", run_opt.cap_c, "bet cap: bets stay within [0, 1-c]");
    run->add_option("--constant-lambda", run_opt.constant_lambda, "bet for the constant variant");
    run->add_option("--grid-lo", run_opt.grid_lo, "initial grid lower end");
    run->add_option("--grid-hi", run_opt.grid_hi, "initial grid upper end");
    run->add_option("--grid-n", run_opt.grid_n, "initial grid size");
    run->add_option("--support", run_opt.support, "finite support as comma list");
    run->add_option("--subexp-nu", run_opt.subexp_nu, "sub-exponential variance proxy");
    run->add_option("--subexp-c", run_opt.subexp_c, "sub-exponential scale");
    run->add_option("--subexp-rho", run_opt.subexp_rho, "gamma mixture parameter");
    run->add_option("--input", run_opt.input, "paired CSV with header x,y");
    run->add_option("--input-x", run_opt.input_x, "unpaired batches for X, one batch per line");
    run->add_option("--input-y", run_opt.input_y, "unpaired batches for Y, one batch per line");
    run->add_option("--output", run_opt.output, "JSONL output path (default stdout)");
    run->add_option("--bounded-history", run_opt.bounded_history,
                    "reservoir size M for O(K+M)-memory streaming (approximation)");
    run->add_option("--seed", run_opt.seed, "reservoir seed for bounded-history mode");

    SimulateOptions sim_opt;
    auto* sim = app.add_subcommand("simulate", "Run a simulation scenario and write metrics");
    sim->add_option("--scenario", sim_opt.scenario,
                    "anticorr | gauss:mu_x,sd_x,mu_y,sd_y,rho | kink:z0[:c0[:coupling]]");
    sim->add_option("--order", sim_opt.order, "order to test");
    sim->add_option("--variants", sim_opt.variants, "comma list of estimator variants");
    sim->add_option("--reps", sim_opt.reps, "number of replications");
    sim->add_option("--horizon", sim_opt.horizon, "rounds per replication");
    sim->add_option("--alpha", sim_opt.alpha, "significance level");
    sim->add_option("--seed", sim_opt.seed, "master seed");
    sim->add_option("--threads", sim_opt.threads, "worker threads (default: hardware)");
    sim->add_option("--out-dir", sim_opt.out_dir, "output directory");
    auto* glo = sim->add_option("--grid-lo", sim_opt.grid_lo, "initial threshold interval lower end");
    auto* ghi = sim->add_option("--grid-hi", sim_opt.grid_hi, "initial threshold interval upper end");
    sim->add_option("--subexp-nu", sim_opt.subexp_nu, "sub-exponential variance proxy");
    sim->add_option("--subexp-c", sim_opt.subexp_c, "sub-exponential scale");
    sim->add_option("--subexp-rho", sim_opt.subexp_rho, "gamma mixture parameter");

    ReportOptions rep_opt;
    auto* rep = app.add_subcommand("report", "Summarize simulate outputs");
    rep->add_option("--metrics", rep_opt.metrics, "metrics CSV from simulate");
    rep->add_option("--rejections", rep_opt.rejections, "rejections JSONL from simulate");
    rep->add_option("--alpha", rep_opt.alpha, "level to compare Ville error against");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed()) {
            if (!run_opt.config_path.empty()) {
                // Config file first; flags the user actually passed win.
                RunOptions from_file = run_opt;
                apply_config_file(from_file, run_opt.config_path);
                auto merged = from_file;
                auto pick = [&](const char* flag, auto& dst, const auto& cli_value) {
                    if (run->count(flag) > 0) dst = cli_value;
                };
                pick("--order", merged.order, run_opt.order);
                pick("--variant", merged.variant, run_opt.variant);
                pick("--weights", merged.weights, run_opt.weights);
                pick("--alpha", merged.alpha, run_opt.alpha);
                pick("--eta", merged.eta, run_opt.eta);
                pick("--burn-in", merged.burn_in, run_opt.burn_in);
                pick("--grid-k", merged.grid_k, run_opt.grid_k);
                pick("--cap-c", merged.cap_c, run_opt.cap_c);
                pick("--constant-lambda", merged.constant_lambda, run_opt.constant_lambda);
                pick("--grid-lo", merged.grid_lo, run_opt.grid_lo);
                pick("--grid-hi", merged.grid_hi, run_opt.grid_hi);
                pick("--grid-n", merged.grid_n, run_opt.grid_n);
                pick("--support", merged.support, run_opt.support);
                pick("--subexp-nu", merged.subexp_nu, run_opt.subexp_nu);
                pick("--subexp-c", merged.subexp_c, run_opt.subexp_c);
                pick("--subexp-rho", merged.subexp_rho, run_opt.subexp_rho);
                pick("--input", merged.input, run_opt.input);
                pick("--input-x", merged.input_x, run_opt.input_x);
                pick("--input-y", merged.input_y, run_opt.input_y);
                pick("--output", merged.output, run_opt.output);
                pick("--bounded-history", merged.bounded_history, run_opt.bounded_history);
                pick("--seed", merged.seed, run_opt.seed);
                return cmd_run(merged);
            }
            return cmd_run(run_opt);
        }
        if (sim->parsed()) {
            sim_opt.grid_interval_set = glo->count() > 0 || ghi->count() > 0;
            return cmd_simulate(sim_opt);
        }
        return cmd_report(rep_opt);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const DataError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
}

// prlab: command-line front end.
//
// Exit codes: 0 ok, 1 verdict failure (battery/facts/transfer/selftest),
// 2 usage error, 3 data error (missing or corrupt input, range beyond data).

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "prlab/prlab.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace prlab;

namespace {

enum ExitCode { kOk = 0, kVerdict = 1, kUsage = 2, kData = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- formatting ------------------------------------------------------------

std::string fmt(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw DataError("write to '" + path + "' failed");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& text) {
    const auto colon = text.find(':');
    try {
        if (colon == std::string::npos) throw std::invalid_argument("");
        std::size_t used = 0;
        const auto lo = std::stoull(text.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument("");
        const auto hi = std::stoull(text.substr(colon + 1), &used);
        if (used != text.size() - colon - 1) throw std::invalid_argument("");
        if (lo >= hi) throw UsageError("range '" + text + "' is empty (want lo:hi with lo < hi)");
        return {lo, hi};
    } catch (const std::logic_error&) {
        throw UsageError("malformed range '" + text + "' (want lo:hi)");
    }
}

/// "pow2" (default), "linear:STEP" or an explicit comma list.
CheckpointPlan make_plan(const std::string& text, std::uint64_t cap, int min_exp) {
    if (text.empty() || text == "pow2") return CheckpointPlan::powers_of_two(cap, min_exp, true);
    try {
        if (text.rfind("linear:", 0) == 0) return CheckpointPlan::linear(std::stoull(text.substr(7)), cap);
        std::vector<std::uint64_t> pts;
        std::stringstream ss(text);
        for (std::string item; std::getline(ss, item, ',');) pts.push_back(std::stoull(item));
        CheckpointPlan plan(std::move(pts));
        if (plan.back() > cap) throw DataError("checkpoint " + std::to_string(plan.back()) + " beyond cap " + std::to_string(cap));
        return plan;
    } catch (const std::logic_error&) {
        throw UsageError("malformed checkpoint plan '" + text + "' (pow2, linear:STEP or a,b,c)");
    }
}

json plan_json(const CheckpointPlan& p) { return json(p.points()); }

// ---- sequence sources ------------------------------------------------------

struct SeqArgs {
    std::string seq;
    std::uint64_t n = 0;
};

struct LoadedSeq {
    std::shared_ptr<const SeqBlock> block;
    std::uint64_t n = 0;  // statistics run over [1, n]
    json meta;
};

std::optional<fs::path> cache_dir() {
    const char* env = std::getenv("PRLAB_CACHE_DIR");
    if (!env || !*env) return std::nullopt;
    return fs::path(env);
}

fs::path cache_path(const fs::path& dir, SeqKind kind, std::uint64_t lo, std::uint64_t hi) {
    return dir / (std::string(to_string(kind)) + "-" + std::to_string(lo) + "-" + std::to_string(hi) + ".prseq");
}

/// Sieves [lo, hi), going through the block cache when PRLAB_CACHE_DIR is set.
SeqBlock sieve_cached(SeqKind kind, std::uint64_t lo, std::uint64_t hi, unsigned workers, bool* from_cache) {
    if (from_cache) *from_cache = false;
    const auto dir = cache_dir();
    if (dir) {
        const auto path = cache_path(*dir, kind, lo, hi);
        if (fs::exists(path)) {
            auto block = load_block(path);
            if (block.kind() != kind || block.lo() != lo || block.hi() != hi)
                throw DataError("cache file '" + path.string() + "' does not match its name");
            if (from_cache) *from_cache = true;
            return block;
        }
    }
    SieveOptions opt;
    opt.workers = workers;
    auto block = sieve_range(lo, hi, kind, opt);
    if (dir) {
        fs::create_directories(*dir);
        save_block(block, cache_path(*dir, kind, lo, hi));
    }
    return block;
}

LoadedSeq load_sequence(const SeqArgs& a, unsigned workers) {
    LoadedSeq out;
    if (a.seq.empty()) throw UsageError("--seq is required (liouville, mobius or a block file)");
    if (a.seq == "liouville" || a.seq == "mobius") {
        if (a.n == 0) throw UsageError("--n is required when sieving on the fly");
        const auto kind = parse_seq_kind(a.seq);
        out.block = std::make_shared<const SeqBlock>(sieve_cached(kind, 1, a.n + 1, workers, nullptr));
        out.n = a.n;
        out.meta = {{"source", "sieve"}, {"kind", a.seq}, {"lo", 1}, {"hi", a.n + 1}};
        return out;
    }
    auto block = load_block(a.seq);
    if (block.lo() > 1) throw DataError("block '" + a.seq + "' starts at " + std::to_string(block.lo()) + ", need n=1");
    out.n = a.n == 0 ? block.hi() - 1 : a.n;
    if (out.n >= block.hi())
        throw DataError("--n " + std::to_string(out.n) + " beyond block data (hi=" + std::to_string(block.hi()) + ")");
    out.meta = {{"source", "file"},
                {"path", a.seq},
                {"kind", std::string(to_string(block.kind()))},
                {"lo", block.lo()},
                {"hi", block.hi()}};
    out.block = std::make_shared<const SeqBlock>(std::move(block));
    return out;
}

/// Sequence for set conditions "seq:..." in density commands; optional.
std::shared_ptr<const SeqBlock> optional_sequence(const SeqArgs& a, std::uint64_t cap, unsigned workers, json& meta) {
    if (a.seq.empty()) return nullptr;
    SeqArgs b = a;
    if (b.n == 0 && (a.seq == "liouville" || a.seq == "mobius")) b.n = cap;
    auto s = load_sequence(b, workers);
    meta = s.meta;
    return s.block;
}

// ---- JSON views ------------------------------------------------------------

json trace_json(const CorrelationTrace& t) {
    json rows = json::array();
    for (const auto& r : t.rows)
        rows.push_back({{"n", r.n},
                        {"raw", r.raw.str()},
                        {"norm_n", r.norm_n},
                        {"norm_rh", r.norm_rh},
                        {"norm_lil", opt_json(r.norm_lil)}});
    return {{"test", t.test}, {"eps", t.eps}, {"rows", rows}};
}

std::string trace_csv(const CorrelationTrace& t) {
    std::string s = "n,raw,norm_n,norm_rh,norm_lil\n";
    for (const auto& r : t.rows)
        s += std::to_string(r.n) + "," + r.raw.str() + "," + fmt(r.norm_n) + "," + fmt(r.norm_rh) + "," +
             (r.norm_lil ? fmt(*r.norm_lil) : "") + "\n";
    return s;
}

json battery_json(const BatteryReport& rep) {
    json entries = json::array();
    for (const auto& e : rep.entries)
        entries.push_back({{"test", e.test}, {"max_abs_norm", e.max_abs_norm}, {"at", e.at}, {"pass", e.pass}});
    return {{"threshold", rep.threshold},
            {"burn_in", rep.burn_in},
            {"pass", rep.pass},
            {"worst", rep.entries.empty() ? json(nullptr) : json(rep.entries[rep.worst].test)},
            {"entries", entries}};
}

json density_json(const DensityEstimate& d) {
    json rows = json::array();
    for (std::size_t j = 0; j < d.checkpoints.size(); ++j)
        rows.push_back({{"k", d.checkpoints[j]},
                        {"count", d.counts[j]},
                        {"denominator", d.denominators[j]},
                        {"ratio", opt_json(d.ratios[j])}});
    return {{"set", d.set}, {"value", d.value}, {"oscillation", d.oscillation}, {"rows", rows}};
}

json chain_json(const ChainEstimate& c) {
    json depths = json::array();
    for (std::size_t t = 0; t < c.depths.size(); ++t) {
        json d = density_json(c.depths[t]);
        d["depth"] = t + 1;
        depths.push_back(d);
    }
    return {{"set", c.set}, {"value", c.value}, {"oscillation", c.oscillation}, {"depths", depths}};
}

std::string density_csv_rows(const DensityEstimate& d, const std::string& depth) {
    std::string s;
    for (std::size_t j = 0; j < d.checkpoints.size(); ++j)
        s += "\"" + d.set + "\"," + depth + "," + std::to_string(d.checkpoints[j]) + "," + std::to_string(d.counts[j]) +
             "," + std::to_string(d.denominators[j]) + "," + (d.ratios[j] ? fmt(*d.ratios[j]) : "") + "\n";
    return s;
}

const char* kDensityCsvHeader = "set,depth,k,count,denominator,ratio\n";

Chain make_chain(const std::string& custom, int depth, const std::shared_ptr<const SeqBlock>& block) {
    if (custom.empty()) return Chain::powers_of_two(depth);
    std::vector<SetSpec> levels;
    std::stringstream ss(custom);
    for (std::string item; std::getline(ss, item, ';');) levels.push_back(SetSpec::parse(item, block));
    return Chain::custom(std::move(levels));
}

std::vector<TestFn> read_tests(const std::string& spec, const std::vector<std::string>& extra) {
    std::vector<TestFn> tests;
    if (spec == "default") {
        tests = default_battery();
    } else if (!spec.empty()) {
        std::ifstream in(spec);
        if (!in) throw DataError("cannot open test list '" + spec + "'");
        for (std::string line; std::getline(in, line);) {
            if (line.empty() || line[0] == '#') continue;
            tests.push_back(TestFn::parse(line));
        }
    }
    for (const auto& t : extra) tests.push_back(TestFn::parse(t));
    return tests;
}

// ---- config file -----------------------------------------------------------

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

/// Appends "--key value" for each key=value line whose key is not already on
/// the command line. Lines starting with '#' are comments.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") path = args[i + 1];
    for (const auto& a : args)
        if (a.rfind("--config=", 0) == 0) path = a.substr(9);
    if (path.empty()) return args;

    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file '" + path + "'");
    std::set<std::string> given;
    for (const auto& a : args)
        if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));

    std::vector<std::string> extra;
    int lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key == "config") throw UsageError(path + ":" + std::to_string(lineno) + ": bad key");
        if (given.count(key)) continue;
        if (value == "true") {
            extra.push_back("--" + key);
        } else if (value != "false") {
            extra.push_back("--" + key);
            extra.push_back(value);
        }
    }
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
}

/// key=value lines for every option that was set, in definition order.
std::string config_text(const CLI::App& app, const CLI::App* sub) {
    std::string out;
    auto dump_opts = [&](const CLI::App& a) {
        for (const CLI::Option* o : a.get_options()) {
            const std::string name = o->get_single_name();
            if (o->count() == 0 || name == "help" || name == "config" || name == "write-config") continue;
            if (o->get_expected_min() == 0) {
                out += name + "=true\n";
                continue;
            }
            for (const auto& r : o->results()) out += name + "=" + r + "\n";
        }
    };
    dump_opts(app);
    if (sub) dump_opts(*sub);
    return out;
}

// ---- subcommands -----------------------------------------------------------

struct Global {
    unsigned workers = 1;
    std::string json_out;
    std::string csv_out;
};

struct SieveCmd {
    std::string kind, range, out;
};

int run_sieve(const Global& g, const SieveCmd& c) {
    const auto kind = parse_seq_kind(c.kind);
    const auto [lo, hi] = parse_range(c.range);
    SieveOptions opt;
    opt.workers = g.workers;
    fs::path out = c.out;
    if (out.empty()) {
        const auto dir = cache_dir();
        if (!dir) throw UsageError("--out is required unless PRLAB_CACHE_DIR is set");
        fs::create_directories(*dir);
        out = cache_path(*dir, kind, lo, hi);
    }
    const auto block = sieve_range(lo, hi, kind, opt);
    save_block(block, out);
    std::uint64_t plus = 0, minus = 0, zero = 0;
    for (std::uint64_t n = lo; n < hi; ++n) {
        const int v = block[n];
        (v > 0 ? plus : v < 0 ? minus : zero)++;
    }
    json j{{"command", "sieve"},
           {"kind", c.kind},
           {"lo", lo},
           {"hi", hi},
           {"count", hi - lo},
           {"plus", plus},
           {"minus", minus},
           {"zero", zero},
           {"out", out.string()},
           {"bytes", fs::file_size(out)}};
    emit(g.json_out, dump(j));
    return kOk;
}

struct CorrelateCmd {
    SeqArgs seq;
    std::string test, plan, martingale;
    double eps = 0.05;
    std::optional<double> p;
};

MartingaleSpec parse_martingale(const std::string& text) {
    if (text.rfind("repeat-last:", 0) == 0) {
        const auto f = TestFn::parse(text.substr(12) + " * 1");
        const Dyadic stake = f(1);
        return MartingaleSpec::repeat_last(stake);
    }
    if (text.rfind("bet:", 0) == 0) return MartingaleSpec::oblivious(TestFn::parse(text.substr(4)));
    throw UsageError("malformed --martingale '" + text + "' (want bet:EXPR or repeat-last:STAKE)");
}

int run_correlate(const Global& g, const CorrelateCmd& c) {
    const auto f = TestFn::parse(c.test);
    std::optional<MartingaleSpec> mart;
    if (!c.martingale.empty()) mart = parse_martingale(c.martingale);
    const auto s = load_sequence(c.seq, g.workers);
    const auto plan = make_plan(c.plan, s.n, 0);
    const StreamOptions opt{g.workers, std::uint64_t{1} << 16};
    const auto trace = correlate(*s.block, f, plan, c.eps, opt);

    json j{{"command", "correlate"}, {"sequence", s.meta}, {"n", s.n}};
    j.update(trace_json(trace));
    if (c.p) {
        const auto b = biased_statistic(*s.block, f, *c.p, plan, opt);
        json rows = json::array();
        for (const auto& r : b.rows)
            rows.push_back({{"n", r.n}, {"centered", r.centered.str()}, {"f_total", r.f_total.str()}, {"value", r.value}});
        j["biased"] = {{"p", *c.p}, {"rows", rows}};
    }
    if (mart) {
        const auto r = run_martingale(*mart, *s.block, s.n, plan);
        json pts = json::array();
        for (const auto& p : r.trace) pts.push_back({{"n", p.n}, {"capital", p.capital}});
        j["martingale"] = {{"rule", r.rule},
                           {"final_capital", r.final_capital},
                           {"running_max", r.running_max},
                           {"running_max_at", r.running_max_at},
                           {"bust_at", r.bust_at ? json(*r.bust_at) : json(nullptr)},
                           {"trace", pts}};
    }
    if (!g.csv_out.empty()) emit(g.csv_out, trace_csv(trace));
    if (!g.json_out.empty()) emit(g.json_out, dump(j));
    if (g.csv_out.empty() && g.json_out.empty()) emit("-", trace_csv(trace));
    return kOk;
}

struct BatteryCmd {
    SeqArgs seq;
    std::string tests = "default", plan;
    std::vector<std::string> extra;
    double threshold = 0.05;
    std::uint64_t burn_in = 10000;
};

int run_battery(const Global& g, const BatteryCmd& c) {
    const auto tests = read_tests(c.tests, c.extra);
    const auto s = load_sequence(c.seq, g.workers);
    const auto plan = make_plan(c.plan, s.n, 0);
    const auto rep = battery(*s.block, tests, c.threshold, c.burn_in, plan, {g.workers, std::uint64_t{1} << 16});
    json j{{"command", "battery"}, {"sequence", s.meta}, {"n", s.n}, {"checkpoints", plan.size()}};
    j.update(battery_json(rep));
    if (!g.csv_out.empty()) {
        std::string csv = "test,max_abs_norm,at,pass\n";
        for (const auto& e : rep.entries)
            csv += "\"" + e.test + "\"," + fmt(e.max_abs_norm) + "," + std::to_string(e.at) + "," +
                   (e.pass ? "true" : "false") + "\n";
        emit(g.csv_out, csv);
    }
    emit(g.json_out, dump(j));
    return rep.pass ? kOk : kVerdict;
}

struct DensityCmd {
    SeqArgs seq;
    std::vector<std::string> sets;
    std::string plan, chain;
    int depth = 0;
};

std::uint64_t density_cap(const SeqArgs& a) {
    if (a.n == 0) throw UsageError("--n (density cap) is required");
    return a.n;
}

int run_density(const Global& g, const DensityCmd& c) {
    const std::uint64_t cap = density_cap(c.seq);
    json seq_meta = nullptr;
    SeqArgs sa = c.seq;
    const auto block = optional_sequence(sa, cap + 1, g.workers, seq_meta);
    const auto K = make_plan(c.plan, cap, 1);
    json sets = json::array();
    std::string csv = kDensityCsvHeader;
    for (const auto& text : c.sets) {
        const auto X = SetSpec::parse(text, block);
        const auto d = k_density(X, K, g.workers);
        json entry{{"spec", text}, {"k_density", density_json(d)}};
        csv += density_csv_rows(d, "0");
        if (c.depth > 0 || !c.chain.empty()) {
            const auto ch = chain_density(X, make_chain(c.chain, c.depth, block), K, g.workers);
            entry["chain_density"] = chain_json(ch);
            for (std::size_t t = 0; t < ch.depths.size(); ++t) csv += density_csv_rows(ch.depths[t], std::to_string(t + 1));
        }
        sets.push_back(entry);
    }
    json j{{"command", "density"}, {"cap", cap}, {"sequence", seq_meta}, {"checkpoints", plan_json(K)}, {"sets", sets}};
    if (!g.csv_out.empty()) emit(g.csv_out, csv);
    emit(g.json_out, dump(j));
    return kOk;
}

struct MeasureCmd {
    SeqArgs seq;
    std::string event, plan, chain;
    int depth = 3;
};

int run_measure(const Global& g, const MeasureCmd& c) {
    const std::uint64_t cap = density_cap(c.seq);
    json seq_meta = nullptr;
    const auto block = optional_sequence(c.seq, cap + 1, g.workers, seq_meta);
    const auto K = make_plan(c.plan, cap, 1);
    const auto chain = make_chain(c.chain, c.depth, block);
    const auto r = measure_event(SetSpec::parse(c.event, block), chain, K, g.workers);
    json j{{"command", "measure"},
           {"event", r.event},
           {"cap", cap},
           {"sequence", seq_meta},
           {"chain_depth", chain.depth()},
           {"probability", r.probability},
           {"oscillation", r.estimate.oscillation},
           {"estimate", chain_json(r.estimate)}};
    if (!g.csv_out.empty()) {
        std::string csv = kDensityCsvHeader;
        for (std::size_t t = 0; t < r.estimate.depths.size(); ++t)
            csv += density_csv_rows(r.estimate.depths[t], std::to_string(t + 1));
        emit(g.csv_out, csv);
    }
    emit(g.json_out, dump(j));
    return kOk;
}

struct FactsCmd {
    SeqArgs seq;
    std::string x = "evens", y = "odds", z = "seq:+1", plan, chain;
    int depth = 3;
    double tolerance = 0.02;
};

int run_facts(const Global& g, const FactsCmd& c) {
    const std::uint64_t cap = density_cap(c.seq);
    json seq_meta = nullptr;
    const auto block = optional_sequence(c.seq, cap + 1, g.workers, seq_meta);
    const auto K = make_plan(c.plan, cap, 1);
    FactInputs in{SetSpec::parse(c.x, block), SetSpec::parse(c.y, block), SetSpec::parse(c.z, block)};
    const auto rep = check_facts(in, make_chain(c.chain, c.depth, block), K, c.tolerance, g.workers);
    json facts = json::array();
    for (const auto& f : rep.facts)
        facts.push_back({{"id", f.id},
                         {"statement", f.statement},
                         {"exact", f.exact},
                         {"pass", f.pass},
                         {"vacuous", f.vacuous},
                         {"observed", f.observed},
                         {"tolerance", f.exact ? json(nullptr) : json(f.tolerance)},
                         {"detail", f.detail}});
    json j{{"command", "facts"},
           {"X", rep.X},
           {"Y", rep.Y},
           {"Z", rep.Z},
           {"cap", rep.cap},
           {"sequence", seq_meta},
           {"checkpoints", plan_json(K)},
           {"pass", rep.pass},
           {"facts", facts}};
    if (!g.csv_out.empty()) {
        std::string csv = "id,exact,pass,vacuous,observed,tolerance\n";
        for (const auto& f : rep.facts)
            csv += std::to_string(f.id) + "," + (f.exact ? "true" : "false") + "," + (f.pass ? "true" : "false") + "," +
                   (f.vacuous ? "true" : "false") + "," + fmt(f.observed) + "," + (f.exact ? "" : fmt(f.tolerance)) + "\n";
        emit(g.csv_out, csv);
    }
    emit(g.json_out, dump(j));
    return rep.pass ? kOk : kVerdict;
}

struct PrgCmd {
    std::string key, key_out, schedule, range, out, plan;
    int bits = 32;
    std::uint64_t seed = 0;
    std::uint64_t n = 0;
    bool run_battery = false;
    double threshold = 0.1;
    std::uint64_t burn_in = 1000;
};

int run_prg(const Global& g, const PrgCmd& c) {
    const TrapdoorKey key = c.key.empty() ? keygen(c.bits, c.seed) : load_key(c.key);
    if (!c.key_out.empty()) save_key(key, c.key_out);
    std::uint64_t lo = 0, hi = 0;
    if (!c.range.empty()) {
        std::tie(lo, hi) = parse_range(c.range);
    } else if (c.n > 0) {
        hi = c.n + 1;
    } else {
        throw UsageError("prg needs --range lo:hi or --n");
    }
    const auto schedule = c.schedule.empty() ? BlockSchedule::covering(hi, 4) : BlockSchedule::parse(c.schedule);
    const auto block = prg_sequence(key, schedule, lo, hi, c.seed);
    if (!c.out.empty()) save_block(block, c.out);
    std::uint64_t plus = 0;
    for (std::uint64_t n = lo; n < hi; ++n) plus += block[n] > 0;

    json j{{"command", "prg"},
           {"key", {{"p", std::to_string(key.p())}, {"q", std::to_string(key.q())}, {"N", std::to_string(key.modulus())}, {"bits", key.bits()}}},
           {"schedule", schedule.exponents()},
           {"seed", c.seed},
           {"lo", lo},
           {"hi", hi},
           {"plus", plus},
           {"minus", hi - lo - plus},
           {"out", c.out.empty() ? json(nullptr) : json(c.out)}};
    int code = kOk;
    if (c.run_battery) {
        if (lo > 1 || hi < 3) throw DataError("battery on PRG output needs a range starting at 0 or 1");
        const auto plan = make_plan(c.plan, hi - 1, 0);
        const auto rep = battery(block, default_battery(), c.threshold, c.burn_in, plan, {g.workers, std::uint64_t{1} << 16});
        j["battery"] = battery_json(rep);
        if (!rep.pass) code = kVerdict;
    }
    emit(g.json_out, dump(j));
    return code;
}

struct TransferCmd {
    std::uint64_t n = 1000000;
    std::uint64_t n0 = 10;
    double eps = 0.1;
    std::string g, test = "pm(n % 2 == 0)", seq = "liouville";
};

int run_transfer(const Global& gl, const TransferCmd& c) {
    SieveOptions opt;
    opt.workers = gl.workers;
    const auto r = mu_lambda_transfer_check(c.n, c.n0, c.eps, opt);
    json cex = json::array();
    for (const auto& e : r.counterexamples)
        cex.push_back({{"n", e.n}, {"k", e.k}, {"i", e.i}, {"lambda_n", e.lambda_n}, {"mu_i", e.mu_i}});
    bool pass = r.counterexamples.empty() && r.tail_mass < r.integral_bound;
    json j{{"command", "transfer"},
           {"N", r.N},
           {"checked", r.checked},
           {"counterexamples", cex},
           {"n0", r.n0},
           {"tail_mass", r.tail_mass},
           {"integral_bound", r.integral_bound},
           {"eps", r.eps},
           {"tail_below_eps", r.tail_mass < r.eps},
           {"n0_for_eps", r.n0_for_eps}};
    if (!c.g.empty()) {
        const auto g = GSpec::parse(c.g);
        if (g.range_density() == 0)
            std::cerr << "warning: g = " << g.str() << " has a density-zero range; the lift carries no information\n";
        const auto f = TestFn::parse(c.test);
        const auto s = load_sequence({c.seq, c.n}, gl.workers);
        const auto w = witness_identity_check(*s.block, f, g, c.n0, s.n);
        j["identity"] = {{"g", g.str()},
                         {"test", f.str()},
                         {"lifted", lift_witness(f, g, c.n0).str()},
                         {"range_density", g.range_density()},
                         {"sequence", s.meta},
                         {"checked", w.checked},
                         {"mismatches", w.mismatches},
                         {"first_mismatch", w.mismatches ? json(w.first_mismatch) : json(nullptr)},
                         {"lhs", w.final_lhs},
                         {"rhs", w.final_rhs}};
        pass = pass && w.mismatches == 0;
    }
    j["pass"] = pass;
    emit(gl.json_out, dump(j));
    return pass ? kOk : kVerdict;
}

struct SelftestCmd {
    std::vector<std::string> files;
};

int run_selftest(const Global& g, const SelftestCmd& c) {
    json suites = json::array();
    bool all = true;
    auto record = [&](const std::string& name, bool pass, const std::string& detail) {
        suites.push_back({{"suite", name}, {"pass", pass}, {"detail", detail}});
        all = all && pass;
        if (g.json_out.empty() || g.json_out != "-") std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
    };

    // cache files are verified first; corruption is a data error
    std::vector<fs::path> files(c.files.begin(), c.files.end());
    if (const auto dir = cache_dir(); dir && fs::is_directory(*dir)) {
        std::vector<fs::path> found;
        for (const auto& e : fs::directory_iterator(*dir))
            if (e.path().extension() == ".prseq") found.push_back(e.path());
        std::sort(found.begin(), found.end());
        files.insert(files.end(), found.begin(), found.end());
    }
    for (const auto& f : files) {
        const auto block = load_block(f);
        std::uint64_t bad = 0;
        if (block.kind() != SeqKind::custom) {
            const std::uint64_t lo = std::max<std::uint64_t>(block.lo(), 1);
            if (lo < block.hi()) {
                const auto ref = sieve_range(lo, block.hi(), block.kind());
                for (std::uint64_t n = lo; n < block.hi(); ++n) bad += ref[n] != block[n];
            }
        }
        if (bad) throw DataError("cache file '" + f.string() + "' disagrees with the sieve at " + std::to_string(bad) + " points");
        record("cache " + f.filename().string(), true, std::to_string(block.size()) + " values verified");
    }

    const std::uint64_t N = 100000;
    SieveOptions opt;
    opt.workers = g.workers;
    const auto lam = sieve_range(1, 2 * N + 1, SeqKind::liouville, opt);
    const auto mu = sieve_range(1, N + 1, SeqKind::mobius, opt);
    {
        std::uint64_t bad = 0;
        for (std::uint64_t n = 1; n <= N; ++n) {
            // plain trial division, independent of the sieve
            std::uint64_t m = n;
            int omega = 0;
            bool square = false;
            for (std::uint64_t d = 2; d * d <= m; ++d) {
                int e = 0;
                while (m % d == 0) {
                    m /= d;
                    ++e;
                }
                omega += e;
                square |= e > 1;
            }
            if (m > 1) ++omega;
            const int l = omega % 2 ? -1 : 1;
            bad += (lam[n] != l) + (mu[n] != (square ? 0 : l));
        }
        record("oracle", bad == 0, "lambda, mu vs trial division for n <= 100000: " + std::to_string(bad) + " mismatches");
    }
    {
        std::uint64_t bad = 0;
        for (std::uint64_t n = 1; n <= 10000; ++n) bad += value_at(n * n, SeqKind::liouville) != 1;
        record("square", bad == 0, "lambda(n^2) = 1 for n <= 10000: " + std::to_string(bad) + " exceptions");
    }
    {
        std::uint64_t bad = 0;
        for (std::uint64_t n = 1; n <= N; ++n) bad += lam[2 * n] != -lam[n];
        record("doubling", bad == 0, "lambda(2n) = -lambda(n) for n <= 100000: " + std::to_string(bad) + " exceptions");
    }
    {
        const auto r = mu_lambda_transfer_check(N, 10, 0.1, opt);
        record("transfer", r.counterexamples.empty(),
               "lambda(k^2 i) = mu(i) for n <= 100000: " + std::to_string(r.counterexamples.size()) + " exceptions");
    }
    {
        const auto K = default_k_plan(N);
        const auto counts = count_members({SetSpec::residue(3, 0), SetSpec::residue(3, 1), SetSpec::residue(3, 2),
                                           SetSpec::all(), SetSpec::unite(SetSpec::residue(3, 0), SetSpec::residue(3, 1))},
                                          K, g.workers);
        std::uint64_t bad = 0;
        for (std::size_t j = 0; j < K.size(); ++j) {
            bad += counts[0][j] + counts[1][j] + counts[2][j] != counts[3][j];
            bad += counts[0][j] + counts[1][j] != counts[4][j];
        }
        record("additivity", bad == 0, "residue classes mod 3 at " + std::to_string(K.size()) + " checkpoints: " +
                                           std::to_string(bad) + " violations");
    }
    json j{{"command", "selftest"}, {"pass", all}, {"suites", suites}};
    if (!g.json_out.empty()) emit(g.json_out, dump(j));
    return all ? kOk : kVerdict;
}

// ---- wiring ----------------------------------------------------------------

void add_seq_options(CLI::App* sub, SeqArgs& a, bool cap_is_n) {
    sub->add_option("--seq", a.seq, "liouville | mobius | path to a block file");
    sub->add_option("--n", a.n, cap_is_n ? "cap N (checkpoints up to N)" : "statistics over [1, n]");
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));

    CLI::App app{"prlab: pseudorandomness statistics for Liouville/Moebius and constructed sequences"};
    app.require_subcommand(1);
    app.fallthrough();
    Global g;
    std::string config_file, write_config;
    app.add_option("--config", config_file, "flat key=value file mirroring the flags");
    app.add_option("--write-config", write_config, "write the effective configuration and continue");
    app.add_option("--workers", g.workers, "worker threads (outputs do not depend on it)")->check(CLI::Range(1u, 256u));
    app.add_option("--json", g.json_out, "JSON output path ('-' for stdout)");
    app.add_option("--csv", g.csv_out, "CSV output path ('-' for stdout)");

    SieveCmd sieve_c;
    auto* sieve = app.add_subcommand("sieve", "sieve a sequence range into a block file");
    sieve->add_option("--kind", sieve_c.kind, "liouville | mobius")->required();
    sieve->add_option("--range", sieve_c.range, "lo:hi (hi exclusive)")->required();
    sieve->add_option("--out", sieve_c.out, "block file (default: cache directory)");

    CorrelateCmd corr_c;
    auto* corr = app.add_subcommand("correlate", "correlation trace of one test function");
    add_seq_options(corr, corr_c.seq, false);
    corr->add_option("--test", corr_c.test, "test function in the DSL")->required();
    corr->add_option("--eps", corr_c.eps, "exponent slack for the n^(1/2+eps) normalization")
        ->check(CLI::Range(1e-9, 10.0));
    corr->add_option("--plan", corr_c.plan, "pow2 | linear:STEP | a,b,c");
    corr->add_option("--p", corr_c.p, "also report the p-biased statistic")->check(CLI::Range(1e-12, 1 - 1e-12));
    corr->add_option("--martingale", corr_c.martingale, "bet:EXPR | repeat-last:STAKE");

    BatteryCmd bat_c;
    auto* bat = app.add_subcommand("battery", "run a family of tests against a sequence");
    add_seq_options(bat, bat_c.seq, false);
    bat->add_option("--tests", bat_c.tests, "default | file with one expression per line | '' for none");
    bat->add_option("--test", bat_c.extra, "additional test (repeatable)");
    bat->add_option("--threshold", bat_c.threshold, "max allowed |S(n)/n|")->check(CLI::Range(0.0, 1e9));
    bat->add_option("--burn-in", bat_c.burn_in, "ignore checkpoints below this n");
    bat->add_option("--plan", bat_c.plan, "pow2 | linear:STEP | a,b,c");

    DensityCmd den_c;
    auto* den = app.add_subcommand("density", "K-density (and optionally chain density) of sets");
    add_seq_options(den, den_c.seq, true);
    den->add_option("--set", den_c.sets, "set spec (repeatable)")->required();
    den->add_option("--plan", den_c.plan, "pow2 | linear:STEP | a,b,c");
    den->add_option("--depth", den_c.depth, "also compute chain density with U_t = 2^t Z, t <= depth")
        ->check(CLI::Range(0, 62));
    den->add_option("--chain", den_c.chain, "custom chain levels separated by ';'");

    MeasureCmd mea_c;
    auto* mea = app.add_subcommand("measure", "estimated measure of an event via chain density");
    add_seq_options(mea, mea_c.seq, true);
    mea->add_option("--event", mea_c.event, "set spec")->required();
    mea->add_option("--depth", mea_c.depth, "default chain depth")->check(CLI::Range(1, 62));
    mea->add_option("--chain", mea_c.chain, "custom chain levels separated by ';'");
    mea->add_option("--plan", mea_c.plan, "pow2 | linear:STEP | a,b,c");

    FactsCmd fac_c;
    auto* fac = app.add_subcommand("facts", "check the density facts on concrete sets");
    add_seq_options(fac, fac_c.seq, true);
    fac->add_option("--x", fac_c.x, "set X (disjoint from Y)");
    fac->add_option("--y", fac_c.y, "set Y");
    fac->add_option("--z", fac_c.z, "pseudorandom candidate Z");
    fac->add_option("--depth", fac_c.depth, "default chain depth")->check(CLI::Range(1, 62));
    fac->add_option("--chain", fac_c.chain, "custom chain levels separated by ';'");
    fac->add_option("--tolerance", fac_c.tolerance, "tolerance for the limit facts")->check(CLI::Range(0.0, 1.0));
    fac->add_option("--plan", fac_c.plan, "pow2 | linear:STEP | a,b,c");

    PrgCmd prg_c;
    auto* prg = app.add_subcommand("prg", "hard-core bit sequence from Rabin squaring");
    prg->add_option("--key", prg_c.key, "key file (JSON with p, q, N)");
    prg->add_option("--bits", prg_c.bits, "modulus size when generating a key")->check(CLI::Range(6, 64));
    prg->add_option("--seed", prg_c.seed, "seed for key generation and the residue embedding");
    prg->add_option("--key-out", prg_c.key_out, "write the key used");
    prg->add_option("--schedule", prg_c.schedule, "block exponents, e.g. 4,5,6 (default: 4,5,... covering)");
    prg->add_option("--range", prg_c.range, "lo:hi");
    prg->add_option("--n", prg_c.n, "shorthand for --range 0:n+1");
    prg->add_option("--out", prg_c.out, "block file for the generated values");
    prg->add_flag("--battery", prg_c.run_battery, "run the default battery on the output");
    prg->add_option("--threshold", prg_c.threshold, "battery threshold")->check(CLI::Range(0.0, 1e9));
    prg->add_option("--burn-in", prg_c.burn_in, "battery burn-in");
    prg->add_option("--plan", prg_c.plan, "battery checkpoints");

    TransferCmd tr_c;
    auto* tr = app.add_subcommand("transfer", "mu/lambda transfer check and g-composition bookkeeping");
    tr->add_option("--n", tr_c.n, "check every n <= N")->check(CLI::Range(std::uint64_t{4}, std::uint64_t{4000000000}));
    tr->add_option("--n0", tr_c.n0, "truncation point for sum k^-2")->check(CLI::Range(std::uint64_t{1}, UINT64_MAX));
    tr->add_option("--eps", tr_c.eps, "tail mass target")->check(CLI::Range(1e-12, 10.0));
    tr->add_option("--g", tr_c.g, "a,b,xmin: also check the lift/compose identity");
    tr->add_option("--test", tr_c.test, "test function f for the identity");
    tr->add_option("--seq", tr_c.seq, "sequence for the identity (liouville | mobius | block file)");

    SelftestCmd st_c;
    auto* st = app.add_subcommand("selftest", "oracle and identity suites");
    st->add_option("--file", st_c.files, "block file to verify (repeatable); PRLAB_CACHE_DIR is scanned too");

    std::vector<const char*> cargs{argv[0]};
    for (const auto& a : args) cargs.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    const CLI::App* chosen = app.get_subcommands().front();
    if (!write_config.empty()) emit(write_config, config_text(app, chosen));

    if (chosen == sieve) return run_sieve(g, sieve_c);
    if (chosen == corr) return run_correlate(g, corr_c);
    if (chosen == bat) return run_battery(g, bat_c);
    if (chosen == den) return run_density(g, den_c);
    if (chosen == mea) return run_measure(g, mea_c);
    if (chosen == fac) return run_facts(g, fac_c);
    if (chosen == prg) return run_prg(g, prg_c);
    if (chosen == tr) return run_transfer(g, tr_c);
    return run_selftest(g, st_c);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const prlab::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const DomainError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const FormatError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    }
}

// Acceptance criteria 1-11: one PASS/FAIL line each, exit 1 if any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "ast_gen.hpp"
#include "oracle.hpp"
#include "prlab/prlab.hpp"

#ifndef PRLAB_CLI_PATH
#error "PRLAB_CLI_PATH must point at the prlab binary"
#endif

namespace fs = std::filesystem;
using namespace prlab;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0 && secs > budget_s) {
        o.pass = false;
        o.detail += "; over time budget";
    }
    if (!o.pass) ++failures;
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.2f s", secs);
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << o.detail << " (" << timing;
    if (budget_s > 0) std::cout << ", budget " << budget_s << " s";
    std::cout << ")" << std::endl;
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

int main() {
    const std::uint64_t N7 = 10'000'000;
    std::shared_ptr<const SeqBlock> lam7;

    criterion(1, "oracle equivalence, lambda and mu vs trial division, n <= 1e5", 10, [] {
        const auto lam = sieve_range(1, 100001, SeqKind::liouville);
        const auto mu = sieve_range(1, 100001, SeqKind::mobius);
        std::uint64_t bad = 0;
        for (std::uint64_t n = 1; n <= 100000; ++n)
            bad += (lam[n] != oracle::liouville(n)) + (mu[n] != oracle::mobius(n));
        return Outcome{bad == 0, std::to_string(bad) + " mismatches"};
    });

    criterion(2, "identities lambda(n^2)=1, lambda(2n)=-lambda(n), lambda(k^2 i)=mu(i)", 0, [] {
        const auto lam = sieve_range(1, 200001, SeqKind::liouville);
        std::uint64_t sq = 0, dbl = 0;
        for (std::uint64_t n = 1; n <= 10000; ++n) sq += value_at(n * n, SeqKind::liouville) != 1;
        for (std::uint64_t n = 1; n <= 100000; ++n) dbl += lam[2 * n] != -lam[n];
        const auto t = mu_lambda_transfer_check(1'000'000);
        const bool ok = sq == 0 && dbl == 0 && t.counterexamples.empty() && t.checked == 1'000'000;
        return Outcome{ok, "square " + std::to_string(sq) + ", doubling " + std::to_string(dbl) + ", transfer " +
                               std::to_string(t.counterexamples.size()) + " exceptions over " +
                               std::to_string(t.checked) + " n"};
    });

    criterion(3, "f = 1 correlation |sum lambda(i)|/N <= 0.01 at N = 1e6", 30, [] {
        const auto lam = sieve_range(1, 1'000'001, SeqKind::liouville);
        const auto trace = correlate(lam, TestFn::constant(1), CheckpointPlan({1'000'000}));
        const double v = std::abs(trace.rows.back().norm_n);
        return Outcome{v <= 0.01, "S(N) = " + trace.rows.back().raw.str() + ", |S(N)|/N = " + num(v)};
    });

    criterion(4, "measure of {lambda = +1}, default chain depth 3, N = 1e7", 120, [&] {
        lam7 = std::make_shared<const SeqBlock>(sieve_range(1, N7 + 1, SeqKind::liouville));
        const auto r = measure_event(SetSpec::sequence_value(lam7, 1), Chain::powers_of_two(3), default_k_plan(N7));
        bool ok = r.estimate.depths.size() == 3;
        std::string d = "per depth";
        for (const auto& e : r.estimate.depths) {
            ok = ok && std::abs(e.value - 0.5) <= 0.02;
            d += " " + num(e.value);
        }
        return Outcome{ok, d};
    });

    FactReport facts5;
    criterion(5, "dens(X and Z)/dens(X) for X = 5Z, Z = {lambda = +1}, N = 1e7", 0, [&] {
        if (!lam7) lam7 = std::make_shared<const SeqBlock>(sieve_range(1, N7 + 1, SeqKind::liouville));
        facts5 = check_facts({SetSpec::residue(5, 0), SetSpec::residue(5, 1), SetSpec::sequence_value(lam7, 1)},
                             Chain::powers_of_two(3), default_k_plan(N7));
        // independent count over [0, N); 0 is in X but never in Z
        std::uint64_t x = 1, xz = 0;
        for (std::uint64_t n = 5; n < N7; n += 5) {
            ++x;
            xz += (*lam7)[n] == 1;
        }
        const double ratio = static_cast<double>(xz) / static_cast<double>(x);
        bool ok = std::abs(ratio - 0.5) <= 0.02;
        for (const auto& f : facts5.facts)
            if (f.id == 4) ok = ok && f.pass && std::abs(f.observed - std::abs(ratio - 0.5)) < 1e-12;
        return Outcome{ok, "ratio " + num(ratio)};
    });

    criterion(6, "facts 1 and 5 exact for disjoint residue classes, every checkpoint to 1e7", 0, [&] {
        if (!lam7) lam7 = std::make_shared<const SeqBlock>(sieve_range(1, N7 + 1, SeqKind::liouville));
        const auto K = default_k_plan(N7);
        const auto mod3 = check_facts({SetSpec::residue(3, 0), SetSpec::residue(3, 2), SetSpec::sequence_value(lam7, 1)},
                                      Chain::powers_of_two(3), K);
        bool ok = true;
        std::string d;
        for (const FactReport* rep : std::initializer_list<const FactReport*>{&facts5, &mod3})
            for (const auto& f : rep->facts)
                if (f.id == 1 || f.id == 5) {
                    ok = ok && f.exact && f.pass && f.observed == 0;
                    d += (d.empty() ? "" : ", ") + rep->X + "/" + rep->Y + " fact " + std::to_string(f.id) + " " +
                         (f.pass ? "ok" : "violated");
                }
        // direct count identity at every checkpoint
        const auto counts = count_members({SetSpec::residue(7, 1), SetSpec::residue(7, 4),
                                           SetSpec::unite(SetSpec::residue(7, 1), SetSpec::residue(7, 4))},
                                          K);
        std::uint64_t bad = 0;
        for (std::size_t j = 0; j < K.size(); ++j) bad += counts[0][j] + counts[1][j] != counts[2][j];
        return Outcome{ok && bad == 0 && K.back() == N7,
                       d + "; mod 7 union identity " + std::to_string(bad) + " violations at " +
                           std::to_string(K.size()) + " checkpoints"};
    });

    criterion(7, "split_pm and dyadic_decompose on 120 + 120 ASTs x 1e4 points", 0, [] {
        const std::uint64_t points = 10000;
        std::uint64_t split_bad = 0, dec_bad = 0;
        const auto tern = gen::ternary_corpus(120, 701);
        for (const auto& f : tern) {
            const auto [plus, minus] = split_pm(f);
            for (std::uint64_t n = 1; n <= points; ++n) {
                const int p = plus.ternary(n), m = minus.ternary(n);
                split_bad += (p * p != 1) || (m * m != 1) || !(Dyadic::unit_fraction(1) * Dyadic(p + m) == f(n));
            }
        }
        const auto dy = gen::dyadic_corpus(120, 702);
        for (std::size_t i = 0; i < dy.size(); ++i) {
            const int J = 1 + static_cast<int>(i % 16);
            const auto d = dyadic_decompose(dy[i], J);
            for (std::uint64_t n = 1; n <= points; ++n)
                dec_bad += !((dy[i](n) - d.reconstruct(n)).abs() <= Dyadic::unit_fraction(J));
        }
        return Outcome{split_bad == 0 && dec_bad == 0 && tern.size() >= 100 && dy.size() >= 100,
                       "split_pm " + std::to_string(split_bad) + ", decompose " + std::to_string(dec_bad) +
                           " violations"};
    });

    criterion(8, "QR(77) bijection, sampled 32-bit inversion, schedule covering", 0, [] {
        const TrapdoorKey k77(7, 11);
        std::vector<std::uint64_t> qr;
        for (std::uint64_t y = 1; y < 77; ++y)
            if (oracle::gcd(y, 77) == 1) {
                bool square = false;
                for (std::uint64_t x = 1; x < 77; ++x) square |= x * x % 77 == y;
                if (square) qr.push_back(y);
            }
        std::vector<bool> hit(77, false);
        bool bij = qr.size() == 15;
        for (auto y : qr) {
            const auto z = k77.square(y);
            bij = bij && k77.is_qr(z) && !hit[z];
            hit[z] = true;
        }

        std::uint64_t inv_bad = 0, inv_checked = 0;
        oracle::Rng r(808);
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            const auto key = keygen(32, seed);
            for (int i = 0; i < 2500; ++i) {
                const std::uint64_t x = r.range(2, key.modulus() - 1);
                if (oracle::gcd(x, key.modulus()) != 1) continue;
                const auto y = key.square(x);  // a residue
                const auto root = key.principal_root(y);
                inv_bad += key.square(root) != y || !key.is_qr(root);
                ++inv_checked;
            }
        }

        std::uint64_t cover_bad = 0;
        const std::vector<BlockSchedule> schedules{BlockSchedule({1, 2, 3}), BlockSchedule({2, 5, 9, 13}),
                                                   BlockSchedule::covering(100000, 4), BlockSchedule::covering(1u << 30, 1)};
        for (const auto& s : schedules)
            for (int i = 0; i < 10000; ++i) {
                const std::uint64_t n = r.below(s.coverage());
                const auto pos = block_index(n, s);
                const std::uint64_t o = s.offsets()[pos.j - 1];
                cover_bad += !(o <= n && n < o + s.width(pos.j)) || pos.local != n - o;
            }
        return Outcome{bij && inv_bad == 0 && inv_checked > 9000 && cover_bad == 0,
                       std::string("QR(77) ") + (bij ? "bijective" : "not bijective") + ", inversion " +
                           std::to_string(inv_bad) + "/" + std::to_string(inv_checked) + " failures, covering " +
                           std::to_string(cover_bad) + " violations"};
    });

    criterion(9, "PRG N = 1e5, 32-bit keys, default battery, threshold 0.1, burn-in 1e3", 0, [] {
        const std::uint64_t N = 100000;
        bool ok = true;
        std::string d;
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const auto key = keygen(32, seed);
            const auto s = prg_sequence(key, BlockSchedule::covering(N + 1, 4), 0, N + 1, seed);
            const auto rep = battery(s, default_battery(), 0.1, 1000, CheckpointPlan::powers_of_two(N, 0, true));
            ok = ok && rep.pass;
            d += (d.empty() ? "" : ", ") + std::string("seed ") + std::to_string(seed) + " worst " +
                 num(rep.entries[rep.worst].max_abs_norm);
        }
        return Outcome{ok, d};
    });

    criterion(10, "lift_witness vs compose_g identity, affine g, n <= 1e5", 0, [] {
        const auto lam = sieve_range(1, 100001, SeqKind::liouville);
        const auto mu = sieve_range(1, 100001, SeqKind::mobius);
        std::uint64_t mismatches = 0, checked = 0;
        const std::vector<GSpec> gs{GSpec(AffineMap{2, 1, 1}), GSpec(AffineMap{3, 0, 1}), GSpec(AffineMap{1, 7, 1}),
                                    GSpec(AffineMap{5, 2, 3}), GSpec::identity()};
        const std::vector<TestFn> fs{TestFn::parse("pm(n % 2 == 0)"), TestFn::parse("pm(bit(n, 1))"),
                                     TestFn::parse("pm(n % 3 == 1) * pm(n % 5 == 2)"), TestFn::constant(1)};
        for (const auto& g : gs)
            for (const auto& f : fs)
                for (std::uint64_t n0 : {1u, 10u, 1000u}) {
                    for (const SeqBlock* s : {&lam, &mu}) {
                        const auto w = witness_identity_check(*s, f, g, n0, 100000);
                        mismatches += w.mismatches;
                        checked += w.checked;
                    }
                }
        return Outcome{mismatches == 0 && checked == 5 * 4 * 3 * 2 * 100000ull,
                       std::to_string(mismatches) + " mismatches over " + std::to_string(checked) + " prefix sums"};
    });

    criterion(11, "byte-identical CLI outputs across two runs, every subcommand", 0, [] {
        const fs::path dir = fs::temp_directory_path() / ("prlab-accept-" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
        const std::string cli = PRLAB_CLI_PATH;
        const std::string lam = (dir / "lam.prseq").string();
        const std::vector<std::pair<std::string, std::string>> cmds{
            {"sieve", "sieve --kind mobius --range 1:200001 --out " + (dir / "mu.prseq").string()},
            {"correlate", "correlate --seq " + lam + " --test 'pm(n % 3 == 0) * pm(bit(n, 2))' --p 0.3 --martingale \"bet:pm(n%2==0)\""},
            {"battery", "battery --seq " + lam + " --tests default --threshold 0.5 --burn-in 100"},
            {"density", "density --seq " + lam + " --n 200000 --set seq:+1 --set mod:4:1 --depth 3"},
            {"measure", "measure --seq " + lam + " --n 200000 --event seq:-1 --depth 4"},
            {"facts", "facts --seq " + lam + " --n 200000 --x mod:5:0 --y mod:5:3 --tolerance 0.05"},
            {"prg", "prg --bits 32 --seed 11 --n 50000 --battery --out " + (dir / "prg.prseq").string()},
            {"transfer", "transfer --n 100000 --g 2,1,1 --seq liouville"},
            {"selftest", "selftest --file " + lam},
        };
        if (std::system((cli + " sieve --kind liouville --range 1:200001 --out " + lam + " > /dev/null").c_str()) != 0)
            return Outcome{false, "could not sieve input"};
        std::string bad;
        for (const auto& [name, args] : cmds) {
            std::string outs[2];
            for (int run = 0; run < 2; ++run) {
                const fs::path json = dir / (name + std::to_string(run) + ".json");
                const fs::path csv = dir / (name + std::to_string(run) + ".csv");
                const fs::path so = dir / (name + std::to_string(run) + ".out");
                const std::string csv_opt = name == "transfer" || name == "prg" || name == "sieve" || name == "selftest"
                                                ? ""
                                                : " --csv " + csv.string();
                const std::string cmd = cli + " --workers " + (run ? "3" : "1") + " " + args + " --json " +
                                        json.string() + csv_opt + " > " + so.string() + " 2>&1";
                if (std::system(cmd.c_str()) == -1) return Outcome{false, "cannot spawn " + cli};
                outs[run] = slurp(json) + "\x1f" + (csv_opt.empty() ? "" : slurp(csv)) + "\x1f" + slurp(so);
                if (name == "sieve" || name == "prg")
                    outs[run] += slurp(dir / (name == "sieve" ? "mu.prseq" : "prg.prseq"));
            }
            if (outs[0] != outs[1] || outs[0].size() < 10) bad += " " + name;
        }
        fs::remove_all(dir);
        return Outcome{bad.empty(), bad.empty() ? "9 subcommands identical (workers 1 vs 3)" : "differs:" + bad};
    });

    std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAIL") << std::endl;
    return failures == 0 ? 0 : 1;
}

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "prlab/correlate.hpp"

namespace prlab {

struct BatteryEntry {
    std::string test;
    double max_abs_norm = 0;
    std::uint64_t at = 0;  // checkpoint where the maximum occurred
    bool pass = true;
};

struct BatteryReport {
    std::vector<BatteryEntry> entries;
    std::size_t worst = 0;
    double threshold = 0;
    std::uint64_t burn_in = 0;
    bool pass = true;
};

/// Twenty cheap tests standing in for "every low-complexity function":
/// residue classes mod 2..10, the five low bits, popcount thresholds and
/// a few short products.
inline std::vector<TestFn> default_battery() {
    std::vector<std::string> texts;
    for (int m = 2; m <= 10; ++m) texts.push_back("pm(n % " + std::to_string(m) + " == 0)");
    for (int i = 0; i < 5; ++i) texts.push_back("pm(bit(n, " + std::to_string(i) + "))");
    texts.push_back("pm(popcount(n) >= 3)");
    texts.push_back("pm(popcount(n) >= 6)");
    texts.push_back("pm(popcount(n) >= 9)");
    texts.push_back("pm(bit(n, 0)) * pm(bit(n, 1))");
    texts.push_back("pm(n % 3 == 0) * pm(bit(n, 2))");
    texts.push_back("pm(bit(n, 0) xor n % 3 == 1)");
    std::vector<TestFn> out;
    for (const auto& t : texts) out.push_back(TestFn::parse(t));
    return out;
}

/// Max |S(n)/n| over checkpoints n >= burn_in, per test; passes when every
/// test stays at or below the threshold.
template <TernarySequence S>
BatteryReport battery(const S& s, const std::vector<TestFn>& tests, double threshold, std::uint64_t burn_in,
                      const CheckpointPlan& plan, const StreamOptions& opt = {}) {
    if (tests.empty()) throw DomainError("battery: no tests given");
    bool any = false;
    for (auto c : plan) any |= c >= burn_in;
    if (!any) throw DataError("battery: no checkpoint at or beyond the burn-in");

    BatteryReport report;
    report.threshold = threshold;
    report.burn_in = burn_in;
    for (const auto& f : tests) {
        const auto trace = correlate(s, f, plan, 0.05, opt);
        BatteryEntry e{f.str(), 0, 0, true};
        for (const auto& row : trace.rows) {
            if (row.n < burn_in) continue;
            if (std::abs(row.norm_n) > e.max_abs_norm || e.at == 0) {
                e.max_abs_norm = std::abs(row.norm_n);
                e.at = row.n;
            }
        }
        e.pass = e.max_abs_norm <= threshold;
        report.pass = report.pass && e.pass;
        report.entries.push_back(std::move(e));
    }
    for (std::size_t i = 1; i < report.entries.size(); ++i)
        if (report.entries[i].max_abs_norm > report.entries[report.worst].max_abs_norm) report.worst = i;
    return report;
}

}  // namespace prlab

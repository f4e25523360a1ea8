#include <catch2/catch_amalgamated.hpp>

#include "isac/metrics.hpp"

using namespace isac;
using namespace isac::metrics;

namespace {

ScenarioTrace empty_ssf_trace() {
    ScenarioTrace t;
    t.meta.protocol = ProtocolKind::ssf;
    t.meta.top_threshold = 5.0;
    t.meta.scan_duration_s = 0.01;
    return t;
}

ScanRecord rec(int scan, bool in_region, bool in_beam, double resi, HypoLabel h,
               double used = -10.0, double budget = -10.0) {
    ScanRecord r;
    r.scan = scan;
    r.time_s = scan * 0.01;
    r.tg_in_region = in_region;
    r.tg_in_beam = in_beam;
    r.resi = resi;
    r.hypothesis = h;
    r.p_used_dbm = used;
    r.p_budget_dbm = budget;
    return r;
}

} // namespace

TEST_CASE("all in-beam detections give probability one") {
    auto t = empty_ssf_trace();
    for (int i = 0; i < 10; ++i) t.records.push_back(rec(i, true, true, 8.0, HypoLabel::h3));
    CHECK(detection_probability(t) == 1.0);
}

TEST_CASE("a target that never enters the region is a metric error") {
    auto t = empty_ssf_trace();
    for (int i = 0; i < 10; ++i) t.records.push_back(rec(i, false, false, 1.0, HypoLabel::h0));
    CHECK_THROWS_AS(detection_probability(t), MetricError);
}

TEST_CASE("a hand-built trace matches the hand count") {
    auto t = empty_ssf_trace(); // T1 = 5.0
    t.records = {
        rec(0, true, true, 7.0, HypoLabel::h3),  // counts
        rec(1, true, true, 4.0, HypoLabel::h1),  // in beam, resi too low
        rec(2, true, false, 9.0, HypoLabel::h3), // out of beam
        rec(3, false, false, 1.0, HypoLabel::h0), // out of region: not in denominator
        rec(4, true, true, 5.5, HypoLabel::h3),  // counts
        rec(5, true, true, 5.0, HypoLabel::h1),  // boundary: strict >
        rec(6, true, false, 0.5, HypoLabel::h0),
        rec(7, true, true, 12.0, HypoLabel::h3), // counts
        rec(8, false, true, 12.0, HypoLabel::h3), // out of region
        rec(9, true, true, 4.9, HypoLabel::h2),
    };
    CHECK(detection_probability(t) == Catch::Approx(3.0 / 8.0));
}

TEST_CASE("detection on the first scan after entry is one scan of latency") {
    auto t = empty_ssf_trace();
    t.records.push_back(rec(0, false, false, 0.0, HypoLabel::h0));
    t.records.push_back(rec(1, true, true, 8.0, HypoLabel::h3));
    const auto lat = average_sensing_latency(t);
    REQUIRE(lat.completed == 1);
    CHECK(*lat.mean_scans == Catch::Approx(1.0));
    CHECK(*lat.mean_seconds == Catch::Approx(0.01)); // 100 x 100 us scan
}

TEST_CASE("a never-detected interval is censored, not averaged") {
    auto t = empty_ssf_trace();
    for (int i = 0; i < 20; ++i) t.records.push_back(rec(i, true, false, 1.0, HypoLabel::h0));
    const auto lat = average_sensing_latency(t);
    CHECK(lat.completed == 0);
    CHECK_FALSE(lat.mean_scans.has_value());
    CHECK(lat.censored == 1);
}

TEST_CASE("gap lengths {3, 5} average to 4 scans") {
    auto t = empty_ssf_trace();
    int s = 0;
    // entry; detected on the 3rd in-region scan
    t.records.push_back(rec(s++, true, false, 1.0, HypoLabel::h0));
    t.records.push_back(rec(s++, true, false, 1.0, HypoLabel::h0));
    t.records.push_back(rec(s++, true, true, 9.0, HypoLabel::h3));
    // hold, then drop; re-detected on the 5th scan of the gap
    t.records.push_back(rec(s++, true, true, 9.0, HypoLabel::h3));
    for (int i = 0; i < 4; ++i) t.records.push_back(rec(s++, true, false, 1.0, HypoLabel::h1));
    t.records.push_back(rec(s++, true, true, 9.0, HypoLabel::h3));
    const auto lat = average_sensing_latency(t);
    REQUIRE(lat.completed == 2);
    CHECK(*lat.mean_scans == Catch::Approx(4.0));
    CHECK(lat.censored == 0);
}

TEST_CASE("leaving the region censors the open interval") {
    auto t = empty_ssf_trace();
    t.records.push_back(rec(0, true, false, 1.0, HypoLabel::h0)); // entry, open
    t.records.push_back(rec(1, true, false, 1.0, HypoLabel::h0));
    t.records.push_back(rec(2, false, false, 1.0, HypoLabel::h0)); // exit: censor
    t.records.push_back(rec(3, true, false, 1.0, HypoLabel::h0));  // re-entry, open
    t.records.push_back(rec(4, true, true, 9.0, HypoLabel::h3));   // completes, len 2
    const auto lat = average_sensing_latency(t);
    CHECK(lat.completed == 1);
    CHECK(*lat.mean_scans == Catch::Approx(2.0));
    CHECK(lat.censored == 1);
}

TEST_CASE("latency uses protocol-specific detected states") {
    ScenarioTrace t;
    t.meta.protocol = ProtocolKind::earq;
    t.meta.top_threshold = 5.0;
    t.meta.scan_duration_s = 0.01;
    t.records.push_back(rec(0, true, false, 1.0, HypoLabel::lost));
    t.records.push_back(rec(1, true, false, 6.0, HypoLabel::ack)); // ACK ends it
    CHECK(average_sensing_latency(t).completed == 1);

    ScenarioTrace ol;
    ol.meta.protocol = ProtocolKind::openloop;
    ol.meta.top_threshold = 5.0;
    ol.meta.scan_duration_s = 0.01;
    ol.records.push_back(rec(0, true, false, 9.0, HypoLabel::none)); // strong but misaligned
    ol.records.push_back(rec(1, true, true, 9.0, HypoLabel::none));  // aligned: detected
    const auto lat = average_sensing_latency(ol);
    REQUIRE(lat.completed == 1);
    CHECK(*lat.mean_scans == Catch::Approx(2.0));
}

TEST_CASE("spending the whole budget reallocates nothing") {
    auto t = empty_ssf_trace();
    for (int i = 0; i < 5; ++i) t.records.push_back(rec(i, true, true, 8.0, HypoLabel::h3));
    CHECK(power_reallocation_ratio(t) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("using half the linear budget reallocates one half") {
    auto t = empty_ssf_trace();
    const double budget = -10.0;
    const double used = watts_to_dbm(0.5 * dbm_to_watts(budget));
    for (int i = 0; i < 5; ++i)
        t.records.push_back(rec(i, true, true, 8.0, HypoLabel::h3, used, budget));
    CHECK(power_reallocation_ratio(t) == Catch::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("a constant-power open-loop trace reallocates exactly zero") {
    ScenarioTrace t;
    t.meta.protocol = ProtocolKind::openloop;
    t.meta.top_threshold = 5.0;
    t.meta.scan_duration_s = 0.01;
    for (int i = 0; i < 100; ++i)
        t.records.push_back(rec(i, i % 3 == 0, i % 7 == 0, 2.0, HypoLabel::none, -7.0, -7.0));
    CHECK(power_reallocation_ratio(t) == 0.0);
}

TEST_CASE("reallocation stays within [0,1] when used <= budget") {
    auto t = empty_ssf_trace();
    for (int i = 0; i < 50; ++i) {
        const double used = -20.0 + 0.3 * i; // up to -5.3 dBm
        t.records.push_back(rec(i, true, false, 1.0, HypoLabel::h0, used, -5.0));
    }
    const double r = power_reallocation_ratio(t);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
}

TEST_CASE("latency seconds equal scans times the scan duration") {
    auto t = empty_ssf_trace();
    t.meta.scan_duration_s = 0.017;
    t.records.push_back(rec(0, true, false, 1.0, HypoLabel::h0));
    t.records.push_back(rec(1, true, false, 1.0, HypoLabel::h0));
    t.records.push_back(rec(2, true, true, 9.0, HypoLabel::h3));
    const auto lat = average_sensing_latency(t);
    CHECK(*lat.mean_seconds == Catch::Approx(*lat.mean_scans * 0.017));
}

TEST_CASE("lock cycles count transitions into the detected state") {
    auto t = empty_ssf_trace();
    const HypoLabel seq[] = {HypoLabel::h0, HypoLabel::h3, HypoLabel::h3, HypoLabel::h1,
                             HypoLabel::h3, HypoLabel::h0, HypoLabel::h0, HypoLabel::h3};
    int i = 0;
    for (HypoLabel h : seq) t.records.push_back(rec(i++, true, true, 6.0, h));
    CHECK(lock_unlock_cycles(t) == 3);
}

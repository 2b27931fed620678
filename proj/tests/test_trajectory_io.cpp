#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "opmm/error.hpp"
#include "opmm/trajectory_io.hpp"

using namespace opmm;

namespace {

std::vector<RecordingSample> parse(const std::string& text) {
    std::istringstream in(text);
    return parse_recording(in, "mem");
}

// Fixation at `from`, a constant-velocity ramp of `ramp_ms` to `to`, fixation
// again; 1 ms sampling.
std::vector<RecordingSample> ramp_recording(double from, double to, int lead_ms, int ramp_ms, int tail_ms) {
    std::vector<RecordingSample> out;
    const int total = lead_ms + ramp_ms + tail_ms;
    for (int t = 0; t <= total; ++t) {
        double x = from;
        if (t > lead_ms) x = t >= lead_ms + ramp_ms ? to : from + (to - from) * (t - lead_ms) / ramp_ms;
        out.push_back({static_cast<double>(t), x, true});
    }
    return out;
}

}  // namespace

TEST_CASE("parsing a well-formed recording") {
    const auto samples = parse("timestamp_ms,position_deg,valid\n0,1.5,1\n1,-2e-1,0\n\n2.5, 3 ,1\n");
    REQUIRE(samples.size() == 3);
    CHECK(samples[0] == RecordingSample{0.0, 1.5, true});
    CHECK(samples[1] == RecordingSample{1.0, -0.2, false});
    CHECK(samples[2] == RecordingSample{2.5, 3.0, true});

    const auto crlf = parse("\xEF\xBB\xBFtimestamp_ms,position_deg,valid\r\n0,1,1\r\n1,2,1\r\n");
    CHECK(crlf.size() == 2);
    CHECK(parse("timestamp_ms,position_deg,valid\n").empty());
}

TEST_CASE("malformed rows report their line") {
    auto line_of = [](const std::string& text) -> std::size_t {
        try {
            parse(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of("") == 1);
    CHECK(line_of("time,pos,valid\n0,1,1\n") == 1);
    CHECK(line_of("timestamp_ms,position_deg,valid\n0,1,1\n1,abc,1\n") == 3);
    CHECK(line_of("timestamp_ms,position_deg,valid\n0,1\n") == 2);
    CHECK(line_of("timestamp_ms,position_deg,valid\n0,1,1,4\n") == 2);
    CHECK(line_of("timestamp_ms,position_deg,valid\n0,1,yes\n") == 2);
    CHECK(line_of("timestamp_ms,position_deg,valid\n0,nan,1\n") == 2);

    CHECK_THROWS_AS(parse("timestamp_ms,position_deg,valid\n1,0,1\n1,0,1\n"), FormatError);
    CHECK_THROWS_AS(parse("timestamp_ms,position_deg,valid\n2,0,1\n1,0,1\n"), FormatError);
    CHECK_THROWS_AS(load_recording("/nonexistent/recording.csv"), IoError);
}

TEST_CASE("cleaning interpolates short gaps and splits at long ones") {
    std::vector<RecordingSample> s;
    for (int t = 0; t < 12; ++t) s.push_back({static_cast<double>(t), static_cast<double>(t) * 2.0, true});
    s[0].valid = false;             // leading: trimmed
    s[3].valid = s[4].valid = false;  // 2 samples: interpolated
    s[7].valid = s[8].valid = s[9].valid = false;  // 3 samples: split
    s[11].valid = false;            // trailing: trimmed

    const auto segments = clean(s);
    REQUIRE(segments.size() == 2);
    REQUIRE(segments[0].size() == 6);  // t = 1..6
    CHECK(segments[0].front().timestamp_ms == 1.0);
    CHECK(segments[0][2].position_deg == doctest::Approx(6.0));  // t = 3 on the line 2t
    CHECK(segments[0][3].position_deg == doctest::Approx(8.0));
    REQUIRE(segments[1].size() == 1);  // t = 10
    CHECK(segments[1][0].timestamp_ms == 10.0);

    CHECK(clean(std::vector<RecordingSample>{{0, 0, false}, {1, 0, false}}).empty());
}

TEST_CASE("velocity and I-VT labels") {
    const std::vector<double> pos{0.0, 0.1, 0.3, 0.6};
    const auto v = compute_velocity(pos, 1.0);
    CHECK(v[0] == doctest::Approx(100.0));
    CHECK(v[1] == doctest::Approx(150.0));
    CHECK(v[2] == doctest::Approx(250.0));
    CHECK(v[3] == doctest::Approx(300.0));
    CHECK(compute_velocity(pos, 2.0)[1] == doctest::Approx(75.0));
    CHECK_THROWS_AS(compute_velocity(std::vector<double>{1.0}, 1.0), InputError);
    CHECK_THROWS_AS(compute_velocity(pos, 0.0), InputError);

    const std::vector<double> speeds{30.0, 30.0001, -31.0, 0.0};
    const auto labels = classify_ivt(speeds, 30.0);
    CHECK(labels[0] == SampleLabel::fixation);  // threshold itself is not a saccade
    CHECK(labels[1] == SampleLabel::saccade);
    CHECK(labels[2] == SampleLabel::saccade);
    CHECK(labels[3] == SampleLabel::fixation);
    CHECK_THROWS_AS(classify_ivt(speeds, 0.0), InputError);
}

TEST_CASE("extraction keeps runs of two or more samples") {
    std::vector<RecordingSample> s;
    for (int t = 0; t < 10; ++t) s.push_back({10.0 + t * 2.0, static_cast<double>(t), true});
    using L = SampleLabel;
    const std::vector<L> labels{L::saccade, L::fixation, L::saccade, L::saccade, L::saccade,
                                L::fixation, L::fixation, L::saccade, L::saccade, L::fixation};
    const auto out = extract_saccades(s, labels, 5);
    REQUIRE(out.size() == 2);
    CHECK(out[0].saccade_id == 5);
    CHECK(out[0].onset_time == 14.0);
    CHECK(out[0].first_sample == 2);
    CHECK(out[0].dt == 2.0);
    CHECK(out[0].positions == std::vector<double>{2, 3, 4});
    CHECK(out[0].amplitude() == 2.0);
    CHECK(out[0].duration() == 4.0);
    CHECK(out[1].saccade_id == 6);
    CHECK_THROWS_AS(extract_saccades(s, std::vector<L>(3, L::saccade)), InputError);
}

TEST_CASE("quality filter boundaries are inclusive") {
    SaccadeTrajectory a{1, 1.0, {0, 2, 4}, 0, 0};            // 4 deg, 2 ms
    SaccadeTrajectory b{2, 1.0, {0, 1, 2, 3, 4, 5, 4}, 0, 0};  // 4 deg, 6 ms
    SaccadeTrajectory c{3, 1.0, {0, -1, -2, -3, -4, -5, -3.9}, 0, 0};
    const std::vector<SaccadeTrajectory> all{a, b, c};
    const auto kept = filter_saccades(all);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].saccade_id == 2);
    CHECK(filter_saccades(all, 1.0, 1.0).size() == 3);
}

TEST_CASE("detecting a single ramp") {
    const auto rec = ramp_recording(1.0, 11.0, 100, 50, 100);  // 200 deg/s
    const auto found = detect_saccades(rec);
    REQUIRE(found.size() == 1);
    const auto& s = found[0];
    CHECK(s.saccade_id == 1);
    CHECK(s.onset_time == 100.0);
    CHECK(s.duration() == 50.0);
    CHECK(s.positions.front() == 1.0);
    CHECK(s.positions.back() == 11.0);
    CHECK(s.dt == 1.0);

    auto irregular = rec;
    irregular[10].timestamp_ms += 0.5;
    CHECK_THROWS_AS(detect_saccades(irregular), FormatError);
}

TEST_CASE("saccade ids span segments and survive filtering") {
    auto rec = ramp_recording(0.0, 10.0, 50, 40, 50);
    auto second = ramp_recording(10.0, 11.0, 50, 20, 50);  // 50 deg/s but only 1 deg
    auto third = ramp_recording(11.0, 3.0, 50, 40, 50);
    double t = rec.back().timestamp_ms;
    for (auto part : {second, third}) {
        for (auto& s : part) {
            s.timestamp_ms += t + 1.0;
            rec.push_back(s);
        }
        t = rec.back().timestamp_ms;
    }
    // A long invalid stretch between the second and third ramps splits the recording.
    for (std::size_t i = 300; i < 310; ++i) rec[i].valid = false;

    const auto found = detect_saccades(rec, {}, 7);
    REQUIRE(found.size() == 2);
    CHECK(found[0].saccade_id == 7);
    CHECK(found[1].saccade_id == 9);
    CHECK(found[1].positions.back() < found[1].positions.front());
}

TEST_CASE("property: cleaned segments are valid, increasing and uniform") {
    std::mt19937 rng(17);
    std::bernoulli_distribution dropout(0.15);
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<RecordingSample> rec;
        for (int t = 0; t < 200; ++t) rec.push_back({t * 2.0, jitter(rng), !dropout(rng)});
        std::size_t kept = 0;
        for (const auto& seg : clean(rec)) {
            kept += seg.size();
            for (std::size_t i = 0; i < seg.size(); ++i) {
                REQUIRE(seg[i].valid);
                if (i > 0) REQUIRE(seg[i].timestamp_ms > seg[i - 1].timestamp_ms);
            }
            if (seg.size() >= 2) REQUIRE(segment_interval(seg) == 2.0);
        }
        REQUIRE(kept <= rec.size());
    }
}

TEST_CASE("property: detected saccades respect the filter and id order") {
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> amp(-20.0, 20.0);
    std::uniform_int_distribution<int> width(2, 60);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<RecordingSample> rec;
        double x = 0.0;
        double t = 0.0;
        for (int k = 0; k < 5; ++k) {
            const double to = x + amp(rng);
            for (const auto& s : ramp_recording(x, to, 30, width(rng), 0)) rec.push_back({t + s.timestamp_ms, s.position_deg, true});
            t = rec.back().timestamp_ms + 1.0;
            x = to;
        }
        const auto found = detect_saccades(rec);
        for (std::size_t i = 0; i < found.size(); ++i) {
            REQUIRE(found[i].amplitude() >= kDefaultMinAmplitude);
            REQUIRE(found[i].duration() >= kDefaultMinDuration);
            if (i > 0) REQUIRE(found[i].saccade_id > found[i - 1].saccade_id);
        }
    }
}

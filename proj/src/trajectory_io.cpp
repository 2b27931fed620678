#include "opmm/trajectory_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string_view>

#include "opmm/error.hpp"

namespace opmm {

double SaccadeTrajectory::amplitude() const {
    if (positions.empty()) return 0.0;
    return std::abs(positions.back() - positions.front());
}

double SaccadeTrajectory::duration() const {
    if (positions.size() < 2) return 0.0;
    return static_cast<double>(positions.size() - 1) * dt;
}

void SaccadeTrajectory::validate() const {
    const std::string who = "saccade " + std::to_string(saccade_id);
    if (positions.size() < 2) throw InputError(who + ": needs at least two samples");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError(who + ": sample interval must be positive");
    for (double p : positions) {
        if (!std::isfinite(p)) throw InputError(who + ": non-finite position");
    }
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view text, double& out) {
    text = trim(text);
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size() && std::isfinite(out);
}

}  // namespace

std::vector<RecordingSample> parse_recording(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& why) {
        throw ParseError(line_no, source + ":" + std::to_string(line_no) + ": " + why);
    };

    if (!std::getline(in, line)) {
        line_no = 1;
        fail("missing header");
    }
    ++line_no;
    std::string_view header = trim(line);
    if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
    if (header != kRecordingHeader) fail(std::string("expected header '") + kRecordingHeader + "'");

    std::vector<RecordingSample> samples;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view row = trim(line);
        if (row.empty()) continue;

        std::string_view fields[3];
        std::size_t count = 0;
        std::size_t start = 0;
        while (true) {
            const auto comma = row.find(',', start);
            if (count == 3) fail("too many columns");
            fields[count++] = row.substr(start, comma == std::string_view::npos ? comma : comma - start);
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (count != 3) fail("expected 3 columns, found " + std::to_string(count));

        RecordingSample s;
        if (!parse_double(fields[0], s.timestamp_ms)) fail("bad timestamp '" + std::string(fields[0]) + "'");
        if (!parse_double(fields[1], s.position_deg)) fail("bad position '" + std::string(fields[1]) + "'");
        const auto flag = trim(fields[2]);
        if (flag == "1") {
            s.valid = true;
        } else if (flag == "0") {
            s.valid = false;
        } else {
            fail("valid flag must be 0 or 1, got '" + std::string(flag) + "'");
        }

        if (!samples.empty() && !(s.timestamp_ms > samples.back().timestamp_ms)) {
            throw FormatError(source + ":" + std::to_string(line_no) +
                              ": timestamps must be strictly increasing");
        }
        samples.push_back(s);
    }
    return samples;
}

std::vector<RecordingSample> load_recording(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return parse_recording(in, path.string());
}

std::vector<Segment> clean(std::span<const RecordingSample> samples) {
    std::vector<Segment> segments;
    Segment current;
    std::size_t i = 0;
    while (i < samples.size()) {
        if (samples[i].valid) {
            current.push_back(samples[i]);
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < samples.size() && !samples[j].valid) ++j;
        const std::size_t gap = j - i;
        const bool interior = !current.empty() && j < samples.size();
        if (interior && gap < kMaxInterpolatedGap) {
            const RecordingSample& left = current.back();
            const RecordingSample& right = samples[j];
            const double span = right.timestamp_ms - left.timestamp_ms;
            for (std::size_t k = i; k < j; ++k) {
                const double w = (samples[k].timestamp_ms - left.timestamp_ms) / span;
                current.push_back({samples[k].timestamp_ms,
                                   left.position_deg + w * (right.position_deg - left.position_deg), true});
            }
        } else if (!current.empty()) {
            segments.push_back(std::move(current));
            current.clear();
        }
        i = j;
    }
    if (!current.empty()) segments.push_back(std::move(current));
    return segments;
}

std::vector<double> compute_velocity(std::span<const double> positions, double dt_ms) {
    if (positions.size() < 2) throw InputError("velocity needs at least two samples");
    if (!(dt_ms > 0.0)) throw InputError("sample interval must be positive");
    const std::size_t n = positions.size();
    const double scale = 1000.0 / dt_ms;
    std::vector<double> v(n);
    v[0] = (positions[1] - positions[0]) * scale;
    v[n - 1] = (positions[n - 1] - positions[n - 2]) * scale;
    for (std::size_t i = 1; i + 1 < n; ++i) v[i] = (positions[i + 1] - positions[i - 1]) * 0.5 * scale;
    return v;
}

std::vector<SampleLabel> classify_ivt(std::span<const double> velocities, double threshold_dps) {
    if (!(threshold_dps > 0.0)) throw InputError("I-VT threshold must be positive");
    std::vector<SampleLabel> labels(velocities.size());
    std::transform(velocities.begin(), velocities.end(), labels.begin(), [&](double v) {
        return std::abs(v) > threshold_dps ? SampleLabel::saccade : SampleLabel::fixation;
    });
    return labels;
}

std::vector<SaccadeTrajectory> extract_saccades(std::span<const RecordingSample> samples,
                                                std::span<const SampleLabel> labels, int first_id) {
    if (samples.size() != labels.size()) throw InputError("labels must align with samples");
    std::vector<SaccadeTrajectory> out;
    int next_id = first_id;
    std::size_t i = 0;
    while (i < labels.size()) {
        if (labels[i] != SampleLabel::saccade) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < labels.size() && labels[j] == SampleLabel::saccade) ++j;
        const std::size_t count = j - i;
        if (count >= 2) {
            SaccadeTrajectory s;
            s.saccade_id = next_id++;
            s.onset_time = samples[i].timestamp_ms;
            s.first_sample = i;
            s.dt = (samples[j - 1].timestamp_ms - samples[i].timestamp_ms) / static_cast<double>(count - 1);
            s.positions.reserve(count);
            for (std::size_t k = i; k < j; ++k) s.positions.push_back(samples[k].position_deg);
            out.push_back(std::move(s));
        }
        i = j;
    }
    return out;
}

std::vector<SaccadeTrajectory> filter_saccades(std::span<const SaccadeTrajectory> saccades,
                                               double min_amplitude_deg, double min_duration_ms) {
    std::vector<SaccadeTrajectory> kept;
    std::copy_if(saccades.begin(), saccades.end(), std::back_inserter(kept), [&](const auto& s) {
        return s.amplitude() >= min_amplitude_deg && s.duration() >= min_duration_ms;
    });
    return kept;
}

double segment_interval(std::span<const RecordingSample> segment) {
    if (segment.size() < 2) throw InputError("segment needs at least two samples");
    const double dt = segment[1].timestamp_ms - segment[0].timestamp_ms;
    const double tol = 1e-6 * dt + 1e-9;
    for (std::size_t i = 2; i < segment.size(); ++i) {
        const double step = segment[i].timestamp_ms - segment[i - 1].timestamp_ms;
        if (std::abs(step - dt) > tol) {
            throw FormatError("non-uniform sampling at t = " + std::to_string(segment[i].timestamp_ms) +
                              " ms");
        }
    }
    return dt;
}

std::vector<SaccadeTrajectory> detect_saccades(std::span<const RecordingSample> samples,
                                               const DetectionOptions& options, int first_id) {
    std::vector<SaccadeTrajectory> found;
    int next_id = first_id;
    for (const Segment& segment : clean(samples)) {
        if (segment.size() < 2) continue;
        const double dt = segment_interval(segment);
        std::vector<double> positions(segment.size());
        std::transform(segment.begin(), segment.end(), positions.begin(),
                       [](const RecordingSample& s) { return s.position_deg; });
        const auto labels = classify_ivt(compute_velocity(positions, dt), options.ivt_threshold);
        auto extracted = extract_saccades(segment, labels, next_id);
        for (auto& s : extracted) s.dt = dt;
        next_id += static_cast<int>(extracted.size());
        found.insert(found.end(), std::make_move_iterator(extracted.begin()),
                     std::make_move_iterator(extracted.end()));
    }
    return filter_saccades(found, options.min_amplitude, options.min_duration);
}

}  // namespace opmm

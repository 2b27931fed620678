#pragma once

// Recording ingestion and saccade detection: CSV parsing, artifact cleaning,
// velocity estimation, I-VT labelling, extraction and quality filtering.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace opmm {

inline constexpr const char* kRecordingHeader = "timestamp_ms,position_deg,valid";

struct RecordingSample {
    double timestamp_ms = 0.0;
    double position_deg = 0.0;
    bool valid = true;

    bool operator==(const RecordingSample&) const = default;
};

using Segment = std::vector<RecordingSample>;

struct SaccadeTrajectory {
    int saccade_id = 0;  // 1-based
    double dt = 0.0;     // ms
    std::vector<double> positions;
    double onset_time = 0.0;  // ms
    // Index of the first sample within the segment it was extracted from.
    std::size_t first_sample = 0;

    double amplitude() const;
    double duration() const;
    // Throws InputError if fewer than two samples, dt <= 0, or a position is non-finite.
    void validate() const;
};

enum class SampleLabel { fixation, saccade };

// `source` names the stream in error messages.
std::vector<RecordingSample> parse_recording(std::istream& in, const std::string& source = "input");
// Throws IoError when the file cannot be opened.
std::vector<RecordingSample> load_recording(const std::filesystem::path& path);

// Removes invalid samples. Interior gaps of fewer than kMaxInterpolatedGap
// samples are filled by linear interpolation; longer gaps and leading or
// trailing invalid runs split or trim the recording.
inline constexpr std::size_t kMaxInterpolatedGap = 3;
std::vector<Segment> clean(std::span<const RecordingSample> samples);

// deg/s; central differences inside, one-sided at the ends. dt in ms.
std::vector<double> compute_velocity(std::span<const double> positions, double dt_ms);

inline constexpr double kDefaultIvtThreshold = 30.0;  // deg/s
std::vector<SampleLabel> classify_ivt(std::span<const double> velocities, double threshold_dps);

// Each maximal run of saccade labels (of at least two samples) becomes one
// trajectory; ids count up from first_id in temporal order.
std::vector<SaccadeTrajectory> extract_saccades(std::span<const RecordingSample> samples,
                                                std::span<const SampleLabel> labels,
                                                int first_id = 1);

inline constexpr double kDefaultMinAmplitude = 4.0;  // deg
inline constexpr double kDefaultMinDuration = 6.0;   // ms
std::vector<SaccadeTrajectory> filter_saccades(std::span<const SaccadeTrajectory> saccades,
                                               double min_amplitude_deg = kDefaultMinAmplitude,
                                               double min_duration_ms = kDefaultMinDuration);

struct DetectionOptions {
    double ivt_threshold = kDefaultIvtThreshold;
    double min_amplitude = kDefaultMinAmplitude;
    double min_duration = kDefaultMinDuration;
};

// clean -> velocity -> I-VT -> extract -> filter over one recording. Ids run
// from first_id across all segments and are kept through filtering.
std::vector<SaccadeTrajectory> detect_saccades(std::span<const RecordingSample> samples,
                                               const DetectionOptions& options = {},
                                               int first_id = 1);

// Uniform sample interval of a cleaned segment; throws FormatError otherwise.
double segment_interval(std::span<const RecordingSample> segment);

}  // namespace opmm

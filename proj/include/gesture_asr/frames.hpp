#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gesture_asr/clients.hpp"

namespace gesture_asr::clients {

/// Lists the image files of a directory of pre-extracted frames. The timestamp
/// (ms) is the last run of digits in the file stem: "frame_006250.jpg" -> 6250.
std::vector<Frame> list_frames(const std::filesystem::path& dir);

/// Picks `count` frames evenly spaced inside `segment` (all of them when fewer
/// are available). Without a segment, the span of the frames themselves is used.
/// The frame-set id is the directory name. Throws IoError for a missing directory
/// and std::invalid_argument when no frame falls inside the segment.
FrameSet sample_frames(const std::filesystem::path& dir, const std::optional<TimeSpan>& segment, std::size_t count = 4);

/// Runs an external extraction command, e.g.
///   ffmpeg -ss {start_s} -to {end_s} -i {video} -vf fps=4 {out_dir}/frame_%06d.jpg
/// Placeholders {video}, {out_dir}, {start_ms}, {end_ms}, {start_s}, {end_s} are
/// substituted. Throws std::runtime_error on a non-zero exit status.
void extract_frames_with_command(const std::string& command_template, const std::filesystem::path& video,
                                 const std::filesystem::path& out_dir, const TimeSpan& segment);

}  // namespace gesture_asr::clients

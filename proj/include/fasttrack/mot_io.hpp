#ifndef FASTTRACK_MOT_IO_HPP
#define FASTTRACK_MOT_IO_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "fasttrack/metrics.hpp"
#include "fasttrack/tracker.hpp"

namespace fasttrack {

class ParseError : public std::runtime_error {
  public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
  public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// One line of the interchange format:
// frame,id,bb_left,bb_top,bb_width,bb_height,conf,x,y,z with x = y = z = -1
// and floats printed with two fixed decimals. Detections carry id = -1,
// ground truth carries conf = 1.
struct MotRow {
    int frame = 0;
    int id = 0;
    double left = 0.0;
    double top = 0.0;
    double width = 0.0;
    double height = 0.0;
    double conf = 0.0;
};

std::string format_mot_rows(const std::vector<MotRow>& rows);
std::vector<MotRow> parse_mot_text(const std::string& text, const std::string& source_name);

void write_mot_file(const std::string& path, const std::vector<MotRow>& rows);
std::vector<MotRow> read_mot_file(const std::string& path);

// Sidecar carrying detection embeddings at full precision, keyed by frame and
// detection index within the frame.
struct EmbeddingRow {
    int frame = 0;
    int index = 0;
    std::vector<double> values;
};

void write_embedding_file(const std::string& path, const std::vector<EmbeddingRow>& rows);
std::vector<EmbeddingRow> read_embedding_file(const std::string& path);

std::vector<MotRow> to_mot_rows(const std::vector<TrackRecord>& records);
std::vector<LabeledFrame> rows_to_labeled_frames(const std::vector<MotRow>& rows);

}  // namespace fasttrack

#endif

#include "fasttrack/mot_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace fasttrack {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) fields.push_back(field);
    return fields;
}

double parse_double(const std::string& s, const std::string& context) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ParseError(context + ": '" + s + "' is not a number");
    }
    if (pos != s.size()) throw ParseError(context + ": trailing characters in '" + s + "'");
    return v;
}

int parse_int(const std::string& s, const std::string& context) {
    std::size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(s, &pos);
    } catch (const std::exception&) {
        throw ParseError(context + ": '" + s + "' is not an integer");
    }
    if (pos != s.size()) throw ParseError(context + ": trailing characters in '" + s + "'");
    return static_cast<int>(v);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace

std::string format_mot_rows(const std::vector<MotRow>& rows) {
    std::string out;
    char line[160];
    for (const MotRow& row : rows) {
        std::snprintf(line, sizeof(line), "%d,%d,%.2f,%.2f,%.2f,%.2f,%.2f,-1,-1,-1\n",
                      row.frame, row.id, row.left, row.top, row.width, row.height, row.conf);
        out += line;
    }
    return out;
}

std::vector<MotRow> parse_mot_text(const std::string& text, const std::string& source_name) {
    std::vector<MotRow> rows;
    std::istringstream in(text);
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        const std::string context = source_name + ":" + std::to_string(line_number);
        const auto fields = split(line, ',');
        if (fields.size() != 10) {
            throw ParseError(context + ": expected 10 comma-separated fields, got " +
                             std::to_string(fields.size()));
        }
        MotRow row;
        row.frame = parse_int(fields[0], context);
        row.id = parse_int(fields[1], context);
        row.left = parse_double(fields[2], context);
        row.top = parse_double(fields[3], context);
        row.width = parse_double(fields[4], context);
        row.height = parse_double(fields[5], context);
        row.conf = parse_double(fields[6], context);
        rows.push_back(row);
    }
    return rows;
}

void write_mot_file(const std::string& path, const std::vector<MotRow>& rows) {
    write_text_file(path, format_mot_rows(rows));
}

std::vector<MotRow> read_mot_file(const std::string& path) {
    return parse_mot_text(read_text_file(path), path);
}

void write_embedding_file(const std::string& path, const std::vector<EmbeddingRow>& rows) {
    std::ostringstream out;
    const std::size_t dim = rows.empty() ? 0 : rows.front().values.size();
    out << "dim " << dim << "\n";
    char num[40];
    for (const EmbeddingRow& row : rows) {
        if (row.values.size() != dim) {
            throw std::invalid_argument("embedding rows have inconsistent dimensions");
        }
        out << row.frame << " " << row.index;
        for (double v : row.values) {
            std::snprintf(num, sizeof(num), " %.17g", v);
            out << num;
        }
        out << "\n";
    }
    write_text_file(path, out.str());
}

std::vector<EmbeddingRow> read_embedding_file(const std::string& path) {
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    int line_number = 0;

    if (!std::getline(in, line)) throw ParseError(path + ":1: missing header");
    ++line_number;
    std::istringstream header(line);
    std::string tag;
    std::size_t dim = 0;
    if (!(header >> tag >> dim) || tag != "dim") {
        throw ParseError(path + ":1: expected 'dim <n>' header");
    }

    std::vector<EmbeddingRow> rows;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        const std::string context = path + ":" + std::to_string(line_number);
        std::istringstream fields(line);
        EmbeddingRow row;
        if (!(fields >> row.frame >> row.index)) {
            throw ParseError(context + ": expected frame and index");
        }
        row.values.resize(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            if (!(fields >> row.values[i])) {
                throw ParseError(context + ": expected " + std::to_string(dim) + " values");
            }
        }
        double extra;
        if (fields >> extra) throw ParseError(context + ": more values than declared dim");
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<MotRow> to_mot_rows(const std::vector<TrackRecord>& records) {
    std::vector<MotRow> rows;
    rows.reserve(records.size());
    for (const TrackRecord& rec : records) {
        rows.push_back({rec.frame, rec.track_id, rec.box.left, rec.box.top, rec.box.width,
                        rec.box.height, rec.confidence});
    }
    return rows;
}

std::vector<LabeledFrame> rows_to_labeled_frames(const std::vector<MotRow>& rows) {
    std::map<int, LabeledFrame> by_frame;
    for (const MotRow& row : rows) {
        LabeledFrame& frame = by_frame[row.frame];
        frame.frame = row.frame;
        frame.entries.push_back({row.id, {row.left, row.top, row.width, row.height}});
    }
    std::vector<LabeledFrame> frames;
    frames.reserve(by_frame.size());
    for (auto& [idx, frame] : by_frame) {
        (void)idx;
        frames.push_back(std::move(frame));
    }
    return frames;
}

}  // namespace fasttrack

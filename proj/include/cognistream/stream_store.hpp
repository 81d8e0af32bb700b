#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cognistream/errors.hpp"
#include "cognistream/ids.hpp"

namespace cognistream {

// One appended chunk of the raw input stream. Timestamps are caller-supplied
// logical ticks, never wall clock.
struct Segment {
    SegmentId id = 0;
    Bytes bytes;
    std::int64_t timestamp = 0;
    std::string source_tag;
};

// A run of window_size consecutive tokens; the time axis for relevancy,
// hypothesis checking and forecasting.
struct StreamWindow {
    WindowIndex index = 0;
    SegmentId first_segment = 0;
    SegmentId last_segment = 0;
    std::int64_t token_count = 0;
};

struct SnapshotEntry {
    SegmentId id;
    std::int64_t timestamp;
    std::uint64_t length;
};

// Append-only segment log. In-memory by default; file-backed when opened on a
// directory (segments.bin holds the raw concatenated bytes, segments.idx one
// tab-separated record per segment so the data file stays frame-free).
class StreamStore {
  public:
    StreamStore() = default;

    explicit StreamStore(const std::filesystem::path& dir) : dir_(dir), file_backed_(true) {
        std::filesystem::create_directories(dir_);
        load();
    }

    SegmentId append(Bytes bytes, std::int64_t timestamp, std::string_view source_tag) {
        if (bytes.empty()) raise(Errc::EmptySegment, "stream_store", "refusing zero-length segment");
        if (!segments_.empty() && timestamp < segments_.back().timestamp) {
            raise(Errc::TimestampRegression, "stream_store",
                  "timestamp " + std::to_string(timestamp) + " < last " +
                      std::to_string(segments_.back().timestamp));
        }
        if (source_tag.find('\t') != std::string_view::npos ||
            source_tag.find('\n') != std::string_view::npos) {
            raise(Errc::BadConfig, "stream_store", "source_tag may not contain tab or newline");
        }
        Segment seg;
        seg.id = static_cast<SegmentId>(segments_.size());
        seg.bytes = std::move(bytes);
        seg.timestamp = timestamp;
        seg.source_tag = std::string(source_tag);
        if (file_backed_) persist(seg);
        segments_.push_back(std::move(seg));
        return segments_.back().id;
    }

    const Segment& read(SegmentId id) const {
        if (id < 0 || static_cast<std::size_t>(id) >= segments_.size()) {
            raise(Errc::UnknownSegment, "stream_store", "segment " + std::to_string(id));
        }
        return segments_[static_cast<std::size_t>(id)];
    }

    std::vector<SnapshotEntry> snapshot() const {
        std::vector<SnapshotEntry> out;
        out.reserve(segments_.size());
        for (const Segment& s : segments_) out.push_back({s.id, s.timestamp, s.bytes.size()});
        return out;
    }

    std::span<const Segment> segments() const { return segments_; }
    std::size_t size() const { return segments_.size(); }
    bool empty() const { return segments_.empty(); }

    std::int64_t last_timestamp() const {
        return segments_.empty() ? 0 : segments_.back().timestamp;
    }

  private:
    std::filesystem::path data_path() const { return dir_ / "segments.bin"; }
    std::filesystem::path index_path() const { return dir_ / "segments.idx"; }

    void persist(const Segment& seg) {
        std::uint64_t offset = 0;
        for (const Segment& s : segments_) offset += s.bytes.size();
        std::ofstream data(data_path(), std::ios::binary | std::ios::app);
        data.write(seg.bytes.data(), static_cast<std::streamsize>(seg.bytes.size()));
        if (!data) raise(Errc::IoError, "stream_store", "write failed: " + data_path().string());
        data.flush();
        std::ofstream idx(index_path(), std::ios::binary | std::ios::app);
        idx << seg.id << '\t' << offset << '\t' << seg.bytes.size() << '\t' << seg.timestamp
            << '\t' << seg.source_tag << '\n';
        if (!idx) raise(Errc::IoError, "stream_store", "write failed: " + index_path().string());
        idx.flush();
    }

    void load() {
        std::ifstream idx(index_path(), std::ios::binary);
        if (!idx) return;  // empty store
        std::ifstream data(data_path(), std::ios::binary);
        if (!data) raise(Errc::IoError, "stream_store", "missing data file beside index");
        std::string line;
        while (std::getline(idx, line)) {
            if (line.empty()) continue;
            Segment seg;
            std::uint64_t offset = 0;
            std::uint64_t length = 0;
            std::size_t field = 0;
            std::size_t start = 0;
            for (std::size_t i = 0; i <= line.size(); ++i) {
                if (i != line.size() && line[i] != '\t') continue;
                std::string tok = line.substr(start, i - start);
                switch (field) {
                    case 0: seg.id = std::stoll(tok); break;
                    case 1: offset = std::stoull(tok); break;
                    case 2: length = std::stoull(tok); break;
                    case 3: seg.timestamp = std::stoll(tok); break;
                    case 4: seg.source_tag = tok; break;
                    default: raise(Errc::IoError, "stream_store", "malformed index line");
                }
                ++field;
                start = i + 1;
            }
            if (field != 5) raise(Errc::IoError, "stream_store", "malformed index line");
            if (seg.id != static_cast<SegmentId>(segments_.size())) {
                raise(Errc::IoError, "stream_store", "non-dense segment ids in index");
            }
            seg.bytes.resize(length);
            data.seekg(static_cast<std::streamoff>(offset));
            data.read(seg.bytes.data(), static_cast<std::streamsize>(length));
            if (!data) raise(Errc::IoError, "stream_store", "truncated data file");
            segments_.push_back(std::move(seg));
        }
    }

    std::filesystem::path dir_;
    bool file_backed_ = false;
    std::vector<Segment> segments_;
};

}  // namespace cognistream

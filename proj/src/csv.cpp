#include "transepi/csv.hpp"

#include <stdexcept>

#include "transepi/util.hpp"

namespace transepi {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cell;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '"') {
            if (quoted && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else {
                quoted = !quoted;
            }
        } else if (c == ',' && !quoted) {
            fields.push_back(std::move(cell));
            cell.clear();
        } else if (c == '\r') {
            continue;
        } else {
            cell += c;
        }
    }
    fields.push_back(std::move(cell));
    return fields;
}

std::string csv_escape(const std::string& field) {
    bool needs_quoting = field.find_first_of(",\"\n") != std::string::npos;
    if (!needs_quoting) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

CsvReader::CsvReader(const std::string& path) : path_(path) {
    content_ = read_file(path);
    // Strip UTF-8 BOM.
    if (content_.size() >= 3 && (unsigned char)content_[0] == 0xEF &&
        (unsigned char)content_[1] == 0xBB && (unsigned char)content_[2] == 0xBF) {
        content_.erase(0, 3);
    }
    std::string line;
    while (next_line(line)) {
        if (line.empty() || line[0] == '#') continue;
        header_ = split_csv_line(line);
        break;
    }
    if (header_.empty()) throw std::runtime_error("csv file has no header: " + path);
    for (size_t i = 0; i < header_.size(); ++i) {
        column_index_.emplace(header_[i], int(i));
    }
}

int CsvReader::column(const std::string& name) const {
    auto it = column_index_.find(name);
    return it == column_index_.end() ? -1 : it->second;
}

bool CsvReader::next_line(std::string& line) {
    if (pos_ >= content_.size()) return false;
    size_t nl = content_.find('\n', pos_);
    if (nl == std::string::npos) {
        line = content_.substr(pos_);
        pos_ = content_.size();
    } else {
        line = content_.substr(pos_, nl - pos_);
        pos_ = nl + 1;
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_number_;
    return true;
}

bool CsvReader::next(std::vector<std::string>& row) {
    std::string line;
    while (next_line(line)) {
        if (line.empty() || line[0] == '#') continue;
        row = split_csv_line(line);
        return true;
    }
    return false;
}

void CsvWriter::comment(const std::string& text) {
    out_ += "# ";
    out_ += text;
    out_ += '\n';
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ += ',';
        out_ += csv_escape(fields[i]);
    }
    out_ += '\n';
}

}  // namespace transepi
